#include "vftop/coloring.hpp"

#include <algorithm>
#include <set>

#include "vftop/errors.hpp"

namespace vftop {

namespace {

constexpr Transition PM = Transition::PlusToMinus;
constexpr Transition MP = Transition::MinusToPlus;

struct ColorDef {
    int n;
    Slot s[2];
};

constexpr ColorDef kColors[kColorCount] = {
    {0, {{0, PM}, {0, PM}}},
    {1, {{1, PM}, {0, PM}}},
    {1, {{1, MP}, {0, PM}}},
    {1, {{2, PM}, {0, PM}}},
    {1, {{2, MP}, {0, PM}}},
    {2, {{1, PM}, {2, PM}}},
    {2, {{1, PM}, {2, MP}}},
    {2, {{1, MP}, {2, PM}}},
    {2, {{1, MP}, {2, MP}}},
    {2, {{2, PM}, {1, PM}}},
    {2, {{2, PM}, {1, MP}}},
    {2, {{2, MP}, {1, PM}}},
    {2, {{2, MP}, {1, MP}}},
};

constexpr int kFlip[kColorCount + 1] = {0, 1, 3, 2, 5, 4, 9, 8, 7, 6, 13, 12, 11, 10};

void check_id(int id) {
    if (id < 1 || id > kColorCount)
        throw Error(ErrorCode::InvalidColoring, "color id " + std::to_string(id) + " out of range");
}

}  // namespace

std::string shape_name(Shape s) { return s == Shape::Triangle ? "tri" : "quad"; }

std::span<const Slot> color_slots(int id) {
    check_id(id);
    const ColorDef& d = kColors[id - 1];
    return {d.s, static_cast<std::size_t>(d.n)};
}

int color_from_slots(std::span<const Slot> slots) {
    for (int id = 1; id <= kColorCount; ++id) {
        auto s = color_slots(id);
        if (std::equal(s.begin(), s.end(), slots.begin(), slots.end())) return id;
    }
    throw Error(ErrorCode::InvalidColoring, "no color for slot list");
}

int flip_color(int id) {
    check_id(id);
    return kFlip[id];
}

CellColoring::CellColoring(Shape s, std::initializer_list<int> ids) : shape(s) {
    if (static_cast<int>(ids.size()) != edge_count(s))
        throw Error(ErrorCode::InvalidColoring, "tuple length does not match shape");
    int i = 0;
    for (int id : ids) {
        check_id(id);
        colors[i++] = static_cast<std::uint8_t>(id);
    }
}

std::uint32_t CellColoring::key() const {
    std::uint32_t k = 0, m = 1;
    for (int i = 0; i < size(); ++i) {
        k += static_cast<std::uint32_t>(colors[i] - 1) * m;
        m *= kColorCount;
    }
    return k;
}

CellColoring CellColoring::from_key(Shape s, std::uint32_t key) {
    CellColoring t;
    t.shape = s;
    for (int i = 0; i < edge_count(s); ++i) {
        t.colors[i] = static_cast<std::uint8_t>(key % kColorCount + 1);
        key /= kColorCount;
    }
    return t;
}

std::string CellColoring::str() const {
    std::string out = "(";
    for (int i = 0; i < size(); ++i) {
        if (i) out += ",";
        out += std::to_string(colors[i]);
    }
    return out + ")";
}

bool CellColoring::operator==(const CellColoring& o) const {
    if (shape != o.shape) return false;
    return std::equal(colors.begin(), colors.begin() + size(), o.colors.begin());
}

bool CellColoring::operator<(const CellColoring& o) const {
    if (shape != o.shape) return shape < o.shape;
    return std::lexicographical_compare(colors.begin(), colors.begin() + size(), o.colors.begin(),
                                        o.colors.begin() + o.size());
}

std::uint32_t key_space(Shape s) { return s == Shape::Triangle ? 2197u : 28561u; }

std::vector<GroupElement> group_elements(Shape s) {
    std::vector<GroupElement> g;
    for (int f = 0; f < 2; ++f)
        for (int r = 0; r < edge_count(s); ++r) g.push_back({r, f == 1});
    return g;
}

GroupElement compose(Shape s, GroupElement g, GroupElement h) {
    return {(g.rotation + h.rotation) % edge_count(s), g.flip != h.flip};
}

CellColoring act(GroupElement g, const CellColoring& t) {
    const int n = t.size();
    if (g.rotation < 0 || g.rotation >= n)
        throw Error(ErrorCode::RotationOutOfRange, "rotation " + std::to_string(g.rotation));
    CellColoring u = t;
    for (int i = 0; i < n; ++i) {
        int c = t.colors[((i - g.rotation) % n + n) % n];
        u.colors[i] = static_cast<std::uint8_t>(g.flip ? kFlip[c] : c);
    }
    return u;
}

std::vector<CellColoring> orbit(const CellColoring& t) {
    std::vector<CellColoring> out;
    for (auto g : group_elements(t.shape)) {
        auto u = act(g, t);
        if (std::find(out.begin(), out.end(), u) == out.end()) out.push_back(u);
    }
    return out;
}

CellColoring canonical(const CellColoring& t) {
    auto o = orbit(t);
    return *std::min_element(o.begin(), o.end());
}

namespace {

std::vector<std::pair<int, Transition>> component_transitions(const CellColoring& t, int comp) {
    std::vector<std::pair<int, Transition>> tr;
    for (int e = 0; e < t.size(); ++e)
        for (const Slot& s : color_slots(t.colors[e]))
            if (s.component == comp) tr.emplace_back(e, s.transition);
    return tr;
}

}  // namespace

bool is_valid_coloring(const CellColoring& t) {
    for (int comp = 1; comp <= 2; ++comp) {
        auto tr = component_transitions(t, comp);
        if (tr.size() % 2) return false;
        for (std::size_t i = 0; i < tr.size(); ++i)
            if (tr[i].second == tr[(i + 1) % tr.size()].second) return false;
    }
    return true;
}

VertexSignConfig coloring_to_vertex_signs(const CellColoring& t) {
    if (!is_valid_coloring(t)) throw Error(ErrorCode::InvalidColoring, t.str());
    VertexSignConfig v;
    v.shape = t.shape;
    for (int comp = 1; comp <= 2; ++comp) {
        auto tr = component_transitions(t, comp);
        int cur = tr.empty() ? 1 : from_sign(tr.front().second);
        for (int e = 0; e < t.size(); ++e) {
            v.signs[e][comp - 1] = cur;
            for (const Slot& s : color_slots(t.colors[e]))
                if (s.component == comp) cur = to_sign(s.transition);
        }
    }
    return v;
}

std::string ZeroValueSequence::symbols() const {
    std::string s;
    for (const auto& p : points) s += p.component == 1 ? 'a' : 'b';
    return s;
}

ZeroValueSequence zero_value_sequence(const CellColoring& t) {
    if (!is_valid_coloring(t)) throw Error(ErrorCode::InvalidColoring, t.str());
    ZeroValueSequence seq;
    for (int e = 0; e < t.size(); ++e)
        for (const Slot& s : color_slots(t.colors[e])) seq.points.push_back({s.component, s.transition, e});
    return seq;
}

std::string scalar_class_name(ScalarCellClass c) {
    switch (c) {
        case ScalarCellClass::Inactive: return "inactive";
        case ScalarCellClass::SingleActive: return "single-active";
        case ScalarCellClass::DoubleActive: return "double-active";
        case ScalarCellClass::SaddleCell: return "saddle";
    }
    return "?";
}

ScalarCellClass scalar_class_from_signs(std::span<const int> signs) {
    const int n = static_cast<int>(signs.size());
    int pos = 0;
    for (int s : signs) pos += s > 0;
    if (pos == 0 || pos == n) return ScalarCellClass::Inactive;
    if (pos == 1 || pos == n - 1) return ScalarCellClass::SingleActive;
    // n == 4, two of each
    for (int i = 0; i < n; ++i)
        if (signs[i] == signs[(i + 1) % n]) return ScalarCellClass::DoubleActive;
    return ScalarCellClass::SaddleCell;
}

ReductionContext reduction_context(const CellColoring& t) {
    auto v = coloring_to_vertex_signs(t);
    ReductionContext ctx;
    for (int c = 0; c < 2; ++c) {
        std::vector<int> s;
        for (int i = 0; i < t.size(); ++i) s.push_back(v.signs[i][c]);
        ctx.cls[c] = scalar_class_from_signs(s);
    }
    return ctx;
}

std::vector<Branch> sequence_branches(const ZeroValueSequence& seq, const ReductionContext& ctx) {
    std::vector<Branch> out;
    for (int comp = 1; comp <= 2; ++comp) {
        std::vector<int> ids;
        for (int i = 0; i < static_cast<int>(seq.size()); ++i)
            if (seq.points[i].component == comp) ids.push_back(i);
        if (ids.empty()) continue;
        if (ids.size() == 2) {
            out.push_back({comp, ids[0], ids[1]});
            continue;
        }
        if (ids.size() != 4 || ctx.cls[comp - 1] != ScalarCellClass::SaddleCell)
            throw Error(ErrorCode::InvalidColoring, "component with " + std::to_string(ids.size()) +
                                                        " zero points is not a saddle cell");
        int on_edge[4] = {-1, -1, -1, -1};
        for (int i : ids) on_edge[seq.points[i].edge] = i;
        if (ctx.pairing[comp - 1] == SaddlePairing::CornersP1P3) {
            out.push_back({comp, on_edge[0], on_edge[1]});
            out.push_back({comp, on_edge[2], on_edge[3]});
        } else {
            out.push_back({comp, on_edge[1], on_edge[2]});
            out.push_back({comp, on_edge[3], on_edge[0]});
        }
    }
    return out;
}

bool branches_interleave(const Branch& x, const Branch& y) {
    int lo = std::min(x.p, x.q), hi = std::max(x.p, x.q);
    bool a = lo < y.p && y.p < hi;
    bool b = lo < y.q && y.q < hi;
    return a != b;
}

int branch_corner(const ZeroValueSequence& seq, const Branch& b) {
    const int n = 4;
    int e1 = seq.points[b.p].edge, e2 = seq.points[b.q].edge;
    if ((e1 + 1) % n == e2) return e2;
    if ((e2 + 1) % n == e1) return e1;
    return -1;
}

bool branches_box_disjoint(const ZeroValueSequence& seq, const Branch& x, const Branch& y) {
    if (branches_interleave(x, y)) return false;
    int cx = branch_corner(seq, x), cy = branch_corner(seq, y);
    if (cx < 0 || cy < 0) return false;
    int d = ((cx - cy) % 4 + 4) % 4;
    return d == 1 || d == 3;
}

namespace {

// branches that may be dropped in the current state
std::vector<int> reducible(const ZeroValueSequence& seq, const std::vector<Branch>& br,
                           const std::vector<bool>& alive) {
    bool any_cross = false;
    std::vector<bool> partner(br.size(), false);
    for (std::size_t i = 0; i < br.size(); ++i)
        for (std::size_t j = 0; j < br.size(); ++j)
            if (alive[i] && alive[j] && br[i].component != br[j].component &&
                branches_interleave(br[i], br[j])) {
                partner[i] = true;
                any_cross = true;
            }
    std::vector<int> out;
    for (std::size_t i = 0; i < br.size(); ++i) {
        if (!alive[i]) continue;
        if (any_cross && !partner[i]) {
            out.push_back(static_cast<int>(i));
            continue;
        }
        bool separate = true;
        for (std::size_t j = 0; j < br.size() && separate; ++j)
            if (alive[j] && br[j].component != br[i].component)
                separate = branches_box_disjoint(seq, br[i], br[j]);
        if (separate) out.push_back(static_cast<int>(i));
    }
    return out;
}

ZeroValueSequence reduce_impl(const ZeroValueSequence& seq, const ReductionContext& ctx,
                              std::mt19937_64* rng) {
    auto br = sequence_branches(seq, ctx);
    std::vector<bool> alive(br.size(), true);
    for (;;) {
        auto cand = reducible(seq, br, alive);
        if (cand.empty()) break;
        if (rng) {
            std::uniform_int_distribution<std::size_t> pick(0, cand.size() - 1);
            alive[cand[pick(*rng)]] = false;
        } else {
            for (int i : cand) alive[i] = false;
        }
    }
    std::vector<bool> keep(seq.size(), false);
    for (std::size_t i = 0; i < br.size(); ++i)
        if (alive[i]) keep[br[i].p] = keep[br[i].q] = true;
    ZeroValueSequence out;
    for (std::size_t i = 0; i < seq.size(); ++i)
        if (keep[i]) out.points.push_back(seq.points[i]);
    return out;
}

}  // namespace

ZeroValueSequence reduce_sequence(const ZeroValueSequence& seq, const ReductionContext& ctx) {
    return reduce_impl(seq, ctx, nullptr);
}

ZeroValueSequence reduce_sequence(const ZeroValueSequence& seq, const ReductionContext& ctx,
                                  std::mt19937_64& rng) {
    return reduce_impl(seq, ctx, &rng);
}

int crossing_index(const ZeroValueSequence& seq, std::array<int, 4> pts) {
    // quadrant labels (+,+)=0 (-,+)=1 (-,-)=2 (+,-)=3
    auto quadrant = [](int s1, int s2) {
        if (s1 > 0) return s2 > 0 ? 0 : 3;
        return s2 > 0 ? 1 : 2;
    };
    std::sort(pts.begin(), pts.end());
    int q[4];
    for (int i = 0; i < 4; ++i) {
        const auto& x = seq.points[pts[i]];
        const auto& y = seq.points[pts[(i + 1) % 4]];
        if (x.component == y.component)
            throw Error(ErrorCode::InconsistentTurning, "crossing points do not alternate");
        int s[2];
        s[x.component - 1] = to_sign(x.transition);
        s[y.component - 1] = from_sign(y.transition);
        q[i] = quadrant(s[0], s[1]);
    }
    int step = ((q[1] - q[0]) % 4 + 4) % 4;
    for (int i = 1; i < 4; ++i)
        if (((q[(i + 1) % 4] - q[i]) % 4 + 4) % 4 != step)
            throw Error(ErrorCode::InconsistentTurning, "mixed turning in crossing");
    if (step == 1) return -1;
    if (step == 3) return 1;
    throw Error(ErrorCode::InconsistentTurning, "non-adjacent areas in crossing");
}

namespace {

void merges(const std::vector<int>& x, std::size_t i, const std::vector<int>& y, std::size_t j,
            std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (i == x.size() && j == y.size()) {
        out.push_back(cur);
        return;
    }
    if (i < x.size()) {
        cur.push_back(x[i]);
        merges(x, i + 1, y, j, cur, out);
        cur.pop_back();
    }
    if (j < y.size()) {
        cur.push_back(y[j]);
        merges(x, i, y, j + 1, cur, out);
        cur.pop_back();
    }
}

std::vector<std::vector<int>> all_merges(const std::vector<int>& x, const std::vector<int>& y) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    merges(x, 0, y, 0, cur, out);
    return out;
}

}  // namespace

std::vector<DoubleEdgeConfig> enumerate_double_edge_configs(const CellColoring& rep) {
    if (rep.shape != Shape::Quad) throw Error(ErrorCode::NotSaddleCell, "triangle cell");
    auto ctx = reduction_context(rep);
    bool saddle[2] = {ctx.cls[0] == ScalarCellClass::SaddleCell, ctx.cls[1] == ScalarCellClass::SaddleCell};
    if (!saddle[0] && !saddle[1]) throw Error(ErrorCode::NotSaddleCell, rep.str());
    auto seq = zero_value_sequence(rep);
    std::vector<int> on[4];
    for (int i = 0; i < static_cast<int>(seq.size()); ++i) on[seq.points[i].edge].push_back(i);
    // e1 runs with s, e3 against it; e0 runs with t, e2 against it
    std::vector<int> top = on[1], bottom(on[3].rbegin(), on[3].rend());
    std::vector<int> left = on[0], right(on[2].rbegin(), on[2].rend());
    std::vector<DoubleEdgeConfig> out;
    for (const auto& h : all_merges(top, bottom)) {
        for (const auto& v : all_merges(left, right)) {
            DoubleEdgeConfig cfg{h, v, {}, rep};
            bool consistent = true;
            for (int c = 0; c < 2; ++c) {
                if (!saddle[c]) continue;
                int pt[4] = {-1, -1, -1, -1};
                for (int i = 0; i < static_cast<int>(seq.size()); ++i)
                    if (seq.points[i].component == c + 1) pt[seq.points[i].edge] = i;
                auto pos = [](const std::vector<int>& order, int id) {
                    return std::find(order.begin(), order.end(), id) - order.begin();
                };
                bool by_s = pos(h, pt[1]) < pos(h, pt[3]);
                bool by_t = pos(v, pt[2]) < pos(v, pt[0]);
                if (by_s != by_t) consistent = false;
                cfg.pairing[c] = by_s ? SaddlePairing::CornersP1P3 : SaddlePairing::CornersP0P2;
            }
            if (consistent) out.push_back(std::move(cfg));
        }
    }
    return out;
}

}  // namespace vftop
