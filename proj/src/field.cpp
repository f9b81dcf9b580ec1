#include "vftop/field.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "vftop/errors.hpp"

namespace vftop {

double CellData::diameter() const {
    double d = 0;
    for (int i = 0; i < size(); ++i)
        for (int j = i + 1; j < size(); ++j) d = std::max(d, dist(pos[i], pos[j]));
    return d;
}

Box CellData::bounds() const {
    Box b{pos[0], pos[0]};
    for (int i = 1; i < size(); ++i) {
        b.lo.x = std::min(b.lo.x, pos[i].x);
        b.lo.y = std::min(b.lo.y, pos[i].y);
        b.hi.x = std::max(b.hi.x, pos[i].x);
        b.hi.y = std::max(b.hi.y, pos[i].y);
    }
    return b;
}

Vec2 from_local(const CellData& c, Vec2 st) {
    const double s = st.x, t = st.y;
    if (c.shape == Shape::Triangle) return c.pos[0] + (c.pos[2] - c.pos[0]) * s + (c.pos[1] - c.pos[0]) * t;
    return c.pos[0] * ((1 - s) * (1 - t)) + c.pos[1] * ((1 - s) * t) + c.pos[2] * (s * t) + c.pos[3] * (s * (1 - t));
}

Vec2 interpolate(const CellData& c, Vec2 st) {
    const double s = st.x, t = st.y;
    if (c.shape == Shape::Triangle) return c.val[0] + (c.val[2] - c.val[0]) * s + (c.val[1] - c.val[0]) * t;
    return c.val[0] * ((1 - s) * (1 - t)) + c.val[1] * ((1 - s) * t) + c.val[2] * (s * t) + c.val[3] * (s * (1 - t));
}

namespace {

bool inside_local(Shape shape, Vec2 st, double tol) {
    if (shape == Shape::Triangle) return st.x >= -tol && st.y >= -tol && st.x + st.y <= 1 + tol;
    return st.x >= -tol && st.y >= -tol && st.x <= 1 + tol && st.y <= 1 + tol;
}

Vec2 solve_local(const CellData& c, Vec2 p) {
    if (c.shape == Shape::Triangle) {
        Vec2 u = c.pos[2] - c.pos[0], v = c.pos[1] - c.pos[0], r = p - c.pos[0];
        double det = cross(u, v);
        return {cross(r, v) / det, cross(u, r) / det};
    }
    Vec2 eu = c.pos[3] - c.pos[0], ev = c.pos[1] - c.pos[0];
    Vec2 ew = c.pos[0] - c.pos[1] + c.pos[2] - c.pos[3];
    Vec2 st{0.5, 0.5};
    for (int it = 0; it < 20; ++it) {
        Vec2 F = c.pos[0] + eu * st.x + ev * st.y + ew * (st.x * st.y) - p;
        Vec2 ds = eu + ew * st.y, dt = ev + ew * st.x;
        double det = cross(ds, dt);
        if (det == 0) break;
        Vec2 step{cross(F, dt) / det, cross(ds, F) / det};
        st = st - step;
        if (std::abs(step.x) + std::abs(step.y) < 1e-12) return st;
    }
    throw Error(ErrorCode::NoConvergence, "bilinear inversion", c.id);
}

}  // namespace

std::optional<Vec2> try_local(const CellData& c, Vec2 p, double tol) {
    Vec2 st = solve_local(c, p);
    if (!inside_local(c.shape, st, tol)) return std::nullopt;
    return st;
}

Vec2 to_local(const CellData& c, Vec2 p, double tol) {
    auto st = try_local(c, p, tol);
    if (!st) throw Error(ErrorCode::OutsideCell, "point outside cell", c.id);
    return *st;
}

CellData rotate_cell(const CellData& c, int k) {
    CellData r = c;
    const int n = c.size();
    for (int i = 0; i < n; ++i) {
        int j = ((i + k) % n + n) % n;
        r.pos[i] = c.pos[j];
        r.val[i] = c.val[j];
        r.vertex[i] = c.vertex[j];
    }
    return r;
}

CellData reflect_cell(const CellData& c) {
    CellData r = c;
    const int n = c.size();
    for (int i = 0; i < n; ++i) {
        // reversed order keeps corner 0 and restores clockwise traversal
        int j = (n - i) % n;
        r.pos[i] = {-c.pos[j].x, c.pos[j].y};
        r.val[i] = {-c.val[j].x, c.val[j].y};
        r.vertex[i] = c.vertex[j];
    }
    return r;
}

// ---------------------------------------------------------------- Field

namespace {

void check_samples(const std::vector<Vec2>& s) {
    for (std::size_t i = 0; i < s.size(); ++i)
        if (!std::isfinite(s[i].x) || !std::isfinite(s[i].y))
            throw Error(ErrorCode::NonFiniteSample, "vertex " + std::to_string(i));
}

int wrap_index(int i, int n) { return ((i % n) + n) % n; }

}  // namespace

Field Field::uniform(UniformGrid g, std::vector<Vec2> samples) {
    if (g.W < 2 || g.H < 2) throw Error(ErrorCode::DimensionMismatch, "grid needs W,H >= 2");
    if (!(g.spacing.x > 0) || !(g.spacing.y > 0)) throw Error(ErrorCode::DegenerateCell, "non-positive spacing");
    if (samples.size() != static_cast<std::size_t>(g.W) * g.H)
        throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(g.W * g.H) + " samples, got " +
                                                      std::to_string(samples.size()));
    check_samples(samples);
    Field f;
    f.topo_ = g;
    f.samples_ = std::move(samples);
    f.finalize();
    return f;
}

Field Field::curvilinear(CurvilinearGrid g, std::vector<Vec2> samples) {
    if (g.W < 2 || g.H < 2) throw Error(ErrorCode::DimensionMismatch, "grid needs W,H >= 2");
    const std::size_t n = static_cast<std::size_t>(g.W) * g.H;
    if (samples.size() != n || g.positions.size() != n)
        throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(n) + " vertices");
    check_samples(samples);
    Field f;
    f.topo_ = std::move(g);
    f.samples_ = std::move(samples);
    f.finalize();
    return f;
}

Field Field::triangles(TriangleMesh m, std::vector<Vec2> samples) {
    if (samples.size() != m.positions.size())
        throw Error(ErrorCode::DimensionMismatch, "sample count differs from vertex count");
    check_samples(samples);
    for (auto& t : m.triangles)
        for (int v : t)
            if (v < 0 || v >= static_cast<int>(m.positions.size()))
                throw Error(ErrorCode::DimensionMismatch, "triangle vertex index out of range");
    Field f;
    f.topo_ = std::move(m);
    f.samples_ = std::move(samples);
    f.finalize();
    return f;
}

Field Field::sample(UniformGrid g, const std::function<Vec2(Vec2)>& fn) {
    std::vector<Vec2> s;
    s.reserve(static_cast<std::size_t>(g.W) * g.H);
    for (int j = 0; j < g.H; ++j)
        for (int i = 0; i < g.W; ++i) s.push_back(fn({g.origin.x + i * g.spacing.x, g.origin.y + j * g.spacing.y}));
    return uniform(g, std::move(s));
}

Field Field::with_periodic(bool x, bool y) const {
    auto* g = std::get_if<UniformGrid>(&topo_);
    if (!g) throw Error(ErrorCode::DimensionMismatch, "periodic flags need a uniform grid");
    UniformGrid u = *g;
    u.periodic_x = x;
    u.periodic_y = y;
    return uniform(u, samples_);
}

Shape Field::cell_shape() const {
    return std::holds_alternative<TriangleMesh>(topo_) ? Shape::Triangle : Shape::Quad;
}

int Field::cell_count() const {
    if (auto* g = std::get_if<UniformGrid>(&topo_))
        return (g->periodic_x ? g->W : g->W - 1) * (g->periodic_y ? g->H : g->H - 1);
    if (auto* g = std::get_if<CurvilinearGrid>(&topo_)) return (g->W - 1) * (g->H - 1);
    return static_cast<int>(std::get<TriangleMesh>(topo_).triangles.size());
}

bool Field::periodic_x() const {
    auto* g = std::get_if<UniformGrid>(&topo_);
    return g && g->periodic_x;
}

bool Field::periodic_y() const {
    auto* g = std::get_if<UniformGrid>(&topo_);
    return g && g->periodic_y;
}

std::array<int, 4> Field::grid_cell_vertices(int id, int W, int H, bool px, bool py) const {
    int wc = px ? W : W - 1;
    int i = id % wc, j = id / wc;
    auto v = [&](int a, int b) { return wrap_index(b, H) * W + wrap_index(a, W); };
    (void)py;
    if (flipped_) return {v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)};
    return {v(i, j), v(i, j + 1), v(i + 1, j + 1), v(i + 1, j)};
}

CellData Field::cell(int id) const {
    if (id < 0 || id >= cell_count()) throw Error(ErrorCode::DimensionMismatch, "cell id out of range", id);
    CellData c;
    c.id = id;
    if (auto* g = std::get_if<UniformGrid>(&topo_)) {
        c.shape = Shape::Quad;
        c.vertex = grid_cell_vertices(id, g->W, g->H, g->periodic_x, g->periodic_y);
        int wc = g->periodic_x ? g->W : g->W - 1;
        int i = id % wc, j = id / wc;
        const int di[4] = {0, 0, 1, 1}, dj[4] = {0, 1, 1, 0};
        for (int k = 0; k < 4; ++k)
            c.pos[k] = {g->origin.x + (i + di[k]) * g->spacing.x, g->origin.y + (j + dj[k]) * g->spacing.y};
    } else if (auto* g = std::get_if<CurvilinearGrid>(&topo_)) {
        c.shape = Shape::Quad;
        c.vertex = grid_cell_vertices(id, g->W, g->H, false, false);
        for (int k = 0; k < 4; ++k) c.pos[k] = g->positions[c.vertex[k]];
    } else {
        const auto& m = std::get<TriangleMesh>(topo_);
        c.shape = Shape::Triangle;
        for (int k = 0; k < 3; ++k) {
            c.vertex[k] = m.triangles[id][k];
            c.pos[k] = m.positions[c.vertex[k]];
        }
    }
    for (int k = 0; k < c.size(); ++k) c.val[k] = samples_[c.vertex[k]];
    return c;
}

int Field::edge_neighbor(int id, int k) const {
    if (std::holds_alternative<TriangleMesh>(topo_)) return tri_adj_[id][k];
    int W, H;
    bool px = false, py = false;
    if (auto* g = std::get_if<UniformGrid>(&topo_)) {
        W = g->W, H = g->H, px = g->periodic_x, py = g->periodic_y;
    } else {
        auto& cg = std::get<CurvilinearGrid>(topo_);
        W = cg.W, H = cg.H;
    }
    int wc = px ? W : W - 1, hc = py ? H : H - 1;
    int i = id % wc, j = id / wc;
    static const int ndi[4] = {-1, 0, 1, 0}, ndj[4] = {0, 1, 0, -1};
    static const int fdi[4] = {0, 1, 0, -1}, fdj[4] = {-1, 0, 1, 0};
    int ni = i + (flipped_ ? fdi[k] : ndi[k]);
    int nj = j + (flipped_ ? fdj[k] : ndj[k]);
    if (px) ni = wrap_index(ni, wc);
    if (py) nj = wrap_index(nj, hc);
    if (ni < 0 || nj < 0 || ni >= wc || nj >= hc) return -1;
    return nj * wc + ni;
}

std::vector<int> Field::cells_around_vertex(int v) const {
    if (std::holds_alternative<TriangleMesh>(topo_)) return vertex_cells_[v];
    int W, H;
    bool px = false, py = false;
    if (auto* g = std::get_if<UniformGrid>(&topo_)) {
        W = g->W, H = g->H, px = g->periodic_x, py = g->periodic_y;
    } else {
        auto& cg = std::get<CurvilinearGrid>(topo_);
        W = cg.W, H = cg.H;
    }
    int wc = px ? W : W - 1, hc = py ? H : H - 1;
    int vi = v % W, vj = v / W;
    std::vector<int> out;
    for (int dj = -1; dj <= 0; ++dj)
        for (int di = -1; di <= 0; ++di) {
            int i = vi + di, j = vj + dj;
            if (px) i = wrap_index(i, wc);
            if (py) j = wrap_index(j, hc);
            if (i < 0 || j < 0 || i >= wc || j >= hc) continue;
            int id = j * wc + i;
            if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
        }
    return out;
}

Box Field::bounds() const { return bounds_; }

double Field::diameter() const { return dist(bounds_.lo, bounds_.hi); }

Vec2 Field::wrap(Vec2 p) const {
    auto* g = std::get_if<UniformGrid>(&topo_);
    if (!g) return p;
    auto w = [](double x, double lo, double period) {
        double r = std::fmod(x - lo, period);
        if (r < 0) r += period;
        if (r >= period) r = 0;
        return lo + r;
    };
    if (g->periodic_x) p.x = w(p.x, g->origin.x, g->W * g->spacing.x);
    if (g->periodic_y) p.y = w(p.y, g->origin.y, g->H * g->spacing.y);
    return p;
}

std::optional<int> Field::locate(Vec2 p) const {
    if (auto* g = std::get_if<UniformGrid>(&topo_)) {
        p = wrap(p);
        int wc = g->periodic_x ? g->W : g->W - 1, hc = g->periodic_y ? g->H : g->H - 1;
        double fx = (p.x - g->origin.x) / g->spacing.x, fy = (p.y - g->origin.y) / g->spacing.y;
        if (!(fx >= 0) || !(fy >= 0) || fx > wc || fy > hc) return std::nullopt;
        int i = std::min(static_cast<int>(fx), wc - 1), j = std::min(static_cast<int>(fy), hc - 1);
        return j * wc + i;
    }
    if (!bounds_.contains(p, 1e-12 * (1 + diameter()))) return std::nullopt;
    double fx = (p.x - bounds_.lo.x) / (bounds_.hi.x - bounds_.lo.x) * bin_nx_;
    double fy = (p.y - bounds_.lo.y) / (bounds_.hi.y - bounds_.lo.y) * bin_ny_;
    int bx = std::clamp(static_cast<int>(fx), 0, bin_nx_ - 1), by = std::clamp(static_cast<int>(fy), 0, bin_ny_ - 1);
    for (int id : bins_[by * bin_nx_ + bx]) {
        CellData c = cell(id);
        if (!c.bounds().contains(p, 1e-12 * cell_diameter_)) continue;
        try {
            if (try_local(c, p, 1e-12)) return id;
        } catch (const Error&) {
        }
    }
    return std::nullopt;
}

std::optional<Vec2> Field::evaluate(Vec2 p) const {
    if (auto* g = std::get_if<UniformGrid>(&topo_)) {
        p = wrap(p);
        auto id = locate(p);
        if (!id) return std::nullopt;
        CellData c = cell(*id);
        Vec2 st{(p.x - c.pos[0].x) / g->spacing.x, (p.y - c.pos[0].y) / g->spacing.y};
        return interpolate(c, st);
    }
    auto id = locate(p);
    if (!id) return std::nullopt;
    CellData c = cell(*id);
    Vec2 st = solve_local(c, p);
    return interpolate(c, st);
}

void Field::finalize() {
    if (auto* g = std::get_if<CurvilinearGrid>(&topo_)) {
        // orientation from the first cell, every cell strictly convex with the same orientation
        auto corner_cross = [&](const std::array<Vec2, 4>& p, int k) {
            return cross(p[(k + 1) % 4] - p[k], p[(k + 2) % 4] - p[(k + 1) % 4]);
        };
        int n = (g->W - 1) * (g->H - 1);
        int sign0 = 0;
        for (int id = 0; id < n; ++id) {
            int i = id % (g->W - 1), j = id / (g->W - 1);
            std::array<Vec2, 4> p = {g->positions[j * g->W + i], g->positions[(j + 1) * g->W + i],
                                     g->positions[(j + 1) * g->W + i + 1], g->positions[j * g->W + i + 1]};
            for (int k = 0; k < 4; ++k) {
                double cr = corner_cross(p, k);
                int s = cr > 0 ? 1 : (cr < 0 ? -1 : 0);
                if (s == 0 || (sign0 != 0 && s != sign0))
                    throw Error(ErrorCode::NonConvexCell, "cell " + std::to_string(id) + " is not strictly convex", id);
                sign0 = s;
            }
        }
        // clockwise traversal has negative turning
        flipped_ = sign0 > 0;
    }
    if (auto* m = std::get_if<TriangleMesh>(&topo_)) {
        for (std::size_t id = 0; id < m->triangles.size(); ++id) {
            auto& t = m->triangles[id];
            double a;
            try {
                a = oriented_area(m->positions[t[0]], m->positions[t[1]], m->positions[t[2]]);
            } catch (const Error&) {
                throw Error(ErrorCode::DegenerateCell, "triangle " + std::to_string(id), static_cast<int>(id));
            }
            if (a > 0) std::swap(t[1], t[2]);
        }
        std::map<std::pair<int, int>, std::pair<int, int>> edges;
        tri_adj_.assign(m->triangles.size(), {-1, -1, -1});
        vertex_cells_.assign(m->positions.size(), {});
        for (int id = 0; id < static_cast<int>(m->triangles.size()); ++id) {
            const auto& t = m->triangles[id];
            for (int k = 0; k < 3; ++k) {
                vertex_cells_[t[k]].push_back(id);
                int a = t[k], b = t[(k + 1) % 3];
                auto key = std::minmax(a, b);
                auto it = edges.find(key);
                if (it == edges.end()) {
                    edges[key] = {id, k};
                } else {
                    tri_adj_[id][k] = it->second.first;
                    tri_adj_[it->second.first][it->second.second] = id;
                }
            }
        }
    }
    // bounds
    if (auto* g = std::get_if<UniformGrid>(&topo_)) {
        int wc = g->periodic_x ? g->W : g->W - 1, hc = g->periodic_y ? g->H : g->H - 1;
        bounds_ = {g->origin, {g->origin.x + wc * g->spacing.x, g->origin.y + hc * g->spacing.y}};
        cell_diameter_ = norm(g->spacing);
        return;
    }
    const std::vector<Vec2>& pts = std::holds_alternative<CurvilinearGrid>(topo_)
                                       ? std::get<CurvilinearGrid>(topo_).positions
                                       : std::get<TriangleMesh>(topo_).positions;
    bounds_ = {pts.at(0), pts.at(0)};
    for (auto p : pts) {
        bounds_.lo.x = std::min(bounds_.lo.x, p.x);
        bounds_.lo.y = std::min(bounds_.lo.y, p.y);
        bounds_.hi.x = std::max(bounds_.hi.x, p.x);
        bounds_.hi.y = std::max(bounds_.hi.y, p.y);
    }
    double sum = 0;
    int n = cell_count();
    for (int id = 0; id < n; ++id) sum += cell(id).diameter();
    cell_diameter_ = n ? sum / n : 1;
    build_bins();
}

void Field::build_bins() {
    int n = cell_count();
    int side = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(n))));
    bin_nx_ = bin_ny_ = side;
    bins_.assign(static_cast<std::size_t>(side) * side, {});
    double wx = bounds_.hi.x - bounds_.lo.x, wy = bounds_.hi.y - bounds_.lo.y;
    if (wx <= 0 || wy <= 0) throw Error(ErrorCode::DegenerateCell, "domain has zero extent");
    for (int id = 0; id < n; ++id) {
        Box b = cell(id).bounds();
        int x0 = std::clamp(static_cast<int>((b.lo.x - bounds_.lo.x) / wx * side), 0, side - 1);
        int x1 = std::clamp(static_cast<int>((b.hi.x - bounds_.lo.x) / wx * side), 0, side - 1);
        int y0 = std::clamp(static_cast<int>((b.lo.y - bounds_.lo.y) / wy * side), 0, side - 1);
        int y1 = std::clamp(static_cast<int>((b.hi.y - bounds_.lo.y) / wy * side), 0, side - 1);
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) bins_[y * side + x].push_back(id);
    }
}

// ---------------------------------------------------------------- parsing

namespace {

struct Token {
    std::string_view text;
    int column;
};

struct Line {
    int number;
    std::vector<Token> tokens;
};

std::vector<Line> tokenize(std::string_view text, char sep) {
    std::vector<Line> lines;
    int number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view raw = text.substr(pos, end - pos);
        ++number;
        if (auto h = raw.find('#'); h != std::string_view::npos) raw = raw.substr(0, h);
        Line line{number, {}};
        auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
        if (sep == ' ') {
            std::size_t i = 0;
            while (i < raw.size()) {
                while (i < raw.size() && is_space(raw[i])) ++i;
                std::size_t s = i;
                while (i < raw.size() && !is_space(raw[i])) ++i;
                if (i > s) line.tokens.push_back({raw.substr(s, i - s), static_cast<int>(s) + 1});
            }
        } else {
            bool blank = std::all_of(raw.begin(), raw.end(), is_space);
            std::size_t s = 0;
            while (!blank) {
                std::size_t e = raw.find(sep, s);
                std::size_t stop = e == std::string_view::npos ? raw.size() : e;
                std::size_t a = s, b = stop;
                while (a < b && is_space(raw[a])) ++a;
                while (b > a && is_space(raw[b - 1])) --b;
                line.tokens.push_back({raw.substr(a, b - a), static_cast<int>(a) + 1});
                if (e == std::string_view::npos) break;
                s = e + 1;
            }
        }
        if (!line.tokens.empty()) lines.push_back(std::move(line));
        if (end == text.size()) break;
        pos = end + 1;
    }
    return lines;
}

double parse_double(const Token& t, int line) {
    std::string_view s = t.text;
    if (!s.empty() && s[0] == '+') s.remove_prefix(1);
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ParseError("expected a number, got '" + std::string(t.text) + "'", line, t.column);
    return v;
}

long parse_int(const Token& t, int line) {
    long v = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || p != t.text.data() + t.text.size())
        throw ParseError("expected an integer, got '" + std::string(t.text) + "'", line, t.column);
    return v;
}

Vec2 finite_pair(double a, double b, const Line& l) {
    if (!std::isfinite(a) || !std::isfinite(b))
        throw Error(ErrorCode::NonFiniteSample, "line " + std::to_string(l.number));
    return {a, b};
}

// positions forming an exact lattice become a uniform grid
std::optional<UniformGrid> as_lattice(int W, int H, const std::vector<Vec2>& pos) {
    Vec2 o = pos[0];
    double dx = pos[1].x - o.x, dy = pos[static_cast<std::size_t>(W)].y - o.y;
    if (!(dx > 0) || !(dy > 0)) return std::nullopt;
    for (int j = 0; j < H; ++j)
        for (int i = 0; i < W; ++i) {
            Vec2 p = pos[static_cast<std::size_t>(j) * W + i];
            if (std::abs(p.x - (o.x + i * dx)) > 1e-9 * std::abs(dx) * (1 + i) ||
                std::abs(p.y - (o.y + j * dy)) > 1e-9 * std::abs(dy) * (1 + j))
                return std::nullopt;
        }
    UniformGrid g;
    g.W = W;
    g.H = H;
    g.origin = o;
    g.spacing = {dx, dy};
    return g;
}

Field grid_from_rows(int W, int H, bool px, bool py, std::optional<Vec2> origin, std::optional<Vec2> spacing,
                     const std::vector<Vec2>& pos, const std::vector<Vec2>& val, bool have_pos, int header_line) {
    if (have_pos) {
        auto lat = as_lattice(W, H, pos);
        if (lat) {
            lat->periodic_x = px;
            lat->periodic_y = py;
            return Field::uniform(*lat, val);
        }
        if (px || py) throw ParseError("periodic flags need lattice positions", header_line, 1);
        return Field::curvilinear({W, H, pos}, val);
    }
    UniformGrid g;
    g.W = W;
    g.H = H;
    g.periodic_x = px;
    g.periodic_y = py;
    if (origin) g.origin = *origin;
    if (spacing) g.spacing = *spacing;
    return Field::uniform(g, val);
}

Field parse_vftxt(std::string_view text) {
    auto lines = tokenize(text, ' ');
    if (lines.empty()) throw ParseError("empty input", 1, 1);
    const Line& h = lines[0];
    if (h.tokens[0].text != "VFTXT") throw ParseError("expected 'VFTXT'", h.number, h.tokens[0].column);
    if (h.tokens.size() < 4) throw ParseError("incomplete header", h.number, 1);
    std::string_view kind = h.tokens[1].text;
    long n1 = parse_int(h.tokens[2], h.number), n2 = parse_int(h.tokens[3], h.number);
    if (n1 < 0 || n2 < 0) throw ParseError("negative size", h.number, h.tokens[2].column);
    bool px = false, py = false;
    std::optional<Vec2> origin, spacing;
    for (std::size_t i = 4; i < h.tokens.size(); ++i) {
        auto t = h.tokens[i].text;
        if (t == "PERIODIC") {
            bool any = false;
            while (i + 1 < h.tokens.size()) {
                auto f = h.tokens[i + 1].text;
                if (f == "X") px = true;
                else if (f == "Y") py = true;
                else if (f == "XY") px = py = true;
                else break;
                any = true;
                ++i;
            }
            if (!any) px = py = true;
        } else if ((t == "ORIGIN" || t == "SPACING") && i + 2 < h.tokens.size()) {
            Vec2 v{parse_double(h.tokens[i + 1], h.number), parse_double(h.tokens[i + 2], h.number)};
            (t == "ORIGIN" ? origin : spacing) = v;
            i += 2;
        } else {
            throw ParseError("unknown header token '" + std::string(t) + "'", h.number, h.tokens[i].column);
        }
    }
    if (kind == "GRID") {
        const std::size_t n = static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2);
        if (lines.size() - 1 != n)
            throw Error(ErrorCode::DimensionMismatch,
                        "expected " + std::to_string(n) + " rows, got " + std::to_string(lines.size() - 1));
        std::vector<Vec2> pos, val;
        std::size_t width = lines.size() > 1 ? lines[1].tokens.size() : 2;
        if (width != 2 && width != 4) throw ParseError("rows need 2 or 4 values", lines[1].number, 1);
        for (std::size_t r = 1; r < lines.size(); ++r) {
            const Line& l = lines[r];
            if (l.tokens.size() != width)
                throw ParseError("expected " + std::to_string(width) + " values", l.number,
                                 l.tokens[std::min(l.tokens.size(), width) - 1].column);
            std::vector<double> v;
            for (const auto& t : l.tokens) v.push_back(parse_double(t, l.number));
            if (width == 4) {
                pos.push_back(finite_pair(v[0], v[1], l));
                val.push_back(finite_pair(v[2], v[3], l));
            } else {
                val.push_back(finite_pair(v[0], v[1], l));
            }
        }
        return grid_from_rows(static_cast<int>(n1), static_cast<int>(n2), px, py, origin, spacing, pos, val,
                              width == 4, h.number);
    }
    if (kind == "TRIMESH") {
        if (px || py) throw ParseError("periodic flags need a grid", h.number, 1);
        if (lines.size() - 1 != static_cast<std::size_t>(n1 + n2))
            throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(n1) + " vertex rows and " +
                                                          std::to_string(n2) + " triangle rows");
        TriangleMesh m;
        std::vector<Vec2> val;
        for (long r = 1; r <= n1; ++r) {
            const Line& l = lines[r];
            if (l.tokens.size() != 4) throw ParseError("vertex rows need 4 values", l.number, 1);
            double v[4];
            for (int k = 0; k < 4; ++k) v[k] = parse_double(l.tokens[k], l.number);
            m.positions.push_back(finite_pair(v[0], v[1], l));
            val.push_back(finite_pair(v[2], v[3], l));
        }
        for (long r = n1 + 1; r <= n1 + n2; ++r) {
            const Line& l = lines[r];
            if (l.tokens.size() != 3) throw ParseError("triangle rows need 3 indices", l.number, 1);
            std::array<int, 3> t{};
            for (int k = 0; k < 3; ++k) {
                long v = parse_int(l.tokens[k], l.number);
                if (v < 0 || v >= n1) throw ParseError("vertex index out of range", l.number, l.tokens[k].column);
                t[k] = static_cast<int>(v);
            }
            m.triangles.push_back(t);
        }
        return Field::triangles(std::move(m), std::move(val));
    }
    throw ParseError("expected GRID or TRIMESH", h.number, h.tokens[1].column);
}

Field parse_csvgrid(std::string_view text) {
    auto lines = tokenize(text, ',');
    if (lines.empty()) throw ParseError("empty input", 1, 1);
    const Line& h = lines[0];
    int ci = -1, cj = -1, cx = -1, cy = -1, cfx = -1, cfy = -1;
    for (int k = 0; k < static_cast<int>(h.tokens.size()); ++k) {
        auto t = h.tokens[k].text;
        if (t == "i") ci = k;
        else if (t == "j") cj = k;
        else if (t == "x") cx = k;
        else if (t == "y") cy = k;
        else if (t == "fx") cfx = k;
        else if (t == "fy") cfy = k;
        else throw ParseError("unknown column '" + std::string(t) + "'", h.number, h.tokens[k].column);
    }
    if (ci < 0 || cj < 0 || cfx < 0 || cfy < 0) throw ParseError("header needs i,j,fx,fy", h.number, 1);
    if ((cx < 0) != (cy < 0)) throw ParseError("x and y columns come together", h.number, 1);
    struct Row {
        long i, j;
        Vec2 p, f;
    };
    std::vector<Row> rows;
    long W = 0, H = 0;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const Line& l = lines[r];
        if (l.tokens.size() != h.tokens.size())
            throw ParseError("expected " + std::to_string(h.tokens.size()) + " fields", l.number,
                             l.tokens.back().column);
        Row row{parse_int(l.tokens[ci], l.number), parse_int(l.tokens[cj], l.number), {}, {}};
        if (row.i < 0 || row.j < 0) throw ParseError("negative index", l.number, l.tokens[ci].column);
        row.f = finite_pair(parse_double(l.tokens[cfx], l.number), parse_double(l.tokens[cfy], l.number), l);
        if (cx >= 0) row.p = finite_pair(parse_double(l.tokens[cx], l.number), parse_double(l.tokens[cy], l.number), l);
        W = std::max(W, row.i + 1);
        H = std::max(H, row.j + 1);
        rows.push_back(row);
    }
    if (static_cast<std::size_t>(W * H) != rows.size())
        throw Error(ErrorCode::DimensionMismatch, "rows do not fill a " + std::to_string(W) + "x" + std::to_string(H) + " grid");
    std::vector<Vec2> pos(rows.size()), val(rows.size());
    std::vector<bool> seen(rows.size(), false);
    for (const auto& r : rows) {
        std::size_t k = static_cast<std::size_t>(r.j * W + r.i);
        if (seen[k]) throw Error(ErrorCode::DimensionMismatch, "duplicate vertex " + std::to_string(r.i) + "," + std::to_string(r.j));
        seen[k] = true;
        pos[k] = r.p;
        val[k] = r.f;
    }
    return grid_from_rows(static_cast<int>(W), static_cast<int>(H), false, false, std::nullopt, std::nullopt, pos,
                          val, cx >= 0, h.number);
}

std::string fmt(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

}  // namespace

Field load_field(std::string_view text, FieldFormat format) {
    return format == FieldFormat::VFTXT ? parse_vftxt(text) : parse_csvgrid(text);
}

Field load_field_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    std::size_t first = text.find_first_not_of(" \t\r\n");
    bool vftxt = first != std::string::npos && text.compare(first, 5, "VFTXT") == 0;
    return load_field(text, vftxt ? FieldFormat::VFTXT : FieldFormat::CSVGRID);
}

std::string write_vftxt(const Field& field) {
    std::string out;
    const auto& s = field.samples();
    if (auto* g = std::get_if<UniformGrid>(&field.topology())) {
        out += "VFTXT GRID " + std::to_string(g->W) + " " + std::to_string(g->H);
        if (g->periodic_x || g->periodic_y)
            out += std::string(" PERIODIC") + (g->periodic_x ? " X" : "") + (g->periodic_y ? " Y" : "");
        out += " ORIGIN " + fmt(g->origin.x) + " " + fmt(g->origin.y);
        out += " SPACING " + fmt(g->spacing.x) + " " + fmt(g->spacing.y) + "\n";
        for (auto v : s) out += fmt(v.x) + " " + fmt(v.y) + "\n";
    } else if (auto* g = std::get_if<CurvilinearGrid>(&field.topology())) {
        out += "VFTXT GRID " + std::to_string(g->W) + " " + std::to_string(g->H) + "\n";
        for (std::size_t k = 0; k < s.size(); ++k)
            out += fmt(g->positions[k].x) + " " + fmt(g->positions[k].y) + " " + fmt(s[k].x) + " " + fmt(s[k].y) + "\n";
    } else {
        const auto& m = std::get<TriangleMesh>(field.topology());
        out += "VFTXT TRIMESH " + std::to_string(m.positions.size()) + " " + std::to_string(m.triangles.size()) + "\n";
        for (std::size_t k = 0; k < s.size(); ++k)
            out += fmt(m.positions[k].x) + " " + fmt(m.positions[k].y) + " " + fmt(s[k].x) + " " + fmt(s[k].y) + "\n";
        for (const auto& t : m.triangles)
            out += std::to_string(t[0]) + " " + std::to_string(t[1]) + " " + std::to_string(t[2]) + "\n";
    }
    return out;
}

}  // namespace vftop
