#include "vftop/cell_classify.hpp"

#include <algorithm>
#include <cmath>

namespace vftop {

ScalarCellClass scalar_cell_class(std::span<const double> values, double omega, double eps) {
    std::vector<int> signs;
    for (double v : values) {
        if (std::abs(v - omega) <= eps) throw Error(ErrorCode::VertexOnLevelSet, "vertex value on level set");
        signs.push_back(v > omega ? 1 : -1);
    }
    return scalar_class_from_signs(signs);
}

namespace {

double comp(Vec2 v, int c) { return c == 1 ? v.x : v.y; }

Vec2 corner_local(Shape shape, int k) {
    static const Vec2 quad[4] = {{0, 0}, {0, 1}, {1, 1}, {1, 0}};
    static const Vec2 tri[3] = {{0, 0}, {0, 1}, {1, 0}};
    return shape == Shape::Quad ? quad[k] : tri[k];
}

void check_vertices(const CellData& cell, double eps) {
    std::vector<Vec2> bad;
    for (int k = 0; k < cell.size(); ++k)
        if (std::abs(cell.val[k].x) <= eps || std::abs(cell.val[k].y) <= eps) bad.push_back(cell.pos[k]);
    if (!bad.empty()) throw Error(ErrorCode::ZeroVertexValue, "zero vertex value", cell.id);
}

}  // namespace

VertexSignConfig vertex_signs(const CellData& cell, double eps) {
    check_vertices(cell, eps);
    VertexSignConfig v;
    v.shape = cell.shape;
    for (int k = 0; k < cell.size(); ++k) v.signs[k] = {cell.val[k].x > 0 ? 1 : -1, cell.val[k].y > 0 ? 1 : -1};
    return v;
}

std::vector<EdgeZero> edge_zero_points(const CellData& cell, double eps) {
    check_vertices(cell, eps);
    std::vector<EdgeZero> out;
    const int n = cell.size();
    for (int k = 0; k < n; ++k) {
        const int k2 = (k + 1) % n;
        const bool forward = canonical_first(cell.pos[k], cell.pos[k2]);
        struct Z {
            int c;
            double lambda;  // canonical direction
            Transition tr;
        };
        Z zs[2];
        int m = 0;
        for (int c = 1; c <= 2; ++c) {
            double va = comp(cell.val[k], c), vb = comp(cell.val[k2], c);
            if ((va > 0) == (vb > 0)) continue;
            double lambda = forward ? va / (va - vb) : vb / (vb - va);
            zs[m++] = {c, lambda, va > 0 ? Transition::PlusToMinus : Transition::MinusToPlus};
        }
        if (m == 2) {
            if (std::abs(zs[0].lambda - zs[1].lambda) <= eps)
                throw Error(ErrorCode::CoincidentEdgeZeros, "edge " + std::to_string(k), cell.id);
            bool swap = forward ? zs[1].lambda < zs[0].lambda : zs[1].lambda > zs[0].lambda;
            if (swap) std::swap(zs[0], zs[1]);
        }
        for (int i = 0; i < m; ++i) {
            double param = forward ? zs[i].lambda : 1 - zs[i].lambda;
            out.push_back({zs[i].c, zs[i].tr, k, param,
                           lerp(corner_local(cell.shape, k), corner_local(cell.shape, k2), param)});
        }
    }
    return out;
}

CellColoring edge_coloring(const CellData& cell, double eps) {
    auto zs = edge_zero_points(cell, eps);
    CellColoring t;
    t.shape = cell.shape;
    for (int k = 0; k < cell.size(); ++k) {
        Slot slots[2];
        int m = 0;
        for (const auto& z : zs)
            if (z.edge == k) slots[m++] = {z.component, z.transition};
        t.colors[k] = static_cast<std::uint8_t>(color_from_slots({slots, static_cast<std::size_t>(m)}));
    }
    return t;
}

const ClassRecord& lookup(const CellColoring& coloring, const LookupTable& table) { return table.lookup(coloring); }

const char* outcome_kind_name(CellOutcome::Kind k) {
    switch (k) {
        case CellOutcome::None: return "none";
        case CellOutcome::One: return "one";
        case CellOutcome::Two: return "two";
        case CellOutcome::SecondOrder: return "second-order";
    }
    return "?";
}

namespace {

bool in_unit_square(Vec2 st) { return st.x >= 0 && st.x <= 1 && st.y >= 0 && st.y <= 1; }

CriticalPoint make_cp(const CellData& cell, Vec2 st, std::optional<double> delta) {
    CriticalPoint cp;
    cp.local = st;
    cp.world = from_local(cell, st);
    cp.cell = cell.id;
    cp.delta = delta;
    return cp;
}

void assign_pair_indices(const CellData& cell, std::vector<CriticalPoint>& cps) {
    for (int i = 0; i < 2; ++i)
        cps[i].index = turning_behavior(area_sequence(cell, cps[i], cps[1 - i].local));
    if (cps[0].index > cps[1].index) std::swap(cps[0], cps[1]);
}

}  // namespace

CellOutcome resolve_value_dependent(const CellData& cell, double tau, double eps) {
    (void)eps;
    CellOutcome out;
    out.source = OutcomeSource::ValueResolved;
    auto k = standard_form(cell);
    auto eq = intersection_equation(k);
    std::optional<double> delta;
    if (eq.degree == 2) delta = eq.delta_normalized;
    out.discriminant = delta;
    std::vector<Vec2> inside;
    if (eq.degree == 2 && eq.delta_normalized < 0) return out;
    for (auto st : intersection_roots(k, eq))
        if (in_unit_square(st)) inside.push_back(st);
    if (inside.empty()) return out;
    if (inside.size() == 1) {
        out.kind = CellOutcome::One;
        auto cp = make_cp(cell, inside[0], delta);
        cp.index = turning_behavior(area_sequence(cell, cp));
        out.cps.push_back(cp);
        return out;
    }
    auto p = make_cp(cell, inside[0], delta), q = make_cp(cell, inside[1], delta);
    if (eq.delta_normalized <= tau) {
        out.kind = CellOutcome::SecondOrder;
        CriticalPoint m = make_cp(cell, (inside[0] + inside[1]) * 0.5, delta);
        m.world = (p.world + q.world) * 0.5;
        m.index = 0;
        m.order = 2;
        m.synthetic = true;
        out.cps.push_back(m);
        return out;
    }
    out.kind = CellOutcome::Two;
    out.cps = {p, q};
    assign_pair_indices(cell, out.cps);
    return out;
}

std::array<std::pair<Vec2, Vec2>, 2> asymptotic_decider_pairing(const CellData& cell, int component, double eps) {
    if (cell.shape != Shape::Quad) throw Error(ErrorCode::NotSaddleCell, "triangle cell", cell.id);
    std::vector<double> v;
    for (int k = 0; k < 4; ++k) v.push_back(comp(cell.val[k], component));
    if (scalar_cell_class(v, 0, eps) != ScalarCellClass::SaddleCell)
        throw Error(ErrorCode::NotSaddleCell, "component " + std::to_string(component), cell.id);
    std::vector<Vec2> pts;
    for (const auto& z : edge_zero_points(cell, eps))
        if (z.component == component) pts.push_back(z.local);
    std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
    return {std::pair{pts[0], pts[1]}, std::pair{pts[2], pts[3]}};
}

namespace {

void direct_outcome(const CellData& cell, const ClassifyConfig& cfg, CellReport& rep) {
    const double band = 1e-9;
    auto zero_vertices = [&]() {
        for (int k = 0; k < cell.size(); ++k)
            if (std::abs(cell.val[k].x) <= cfg.eps || std::abs(cell.val[k].y) <= cfg.eps)
                rep.boundary_points.push_back(cell.pos[k]);
    };
    try {
        if (cell.shape == Shape::Triangle) {
            Vec2 v0 = cell.val[0], u = cell.val[2] - v0, w = cell.val[1] - v0;
            double det = cross(u, w);
            if (det == 0) {
                zero_vertices();
                return;
            }
            Vec2 st{cross(-v0, w) / det, cross(u, -v0) / det};
            double d = std::min({st.x, st.y, 1 - st.x - st.y});
            if (std::abs(d) <= band) {
                rep.boundary_points.push_back(from_local(cell, st));
            } else if (d > 0) {
                rep.outcome.kind = CellOutcome::One;
                auto cp = make_cp(cell, st, std::nullopt);
                cp.index = det > 0 ? 1 : -1;
                rep.outcome.cps.push_back(cp);
            }
            return;
        }
        auto k = standard_form(cell);
        auto eq = intersection_equation(k);
        for (auto r : intersection_roots(k, eq)) {
            double d = std::min({r.x, r.y, 1 - r.x, 1 - r.y});
            if (std::abs(d) <= band)
                rep.boundary_points.push_back(from_local(cell, {std::clamp(r.x, 0.0, 1.0), std::clamp(r.y, 0.0, 1.0)}));
        }
        if (rep.boundary_points.empty()) rep.outcome = resolve_value_dependent(cell, cfg.tau, cfg.eps);
    } catch (const Error&) {
        rep.boundary_points.clear();
        rep.outcome = {};
        zero_vertices();
    }
}

}  // namespace

CellReport classify_cell(const CellData& cell, const LookupTable& table, const ClassifyConfig& cfg) {
    CellReport rep;
    rep.cell = cell.id;
    try {
        rep.coloring = edge_coloring(cell, cfg.eps);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ZeroVertexValue && e.code() != ErrorCode::CoincidentEdgeZeros) throw;
        rep.boundary = true;
        rep.boundary_reason = e.code();
        if (e.code() == ErrorCode::ZeroVertexValue) {
            for (int k = 0; k < cell.size(); ++k)
                if (std::abs(cell.val[k].x) <= cfg.eps && std::abs(cell.val[k].y) <= cfg.eps)
                    rep.boundary_points.push_back(cell.pos[k]);
            // a single vanishing component only blocks the coloring; solve the interpolant directly
            if (rep.boundary_points.empty()) direct_outcome(cell, cfg, rep);
        } else {
            // recompute the coincident pairs with a zero tolerance to locate them
            const int n = cell.size();
            for (int k = 0; k < n; ++k) {
                int k2 = (k + 1) % n;
                double l[2];
                bool act[2];
                bool fwd = canonical_first(cell.pos[k], cell.pos[k2]);
                for (int c = 1; c <= 2; ++c) {
                    double va = comp(cell.val[k], c), vb = comp(cell.val[k2], c);
                    act[c - 1] = (va > 0) != (vb > 0);
                    l[c - 1] = fwd ? va / (va - vb) : 1 - vb / (vb - va);
                }
                if (act[0] && act[1] && std::abs(l[0] - l[1]) <= cfg.eps)
                    rep.boundary_points.push_back(lerp(cell.pos[k], cell.pos[k2], 0.5 * (l[0] + l[1])));
            }
        }
        return rep;
    }
    rep.record = &lookup(*rep.coloring, table);
    auto& out = rep.outcome;
    switch (rep.record->kind) {
        case ClassKind::NoCriticalPoint: break;
        case ClassKind::OneCP: {
            out.kind = CellOutcome::One;
            Vec2 st;
            if (cell.shape == Shape::Triangle) {
                Vec2 v0 = cell.val[0], u = cell.val[2] - v0, w = cell.val[1] - v0;
                double det = cross(u, w);
                st = {cross(-v0, w) / det, cross(u, -v0) / det};
                st.x = std::clamp(st.x, 0.0, 1.0);
                st.y = std::clamp(st.y, 0.0, 1.0 - st.x);
            } else {
                auto k = standard_form(cell);
                auto eq = intersection_equation(k);
                auto roots = intersection_roots(k, eq);
                std::vector<Vec2> inside;
                for (auto r : roots)
                    if (in_unit_square(r)) inside.push_back(r);
                if (inside.empty()) {
                    // rounding pushed the root just outside; take the closest one
                    double best = 1e300;
                    for (auto r : roots) {
                        Vec2 c{std::clamp(r.x, 0.0, 1.0), std::clamp(r.y, 0.0, 1.0)};
                        if (dist(r, c) < best) best = dist(r, c), st = c;
                    }
                    if (roots.empty()) st = {0.5, 0.5};
                } else {
                    st = inside[0];
                    if (inside.size() == 2) {
                        CriticalPoint probe = make_cp(cell, inside[0], std::nullopt);
                        try {
                            if (turning_behavior(area_sequence(cell, probe, inside[1])) != rep.record->index)
                                st = inside[1];
                        } catch (const Error&) {
                        }
                    }
                }
            }
            auto cp = make_cp(cell, st, std::nullopt);
            cp.index = rep.record->index;
            out.cps.push_back(cp);
            break;
        }
        case ClassKind::TwoCP: {
            auto k = standard_form(cell);
            auto eq = intersection_equation(k);
            std::vector<Vec2> inside;
            for (auto r : intersection_roots(k, eq))
                if (in_unit_square(r)) inside.push_back(r);
            out.discriminant = eq.delta_normalized;
            if (inside.size() == 2) {
                out.kind = CellOutcome::Two;
                out.cps = {make_cp(cell, inside[0], eq.delta_normalized), make_cp(cell, inside[1], eq.delta_normalized)};
                assign_pair_indices(cell, out.cps);
            }
            break;
        }
        case ClassKind::ValueDependent: {
            out = resolve_value_dependent(cell, cfg.tau, cfg.eps);
            for (const auto& cp : out.cps) {
                double d = std::min({cp.local.x, cp.local.y, 1 - cp.local.x, 1 - cp.local.y});
                if (d <= cfg.eps && cp.order == 1) {
                    rep.boundary = true;
                    rep.boundary_reason = ErrorCode::CoincidentEdgeZeros;
                    rep.boundary_points.push_back(cp.world);
                }
            }
            break;
        }
    }
    return rep;
}

}  // namespace vftop
