#include "vftop/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <thread>

namespace vftop {

namespace {

Vec2 period_of(const Field& field) {
    if (auto* g = std::get_if<UniformGrid>(&field.topology()))
        return {g->periodic_x ? g->W * g->spacing.x : 0.0, g->periodic_y ? g->H * g->spacing.y : 0.0};
    return {0, 0};
}

Vec2 nearest_image(Vec2 p, Vec2 ref, Vec2 period) {
    if (period.x > 0) p.x += period.x * std::round((ref.x - p.x) / period.x);
    if (period.y > 0) p.y += period.y * std::round((ref.y - p.y) / period.y);
    return p;
}

CellData cell_near(const Field& field, int id, Vec2 ref) {
    CellData c = field.cell(id);
    Vec2 per = period_of(field);
    if (per.x == 0 && per.y == 0) return c;
    Vec2 shift = nearest_image(c.pos[0], ref, per) - c.pos[0];
    for (int k = 0; k < c.size(); ++k) c.pos[k] = c.pos[k] + shift;
    // keep the cell near ref as a whole, not only its first corner
    Vec2 mid{0, 0};
    for (int k = 0; k < c.size(); ++k) mid += c.pos[k] / c.size();
    Vec2 fix = nearest_image(mid, ref, per) - mid;
    for (int k = 0; k < c.size(); ++k) c.pos[k] = c.pos[k] + fix;
    return c;
}

// convex clockwise polygon containment
bool in_convex_cw(const CellData& c, Vec2 p, double tol) {
    for (int k = 0; k < c.size(); ++k) {
        Vec2 a = c.pos[k], b = c.pos[(k + 1) % c.size()];
        double len = dist(a, b);
        if (cross(b - a, p - a) > tol * len) return false;
    }
    return true;
}

struct EdgeRef {
    int cell, k;
};

struct Loop {
    std::vector<Vec2> pos, val;
    std::vector<int> vertex;
    std::vector<EdgeRef> edges;  // edge i runs from pos[i] to pos[i+1]
    int bad_vertex = -1;         // pinch or hole
};

Loop boundary_loop(const Field& field, const std::vector<int>& members, Vec2 ref) {
    std::set<int> in(members.begin(), members.end());
    struct E {
        Vec2 a, b, fa;
        int va, vb;
        EdgeRef ref;
    };
    std::vector<E> edges;
    for (int id : members) {
        CellData c = cell_near(field, id, ref);
        for (int k = 0; k < c.size(); ++k) {
            int nb = field.edge_neighbor(id, k);
            if (nb >= 0 && in.count(nb)) continue;
            int k2 = (k + 1) % c.size();
            edges.push_back({c.pos[k], c.pos[k2], c.val[k], c.vertex[k], c.vertex[k2], {id, k}});
        }
    }
    Loop loop;
    if (edges.empty()) return loop;
    std::multimap<int, std::size_t> by_start;
    for (std::size_t i = 0; i < edges.size(); ++i) by_start.emplace(edges[i].va, i);
    for (auto& [v, i] : by_start)
        if (by_start.count(v) > 1) {
            loop.bad_vertex = v;
            return loop;
        }
    std::vector<bool> used(edges.size(), false);
    std::size_t cur = 0;
    for (std::size_t n = 0; n < edges.size(); ++n) {
        if (used[cur]) break;
        used[cur] = true;
        const E& e = edges[cur];
        loop.pos.push_back(e.a);
        loop.val.push_back(e.fa);
        loop.vertex.push_back(e.va);
        loop.edges.push_back(e.ref);
        auto it = by_start.find(e.vb);
        if (it == by_start.end()) {
            loop.bad_vertex = e.vb;
            return loop;
        }
        cur = it->second;
    }
    if (loop.pos.size() != edges.size()) {
        for (std::size_t i = 0; i < edges.size(); ++i)
            if (!used[i]) {
                loop.bad_vertex = edges[i].va;
                break;
            }
    }
    return loop;
}

bool fan_valid(const std::vector<Vec2>& boundary, Vec2 center) {
    const std::size_t n = boundary.size();
    if (n < 3) return false;
    double scale = 0;
    for (auto p : boundary) scale = std::max(scale, dist(p, center));
    for (std::size_t i = 0; i < n; ++i) {
        // clockwise fan triangles have negative cross
        if (cross(boundary[i] - center, boundary[(i + 1) % n] - center) >= -1e-12 * scale * scale) return false;
    }
    return true;
}

}  // namespace

CellData SuperCell::fan_triangle(std::size_t i) const {
    CellData c;
    c.shape = Shape::Triangle;
    std::size_t j = (i + 1) % boundary.size();
    c.pos = {center, boundary[i], boundary[j], Vec2{}};
    c.val = {Vec2{0, 0}, boundary_values[i], boundary_values[j], Vec2{}};
    return c;
}

std::optional<Vec2> SuperCell::evaluate(Vec2 p) const {
    for (std::size_t i = 0; i < boundary.size(); ++i) {
        CellData t = fan_triangle(i);
        Vec2 u = t.pos[2] - t.pos[0], w = t.pos[1] - t.pos[0], d = p - t.pos[0];
        double det = cross(u, w);
        if (det == 0) continue;
        double s = cross(d, w) / det, q = cross(u, d) / det;
        const double tol = 1e-12;
        if (s >= -tol && q >= -tol && s + q <= 1 + tol) return interpolate(t, {s, q});
    }
    return std::nullopt;
}

const char* sector_symbol_name(SectorSymbol s) {
    switch (s) {
        case SectorSymbol::ParallelOut: return "P+";
        case SectorSymbol::ParallelIn: return "P-";
        case SectorSymbol::OrthogonalCCW: return "O+";
        case SectorSymbol::OrthogonalCW: return "O-";
    }
    return "?";
}

const char* sector_kind_name(SectorKind k) {
    switch (k) {
        case SectorKind::Hyperbolic: return "hyperbolic";
        case SectorKind::Elliptic: return "elliptic";
        case SectorKind::Parabolic: return "parabolic";
    }
    return "?";
}

int SectorAnalysis::hyperbolic() const {
    return static_cast<int>(std::count(sectors.begin(), sectors.end(), SectorKind::Hyperbolic));
}
int SectorAnalysis::elliptic() const {
    return static_cast<int>(std::count(sectors.begin(), sectors.end(), SectorKind::Elliptic));
}

SuperCell make_super_cell(const Field& field, std::vector<int> members, Vec2 center, std::vector<Vec2> sources) {
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    Loop loop = boundary_loop(field, members, center);
    if (loop.bad_vertex >= 0 || loop.pos.size() < 3)
        throw Error(ErrorCode::DegenerateCell, "super-cell boundary is not a simple loop",
                    members.empty() ? -1 : members.front());
    SuperCell sc;
    sc.members = std::move(members);
    sc.boundary = std::move(loop.pos);
    sc.boundary_values = std::move(loop.val);
    sc.sources = std::move(sources);
    sc.center = center;
    return sc;
}

std::vector<SuperCell> cluster_boundary_cps(const Field& field, const std::vector<CellReport>& flagged,
                                            const ClusterConfig& cfg) {
    struct Cluster {
        std::set<int> members;
        std::vector<Vec2> sources;
        bool open = false;
    };
    const Vec2 per = period_of(field);
    std::vector<Cluster> clusters;
    for (const auto& r : flagged) {
        if (!r.boundary) continue;
        CellData home = field.cell(r.cell);
        std::set<int> candidates{r.cell};
        for (int k = 0; k < home.size(); ++k)
            for (int id : field.cells_around_vertex(home.vertex[k])) candidates.insert(id);
        for (Vec2 p : r.boundary_points) {
            Cluster c;
            c.sources.push_back(p);
            for (int id : candidates) {
                CellData cd = cell_near(field, id, p);
                if (in_convex_cw(cd, p, 1e-7 * cd.diameter())) c.members.insert(id);
            }
            c.members.insert(r.cell);
            clusters.push_back(std::move(c));
        }
    }
    auto merge_all = [&]() {
        bool any = true;
        while (any) {
            any = false;
            for (std::size_t i = 0; i < clusters.size() && !any; ++i)
                for (std::size_t j = i + 1; j < clusters.size() && !any; ++j) {
                    bool overlap = std::any_of(clusters[j].members.begin(), clusters[j].members.end(),
                                               [&](int m) { return clusters[i].members.count(m) > 0; });
                    if (!overlap) continue;
                    clusters[i].members.insert(clusters[j].members.begin(), clusters[j].members.end());
                    Vec2 ref = clusters[i].sources.front();
                    for (Vec2 s : clusters[j].sources) clusters[i].sources.push_back(nearest_image(s, ref, per));
                    clusters[i].open = clusters[i].open || clusters[j].open;
                    clusters.erase(clusters.begin() + static_cast<long>(j));
                    any = true;
                }
        }
    };
    auto center_of = [&](const Cluster& c) {
        Vec2 ref = c.sources.front(), sum{0, 0};
        for (Vec2 s : c.sources) sum += nearest_image(s, ref, per);
        return sum / static_cast<double>(c.sources.size());
    };
    auto check_cap = [&](const Cluster& c) {
        if (static_cast<int>(c.members.size()) > cfg.max_cells)
            throw Error(ErrorCode::ClusterGrowthLimit,
                        "super-cell exceeds " + std::to_string(cfg.max_cells) + " cells", *c.members.begin());
    };

    merge_all();
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto& c : clusters) {
            check_cap(c);
            std::vector<int> mem(c.members.begin(), c.members.end());
            Vec2 center = center_of(c);
            Loop loop = boundary_loop(field, mem, center);
            std::set<int> add;
            if (loop.bad_vertex >= 0) {
                for (int id : field.cells_around_vertex(loop.bad_vertex)) add.insert(id);
            } else {
                const std::size_t n = loop.pos.size();
                for (std::size_t i = 0; i < n; ++i) {
                    Vec2 f = loop.val[i];
                    if (std::abs(f.x) <= cfg.eps && std::abs(f.y) <= cfg.eps) {
                        auto around = field.cells_around_vertex(loop.vertex[i]);
                        add.insert(around.begin(), around.end());
                    }
                    Vec2 fa = loop.val[i], fb = loop.val[(i + 1) % n];
                    bool a1 = (fa.x > 0) != (fb.x > 0), a2 = (fa.y > 0) != (fb.y > 0);
                    if (a1 && a2) {
                        double l1 = fa.x / (fa.x - fb.x), l2 = fa.y / (fa.y - fb.y);
                        if (std::abs(l1 - l2) <= cfg.eps) {
                            int nb = field.edge_neighbor(loop.edges[i].cell, loop.edges[i].k);
                            if (nb < 0)
                                c.open = true;
                            else
                                add.insert(nb);
                        }
                    }
                }
                if (add.empty() && !fan_valid(loop.pos, center)) {
                    for (int id : mem)
                        for (int k = 0; k < edge_count(field.cell_shape()); ++k) {
                            int nb = field.edge_neighbor(id, k);
                            if (nb >= 0) add.insert(nb);
                        }
                    if (std::all_of(add.begin(), add.end(), [&](int id) { return c.members.count(id) > 0; })) c.open = true;
                }
            }
            std::size_t before = c.members.size();
            c.members.insert(add.begin(), add.end());
            if (c.members.size() != before) changed = true;
            // vertex zeros on the domain edge cannot be enclosed
            if (c.members.size() == before && loop.bad_vertex < 0) {
                for (std::size_t i = 0; i < loop.pos.size(); ++i) {
                    Vec2 f = loop.val[i];
                    if (std::abs(f.x) <= cfg.eps && std::abs(f.y) <= cfg.eps) c.open = true;
                }
            }
            if (c.members.size() == before && loop.bad_vertex >= 0) c.open = true;
        }
        if (changed) merge_all();
    }

    std::vector<SuperCell> out;
    for (auto& c : clusters) {
        check_cap(c);
        Vec2 center = center_of(c);
        std::vector<int> mem(c.members.begin(), c.members.end());
        Loop loop = boundary_loop(field, mem, center);
        SuperCell sc;
        sc.members = mem;
        sc.sources = c.sources;
        sc.center = center;
        sc.open = c.open || loop.bad_vertex >= 0 || !fan_valid(loop.pos, center);
        if (loop.bad_vertex < 0) {
            sc.boundary = std::move(loop.pos);
            sc.boundary_values = std::move(loop.val);
        }
        out.push_back(std::move(sc));
    }
    std::sort(out.begin(), out.end(), [](const SuperCell& a, const SuperCell& b) { return a.members < b.members; });
    return out;
}

std::vector<SectorSymbol> sector_sequence(const SuperCell& sc, int samples_per_edge, double eps) {
    std::vector<SectorSymbol> out;
    const std::size_t n = sc.boundary.size();
    double fmax = 0;
    for (auto f : sc.boundary_values) fmax = std::max(fmax, norm(f));
    const double c45 = std::numbers::sqrt2 / 2;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = (i + 1) % n;
        for (int m = 0; m < samples_per_edge; ++m) {
            double lam = static_cast<double>(m) / samples_per_edge;
            Vec2 p = lerp(sc.boundary[i], sc.boundary[j], lam);
            Vec2 f = lerp(sc.boundary_values[i], sc.boundary_values[j], lam);
            Vec2 r = p - sc.center;
            if (norm(f) <= eps * fmax || fmax == 0) throw Error(ErrorCode::ZeroOnBoundary, "field vanishes on super-cell boundary");
            double c = dot(f, r) / (norm(f) * norm(r));
            if (c >= c45)
                out.push_back(SectorSymbol::ParallelOut);
            else if (c <= -c45)
                out.push_back(SectorSymbol::ParallelIn);
            else
                out.push_back(cross(r, f) > 0 ? SectorSymbol::OrthogonalCCW : SectorSymbol::OrthogonalCW);
        }
    }
    return out;
}

SectorAnalysis analyze_sectors(const SuperCell& sc, double eps) {
    SectorAnalysis an;
    const std::size_t n = sc.boundary.size();
    if (n < 3) throw Error(ErrorCode::DegenerateCell, "super-cell boundary has fewer than 3 vertices");
    double fmax = 0, rmax = 0;
    for (std::size_t i = 0; i < n; ++i) {
        fmax = std::max(fmax, norm(sc.boundary_values[i]));
        rmax = std::max(rmax, dist(sc.boundary[i], sc.center));
    }
    // winding along the clockwise boundary; straight pieces of f subtend at most pi
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 a = sc.boundary_values[i], b = sc.boundary_values[(i + 1) % n];
        if (norm(a) <= eps * fmax || fmax == 0) throw Error(ErrorCode::ZeroOnBoundary, "zero at super-cell vertex");
        if (std::abs(cross(a, b)) <= eps * fmax * fmax && dot(a, b) < 0)
            throw Error(ErrorCode::ZeroOnBoundary, "zero on super-cell edge");
        total += std::atan2(cross(a, b), dot(a, b));
    }
    an.winding = -static_cast<int>(std::lround(total / (2 * std::numbers::pi)));

    // radial directions: cross(r(l), f(l)) = 0 per boundary edge
    struct R {
        double u;  // boundary parameter: edge index + lambda
        Vec2 p, f;
    };
    std::vector<R> roots;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = (i + 1) % n;
        Vec2 r0 = sc.boundary[i] - sc.center, dr = sc.boundary[j] - sc.boundary[i];
        Vec2 f0 = sc.boundary_values[i], df = sc.boundary_values[j] - f0;
        double C = cross(r0, f0), B = cross(r0, df) + cross(dr, f0), A = cross(dr, df);
        double scale = rmax * fmax;
        if (std::abs(A) <= 1e-14 * scale && std::abs(B) <= 1e-14 * scale && std::abs(C) <= 1e-14 * scale) {
            // radial along the whole edge: its endpoints bound the radial stretch
            roots.push_back({static_cast<double>(i), sc.boundary[i], f0});
            roots.push_back({static_cast<double>(i) + 1 - 1e-12, sc.boundary[j], f0 + df});
            continue;
        }
        for (double l : solve_quadratic(A, B, C)) {
            if (!(l >= 0 && l < 1)) continue;
            roots.push_back({static_cast<double>(i) + l, lerp(sc.boundary[i], sc.boundary[j], l), lerp(f0, f0 + df, l)});
        }
    }
    std::sort(roots.begin(), roots.end(), [](const R& a, const R& b) { return a.u < b.u; });
    // drop duplicates at shared vertices
    std::vector<R> uniq;
    for (const auto& r : roots)
        if (uniq.empty() || dist(uniq.back().p, r.p) > 1e-12 * (1 + rmax)) uniq.push_back(r);
    if (uniq.size() > 1 && dist(uniq.front().p, uniq.back().p) <= 1e-12 * (1 + rmax)) uniq.pop_back();

    auto point_at = [&](double u) {
        u = std::fmod(u, static_cast<double>(n));
        if (u < 0) u += n;
        std::size_t i = static_cast<std::size_t>(u) % n, j = (i + 1) % n;
        double l = u - std::floor(u);
        return std::pair{lerp(sc.boundary[i], sc.boundary[j], l), lerp(sc.boundary_values[i], sc.boundary_values[j], l)};
    };
    auto motion = [&](double u0, double u1) {
        if (u1 <= u0) u1 += n;
        // dominant normalized cross product over the arc; radial stretches count as 0
        double best = 0;
        for (int q = 1; q < 32; ++q) {
            auto [p, f] = point_at(u0 + q / 32.0 * (u1 - u0));
            Vec2 r = p - sc.center;
            double den = norm(r) * norm(f);
            if (den == 0) continue;
            double c = cross(r, f) / den;
            if (std::abs(c) > std::abs(best)) best = c;
        }
        if (std::abs(best) <= 1e-9) return 0;
        return best > 0 ? 1 : -1;
    };

    // remove tangencies, where the motion sign does not change across a radial direction
    bool again = true;
    while (again && uniq.size() >= 2) {
        again = false;
        const std::size_t m = uniq.size();
        for (std::size_t k = 0; k < m; ++k) {
            const R& prev = uniq[(k + m - 1) % m];
            const R& next = uniq[(k + 1) % m];
            int before = motion(prev.u, uniq[k].u), after = motion(uniq[k].u, next.u);
            if (before == after) {
                uniq.erase(uniq.begin() + static_cast<long>(k));
                again = true;
                break;
            }
        }
    }
    if (uniq.size() == 1) uniq.clear();

    for (const auto& r : uniq) {
        Vec2 rv = r.p - sc.center;
        double d = dot(r.f, rv);
        if (std::abs(d) <= eps * fmax * norm(rv)) throw Error(ErrorCode::ZeroOnBoundary, "field vanishes on radial direction");
        an.rays.push_back({r.p, std::atan2(rv.y, rv.x), d > 0});
    }
    const std::size_t m = uniq.size();
    for (std::size_t k = 0; k < m; ++k) {
        const Ray& a = an.rays[k];
        const Ray& b = an.rays[(k + 1) % m];
        int mo = motion(uniq[k].u, uniq[(k + 1) % m].u);
        SectorKind kind;
        if (a.outgoing == b.outgoing)
            kind = SectorKind::Parabolic;
        else if (!a.outgoing)
            kind = mo < 0 ? SectorKind::Hyperbolic : SectorKind::Elliptic;
        else
            kind = mo > 0 ? SectorKind::Hyperbolic : SectorKind::Elliptic;
        an.sectors.push_back(kind);
    }
    an.bendixson = 1 + (an.elliptic() - an.hyperbolic()) / 2;
    return an;
}

std::vector<Seed> sector_seeds(const SuperCell& sc) {
    SectorAnalysis an = analyze_sectors(sc);
    const std::size_t m = an.rays.size();
    std::vector<bool> take(m, false);
    for (std::size_t k = 0; k < m; ++k)
        if (an.sectors[k] == SectorKind::Hyperbolic) take[k] = take[(k + 1) % m] = true;
    std::vector<Seed> out;
    for (std::size_t k = 0; k < m; ++k)
        if (take[k]) out.push_back({an.rays[k].point, an.rays[k].outgoing ? Direction::Forward : Direction::Backward});
    return out;
}

namespace {

Mat2 fd_jacobian(const Field& field, Vec2 p, double h) {
    auto fx1 = field.evaluate(p + Vec2{h, 0}), fx0 = field.evaluate(p - Vec2{h, 0});
    auto fy1 = field.evaluate(p + Vec2{0, h}), fy0 = field.evaluate(p - Vec2{0, h});
    if (!fx1 || !fx0 || !fy1 || !fy0) throw Error(ErrorCode::JacobianFailure, "stencil leaves the domain");
    Vec2 dx = (*fx1 - *fx0) / (2 * h), dy = (*fy1 - *fy0) / (2 * h);
    return {dx.x, dy.x, dx.y, dy.y};
}

Vec2 eigenvector(const Mat2& J, double lambda) {
    Vec2 v1{J.b, lambda - J.a}, v2{lambda - J.d, J.c};
    Vec2 v = norm(v1) >= norm(v2) ? v1 : v2;
    double n = norm(v);
    if (n == 0) return std::abs(J.a - lambda) <= std::abs(J.d - lambda) ? Vec2{1, 0} : Vec2{0, 1};
    return v / n;
}

double exit_distance(const CellData& c, Vec2 p, Vec2 v) {
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < c.size(); ++k) {
        Vec2 a = c.pos[k], e = c.pos[(k + 1) % c.size()] - a;
        double den = cross(v, e);
        if (den == 0) continue;
        double t = cross(a - p, e) / den, u = cross(a - p, v) / den;
        if (u >= -1e-12 && u <= 1 + 1e-12 && t > 0) best = std::min(best, t);
    }
    return best;
}

}  // namespace

std::vector<Seed> saddle_seeds(const Field& field, const CriticalPoint& cp, double max_offset) {
    CellData c = field.cell(cp.cell);
    Vec2 shift = cp.world - from_local(c, cp.local);
    for (int k = 0; k < c.size(); ++k) c.pos[k] = c.pos[k] + shift;
    double h = 1e-5 * c.diameter();
    Mat2 J;
    try {
        J = fd_jacobian(field, cp.world, h);
    } catch (const Error&) {
        J = world_jacobian(c, cp.local);
    }
    double tr = J.trace(), det = J.det();
    double scale = std::max({std::abs(J.a), std::abs(J.b), std::abs(J.c), std::abs(J.d)});
    if (!(det < -1e-12 * scale * scale))
        throw Error(ErrorCode::JacobianFailure, "Jacobian at saddle is not indefinite", cp.cell);
    double disc = std::sqrt(tr * tr / 4 - det);
    double lu = tr / 2 + disc, ls = tr / 2 - disc;
    Vec2 vu = eigenvector(J, lu), vs = eigenvector(J, ls);
    std::vector<Seed> out;
    for (auto [v, d] : {std::pair{vu, Direction::Forward}, std::pair{-vu, Direction::Forward},
                        std::pair{vs, Direction::Backward}, std::pair{-vs, Direction::Backward}}) {
        double t = std::min(exit_distance(c, cp.world, v), max_offset);
        if (!std::isfinite(t)) throw Error(ErrorCode::JacobianFailure, "seed ray misses the cell boundary", cp.cell);
        out.push_back({cp.world + v * t, d});
    }
    return out;
}

std::vector<Seed> separatrix_seeds(const Field& field, const CriticalPoint& cp, const SuperCell* region) {
    if (cp.order == 1 && cp.index == -1 && cp.super_cell < 0) return saddle_seeds(field, cp);
    if (region) return sector_seeds(*region);
    if (cp.order != 1 && cp.cell >= 0) {
        SuperCell sc = make_super_cell(field, {cp.cell}, cp.world);
        return sector_seeds(sc);
    }
    return {};
}

const char* terminus_name(Separatrix::Terminus t) {
    switch (t) {
        case Separatrix::Terminus::CriticalPoint: return "critical-point";
        case Separatrix::Terminus::Boundary: return "boundary";
        case Separatrix::Terminus::StepLimit: return "step-limit";
        case Separatrix::Terminus::ArcLength: return "arc-length";
    }
    return "?";
}

Separatrix trace_streamline(Vec2 seed, Direction dir, const Field& field, const TraceLimits& limits,
                            const TraceContext& ctx) {
    Separatrix sep;
    sep.direction = dir;
    sep.origin = ctx.origin_cp;
    sep.points.push_back(seed);
    const double sigma = dir == Direction::Forward ? 1.0 : -1.0;
    const double cd = field.cell_diameter();
    const double hmax = limits.max_step_factor * cd;
    const double atol = limits.atol_factor * cd;
    const double hmin = limits.underflow_factor * field.diameter();
    const Vec2 per = period_of(field);
    bool stagnant = false;
    auto g = [&](Vec2 x) -> std::optional<Vec2> {
        auto v = field.evaluate(x);
        if (!v) return std::nullopt;
        double n = norm(*v);
        if (n == 0 || !std::isfinite(n)) {
            stagnant = true;
            return Vec2{0, 0};
        }
        return *v * (sigma / n);
    };
    auto in_origin = [&](int id) {
        return std::find(ctx.origin_cells.begin(), ctx.origin_cells.end(), id) != ctx.origin_cells.end();
    };
    std::vector<int> siblings;
    if (ctx.cp_cells && ctx.sibling_radius > 0)
        for (int oc : ctx.origin_cells)
            if (ctx.cp_cells->contains(oc))
                for (int id : ctx.cp_cells->by_cell[oc])
                    if (id != ctx.origin_cp && std::find(siblings.begin(), siblings.end(), id) == siblings.end())
                        siblings.push_back(id);

    // Dormand-Prince 5(4)
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;
    (void)c2, (void)c3, (void)c4, (void)c5;

    Vec2 x = seed;
    auto k1o = g(x);
    if (!k1o) {
        sep.terminus = Separatrix::Terminus::Boundary;
        return sep;
    }
    Vec2 k1 = *k1o;
    double h = std::min(hmax, 0.1 * cd);
    double arc = 0;
    bool left_origin = ctx.origin_cells.empty();
    {
        auto id0 = field.locate(x);
        if (id0 && !in_origin(*id0)) left_origin = true;
    }
    // straight segment from b to the critical point of `cell` best aligned with the flow
    auto snap = [&](int cell, Vec2 b, Vec2 flow) {
        int best = -1;
        double best_dot = -2;
        for (int cpid : ctx.cp_cells->by_cell[cell]) {
            Vec2 p = nearest_image(ctx.cp_cells->positions[cpid], b, per);
            Vec2 d = p - b;
            double nd = norm(d);
            double q = nd > 0 ? dot(flow, d / nd) : 1;
            if (q > best_dot) best_dot = q, best = cpid;
        }
        sep.points.push_back(nearest_image(ctx.cp_cells->positions[best], b, per));
        sep.terminus = Separatrix::Terminus::CriticalPoint;
        sep.terminus_cp = best;
        return sep;
    };
    if (ctx.cp_cells) {
        auto id0 = field.locate(x);
        if (id0 && ctx.cp_cells->contains(*id0) && !in_origin(*id0)) return snap(*id0, x, k1);
    }
    int steps = 0;
    auto exit_point = [&](Vec2 a, Vec2 b) {
        for (int it = 0; it < 60; ++it) {
            Vec2 mid = (a + b) * 0.5;
            if (field.locate(mid))
                a = mid;
            else
                b = mid;
        }
        return a;
    };
    while (true) {
        if (stagnant) {
            sep.terminus = Separatrix::Terminus::StepLimit;
            return sep;
        }
        if (steps >= limits.max_steps) {
            sep.terminus = Separatrix::Terminus::StepLimit;
            return sep;
        }
        if (h < hmin) throw Error(ErrorCode::StepUnderflow, "integration step underflow");
        std::optional<Vec2> k2, k3, k4, k5, k6, k7;
        Vec2 y5;
        bool ok = (k2 = g(x + h * (a21 * k1))) && (k3 = g(x + h * (a31 * k1 + a32 * *k2))) &&
                  (k4 = g(x + h * (a41 * k1 + a42 * *k2 + a43 * *k3))) &&
                  (k5 = g(x + h * (a51 * k1 + a52 * *k2 + a53 * *k3 + a54 * *k4))) &&
                  (k6 = g(x + h * (a61 * k1 + a62 * *k2 + a63 * *k3 + a64 * *k4 + a65 * *k5)));
        if (ok) {
            y5 = x + h * (b1 * k1 + b3 * *k3 + b4 * *k4 + b5 * *k5 + b6 * *k6);
            ok = static_cast<bool>(k7 = g(y5));
        }
        if (!ok) {
            if (stagnant) continue;
            Vec2 probe = x + k1 * h;
            if (!field.locate(probe)) {
                Vec2 b = exit_point(x, probe);
                sep.points.push_back(b);
                sep.terminus = Separatrix::Terminus::Boundary;
                return sep;
            }
            h *= 0.5;
            continue;
        }
        Vec2 err = h * (e1 * k1 + e3 * *k3 + e4 * *k4 + e5 * *k5 + e6 * *k6 + e7 * *k7);
        double sx = atol + limits.rtol * std::max(std::abs(x.x), std::abs(y5.x));
        double sy = atol + limits.rtol * std::max(std::abs(x.y), std::abs(y5.y));
        double en = std::max(std::abs(err.x) / sx, std::abs(err.y) / sy);
        if (en > 1) {
            h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
            continue;
        }
        ++steps;
        arc += dist(x, y5);
        Vec2 prev = x;
        x = y5;
        k1 = *k7;
        h = std::min(hmax, h * std::min(5.0, en > 0 ? 0.9 * std::pow(en, -0.2) : 5.0));

        auto id = field.locate(x);
        if (!id) {
            sep.points.push_back(exit_point(prev, x));
            sep.terminus = Separatrix::Terminus::Boundary;
            return sep;
        }
        sep.points.push_back(x);
        if (!in_origin(*id)) left_origin = true;
        if (!left_origin && !siblings.empty()) {
            for (int s : siblings) {
                Vec2 sp = nearest_image(ctx.cp_cells->positions[s], x, per);
                if (dist(sp, x) < ctx.sibling_radius) {
                    sep.points.push_back(sp);
                    sep.terminus = Separatrix::Terminus::CriticalPoint;
                    sep.terminus_cp = s;
                    return sep;
                }
            }
        }
        if (ctx.cp_cells && ctx.cp_cells->contains(*id) && (left_origin || !in_origin(*id))) {
            // entry point on the cell boundary
            Vec2 a = prev, b = x;
            for (int it = 0; it < 50; ++it) {
                Vec2 mid = (a + b) * 0.5;
                auto mid_id = field.locate(mid);
                if (mid_id && *mid_id == *id)
                    b = mid;
                else
                    a = mid;
            }
            sep.points.back() = b;
            return snap(*id, b, *k7);
        }
        if (arc >= limits.max_arc_length) {
            sep.terminus = Separatrix::Terminus::ArcLength;
            return sep;
        }
    }
}

int Skeleton::index_sum() const {
    int s = 0;
    for (const auto& cp : cps) s += cp.index;
    return s;
}

int Skeleton::count_index(int index) const {
    return static_cast<int>(std::count_if(cps.begin(), cps.end(), [&](const CriticalPoint& c) { return c.index == index; }));
}

Skeleton build_skeleton(const Field& field, const LookupTable& table, const SkeletonConfig& cfg) {
    Skeleton sk;
    const int N = field.cell_count();
    std::vector<CellReport> reports(N);
    std::vector<CellReport> flagged;
    for (int i = 0; i < N; ++i) {
        try {
            reports[i] = classify_cell(field.cell(i), table, cfg.classify);
        } catch (const Error& e) {
            throw Error(e.code(), e.what(), i);
        }
        sk.stats.add(reports[i]);
        if (reports[i].boundary) flagged.push_back(reports[i]);
    }
    sk.super_cells = cluster_boundary_cps(field, flagged, cfg.cluster);
    std::vector<int> member_of(N, -1);
    for (std::size_t s = 0; s < sk.super_cells.size(); ++s)
        for (int m : sk.super_cells[s].members) member_of[m] = static_cast<int>(s);

    for (int i = 0; i < N; ++i) {
        const auto& r = reports[i];
        if (member_of[i] >= 0) {
            sk.absorbed_cps += static_cast<int>(r.outcome.cps.size());
            continue;
        }
        if (r.outcome.kind == CellOutcome::Two) sk.two_cp_cells.push_back(i);
        if (r.outcome.kind == CellOutcome::SecondOrder) sk.second_order_cells.push_back(i);
        CellData c = field.cell(i);
        for (auto cp : r.outcome.cps) {
            cp.cell = i;
            if (cp.order == 1 && cp.index == -1) {
                cp.subtype = Subtype::Saddle;
            } else if (cp.order == 1 && cp.index == 1) {
                try {
                    Subtype s = classify_nonsaddle_subtype(world_jacobian(c, cp.local));
                    if (s != Subtype::Saddle) cp.subtype = s;
                } catch (const Error&) {
                }
            }
            sk.cps.push_back(cp);
        }
    }
    std::vector<std::optional<SectorAnalysis>> analyses(sk.super_cells.size());
    for (std::size_t s = 0; s < sk.super_cells.size(); ++s) {
        const auto& sc = sk.super_cells[s];
        if (sc.open) {
            sk.warnings.push_back("super-cell at cell " + std::to_string(sc.members.front()) +
                                  " touches the domain boundary; no critical point emitted");
            continue;
        }
        try {
            analyses[s] = analyze_sectors(sc);
        } catch (const Error& e) {
            sk.warnings.push_back("super-cell at cell " + std::to_string(sc.members.front()) + ": " + e.what());
            continue;
        }
        const auto& an = *analyses[s];
        // a regular point looks like two hyperbolic sectors with index 0
        if (an.winding == 0 && an.rays.size() <= 2) continue;
        CriticalPoint cp;
        cp.world = sc.center;
        cp.cell = sc.members.front();
        cp.super_cell = static_cast<int>(s);
        cp.index = an.winding;
        cp.order = std::abs(an.winding) == 1 ? 1 : 2;
        cp.synthetic = true;
        if (cp.index == -1) cp.subtype = Subtype::Saddle;
        try {
            cp.local = to_local(field.cell(cp.cell), nearest_image(cp.world, field.cell(cp.cell).pos[0], period_of(field)), 1e-6);
        } catch (const Error&) {
        }
        sk.cps.push_back(cp);
    }

    CpCells cpc;
    cpc.by_cell.resize(N);
    for (std::size_t id = 0; id < sk.cps.size(); ++id) {
        const auto& cp = sk.cps[id];
        cpc.positions.push_back(cp.world);
        if (cp.super_cell >= 0)
            for (int m : sk.super_cells[cp.super_cell].members) cpc.by_cell[m].push_back(static_cast<int>(id));
        else
            cpc.by_cell[cp.cell].push_back(static_cast<int>(id));
    }
    if (!cfg.trace_separatrices) return sk;

    struct Job {
        int cp;
        Seed seed;
        TraceContext ctx;
    };
    std::vector<Job> jobs;
    for (std::size_t id = 0; id < sk.cps.size(); ++id) {
        const auto& cp = sk.cps[id];
        TraceContext ctx;
        ctx.cp_cells = &cpc;
        ctx.origin_cp = static_cast<int>(id);
        std::vector<Seed> seeds;
        try {
            if (cp.super_cell >= 0) {
                ctx.origin_cells = sk.super_cells[cp.super_cell].members;
                seeds = sector_seeds(sk.super_cells[cp.super_cell]);
            } else if (cp.order != 1) {
                ctx.origin_cells = {cp.cell};
                seeds = separatrix_seeds(field, cp);
            } else if (cp.index == -1) {
                ctx.origin_cells = {cp.cell};
                double max_offset = std::numeric_limits<double>::infinity();
                if (cpc.by_cell[cp.cell].size() > 1) {
                    double nearest = std::numeric_limits<double>::infinity();
                    for (int o : cpc.by_cell[cp.cell])
                        if (o != static_cast<int>(id)) nearest = std::min(nearest, dist(cp.world, sk.cps[o].world));
                    max_offset = 0.1 * nearest;
                    ctx.sibling_radius = 0.25 * nearest;
                }
                try {
                    seeds = saddle_seeds(field, cp, max_offset);
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::JacobianFailure) throw;
                    sk.warnings.push_back("saddle in cell " + std::to_string(cp.cell) + ": " + e.what() +
                                          "; using sector seeds");
                    seeds = sector_seeds(make_super_cell(field, {cp.cell}, cp.world));
                }
            }
        } catch (const Error& e) {
            sk.warnings.push_back("seeding at cell " + std::to_string(cp.cell) + ": " + e.what());
            continue;
        }
        for (const auto& s : seeds) jobs.push_back({static_cast<int>(id), s, ctx});
    }

    TraceLimits lim = cfg.trace;
    if ((field.periodic_x() || field.periodic_y()) && !std::isfinite(lim.max_arc_length))
        lim.max_arc_length = 20 * field.diameter();
    sk.separatrices.resize(jobs.size());
    std::vector<std::string> job_warn(jobs.size());
    auto run = [&](std::size_t j) {
        const auto& job = jobs[j];
        Separatrix s;
        try {
            s = trace_streamline(job.seed.point, job.seed.direction, field, lim, job.ctx);
        } catch (const Error& e) {
            s.points = {job.seed.point};
            s.terminus = Separatrix::Terminus::StepLimit;
            s.direction = job.seed.direction;
            job_warn[j] = std::string("trace from cell ") + std::to_string(sk.cps[job.cp].cell) + ": " + e.what();
        }
        s.origin = job.cp;
        s.points.insert(s.points.begin(), sk.cps[job.cp].world);
        sk.separatrices[j] = std::move(s);
    };
    unsigned nt = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    nt = std::min<unsigned>(nt, static_cast<unsigned>(std::max<std::size_t>(1, jobs.size())));
    if (nt <= 1) {
        for (std::size_t j = 0; j < jobs.size(); ++j) run(j);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nt; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t j = t; j < jobs.size(); j += nt) run(j);
            });
        for (auto& th : pool) th.join();
    }
    for (auto& w : job_warn)
        if (!w.empty()) sk.warnings.push_back(w);
    return sk;
}

}  // namespace vftop
