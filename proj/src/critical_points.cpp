#include "vftop/critical_points.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vftop/errors.hpp"

namespace vftop {

BilinearCoeffs standard_form(const CellData& cell) {
    BilinearCoeffs k;
    for (int i = 0; i < 2; ++i) {
        auto comp = [&](int corner) { return i == 0 ? cell.val[corner].x : cell.val[corner].y; };
        double v1 = comp(0), v2 = comp(1), v3 = comp(3), v4 = comp(2);
        k.a[i] = v3 - v1;
        k.b[i] = v2 - v1;
        k.c[i] = v1 - v2 - v3 + v4;
        k.d[i] = v1;
    }
    return k;
}

namespace {

double coeff_scale(const BilinearCoeffs& k) {
    double m = 0;
    for (int i = 0; i < 2; ++i) m = std::max({m, std::abs(k.a[i]), std::abs(k.b[i]), std::abs(k.c[i]), std::abs(k.d[i])});
    return m;
}

}  // namespace

IntersectionEquation intersection_equation(const BilinearCoeffs& k) {
    IntersectionEquation eq;
    const double scale = coeff_scale(k);
    const double tiny = 1e-13 * scale * scale;
    if (k.c[0] == 0 && k.c[1] == 0) {
        eq.degree = 1;
        double det = k.a[0] * k.b[1] - k.a[1] * k.b[0];
        if (std::abs(det) <= tiny) {
            double r1 = k.a[0] * k.d[1] - k.a[1] * k.d[0];
            double r2 = k.b[0] * k.d[1] - k.b[1] * k.d[0];
            const double lin = std::max({std::abs(k.a[0]), std::abs(k.b[0]), std::abs(k.a[1]), std::abs(k.b[1])});
            // constant nonzero field: no zeros at all
            if (lin <= 1e-13 * scale && scale > 0) return eq;
            if (std::abs(r1) <= tiny && std::abs(r2) <= tiny)
                throw Error(ErrorCode::DegenerateInterpolant, "dependent linear components");
            return eq;
        }
        eq.linear_solution = Vec2{(-k.d[0] * k.b[1] + k.d[1] * k.b[0]) / det, (-k.a[0] * k.d[1] + k.a[1] * k.d[0]) / det};
        return eq;
    }
    const int j = std::abs(k.c[0]) <= std::abs(k.c[1]) ? 0 : 1;
    const int o = 1 - j;
    eq.eliminated_component = j + 1;
    eq.A = k.b[o] * k.c[j] - k.c[o] * k.b[j];
    eq.B = k.b[o] * k.a[j] + k.d[o] * k.c[j] - k.a[o] * k.b[j] - k.c[o] * k.d[j];
    eq.C = k.d[o] * k.a[j] - k.a[o] * k.d[j];
    if (std::abs(eq.A) <= tiny && std::abs(eq.B) <= tiny && std::abs(eq.C) <= tiny)
        throw Error(ErrorCode::DegenerateInterpolant, "infinitely many common zeros");
    eq.delta = eq.B * eq.B - 4 * eq.A * eq.C;
    eq.delta_normalized = k.c[j] != 0 ? eq.delta / (k.c[j] * k.c[j]) : eq.delta;
    return eq;
}

std::vector<double> solve_quadratic(double A, double B, double C) {
    std::vector<double> r;
    const double m = std::max(std::abs(B), std::abs(C));
    if (A == 0 || std::abs(A) <= 1e-15 * m) {
        if (B != 0) r.push_back(-C / B);
        return r;
    }
    double disc = B * B - 4 * A * C;
    if (disc < 0) return r;
    double sq = std::sqrt(disc);
    double q = -0.5 * (B + std::copysign(sq, B));
    if (q == 0) {
        r = {0.0, 0.0};
        return r;
    }
    r = {q / A, C / q};
    std::sort(r.begin(), r.end());
    return r;
}

std::vector<Vec2> intersection_roots(const BilinearCoeffs& k, const IntersectionEquation& eq) {
    std::vector<Vec2> out;
    if (eq.degree == 1) {
        if (eq.linear_solution) out.push_back(*eq.linear_solution);
        return out;
    }
    if (eq.delta < 0) return out;
    const double scale = coeff_scale(k);
    for (double t : solve_quadratic(eq.A, eq.B, eq.C)) {
        double den0 = k.a[0] + k.c[0] * t, den1 = k.a[1] + k.c[1] * t;
        int i = std::abs(den0) >= std::abs(den1) ? 0 : 1;
        double den = i == 0 ? den0 : den1;
        if (den == 0) continue;
        Vec2 st{-(k.b[i] * t + k.d[i]) / den, t};
        // Newton polish, kept only when it shrinks the residual
        for (int it = 0; it < 3; ++it) {
            Vec2 F = k.eval(st);
            double res = std::max(std::abs(F.x), std::abs(F.y));
            if (res == 0) break;
            Mat2 J = k.jacobian(st);
            double det = J.det();
            if (std::abs(det) <= 1e-12 * scale * scale) break;
            Vec2 step{(F.x * J.d - F.y * J.b) / det, (J.a * F.y - J.c * F.x) / det};
            if (norm(step) > 1e-3) break;
            Vec2 cand = st - step;
            Vec2 G = k.eval(cand);
            if (std::max(std::abs(G.x), std::abs(G.y)) >= res) break;
            st = cand;
        }
        out.push_back(st);
    }
    return out;
}

std::string subtype_name(Subtype s) {
    switch (s) {
        case Subtype::Saddle: return "saddle";
        case Subtype::AttractingNode: return "attracting node";
        case Subtype::RepellingNode: return "repelling node";
        case Subtype::AttractingFocus: return "attracting focus";
        case Subtype::RepellingFocus: return "repelling focus";
        case Subtype::Center: return "center";
    }
    return "?";
}

int area_label(int s1, int s2) {
    if (s1 > 0) return s2 > 0 ? 1 : 2;
    return s2 > 0 ? 3 : 4;
}

std::string area_sequence_str(const AreaSequence& a) {
    static const char* names[5] = {"", "++", "+-", "-+", "--"};
    std::string s = "(";
    for (int i = 0; i < 4; ++i) s += std::string(i ? "," : "") + names[a[i]];
    return s + ")";
}

namespace {

Mat2 local_jacobian(const CellData& cell, Vec2 st) {
    if (cell.shape == Shape::Triangle) {
        Vec2 u = cell.val[2] - cell.val[0], w = cell.val[1] - cell.val[0];
        return {u.x, w.x, u.y, w.y};
    }
    return standard_form(cell).jacobian(st);
}

double boundary_distance(Shape shape, Vec2 st) {
    if (shape == Shape::Triangle) return std::min({st.x, st.y, (1 - st.x - st.y) / std::numbers::sqrt2});
    return std::min({st.x, st.y, 1 - st.x, 1 - st.y});
}

bool valid_area_cycle(const AreaSequence& a) {
    for (int i = 0; i < 4; ++i) {
        int x = a[i] - 1, y = a[(i + 1) % 4] - 1;
        // labels 1..4 encode two sign bits
        int diff = x ^ y;
        if (diff != 1 && diff != 2) return false;
    }
    return a[0] != a[2] && a[1] != a[3];
}

}  // namespace

AreaSequence area_sequence(const CellData& cell, const CriticalPoint& cp, std::optional<Vec2> sibling_local) {
    Mat2 J = local_jacobian(cell, cp.local);
    double th[4];
    th[0] = std::atan2(J.a, -J.b);
    th[2] = std::atan2(J.c, -J.d);
    th[1] = th[0] + std::numbers::pi;
    th[3] = th[2] + std::numbers::pi;
    for (double& x : th) {
        x = std::fmod(x, 2 * std::numbers::pi);
        if (x < 0) x += 2 * std::numbers::pi;
    }
    std::sort(th, th + 4);
    double mag = 0;
    for (int i = 0; i < cell.size(); ++i) mag = std::max({mag, std::abs(cell.val[i].x), std::abs(cell.val[i].y)});
    const double eps = 1e-14 * (1 + mag);
    double r = boundary_distance(cell.shape, cp.local);
    if (sibling_local) r = std::min(r, 0.5 * dist(cp.local, *sibling_local));
    r /= 8;
    if (!(r > 1e-12)) r = sibling_local ? std::max(dist(cp.local, *sibling_local) / 16, 1e-9) : 1e-4;
    for (int attempt = 0; attempt <= 8; ++attempt, r *= 0.5) {
        AreaSequence seq{};
        bool ok = true;
        for (int i = 0; i < 4 && ok; ++i) {
            double hi = i == 3 ? th[0] + 2 * std::numbers::pi : th[i + 1];
            double phi = 0.5 * (th[i] + hi);
            Vec2 p = cp.local + Vec2{std::cos(phi), std::sin(phi)} * r;
            Vec2 v = interpolate(cell, p);
            if (std::abs(v.x) <= eps || std::abs(v.y) <= eps) ok = false;
            seq[i] = area_label(v.x > 0 ? 1 : -1, v.y > 0 ? 1 : -1);
        }
        if (!ok || !valid_area_cycle(seq)) continue;
        auto it = std::find(seq.begin(), seq.end(), 1);
        std::rotate(seq.begin(), it, seq.end());
        return seq;
    }
    throw Error(ErrorCode::SamplingAmbiguous, "area sequence around critical point", cell.id);
}

int turning_behavior(const AreaSequence& seq) {
    // quadrant position in counter-clockwise order
    static const int quadrant[5] = {-1, 0, 3, 1, 2};
    int step0 = -1;
    for (int i = 0; i < 4; ++i) {
        if (seq[i] < 1 || seq[i] > 4) throw Error(ErrorCode::InconsistentTurning, "bad area label");
        int step = ((quadrant[seq[(i + 1) % 4]] - quadrant[seq[i]]) % 4 + 4) % 4;
        if (step != 1 && step != 3) throw Error(ErrorCode::InconsistentTurning, area_sequence_str(seq));
        if (step0 < 0) step0 = step;
        if (step != step0) throw Error(ErrorCode::InconsistentTurning, area_sequence_str(seq));
    }
    return step0 == 1 ? 1 : -1;
}

int winding_index_oracle(const std::function<Vec2(Vec2)>& f, std::span<const Vec2> poly, int n_samples) {
    const std::size_t m = poly.size();
    std::vector<double> cum(m + 1, 0);
    for (std::size_t i = 0; i < m; ++i) cum[i + 1] = cum[i] + dist(poly[i], poly[(i + 1) % m]);
    const double L = cum[m];
    std::vector<Vec2> vals(n_samples);
    double vmax = 0;
    std::size_t seg = 0;
    for (int k = 0; k < n_samples; ++k) {
        double s = L * k / n_samples;
        while (seg + 1 < m && cum[seg + 1] <= s) ++seg;
        double len = cum[seg + 1] - cum[seg];
        double u = len > 0 ? (s - cum[seg]) / len : 0;
        vals[k] = f(lerp(poly[seg], poly[(seg + 1) % m], u));
        vmax = std::max(vmax, norm(vals[k]));
    }
    double total = 0;
    for (int k = 0; k < n_samples; ++k) {
        Vec2 a = vals[k], b = vals[(k + 1) % n_samples];
        if (norm(a) <= 1e-14 * vmax || vmax == 0) throw Error(ErrorCode::ZeroOnCurve, "field vanishes on curve");
        total += std::atan2(cross(a, b), dot(a, b));
    }
    return static_cast<int>(std::lround(total / (2 * std::numbers::pi)));
}

Subtype classify_nonsaddle_subtype(const Mat2& J) {
    double scale = std::max({std::abs(J.a), std::abs(J.b), std::abs(J.c), std::abs(J.d)});
    double det = J.det(), tr = J.trace();
    if (scale == 0 || std::abs(det) <= 1e-12 * scale * scale) throw Error(ErrorCode::SingularJacobian, "singular Jacobian");
    if (det < 0) return Subtype::Saddle;
    double disc = tr * tr - 4 * det;
    if (disc >= 0) return tr < 0 ? Subtype::AttractingNode : Subtype::RepellingNode;
    if (std::abs(tr) <= 1e-12 * scale) return Subtype::Center;
    return tr < 0 ? Subtype::AttractingFocus : Subtype::RepellingFocus;
}

CriticalPoint merge_to_second_order(const CriticalPoint& p, const CriticalPoint& q) {
    if (p.cell != q.cell) throw Error(ErrorCode::IndexMismatch, "critical points in different cells");
    if (p.index + q.index != 0 || p.index == 0)
        throw Error(ErrorCode::IndexMismatch, "indices " + std::to_string(p.index) + "," + std::to_string(q.index));
    CriticalPoint m;
    m.local = (p.local + q.local) * 0.5;
    m.world = (p.world + q.world) * 0.5;
    m.index = 0;
    m.order = 2;
    m.delta = p.delta ? p.delta : q.delta;
    m.cell = p.cell;
    m.synthetic = true;
    return m;
}

Box bounding_box(Vec2 p, Vec2 q) {
    return {{std::min(p.x, q.x), std::min(p.y, q.y)}, {std::max(p.x, q.x), std::max(p.y, q.y)}};
}

std::optional<CriticalPoint> barycentric_cp(const CellData& cell) {
    Vec2 v0 = cell.val[0], u = cell.val[2] - v0, w = cell.val[1] - v0;
    double scale = std::max({norm(v0), norm(u), norm(w)});
    double det = cross(u, w);
    if (std::abs(det) <= 1e-14 * scale * scale) {
        if (std::max(norm(u), norm(w)) <= 1e-14 * scale && norm(v0) > 0) return std::nullopt;
        if (std::abs(cross(u, v0)) <= 1e-14 * scale * scale && std::abs(cross(w, v0)) <= 1e-14 * scale * scale)
            throw Error(ErrorCode::DegenerateInterpolant, "dependent linear components", cell.id);
        return std::nullopt;
    }
    double s = cross(-v0, w) / det, t = cross(u, -v0) / det;
    if (!(s > 0 && t > 0 && 1 - s - t > 0)) return std::nullopt;
    CriticalPoint cp;
    cp.local = {s, t};
    cp.world = from_local(cell, cp.local);
    cp.index = det > 0 ? 1 : -1;
    cp.cell = cell.id;
    return cp;
}

std::vector<CriticalPoint> solve_cp(const CellData& cell) {
    std::vector<CriticalPoint> out;
    if (cell.shape == Shape::Triangle) {
        if (auto cp = barycentric_cp(cell)) out.push_back(*cp);
        return out;
    }
    auto k = standard_form(cell);
    auto eq = intersection_equation(k);
    auto roots = intersection_roots(k, eq);
    std::vector<Vec2> inside;
    for (auto st : roots)
        if (st.x >= 0 && st.x <= 1 && st.y >= 0 && st.y <= 1) inside.push_back(st);
    if (inside.size() == 2 && inside[0] == inside[1]) {
        CriticalPoint cp;
        cp.local = inside[0];
        cp.world = from_local(cell, cp.local);
        cp.order = 2;
        cp.index = 0;
        cp.delta = eq.delta_normalized;
        cp.cell = cell.id;
        out.push_back(cp);
        return out;
    }
    for (std::size_t i = 0; i < inside.size(); ++i) {
        CriticalPoint cp;
        cp.local = inside[i];
        cp.world = from_local(cell, cp.local);
        cp.cell = cell.id;
        if (eq.degree == 2) cp.delta = eq.delta_normalized;
        std::optional<Vec2> sib;
        if (inside.size() == 2) sib = inside[1 - i];
        cp.index = turning_behavior(area_sequence(cell, cp, sib));
        out.push_back(cp);
    }
    return out;
}

Mat2 world_jacobian(const CellData& cell, Vec2 st) {
    Mat2 Jl = local_jacobian(cell, st);
    Vec2 ds, dt;
    if (cell.shape == Shape::Triangle) {
        ds = cell.pos[2] - cell.pos[0];
        dt = cell.pos[1] - cell.pos[0];
    } else {
        Vec2 ew = cell.pos[0] - cell.pos[1] + cell.pos[2] - cell.pos[3];
        ds = cell.pos[3] - cell.pos[0] + ew * st.y;
        dt = cell.pos[1] - cell.pos[0] + ew * st.x;
    }
    // inverse of [ds dt]
    double det = cross(ds, dt);
    Mat2 inv{dt.y / det, -dt.x / det, -ds.y / det, ds.x / det};
    return {Jl.a * inv.a + Jl.b * inv.c, Jl.a * inv.b + Jl.b * inv.d, Jl.c * inv.a + Jl.d * inv.c,
            Jl.c * inv.b + Jl.d * inv.d};
}

}  // namespace vftop
