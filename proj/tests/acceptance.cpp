#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "vftop/random_stats.hpp"
#include "vftop/skeleton.hpp"

using namespace vftop;

namespace {

int failures = 0;

void report(int n, bool ok, const std::string& what) {
    std::printf("CRITERION %d %s: %s\n", n, ok ? "PASS" : "FAIL", what.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// unit square bilinear interpolant, written out independently of the library
struct Bilinear {
    std::array<Vec2, 4> v;  // (0,0) (0,1) (1,1) (1,0)
    explicit Bilinear(const CellData& c) : v(c.val) {}
    double comp(int k, double s, double t) const {
        auto g = [&](int i) { return k == 0 ? v[i].x : v[i].y; };
        return g(0) * (1 - s) * (1 - t) + g(1) * (1 - s) * t + g(2) * s * t + g(3) * s * (1 - t);
    }
    Vec2 operator()(Vec2 p) const { return {comp(0, p.x, p.y), comp(1, p.x, p.y)}; }
    double max_abs() const {
        double m = 0;
        for (auto w : v) m = std::max({m, std::abs(w.x), std::abs(w.y)});
        return m;
    }
    // all zeros in the plane, via elimination of t in long double
    std::vector<Vec2> plane_roots() const {
        using L = long double;
        // B_k = a + b s + c t + d s t
        auto coeffs = [&](int k) {
            auto g = [&](int i) { return static_cast<L>(k == 0 ? v[i].x : v[i].y); };
            return std::array<L, 4>{g(0), g(3) - g(0), g(1) - g(0), g(0) - g(1) + g(2) - g(3)};
        };
        auto [a1, b1, c1, d1] = coeffs(0);
        auto [a2, b2, c2, d2] = coeffs(1);
        // (a2 + b2 s)(c1 + d1 s) - (c2 + d2 s)(a1 + b1 s) = 0
        L A = b2 * d1 - d2 * b1, B = a2 * d1 + b2 * c1 - c2 * b1 - d2 * a1, C = a2 * c1 - c2 * a1;
        std::vector<L> ss;
        if (std::abs(A) < 1e-300L) {
            if (std::abs(B) > 0) ss.push_back(-C / B);
        } else {
            L D = B * B - 4 * A * C;
            if (D >= 0) {
                L r = std::sqrt(D);
                ss.push_back((-B + r) / (2 * A));
                ss.push_back((-B - r) / (2 * A));
            }
        }
        std::vector<Vec2> out;
        for (L s : ss) {
            L den1 = c1 + d1 * s, den2 = c2 + d2 * s;
            L t = std::abs(den1) >= std::abs(den2) ? -(a1 + b1 * s) / den1 : -(a2 + b2 * s) / den2;
            if (std::isfinite(static_cast<double>(t))) out.push_back({static_cast<double>(s), static_cast<double>(t)});
        }
        return out;
    }
};

// 1. lookup table class counts
void criterion_1() {
    auto t0 = std::chrono::steady_clock::now();
    LookupTable tri = build_lookup_table(Shape::Triangle);
    LookupTable quad = build_lookup_table(Shape::Quad);
    double secs = seconds_since(t0);
    auto ct = tri.counts(), cq = quad.counts();
    bool ok = ct.cp_bearing() == 8 && ct.one_minus == 4 && ct.one_plus == 4 && ct.two == 0 && ct.value_dependent == 0;
    ok = ok && cq.cp_bearing() == 74 && cq.one_minus + cq.one_plus == 38 && cq.two == 4 && cq.value_dependent == 32;
    const int reps[8][3] = {{1, 6, 9}, {1, 7, 8}, {1, 10, 13}, {1, 11, 12}, {2, 4, 9}, {2, 5, 8}, {2, 11, 5}, {2, 13, 4}};
    const int idx[8] = {-1, 1, 1, -1, -1, 1, -1, 1};
    std::vector<int> ids;
    for (int i = 0; i < 8; ++i) {
        const auto& r = tri.lookup(CellColoring(Shape::Triangle, {reps[i][0], reps[i][1], reps[i][2]}));
        ok = ok && r.kind == ClassKind::OneCP && r.index == idx[i];
        ids.push_back(r.id);
    }
    std::sort(ids.begin(), ids.end());
    ok = ok && std::unique(ids.begin(), ids.end()) == ids.end();
    ok = ok && secs < 10;
    report(1, ok,
           "triangle " + std::to_string(ct.cp_bearing()) + " classes, quad " + std::to_string(cq.cp_bearing()) + " (" +
               std::to_string(cq.one_minus + cq.one_plus) + "/" + std::to_string(cq.two) + "/" +
               std::to_string(cq.value_dependent) + "), representative indices checked, " + fmt("%.2f s", secs));
}

// 2. random-field frequencies; returns the run for criterion 5
StatsRecord criterion_2() {
    RandomStatsConfig cfg;
    cfg.cells = 1000000;
    cfg.quant = 1e-6;
    cfg.classify.eps = 1e-9;
    cfg.classify.tau = 0.05;
    cfg.seed = 1;
    auto t0 = std::chrono::steady_clock::now();
    auto s = random_stats(cfg).stats;
    double secs = seconds_since(t0);
    struct Row {
        const char* name;
        double got, want;
    };
    const Row rows[] = {
        {"topology-dependent", relative(s.topology_dependent, s.total), 0.629},
        {"value-dependent", relative(s.value_dependent, s.total), 0.371},
        {"at least one", relative(s.at_least_one(), s.total), 0.359},
        {"exactly one", relative(s.exactly_one, s.total), 0.332},
        {"exactly two", relative(s.exactly_two, s.total), 0.021},
        {"vd no critical point", relative(s.vd_none, s.value_dependent), 0.927},
        {"vd saddle & non-saddle", relative(s.vd_two, s.value_dependent), 0.056},
        {"vd higher-order", relative(s.vd_higher_order, s.value_dependent), 0.017},
    };
    bool ok = s.total == cfg.cells && s.consistent();
    std::string detail;
    for (const auto& r : rows) {
        bool row_ok = std::abs(r.got - r.want) <= 0.005;
        ok = ok && row_ok;
        char buf[96];
        std::snprintf(buf, sizeof buf, "%s%s %.4f/%.3f%s", detail.empty() ? "" : ", ", r.name, r.got, r.want,
                      row_ok ? "" : " (off)");
        detail += buf;
    }
    report(2, ok, "10^6 cells: " + detail + ", boundary " + std::to_string(s.boundary_point) + ", " + fmt("%.1f s", secs));
    return s;
}

// 3. area-sequence index vs winding number vs Jacobian sign
void criterion_3() {
    const LookupTable& table = default_table(Shape::Quad);
    int checked = 0, agree = 0, errors = 0;
    std::uint64_t i = 0;
    while (checked < 10000) {
        CellData cell = random_cell(303, i++, 1e-6);
        auto r = classify_cell(cell, table);
        if (r.boundary) continue;
        const auto& cps = r.outcome.cps;
        if (r.outcome.kind != CellOutcome::One && r.outcome.kind != CellOutcome::Two) continue;
        Bilinear B(cell);
        auto roots = B.plane_roots();
        for (std::size_t k = 0; k < cps.size() && checked < 10000; ++k) {
            const auto& cp = cps[k];
            if (cp.order != 1) continue;
            ++checked;
            try {
                std::optional<Vec2> sib;
                if (cps.size() == 2) sib = cps[1 - k].local;
                int by_area = turning_behavior(area_sequence(cell, cp, sib));

                double gap = 1e-2;
                for (auto q : roots)
                    if (dist(q, cp.local) > 1e-7) gap = std::min(gap, 0.3 * dist(q, cp.local));
                std::vector<Vec2> circle(64);
                for (int m = 0; m < 64; ++m) {
                    double a = 2 * std::numbers::pi * m / 64;
                    circle[m] = cp.local + Vec2{std::cos(a), std::sin(a)} * gap;
                }
                int by_winding = winding_index_oracle(B, circle, 1024);

                const double h = 1e-6;
                Vec2 ds = (B(cp.local + Vec2{h, 0}) - B(cp.local - Vec2{h, 0})) / (2 * h);
                Vec2 dt = (B(cp.local + Vec2{0, h}) - B(cp.local - Vec2{0, h})) / (2 * h);
                double det = ds.x * dt.y - ds.y * dt.x;
                int by_jacobian = det < 0 ? -1 : 1;

                if (by_area == by_winding && by_area == by_jacobian && by_area == cp.index) ++agree;
            } catch (const std::exception&) {
                ++errors;
            }
        }
    }
    report(3, agree == checked,
           std::to_string(agree) + "/" + std::to_string(checked) +
               " order-1 points agree (area sequence, winding with 1024 samples, finite-difference Jacobian), " +
               std::to_string(errors) + " errors");
}

// 2048^2 sign-change sampling. Along grid edges the interpolant is linear, so sign changes of B1 give exact
// points of B1 = 0; a sign change of B2 between the two such points of one sample cell brackets a crossing.
std::vector<Vec2> sampled_roots(const Bilinear& B) {
    const int N = 2048;
    std::vector<double> p1(N + 1), p2(N + 1), c1(N + 1), c2(N + 1);
    auto fill = [&](int j, std::vector<double>& r1, std::vector<double>& r2) {
        double t = static_cast<double>(j) / N;
        double a1 = B.comp(0, 0, t), b1 = B.comp(0, 1, t) - a1;
        double a2 = B.comp(1, 0, t), b2 = B.comp(1, 1, t) - a2;
        for (int i = 0; i <= N; ++i) {
            double s = static_cast<double>(i) / N;
            r1[i] = a1 + b1 * s;
            r2[i] = a2 + b2 * s;
        }
    };
    std::vector<Vec2> hits;
    fill(0, p1, p2);
    for (int j = 0; j < N; ++j) {
        fill(j + 1, c1, c2);
        for (int i = 0; i < N; ++i) {
            // corners counter-clockwise from (i, j)
            const double v[4] = {p1[i], p1[i + 1], c1[i + 1], c1[i]};
            bool pos = v[0] > 0;
            if ((v[1] > 0) == pos && (v[2] > 0) == pos && (v[3] > 0) == pos) continue;
            const Vec2 q[4] = {{static_cast<double>(i) / N, static_cast<double>(j) / N},
                               {static_cast<double>(i + 1) / N, static_cast<double>(j) / N},
                               {static_cast<double>(i + 1) / N, static_cast<double>(j + 1) / N},
                               {static_cast<double>(i) / N, static_cast<double>(j + 1) / N}};
            std::vector<Vec2> pts;
            for (int e = 0; e < 4; ++e) {
                double a = v[e], b = v[(e + 1) % 4];
                if ((a > 0) != (b > 0)) pts.push_back(lerp(q[e], q[(e + 1) % 4], a / (a - b)));
            }
            if (pts.size() != 2) continue;
            double g0 = B.comp(1, pts[0].x, pts[0].y), g1 = B.comp(1, pts[1].x, pts[1].y);
            if ((g0 > 0) == (g1 > 0)) continue;
            hits.push_back(lerp(pts[0], pts[1], g0 / (g0 - g1)));
        }
        std::swap(p1, c1);
        std::swap(p2, c2);
    }
    // a crossing on a shared sample edge is reported by both cells
    std::vector<Vec2> out;
    std::vector<int> weight;
    for (auto h : hits) {
        bool merged = false;
        for (std::size_t k = 0; k < out.size() && !merged; ++k)
            if (dist(out[k], h) < 2.0 / N) {
                out[k] = (out[k] * weight[k] + h) / (weight[k] + 1);
                ++weight[k];
                merged = true;
            }
        if (!merged) {
            out.push_back(h);
            weight.push_back(1);
        }
    }
    return out;
}

// 4. positions of two-point cells
void criterion_4() {
    const LookupTable& table = default_table(Shape::Quad);
    int cells = 0, matched = 0, residual_ok = 0, roots = 0;
    double worst = 0, worst_res = 0;
    std::uint64_t i = 0;
    auto t0 = std::chrono::steady_clock::now();
    while (cells < 1000) {
        CellData cell = random_cell(404, i++, 1e-6);
        auto r = classify_cell(cell, table);
        if (r.boundary || r.outcome.kind != CellOutcome::Two || !r.outcome.discriminant ||
            !(*r.outcome.discriminant > 0.05))
            continue;
        ++cells;
        Bilinear B(cell);
        auto est = sampled_roots(B);
        std::vector<bool> used(est.size(), false);
        for (const auto& cp : r.outcome.cps) {
            ++roots;
            double res = norm(B(cp.local)) / (1 + B.max_abs());
            worst_res = std::max(worst_res, res);
            if (res < 1e-9) ++residual_ok;
            int best = -1;
            double bd = INFINITY;
            for (std::size_t k = 0; k < est.size(); ++k)
                if (!used[k] && dist(est[k], cp.local) < bd) bd = dist(est[k], cp.local), best = static_cast<int>(k);
            if (best >= 0) used[best] = true;
            worst = std::max(worst, bd);
            if (bd <= 1e-3) ++matched;
        }
    }
    report(4, matched == roots && residual_ok == roots,
           std::to_string(cells) + " cells with normalized discriminant > 0.05: " + std::to_string(matched) + "/" +
               std::to_string(roots) + " roots within 1e-3 of the sampling oracle (worst " + fmt("%.2e", worst) +
               "), " + std::to_string(residual_ok) + " residuals below 1e-9 (worst " + fmt("%.2e", worst_res) + "), " +
               fmt("%.1f s", seconds_since(t0)));
}

// 5. index pairing of every two-point outcome in the criterion 2 run
void criterion_5(const StatsRecord& s) {
    report(5, s.exactly_two > 0 && s.two_index_violations == 0,
           std::to_string(s.exactly_two) + " two-point cells, " + std::to_string(s.two_index_violations) +
               " without indices {-1,+1}");
}

// 6. non-saddle branches stay in the box spanned by their edge zeros
void criterion_6() {
    static const Vec2 corner[4] = {{0, 0}, {0, 1}, {1, 1}, {1, 0}};
    int branches = 0, outside = 0;
    long samples = 0;
    std::uint64_t i = 0;
    while (branches < 1000) {
        CellData cell = random_cell(606, i++, 1e-6);
        Bilinear B(cell);
        for (int k = 0; k < 2 && branches < 1000; ++k) {
            auto g = [&](int v) { return k == 0 ? cell.val[v].x : cell.val[v].y; };
            std::vector<Vec2> zeros;
            for (int e = 0; e < 4; ++e) {
                double a = g(e), b = g((e + 1) % 4);
                if ((a < 0) != (b < 0)) zeros.push_back(lerp(corner[e], corner[(e + 1) % 4], a / (a - b)));
            }
            if (zeros.size() != 2) continue;
            ++branches;
            Box box = bounding_box(zeros[0], zeros[1]);
            // B_k = a + b s + c t + d s t, solved for t at fixed s and for s at fixed t
            double a = g(0), b = g(3) - g(0), c = g(1) - g(0), d = g(0) - g(1) + g(2) - g(3);
            const int M = 4000;
            for (int m = 0; m <= M; ++m) {
                double u = static_cast<double>(m) / M;
                double den = c + d * u;
                if (den != 0) {
                    double t = -(a + b * u) / den;
                    if (t >= 0 && t <= 1) {
                        ++samples;
                        if (!box.contains({u, t}, 1e-9)) ++outside;
                    }
                }
                den = b + d * u;
                if (den != 0) {
                    double s = -(a + c * u) / den;
                    if (s >= 0 && s <= 1) {
                        ++samples;
                        if (!box.contains({s, u}, 1e-9)) ++outside;
                    }
                }
            }
        }
    }
    report(6, outside == 0,
           std::to_string(branches) + " branches, " + std::to_string(samples) + " level-set samples, " +
               std::to_string(outside) + " outside the endpoint box");
}

// 7. invariance under vertex-storage rotation and reflection
void criterion_7() {
    const LookupTable& table = default_table(Shape::Quad);
    // discrete output; the class id is compared separately because a mirrored coloring lies in the mirror orbit
    auto signature = [&](const CellReport& r) {
        std::vector<int> idx;
        for (const auto& cp : r.outcome.cps) idx.push_back(cp.index * 10 + cp.order);
        std::sort(idx.begin(), idx.end());
        std::vector<int> sig{r.boundary ? 1 : 0, r.record ? static_cast<int>(r.record->kind) : -1,
                             static_cast<int>(r.outcome.kind)};
        sig.insert(sig.end(), idx.begin(), idx.end());
        return sig;
    };
    auto same_points = [](const CellReport& a, const CellReport& b, bool mirrored) {
        if (a.outcome.cps.size() != b.outcome.cps.size()) return false;
        for (const auto& p : a.outcome.cps) {
            Vec2 want = mirrored ? Vec2{-p.world.x, p.world.y} : p.world;
            bool hit = false;
            for (const auto& q : b.outcome.cps) hit = hit || dist(q.world, want) <= 1e-12;
            if (!hit) return false;
        }
        return true;
    };
    int cells = 0, same = 0, ids = 0, points = 0;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        CellData c = random_cell(707, i, 1e-6);
        auto ref = classify_cell(c, table);
        auto sig = signature(ref);
        int id = ref.record ? ref.record->id : -1;
        bool ok = true, id_ok = true, pts_ok = true;
        for (int k = 1; k < 4; ++k) {
            auto q = classify_cell(rotate_cell(c, k), table);
            ok = ok && signature(q) == sig;
            id_ok = id_ok && (q.record ? q.record->id : -1) == id;
            pts_ok = pts_ok && same_points(ref, q, false);
        }
        auto m = classify_cell(reflect_cell(c), table);
        ok = ok && signature(m) == sig;
        pts_ok = pts_ok && same_points(ref, m, true);
        ++cells;
        same += ok;
        ids += id_ok;
        points += pts_ok;
    }
    report(7, same == cells && ids == cells && points == cells,
           std::to_string(same) + "/" + std::to_string(cells) +
               " cells with identical kind, outcome and indices under 3 storage rotations and the reflection; " +
               std::to_string(ids) + " with identical class id under rotation; " + std::to_string(points) +
               " with positions within 1e-12");
}

// 8. skeleton sanity
void criterion_8() {
    const LookupTable& quads = default_table(Shape::Quad);
    auto saddle = Field::sample({11, 11}, [](Vec2 p) { return Vec2{p.x - 4.3, -(p.y - 5.6)}; });
    auto sk = build_skeleton(saddle, quads);
    int to_boundary = 0;
    for (const auto& s : sk.separatrices) to_boundary += s.terminus == Separatrix::Terminus::Boundary;
    bool saddle_ok = sk.cps.size() == 1 && sk.separatrices.size() == 4 && to_boundary == 4;

    const double h = 2 * std::numbers::pi / 50;
    auto torus = Field::sample({50, 50, true, true, {0, 0}, {h, h}}, [](Vec2 p) {
        return Vec2{std::cos(p.x) + 0.3 * std::sin(p.y), std::cos(p.y) + 0.2 * std::sin(p.x)};
    });
    auto tk = build_skeleton(torus, quads);
    bool torus_ok = !tk.cps.empty() && tk.index_sum() == 0;

    auto rot = Field::sample({21, 21, false, false, {-10.05, -10.05}, {1, 1}}, [](Vec2 p) { return Vec2{-p.y, p.x}; });
    const double r = 5;
    TraceLimits lim;
    lim.max_arc_length = 2 * std::numbers::pi * r;
    auto s = trace_streamline({r, 0}, Direction::Forward, rot, lim);
    double dev = 0;
    for (auto p : s.points) dev = std::max(dev, std::abs(norm(p) - r) / r);
    bool rot_ok = dev < 1e-4 && s.terminus == Separatrix::Terminus::ArcLength;

    report(8, saddle_ok && torus_ok && rot_ok,
           "saddle: " + std::to_string(to_boundary) + "/" + std::to_string(sk.separatrices.size()) +
               " separatrices reach the boundary; torus: " + std::to_string(tk.cps.size()) + " points, index sum " +
               std::to_string(tk.index_sum()) + "; rotation: radius deviation " + fmt("%.2e", dev) +
               " over one revolution");
}

template <class F>
void guarded(int n, F f) {
    try {
        f();
    } catch (const std::exception& e) {
        report(n, false, std::string("exception: ") + e.what());
    }
}

}  // namespace

int main() {
    guarded(1, criterion_1);
    StatsRecord run;
    guarded(2, [&] { run = criterion_2(); });
    guarded(3, criterion_3);
    guarded(4, criterion_4);
    guarded(5, [&] { criterion_5(run); });
    guarded(6, criterion_6);
    guarded(7, criterion_7);
    guarded(8, criterion_8);
    return failures == 0 ? 0 : 1;
}
