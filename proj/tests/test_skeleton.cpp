#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vftop/errors.hpp"
#include "vftop/skeleton.hpp"

using namespace vftop;

namespace {

const LookupTable& quads() { return default_table(Shape::Quad); }

// 11 x 11 vertices on [0,10]^2, cell (i,j) has id 10 j + i
Field grid(const std::function<Vec2(Vec2)>& f) { return Field::sample({11, 11}, f); }

const std::vector<int> kAroundFiveFive{44, 45, 54, 55};

std::vector<CellReport> flagged(const Field& f) {
    std::vector<CellReport> out;
    for (int id = 0; id < f.cell_count(); ++id) {
        auto r = classify_cell(f.cell(id), quads());
        if (r.boundary) out.push_back(r);
    }
    return out;
}

bool on_domain_boundary(const Field& f, Vec2 p) {
    auto b = f.bounds();
    const double tol = 1e-6;
    return std::abs(p.x - b.lo.x) < tol || std::abs(p.x - b.hi.x) < tol || std::abs(p.y - b.lo.y) < tol ||
           std::abs(p.y - b.hi.y) < tol;
}

}  // namespace

TEST_CASE("no flagged cells, no super-cells") {
    auto f = grid([](Vec2 p) { return Vec2{p.x - 4.3, p.y - 5.6}; });
    CHECK(flagged(f).empty());
    CHECK(cluster_boundary_cps(f, {}).empty());
}

TEST_CASE("critical point on an interior edge gives a two-cell super-cell") {
    auto f = grid([](Vec2 p) { return Vec2{p.x - 5 + 0.3 * (p.y - 5.5), p.y - 5.5}; });
    auto fl = flagged(f);
    REQUIRE_FALSE(fl.empty());
    auto scs = cluster_boundary_cps(f, fl);
    REQUIRE(scs.size() == 1);
    const auto& sc = scs[0];
    CHECK(sc.members == std::vector<int>{54, 55});
    CHECK(sc.fan_size() == 6);
    CHECK(sc.center.x == doctest::Approx(5));
    CHECK(sc.center.y == doctest::Approx(5.5));
    CHECK_FALSE(sc.open);
    // fan reproduces the boundary values and vanishes at C'
    for (std::size_t i = 0; i < sc.fan_size(); ++i) {
        auto t = sc.fan_triangle(i);
        CHECK(t.val[0] == Vec2{0, 0});
        CHECK(t.val[1] == sc.boundary_values[i]);
        CHECK(t.pos[1] == sc.boundary[i]);
    }
    CHECK(analyze_sectors(sc).winding == 1);
}

TEST_CASE("critical point at a grid vertex gives a four-cell super-cell") {
    auto f = grid([](Vec2 p) { return Vec2{p.x - 5 + 0.3 * (p.y - 5), p.y - 5 - 0.2 * (p.x - 5)}; });
    auto scs = cluster_boundary_cps(f, flagged(f));
    REQUIRE(scs.size() == 1);
    CHECK(scs[0].members == kAroundFiveFive);
    CHECK(scs[0].fan_size() == 8);
    CHECK(analyze_sectors(scs[0]).winding == 1);
}

TEST_CASE("growth cap") {
    auto f = grid([](Vec2 p) { return Vec2{p.x - 5 + 0.3 * (p.y - 5), p.y - 5 - 0.2 * (p.x - 5)}; });
    ClusterConfig cfg;
    cfg.max_cells = 3;
    CHECK_THROWS_AS(cluster_boundary_cps(f, flagged(f), cfg), Error);
}

TEST_CASE("sector symbols") {
    auto radial = grid([](Vec2 p) { return p - Vec2{5, 5}; });
    auto sc = make_super_cell(radial, kAroundFiveFive, {5, 5});
    for (auto s : sector_sequence(sc)) CHECK(s == SectorSymbol::ParallelOut);

    auto rot = grid([](Vec2 p) { return Vec2{-(p.y - 5), p.x - 5}; });
    auto sr = make_super_cell(rot, kAroundFiveFive, {5, 5});
    for (auto s : sector_sequence(sr)) CHECK(s == SectorSymbol::OrthogonalCCW);
    auto an = analyze_sectors(sr);
    CHECK(an.winding == 1);
    CHECK(an.hyperbolic() == 0);

    auto sad = grid([](Vec2 p) { return Vec2{p.x - 5, -(p.y - 5)}; });
    auto ss = make_super_cell(sad, kAroundFiveFive, {5, 5});
    auto seq = sector_sequence(ss);
    CHECK(std::count(seq.begin(), seq.end(), SectorSymbol::ParallelOut) > 0);
    CHECK(std::count(seq.begin(), seq.end(), SectorSymbol::ParallelIn) > 0);
    // P+ and P- alternate twice around the boundary
    std::vector<SectorSymbol> par;
    for (auto s : seq)
        if (s == SectorSymbol::ParallelOut || s == SectorSymbol::ParallelIn) par.push_back(s);
    int switches = 0;
    for (std::size_t i = 0; i < par.size(); ++i) switches += par[i] != par[(i + 1) % par.size()];
    CHECK(switches == 4);
    auto sa = analyze_sectors(ss);
    CHECK(sa.winding == -1);
    CHECK(sa.hyperbolic() == 4);
    CHECK(sa.bendixson == -1);
    CHECK(sector_seeds(ss).size() == 4);
}

TEST_CASE("zero on the boundary is rejected") {
    auto f = grid([](Vec2 p) { return Vec2{p.x - 6, p.y - 5}; });
    auto sc = make_super_cell(f, kAroundFiveFive, {5, 5});
    CHECK_THROWS_AS(sector_sequence(sc), Error);
}

TEST_CASE("dipole has two elliptic sectors") {
    auto f = grid([](Vec2 p) {
        double x = p.x - 5, y = p.y - 5;
        return Vec2{x * x - y * y, 2 * x * y};
    });
    auto sc = make_super_cell(f, kAroundFiveFive, {5, 5});
    auto an = analyze_sectors(sc);
    CHECK(an.winding == 2);
    CHECK(an.elliptic() == 2);
    CHECK(an.hyperbolic() == 0);
    CHECK(an.bendixson == an.winding);
    CHECK(sector_seeds(sc).empty());
}

TEST_CASE("saddle seeds follow the eigenvectors") {
    auto f = grid([](Vec2 p) { return Vec2{p.x - 4.3, -(p.y - 5.6)}; });
    CriticalPoint cp;
    cp.world = {4.3, 5.6};
    cp.cell = 54;
    cp.local = to_local(f.cell(54), cp.world);
    cp.index = -1;
    auto seeds = saddle_seeds(f, cp);
    REQUIRE(seeds.size() == 4);
    int fwd_x = 0, bwd_y = 0;
    for (const auto& s : seeds) {
        Vec2 d = s.point - cp.world;
        if (s.direction == Direction::Forward) {
            CHECK(std::abs(d.y) < 1e-9);
            ++fwd_x;
        } else {
            CHECK(std::abs(d.x) < 1e-9);
            ++bwd_y;
        }
        // offset reaches the cell boundary
        auto b = f.cell(54).bounds();
        bool on_edge = std::abs(s.point.x - b.lo.x) < 1e-9 || std::abs(s.point.x - b.hi.x) < 1e-9 ||
                       std::abs(s.point.y - b.lo.y) < 1e-9 || std::abs(s.point.y - b.hi.y) < 1e-9;
        CHECK(on_edge);
    }
    CHECK(fwd_x == 2);
    CHECK(bwd_y == 2);
    auto close = saddle_seeds(f, cp, 0.05);
    for (const auto& s : close) CHECK(dist(s.point, cp.world) == doctest::Approx(0.05));
}

TEST_CASE("focus has no seeds") {
    auto f = grid([](Vec2 p) { return Vec2{-(p.x - 4.3) - (p.y - 5.6), (p.x - 4.3) - (p.y - 5.6)}; });
    auto sk = build_skeleton(f, quads());
    REQUIRE(sk.cps.size() == 1);
    CHECK(sk.cps[0].index == 1);
    REQUIRE(sk.cps[0].subtype);
    CHECK(*sk.cps[0].subtype == Subtype::AttractingFocus);
    CHECK(separatrix_seeds(f, sk.cps[0]).empty());
    CHECK(sk.separatrices.empty());
}

TEST_CASE("saddle-node super-cell seeds the distinct hyperbolic rays") {
    auto f = grid([](Vec2 p) { return Vec2{(p.x - 5) * (p.x - 5), -(p.y - 5)}; });
    auto sc = make_super_cell(f, kAroundFiveFive, {5, 5});
    auto an = analyze_sectors(sc);
    CHECK(an.winding == 0);
    CHECK(an.hyperbolic() == 2);
    CHECK(sector_seeds(sc).size() == 3);
}

TEST_CASE("merged second-order point matches the separatrices of the unmerged pair") {
    // hyperbola (x-5.5)(y-5.5) = .01 and line x + y = 11.25 cross twice inside cell 55
    auto f = grid([](Vec2 p) { return Vec2{(p.x - 5.5) * (p.y - 5.5) - 0.01, p.x + p.y - 11.25}; });
    auto merged = build_skeleton(f, quads());
    REQUIRE(merged.cps.size() == 1);
    CHECK(merged.cps[0].order == 2);
    CHECK(merged.cps[0].index == 0);
    CHECK(merged.second_order_cells == std::vector<int>{55});

    SkeletonConfig cfg;
    cfg.classify.tau = 1e-6;
    auto pair = build_skeleton(f, quads(), cfg);
    REQUIRE(pair.cps.size() == 2);
    CHECK(pair.two_cp_cells == std::vector<int>{55});
    int external = 0;
    for (const auto& s : pair.separatrices) external += s.terminus != Separatrix::Terminus::CriticalPoint;
    CHECK(merged.separatrices.size() == static_cast<std::size_t>(external));
    for (const auto& s : merged.separatrices) CHECK(s.terminus == Separatrix::Terminus::Boundary);
}

TEST_CASE("trace a constant field") {
    auto f = grid([](Vec2) { return Vec2{1, 0}; });
    auto s = trace_streamline({5, 5}, Direction::Forward, f, {});
    CHECK(s.terminus == Separatrix::Terminus::Boundary);
    CHECK(s.points.back().x == doctest::Approx(10).epsilon(1e-9));
    for (auto p : s.points) CHECK(p.y == doctest::Approx(5));
    auto b = trace_streamline({5, 5}, Direction::Backward, f, {});
    CHECK(b.points.back().x == doctest::Approx(0).epsilon(1e-9));
}

TEST_CASE("trace along the unstable axis") {
    auto f = grid([](Vec2 p) { return Vec2{p.x - 4.3, -(p.y - 5.6)}; });
    auto s = trace_streamline({4.8, 5.6}, Direction::Forward, f, {});
    CHECK(s.terminus == Separatrix::Terminus::Boundary);
    CHECK(s.points.back().x == doctest::Approx(10));
    for (auto p : s.points) CHECK(p.y == doctest::Approx(5.6));
}

TEST_CASE("seed inside a critical-point cell snaps straight to it") {
    auto f = grid([](Vec2) { return Vec2{1, 0}; });
    CpCells cells;
    cells.by_cell.assign(f.cell_count(), {});
    cells.by_cell[55] = {0};
    cells.positions = {{5.5, 5.5}};
    TraceContext ctx;
    ctx.cp_cells = &cells;
    auto s = trace_streamline({5.0, 5.2}, Direction::Forward, f, {}, ctx);
    REQUIRE(s.points.size() == 2);
    CHECK(s.terminus == Separatrix::Terminus::CriticalPoint);
    CHECK(s.terminus_cp == 0);
    CHECK(s.points.back() == Vec2{5.5, 5.5});

    // entering from the neighbour: boundary entry point, then the critical point
    auto t = trace_streamline({3.5, 5.2}, Direction::Forward, f, {}, ctx);
    CHECK(t.terminus == Separatrix::Terminus::CriticalPoint);
    REQUIRE(t.points.size() >= 3);
    CHECK(t.points[t.points.size() - 2].x == doctest::Approx(5).epsilon(1e-9));
    CHECK(t.points.back() == Vec2{5.5, 5.5});
}

TEST_CASE("step and arc limits") {
    auto f = grid([](Vec2 p) { return Vec2{-(p.y - 5), p.x - 5}; });
    TraceLimits lim;
    lim.max_steps = 5;
    CHECK(trace_streamline({7, 5}, Direction::Forward, f, lim).terminus == Separatrix::Terminus::StepLimit);
    TraceLimits arc;
    arc.max_arc_length = 1;
    CHECK(trace_streamline({7, 5}, Direction::Forward, f, arc).terminus == Separatrix::Terminus::ArcLength);
}

TEST_CASE("rotation conserves the radius") {
    auto f = Field::sample({21, 21, false, false, {-10.05, -10.05}, {1, 1}}, [](Vec2 p) { return Vec2{-p.y, p.x}; });
    const double r = 5;
    TraceLimits lim;
    lim.max_arc_length = 2 * std::numbers::pi * r;
    auto s = trace_streamline({r, 0}, Direction::Forward, f, lim);
    double dev = 0;
    for (auto p : s.points) dev = std::max(dev, std::abs(norm(p) - r) / r);
    CHECK(dev < 1e-4);
}

TEST_CASE("constant field skeleton") {
    auto f = grid([](Vec2) { return Vec2{0.3, -0.7}; });
    auto sk = build_skeleton(f, quads());
    CHECK(sk.cps.empty());
    CHECK(sk.separatrices.empty());
    CHECK(sk.super_cells.empty());
    CHECK(sk.stats.total == 100);
    CHECK(sk.stats.none == 100);
    CHECK(sk.stats.consistent());
}

TEST_CASE("single saddle skeleton") {
    auto f = grid([](Vec2 p) { return Vec2{p.x - 4.3, -(p.y - 5.6)}; });
    auto sk = build_skeleton(f, quads());
    REQUIRE(sk.cps.size() == 1);
    CHECK(sk.cps[0].index == -1);
    REQUIRE(sk.separatrices.size() == 4);
    int fwd = 0;
    for (const auto& s : sk.separatrices) {
        CHECK(s.terminus == Separatrix::Terminus::Boundary);
        CHECK(on_domain_boundary(f, s.points.back()));
        CHECK(s.origin == 0);
        fwd += s.direction == Direction::Forward;
        // forward separatrices leave along x, backward ones along y
        Vec2 end = s.points.back() - sk.cps[0].world;
        if (s.direction == Direction::Forward)
            CHECK(std::abs(end.x) > std::abs(end.y));
        else
            CHECK(std::abs(end.y) > std::abs(end.x));
    }
    CHECK(fwd == 2);
    CHECK(sk.index_sum() == -1);
}

TEST_CASE("torus index sum vanishes") {
    const double h = 2 * std::numbers::pi / 50;
    auto f = Field::sample({50, 50, true, true, {0, 0}, {h, h}}, [](Vec2 p) {
        return Vec2{std::cos(p.x) + 0.3 * std::sin(p.y), std::cos(p.y) + 0.2 * std::sin(p.x)};
    });
    auto sk = build_skeleton(f, quads());
    CHECK_FALSE(sk.cps.empty());
    CHECK(sk.index_sum() == 0);
    for (const auto& s : sk.separatrices)
        if (s.terminus == Separatrix::Terminus::CriticalPoint) {
            REQUIRE(s.terminus_cp >= 0);
            Vec2 d = f.wrap(s.points.back()) - f.wrap(sk.cps[s.terminus_cp].world);
            CHECK(norm(d) < 1e-9);
        }
}

TEST_CASE("super-cell skeleton with a corner saddle") {
    auto f = grid([](Vec2 p) { return Vec2{p.x - 5, -(p.y - 5)}; });
    auto sk = build_skeleton(f, quads());
    REQUIRE(sk.cps.size() == 1);
    CHECK(sk.cps[0].index == -1);
    CHECK(sk.cps[0].super_cell == 0);
    REQUIRE(sk.super_cells.size() == 1);
    CHECK(sk.super_cells[0].members == kAroundFiveFive);
    CHECK(sk.separatrices.size() == 4);
    for (const auto& s : sk.separatrices) CHECK(s.terminus == Separatrix::Terminus::Boundary);
    CHECK(sk.stats.consistent());
}

TEST_CASE("super-cells leave other cells untouched") {
    // one critical point on the edge x = 5 (super-cell), one regular saddle near (3.7, 7.67)
    auto f = grid([](Vec2 p) { return Vec2{p.x - 5 + 0.6 * (p.y - 5.5), (p.y - 5.5) * (p.x - 3.7)}; });
    auto sk = build_skeleton(f, quads());
    REQUIRE(sk.super_cells.size() == 1);
    std::vector<int> members = sk.super_cells[0].members;
    int regular = 0;
    for (int id = 0; id < f.cell_count(); ++id) {
        if (std::find(members.begin(), members.end(), id) != members.end()) continue;
        auto direct = classify_cell(f.cell(id), quads());
        std::vector<Vec2> expect;
        for (const auto& cp : direct.outcome.cps) expect.push_back(cp.world);
        std::vector<Vec2> got;
        for (const auto& cp : sk.cps)
            if (cp.super_cell < 0 && cp.cell == id) got.push_back(cp.world);
        CHECK(got == expect);
        regular += static_cast<int>(got.size());
    }
    CHECK(regular == 1);
    CHECK(sk.cps.size() == 2);
}

TEST_CASE("critical point totals match the statistics") {
    auto f = Field::sample({16, 13, false, false, {0, 0}, {0.5, 0.5}}, [](Vec2 p) {
        return Vec2{std::sin(1.3 * p.x + 0.1) * std::cos(0.9 * p.y) + 0.05, std::cos(1.1 * p.x - 0.2 * p.y) - 0.1};
    });
    auto sk = build_skeleton(f, quads());
    CHECK(sk.stats.consistent());
    CHECK(sk.super_cells.empty());
    CHECK(sk.stats.exactly_one + 2 * sk.stats.exactly_two + sk.stats.higher_order == sk.cps.size());
    std::size_t expected_seps = 4 * static_cast<std::size_t>(sk.count_index(-1));
    std::size_t from_saddles = 0;
    for (const auto& s : sk.separatrices)
        if (sk.cps[s.origin].index == -1 && sk.cps[s.origin].order == 1) ++from_saddles;
    CHECK(from_saddles == expected_seps);
    for (const auto& s : sk.separatrices) {
        REQUIRE_FALSE(s.points.empty());
        if (s.terminus == Separatrix::Terminus::Boundary) CHECK(on_domain_boundary(f, s.points.back()));
        if (s.terminus == Separatrix::Terminus::CriticalPoint)
            CHECK(s.points.back() == sk.cps[s.terminus_cp].world);
    }
}

TEST_CASE("json export and svg") {
    auto f = grid([](Vec2 p) { return Vec2{p.x - 4.3, -(p.y - 5.6)}; });
    auto sk = build_skeleton(f, quads());
    auto j = skeleton_to_json(sk, f);
    CHECK(j["critical_points"].size() == 1);
    CHECK(j["critical_points"][0]["index"] == -1);
    CHECK(j["separatrices"].size() == 4);
    CHECK(j["index_sum"] == -1);
    CHECK(j["statistics"]["total_cells"] == 100);
    auto svg = render_svg(j, &f);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(skeleton_to_json(build_skeleton(f, quads()), f).dump() == j.dump());
}
