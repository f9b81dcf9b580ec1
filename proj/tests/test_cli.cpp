#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "vftop/cli.hpp"

namespace fs = std::filesystem;
using namespace vftop;

namespace {

struct Run {
    int status = -1;
    std::string out;
};

Run run(const std::string& args) {
    std::string cmd = std::string("\"") + VFTOP_CLI_PATH + "\" " + args + " 2>/dev/null";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    int st = pclose(p);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

fs::path scratch() {
    static fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("vftop_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string write(const std::string& name, const std::string& text) {
    auto p = scratch() / name;
    std::ofstream(p) << text;
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string grid_file(int W, int H, const std::string& header_extra, double (*fx)(double, double),
                      double (*fy)(double, double), double h = 1) {
    std::ostringstream s;
    s.precision(17);
    s << "VFTXT GRID " << W << " " << H << header_extra << "\n";
    for (int j = 0; j < H; ++j)
        for (int i = 0; i < W; ++i) {
            double x = i * h, y = j * h;
            s << x << " " << y << " " << fx(x, y) << " " << fy(x, y) << "\n";
        }
    return s.str();
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
    CHECK(run("").status == 2);
    CHECK(run("frobnicate").status == 2);
    CHECK(run("tables --shape hex").status == 2);
    CHECK(run("random-stats --eps -1").status == 2);
    CHECK(run("random-stats --grid 3by4").status == 2);
    CHECK(run("analyze").status == 2);
    CHECK(run("--help").status == 0);
}

TEST_CASE("tables prints the class counts") {
    auto dir = (scratch() / "tables").string();
    auto r = run("tables --shape both --out " + dir);
    CHECK(r.status == 0);
    CHECK(r.out.find("tri: 8 critical-point classes (4 index -1, 4 index +1") != std::string::npos);
    CHECK(r.out.find("quad: 74 critical-point classes") != std::string::npos);
    CHECK(r.out.find("4 two, 32 value-dependent") != std::string::npos);
    auto atlas = nlohmann::json::parse(slurp(dir + "/vftop_quad_atlas.json"));
    CHECK(atlas["counts"]["cp_bearing"] == 74);
}

TEST_CASE("analyze a constant field") {
    auto path = write("const.vftxt", grid_file(
                                         6, 5, "", [](double, double) { return 0.4; },
                                         [](double, double) { return -1.0; }));
    auto json = (scratch() / "const.json").string();
    auto r = run("analyze " + path + " --out " + json);
    CHECK(r.status == 0);
    CHECK(r.out.find("critical points: 0") != std::string::npos);
    auto j = nlohmann::json::parse(slurp(json));
    CHECK(j["critical_points"].empty());
    CHECK(j["separatrices"].empty());

    auto svg = run("render " + json);
    CHECK(svg.status == 0);
    CHECK(svg.out.find("<svg") != std::string::npos);
    CHECK(svg.out.find("</svg>") != std::string::npos);
}

TEST_CASE("analyze a saddle and export deterministically") {
    auto path = write("saddle.vftxt", grid_file(
                                          11, 11, "", [](double x, double) { return x - 4.3; },
                                          [](double, double y) { return -(y - 5.6); }));
    auto a = (scratch() / "a.json").string(), b = (scratch() / "b.json").string();
    auto svg = (scratch() / "a.svg").string();
    REQUIRE(run("analyze " + path + " --out " + a + " --svg " + svg).status == 0);
    REQUIRE(run("analyze " + path + " --out " + b + " --threads 1").status == 0);
    CHECK(slurp(a) == slurp(b));
    auto j = nlohmann::json::parse(slurp(a));
    CHECK(j["critical_points"].size() == 1);
    CHECK(j["separatrices"].size() == 4);
    CHECK(slurp(svg).find("<svg") != std::string::npos);
    auto rendered = (scratch() / "r.svg").string();
    CHECK(run("render " + a + " --field " + path + " --out " + rendered).status == 0);
    CHECK(slurp(rendered).find("</svg>") != std::string::npos);
}

TEST_CASE("torus field reports index sum 0") {
    auto fx = [](double x, double y) { return std::cos(x) + 0.3 * std::sin(y); };
    auto fy = [](double x, double y) { return std::cos(y) + 0.2 * std::sin(x); };
    auto path = write("torus.vftxt", grid_file(50, 50, " PERIODIC X Y", fx, fy, 2 * std::numbers::pi / 50));
    auto r = run("analyze " + path);
    CHECK(r.status == 0);
    CHECK(r.out.find("index sum: 0") != std::string::npos);
}

TEST_CASE("analysis failures exit with 1") {
    CHECK(run("analyze " + (scratch() / "missing.vftxt").string()).status == 1);
    auto bad = write("bad.vftxt", "VFTXT GRID 2 2\n1 0\n1 0\n1 0\n");
    CHECK(run("analyze " + bad).status == 1);
    auto junk = write("junk.json", "{ not json");
    CHECK(run("render " + junk).status == 1);
}

TEST_CASE("random stats are reproducible") {
    auto a = (scratch() / "rs_a.json").string(), b = (scratch() / "rs_b.json").string();
    REQUIRE(run("random-stats --cells 20000 --seed 7 --out " + a).status == 0);
    REQUIRE(run("random-stats --cells 20000 --seed 7 --threads 1 --out " + b).status == 0);
    CHECK(slurp(a) == slurp(b));
    auto j = nlohmann::json::parse(slurp(a));
    CHECK(j["seed"] == 7);
    auto c = (scratch() / "rs_c.json").string();
    REQUIRE(run("random-stats --cells 20000 --seed 8 --out " + c).status == 0);
    CHECK(slurp(a) != slurp(c));
    CHECK(run("random-stats --grid 30x20 --seed 3").status == 0);
}

TEST_CASE("grid size parsing") {
    CHECK(parse_grid_size("30x20") == std::pair{30, 20});
    CHECK(parse_grid_size("4X5") == std::pair{4, 5});
    CHECK_FALSE(parse_grid_size("30"));
    CHECK_FALSE(parse_grid_size("0x3"));
    CHECK_FALSE(parse_grid_size("3x4x"));
}

TEST_CASE("run config validation") {
    RunConfig c;
    CHECK_NOTHROW(c.validate());
    c.tau = 0;
    CHECK_THROWS_AS(c.validate(), Error);
}
