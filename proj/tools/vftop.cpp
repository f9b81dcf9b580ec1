#include <iostream>

#include <CLI11.hpp>

#include "vftop/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"vftop: critical points and topological skeletons of cell-wise interpolated 2D vector fields"};
    app.require_subcommand(1);
    vftop::RunConfig cfg;

    std::string shape = "both", out_dir;
    auto* tables = app.add_subcommand("tables", "build, check and write the lookup tables and JSON atlases");
    tables->add_option("--shape", shape, "tri, quad or both")->check(CLI::IsMember({"tri", "quad", "both"}));
    tables->add_option("--out", out_dir, "output directory (default: VFTOP_TABLE_DIR or .)");

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--eps", cfg.eps, "zero tolerance")->capture_default_str()->check(CLI::PositiveNumber);
        sub->add_option("--delta-threshold", cfg.tau, "second-order threshold on the discriminant")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        sub->add_option("--threads", cfg.threads, "worker threads, 0 for all cores");
    };

    std::string field_path;
    auto* analyze = app.add_subcommand("analyze", "classify all cells, trace the skeleton, print statistics");
    analyze->add_option("field", field_path, "VFTXT or CSVGRID file")->required();
    add_common(analyze);
    analyze->add_option("--out", cfg.out, "skeleton JSON path");
    analyze->add_option("--svg", cfg.svg, "SVG rendering path");
    analyze->add_option("--periodic", cfg.periodic, "x, y or xy")->check(CLI::IsMember({"x", "y", "xy"}));
    analyze->add_option("--rtol", cfg.trace.rtol, "integrator relative tolerance")->capture_default_str();
    analyze->add_option("--max-steps", cfg.trace.max_steps, "integrator step limit")->capture_default_str();
    analyze->add_option("--max-cluster", cfg.max_cluster, "super-cell size cap")->capture_default_str();
    bool no_trace = false;
    analyze->add_flag("--no-trace", no_trace, "skip separatrix tracing");

    std::string grid;
    auto* rstats = app.add_subcommand("random-stats", "statistics over random quad cells");
    add_common(rstats);
    rstats->add_option("--cells", cfg.cells, "number of independent cells")->capture_default_str();
    rstats->add_option("--quant", cfg.quant, "value quantization step")->capture_default_str()->check(CLI::PositiveNumber);
    rstats->add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
    rstats->add_option("--grid", grid, "connected WxH cell grid instead of independent cells");
    rstats->add_option("--out", cfg.out, "statistics JSON path");

    std::string skeleton_path;
    auto* render = app.add_subcommand("render", "SVG from a skeleton JSON file");
    render->add_option("skeleton", skeleton_path, "skeleton JSON")->required();
    render->add_option("--out,--svg", cfg.svg, "SVG path (default: stdout)");
    render->add_option("--field", cfg.field, "field file for level sets and area colors");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? vftop::kExitOk : vftop::kExitUsage;
    }
    cfg.trace_separatrices = !no_trace;

    if (*tables) {
        if (out_dir.empty()) {
            const char* env = std::getenv("VFTOP_TABLE_DIR");
            out_dir = env ? env : ".";
        }
        return vftop::cmd_tables(shape, out_dir, std::cout, std::cerr);
    }
    if (*analyze) return vftop::cmd_analyze(field_path, cfg, std::cout, std::cerr);
    if (*rstats) {
        if (!grid.empty()) {
            cfg.grid = vftop::parse_grid_size(grid);
            if (!cfg.grid) {
                std::cerr << "--grid expects WxH\n";
                return vftop::kExitUsage;
            }
        }
        return vftop::cmd_random_stats(cfg, std::cout, std::cerr);
    }
    if (*render) return vftop::cmd_render(skeleton_path, cfg, std::cout, std::cerr);
    return vftop::kExitUsage;
}
