#include "vftop/cli.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace vftop {

void RunConfig::validate() const {
    if (!(eps > 0)) throw Error(ErrorCode::ParseError, "--eps must be positive");
    if (!(tau > 0)) throw Error(ErrorCode::ParseError, "--delta-threshold must be positive");
    if (!(quant > 0)) throw Error(ErrorCode::ParseError, "--quant must be positive");
    if (!periodic.empty() && periodic != "x" && periodic != "y" && periodic != "xy")
        throw Error(ErrorCode::ParseError, "--periodic must be x, y or xy");
}

std::optional<std::pair<int, int>> parse_grid_size(const std::string& s) {
    auto x = s.find_first_of("xX");
    if (x == std::string::npos) return std::nullopt;
    try {
        std::size_t a = 0, b = 0;
        int w = std::stoi(s.substr(0, x), &a), h = std::stoi(s.substr(x + 1), &b);
        if (a != x || b != s.size() - x - 1 || w < 1 || h < 1) return std::nullopt;
        return std::pair{w, h};
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

namespace {

void write_file(const std::string& path, const std::string& data, bool binary = false) {
    std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
    if (!f) throw Error(ErrorCode::Io, "cannot write " + path);
    f << data;
    if (!f) throw Error(ErrorCode::Io, "write failed: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::Io, "cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string error_text(const Error& e) {
    std::string s = std::string(error_name(e.code())) + ": " + e.what();
    if (e.cell() >= 0) s += " (cell " + std::to_string(e.cell()) + ")";
    return s;
}

}  // namespace

int cmd_tables(const std::string& shape, const std::string& out_dir, std::ostream& out, std::ostream& err) {
    try {
        std::vector<Shape> shapes;
        if (shape == "tri" || shape == "both") shapes.push_back(Shape::Triangle);
        if (shape == "quad" || shape == "both") shapes.push_back(Shape::Quad);
        if (shapes.empty()) {
            err << "unknown shape: " << shape << "\n";
            return kExitUsage;
        }
        if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
        for (Shape s : shapes) {
            LookupTable t = build_lookup_table(s);
            auto c = t.counts();
            std::ostringstream bin;
            t.serialize(bin);
            std::string base = out_dir.empty() ? std::string(".") : out_dir;
            std::string bin_path = base + "/" + table_file_name(s);
            std::string atlas_path = base + "/vftop_" + shape_name(s) + "_atlas.json";
            write_file(bin_path, bin.str(), true);
            write_file(atlas_path, t.atlas().dump(2) + "\n");
            out << shape_name(s) << ": " << c.cp_bearing() << " critical-point classes (" << c.one_minus
                << " index -1, " << c.one_plus << " index +1, " << c.two << " two, " << c.value_dependent
                << " value-dependent), " << c.none << " without\n";
            out << "  wrote " << bin_path << " and " << atlas_path << "\n";
        }
        return kExitOk;
    } catch (const Error& e) {
        err << error_text(e) << "\n";
        return kExitAnalysis;
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return kExitAnalysis;
    }
}

int cmd_analyze(const std::string& field_path, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        cfg.validate();
        Field field = load_field_file(field_path);
        if (!cfg.periodic.empty())
            field = field.with_periodic(cfg.periodic.find('x') != std::string::npos, cfg.periodic.find('y') != std::string::npos);
        SkeletonConfig sc;
        sc.classify = {cfg.eps, cfg.tau};
        sc.cluster = {cfg.eps, cfg.max_cluster};
        sc.trace = cfg.trace;
        sc.trace_separatrices = cfg.trace_separatrices;
        sc.threads = cfg.threads;
        Skeleton sk = build_skeleton(field, default_table(field.cell_shape()), sc);
        auto j = skeleton_to_json(sk, field);
        out << sk.stats.table(field_path);
        out << "critical points: " << sk.cps.size() << " (saddles " << sk.count_index(-1) << ", non-saddles "
            << sk.count_index(1) << ", index 0 " << sk.count_index(0) << ")\n";
        out << "separatrices: " << sk.separatrices.size() << "\n";
        out << "super-cells: " << sk.super_cells.size() << "\n";
        out << "index sum: " << sk.index_sum() << "\n";
        for (const auto& w : sk.warnings) err << "warning: " << w << "\n";
        if (!cfg.out.empty()) write_file(cfg.out, j.dump(1) + "\n");
        if (!cfg.svg.empty()) write_file(cfg.svg, render_svg(j, &field));
        return kExitOk;
    } catch (const ParseError& e) {
        err << field_path << ": " << e.what() << "\n";
        return kExitAnalysis;
    } catch (const Error& e) {
        err << error_text(e) << "\n";
        return kExitAnalysis;
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return kExitAnalysis;
    }
}

int cmd_random_stats(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        cfg.validate();
        RandomStatsConfig rc;
        rc.cells = cfg.cells;
        rc.quant = cfg.quant;
        rc.seed = cfg.seed;
        rc.classify = {cfg.eps, cfg.tau};
        rc.threads = cfg.threads;
        if (cfg.grid) {
            rc.grid = true;
            rc.grid_w = cfg.grid->first;
            rc.grid_h = cfg.grid->second;
        }
        auto r = random_stats(rc);
        out << r.stats.table("random field (" + r.mode + ", seed " + std::to_string(cfg.seed) + ")");
        if (!cfg.out.empty()) {
            auto j = r.stats.to_json();
            j["mode"] = r.mode;
            j["seed"] = cfg.seed;
            j["quantization"] = cfg.quant;
            j["eps"] = cfg.eps;
            j["delta_threshold"] = cfg.tau;
            write_file(cfg.out, j.dump(2) + "\n");
        }
        return kExitOk;
    } catch (const Error& e) {
        err << error_text(e) << "\n";
        return kExitAnalysis;
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return kExitAnalysis;
    }
}

int cmd_render(const std::string& skeleton_path, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_file(skeleton_path));
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorCode::ParseError, std::string("skeleton JSON: ") + e.what());
        }
        std::optional<Field> field;
        if (!cfg.field.empty()) field = load_field_file(cfg.field);
        std::string svg;
        try {
            svg = render_svg(j, field ? &*field : nullptr);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::ParseError, std::string("skeleton JSON: ") + e.what());
        }
        std::string path = cfg.svg.empty() ? cfg.out : cfg.svg;
        if (path.empty())
            out << svg;
        else
            write_file(path, svg);
        return kExitOk;
    } catch (const Error& e) {
        err << error_text(e) << "\n";
        return kExitAnalysis;
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return kExitAnalysis;
    }
}

}  // namespace vftop
