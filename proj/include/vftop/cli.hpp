#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "vftop/random_stats.hpp"
#include "vftop/skeleton.hpp"

namespace vftop {

struct RunConfig {
    double eps = 1e-9;
    double tau = 0.05;
    double quant = 1e-6;
    std::uint64_t seed = 1;
    std::uint64_t cells = 1000000;
    TraceLimits trace;
    int max_cluster = 64;
    unsigned threads = 0;
    std::string periodic;  // "", "x", "y", "xy"
    std::optional<std::pair<int, int>> grid;
    bool trace_separatrices = true;
    std::string out, svg, field;

    // throws ParseError when eps, tau or quant is not positive
    void validate() const;
};

enum ExitStatus { kExitOk = 0, kExitAnalysis = 1, kExitUsage = 2 };

// "tri", "quad" or "both"
int cmd_tables(const std::string& shape, const std::string& out_dir, std::ostream& out, std::ostream& err);
int cmd_analyze(const std::string& field_path, const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_random_stats(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_render(const std::string& skeleton_path, const RunConfig& cfg, std::ostream& out, std::ostream& err);

// "WxH"
std::optional<std::pair<int, int>> parse_grid_size(const std::string& s);

}  // namespace vftop
