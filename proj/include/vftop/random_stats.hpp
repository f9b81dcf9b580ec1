#pragma once

#include <cstdint>
#include <string>

#include "vftop/cell_classify.hpp"
#include "vftop/field.hpp"
#include "vftop/stats.hpp"

namespace vftop {

// counter-based: the value depends only on (seed, counter)
std::uint64_t hash64(std::uint64_t seed, std::uint64_t counter);
// k * quant with k uniform in [-M,-1] u [1,M], M = round(1 / quant)
double quantized_value(std::uint64_t seed, std::uint64_t counter, double quant);

// cell i of an independent run: unit square, 8 consecutive counters
CellData random_cell(std::uint64_t seed, std::uint64_t index, double quant);
// connected W x H cell grid with shared vertex values
Field random_grid_field(std::uint64_t seed, int W, int H, double quant);

struct RandomStatsConfig {
    std::uint64_t cells = 1000000;
    double quant = 1e-6;
    std::uint64_t seed = 1;
    ClassifyConfig classify;
    unsigned threads = 0;  // 0: hardware concurrency
    // --grid mode: connected field of grid_w x grid_h cells instead of independent cells
    bool grid = false;
    int grid_w = 0, grid_h = 0;
};

struct RandomStatsResult {
    StatsRecord stats;
    std::string mode;  // "independent" or "grid WxH"
};

RandomStatsResult random_stats(const RandomStatsConfig& cfg);

}  // namespace vftop
