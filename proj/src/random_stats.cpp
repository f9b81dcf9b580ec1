#include "vftop/random_stats.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>
#include <vector>

namespace vftop {

std::uint64_t hash64(std::uint64_t seed, std::uint64_t counter) {
    // splitmix64 finalizer over a seed-keyed counter
    std::uint64_t z = seed * 0x9E3779B97F4A7C15ull + counter * 0xD1B54A32D192ED03ull + 0x632BE59BD9B4E019ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z ^= z >> 31;
    z = (z + 0x9E3779B97F4A7C15ull) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double quantized_value(std::uint64_t seed, std::uint64_t counter, double quant) {
    const std::uint64_t M = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(1.0 / quant)));
    // 2M outcomes; multiply-shift keeps the bias negligible
    std::uint64_t r = hash64(seed, counter);
    unsigned __int128 prod = static_cast<unsigned __int128>(r) * (2 * M);
    std::uint64_t u = static_cast<std::uint64_t>(prod >> 64);
    std::int64_t k = u < M ? -static_cast<std::int64_t>(u + 1) : static_cast<std::int64_t>(u - M + 1);
    return static_cast<double>(k) * quant;
}

CellData random_cell(std::uint64_t seed, std::uint64_t index, double quant) {
    static const Vec2 corners[4] = {{0, 0}, {0, 1}, {1, 1}, {1, 0}};
    CellData c;
    c.shape = Shape::Quad;
    c.id = static_cast<int>(index & 0x7fffffff);
    for (int k = 0; k < 4; ++k) {
        c.pos[k] = corners[k];
        c.val[k] = {quantized_value(seed, 8 * index + 2 * k, quant), quantized_value(seed, 8 * index + 2 * k + 1, quant)};
        c.vertex[k] = k;
    }
    return c;
}

Field random_grid_field(std::uint64_t seed, int W, int H, double quant) {
    UniformGrid g;
    g.W = W + 1;
    g.H = H + 1;
    std::vector<Vec2> s(static_cast<std::size_t>(g.W) * g.H);
    for (std::size_t v = 0; v < s.size(); ++v) s[v] = {quantized_value(seed, 2 * v, quant), quantized_value(seed, 2 * v + 1, quant)};
    return Field::uniform(g, std::move(s));
}

namespace {

// runs work(t) for t in [0, nt), rethrows the first captured exception
template <class F>
void run_parallel(unsigned nt, F work) {
    std::vector<std::exception_ptr> errs(nt);
    auto guarded = [&](unsigned t) {
        try {
            work(t);
        } catch (...) {
            errs[t] = std::current_exception();
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < nt; ++t) pool.emplace_back(guarded, t);
    guarded(0);
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

}  // namespace

RandomStatsResult random_stats(const RandomStatsConfig& cfg) {
    if (!(cfg.quant > 0) || !(cfg.classify.eps > 0) || !(cfg.classify.tau > 0))
        throw Error(ErrorCode::ParseError, "eps, delta threshold and quantization must be positive");
    const LookupTable& table = default_table(Shape::Quad);
    RandomStatsResult res;
    unsigned nt = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    if (cfg.grid) {
        res.mode = "grid " + std::to_string(cfg.grid_w) + "x" + std::to_string(cfg.grid_h);
        Field f = random_grid_field(cfg.seed, cfg.grid_w, cfg.grid_h, cfg.quant);
        const std::uint64_t n = static_cast<std::uint64_t>(f.cell_count());
        std::vector<StatsRecord> parts(nt);
        auto work = [&](unsigned t) {
            for (std::uint64_t i = t; i < n; i += nt) parts[t].add(classify_cell(f.cell(static_cast<int>(i)), table, cfg.classify));
        };
        run_parallel(nt, work);
        for (auto& p : parts) res.stats.merge(p);
        return res;
    }
    res.mode = "independent";
    std::vector<StatsRecord> parts(nt);
    auto work = [&](unsigned t) {
        std::uint64_t lo = cfg.cells * t / nt, hi = cfg.cells * (t + 1) / nt;
        for (std::uint64_t i = lo; i < hi; ++i) parts[t].add(classify_cell(random_cell(cfg.seed, i, cfg.quant), table, cfg.classify));
    };
    run_parallel(nt, work);
    for (auto& p : parts) res.stats.merge(p);
    return res;
}

}  // namespace vftop
