#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "vftop/cell_classify.hpp"

namespace vftop {

struct StatsRecord {
    std::uint64_t total = 0;
    // overall
    std::uint64_t topology_dependent = 0, value_dependent = 0, boundary_point = 0;
    // number of critical points (boundary cells are counted separately)
    std::uint64_t none = 0, exactly_one = 0, exactly_two = 0, higher_order = 0;
    // topology-dependent branch
    std::uint64_t topo_none = 0, topo_saddle = 0, topo_nonsaddle = 0, topo_two = 0;
    // value-dependent branch; vd_one counts a single root surviving the cell clip
    std::uint64_t vd_none = 0, vd_two = 0, vd_higher_order = 0, vd_one = 0;
    // Two outcomes whose indices are not exactly {-1,+1}
    std::uint64_t two_index_violations = 0;

    std::uint64_t at_least_one() const { return exactly_one + exactly_two + higher_order; }
    void add(const CellReport& r);
    void merge(const StatsRecord& o);
    // parent/child sums
    bool consistent() const;
    nlohmann::json to_json() const;
    std::string table(const std::string& label) const;
};

double relative(std::uint64_t part, std::uint64_t whole);

}  // namespace vftop
