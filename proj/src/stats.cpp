#include "vftop/stats.hpp"

#include <cstdio>

namespace vftop {

double relative(std::uint64_t part, std::uint64_t whole) {
    return whole ? static_cast<double>(part) / static_cast<double>(whole) : 0.0;
}

void StatsRecord::add(const CellReport& r) {
    ++total;
    if (r.boundary) {
        ++boundary_point;
        return;
    }
    const auto& o = r.outcome;
    switch (o.kind) {
        case CellOutcome::None: ++none; break;
        case CellOutcome::One: ++exactly_one; break;
        case CellOutcome::Two: ++exactly_two; break;
        case CellOutcome::SecondOrder: ++higher_order; break;
    }
    if (o.kind == CellOutcome::Two) {
        bool ok = o.cps.size() == 2 && o.cps[0].index + o.cps[1].index == 0 && o.cps[0].index != 0;
        if (!ok) ++two_index_violations;
    }
    if (r.record && r.record->kind == ClassKind::ValueDependent) {
        ++value_dependent;
        switch (o.kind) {
            case CellOutcome::None: ++vd_none; break;
            case CellOutcome::One: ++vd_one; break;
            case CellOutcome::Two: ++vd_two; break;
            case CellOutcome::SecondOrder: ++vd_higher_order; break;
        }
        return;
    }
    ++topology_dependent;
    switch (o.kind) {
        case CellOutcome::None: ++topo_none; break;
        case CellOutcome::One: (o.cps[0].index < 0 ? topo_saddle : topo_nonsaddle)++; break;
        case CellOutcome::Two: ++topo_two; break;
        case CellOutcome::SecondOrder: ++topo_two; break;
    }
}

void StatsRecord::merge(const StatsRecord& o) {
    total += o.total;
    topology_dependent += o.topology_dependent;
    value_dependent += o.value_dependent;
    boundary_point += o.boundary_point;
    none += o.none;
    exactly_one += o.exactly_one;
    exactly_two += o.exactly_two;
    higher_order += o.higher_order;
    topo_none += o.topo_none;
    topo_saddle += o.topo_saddle;
    topo_nonsaddle += o.topo_nonsaddle;
    topo_two += o.topo_two;
    vd_none += o.vd_none;
    vd_two += o.vd_two;
    vd_higher_order += o.vd_higher_order;
    vd_one += o.vd_one;
    two_index_violations += o.two_index_violations;
}

bool StatsRecord::consistent() const {
    return topology_dependent + value_dependent + boundary_point == total &&
           none + at_least_one() + boundary_point == total &&
           topo_none + topo_saddle + topo_nonsaddle + topo_two == topology_dependent &&
           vd_none + vd_two + vd_higher_order + vd_one == value_dependent;
}

nlohmann::json StatsRecord::to_json() const {
    auto row = [](std::uint64_t v, std::uint64_t parent) {
        return nlohmann::json{{"absolute", v}, {"relative", relative(v, parent)}};
    };
    nlohmann::json j;
    j["total_cells"] = total;
    j["overall"] = {{"topology_dependent", row(topology_dependent, total)},
                    {"value_dependent", row(value_dependent, total)},
                    {"boundary_point", row(boundary_point, total)}};
    j["number_of_critical_points"] = {{"none", row(none, total)},
                                      {"at_least_one", row(at_least_one(), total)},
                                      {"exactly_one", row(exactly_one, total)},
                                      {"exactly_two", row(exactly_two, total)}};
    j["topology_dependent_cases"] = {{"no_critical_point", row(topo_none, topology_dependent)},
                                     {"saddle", row(topo_saddle, topology_dependent)},
                                     {"non_saddle", row(topo_nonsaddle, topology_dependent)},
                                     {"saddle_and_non_saddle", row(topo_two, topology_dependent)}};
    j["value_dependent_cases"] = {{"no_critical_point", row(vd_none, value_dependent)},
                                  {"saddle_and_non_saddle", row(vd_two, value_dependent)},
                                  {"higher_order", row(vd_higher_order, value_dependent)},
                                  {"single_clipped", row(vd_one, value_dependent)}};
    return j;
}

std::string StatsRecord::table(const std::string& label) const {
    std::string out;
    char buf[160];
    auto line = [&](const char* name, std::uint64_t v, std::uint64_t parent) {
        std::snprintf(buf, sizeof buf, "  %-24s %12llu  %.3f\n", name, static_cast<unsigned long long>(v),
                      relative(v, parent));
        out += buf;
    };
    out += label + "\n";
    std::snprintf(buf, sizeof buf, "  %-24s %12llu\n", "cells", static_cast<unsigned long long>(total));
    out += buf;
    out += "overall\n";
    line("topology-dependent", topology_dependent, total);
    line("value-dependent", value_dependent, total);
    line("boundary point", boundary_point, total);
    out += "number of critical points\n";
    line("none", none, total);
    line("at least one", at_least_one(), total);
    line("exactly one", exactly_one, total);
    line("exactly two", exactly_two, total);
    out += "topology-dependent cases\n";
    line("no critical point", topo_none, topology_dependent);
    line("saddle", topo_saddle, topology_dependent);
    line("non-saddle", topo_nonsaddle, topology_dependent);
    line("saddle & non-saddle", topo_two, topology_dependent);
    out += "value-dependent cases\n";
    line("no critical point", vd_none, value_dependent);
    line("saddle & non-saddle", vd_two, value_dependent);
    line("higher-order", vd_higher_order, value_dependent);
    if (vd_one) line("single (clipped)", vd_one, value_dependent);
    return out;
}

}  // namespace vftop
