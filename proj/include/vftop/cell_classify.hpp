#pragma once

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "vftop/coloring.hpp"
#include "vftop/critical_points.hpp"
#include "vftop/errors.hpp"
#include "vftop/field.hpp"
#include "vftop/lookup_table.hpp"

namespace vftop {

struct ClassifyConfig {
    double eps = 1e-9;   // vertex-zero / coincidence tolerance
    double tau = 0.05;   // second-order threshold on the normalized discriminant
};

ScalarCellClass scalar_cell_class(std::span<const double> values, double omega, double eps = 1e-9);

VertexSignConfig vertex_signs(const CellData& cell, double eps = 1e-9);

// zero-value point of one component on a cell edge
struct EdgeZero {
    int component;  // 1 or 2
    Transition transition;
    int edge;
    double param;  // position along the clockwise traversal of the edge, 0..1
    Vec2 local;
};

// per edge, ordered along the traversal; throws ZeroVertexValue / CoincidentEdgeZeros
std::vector<EdgeZero> edge_zero_points(const CellData& cell, double eps = 1e-9);
CellColoring edge_coloring(const CellData& cell, double eps = 1e-9);

const ClassRecord& lookup(const CellColoring& coloring, const LookupTable& table);

enum class OutcomeSource { TopologyDetermined, ValueResolved };

struct CellOutcome {
    enum Kind { None, One, Two, SecondOrder } kind = None;
    // Two: saddle first, then non-saddle
    std::vector<CriticalPoint> cps;
    OutcomeSource source = OutcomeSource::TopologyDetermined;
    std::optional<double> discriminant;
};

const char* outcome_kind_name(CellOutcome::Kind k);

CellOutcome resolve_value_dependent(const CellData& cell, double tau, double eps = 1e-9);

// pairs of zero-point local positions forming the two hyperbola branches
std::array<std::pair<Vec2, Vec2>, 2> asymptotic_decider_pairing(const CellData& cell, int component,
                                                                 double eps = 1e-9);

struct CellReport {
    int cell = -1;
    // coloring undefined (zero vertex component, coincident edge zeros) or a root on the cell boundary
    bool boundary = false;
    ErrorCode boundary_reason = ErrorCode::CoincidentEdgeZeros;
    // world positions of critical points on the cell boundary; empty when the interpolant was solved directly
    std::vector<Vec2> boundary_points;
    std::optional<CellColoring> coloring;
    const ClassRecord* record = nullptr;
    CellOutcome outcome;
};

CellReport classify_cell(const CellData& cell, const LookupTable& table, const ClassifyConfig& cfg = {});

}  // namespace vftop
