#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vftop/cell_classify.hpp"
#include "vftop/critical_points.hpp"
#include "vftop/field.hpp"
#include "vftop/stats.hpp"

namespace vftop {

struct SuperCell {
    std::vector<int> members;             // sorted cell ids
    std::vector<Vec2> boundary;           // clockwise polygon, world coordinates
    std::vector<Vec2> boundary_values;    // field at each boundary vertex
    std::vector<Vec2> sources;            // offending critical point positions
    Vec2 center;                          // C'
    bool open = false;                    // touches the domain boundary where growth was required
    // fan triangle i = (C', boundary[i], boundary[i+1]) with f(C') = 0
    std::size_t fan_size() const { return boundary.size(); }
    CellData fan_triangle(std::size_t i) const;
    std::optional<Vec2> evaluate(Vec2 p) const;
};

// P: parallel (+ outward, - inward), O: orthogonal (+ counter-clockwise, - clockwise)
enum class SectorSymbol { ParallelOut, ParallelIn, OrthogonalCCW, OrthogonalCW };
const char* sector_symbol_name(SectorSymbol s);

enum class SectorKind { Hyperbolic, Elliptic, Parabolic };
const char* sector_kind_name(SectorKind k);

// direction from C' along which f is radial
struct Ray {
    Vec2 point;     // on the region boundary
    double angle;   // atan2 of point - C'
    bool outgoing;  // <f, r> > 0
};

struct SectorAnalysis {
    std::vector<Ray> rays;             // in boundary (clockwise) order
    std::vector<SectorKind> sectors;   // sector i lies between rays[i] and rays[i+1]
    int winding = 0;                   // index of C' from the boundary values
    int bendixson = 0;                 // 1 + (e - h) / 2
    int hyperbolic() const;
    int elliptic() const;
};

SuperCell make_super_cell(const Field& field, std::vector<int> members, Vec2 center, std::vector<Vec2> sources = {});

struct ClusterConfig {
    double eps = 1e-9;
    int max_cells = 64;
};

// flagged: reports with boundary == true
std::vector<SuperCell> cluster_boundary_cps(const Field& field, const std::vector<CellReport>& flagged,
                                            const ClusterConfig& cfg = {});

// 16 samples per boundary edge
std::vector<SectorSymbol> sector_sequence(const SuperCell& sc, int samples_per_edge = 16, double eps = 1e-12);
SectorAnalysis analyze_sectors(const SuperCell& sc, double eps = 1e-12);

enum class Direction { Forward, Backward };

struct Seed {
    Vec2 point;
    Direction direction;
};

// order-1 saddle: Jacobian eigenvectors, offset to the boundary of its cell (or max_offset if closer)
std::vector<Seed> saddle_seeds(const Field& field, const CriticalPoint& cp,
                               double max_offset = std::numeric_limits<double>::infinity());
// hyperbolic sector boundaries of a region around C'
std::vector<Seed> sector_seeds(const SuperCell& sc);
// dispatch on the critical point kind; region is required for second-order and super-cell points
std::vector<Seed> separatrix_seeds(const Field& field, const CriticalPoint& cp, const SuperCell* region = nullptr);

struct TraceLimits {
    double rtol = 1e-6;
    double atol_factor = 1e-6;      // times cell diameter
    double max_step_factor = 0.5;   // times cell diameter
    int max_steps = 100000;
    double max_arc_length = std::numeric_limits<double>::infinity();
    double underflow_factor = 1e-14;  // times domain diameter
};

struct Separatrix {
    enum class Terminus { CriticalPoint, Boundary, StepLimit, ArcLength };
    std::vector<Vec2> points;
    int origin = -1;        // critical point id
    Direction direction = Direction::Forward;
    Terminus terminus = Terminus::StepLimit;
    int terminus_cp = -1;
};
const char* terminus_name(Separatrix::Terminus t);

// cell id -> critical point ids; used for the straight-segment shortcut
struct CpCells {
    std::vector<std::vector<int>> by_cell;
    std::vector<Vec2> positions;
    bool contains(int cell) const { return cell >= 0 && cell < static_cast<int>(by_cell.size()) && !by_cell[cell].empty(); }
};

struct TraceContext {
    const CpCells* cp_cells = nullptr;
    std::vector<int> origin_cells;  // ignored until the trajectory leaves them
    int origin_cp = -1;
    // stop within this distance of another critical point sharing the origin cell
    double sibling_radius = 0;
};

// RK45 (Dormand-Prince) on the normalized field; throws StepUnderflow
Separatrix trace_streamline(Vec2 seed, Direction dir, const Field& field, const TraceLimits& limits,
                            const TraceContext& ctx = {});

struct SkeletonConfig {
    ClassifyConfig classify;
    ClusterConfig cluster;
    TraceLimits trace;
    bool trace_separatrices = true;
    unsigned threads = 0;  // 0: hardware concurrency
};

struct Skeleton {
    std::vector<CriticalPoint> cps;
    std::vector<Separatrix> separatrices;
    std::vector<SuperCell> super_cells;
    std::vector<int> two_cp_cells, second_order_cells;
    StatsRecord stats;
    int absorbed_cps = 0;  // cell critical points replaced by a super-cell C'
    std::vector<std::string> warnings;

    int index_sum() const;
    int count_index(int index) const;
};

Skeleton build_skeleton(const Field& field, const LookupTable& table, const SkeletonConfig& cfg = {});

nlohmann::json skeleton_to_json(const Skeleton& sk, const Field& field);
// SVG from exported JSON; with a field, component level sets and area colors are drawn
std::string render_svg(const nlohmann::json& skeleton, const Field* field = nullptr);

}  // namespace vftop
