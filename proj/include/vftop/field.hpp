#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vftop/coloring.hpp"
#include "vftop/geometry.hpp"

namespace vftop {

struct UniformGrid {
    int W = 0, H = 0;
    bool periodic_x = false, periodic_y = false;
    Vec2 origin{0, 0};
    Vec2 spacing{1, 1};
};

struct CurvilinearGrid {
    int W = 0, H = 0;
    std::vector<Vec2> positions;  // row-major, x index fastest
};

struct TriangleMesh {
    std::vector<Vec2> positions;
    std::vector<std::array<int, 3>> triangles;
};

using Topology = std::variant<UniformGrid, CurvilinearGrid, TriangleMesh>;

// Quad corners run clockwise: p0=(0,0) p1=(0,1) p2=(1,1) p3=(1,0) in local (s,t).
// Triangle corners run clockwise: p0=(0,0) p1=(0,1) p2=(1,0).
// Edge k goes from corner k to corner k+1.
struct CellData {
    Shape shape = Shape::Quad;
    int id = -1;
    std::array<Vec2, 4> pos{};
    std::array<Vec2, 4> val{};
    std::array<int, 4> vertex{-1, -1, -1, -1};

    int size() const { return edge_count(shape); }
    double diameter() const;
    Box bounds() const;
};

Vec2 from_local(const CellData& cell, Vec2 st);
Vec2 interpolate(const CellData& cell, Vec2 st);
// Newton inversion (quads) or barycentric solve (triangles); OutsideCell beyond tol
Vec2 to_local(const CellData& cell, Vec2 p, double tol = 1e-9);
std::optional<Vec2> try_local(const CellData& cell, Vec2 p, double tol = 1e-9);

// cyclic vertex-storage shift by k, geometry and orientation unchanged
CellData rotate_cell(const CellData& cell, int k);
// mirror x -> -x and f1 -> -f1, then restore clockwise order
CellData reflect_cell(const CellData& cell);

class Field {
public:
    static Field uniform(UniformGrid g, std::vector<Vec2> samples);
    static Field curvilinear(CurvilinearGrid g, std::vector<Vec2> samples);
    static Field triangles(TriangleMesh m, std::vector<Vec2> samples);
    static Field sample(UniformGrid g, const std::function<Vec2(Vec2)>& f);

    const Topology& topology() const { return topo_; }
    const std::vector<Vec2>& samples() const { return samples_; }
    Shape cell_shape() const;
    int cell_count() const;
    int vertex_count() const { return static_cast<int>(samples_.size()); }
    CellData cell(int id) const;
    // neighbour across edge k, -1 on the domain boundary
    int edge_neighbor(int id, int k) const;
    std::vector<int> cells_around_vertex(int v) const;
    std::optional<int> locate(Vec2 p) const;
    std::optional<Vec2> evaluate(Vec2 p) const;

    Box bounds() const;
    bool periodic_x() const;
    bool periodic_y() const;
    Vec2 wrap(Vec2 p) const;
    double cell_diameter() const { return cell_diameter_; }
    double diameter() const;

    Field with_periodic(bool x, bool y) const;

private:
    Topology topo_;
    std::vector<Vec2> samples_;
    double cell_diameter_ = 1;
    bool flipped_ = false;  // curvilinear index order reversed to keep cells clockwise
    // triangle mesh / curvilinear support
    std::vector<std::array<int, 3>> tri_adj_;
    std::vector<std::vector<int>> vertex_cells_;
    Box bounds_;
    int bin_nx_ = 0, bin_ny_ = 0;
    std::vector<std::vector<int>> bins_;

    void finalize();
    void build_bins();
    std::array<int, 4> grid_cell_vertices(int id, int W, int H, bool px, bool py) const;
};

enum class FieldFormat { VFTXT, CSVGRID };

Field load_field(std::string_view text, FieldFormat format);
Field load_field_file(const std::string& path);
std::string write_vftxt(const Field& field);

}  // namespace vftop
