#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace vftop {

enum class Shape : std::uint8_t { Triangle = 3, Quad = 4 };

inline int edge_count(Shape s) { return static_cast<int>(s); }
std::string shape_name(Shape s);

enum class Transition : std::uint8_t { PlusToMinus, MinusToPlus };

// sign before / after crossing
inline int from_sign(Transition t) { return t == Transition::PlusToMinus ? 1 : -1; }
inline int to_sign(Transition t) { return -from_sign(t); }

struct Slot {
    int component;  // 1 or 2
    Transition transition;
    bool operator==(const Slot&) const = default;
};

constexpr int kColorCount = 13;

// ids 1..13
std::span<const Slot> color_slots(int id);
int color_from_slots(std::span<const Slot> slots);
int flip_color(int id);

struct CellColoring {
    Shape shape = Shape::Triangle;
    std::array<std::uint8_t, 4> colors{1, 1, 1, 1};

    CellColoring() = default;
    CellColoring(Shape s, std::initializer_list<int> ids);

    int size() const { return edge_count(shape); }
    int operator[](int i) const { return colors[i]; }
    std::uint32_t key() const;
    static CellColoring from_key(Shape s, std::uint32_t key);
    std::string str() const;

    bool operator==(const CellColoring& o) const;
    bool operator<(const CellColoring& o) const;
};

std::uint32_t key_space(Shape s);

struct GroupElement {
    int rotation = 0;
    bool flip = false;
};

std::vector<GroupElement> group_elements(Shape s);
GroupElement compose(Shape s, GroupElement g, GroupElement h);
CellColoring act(GroupElement g, const CellColoring& t);
std::vector<CellColoring> orbit(const CellColoring& t);
CellColoring canonical(const CellColoring& t);

bool is_valid_coloring(const CellColoring& t);

using SignPair = std::array<int, 2>;

struct VertexSignConfig {
    Shape shape = Shape::Triangle;
    std::array<SignPair, 4> signs{};
    int size() const { return edge_count(shape); }
    bool operator==(const VertexSignConfig&) const = default;
};

VertexSignConfig coloring_to_vertex_signs(const CellColoring& t);

struct ZeroValuePoint {
    int component;
    Transition transition;
    int edge;
    bool operator==(const ZeroValuePoint&) const = default;
};

struct ZeroValueSequence {
    std::vector<ZeroValuePoint> points;
    std::string symbols() const;
    std::size_t size() const { return points.size(); }
};

ZeroValueSequence zero_value_sequence(const CellColoring& t);

enum class ScalarCellClass : std::uint8_t { Inactive, SingleActive, DoubleActive, SaddleCell };
std::string scalar_class_name(ScalarCellClass c);

ScalarCellClass scalar_class_from_signs(std::span<const int> signs);

// Saddle component branches: either around corners p1,p3 ({e0,e1},{e2,e3})
// or around corners p0,p2 ({e3,e0},{e1,e2}).
enum class SaddlePairing : std::uint8_t { CornersP1P3, CornersP0P2 };

struct ReductionContext {
    std::array<ScalarCellClass, 2> cls{ScalarCellClass::Inactive, ScalarCellClass::Inactive};
    std::array<SaddlePairing, 2> pairing{SaddlePairing::CornersP1P3, SaddlePairing::CornersP1P3};
};

ReductionContext reduction_context(const CellColoring& t);

struct Branch {
    int component;
    int p;  // index into the sequence
    int q;
};

std::vector<Branch> sequence_branches(const ZeroValueSequence& seq, const ReductionContext& ctx);
bool branches_interleave(const Branch& x, const Branch& y);
// -1 when the branch does not cut a corner
int branch_corner(const ZeroValueSequence& seq, const Branch& b);
bool branches_box_disjoint(const ZeroValueSequence& seq, const Branch& x, const Branch& y);

ZeroValueSequence reduce_sequence(const ZeroValueSequence& seq, const ReductionContext& ctx);
// removes one reducible branch at a time, picked at random
ZeroValueSequence reduce_sequence(const ZeroValueSequence& seq, const ReductionContext& ctx,
                                  std::mt19937_64& rng);

// index of the crossing formed by two interleaved branches (points listed in traversal order)
int crossing_index(const ZeroValueSequence& seq, std::array<int, 4> pts);

struct DoubleEdgeConfig {
    // point ids (into the zero-value sequence) sorted by s along the top/bottom pair
    std::vector<int> horizontal;
    // point ids sorted by t along the left/right pair
    std::vector<int> vertical;
    std::array<SaddlePairing, 2> pairing{SaddlePairing::CornersP1P3, SaddlePairing::CornersP1P3};
    CellColoring projection;
};

std::vector<DoubleEdgeConfig> enumerate_double_edge_configs(const CellColoring& rep);

}  // namespace vftop
