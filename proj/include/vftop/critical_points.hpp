#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vftop/field.hpp"
#include "vftop/geometry.hpp"

namespace vftop {

// B_i(s,t) = a_i s + b_i t + c_i s t + d_i
struct BilinearCoeffs {
    std::array<double, 2> a{}, b{}, c{}, d{};

    double eval(int i, double s, double t) const { return a[i] * s + b[i] * t + c[i] * s * t + d[i]; }
    Vec2 eval(Vec2 st) const { return {eval(0, st.x, st.y), eval(1, st.x, st.y)}; }
    // row i = gradient of B_i in (s,t)
    Mat2 jacobian(Vec2 st) const {
        return {a[0] + c[0] * st.y, b[0] + c[0] * st.x, a[1] + c[1] * st.y, b[1] + c[1] * st.x};
    }
};

BilinearCoeffs standard_form(const CellData& cell);

struct IntersectionEquation {
    int degree = 2;  // 1: direct linear system, 2: quadratic in t
    // quadratic A t^2 + B t + C (degree 2)
    double A = 0, B = 0, C = 0;
    // raw discriminant B^2 - 4AC
    double delta = 0;
    // discriminant with the eliminated equation scaled to unit st coefficient
    double delta_normalized = 0;
    int eliminated_component = 1;  // component solved linearly for s
    // degree 1
    std::optional<Vec2> linear_solution;
};

IntersectionEquation intersection_equation(const BilinearCoeffs& k);
// all real roots of the equation, back-substituted and polished; not filtered to the cell
std::vector<Vec2> intersection_roots(const BilinearCoeffs& k, const IntersectionEquation& eq);
// stable real roots of A x^2 + B x + C, ascending
std::vector<double> solve_quadratic(double A, double B, double C);

enum class Subtype { Saddle, AttractingNode, RepellingNode, AttractingFocus, RepellingFocus, Center };
std::string subtype_name(Subtype s);

struct CriticalPoint {
    Vec2 local;
    Vec2 world;
    int index = 0;
    int order = 1;
    std::optional<double> delta;
    std::optional<Subtype> subtype;
    int cell = -1;
    int super_cell = -1;
    bool synthetic = false;
};

// quadrant labels 1=(+,+) 2=(+,-) 3=(-,+) 4=(-,-)
using AreaSequence = std::array<int, 4>;
int area_label(int s1, int s2);
std::string area_sequence_str(const AreaSequence& a);

// counter-clockwise samples around cp in the cell's local frame, rotated to start at (+,+)
AreaSequence area_sequence(const CellData& cell, const CriticalPoint& cp,
                           std::optional<Vec2> sibling_local = std::nullopt);
int turning_behavior(const AreaSequence& seq);

int winding_index_oracle(const std::function<Vec2(Vec2)>& f, std::span<const Vec2> closed_polyline,
                         int n_samples);

Subtype classify_nonsaddle_subtype(const Mat2& jacobian);
CriticalPoint merge_to_second_order(const CriticalPoint& p, const CriticalPoint& q);
Box bounding_box(Vec2 p, Vec2 q);

std::optional<CriticalPoint> barycentric_cp(const CellData& cell);
std::vector<CriticalPoint> solve_cp(const CellData& cell);

// world-space Jacobian of the cell interpolant at local point st
Mat2 world_jacobian(const CellData& cell, Vec2 st);

}  // namespace vftop
