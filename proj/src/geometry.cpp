#include "vftop/geometry.hpp"

#include <algorithm>

#include "vftop/errors.hpp"

namespace vftop {

bool canonical_first(Vec2 pa, Vec2 pb) {
    if (pa == pb) throw Error(ErrorCode::IdenticalVertices, "edge with identical endpoints");
    if (pa.y != pb.y) return pa.y < pb.y;
    return pa.x < pb.x;
}

std::pair<Vec2, Vec2> canonical_edge_direction(Vec2 pa, Vec2 pb) {
    return canonical_first(pa, pb) ? std::pair{pa, pb} : std::pair{pb, pa};
}

double oriented_area(Vec2 p1, Vec2 p2, Vec2 p3, double eps) {
    double a = 0.5 * ((p2.x - p1.x) * (p3.y - p1.y) - (p2.y - p1.y) * (p3.x - p1.x));
    double d = std::max({dist(p1, p2), dist(p2, p3), dist(p3, p1)});
    if (!(std::abs(a) >= eps * d * d) || d == 0)
        throw Error(ErrorCode::DegenerateCell, "oriented area below tolerance");
    return a;
}

}  // namespace vftop
