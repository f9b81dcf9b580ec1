#include "vftop/errors.hpp"

namespace vftop {

std::string_view error_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidColoring: return "InvalidColoring";
        case ErrorCode::RotationOutOfRange: return "RotationOutOfRange";
        case ErrorCode::NotSaddleCell: return "NotSaddleCell";
        case ErrorCode::ClassCountMismatch: return "ClassCountMismatch";
        case ErrorCode::ConfigDisagreement: return "ConfigDisagreement";
        case ErrorCode::TableFormat: return "TableFormat";
        case ErrorCode::VertexOnLevelSet: return "VertexOnLevelSet";
        case ErrorCode::ZeroVertexValue: return "ZeroVertexValue";
        case ErrorCode::CoincidentEdgeZeros: return "CoincidentEdgeZeros";
        case ErrorCode::DegenerateInterpolant: return "DegenerateInterpolant";
        case ErrorCode::SamplingAmbiguous: return "SamplingAmbiguous";
        case ErrorCode::InconsistentTurning: return "InconsistentTurning";
        case ErrorCode::ZeroOnCurve: return "ZeroOnCurve";
        case ErrorCode::SingularJacobian: return "SingularJacobian";
        case ErrorCode::IndexMismatch: return "IndexMismatch";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::NonFiniteSample: return "NonFiniteSample";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::IdenticalVertices: return "IdenticalVertices";
        case ErrorCode::DegenerateCell: return "DegenerateCell";
        case ErrorCode::NonConvexCell: return "NonConvexCell";
        case ErrorCode::OutsideCell: return "OutsideCell";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::ClusterGrowthLimit: return "ClusterGrowthLimit";
        case ErrorCode::ZeroOnBoundary: return "ZeroOnBoundary";
        case ErrorCode::StepUnderflow: return "StepUnderflow";
        case ErrorCode::JacobianFailure: return "JacobianFailure";
        case ErrorCode::Io: return "Io";
    }
    return "Error";
}

}  // namespace vftop
