#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vftop {

enum class ErrorCode {
    InvalidColoring,
    RotationOutOfRange,
    NotSaddleCell,
    ClassCountMismatch,
    ConfigDisagreement,
    TableFormat,
    VertexOnLevelSet,
    ZeroVertexValue,
    CoincidentEdgeZeros,
    DegenerateInterpolant,
    SamplingAmbiguous,
    InconsistentTurning,
    ZeroOnCurve,
    SingularJacobian,
    IndexMismatch,
    ParseError,
    NonFiniteSample,
    DimensionMismatch,
    IdenticalVertices,
    DegenerateCell,
    NonConvexCell,
    OutsideCell,
    NoConvergence,
    ClusterGrowthLimit,
    ZeroOnBoundary,
    StepUnderflow,
    JacobianFailure,
    Io,
};

std::string_view error_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what, int cell = -1)
        : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code), cell_(cell) {}

    ErrorCode code() const { return code_; }
    int cell() const { return cell_; }

private:
    ErrorCode code_;
    int cell_;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, int line, int column)
        : Error(ErrorCode::ParseError,
                "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
          line_(line), column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

}  // namespace vftop
