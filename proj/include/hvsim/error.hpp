#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hvsim {

enum class ErrorKind {
    NonUnitary,
    BadGate,
    DimMismatch,
    InvalidState,
    Infeasible,
    NotConverged,
    ZeroLine,
    UnsupportedFlow,
    NotSpacelike,
    IndifferenceRequired,
    BadDecomposition,
    BadSupport,
    WidthMismatch,
    NotUniqueMarked,
    PromiseUnverifiable,
    Parse,
    InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace hvsim
