#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mstor {

// Every library error derives from Error so callers can catch one type.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct ParameterError : Error { using Error::Error; };
struct SingularMatrixError : Error { using Error::Error; };
struct CapacityError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct GenerationError : Error { using Error::Error; };
struct OracleError : Error { using Error::Error; };

// Power iteration hit its iteration cap; carries the last two Rayleigh estimates.
struct IterationLimitError : Error {
    IterationLimitError(const std::string& msg, double prev, double last)
        : Error(msg), estimate_prev(prev), estimate_last(last) {}
    double estimate_prev;
    double estimate_last;
};

// A solver iterate stopped being finite.
struct DivergenceError : Error {
    DivergenceError(const std::string& msg, long iteration, std::int64_t index)
        : Error(msg), iteration(iteration), index(index) {}
    long iteration;
    std::int64_t index;
};

}  // namespace mstor
