#pragma once

#include <stdexcept>
#include <string>

namespace dgprm {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A pipeline configuration field violates its bounds. `field` names the
/// first violated field, in declaration order.
struct ConfigError : Error {
    std::string field;
    ConfigError(std::string field_name, const std::string& msg)
        : Error(msg), field(std::move(field_name)) {}
};

struct InvalidArgument : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };

// Backend errors. The CLI maps these to exit code 2.
struct TransportError : Error { using Error::Error; };
struct RateLimited : Error { using Error::Error; };
struct MalformedResponse : Error { using Error::Error; };

struct DimensionMismatch : Error { using Error::Error; };
struct ZeroVector : Error { using Error::Error; };

struct IoError : Error { using Error::Error; };
struct FormatVersionMismatch : Error { using Error::Error; };
struct CorruptEmbedding : Error { using Error::Error; };

struct UnvalidatedCriterion : Error { using Error::Error; };
struct HistoryGap : Error { using Error::Error; };
struct ScoreOutOfRange : Error { using Error::Error; };

struct LengthMismatch : Error { using Error::Error; };
struct NonFiniteInput : Error { using Error::Error; };
struct InsufficientCandidates : Error { using Error::Error; };
struct AlignmentError : Error { using Error::Error; };

/// True for error classes that indicate a failing model/embedding backend
/// rather than bad local input.
inline bool is_backend_error(const Error& e) {
    return dynamic_cast<const TransportError*>(&e) != nullptr ||
           dynamic_cast<const RateLimited*>(&e) != nullptr ||
           dynamic_cast<const MalformedResponse*>(&e) != nullptr;
}

} // namespace dgprm
