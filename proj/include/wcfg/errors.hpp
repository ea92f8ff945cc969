#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wcfg {

// Base class for all library failures.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Kleene star applied to a value whose infinite sum diverges. Surfacing this
// as an error (rather than returning an infinity) turns a non-tight grammar
// into a diagnosable failure.
struct NonConvergentError : Error {
    using Error::Error;
};

struct DimensionMismatchError : Error {
    using Error::Error;
};

// (I - M) could not be inverted.
struct SingularMatrixError : Error {
    using Error::Error;
};

// A closure computed by inversion came out with a clearly negative entry.
struct NegativeEntryError : Error {
    using Error::Error;
};

struct GrammarSyntaxError : Error {
    GrammarSyntaxError(std::size_t line_no, const std::string& reason)
        : Error("grammar line " + std::to_string(line_no) + ": " + reason), line(line_no) {}
    std::size_t line;
};

struct DuplicateRuleError : GrammarSyntaxError {
    using GrammarSyntaxError::GrammarSyntaxError;
};

struct UnknownStartSymbolError : GrammarSyntaxError {
    using GrammarSyntaxError::GrammarSyntaxError;
};

struct UnknownTokenError : Error {
    UnknownTokenError(std::size_t pos, const std::string& text)
        : Error("unknown token '" + text + "' at position " + std::to_string(pos)),
          position(pos),
          token(text) {}
    std::size_t position;  // 1-based
    std::string token;
};

struct YieldTooLongError : Error {
    using Error::Error;
};

struct GenerationFailedError : Error {
    using Error::Error;
};

struct InsufficientDataError : Error {
    using Error::Error;
};

}  // namespace wcfg
