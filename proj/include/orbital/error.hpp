#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace orbital {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : Error { using Error::Error; };
struct NegativeWeight : Error { using Error::Error; };
struct NonFiniteValue : Error { using Error::Error; };
struct AllZeroWeights : Error { using Error::Error; };
struct NotNormalized : Error { using Error::Error; };
struct DegenerateBox : Error { using Error::Error; };
struct EmptyDirections : Error { using Error::Error; };
struct InvalidDirection : Error { using Error::Error; };
struct InvalidTolerance : Error { using Error::Error; };
struct SymbolOutOfRange : Error { using Error::Error; };
struct UnknownNamedMap : Error { using Error::Error; };
struct InvalidProbabilities : Error { using Error::Error; };
struct EmptyIfs : Error { using Error::Error; };
struct InvalidQ : Error { using Error::Error; };
struct DepthOverflow : Error { using Error::Error; };
struct DegenerateSpec : Error { using Error::Error; };
struct EmptyBatch : Error { using Error::Error; };
struct InvalidMu0Support : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

/// Parse failure for config documents; carries a byte offset when known.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what, std::size_t byte = 0)
        : Error(what), byte_(byte) {}
    std::size_t byte() const noexcept { return byte_; }

private:
    std::size_t byte_;
};

/// One schema or validation problem, addressed by a dotted field path.
struct Violation {
    std::string path;
    std::string reason;
};

/// Carries the complete list of violations found in a document or system.
class SchemaViolation : public Error {
public:
    explicit SchemaViolation(std::vector<Violation> violations)
        : Error(join(violations)), violations_(std::move(violations)) {}

    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    static std::string join(const std::vector<Violation>& vs) {
        std::string msg = "schema violation";
        for (const auto& v : vs) msg += "\n  " + v.path + ": " + v.reason;
        return msg;
    }

    std::vector<Violation> violations_;
};

}  // namespace orbital
