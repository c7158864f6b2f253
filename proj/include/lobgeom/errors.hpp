#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lobgeom {

// Base for everything the toolkit throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- numeric / domain -----------------------------------------------------

struct DomainError : Error {
    using Error::Error;
};

struct NonConvergence : Error {
    using Error::Error;
};

struct Disconnected : Error {
    using Error::Error;
};

struct DegenerateProjection : Error {
    using Error::Error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct WindowTooShort : Error {
    using Error::Error;
};

struct SeriesTooShort : Error {
    using Error::Error;
};

struct TooSparse : Error {
    using Error::Error;
};

// ---- book / profile -------------------------------------------------------

struct EmptySide : Error {
    using Error::Error;
};

struct CrossedBook : Error {
    CrossedBook(std::int64_t ts, const std::string& what)
        : Error(what), timestamp(ts) {}
    std::int64_t timestamp;
};

struct MixedSides : Error {
    using Error::Error;
};

struct MixedK : Error {
    using Error::Error;
};

// ---- fitting ----------------------------------------------------------------

struct InsufficientData : Error {
    using Error::Error;
};

struct AllStartsFailed : Error {
    using Error::Error;
};

struct MismatchedData : Error {
    using Error::Error;
};

// ---- ingest / io ------------------------------------------------------------

struct IoError : Error {
    using Error::Error;
};

struct BadHeader : Error {
    using Error::Error;
};

struct ParseError : Error {
    ParseError(long line_, int column_, const std::string& reason_)
        : Error("parse error at line " + std::to_string(line_) + ", column " +
                std::to_string(column_) + ": " + reason_),
          line(line_), column(column_), reason(reason_) {}
    long line;
    int column;
    std::string reason;
};

struct UnsortedInput : Error {
    using Error::Error;
};

// ---- configuration ----------------------------------------------------------

struct ConfigError : Error {
    ConfigError(const std::string& field_, const std::string& what)
        : Error(field_ + ": " + what), field(field_) {}
    std::string field;
};

}  // namespace lobgeom
