#pragma once

#include <stdexcept>
#include <string>

namespace flowplan {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A document failed structural or referential validation. `field` names the
/// violated invariant or offending field when known.
class ValidationError : public Error {
public:
    ValidationError(const std::string& field, const std::string& what)
        : Error(field.empty() ? what : field + ": " + what), field_(field) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// Malformed input text. `offset` is a byte offset into the input when the
/// underlying parser reports one, otherwise std::string::npos.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what, std::size_t offset = std::string::npos)
        : Error(what), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// PDDL generation failed (e.g. a plan action id names no agent).
class CompileError : public Error {
public:
    using Error::Error;
};

/// A search or batch stage exceeded its configured budget. Distinct from a
/// negative answer: the question was not settled.
class ResourceError : public Error {
public:
    using Error::Error;
};

/// Runtime configuration is unusable (missing template, bad grid value, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace flowplan
