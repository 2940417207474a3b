#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace actloss {

/// Raised for inputs outside an operation's domain (negative activation
/// argument, non-positive dimension, bad profile parameters, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The activated loss is undefined at z = 0; evaluation is refused when
/// ||z|| falls below the guard.
class SingularityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed ensemble file. `offset()` is the byte (binary) or character
/// (text) position at which parsing stopped.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at offset " + std::to_string(offset) + ")"), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Well-formed file whose contents violate an ensemble invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace actloss
