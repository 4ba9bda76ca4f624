#pragma once

#include <stdexcept>
#include <string>

namespace nlsys {

enum class ErrorKind {
    invalid_field,
    domain,
    grid_mismatch,
    overflow,
    division_guard,
    hypothesis_violation,
    wraparound,
    capacity,
    collapse,
    numerical_blowup,
    configuration,
    io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base exception for every failure raised by the library. The kind tag lets
/// callers (the CLI in particular) map failures onto exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace nlsys
