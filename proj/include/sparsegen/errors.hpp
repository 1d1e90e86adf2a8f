#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sparsegen {

// Invalid user-supplied parameters or configuration. The CLI maps this to exit code 1.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numerical procedure failed to reach its tolerance. The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_(achieved) {}
    explicit NumericalError(const std::string& what)
        : std::runtime_error(what) {}

    // Achieved error bound or residual, when one is known.
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_ = 0.0;
};

// Malformed document. `position` is the byte offset where parsing stopped.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t position)
        : std::runtime_error(what), position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

}  // namespace sparsegen
