#pragma once

#include <stdexcept>
#include <string>

namespace latentscale {

// Invalid arguments are reported with std::invalid_argument; the types below
// cover the remaining failure classes callers may want to tell apart.

class unsupported_error : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class not_found_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class format_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input at a known 1-based line.
class parse_error : public format_error {
public:
    parse_error(const std::string& what, std::size_t line)
        : format_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// A selection step removed everything it was given.
class empty_result_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace latentscale
