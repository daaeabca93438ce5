#pragma once

#include <stdexcept>
#include <string>

namespace secnet {

// Malformed inputs: files, flags, references to unknown entities.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Parse failure with a 1-based line number.
class ParseError : public InputError {
public:
    ParseError(int line, const std::string& what)
        : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

// A configured resource limit was hit (path counts, constraint counts,
// solver iterations). Distinct from infeasibility.
class CapacityError : public std::runtime_error {
public:
    explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace secnet
