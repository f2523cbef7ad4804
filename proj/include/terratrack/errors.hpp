#pragma once

#include <stdexcept>
#include <string>

namespace terratrack {

/// Error raised by the text-format parsers (maps, scenarios, CSV files).
/// Carries the 1-based line number of the offending input line.
class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ": " + message),
          line_(line) {}

    int line() const { return line_; }

private:
    int line_;
};

}  // namespace terratrack
