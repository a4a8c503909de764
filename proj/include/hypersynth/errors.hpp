#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hypersynth {

/// Invalid model data (distribution sums, dangling states, empty menus).
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A controller that picks an action not enabled in some state.
class InvalidControllerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reward query on a model without a reward function.
class MissingRewardsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// obs() over states whose action menus differ.
class IncompatibleObservationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Text-format error carrying a 1-based source location.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column)
        : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                             message),
          line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// A specification that is syntactically fine but does not fit the model or its own declarations.
class SpecError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Enumeration refused because the family exceeds the configured cap.
class CapExceededError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hypersynth
