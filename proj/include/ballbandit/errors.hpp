#pragma once

#include <stdexcept>
#include <string>

namespace ballbandit {

// Domain violations reuse std::domain_error directly.

// Operation called on an object whose lifecycle forbids it (e.g. an
// estimator advanced after it has returned its value).
struct state_error : std::logic_error {
    explicit state_error(const std::string& msg) : std::logic_error(msg) {}
};

// Environment pull past the configured horizon.
struct budget_error : std::runtime_error {
    explicit budget_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid experiment configuration; carries the offending field path.
struct config_error : std::runtime_error {
    config_error(const std::string& field_path, const std::string& msg)
        : std::runtime_error(field_path + ": " + msg), field(field_path) {}
    std::string field;
};

}  // namespace ballbandit
