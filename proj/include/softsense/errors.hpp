#pragma once

#include <stdexcept>

namespace softsense {

// Missing/unreadable/unwritable files. CLI exit code 2.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dimension or layout mismatch between inputs. CLI exit code 3.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration values or unknown config keys. CLI exit code 3.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace softsense
