#pragma once

#include <stdexcept>
#include <string>

namespace dlgn {

// User-facing errors: bad config, bad file, bad CLI input. Exit status 1.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numeric failures during a run (non-finite loss/gradient). Exit status 2.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dlgn
