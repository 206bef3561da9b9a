#pragma once

#include <stdexcept>
#include <string>

namespace waveobs {

/// Thrown when a linear solve or factorization breaks down (loss of positive
/// definiteness, singular pivot). Distinct from std::invalid_argument, which
/// is reserved for caller contract violations.
class numerical_error : public std::runtime_error {
public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace waveobs
