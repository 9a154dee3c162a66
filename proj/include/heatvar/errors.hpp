#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace heatvar {

/// Requested work exceeds a configured resource budget (memory, series length).
class ResourceError : public std::runtime_error {
 public:
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

/// Cholesky factorization hit a non-positive pivot even after the jitter retry.
class FactorizationError : public std::runtime_error {
 public:
  FactorizationError(std::size_t pivot_index, double pivot_value, const std::string& what)
      : std::runtime_error(what), pivot_index_(pivot_index), pivot_value_(pivot_value) {}

  std::size_t pivot_index() const { return pivot_index_; }
  double pivot_value() const { return pivot_value_; }

 private:
  std::size_t pivot_index_;
  double pivot_value_;
};

}  // namespace heatvar
