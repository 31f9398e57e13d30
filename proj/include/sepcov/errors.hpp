#pragma once

#include <stdexcept>
#include <string>

namespace sepcov {

/// Malformed input: bad parameters, dimension mismatch, unreadable or
/// inconsistent data files.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// The statistic is undefined for this sample (zero covariance, vanishing
/// spatial margin, non-positive variance estimate).
class DegenerateError : public std::runtime_error {
 public:
  explicit DegenerateError(const std::string& what) : std::runtime_error(what) {}
};

/// A desk-scale size cap was exceeded (dense oracle or sampler).
class SizeCapError : public InputError {
 public:
  explicit SizeCapError(const std::string& what) : InputError(what) {}
};

}  // namespace sepcov
