#pragma once

#include <stdexcept>

namespace netanom {

/// Malformed or inconsistent input data (CSV layout, cadence, shapes).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A window would reach before the first sample or past the last one.
class InsufficientHistory : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// The frame cannot hold a single referent + subject window.
class FrameTooShort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace netanom
