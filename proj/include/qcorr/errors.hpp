#pragma once

#include <stdexcept>
#include <string>

namespace qcorr {

// Violated input contract (bad arguments, malformed configuration).
class PreconditionError : public std::runtime_error {
 public:
  explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical breakdown: divergent training loss, degenerate spectra, etc.
class NumericsError : public std::runtime_error {
 public:
  explicit NumericsError(const std::string& what) : std::runtime_error(what) {}
};

// File corruption or I/O failure.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qcorr
