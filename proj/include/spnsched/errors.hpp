#pragma once

#include <stdexcept>
#include <string>

namespace spn {

/// Malformed or inconsistent input (dimension mismatch, bad parameter, unreadable file).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An arrival rate left the capacity region.
class AssumptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative solver hit its iteration cap.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, int iterations, double gap)
      : std::runtime_error(what + " (iterations=" + std::to_string(iterations) +
                           ", gap=" + std::to_string(gap) + ")"),
        iterations_(iterations),
        gap_(gap) {}

  int iterations() const noexcept { return iterations_; }
  double gap() const noexcept { return gap_; }

 private:
  int iterations_;
  double gap_;
};

}  // namespace spn
