#pragma once

#include <vector>

namespace spn::lp {

enum class Status { Optimal, Infeasible, Unbounded };

struct Result {
  Status status = Status::Infeasible;
  double value = 0.0;
  std::vector<double> x;
  int iterations = 0;
};

using Matrix = std::vector<std::vector<double>>;

/// Dense two-phase simplex for
///   maximize c'x  subject to  A x <= b,  x >= 0.
/// Bland-style index tie-breaking. Throws NumericError past `max_iterations` pivots.
Result maximize(const Matrix& A, const std::vector<double>& b, const std::vector<double>& c,
                int max_iterations = 10000, double eps = 1e-12);

}  // namespace spn::lp
