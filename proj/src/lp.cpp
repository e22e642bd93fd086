#include "spnsched/lp.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "spnsched/errors.hpp"

namespace spn::lp {
namespace {

// Tableau layout: rows 0..m-1 constraints, row m objective, row m+1 phase-one
// objective. Column n is the artificial variable, column n+1 the right-hand side.
class Tableau {
 public:
  Tableau(const Matrix& A, const std::vector<double>& b, const std::vector<double>& c,
          int max_iterations, double eps)
      : m_(static_cast<int>(b.size())),
        n_(static_cast<int>(c.size())),
        eps_(eps),
        max_iterations_(max_iterations),
        basis_(m_),
        nonbasis_(n_ + 1),
        t_(m_ + 2, std::vector<double>(n_ + 2, 0.0)) {
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < n_; ++j) t_[i][j] = A[i][j];
      basis_[i] = n_ + i;
      t_[i][n_] = -1.0;
      t_[i][n_ + 1] = b[i];
    }
    for (int j = 0; j < n_; ++j) {
      nonbasis_[j] = j;
      t_[m_][j] = -c[j];
    }
    nonbasis_[n_] = -1;
    t_[m_ + 1][n_] = 1.0;
  }

  Result solve() {
    Result out;
    int r = 0;
    for (int i = 1; i < m_; ++i) {
      if (t_[i][n_ + 1] < t_[r][n_ + 1]) r = i;
    }
    if (m_ > 0 && t_[r][n_ + 1] < -eps_) {
      pivot(r, n_);
      if (!run(2) || t_[m_ + 1][n_ + 1] < -eps_) {
        out.status = Status::Infeasible;
        out.iterations = iterations_;
        return out;
      }
      for (int i = 0; i < m_; ++i) {
        if (basis_[i] == -1) {
          int s = 0;
          for (int j = 1; j <= n_; ++j) {
            if (std::pair(t_[i][j], nonbasis_[j]) < std::pair(t_[i][s], nonbasis_[s])) s = j;
          }
          pivot(i, s);
        }
      }
    }
    const bool bounded = run(1);
    out.x.assign(n_, 0.0);
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] >= 0 && basis_[i] < n_) out.x[basis_[i]] = t_[i][n_ + 1];
    }
    out.iterations = iterations_;
    if (!bounded) {
      out.status = Status::Unbounded;
      out.value = std::numeric_limits<double>::infinity();
      return out;
    }
    out.status = Status::Optimal;
    out.value = t_[m_][n_ + 1];
    return out;
  }

 private:
  void pivot(int r, int s) {
    if (++iterations_ > max_iterations_) {
      throw NumericError("simplex iteration cap exceeded", iterations_, 0.0);
    }
    const double inv = 1.0 / t_[r][s];
    for (int i = 0; i < m_ + 2; ++i) {
      if (i == r || std::abs(t_[i][s]) <= eps_) continue;
      const double f = t_[i][s] * inv;
      for (int j = 0; j < n_ + 2; ++j) t_[i][j] -= t_[r][j] * f;
      t_[i][s] = t_[r][s] * f;
    }
    for (int j = 0; j < n_ + 2; ++j) {
      if (j != s) t_[r][j] *= inv;
    }
    for (int i = 0; i < m_ + 2; ++i) {
      if (i != r) t_[i][s] *= -inv;
    }
    t_[r][s] = inv;
    std::swap(basis_[r], nonbasis_[s]);
  }

  bool run(int phase) {
    const int obj = m_ + phase - 1;
    for (;;) {
      int s = -1;
      for (int j = 0; j <= n_; ++j) {
        if (nonbasis_[j] == -phase) continue;
        if (s == -1 || std::pair(t_[obj][j], nonbasis_[j]) < std::pair(t_[obj][s], nonbasis_[s])) {
          s = j;
        }
      }
      if (s == -1 || t_[obj][s] >= -eps_) return true;
      int r = -1;
      for (int i = 0; i < m_; ++i) {
        if (t_[i][s] <= eps_) continue;
        if (r == -1 || std::pair(t_[i][n_ + 1] / t_[i][s], basis_[i]) <
                           std::pair(t_[r][n_ + 1] / t_[r][s], basis_[r])) {
          r = i;
        }
      }
      if (r == -1) return false;
      pivot(r, s);
    }
  }

  int m_;
  int n_;
  double eps_;
  int max_iterations_;
  int iterations_ = 0;
  std::vector<int> basis_;
  std::vector<int> nonbasis_;
  Matrix t_;
};

}  // namespace

Result maximize(const Matrix& A, const std::vector<double>& b, const std::vector<double>& c,
                int max_iterations, double eps) {
  if (A.size() != b.size()) throw ConfigError("lp: row count of A does not match b");
  for (const auto& row : A) {
    if (row.size() != c.size()) throw ConfigError("lp: column count of A does not match c");
  }
  return Tableau(A, b, c, max_iterations, eps).solve();
}

}  // namespace spn::lp
