#pragma once

#include <optional>
#include <vector>

#include "mmm/types.hpp"

namespace mmm {

struct SolverOptions {
  int max_iterations = 10000;
  double tolerance = 1e-8;        // on max absolute coefficient change per sweep
  std::vector<bool> penalty_mask;  // true = penalized; empty means all penalized
  std::optional<Vector> warm_start;
  bool record_objective_trace = false;
  int threads = 1;  // fit_multiresponse only; results do not depend on it

  void validate(Index columns) const;
  bool penalized(Index j) const {
    return penalty_mask.empty() || penalty_mask[static_cast<std::size_t>(j)];
  }
};

struct SolveReport {
  Vector coefficients;
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;
  double last_max_change = 0.0;
  std::vector<Index> active_set;
  std::vector<double> objective_trace;  // f(b) after each sweep, if requested
};

struct MultiResponseFit {
  Matrix coefficients;  // d x K
  std::vector<SolveReport> reports;

  bool all_converged() const;
};

/// f(b) = ||y - Db||^2 + l2 ||b_P||^2 + l1 ||b_P||_1 over the penalized set P.
double elastic_net_objective(const Matrix& design, const Vector& response, const Vector& coef,
                             double lambda1, double lambda2, const SolverOptions& opts);

struct KktCheck {
  bool satisfied = true;
  Index worst_column = -1;
  double worst_excess = 0.0;  // largest (residual - allowance); <= 0 when satisfied
};

// Component-wise stationarity of the elastic-net objective, evaluated from the
// explicit residual. Nonzero b_j:
//   |-2 d_j'r + 2 l2 b_j + l1 sign(b_j)| <= 10 tol (d_j'd_j + l2)
// zero b_j:  |2 d_j'r| <= l1 + 10 tol. Unpenalized columns use l1 = l2 = 0.
KktCheck kkt_certificate(const Matrix& design, const Vector& response, const Vector& coef,
                         double lambda1, double lambda2, const SolverOptions& opts);

/// Cyclic coordinate descent; never throws on non-convergence, the report
/// carries converged = false instead.
SolveReport solve_elastic_net(const Matrix& design, const Vector& response, double lambda1,
                              double lambda2, const SolverOptions& opts = {});

/// Independent per-column solves sharing one Gram matrix. Column k is
/// bit-identical to solve_elastic_net on responses.col(k).
MultiResponseFit fit_multiresponse(const Matrix& design, const Matrix& responses, double lambda1,
                                   double lambda2, const SolverOptions& opts = {});

inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

}  // namespace mmm
