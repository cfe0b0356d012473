#include "mmm/solver.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "mmm/parallel.hpp"

namespace mmm {

namespace {

// Internal stopping check at half the public allowance.
constexpr double kKktFactor = 10.0;
constexpr double kInternalKktFactor = 5.0;

void check_problem(const Matrix& design, Index response_rows, double lambda1, double lambda2,
                   const SolverOptions& opts) {
  if (design.cols() < 1) throw Error(ErrorCode::EmptyBlock, "design has no columns");
  if (design.rows() != response_rows) {
    throw Error(ErrorCode::DimensionMismatch, "design and response row counts differ");
  }
  if (!design.allFinite()) throw Error(ErrorCode::NonFiniteInput, "design has non-finite entries");
  if (!std::isfinite(lambda1) || !std::isfinite(lambda2) || lambda1 < 0.0 || lambda2 < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "lambda1 and lambda2 must be finite and >= 0");
  }
  opts.validate(design.cols());
}

double sign(double v) { return (v > 0.0) - (v < 0.0); }

double penalty_term(const Vector& b, double lambda1, double lambda2, const SolverOptions& opts) {
  double l1 = 0.0, l2 = 0.0;
  for (Index j = 0; j < b.size(); ++j) {
    if (!opts.penalized(j)) continue;
    l1 += std::abs(b(j));
    l2 += b(j) * b(j);
  }
  return lambda2 * l2 + lambda1 * l1;
}

// Gradient of the RSS is 2(Gb - D'y); grad holds Gb - D'y (without the 2).
bool gram_kkt_ok(const Matrix& gram, const Vector& half_grad, const Vector& b, double lambda1,
                 double lambda2, double tol, const SolverOptions& opts) {
  for (Index j = 0; j < b.size(); ++j) {
    const double g = 2.0 * half_grad(j);
    if (!opts.penalized(j)) {
      if (std::abs(g) > kInternalKktFactor * tol * gram(j, j)) return false;
    } else if (b(j) != 0.0) {
      const double r = g + 2.0 * lambda2 * b(j) + lambda1 * sign(b(j));
      if (std::abs(r) > kInternalKktFactor * tol * (gram(j, j) + lambda2)) return false;
    } else if (std::abs(g) > lambda1 + kInternalKktFactor * tol) {
      return false;
    }
  }
  return true;
}

// Signed support: 0 for zero coefficients, +-1 otherwise.
std::vector<signed char> pattern_of(const Vector& b) {
  std::vector<signed char> out(static_cast<std::size_t>(b.size()));
  for (Index j = 0; j < b.size(); ++j) out[static_cast<std::size_t>(j)] = static_cast<signed char>(sign(b(j)));
  return out;
}

// Objective without the constant y'y, from Gram quantities.
double gram_objective(const Matrix& gram, const Vector& corr, const Vector& b, double lambda1,
                      double lambda2, const SolverOptions& opts) {
  return b.dot(gram * b) - 2.0 * corr.dot(b) + penalty_term(b, lambda1, lambda2, opts);
}

// Step toward the exact minimizer on the current signed support,
//   (G_AA + l2 I_P) b_A = c_A - l1/2 s_A,
// stopping where the first penalized coordinate would change sign. That
// coordinate is dropped and the solve repeated on the smaller support. Kept
// only if the objective does not rise.
bool polish(const Matrix& gram, const Vector& corr, Vector& b, double lambda1, double lambda2,
            const SolverOptions& opts) {
  std::vector<Index> active;
  for (Index j = 0; j < b.size(); ++j)
    if (b(j) != 0.0 || !opts.penalized(j)) active.push_back(j);
  Vector candidate = b;
  const std::size_t rounds = active.size();
  for (std::size_t round = 0; round < rounds && !active.empty(); ++round) {
    const Index a = static_cast<Index>(active.size());
    Matrix lhs(a, a);
    Vector rhs(a);
    for (Index r = 0; r < a; ++r) {
      const Index j = active[static_cast<std::size_t>(r)];
      for (Index c = 0; c < a; ++c) lhs(r, c) = gram(j, active[static_cast<std::size_t>(c)]);
      rhs(r) = corr(j);
      if (opts.penalized(j)) {
        lhs(r, r) += lambda2;
        rhs(r) -= 0.5 * lambda1 * sign(candidate(j));
      }
    }
    const Eigen::LDLT<Matrix> ldlt(lhs);
    if (ldlt.info() != Eigen::Success) return false;
    const Vector sol = ldlt.solve(rhs);
    if (!sol.allFinite()) return false;

    double step = 1.0;
    Index blocking = -1;
    for (Index r = 0; r < a; ++r) {
      const Index j = active[static_cast<std::size_t>(r)];
      if (!opts.penalized(j) || sign(sol(r)) == sign(candidate(j))) continue;
      const double t = candidate(j) / (candidate(j) - sol(r));
      if (t < step) {
        step = t;
        blocking = r;
      }
    }
    for (Index r = 0; r < a; ++r) {
      const Index j = active[static_cast<std::size_t>(r)];
      candidate(j) = blocking < 0 ? sol(r) : candidate(j) + step * (sol(r) - candidate(j));
    }
    if (blocking < 0) break;
    candidate(active[static_cast<std::size_t>(blocking)]) = 0.0;
    active.erase(active.begin() + blocking);
  }
  const double before = gram_objective(gram, corr, b, lambda1, lambda2, opts);
  const double after = gram_objective(gram, corr, candidate, lambda1, lambda2, opts);
  if (!(after <= before + 1e-13 * std::max(1.0, std::abs(before)))) return false;
  b = candidate;
  return true;
}

SolveReport solve_from_gram(const Matrix& design, const Matrix& gram, const Vector& response,
                            double lambda1, double lambda2, const SolverOptions& opts) {
  if (!response.allFinite()) throw Error(ErrorCode::NonFiniteInput, "response has non-finite entries");
  const Index d = gram.cols();
  const Vector corr = design.transpose() * response;

  Vector denom(d);
  for (Index j = 0; j < d; ++j) {
    denom(j) = gram(j, j) + (opts.penalized(j) ? lambda2 : 0.0);
    if (!(denom(j) > 0.0)) {
      throw Error(ErrorCode::ZeroNormColumn,
                  "design column " + std::to_string(j) + " is all zeros with no ridge term");
    }
  }

  SolveReport report;
  Vector b = opts.warm_start ? *opts.warm_start : Vector::Zero(d);
  const double half_l1 = 0.5 * lambda1;
  Vector gb(d);
  std::vector<signed char> previous, rejected;

  for (int it = 1; it <= opts.max_iterations; ++it) {
    gb.noalias() = gram * b;
    double max_change = 0.0;
    for (Index j = 0; j < d; ++j) {
      const double z = corr(j) - gb(j) + gram(j, j) * b(j);
      const double updated =
          opts.penalized(j) ? soft_threshold(z, half_l1) / denom(j) : z / denom(j);
      const double delta = updated - b(j);
      if (delta != 0.0) {
        gb += gram.col(j) * delta;
        b(j) = updated;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    report.iterations = it;
    report.last_max_change = max_change;
    if (opts.record_objective_trace) {
      report.objective_trace.push_back(
          elastic_net_objective(design, response, b, lambda1, lambda2, opts));
    }
    if (max_change <= opts.tolerance) {
      gb.noalias() = gram * b;
      const Vector half_grad = gb - corr;
      if (gram_kkt_ok(gram, half_grad, b, lambda1, lambda2, opts.tolerance, opts)) {
        report.converged = true;
        break;
      }
    }
    // Once the signed support settles, jump to the exact solution on it.
    std::vector<signed char> current = pattern_of(b);
    if (current == previous && current != rejected) {
      if (!polish(gram, corr, b, lambda1, lambda2, opts)) rejected = current;
    }
    previous = std::move(current);
  }

  report.objective = elastic_net_objective(design, response, b, lambda1, lambda2, opts);
  for (Index j = 0; j < d; ++j)
    if (b(j) != 0.0) report.active_set.push_back(j);
  report.coefficients = std::move(b);
  return report;
}

}  // namespace

void SolverOptions::validate(Index columns) const {
  if (max_iterations < 1) throw Error(ErrorCode::InvalidArgument, "max_iterations must be >= 1");
  if (!(tolerance > 0.0) || !std::isfinite(tolerance)) {
    throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  }
  if (!penalty_mask.empty() && static_cast<Index>(penalty_mask.size()) != columns) {
    throw Error(ErrorCode::DimensionMismatch, "penalty_mask length differs from design columns");
  }
  if (warm_start) {
    if (warm_start->size() != columns) {
      throw Error(ErrorCode::DimensionMismatch, "warm_start length differs from design columns");
    }
    if (!warm_start->allFinite()) throw Error(ErrorCode::NonFiniteInput, "warm_start not finite");
  }
}

bool MultiResponseFit::all_converged() const {
  for (const auto& r : reports)
    if (!r.converged) return false;
  return true;
}

double elastic_net_objective(const Matrix& design, const Vector& response, const Vector& coef,
                             double lambda1, double lambda2, const SolverOptions& opts) {
  const double rss = (response - design * coef).squaredNorm();
  return rss + penalty_term(coef, lambda1, lambda2, opts);
}

KktCheck kkt_certificate(const Matrix& design, const Vector& response, const Vector& coef,
                         double lambda1, double lambda2, const SolverOptions& opts) {
  const Vector residual = response - design * coef;
  const double tol = opts.tolerance;
  KktCheck out;
  out.worst_excess = -std::numeric_limits<double>::infinity();
  for (Index j = 0; j < coef.size(); ++j) {
    const double dr = design.col(j).dot(residual);
    const double dd = design.col(j).squaredNorm();
    double lhs = 0.0, allowance = 0.0;
    if (!opts.penalized(j)) {
      lhs = std::abs(-2.0 * dr);
      allowance = kKktFactor * tol * dd;
    } else if (coef(j) != 0.0) {
      lhs = std::abs(-2.0 * dr + 2.0 * lambda2 * coef(j) + lambda1 * sign(coef(j)));
      allowance = kKktFactor * tol * (dd + lambda2);
    } else {
      lhs = std::abs(2.0 * dr);
      allowance = lambda1 + kKktFactor * tol;
    }
    const double excess = lhs - allowance;
    if (excess > out.worst_excess) {
      out.worst_excess = excess;
      out.worst_column = j;
    }
    if (excess > 0.0) out.satisfied = false;
  }
  return out;
}

SolveReport solve_elastic_net(const Matrix& design, const Vector& response, double lambda1,
                              double lambda2, const SolverOptions& opts) {
  check_problem(design, response.size(), lambda1, lambda2, opts);
  const Matrix gram = design.transpose() * design;
  return solve_from_gram(design, gram, response, lambda1, lambda2, opts);
}

MultiResponseFit fit_multiresponse(const Matrix& design, const Matrix& responses, double lambda1,
                                   double lambda2, const SolverOptions& opts) {
  check_problem(design, responses.rows(), lambda1, lambda2, opts);
  const Index k = responses.cols();
  const Matrix gram = design.transpose() * design;

  MultiResponseFit fit;
  fit.coefficients.resize(design.cols(), k);
  fit.reports.resize(static_cast<std::size_t>(k));
  std::vector<std::optional<Error>> failures(static_cast<std::size_t>(k));

  parallel_for(static_cast<std::size_t>(k), opts.threads, [&](std::size_t col) {
    try {
      const Vector y = responses.col(static_cast<Index>(col));
      fit.reports[col] = solve_from_gram(design, gram, y, lambda1, lambda2, opts);
    } catch (const Error& e) {
      failures[col] = e.with_context("response column " + std::to_string(col));
    }
  });
  for (const auto& f : failures)
    if (f) throw *f;
  for (Index col = 0; col < k; ++col) {
    fit.coefficients.col(col) = fit.reports[static_cast<std::size_t>(col)].coefficients;
  }
  return fit;
}

}  // namespace mmm
