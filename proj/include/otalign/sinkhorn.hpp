#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "otalign/features.hpp"
#include "otalign/linalg.hpp"

namespace otalign {

struct SinkhornConfig {
  double epsilon = 3e-2;       // entropy regularization
  std::size_t max_iters = 100;
  double tol = 1e-2;           // L1 marginal-residual threshold for early stop
};

void validate(const SinkhornConfig& cfg);

// Prescribed source/target mass distributions. Entries strictly positive,
// each side sums to 1 within 1e-12.
class Marginals {
 public:
  Marginals(Vector a, Vector b);
  static Marginals uniform(std::size_t n, std::size_t l);

  const Vector& source() const { return a_; }
  const Vector& target() const { return b_; }

 private:
  Vector a_;
  Vector b_;
};

struct TransportPlan {
  Matrix plan;                     // N x L, entries >= 0
  std::size_t iterations_used = 0;
  double marginal_residual = 0.0;  // max of row/column L1 deviations
  bool converged = false;
};

// Entropic OT via log-domain dual updates, row update then column update each
// iteration. Stops when the L1 marginal residual drops to cfg.tol or the
// iteration budget is exhausted; hitting the budget is not an error, the plan
// is returned with converged=false. residual_trace, when given, receives the
// residual after every iteration.
TransportPlan sinkhorn(const CostMatrix& cost, const Marginals& marg,
                       const SinkhornConfig& cfg,
                       std::vector<double>* residual_trace = nullptr);

// (T_img->txt, T_txt->img): the second plan solves the transposed cost with
// swapped marginals. Two independent solves.
std::pair<TransportPlan, TransportPlan> solve_symmetric(
    const CostMatrix& cost, const Marginals& marg, const SinkhornConfig& cfg);

// <plan, cost>
double transport_cost(const Matrix& plan, const CostMatrix& cost);

// <plan, cost> + epsilon * sum_ij plan_ij (ln plan_ij - 1), with 0 ln 0 = 0.
// InputError on a negative plan entry.
double entropic_objective(const Matrix& plan, const CostMatrix& cost,
                          double epsilon);

struct ExactOtResult {
  Matrix plan;
  double value = 0.0;
};

// Exact unregularized optimum for small instances (N, L <= 6). Square uniform
// marginals enumerate all permutation couplings (lowest lexicographic
// permutation wins exact ties); general marginals run the transportation
// simplex from a northwest-corner start. CapacityError above the size bound.
ExactOtResult exact_ot_oracle(const CostMatrix& cost, const Marginals& marg);

}  // namespace otalign
