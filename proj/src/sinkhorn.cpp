#include "otalign/sinkhorn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

namespace otalign {

void validate(const SinkhornConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) {
    throw ParamError("sinkhorn: epsilon must be positive");
  }
  if (cfg.max_iters < 1) {
    throw ParamError("sinkhorn: max_iters must be at least 1");
  }
  if (!(cfg.tol > 0.0)) {
    throw ParamError("sinkhorn: tol must be positive");
  }
}

namespace {

void check_marginal(const Vector& v, const char* side) {
  if (v.len() == 0) {
    throw ShapeError(std::string("marginals: empty ") + side);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < v.len(); ++i) {
    if (!(v[i] > 0.0)) {
      throw InputError(std::string("marginals: ") + side + " entry " +
                       std::to_string(i) + " is not positive");
    }
    sum += v[i];
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw InputError(std::string("marginals: ") + side + " sums to " +
                     std::to_string(sum) + ", expected 1");
  }
}

bool is_uniform(const Vector& v) {
  const double w = 1.0 / static_cast<double>(v.len());
  for (std::size_t i = 0; i < v.len(); ++i) {
    if (std::abs(v[i] - w) > 1e-12) return false;
  }
  return true;
}

}  // namespace

Marginals::Marginals(Vector a, Vector b) : a_(std::move(a)), b_(std::move(b)) {
  check_marginal(a_, "source");
  check_marginal(b_, "target");
}

Marginals Marginals::uniform(std::size_t n, std::size_t l) {
  return Marginals(Vector::constant(n, 1.0 / static_cast<double>(n)),
                   Vector::constant(l, 1.0 / static_cast<double>(l)));
}

TransportPlan sinkhorn(const CostMatrix& cost, const Marginals& marg,
                       const SinkhornConfig& cfg,
                       std::vector<double>* residual_trace) {
  validate(cfg);
  const std::size_t n = cost.rows();
  const std::size_t l = cost.cols();
  const Vector& a = marg.source();
  const Vector& b = marg.target();
  if (a.len() != n || b.len() != l) {
    throw ShapeError("sinkhorn: cost is " + std::to_string(n) + "x" +
                     std::to_string(l) + " but marginals have lengths " +
                     std::to_string(a.len()) + "/" + std::to_string(b.len()));
  }

  // log kernel, dual potentials already divided by epsilon:
  // T_ij = exp(alpha_i + beta_j + log_k_ij)
  Matrix log_k(n, l);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < l; ++j) {
      log_k(i, j) = -cost(i, j) / cfg.epsilon;
    }
  }
  std::vector<double> log_a(n), log_b(l);
  for (std::size_t i = 0; i < n; ++i) log_a[i] = std::log(a[i]);
  for (std::size_t j = 0; j < l; ++j) log_b[j] = std::log(b[j]);

  std::vector<double> alpha(n, 0.0), beta(l, 0.0);
  std::vector<double> buf(std::max(n, l));

  TransportPlan result;
  result.plan = Matrix(n, l);
  if (residual_trace) residual_trace->clear();

  for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
    // row update, then column update; order fixed for determinism
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < l; ++j) buf[j] = beta[j] + log_k(i, j);
      alpha[i] = log_a[i] - logsumexp(std::span<const double>(buf.data(), l));
    }
    for (std::size_t j = 0; j < l; ++j) {
      for (std::size_t i = 0; i < n; ++i) buf[i] = alpha[i] + log_k(i, j);
      beta[j] = log_b[j] - logsumexp(std::span<const double>(buf.data(), n));
    }

    double row_res = 0.0, col_res = 0.0;
    std::vector<double> col_sum(l, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double row_sum = 0.0;
      for (std::size_t j = 0; j < l; ++j) {
        const double t = std::exp(alpha[i] + beta[j] + log_k(i, j));
        result.plan(i, j) = t;
        row_sum += t;
        col_sum[j] += t;
      }
      row_res += std::abs(row_sum - a[i]);
    }
    for (std::size_t j = 0; j < l; ++j) col_res += std::abs(col_sum[j] - b[j]);

    result.iterations_used = iter + 1;
    result.marginal_residual = std::max(row_res, col_res);
    if (residual_trace) residual_trace->push_back(result.marginal_residual);
    if (result.marginal_residual <= cfg.tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

std::pair<TransportPlan, TransportPlan> solve_symmetric(
    const CostMatrix& cost, const Marginals& marg, const SinkhornConfig& cfg) {
  TransportPlan forward = sinkhorn(cost, marg, cfg);
  Marginals swapped(marg.target(), marg.source());
  TransportPlan reverse = sinkhorn(cost.transposed(), swapped, cfg);
  return {std::move(forward), std::move(reverse)};
}

double transport_cost(const Matrix& plan, const CostMatrix& cost) {
  if (plan.rows() != cost.rows() || plan.cols() != cost.cols()) {
    throw ShapeError("transport_cost: plan/cost shape mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < plan.rows(); ++i) {
    for (std::size_t j = 0; j < plan.cols(); ++j) {
      acc += plan(i, j) * cost(i, j);
    }
  }
  return acc;
}

double entropic_objective(const Matrix& plan, const CostMatrix& cost,
                          double epsilon) {
  if (plan.rows() != cost.rows() || plan.cols() != cost.cols()) {
    throw ShapeError("entropic_objective: plan/cost shape mismatch");
  }
  double linear = 0.0, entropy = 0.0;
  for (std::size_t i = 0; i < plan.rows(); ++i) {
    for (std::size_t j = 0; j < plan.cols(); ++j) {
      const double t = plan(i, j);
      if (t < 0.0) {
        throw InputError("entropic_objective: negative plan entry at (" +
                         std::to_string(i) + "," + std::to_string(j) + ")");
      }
      linear += t * cost(i, j);
      if (t > 0.0) entropy += t * (std::log(t) - 1.0);
    }
  }
  return linear + epsilon * entropy;
}

namespace {

constexpr std::size_t kOracleLimit = 6;

ExactOtResult permutation_oracle(const CostMatrix& cost) {
  const std::size_t n = cost.rows();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> best = perm;
  double best_value = std::numeric_limits<double>::infinity();
  do {
    double matched = 0.0;
    for (std::size_t i = 0; i < n; ++i) matched += cost(i, perm[i]);
    const double value = matched / static_cast<double>(n);
    if (value < best_value) {  // strict: lowest lexicographic wins ties
      best_value = value;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  Matrix plan(n, n);
  const double w = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) plan(i, best[i]) = w;
  return {std::move(plan), best_value};
}

// Transportation simplex. Basis cells form a spanning tree of the bipartite
// row/column graph; entering variable picked Bland-style (first negative
// reduced cost in row-major order) so degenerate pivots cannot cycle.
class TransportSimplex {
 public:
  TransportSimplex(const CostMatrix& cost, const Vector& a, const Vector& b)
      : n_(cost.rows()),
        m_(cost.cols()),
        cost_(cost),
        x_(cost.rows(), cost.cols()),
        basic_(cost.rows() * cost.cols(), false) {
    northwest_corner(a, b);
  }

  ExactOtResult solve() {
    const std::size_t pivot_cap = 100000;
    for (std::size_t pivot = 0; pivot < pivot_cap; ++pivot) {
      compute_duals();
      std::size_t ei = 0, ej = 0;
      if (!find_entering(ei, ej)) {
        double value = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
          for (std::size_t j = 0; j < m_; ++j) value += x_(i, j) * cost_(i, j);
        }
        return {x_, value};
      }
      pivot_on(ei, ej);
    }
    throw Error("transportation simplex failed to terminate");
  }

 private:
  bool& basic(std::size_t i, std::size_t j) { return basic_[i * m_ + j]; }

  void northwest_corner(const Vector& a, const Vector& b) {
    std::vector<double> rem_a(a.data().begin(), a.data().end());
    std::vector<double> rem_b(b.data().begin(), b.data().end());
    std::size_t i = 0, j = 0;
    while (true) {
      const double q = std::min(rem_a[i], rem_b[j]);
      x_(i, j) = q;
      basic(i, j) = true;
      rem_a[i] -= q;
      rem_b[j] -= q;
      if (i == n_ - 1 && j == m_ - 1) break;
      // advance exactly one index so the basis keeps n+m-1 cells,
      // zero-valued ones included
      if (rem_a[i] <= rem_b[j] && i + 1 < n_) {
        ++i;
      } else if (j + 1 < m_) {
        ++j;
      } else {
        ++i;
      }
    }
  }

  void compute_duals() {
    u_.assign(n_, 0.0);
    v_.assign(m_, 0.0);
    std::vector<bool> row_done(n_, false), col_done(m_, false);
    std::vector<std::size_t> stack;  // rows as i, cols as n_ + j
    row_done[0] = true;
    stack.push_back(0);
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      if (node < n_) {
        const std::size_t i = node;
        for (std::size_t j = 0; j < m_; ++j) {
          if (basic(i, j) && !col_done[j]) {
            v_[j] = cost_(i, j) - u_[i];
            col_done[j] = true;
            stack.push_back(n_ + j);
          }
        }
      } else {
        const std::size_t j = node - n_;
        for (std::size_t i = 0; i < n_; ++i) {
          if (basic(i, j) && !row_done[i]) {
            u_[i] = cost_(i, j) - v_[j];
            row_done[i] = true;
            stack.push_back(i);
          }
        }
      }
    }
  }

  bool find_entering(std::size_t& ei, std::size_t& ej) const {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < m_; ++j) {
        if (basic_[i * m_ + j]) continue;
        if (cost_(i, j) - u_[i] - v_[j] < -1e-12) {
          ei = i;
          ej = j;
          return true;
        }
      }
    }
    return false;
  }

  // Unique path through basic cells from row node ei to column node ej.
  bool find_path(std::size_t node, std::size_t target,
                 std::vector<std::size_t>& path,
                 std::vector<bool>& visited) const {
    visited[node] = true;
    path.push_back(node);
    if (node == target) return true;
    if (node < n_) {
      const std::size_t i = node;
      for (std::size_t j = 0; j < m_; ++j) {
        if (basic_[i * m_ + j] && !visited[n_ + j]) {
          if (find_path(n_ + j, target, path, visited)) return true;
        }
      }
    } else {
      const std::size_t j = node - n_;
      for (std::size_t i = 0; i < n_; ++i) {
        if (basic_[i * m_ + j] && !visited[i]) {
          if (find_path(i, target, path, visited)) return true;
        }
      }
    }
    path.pop_back();
    return false;
  }

  void pivot_on(std::size_t ei, std::size_t ej) {
    std::vector<std::size_t> path;
    std::vector<bool> visited(n_ + m_, false);
    if (!find_path(ei, n_ + ej, path, visited)) {
      throw Error("transportation simplex: basis is not a spanning tree");
    }
    // cycle cells: entering edge plus consecutive path node pairs; signs
    // alternate starting with + on the entering cell
    std::vector<std::pair<std::size_t, std::size_t>> cycle;
    cycle.emplace_back(ei, ej);
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      const std::size_t p = path[k], q = path[k + 1];
      if (p < n_) {
        cycle.emplace_back(p, q - n_);
      } else {
        cycle.emplace_back(q, p - n_);
      }
    }
    // path starts at the entering row, so odd positions in `cycle` share a
    // node with their neighbours and carry the minus sign
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leave = 0;
    for (std::size_t k = 1; k < cycle.size(); k += 2) {
      const double val = x_(cycle[k].first, cycle[k].second);
      if (val < theta) {
        theta = val;
        leave = k;
      }
    }
    for (std::size_t k = 0; k < cycle.size(); ++k) {
      double& cell = x_(cycle[k].first, cycle[k].second);
      cell += (k % 2 == 0) ? theta : -theta;
    }
    x_(cycle[leave].first, cycle[leave].second) = 0.0;
    basic(cycle[leave].first, cycle[leave].second) = false;
    basic(ei, ej) = true;
  }

  std::size_t n_, m_;
  const CostMatrix& cost_;
  Matrix x_;
  std::vector<bool> basic_;
  std::vector<double> u_, v_;
};

}  // namespace

ExactOtResult exact_ot_oracle(const CostMatrix& cost, const Marginals& marg) {
  const std::size_t n = cost.rows();
  const std::size_t l = cost.cols();
  if (n > kOracleLimit || l > kOracleLimit) {
    throw CapacityError("exact_ot_oracle: instance " + std::to_string(n) +
                        "x" + std::to_string(l) + " exceeds the " +
                        std::to_string(kOracleLimit) + "-token bound");
  }
  if (marg.source().len() != n || marg.target().len() != l) {
    throw ShapeError("exact_ot_oracle: marginal lengths do not match cost");
  }
  if (n == l && is_uniform(marg.source()) && is_uniform(marg.target())) {
    return permutation_oracle(cost);
  }
  return TransportSimplex(cost, marg.source(), marg.target()).solve();
}

}  // namespace otalign
