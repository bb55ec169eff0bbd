#include "qsl/als.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

namespace qsl {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_problem(const SensingOperator& op, const ComplexVector& b, const SolverConfig& c) {
  c.validate();
  detail::require(op.size() >= 1, "solver: sensing operator has no measurements");
  detail::require(b.size() == op.size(), "solver: " + std::to_string(b.size()) + " measurements for an operator of size " +
                                             std::to_string(op.size()));
  detail::require(c.rank <= std::min(op.rows(), op.cols()),
                  "solver: rank " + std::to_string(c.rank) + " exceeds min(d1, d2) = " +
                      std::to_string(std::min(op.rows(), op.cols())));
}

void check_start(const SensingOperator& op, const FactorPair& f, Index r) {
  detail::require(f.left.rows() == op.rows() && f.right.rows() == op.cols() && f.left.cols() == r &&
                      f.right.cols() == r,
                  "solver: starting factors have the wrong shape");
}

class DivergenceGuard {
 public:
  explicit DivergenceGuard(double initial) : limit_(1e6 * initial) {}
  void check(double loss, Index iteration) const {
    if (!std::isfinite(loss))
      throw DivergenceError("solver: non-finite loss at iteration " + std::to_string(iteration));
    if (loss > limit_)
      throw DivergenceError("solver: loss " + std::to_string(loss) + " exceeds 1e6 x the initial loss at iteration " +
                            std::to_string(iteration));
  }

 private:
  double limit_;
};

bool small_change(const ComplexMatrix& now, const ComplexMatrix& before, double gamma) {
  return (now - before).norm() <= gamma * before.norm();
}

void finish(SolveReport& rep, const SensingOperator& op, const ComplexVector& b, const SolverConfig& c,
            Clock::time_point t0) {
  rep.final_loss = sensing_loss(op, b, rep.factors.product());
  rep.regularized_loss = c.lambda_reg > 0 ? sensing_loss(op, b, rep.factors, c.lambda_reg) : rep.final_loss;
  rep.iterations = static_cast<Index>(rep.loss_trace.size());
  rep.wall_time = seconds_since(t0);
}

}  // namespace

void SolverConfig::validate() const {
  if (rank < 1) throw ConfigError("solver: rank must be positive");
  if (max_iter < 1) throw ConfigError("solver: max_iter must be positive");
  if (!(gamma > 0)) throw ConfigError("solver: gamma must be positive");
  if (!(eta > 1)) throw ConfigError("solver: eta must exceed 1");
  if (!std::isfinite(beta)) throw ConfigError("solver: beta must be finite");
  if (!(lambda_reg >= 0)) throw ConfigError("solver: lambda_reg must be nonnegative");
  if (threads < 1) throw ConfigError("solver: threads must be >= 1");
}

double sensing_loss(const SensingOperator& op, const ComplexVector& b, const ComplexMatrix& x) {
  detail::require(b.size() == op.size(), "sensing_loss: measurement count mismatch");
  return 0.5 * (op.apply(x) - b).squaredNorm() / static_cast<double>(op.size());
}

double sensing_loss(const SensingOperator& op, const ComplexVector& b, const FactorPair& f, double lambda) {
  const double base = sensing_loss(op, b, f.product());
  if (lambda == 0) return base;
  const ComplexMatrix gap = f.left.adjoint() * f.left - f.right.adjoint() * f.right;
  return base + lambda * gap.squaredNorm();
}

FactorPair random_factors(Index d1, Index d2, Index r, std::uint64_t seed) {
  Rng rng(seed);
  FactorPair f;
  f.left = complex_gaussian(d1, r, rng);
  f.right = complex_gaussian(d2, r, rng);
  return f;
}

FactorPair als_sweep(const SensingOperator& op, const ComplexVector& b, const FactorPair& start, LsMethod method) {
  FactorPair out;
  out.right = op.solve_right(start.left, b, method);
  out.left = op.solve_left(out.right, b, method);
  return out;
}

SolveReport als_solve(const SensingOperator& op, const ComplexVector& b, const SolverConfig& c) {
  return als_solve(op, b, c, random_factors(op.rows(), op.cols(), c.rank, c.seed));
}

SolveReport als_solve(const SensingOperator& op, const ComplexVector& b, const SolverConfig& c, FactorPair cur) {
  const auto t0 = Clock::now();
  check_problem(op, b, c);
  check_start(op, cur, c.rank);
  const DivergenceGuard guard(sensing_loss(op, b, cur.product()));

  SolveReport rep;
  for (Index it = 1; it <= c.max_iter; ++it) {
    FactorPair next = als_sweep(op, b, cur, c.ls_method);
    const double loss = sensing_loss(op, b, next.product());
    guard.check(loss, it);
    rep.loss_trace.push_back(loss);
    if (c.observer) c.observer({it, false, 0.0, &cur, &next, loss});
    const bool done = small_change(next.left, cur.left, c.gamma) && small_change(next.right, cur.right, c.gamma);
    cur = std::move(next);
    if (done) {
      rep.converged = true;
      break;
    }
  }
  rep.factors = std::move(cur);
  finish(rep, op, b, c, t0);
  return rep;
}

SolveReport nesterov_als_solve(const SensingOperator& op, const ComplexVector& b, const SolverConfig& c) {
  return nesterov_als_solve(op, b, c, random_factors(op.rows(), op.cols(), c.rank, c.seed));
}

SolveReport nesterov_als_solve(const SensingOperator& op, const ComplexVector& b, const SolverConfig& c,
                               FactorPair prev) {
  const auto t0 = Clock::now();
  check_problem(op, b, c);
  check_start(op, prev, c.rank);
  double f_prev = sensing_loss(op, b, prev.product());
  const DivergenceGuard guard(f_prev);

  SolveReport rep;
  // X_1: one plain sweep from the random start X_0
  FactorPair cur = als_sweep(op, b, prev, c.ls_method);
  double f_cur = sensing_loss(op, b, cur.product());
  guard.check(f_cur, 1);
  rep.loss_trace.push_back(f_cur);
  if (c.observer) c.observer({1, false, 0.0, &prev, &cur, f_cur});

  FactorPair best = cur;
  double f_best = f_cur;
  ComplexMatrix x_prev = prev.product();
  ComplexMatrix x_cur = cur.product();

  for (Index it = 2; it <= c.max_iter; ++it) {
    double beta = c.beta;
    bool restarted = false;
    if (f_cur >= c.eta * f_prev) {
      cur = prev;
      f_cur = f_prev;
      x_cur = x_prev;
      beta = 0;
      restarted = true;
      ++rep.restarts;
    }
    // After a revert X_tau == X_{tau-1} trivially, so the change test only applies to genuine steps.
    if (!restarted && (x_cur - x_prev).norm() <= c.gamma * x_prev.norm()) {
      rep.converged = true;
      break;
    }

    FactorPair base = cur;
    if (beta != 0) {
      base.left += beta * (cur.left - prev.left);
      base.right += beta * (cur.right - prev.right);
    }
    FactorPair next = als_sweep(op, b, base, c.ls_method);
    const double f_next = sensing_loss(op, b, next.product());
    guard.check(f_next, it);
    rep.loss_trace.push_back(f_next);
    if (c.observer) c.observer({it, restarted, beta, &base, &next, f_next});

    prev = std::move(cur);
    f_prev = f_cur;
    x_prev = std::move(x_cur);
    cur = std::move(next);
    f_cur = f_next;
    x_cur = cur.product();
    if (f_cur < f_best) {
      best = cur;
      f_best = f_cur;
    }
  }
  rep.factors = std::move(best);
  finish(rep, op, b, c, t0);
  return rep;
}

ComplexMatrix FirstRowEstimate::stacked() const {
  detail::require(!blocks.empty(), "FirstRowEstimate: no blocks");
  const Index n = blocks.front().rows();
  ComplexMatrix out(n, n * static_cast<Index>(blocks.size()));
  for (std::size_t l = 0; l < blocks.size(); ++l) out.middleCols(static_cast<Index>(l) * n, n) = blocks[l];
  return out;
}

namespace {

void check_row_inputs(const std::vector<ComplexMatrix>& obs, const std::vector<ComplexVector>& b, Index n) {
  detail::require(n >= 1, "first-row solver: N must be positive");
  detail::require(!obs.empty(), "first-row solver: no observables");
  detail::require(static_cast<Index>(b.size()) == n, "first-row solver: expected " + std::to_string(n) +
                                                         " measurement blocks, got " + std::to_string(b.size()));
  for (const auto& o : obs)
    detail::require(o.rows() == n && o.cols() == n, "first-row solver: observables must be N x N");
  for (const auto& v : b)
    detail::require(v.size() == static_cast<Index>(obs.size()),
                    "first-row solver: every block needs one value per observable");
}

ComplexVector concat(const std::vector<ComplexVector>& b, const std::vector<Index>& which) {
  const Index m_o = b.front().size();
  ComplexVector out(m_o * static_cast<Index>(which.size()));
  for (std::size_t j = 0; j < which.size(); ++j) out.segment(static_cast<Index>(j) * m_o, m_o) = b[which[j]];
  return out;
}

SolverConfig with_rank(SolverConfig c, Index r) {
  c.rank = r;
  return c;
}

}  // namespace

FirstRowEstimate solve_first_row_parallel(const std::vector<ComplexMatrix>& observables,
                                          const std::vector<ComplexVector>& b_blocks, Index n,
                                          const SolverConfig& config) {
  check_row_inputs(observables, b_blocks, n);
  config.validate();
  const StackedBlockSensing op(observables, 1);
  const SolverConfig base = with_rank(config, std::min(config.rank, n));

  std::vector<SolveReport> reports(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::atomic<Index> next{0};
  auto worker = [&] {
    for (Index l = next++; l < n; l = next++) {
      try {
        SolverConfig c = base;
        c.seed = derive_seed(config.seed, static_cast<std::uint64_t>(l));
        c.observer = nullptr;
        reports[static_cast<std::size_t>(l)] = nesterov_als_solve(op, b_blocks[static_cast<std::size_t>(l)], c);
      } catch (...) {
        errors[static_cast<std::size_t>(l)] = std::current_exception();
      }
    }
  };
  const int workers = static_cast<int>(std::min<Index>(config.threads, n));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (Index l = 0; l < n; ++l) {
    if (!errors[static_cast<std::size_t>(l)]) continue;
    const std::string where = "block " + std::to_string(l + 1) + ": ";
    try {
      std::rethrow_exception(errors[static_cast<std::size_t>(l)]);
    } catch (const DivergenceError& e) {
      throw DivergenceError(where + e.what());
    } catch (const NumericalError& e) {
      throw NumericalError(where + e.what());
    }
  }

  FirstRowEstimate est;
  for (const auto& rep : reports) {
    est.blocks.push_back(rep.factors.product());
    est.iterations += rep.iterations;
    est.restarts += rep.restarts;
    est.final_loss += rep.final_loss / static_cast<double>(n);
  }
  return est;
}

FirstRowEstimate solve_first_row_joint(const std::vector<ComplexMatrix>& observables,
                                       const std::vector<ComplexVector>& b_blocks, Index n,
                                       const SolverConfig& config) {
  std::vector<Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Index{0});
  check_row_inputs(observables, b_blocks, n);
  const StackedBlockSensing op(observables, n);
  const SolveReport rep = nesterov_als_solve(op, concat(b_blocks, all), config);
  const ComplexMatrix x = rep.factors.product();

  FirstRowEstimate est;
  for (Index l = 0; l < n; ++l) est.blocks.push_back(x.middleCols(l * n, n));
  est.subset = std::move(all);
  est.iterations = rep.iterations;
  est.restarts = rep.restarts;
  est.final_loss = rep.final_loss;
  return est;
}

std::vector<Index> sample_subset(Index n, double subset_ratio, Index anchor, std::uint64_t seed) {
  if (!(subset_ratio > 0 && subset_ratio <= 1)) throw ConfigError("subset_ratio must lie in (0, 1]");
  detail::require(anchor >= 0 && anchor < n, "sample_subset: anchor out of range");
  const auto size = std::max<Index>(1, static_cast<Index>(std::ceil(subset_ratio * static_cast<double>(n) - 1e-9)));
  std::vector<Index> others;
  for (Index l = 0; l < n; ++l)
    if (l != anchor) others.push_back(l);
  Rng rng(seed);
  std::shuffle(others.begin(), others.end(), rng);
  std::vector<Index> subset{anchor};
  subset.insert(subset.end(), others.begin(), others.begin() + (size - 1));
  std::sort(subset.begin(), subset.end());
  return subset;
}

FirstRowEstimate solve_first_row_subset(const std::vector<ComplexMatrix>& observables,
                                        const std::vector<ComplexVector>& b_blocks, Index n, double subset_ratio,
                                        const SolverConfig& config, Index anchor) {
  check_row_inputs(observables, b_blocks, n);
  const std::vector<Index> subset = sample_subset(n, subset_ratio, anchor, derive_seed(config.seed, 0x5b5e7ULL));
  const auto p = static_cast<Index>(subset.size());
  const StackedBlockSensing op(observables, p);
  const SolveReport rep = nesterov_als_solve(op, concat(b_blocks, subset), config);

  FirstRowEstimate est;
  est.blocks.assign(static_cast<std::size_t>(n), ComplexMatrix());
  const ComplexMatrix& u = rep.factors.left;
  // slice the full product, as the joint solver does, so ratio 1 matches it bit for bit
  const ComplexMatrix x = rep.factors.product();
  for (Index j = 0; j < p; ++j)
    est.blocks[static_cast<std::size_t>(subset[static_cast<std::size_t>(j)])] = x.middleCols(j * n, n);

  const StackedBlockSensing single(observables, 1);
  for (Index l = 0; l < n; ++l) {
    if (std::binary_search(subset.begin(), subset.end(), l)) continue;
    const ComplexMatrix v = single.solve_right(u, b_blocks[static_cast<std::size_t>(l)], config.ls_method);
    est.blocks[static_cast<std::size_t>(l)] = u * v.adjoint();
  }
  est.subset = subset;
  est.iterations = rep.iterations;
  est.restarts = rep.restarts;
  est.final_loss = rep.final_loss;
  return est;
}

}  // namespace qsl
