// Acceptance checks. Usage: acceptance <criterion 1..10>. Prints one PASS/FAIL
// line for the criterion (plus INFO lines with the measured numbers) and exits
// nonzero on failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "qsl/als.hpp"
#include "qsl/harness.hpp"
#include "qsl/measurement.hpp"
#include "qsl/reconstruct.hpp"
#include "qsl/reshape.hpp"
#include "qsl/superop.hpp"

using namespace qsl;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

void info(const std::string& s) { std::printf("INFO %s\n", s.c_str()); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double rel(const ComplexMatrix& a, const ComplexMatrix& b) { return (a - b).norm() / b.norm(); }

bool same_bits(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::equal(a.data(), a.data() + a.size(), b.data(),
                    [](const Complex& x, const Complex& y) { return x.real() == y.real() && x.imag() == y.imag(); });
}

Index signed_rank(const ComplexMatrix& h, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(h);
  const RealVector ev = eig.eigenvalues().cwiseAbs();
  return (ev.array() > rel_tol * ev.maxCoeff()).count();
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// 1. vec / R / measurement identity on 100 random instances for each N in {2, 3, 4}.
Verdict reshaping() {
  const double tol = 1e-12;
  double worst_vec = 0, worst_inv = 0, worst_iso = 0, worst_kron = 0, worst_meas = 0;
  Rng rng(101);
  for (Index n = 2; n <= 4; ++n)
    for (int t = 0; t < 100; ++t) {
      const ComplexMatrix a = complex_gaussian(n, n, rng), b = complex_gaussian(n, n, rng);
      const Complex hs = (a.adjoint() * b).trace();
      worst_vec = std::max(worst_vec, std::abs(vec(a).dot(vec(b)) - hs) / std::max(1.0, std::abs(hs)));

      const ComplexMatrix big = complex_gaussian(n * n, n * n, rng);
      const ComplexMatrix r = reshape_R(big);
      worst_inv = std::max(worst_inv, rel(reshape_R(r), big));
      worst_iso = std::max(worst_iso, std::abs(r.norm() - big.norm()) / big.norm());

      const ComplexMatrix bb = complex_gaussian(n, n, rng), cc = complex_gaussian(n, n, rng);
      worst_kron = std::max(worst_kron, rel(reshape_R(kron(bb, cc)), vec(cc) * vec(bb).transpose()));

      const Superoperator s = t % 2 ? random_channel(n, 1 + t % n, rng())
                                    : lindblad_canonical(random_lindbladian(n, 1, rng()));
      const ComplexMatrix rho = random_density(n, rng), o = random_observable(n, rng);
      const Complex lhs = hs_inner(apply_superop(s, rho), o);
      const Complex rhs = hs_inner(kron(ComplexMatrix(rho.conjugate()), o), choi_reshape(s).matrix);
      worst_meas = std::max(worst_meas, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
    }
  info("worst vec isometry " + fmt("%.2e", worst_vec) + ", R involution " + fmt("%.2e", worst_inv) +
       ", R isometry " + fmt("%.2e", worst_iso) + ", R(B kron C) " + fmt("%.2e", worst_kron) +
       ", measurement identity " + fmt("%.2e", worst_meas));
  const double worst = std::max({worst_vec, worst_inv, worst_iso, worst_kron, worst_meas});
  return {worst <= tol, "300 instances per identity, worst deviation " + fmt("%.2e", worst) + " <= 1e-12"};
}

// 2. rank of the reshaped Lindbladian equals N_J + 2.
Verdict lindblad_rank() {
  int ok = 0, total = 0;
  for (Index nj = 1; nj <= 3; ++nj)
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Lindbladian l = random_lindbladian(8, nj, 200 + seed);
      const Index rank = signed_rank(choi_reshape(lindblad_canonical(l)).matrix, 1e-8);
      ok += rank == nj + 2;
      ++total;
      if (rank != nj + 2) info("N_J=" + std::to_string(nj) + " seed " + std::to_string(seed) + " rank " +
                               std::to_string(rank));
    }
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " N=8 Lindbladians have rank N_J+2"};
}

// 3. exact first row -> exact full matrix.
Verdict reconstruction() {
  const Index sizes[] = {3, 4, 8};
  double worst = 0;
  for (int i = 0; i < 20; ++i) {
    const Index n = sizes[i % 3], r = 1 + (i / 3) % 3;
    const Index minus = (r > 1 && i % 2) ? 1 : 0;
    const ReshapedMatrix k = haar_low_rank_hermitian(n, r - minus, minus, 300 + static_cast<std::uint64_t>(i));
    std::vector<ComplexMatrix> row;
    for (Index l = 0; l < n; ++l) row.push_back(k.block(0, l));
    worst = std::max(worst, rel(reconstruct_full(row, r).matrix, k.matrix));
  }
  return {worst <= 1e-10, "20 Haar truths, worst relative error " + fmt("%.2e", worst) + " <= 1e-10"};
}

// 4. noiseless recovery-rate sweep for the N^2 strategy.
Verdict recovery_threshold() {
  ExperimentConfig c;
  c.name = "recovery_threshold";
  c.task = TaskKind::channel;
  c.n = 4;
  c.kraus_rank = 2;
  c.design = DesignKind::random_pairs;
  c.source = ObservableSource::random;
  c.strategy = Strategy::als_n2;
  c.sweep = {32, 64, 96, 128, 160, 192, 224, 256};
  c.trials = 20;
  c.sigma = 0;
  c.master_seed = 4;
  const ExperimentResult r = run_experiment(c);
  Index first_full = -1;
  bool tail_ok = true;
  std::string rates;
  for (const auto& p : r.points) {
    rates += " M=" + std::to_string(p.m) + ":" + fmt("%.2f", p.recovery_rate);
    if (first_full < 0 && p.recovery_rate == 1.0) first_full = p.m;
    if (first_full >= 0 && p.recovery_rate < 0.9) tail_ok = false;
  }
  info("recovery rates" + rates);
  const bool pass = first_full > 0 && first_full <= 256 && tail_ok;
  return {pass, "rate reaches 1.0 at M=" + std::to_string(first_full) + " and stays >= 0.9 afterwards: " +
                    (tail_ok ? "yes" : "no")};
}

// 5. Table 1 at N = 8, M_O = 50, sigma = 1e-4.
struct TableRow {
  double error;
  double time;
};

std::map<Strategy, TableRow> table_one(double observable_norm, Index trials) {
  std::map<Strategy, TableRow> out;
  for (Strategy s : {Strategy::als_n2, Strategy::als_p, Strategy::als_n, Strategy::als_i}) {
    ExperimentConfig c;
    c.name = "table1";
    c.task = TaskKind::channel;
    c.n = 8;
    c.kraus_rank = 3;
    c.source = ObservableSource::random;
    c.observable_norm = observable_norm;
    c.sigma = 1e-4;
    c.strategy = s;
    c.subset_ratio = 0.4;
    c.trials = trials;
    c.master_seed = 5;
    if (s == Strategy::als_n2) {
      c.design = DesignKind::random_pairs;
      c.sweep = {(3 * 8 - 2) * 50};  // same number of state preparations as the blockwise design
    } else {
      c.design = DesignKind::blockwise;
      c.sweep = {50};
    }
    const ExperimentResult r = run_experiment(c);
    out[s] = {r.points[0].mean_error, r.points[0].mean_time};
  }
  return out;
}

Verdict table1() {
  const std::map<Strategy, double> paper{{Strategy::als_n2, 5.86e-4},
                                         {Strategy::als_p, 1.30e-3},
                                         {Strategy::als_n, 9.32e-4},
                                         {Strategy::als_i, 1.04e-3}};
  // Observables with an O(1) spectrum (Frobenius norm sqrt(N)), the normalisation of the
  // reference experiment; the unit-Frobenius default is reported below for comparison.
  const auto rows = table_one(std::sqrt(8.0), 10);
  bool pass = true;
  std::string detail;
  for (const auto& [s, ref] : paper) {
    const double e = rows.at(s).error;
    const bool ok = e <= 3 * ref && e >= ref / 3;
    pass = pass && ok;
    info(to_string(s) + " mean error " + fmt("%.3e", e) + " (reference " + fmt("%.2e", ref) + ", ratio " +
         fmt("%.2f", e / ref) + ") mean time " + fmt("%.4f", rows.at(s).time) + " s");
    detail += to_string(s) + "=" + fmt("%.2e", e) + " ";
  }
  const double speedup = rows.at(Strategy::als_n2).time / rows.at(Strategy::als_i).time;
  pass = pass && speedup >= 10;
  info("ALS-I is " + fmt("%.0f", speedup) + "x faster than ALS-N2");

  const auto unit = table_one(1.0, 10);
  for (const auto& [s, ref] : paper)
    info("unit-Frobenius observables: " + to_string(s) + " mean error " + fmt("%.3e", unit.at(s).error) +
         " (ratio " + fmt("%.2f", unit.at(s).error / ref) + ")");
  return {pass, "errors within 3x of the reference (" + detail + "), speedup " + fmt("%.0f", speedup) + "x >= 10x"};
}

// 6. noisy error decay for an N = 25 Lindbladian.
struct SlopeFit {
  std::vector<double> x, y;
  double all = 0, tail = 0;
};

SlopeFit noisy_sweep(double observable_norm) {
  ExperimentConfig c;
  c.name = "noisy_slope";
  c.task = TaskKind::lindbladian;
  c.n = 25;
  c.n_jumps = 2;
  c.design = DesignKind::blockwise;
  c.source = ObservableSource::random;
  c.observable_norm = observable_norm;
  c.sigma = 1e-3;
  c.strategy = Strategy::als_n;
  c.sweep = {120, 200, 320, 480, 640};
  c.trials = 5;
  c.master_seed = 6;
  const ExperimentResult r = run_experiment(c);
  SlopeFit f;
  for (const auto& p : r.points) {
    f.x.push_back(std::log10(static_cast<double>(p.m)));
    f.y.push_back(std::log10(p.mean_error));
    info("||O||_F=" + fmt("%.3g", observable_norm) + " M_O=" + std::to_string(p.m) + " mean error " +
         fmt("%.3e", p.mean_error) + " +- " + fmt("%.1e", p.std_error));
  }
  f.all = slope(f.x, f.y);
  f.tail = slope({f.x.begin() + 1, f.x.end()}, {f.y.begin() + 1, f.y.end()});
  return f;
}

Verdict noisy_slope() {
  const SlopeFit main = noisy_sweep(5.0);  // sqrt(N), as in criterion 5
  info("slope over M_O >= 200: " + fmt("%.3f", main.tail));
  const double dof = 4.0 * (25 + 625 - 4);
  info("complex unknowns " + fmt("%.0f", dof) + " vs 25*M_O = 3000 complex values at M_O=120");
  const SlopeFit unit = noisy_sweep(1.0);
  info("unit-Frobenius observables: slope " + fmt("%.3f", unit.all) + ", over M_O >= 200 " + fmt("%.3f", unit.tail));
  return {main.all >= -0.9 && main.all <= -0.45, "fitted slope " + fmt("%.3f", main.all) + " in [-0.9, -0.45]"};
}

// 7. empirical M_O threshold for >= 80% noiseless recovery.
Index threshold(Index n, Index r, const std::vector<Index>& grid) {
  ExperimentConfig c;
  c.name = "threshold";
  c.task = TaskKind::channel;
  c.n = n;
  c.kraus_rank = r;
  c.design = DesignKind::blockwise;
  c.source = ObservableSource::random;
  c.strategy = Strategy::als_i;
  c.subset_ratio = 0.5;
  c.sigma = 0;
  c.trials = 10;
  c.master_seed = 7;
  c.record_timing = false;
  std::string rates;
  Index found = -1;
  for (Index m : grid) {
    c.sweep = {m};
    const ExperimentResult res = run_experiment(c);
    rates += " " + std::to_string(m) + ":" + fmt("%.1f", res.points[0].recovery_rate);
    if (res.points[0].recovery_rate >= 0.8) {
      found = m;
      break;
    }
  }
  info("N=" + std::to_string(n) + " r=" + std::to_string(r) + " recovery rates" + rates);
  return found;
}

std::vector<Index> grid(Index lo, Index hi, Index step) {
  std::vector<Index> g;
  for (Index m = lo; m <= hi; m += step) g.push_back(m);
  return g;
}

Verdict count_scaling() {
  const Index n4 = threshold(4, 2, grid(2, 40, 1));
  const Index n8 = threshold(8, 2, grid(4, 96, 2));
  const Index n8r4 = threshold(8, 4, grid(8, 160, 2));
  const bool pass = n4 > 0 && n8 > 0 && n8r4 > 0 && n8 <= 3 * n4 && n8r4 <= 3 * n8;
  return {pass, "M_O*(N=4,r=2)=" + std::to_string(n4) + ", M_O*(N=8,r=2)=" + std::to_string(n8) +
                    ", M_O*(N=8,r=4)=" + std::to_string(n8r4) + "; need N-ratio and r-ratio <= 3"};
}

// 8. solver invariants.
Verdict solver_invariants() {
  bool monotone = true;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Index d1 = 3 + seed % 3, d2 = 3 + (seed / 3) % 3, r = 1 + seed % 2;
    const Index m = 2 * r * (d1 + d2) + 5 + seed % 7;
    const DenseSensing op(d1, d2, complex_gaussian(d1 * d2, m, seed));
    const ComplexVector b = op.apply(random_factors(d1, d2, r, seed + 1000).product()) +
                            0.05 * complex_gaussian(m, 1, seed + 2000).col(0);
    SolverConfig c;
    c.rank = r;
    c.max_iter = 60;
    c.seed = seed;
    const SolveReport rep = als_solve(op, b, c);
    for (std::size_t i = 1; i < rep.loss_trace.size(); ++i)
      monotone = monotone && rep.loss_trace[i] <= rep.loss_trace[i - 1] * (1 + 1e-12);
  }

  // restarts: the step after a triggered restart is the plain sweep of the reverted iterate
  Index restarts_checked = 0;
  bool restart_ok = true;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const DenseSensing op(5, 5, complex_gaussian(25, 40, seed));
    const ComplexVector b = op.apply(random_factors(5, 5, 2, seed + 1).product()) +
                            0.1 * complex_gaussian(40, 1, seed + 2).col(0);
    std::vector<FactorPair> bases, results;
    std::vector<bool> restarted;
    SolverConfig c;
    c.rank = 2;
    c.seed = seed;
    c.max_iter = 80;
    c.observer = [&](const IterationEvent& e) {
      bases.push_back(*e.base);
      results.push_back(*e.result);
      restarted.push_back(e.restarted);
    };
    nesterov_als_solve(op, b, c);
    FactorPair prev = random_factors(5, 5, 2, seed), cur = results[0];
    for (std::size_t t = 1; t < results.size(); ++t) {
      if (restarted[t]) {
        ++restarts_checked;
        cur = prev;  // the reverted iterate
        const FactorPair plain = als_sweep(op, b, cur, c.ls_method);
        restart_ok = restart_ok && same_bits(bases[t].left, cur.left) && same_bits(bases[t].right, cur.right) &&
                     same_bits(plain.left, results[t].left) && same_bits(plain.right, results[t].right);
      }
      prev = cur;
      cur = results[t];
    }
  }
  restart_ok = restart_ok && restarts_checked > 0;

  // common scaling of design and data
  const DenseSensing op(4, 4, complex_gaussian(16, 50, 7));
  const ComplexVector b = op.apply(random_factors(4, 4, 2, 8).product()) + 1e-3 * complex_gaussian(50, 1, 9).col(0);
  auto products = [&](const SensingOperator& o, const ComplexVector& v) {
    std::vector<ComplexMatrix> out;
    SolverConfig c;
    c.rank = 2;
    c.seed = 10;
    c.max_iter = 25;
    c.observer = [&](const IterationEvent& e) { out.push_back(e.result->product()); };
    als_solve(o, v, c);
    return out;
  };
  const auto ref = products(op, b);
  bool scale_bits = true;
  double scale3 = 0;
  const auto two = products(op.scaled(2.0), 2.0 * b);
  const auto three = products(op.scaled(3.0), 3.0 * b);
  scale_bits = two.size() == ref.size() && three.size() == ref.size();
  for (std::size_t t = 0; scale_bits && t < ref.size(); ++t) {
    scale_bits = same_bits(two[t], ref[t]);
    scale3 = std::max(scale3, rel(three[t], ref[t]));
  }

  // subset at ratio 1 equals the joint solver
  const Superoperator s = random_channel(6, 2, 31);
  const SensingDesign d = build_blockwise_design(6, 40, ObservableSource::random, 0, 32);
  const MeasurementSet m = simulate_measurements(s, d, 1e-3, NoiseMode::synthetic, 33);
  SolverConfig c;
  c.rank = 2;
  c.seed = 34;
  const auto joint = solve_first_row_joint(d.observables, m.blocks, 6, c);
  const auto sub = solve_first_row_subset(d.observables, m.blocks, 6, 1.0, c);
  bool subset_ok = true;
  for (std::size_t l = 0; l < joint.blocks.size(); ++l) subset_ok = subset_ok && same_bits(sub.blocks[l], joint.blocks[l]);

  info(std::string("monotone: ") + (monotone ? "yes" : "no") + "; restarts checked " +
       std::to_string(restarts_checked) + ": " + (restart_ok ? "bitwise" : "mismatch") +
       "; scaling c=2 bitwise: " + (scale_bits ? "yes" : "no") + ", c=3 deviation " + fmt("%.1e", scale3) +
       "; subset(1) == joint: " + (subset_ok ? "yes" : "no"));
  const bool pass = monotone && restart_ok && scale_bits && scale3 <= 1e-10 && subset_ok;
  return {pass, "monotonicity, restart semantics, scale invariance and subset/joint equivalence"};
}

// 9. RIP probe.
Verdict rip_probe() {
  const SensingDesign full = build_blockwise_design(4, 16, ObservableSource::pauli_basis, 0, 0);
  const RipEstimate e = empirical_rip_probe(full, 2, 200, 1);
  const bool complete_ok = e.delta <= 1e-12 && std::abs(e.c - 1.0 / 16) <= 1e-12;
  info("complete basis: delta " + fmt("%.2e", e.delta) + ", c " + fmt("%.6f", e.c) + " (1/M = 0.0625)");

  const std::vector<Index> ms{8, 16, 32, 64, 128};
  int monotone_votes = 0;
  std::vector<double> mean(ms.size(), 0.0);
  for (int rep = 0; rep < 10; ++rep) {
    double prev = INFINITY;
    bool mono = true;
    for (std::size_t i = 0; i < ms.size(); ++i) {
      const SensingDesign d = build_blockwise_design(4, ms[i], ObservableSource::random, 0, 900 + rep * 10 + i);
      const double delta = empirical_rip_probe(d, 1, 200, 50 + rep).delta;
      mean[i] += delta / 10;
      mono = mono && delta <= prev;
      prev = delta;
    }
    monotone_votes += mono;
  }
  bool mean_mono = true;
  std::string trace;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    trace += " M=" + std::to_string(ms[i]) + ":" + fmt("%.3f", mean[i]);
    if (i > 0) mean_mono = mean_mono && mean[i] <= mean[i - 1];
  }
  info("mean sampled delta" + trace + "; " + std::to_string(monotone_votes) + "/10 designs non-increasing");
  return {complete_ok && mean_mono && monotone_votes > 5,
          "complete basis delta=0, c=1/M; sampled delta non-increasing in M (mean and majority)"};
}

Verdict out_of_scope() {
  info("not reproducible at desk scale: Table 1-2 rows at N = 64 (hours of runtime and memory-heavy)");
  info("not reproducible at desk scale: diamond-norm columns (needs an SDP solver, out of scope)");
  info("not reproducible at desk scale: theoretical constants of the recovery theorems (asymptotic)");
  return {true, "out-of-scope items stated; covered by the property-based criteria 1-9"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: acceptance <criterion 1..10>\n");
    return 2;
  }
  const int which = std::atoi(argv[1]);
  const std::map<int, std::function<Verdict()>> checks{
      {1, reshaping},       {2, lindblad_rank},     {3, reconstruction}, {4, recovery_threshold},
      {5, table1},          {6, noisy_slope},       {7, count_scaling},  {8, solver_invariants},
      {9, rip_probe},       {10, out_of_scope}};
  const auto it = checks.find(which);
  if (it == checks.end()) {
    std::fprintf(stderr, "unknown criterion %s\n", argv[1]);
    return 2;
  }
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = it->second();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s criterion %d: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", which, v.detail.c_str(), secs);
  return v.pass ? 0 : 1;
}
