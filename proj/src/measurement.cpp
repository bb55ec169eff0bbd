#include "qsl/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qsl/reshape.hpp"
#include "qsl/sensing.hpp"
#include "qsl/superop.hpp"

namespace qsl {

namespace {

const Complex kI(0, 1);

void require_hermitian(const ComplexMatrix& a, const char* what) {
  const double scale = std::max(1.0, a.norm());
  if ((a - a.adjoint()).norm() > 1e-12 * scale) throw DimensionError(std::string(what) + " is not Hermitian");
}

}  // namespace

ComplexMatrix pauli(int index) {
  ComplexMatrix p(2, 2);
  switch (index) {
    case 0: p << 1, 0, 0, 1; break;
    case 1: p << 0, 1, 1, 0; break;
    case 2: p << 0, -kI, kI, 0; break;
    case 3: p << 1, 0, 0, -1; break;
    default: throw DimensionError("pauli: index " + std::to_string(index) + " outside 0..3");
  }
  return p;
}

ComplexMatrix pauli_string(const std::vector<int>& indices, bool scaled) {
  detail::require(!indices.empty(), "pauli_string: need at least one qubit");
  ComplexMatrix out = pauli(indices.front());
  for (std::size_t q = 1; q < indices.size(); ++q) out = kron(out, pauli(indices[q]));
  if (scaled) out /= std::sqrt(static_cast<double>(out.rows()));
  return out;
}

std::vector<ComplexMatrix> sample_pauli(int n_qubits, Index count, bool scaled, std::uint64_t seed) {
  detail::require(n_qubits >= 1, "sample_pauli: n_qubits must be >= 1");
  detail::require(count >= 0, "sample_pauli: negative count");
  Rng rng(seed);
  std::uniform_int_distribution<int> pick(0, 3);
  std::vector<ComplexMatrix> out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<int> idx(static_cast<std::size_t>(n_qubits));
  for (Index m = 0; m < count; ++m) {
    for (auto& i : idx) i = pick(rng);
    out.push_back(pauli_string(idx, scaled));
  }
  return out;
}

std::vector<ComplexMatrix> pauli_basis(int n_qubits, bool scaled) {
  detail::require(n_qubits >= 1 && n_qubits <= 8, "pauli_basis: n_qubits must be in 1..8");
  const long total = 1L << (2 * n_qubits);
  std::vector<ComplexMatrix> out;
  out.reserve(static_cast<std::size_t>(total));
  std::vector<int> idx(static_cast<std::size_t>(n_qubits));
  for (long code = 0; code < total; ++code) {
    long c = code;
    for (int q = n_qubits - 1; q >= 0; --q) {
      idx[static_cast<std::size_t>(q)] = static_cast<int>(c & 3);
      c >>= 2;
    }
    out.push_back(pauli_string(idx, scaled));
  }
  return out;
}

int qubit_count(Index n) {
  if (n < 2) return -1;
  int q = 0;
  Index v = 1;
  while (v < n) {
    v <<= 1;
    ++q;
  }
  return v == n ? q : -1;
}

Index SensingDesign::size() const {
  return kind == DesignKind::random_pairs ? static_cast<Index>(pairs.size()) : static_cast<Index>(observables.size());
}

std::string SensingDesign::id() const {
  std::ostringstream os;
  os << to_string(kind) << ":n=" << dim_n << ":m=" << size() << ":source=" << to_string(source);
  if (kind == DesignKind::blockwise) os << ":row=" << row + 1;
  if (observable_norm != 1.0) os << ":onorm=" << observable_norm;
  os << ":seed=" << seed;
  return os.str();
}

void SensingDesign::validate() const {
  detail::require(dim_n >= 1, "SensingDesign: dimension must be positive");
  auto check = [this](const ComplexMatrix& a, const char* what) {
    detail::require(a.rows() == dim_n && a.cols() == dim_n,
                    std::string("SensingDesign: ") + what + " must be " + std::to_string(dim_n) + "x" +
                        std::to_string(dim_n));
  };
  if (kind == DesignKind::random_pairs) {
    detail::require(!pairs.empty(), "SensingDesign: no measurement pairs");
    for (const auto& p : pairs) {
      check(p.rho0, "initial state");
      check(p.obs, "observable");
    }
  } else {
    detail::require(!observables.empty(), "SensingDesign: no observables");
    detail::require(row >= 0 && row < dim_n, "SensingDesign: row index " + std::to_string(row + 1) +
                                                 " outside [1, " + std::to_string(dim_n) + "]");
    for (const auto& o : observables) {
      check(o, "observable");
      require_hermitian(o, "SensingDesign: observable");
    }
  }
}

namespace {

std::vector<ComplexMatrix> draw_observables(Index n, Index count, ObservableSource source, Rng& rng,
                                            std::uint64_t seed) {
  std::vector<ComplexMatrix> out;
  switch (source) {
    case ObservableSource::pauli: {
      const int q = qubit_count(n);
      if (q < 0) throw ConfigError("Pauli observables need N to be a power of two, got N=" + std::to_string(n));
      return sample_pauli(q, count, true, seed);
    }
    case ObservableSource::pauli_basis: {
      const int q = qubit_count(n);
      if (q < 0) throw ConfigError("Pauli observables need N to be a power of two, got N=" + std::to_string(n));
      if (count != n * n)
        throw ConfigError("pauli_basis source requires exactly N^2 = " + std::to_string(n * n) + " observables");
      return pauli_basis(q, true);
    }
    case ObservableSource::random:
      out.reserve(static_cast<std::size_t>(count));
      for (Index m = 0; m < count; ++m) out.push_back(random_observable(n, rng));
      return out;
  }
  return out;
}

}  // namespace

namespace {

void check_norm(double norm) {
  if (!(norm > 0) || !std::isfinite(norm)) throw ConfigError("observable_norm must be positive");
}

}  // namespace

SensingDesign build_random_design(Index n, Index m, ObservableSource source, std::uint64_t seed,
                                  double observable_norm) {
  check_norm(observable_norm);
  if (n < 1) throw ConfigError("build_random_design: N must be positive");
  if (m < 1) throw ConfigError("build_random_design: M must be positive");
  SensingDesign d;
  d.kind = DesignKind::random_pairs;
  d.source = source;
  d.dim_n = n;
  d.seed = seed;
  if (source == ObservableSource::random) d.observable_norm = observable_norm;
  d.pairs.reserve(static_cast<std::size_t>(m));
  switch (source) {
    case ObservableSource::pauli: {
      const int q = qubit_count(n);
      if (q < 0) throw ConfigError("Pauli designs need N to be a power of two, got N=" + std::to_string(n));
      const auto states = sample_pauli(q, m, true, derive_seed(seed, 0));
      const auto obs = sample_pauli(q, m, true, derive_seed(seed, 1));
      for (Index i = 0; i < m; ++i) d.pairs.push_back({states[i], obs[i]});
      break;
    }
    case ObservableSource::pauli_basis: {
      const int q = qubit_count(n);
      if (q < 0) throw ConfigError("Pauli designs need N to be a power of two, got N=" + std::to_string(n));
      if (m != n * n * n * n)
        throw ConfigError("pauli_basis random design requires M = N^4 = " + std::to_string(n * n * n * n));
      const auto basis = pauli_basis(q, true);
      for (const auto& s : basis)
        for (const auto& o : basis) d.pairs.push_back({s, o});
      break;
    }
    case ObservableSource::random: {
      Rng rng(seed);
      for (Index i = 0; i < m; ++i) {
        ComplexMatrix rho = random_density(n, rng);
        ComplexMatrix o = observable_norm * random_observable(n, rng);
        d.pairs.push_back({std::move(rho), std::move(o)});
      }
      break;
    }
  }
  return d;
}

SensingDesign build_blockwise_design(Index n, Index m_o, ObservableSource source, Index row, std::uint64_t seed,
                                     double observable_norm) {
  check_norm(observable_norm);
  if (n < 1) throw ConfigError("build_blockwise_design: N must be positive");
  if (m_o < 1) throw ConfigError("build_blockwise_design: M_O must be positive");
  if (row < 0 || row >= n)
    throw ConfigError("build_blockwise_design: row index " + std::to_string(row + 1) + " outside [1, " +
                      std::to_string(n) + "]");
  SensingDesign d;
  d.kind = DesignKind::blockwise;
  d.source = source;
  d.dim_n = n;
  d.row = row;
  d.seed = seed;
  Rng rng(seed);
  d.observables = draw_observables(n, m_o, source, rng, seed);
  if (source == ObservableSource::random) {
    d.observable_norm = observable_norm;
    for (auto& o : d.observables) o *= observable_norm;
  }
  return d;
}

ComplexMatrix matrix_unit(Index n, Index r, Index c) {
  detail::require(r >= 0 && r < n && c >= 0 && c < n, "matrix_unit: index out of range");
  ComplexMatrix e = ComplexMatrix::Zero(n, n);
  e(r, c) = 1;
  return e;
}

ComplexMatrix StateCombination::combine() const {
  ComplexMatrix out = coeffs[0] * states[0];
  for (std::size_t i = 1; i < 4; ++i) out += coeffs[i] * states[i];
  return out;
}

StateCombination synth_state_combination(Index k, Index l, Index n) {
  detail::require(k >= 0 && k < n && l >= 0 && l < n, "synth_state_combination: index out of range");
  detail::require(k != l, "synth_state_combination: k == l, use E_kk directly");
  const ComplexMatrix ekl = matrix_unit(n, k, l), elk = matrix_unit(n, l, k);
  const ComplexMatrix ekk = matrix_unit(n, k, k), ell = matrix_unit(n, l, l);
  StateCombination sc;
  sc.states[0] = 0.5 * (ekl + elk + ekk + ell);
  sc.states[1] = 0.5 * (kI * ekl - kI * elk + ekk + ell);
  sc.states[2] = ekk;
  sc.states[3] = ell;
  const Complex half_one_plus_i(0.5, 0.5);
  sc.coeffs = {Complex(1, 0), kI, -half_one_plus_i, -half_one_plus_i};
  return sc;
}

namespace {

// Real expectation values tr[S(rho)^dagger O^m] for every observable, as a vector.
RealVector raw_expectations(const Superoperator& s, const ComplexMatrix& rho, const ComplexMatrix& table) {
  const ComplexVector out = vec(apply_superop(s, rho));
  // tr[X^dagger O] = conj(vec X)^T vec O = conj(vec(X)^T conj(vec O))
  return (table.transpose() * out).conjugate().real();
}

}  // namespace

MeasurementSet simulate_measurements(const Superoperator& s, const SensingDesign& d, double sigma,
                                     NoiseMode mode, std::uint64_t seed) {
  if (!(sigma >= 0) || !std::isfinite(sigma)) throw ConfigError("simulate_measurements: sigma must be >= 0");
  s.validate();
  d.validate();
  if (s.dim_n != d.dim_n)
    throw DimensionError("simulate_measurements: superoperator is " + std::to_string(s.dim_n) +
                         "-dimensional but the design is " + std::to_string(d.dim_n) + "-dimensional");
  const Index n = d.dim_n;
  MeasurementSet ms;
  ms.design_ref = d.id();
  ms.kind = d.kind;
  ms.sigma = sigma;
  ms.noise_mode = mode;
  ms.seed = seed;

  if (d.kind == DesignKind::random_pairs) {
    const Index m = d.size();
    ms.values.resize(m);
    Rng rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (Index i = 0; i < m; ++i) {
      const auto& p = d.pairs[static_cast<std::size_t>(i)];
      const Complex v = hs_inner(apply_superop(s, p.rho0), p.obs);
      ms.values(i) = v.real() + sigma * noise(rng);
    }
    return ms;
  }

  const Index m_o = d.size();
  const Index k = d.row;
  ComplexMatrix table(n * n, m_o);
  for (Index m = 0; m < m_o; ++m) table.col(m) = vec(d.observables[static_cast<std::size_t>(m)]).conjugate();

  ms.blocks.assign(static_cast<std::size_t>(n), ComplexVector());
  if (mode == NoiseMode::synthetic) {
    for (Index l = 0; l < n; ++l) {
      // b_kl = tr[S(E_lk)^dagger O]: evaluate S on E_lk by linearity
      const ComplexVector x = vec(apply_superop(s, matrix_unit(n, l, k)));
      ComplexVector b = (table.transpose() * x).conjugate();
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(l)));
      std::normal_distribution<double> noise(0.0, 1.0);
      for (Index m = 0; m < m_o; ++m) {
        const double re = noise(rng);
        const double im = noise(rng);
        b(m) += sigma * Complex(re, im);
      }
      ms.blocks[static_cast<std::size_t>(l)] = std::move(b);
    }
    return ms;
  }

  // Physical mode: 3N - 2 prepared states, one noisy real reading per observable.
  // The states E_jj (j = 0..N-1) use streams j; rho^{kl} and rho'^{kl} use N + 2l and N + 2l + 1.
  auto noisy = [&](const ComplexMatrix& rho, std::uint64_t stream) {
    RealVector r = raw_expectations(s, rho, table);
    Rng rng(derive_seed(seed, stream));
    std::normal_distribution<double> noise(0.0, 1.0);
    for (Index m = 0; m < m_o; ++m) r(m) += sigma * noise(rng);
    return r;
  };
  const RealVector r_kk = noisy(matrix_unit(n, k, k), static_cast<std::uint64_t>(k));
  for (Index l = 0; l < n; ++l) {
    if (l == k) {
      ms.blocks[static_cast<std::size_t>(l)] = r_kk.cast<Complex>();
      continue;
    }
    const StateCombination sc = synth_state_combination(k, l, n);
    const auto ul = static_cast<std::uint64_t>(l);
    const RealVector r0 = noisy(sc.states[0], static_cast<std::uint64_t>(n) + 2 * ul);
    const RealVector r1 = noisy(sc.states[1], static_cast<std::uint64_t>(n) + 2 * ul + 1);
    const RealVector r_ll = noisy(sc.states[3], ul);
    // tr[(sum c_j S(rho_j))^dagger O] = sum conj(c_j) tr[S(rho_j)^dagger O]
    ComplexVector b = std::conj(sc.coeffs[0]) * r0.cast<Complex>() + std::conj(sc.coeffs[1]) * r1.cast<Complex>() +
                      std::conj(sc.coeffs[2]) * r_kk.cast<Complex>() + std::conj(sc.coeffs[3]) * r_ll.cast<Complex>();
    ms.blocks[static_cast<std::size_t>(l)] = std::move(b);
  }
  return ms;
}

RipEstimate empirical_rip_probe(const SensingDesign& d, Index r, Index n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw ConfigError("empirical_rip_probe: n_samples must be >= 1");
  const auto op = make_sensing(d);
  detail::require(r >= 1 && r <= std::min(op->rows(), op->cols()), "empirical_rip_probe: rank out of range");
  const double inv_m = 1.0 / static_cast<double>(op->size());
  Rng rng(seed);
  double c0 = std::numeric_limits<double>::infinity();
  double c1 = 0;
  for (Index t = 0; t < n_samples; ++t) {
    const ComplexMatrix u = complex_gaussian(op->rows(), r, rng);
    const ComplexMatrix v = complex_gaussian(op->cols(), r, rng);
    ComplexMatrix x = u * v.adjoint();
    x /= x.norm();
    const double val = op->apply(x).squaredNorm() * inv_m;
    c0 = std::min(c0, val);
    c1 = std::max(c1, val);
  }
  RipEstimate est;
  est.c0 = c0;
  est.c1 = c1;
  est.c = 0.5 * (c0 + c1);
  est.delta = c1 + c0 > 0 ? (c1 - c0) / (c1 + c0) : 0.0;
  return est;
}

std::string to_string(DesignKind k) { return k == DesignKind::random_pairs ? "random_pairs" : "blockwise"; }

std::string to_string(ObservableSource s) {
  switch (s) {
    case ObservableSource::pauli: return "pauli";
    case ObservableSource::random: return "random";
    case ObservableSource::pauli_basis: return "pauli_basis";
  }
  return "random";
}

std::string to_string(NoiseMode m) { return m == NoiseMode::synthetic ? "synthetic" : "physical"; }

DesignKind parse_design_kind(const std::string& s) {
  if (s == "random_pairs") return DesignKind::random_pairs;
  if (s == "blockwise") return DesignKind::blockwise;
  throw ConfigError("unknown design kind '" + s + "' (expected random_pairs or blockwise)");
}

ObservableSource parse_source(const std::string& s) {
  if (s == "pauli") return ObservableSource::pauli;
  if (s == "random") return ObservableSource::random;
  if (s == "pauli_basis") return ObservableSource::pauli_basis;
  throw ConfigError("unknown observable source '" + s + "' (expected pauli, random or pauli_basis)");
}

NoiseMode parse_noise_mode(const std::string& s) {
  if (s == "synthetic") return NoiseMode::synthetic;
  if (s == "physical") return NoiseMode::physical;
  throw ConfigError("unknown noise mode '" + s + "' (expected synthetic or physical)");
}

}  // namespace qsl
