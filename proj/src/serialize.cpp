#include "qsl/serialize.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cstdio>

#include "qsl/cmx_io.hpp"
#include "qsl/reshape.hpp"

namespace qsl {

namespace fs = std::filesystem;

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

Json parse_json(const std::string& text, const std::string& where) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw IoError(where + ": invalid JSON: " + e.what());
  }
}

Json read_json_file(const fs::path& path) { return parse_json(read_text_file(path), path.string()); }

void write_json_file(const fs::path& path, const Json& j) { write_file_atomic(path, dump_json(j)); }

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
    throw IoError("sha256: digest failed");
  std::string hex;
  hex.reserve(2 * len);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

fs::path payload_path(const fs::path& json_path, const std::string& part) {
  fs::path p = json_path;
  p.replace_extension();
  return p.string() + "." + part + ".cmx";
}

namespace {

template <typename T>
T field(const Json& j, const char* key, const fs::path& where) {
  if (!j.contains(key)) throw IoError(where.string() + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw IoError(where.string() + ": field '" + key + "': " + e.what());
  }
}

ComplexMatrix read_part(const fs::path& json_path, const Json& j, const char* key) {
  const auto name = field<std::string>(j, key, json_path);
  return read_cmx(json_path.parent_path() / name);
}

std::string write_part(const fs::path& json_path, const std::string& part, const ComplexMatrix& m) {
  const fs::path p = payload_path(json_path, part);
  write_cmx(p, m);
  return p.filename().string();
}

ComplexMatrix columns_of_vec(const std::vector<ComplexMatrix>& ms, Index n) {
  ComplexMatrix out(n * n, static_cast<Index>(ms.size()));
  for (std::size_t i = 0; i < ms.size(); ++i) out.col(static_cast<Index>(i)) = ms[i].reshaped();
  return out;
}

std::vector<ComplexMatrix> unvec_columns(const ComplexMatrix& m, Index n, const fs::path& where) {
  if (m.rows() != n * n) throw IoError(where.string() + ": expected " + std::to_string(n * n) + " rows");
  std::vector<ComplexMatrix> out;
  for (Index c = 0; c < m.cols(); ++c) out.push_back(m.col(c).reshaped(n, n));
  return out;
}

}  // namespace

ComplexMatrix hstack(const std::vector<ComplexMatrix>& blocks) {
  if (blocks.empty()) return {};
  const Index r = blocks.front().rows();
  Index cols = 0;
  for (const auto& b : blocks) {
    detail::require(b.rows() == r, "hstack: blocks differ in row count");
    cols += b.cols();
  }
  ComplexMatrix out(r, cols);
  Index c = 0;
  for (const auto& b : blocks) {
    out.middleCols(c, b.cols()) = b;
    c += b.cols();
  }
  return out;
}

std::vector<ComplexMatrix> split_blocks(const ComplexMatrix& row) {
  const Index n = row.rows();
  detail::require(n >= 1 && row.cols() == n * n, "split_blocks: expected an N x N^2 block row, got " +
                                                     std::to_string(row.rows()) + "x" + std::to_string(row.cols()));
  std::vector<ComplexMatrix> out;
  for (Index l = 0; l < n; ++l) out.push_back(row.middleCols(l * n, n));
  return out;
}

void save_superoperator(const fs::path& json_path, const Superoperator& s, const Json& meta) {
  s.validate();
  Json j = meta;
  j["format"] = "qsl.superoperator";
  j["n"] = s.dim_n;
  j["r_plus"] = s.r_plus();
  j["r_minus"] = s.r_minus();
  auto write_ops = [&](const std::vector<ComplexMatrix>& ops, const char* tag) {
    Json names = Json::array();
    for (std::size_t k = 0; k < ops.size(); ++k) names.push_back(write_part(json_path, tag + std::to_string(k), ops[k]));
    return names;
  };
  j["plus_ops"] = write_ops(s.plus_ops, "plus");
  j["minus_ops"] = write_ops(s.minus_ops, "minus");
  j["reshaped"] = write_part(json_path, "reshaped", choi_reshape(s).matrix);
  write_json_file(json_path, j);
}

Superoperator load_superoperator(const fs::path& json_path, Json* meta) {
  const Json j = read_json_file(json_path);
  if (j.value("format", "") != "qsl.superoperator") throw IoError(json_path.string() + ": not a superoperator file");
  Superoperator s;
  s.dim_n = field<Index>(j, "n", json_path);
  auto read_ops = [&](const char* key) {
    std::vector<ComplexMatrix> ops;
    for (const auto& name : field<std::vector<std::string>>(j, key, json_path))
      ops.push_back(read_cmx(json_path.parent_path() / name));
    return ops;
  };
  s.plus_ops = read_ops("plus_ops");
  s.minus_ops = read_ops("minus_ops");
  if (s.r_plus() != field<Index>(j, "r_plus", json_path) || s.r_minus() != field<Index>(j, "r_minus", json_path))
    throw IoError(json_path.string() + ": operator counts do not match the payload");
  try {
    s.validate();
  } catch (const DimensionError& e) {
    throw IoError(json_path.string() + ": " + e.what());
  }
  if (meta) *meta = j;
  return s;
}

ReshapedMatrix load_reshaped(const fs::path& json_path) {
  const Json j = read_json_file(json_path);
  ReshapedMatrix k;
  k.dim_n = field<Index>(j, "n", json_path);
  k.matrix = read_part(json_path, j, "reshaped");
  if (k.matrix.rows() != k.dim_n * k.dim_n || k.matrix.cols() != k.dim_n * k.dim_n)
    throw IoError(json_path.string() + ": reshaped payload has the wrong shape");
  return k;
}

void save_design(const fs::path& json_path, const SensingDesign& d) {
  d.validate();
  Json j;
  j["format"] = "qsl.design";
  j["kind"] = to_string(d.kind);
  j["source"] = to_string(d.source);
  j["n"] = d.dim_n;
  j["m"] = d.size();
  j["seed"] = d.seed;
  j["observable_norm"] = d.observable_norm;
  j["id"] = d.id();
  if (d.kind == DesignKind::random_pairs) {
    std::vector<ComplexMatrix> states, obs;
    for (const auto& p : d.pairs) {
      states.push_back(p.rho0);
      obs.push_back(p.obs);
    }
    j["states"] = write_part(json_path, "states", columns_of_vec(states, d.dim_n));
    j["observables"] = write_part(json_path, "observables", columns_of_vec(obs, d.dim_n));
  } else {
    j["row_index"] = d.row + 1;
    j["observables"] = write_part(json_path, "observables", columns_of_vec(d.observables, d.dim_n));
  }
  write_json_file(json_path, j);
}

SensingDesign load_design(const fs::path& json_path) {
  const Json j = read_json_file(json_path);
  if (j.value("format", "") != "qsl.design") throw IoError(json_path.string() + ": not a design file");
  SensingDesign d;
  d.kind = parse_design_kind(field<std::string>(j, "kind", json_path));
  d.source = parse_source(field<std::string>(j, "source", json_path));
  d.dim_n = field<Index>(j, "n", json_path);
  d.seed = field<std::uint64_t>(j, "seed", json_path);
  d.observable_norm = j.value("observable_norm", 1.0);
  const auto obs = unvec_columns(read_part(json_path, j, "observables"), d.dim_n, json_path);
  if (d.kind == DesignKind::random_pairs) {
    const auto states = unvec_columns(read_part(json_path, j, "states"), d.dim_n, json_path);
    if (states.size() != obs.size()) throw IoError(json_path.string() + ": state and observable counts differ");
    for (std::size_t i = 0; i < obs.size(); ++i) d.pairs.push_back({states[i], obs[i]});
  } else {
    d.row = field<Index>(j, "row_index", json_path) - 1;
    d.observables = obs;
  }
  if (d.size() != field<Index>(j, "m", json_path))
    throw IoError(json_path.string() + ": measurement count does not match the payload");
  d.validate();
  return d;
}

void save_measurements(const fs::path& json_path, const MeasurementSet& m) {
  Json j;
  j["format"] = "qsl.measurements";
  j["design_ref"] = m.design_ref;
  j["kind"] = to_string(m.kind);
  j["sigma"] = m.sigma;
  j["noise_mode"] = to_string(m.noise_mode);
  j["seed"] = m.seed;
  ComplexMatrix payload;
  if (m.kind == DesignKind::random_pairs) {
    payload = m.values.cast<Complex>();
  } else {
    payload = hstack(std::vector<ComplexMatrix>(m.blocks.begin(), m.blocks.end()));
  }
  j["values"] = write_part(json_path, "values", payload);
  write_json_file(json_path, j);
}

MeasurementSet load_measurements(const fs::path& json_path) {
  const Json j = read_json_file(json_path);
  if (j.value("format", "") != "qsl.measurements") throw IoError(json_path.string() + ": not a measurement file");
  MeasurementSet m;
  m.design_ref = field<std::string>(j, "design_ref", json_path);
  m.kind = parse_design_kind(field<std::string>(j, "kind", json_path));
  m.sigma = field<double>(j, "sigma", json_path);
  m.noise_mode = parse_noise_mode(field<std::string>(j, "noise_mode", json_path));
  m.seed = field<std::uint64_t>(j, "seed", json_path);
  const ComplexMatrix payload = read_part(json_path, j, "values");
  if (m.kind == DesignKind::random_pairs) {
    if (payload.cols() != 1) throw IoError(json_path.string() + ": random-pair values must be a column vector");
    m.values = payload.col(0).real();
  } else {
    for (Index l = 0; l < payload.cols(); ++l) m.blocks.push_back(payload.col(l));
  }
  return m;
}

std::string to_string(LsMethod m) { return m == LsMethod::qr ? "qr" : "normal_equations"; }

LsMethod parse_ls_method(const std::string& s) {
  if (s == "qr") return LsMethod::qr;
  if (s == "normal_equations") return LsMethod::normal_equations;
  throw ConfigError("unknown least-squares method '" + s + "' (expected qr or normal_equations)");
}

Json solver_config_json(const SolverConfig& c) {
  return Json{{"rank", c.rank},     {"max_iter", c.max_iter},     {"gamma", c.gamma},
              {"eta", c.eta},       {"beta", c.beta},             {"seed", c.seed},
              {"lambda_reg", c.lambda_reg}, {"ls_method", to_string(c.ls_method)}, {"threads", c.threads}};
}

SolverConfig solver_config_from_json(const Json& j, SolverConfig c) {
  if (!j.is_object()) throw ConfigError("solver: expected a JSON object");
  static const char* known[] = {"rank", "max_iter", "gamma", "eta", "beta", "seed", "lambda_reg", "ls_method", "threads"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known))
      throw ConfigError("solver: unknown field '" + key + "'");
  }
  try {
    c.rank = j.value("rank", c.rank);
    c.max_iter = j.value("max_iter", c.max_iter);
    c.gamma = j.value("gamma", c.gamma);
    c.eta = j.value("eta", c.eta);
    c.beta = j.value("beta", c.beta);
    c.seed = j.value("seed", c.seed);
    c.lambda_reg = j.value("lambda_reg", c.lambda_reg);
    if (j.contains("ls_method")) c.ls_method = parse_ls_method(j.at("ls_method").get<std::string>());
    c.threads = j.value("threads", c.threads);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }
  return c;
}

Json report_json(const SolveReport& r) {
  return Json{{"final_loss", r.final_loss},
              {"regularized_loss", r.regularized_loss},
              {"iterations", r.iterations},
              {"restarts", r.restarts},
              {"converged", r.converged},
              {"loss_trace", r.loss_trace},
              {"wall_time", r.wall_time},
              {"rank", r.factors.rank()}};
}

}  // namespace qsl
