#pragma once

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "refel/boost.hpp"
#include "refel/error.hpp"
#include "refel/gaussian.hpp"
#include "refel/model.hpp"
#include "refel/nongaussian.hpp"
#include "refel/specfun.hpp"
#include "refel/verify.hpp"
#include "refel/witness.hpp"

namespace refel {

// Malformed or out-of-range configuration; the CLI maps it to exit status 2.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Range {
  double start = 0.0;
  double stop = 0.0;
  std::size_t count = 1;  // 1 means the single value `start`

  std::vector<double> values() const {
    if (count == 1) return {start};
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) v[i] = start + (stop - start) * double(i) / double(count - 1);
    return v;
  }
};

struct SweepConfig {
  std::string mode = "kappa_sweep";
  cplx mu{1.0, 0.0};
  Range kappa{1.5, 1.5, 1};
  double eta = 0.0;
  Signs signs;
  Range velocity{-0.9, 0.9, 101};
  std::string output_path;
  double certification_tol = certification_tol_default;
  std::uint64_t seed = 12345;
  MassShellSign mass_shell = MassShellSign::plus;
  std::vector<std::vector<std::size_t>> partition{{0}, {1}};
  std::vector<unsigned> quantum_n{0, 0};
  std::vector<double> nu{0.0, 0.0};

  void validate() const {
    static const char* modes[] = {"kappa_sweep", "boost_grid", "verify", "multipartite"};
    if (std::find(std::begin(modes), std::end(modes), mode) == std::end(modes)) {
      throw config_error("unknown mode '" + mode + "'");
    }
    if (kappa.count == 0 || (kappa.count == 1 && kappa.start != kappa.stop)) {
      throw config_error("kappa range count must be >= 2");
    }
    if (mode != "kappa_sweep" && kappa.count != 1) throw config_error("kappa must be a single value in mode " + mode);
    if (velocity.count < 2) throw config_error("velocity range count must be >= 2");
    for (double v : {velocity.start, velocity.stop}) {
      if (!(std::abs(v) < 0.99)) throw config_error("velocity bounds must lie inside (-0.99, 0.99)");
    }
    if (!(mu.real() > 0.0)) throw config_error("Re(mu) must be > 0");
    if (!signs.valid()) throw config_error("signs must be +1 or -1");
    if (!(certification_tol >= 0.0)) throw config_error("certification_tol must be >= 0");
    if (quantum_n.size() != 2 || nu.size() != 2) throw config_error("multipartite n and nu need two entries");
  }
};

inline nlohmann::json to_json(const SweepConfig& c) {
  nlohmann::json j;
  j["mode"] = c.mode;
  j["mu"] = {{"re", c.mu.real()}, {"im", c.mu.imag()}};
  if (c.kappa.count == 1) {
    j["kappa"] = c.kappa.start;
  } else {
    j["kappa"] = {{"start", c.kappa.start}, {"stop", c.kappa.stop}, {"count", c.kappa.count}};
  }
  j["eta"] = c.eta;
  j["signs"] = {c.signs.sigma1, c.signs.sigma2, c.signs.sigma_plus, c.signs.sigma_minus};
  j["velocity_range"] = {{"min", c.velocity.start}, {"max", c.velocity.stop}, {"count", c.velocity.count}};
  j["output_path"] = c.output_path;
  j["certification_tol"] = c.certification_tol;
  j["seed"] = c.seed;
  j["mass_shell_sign"] = c.mass_shell == MassShellSign::plus ? "plus" : "minus";
  j["partition"] = c.partition;
  j["n"] = c.quantum_n;
  j["nu"] = c.nu;
  return j;
}

namespace detail {

inline Range parse_range(const nlohmann::json& j, const char* lo, const char* hi) {
  if (j.is_number()) return {j.get<double>(), j.get<double>(), 1};
  if (!j.is_object()) throw config_error("range must be a number or an object");
  Range r{j.at(lo).get<double>(), j.at(hi).get<double>(), j.at("count").get<std::size_t>()};
  if (r.count < 2) throw config_error("range count must be >= 2");
  return r;
}

inline Signs parse_signs(const std::vector<int>& s) {
  if (s.size() != 4) throw config_error("signs needs four entries (sigma1, sigma2, sigma_plus, sigma_minus)");
  return {s[0], s[1], s[2], s[3]};
}

}  // namespace detail

inline SweepConfig parse_config(const nlohmann::json& j) {
  SweepConfig c;
  try {
    if (!j.is_object()) throw config_error("configuration must be a JSON object");
    if (j.contains("mode")) c.mode = j["mode"].get<std::string>();
    if (j.contains("mu")) {
      const auto& m = j["mu"];
      c.mu = m.is_number() ? cplx(m.get<double>(), 0.0) : cplx(m.value("re", 1.0), m.value("im", 0.0));
    }
    if (j.contains("kappa")) c.kappa = detail::parse_range(j["kappa"], "start", "stop");
    if (j.contains("eta")) c.eta = j["eta"].get<double>();
    if (j.contains("signs")) c.signs = detail::parse_signs(j["signs"].get<std::vector<int>>());
    if (j.contains("velocity_range")) c.velocity = detail::parse_range(j["velocity_range"], "min", "max");
    if (j.contains("output_path")) c.output_path = j["output_path"].get<std::string>();
    if (j.contains("certification_tol")) c.certification_tol = j["certification_tol"].get<double>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("mass_shell_sign")) {
      const auto s = j["mass_shell_sign"].get<std::string>();
      if (s == "plus") c.mass_shell = MassShellSign::plus;
      else if (s == "minus") c.mass_shell = MassShellSign::minus;
      else throw config_error("mass_shell_sign must be 'plus' or 'minus'");
    }
    if (j.contains("partition")) c.partition = j["partition"].get<std::vector<std::vector<std::size_t>>>();
    if (j.contains("n")) c.quantum_n = j["n"].get<std::vector<unsigned>>();
    if (j.contains("nu")) c.nu = j["nu"].get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("bad configuration value: ") + e.what());
  }
  c.validate();
  return c;
}

// "value" or "start:stop:count".
inline Range parse_range_flag(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  try {
    if (parts.size() == 1) {
      const double v = std::stod(parts[0]);
      return {v, v, 1};
    }
    if (parts.size() == 3) {
      Range r{std::stod(parts[0]), std::stod(parts[1]), std::stoul(parts[2])};
      if (r.count < 2) throw config_error("range count must be >= 2");
      return r;
    }
  } catch (const std::logic_error&) {
  }
  throw config_error("range must be 'value' or 'start:stop:count', got '" + s + "'");
}

// Table of preformatted cells; every row has one cell per column.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  bool any_failure = false;
};

inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(std::ostream& out, const Table& t, const SweepConfig& cfg) {
  out << "# config=" << to_json(cfg).dump() << " seed=" << cfg.seed << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

// REFEL_THREADS caps the worker count; 0 or unset means all cores.
inline unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("REFEL_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) n = static_cast<unsigned>(v);
  }
  return n;
}

// Runs body(i) for i in [0, count); results must be written to slot i.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

// "real" for a nonnegative real, "imag" for a negative real, "complex" otherwise.
inline std::string root_regime(cplx radicand) {
  if (radicand.imag() != 0.0) return "complex";
  return radicand.real() >= 0.0 ? "real" : "imag";
}

namespace detail {

inline ModelParams model_for(const SweepConfig& cfg, double kappa) {
  ModelParams p;
  p.kappa = kappa;
  p.eta = cfg.eta;
  p.mu = cfg.mu;
  p.signs = cfg.signs;
  return p;
}

inline std::string status_of(const error& e) { return "error:" + std::string(to_string(e.code())); }

}  // namespace detail

inline Table run_kappa_sweep(const SweepConfig& cfg) {
  if (cfg.mode != "kappa_sweep") throw config_error("run_kappa_sweep needs mode kappa_sweep");
  Table t;
  t.columns = {"kappa", "witness_entangled", "witness_factorizable", "regime_mu2_minus_kappa",
               "regime_mu2_minus_2kappa", "status"};
  const std::vector<double> ks = cfg.kappa.values();
  t.rows.resize(ks.size());
  std::vector<char> failed(ks.size(), 0);
  const std::size_t g1[] = {0};
  const std::size_t g2[] = {1};
  const Bipartition split = spacetime_bipartition(2, g1, g2);
  parallel_for(ks.size(), [&](std::size_t i) {
    const double k = ks[i];
    const cplx mu2 = cfg.mu * cfg.mu;
    double we = std::numeric_limits<double>::quiet_NaN(), wf = we;
    std::string status = "ok";
    try {
      const TrajectoryPair pair = match_initial_values(detail::model_for(cfg, k), cfg.mass_shell);
      we = witness_value(assemble_quadratic_form(pair.entangled), split, cfg.certification_tol).witness;
      wf = witness_value(assemble_quadratic_form(pair.factorizable), split, cfg.certification_tol).witness;
    } catch (const error& e) {
      status = detail::status_of(e);
      failed[i] = 1;
    }
    t.rows[i] = {format_real(k), format_real(we), format_real(wf), root_regime(mu2 - k), root_regime(mu2 - 2.0 * k),
                 status};
  });
  t.any_failure = std::find(failed.begin(), failed.end(), 1) != failed.end();
  return t;
}

inline Table run_boost_grid(const SweepConfig& cfg) {
  if (cfg.mode != "boost_grid") throw config_error("run_boost_grid needs mode boost_grid");
  Table t;
  t.columns = {"v1", "v2", "witness_entangled", "witness_factorizable", "status"};
  const std::vector<double> vs = cfg.velocity.values();
  const std::size_t nv = vs.size();
  t.rows.resize(nv * nv);
  std::vector<char> failed(nv * nv, 0);
  const Bipartition split({0}, {1}, 2);
  QuadraticForm qe, qf;
  std::string setup_status;
  try {
    const TrajectoryPair pair = match_initial_values(detail::model_for(cfg, cfg.kappa.start), cfg.mass_shell);
    qe = assemble_quadratic_form(pair.entangled);
    qf = assemble_quadratic_form(pair.factorizable);
  } catch (const error& e) {
    setup_status = detail::status_of(e);
  }
  parallel_for(nv * nv, [&](std::size_t idx) {
    const double v1 = vs[idx / nv];
    const double v2 = vs[idx % nv];
    double we = std::numeric_limits<double>::quiet_NaN(), wf = we;
    std::string status = setup_status.empty() ? "ok" : setup_status;
    if (setup_status.empty()) {
      try {
        const BoostSet b({v1, v2});
        we = witness_value(spatial_form(condition_on_zero_times(transform_quadratic_form(qe, b))), split,
                           cfg.certification_tol).witness;
        wf = witness_value(spatial_form(condition_on_zero_times(transform_quadratic_form(qf, b))), split,
                           cfg.certification_tol).witness;
      } catch (const error& e) {
        status = detail::status_of(e);
      }
    }
    failed[idx] = status != "ok";
    t.rows[idx] = {format_real(v1), format_real(v2), format_real(we), format_real(wf), status};
  });
  t.any_failure = std::find(failed.begin(), failed.end(), 1) != failed.end();
  return t;
}

namespace detail {

struct CheckList {
  Table table;

  void add(const std::string& name, double value, double threshold, bool pass) {
    table.rows.push_back({name, format_real(value), format_real(threshold), pass ? "pass" : "fail"});
    if (!pass) table.any_failure = true;
  }

  // Runs a check that may throw, recording the error code as a failure.
  void guarded(const std::string& name, const std::function<void()>& body) {
    try {
      body();
    } catch (const error& e) {
      table.rows.push_back({name, "nan", "nan", status_of(e)});
      table.any_failure = true;
    }
  }
};

inline PointSet random_points(std::mt19937_64& rng, std::size_t count, std::size_t dim) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PointSet pts(count, std::vector<double>(dim));
  for (auto& p : pts)
    for (auto& x : p) x = u(rng);
  return pts;
}

// Weber-equation residual |D'' + (nu + 1/2 - z^2/4) D| from a fourth-order
// stencil, relative to the largest of the two terms and the stencil values.
inline double weber_residual(double nu, double z, double h = 1e-2) {
  cplx f[5];
  double peak = 1e-300;
  for (int k = 0; k < 5; ++k) {
    f[k] = parabolic_cylinder_D(nu, z + (k - 2) * h);
    peak = std::max(peak, std::abs(f[k]));
  }
  const cplx d2 = (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * h * h);
  const cplx pot = (nu + 0.5 - z * z / 4.0) * f[2];
  return std::abs(d2 + pot) / std::max({std::abs(d2), std::abs(pot), peak});
}

}  // namespace detail

// Self-test of the library at the configured model parameters.
inline Table run_verify(const SweepConfig& cfg) {
  if (cfg.mode != "verify") throw config_error("run_verify needs mode verify");
  detail::CheckList checks;
  checks.table.columns = {"check", "value", "threshold", "status"};
  std::mt19937_64 rng(cfg.seed);
  const double kappa = cfg.kappa.start;
  const ModelParams params = detail::model_for(cfg, kappa);
  const CouplingMatrix omega = build_coupling_hooke(2, kappa, cfg.eta);

  checks.guarded("matfun.sqrtm_reconstruction", [&] {
    std::normal_distribution<double> nd;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      MatrixXcd a(3, 3);
      for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j <= i; ++j) a(i, j) = a(j, i) = cplx(nd(rng), nd(rng));
      const ComplexSymmetricMatrix s = sqrtm_principal(ComplexSymmetricMatrix(a));
      worst = std::max(worst, max_abs(s.matrix() * s.matrix() - a) / max_abs(a));
    }
    checks.add("matfun.sqrtm_reconstruction", worst, 1e-10, worst <= 1e-10);
  });

  checks.guarded("gaussian.identities", [&] {
    const TrajectoryPair pair = match_initial_values(params, cfg.mass_shell);
    const IdentityResiduals r = identity_residuals(pair.entangled, omega);
    const double worst = std::max(r.dispersion, r.commutator);
    checks.add("gaussian.identities", worst, 1e-10, worst <= 1e-10);
  });

  checks.guarded("verify.residual_unconstrained", [&] {
    const TrajectoryPair pair = match_initial_values(params, cfg.mass_shell);
    const ResidualReport r = residual_unconstrained(gaussian_evaluator(assemble_quadratic_form(pair.entangled)),
                                                    omega, {}, detail::random_points(rng, 20, 4));
    checks.add("verify.residual_unconstrained", r.max_rel_residual, 1e-5, r.max_rel_residual <= 1e-5);
  });

  checks.guarded("verify.residual_factorizable", [&] {
    const TrajectoryPair pair = match_initial_values(params, cfg.mass_shell);
    double worst = 0.0;
    const PointSet pts = detail::random_points(rng, 20, 2);
    for (Index j = 0; j < 2; ++j) {
      const cplx mu = pair.factorizable.m(j, j);
      const cplx g = pair.factorizable.c(j, j);
      Evaluator psi = [mu, g](std::span<const double> p) {
        return std::exp(-0.5 * (mu * p[0] * p[0] + 2.0 * g * p[0] * p[1] + mu * p[1] * p[1]));
      };
      worst = std::max(worst, residual_factorizable(psi, 0.0, omega(j, j), pts).max_rel_residual);
    }
    checks.add("verify.residual_factorizable", worst, 1e-5, worst <= 1e-5);
  });

  checks.guarded("boost.closed_form", [&] {
    const TrajectoryPair pair = match_initial_values(params, cfg.mass_shell);
    const QuadraticForm q = assemble_quadratic_form(pair.entangled);
    double worst = 0.0;
    const Range grid{-0.9, 0.9, 21};
    for (double v1 : grid.values()) {
      for (double v2 : grid.values()) {
        const BoostSet b({v1, v2});
        const MatrixXcd direct = condition_on_zero_times(transform_quadratic_form(q, b)).matrix();
        const MatrixXcd closed = boosted_spatial_form(cfg.mu, pair.entangled.c, b).matrix();
        worst = std::max(worst, max_abs(direct - closed) / std::max(1.0, max_abs(direct)));
      }
    }
    checks.add("boost.closed_form", worst, 1e-12, worst <= 1e-12);
  });

  checks.guarded("witness.factorizable_nonnegative", [&] {
    const TrajectoryPair pair = match_initial_values(params, cfg.mass_shell);
    const std::size_t g1[] = {0};
    const std::size_t g2[] = {1};
    const double w = witness_value(assemble_quadratic_form(pair.factorizable), spacetime_bipartition(2, g1, g2),
                                   cfg.certification_tol).witness;
    checks.add("witness.factorizable_nonnegative", w, -cfg.certification_tol, w >= -cfg.certification_tol);
  });

  checks.guarded("witness.minimizer_consistency", [&] {
    const TrajectoryPair pair = match_initial_values(params, cfg.mass_shell);
    const QuadraticForm q = assemble_quadratic_form(pair.entangled);
    const std::size_t g1[] = {0};
    const std::size_t g2[] = {1};
    const Bipartition split = spacetime_bipartition(2, g1, g2);
    const WitnessReport rep = witness_value(q, split, cfg.certification_tol);
    double diff = 0.0;
    if (rep.re_q_fac_min_pd) diff = std::abs(expectation_L(rep.q_fac_min, q) - rep.g_fac_min);
    checks.add("witness.minimizer_consistency", diff, 1e-10, diff <= 1e-10);
  });

  checks.guarded("specfun.hermite_relation", [&] {
    // Series path against the Hermite path, relative to the peak of |D_n| on the grid.
    double worst = 0.0;
    for (unsigned n = 0; n <= 10; ++n) {
      double peak = 0.0, diff = 0.0;
      for (int i = 0; i <= 40; ++i) {
        const double z = -5.0 + 0.25 * i;
        const cplx d = parabolic_cylinder_D(double(n), z);
        peak = std::max(peak, std::abs(d));
        diff = std::max(diff, std::abs(d - detail::pcf_series_estimate(double(n), z).value));
      }
      worst = std::max(worst, diff / peak);
    }
    checks.add("specfun.hermite_relation", worst, 1e-9, worst <= 1e-9);
  });

  checks.guarded("specfun.weber_ode", [&] {
    double worst = 0.0;
    for (double nu : {-1.7, 0.3, 2.5}) {
      for (int i = 0; i <= 16; ++i) worst = std::max(worst, detail::weber_residual(nu, -4.0 + 0.5 * i));
    }
    checks.add("specfun.weber_ode", worst, 1e-6, worst <= 1e-6);
  });

  checks.guarded("verify.counterexample", [&] {
    double worst = 0.0;
    for (const double v : Range{-0.9, 0.9, 41}.values()) {
      worst = std::max(worst, std::abs(counterexample_demo(v) - 4.0 * v / (1.0 - v * v)));
    }
    checks.add("verify.counterexample", worst, 1e-12, worst <= 1e-12);
  });

  return checks.table;
}

// Hermite times parabolic-cylinder product solution of the Hooke model for the configured
// partition, with a_s chosen so that each temporal order equals the requested nu.
inline MultipartiteInput multipartite_input(const SweepConfig& cfg, const CouplingMatrix& omega) {
  MultipartiteInput in;
  in.partition = cfg.partition;
  validate_partition(in.partition, 2);
  in.n = cfg.quantum_n;
  in.a.assign(2, 0.0);
  std::size_t s = 0;
  for (const auto& block : in.partition) {
    const auto nj = static_cast<Index>(block.size());
    MatrixXd w(nj, nj);
    for (Index r = 0; r < nj; ++r)
      for (Index c = 0; c < nj; ++c)
        w(r, c) = omega(static_cast<Index>(block[static_cast<std::size_t>(r)]),
                        static_cast<Index>(block[static_cast<std::size_t>(c)]));
    const SymmetricEigen eig = eigh_real(RealSymmetricMatrix(w));
    for (Index k = 0; k < nj; ++k, ++s) {
      const cplx om = principal_sqrt(eig.values(k));
      in.a[s] = -2.0 * om * (cfg.nu[s] + 0.5);
    }
  }
  return in;
}

inline Table run_multipartite(const SweepConfig& cfg) {
  if (cfg.mode != "multipartite") throw config_error("run_multipartite needs mode multipartite");
  Table t;
  t.columns = {"subsystem", "mode", "omega_squared", "omega_re", "omega_im", "n", "nu_re", "nu_im",
               "normalizable", "pde_rel_residual", "status"};
  try {
    const CouplingMatrix omega = build_coupling_hooke(2, cfg.kappa.start, cfg.eta);
    const NonGaussianSolution sol = solve_multipartite(omega, multipartite_input(cfg, omega));
    std::mt19937_64 rng(cfg.seed);
    const double res = residual_multipartite(sol, detail::random_points(rng, 20, 4)).max_rel_residual;
    for (std::size_t j = 0; j < sol.subsystems.size(); ++j) {
      for (std::size_t s = 0; s < sol.subsystems[j].modes.size(); ++s) {
        const EigenMode& m = sol.subsystems[j].modes[s];
        t.rows.push_back({std::to_string(j), std::to_string(s), format_real(m.omega_squared),
                          format_real(m.omega.real()), format_real(m.omega.imag()), std::to_string(m.n),
                          format_real(m.nu.real()), format_real(m.nu.imag()), m.normalizable ? "1" : "0",
                          format_real(res), res <= 1e-4 ? "ok" : "residual"});
        if (res > 1e-4) t.any_failure = true;
      }
    }
  } catch (const error& e) {
    t.rows.push_back({"", "", "nan", "nan", "nan", "", "nan", "nan", "", "nan", detail::status_of(e)});
    t.any_failure = true;
  }
  return t;
}

inline Table run_mode(const SweepConfig& cfg) {
  if (cfg.mode == "kappa_sweep") return run_kappa_sweep(cfg);
  if (cfg.mode == "boost_grid") return run_boost_grid(cfg);
  if (cfg.mode == "verify") return run_verify(cfg);
  if (cfg.mode == "multipartite") return run_multipartite(cfg);
  throw config_error("unknown mode '" + cfg.mode + "'");
}

}  // namespace refel
