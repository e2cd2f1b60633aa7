// refel <mode> --config <path> [overrides]
// Exit status: 0 success, 1 numeric failure recorded in the output, 2 config error.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "refel/harness.hpp"

namespace {

refel::Signs parse_signs_flag(const std::string& s) {
  std::vector<int> v;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      v.push_back(std::stoi(item));
    } catch (const std::logic_error&) {
      throw refel::config_error("signs must be four comma-separated +1/-1 values");
    }
  }
  if (v.size() != 4) throw refel::config_error("signs must be four comma-separated +1/-1 values");
  return {v[0], v[1], v[2], v[3]};
}

refel::Range parse_grid_flag(const std::string& s) {
  if (s.find(':') == std::string::npos) {
    try {
      return {-0.9, 0.9, std::stoul(s)};
    } catch (const std::logic_error&) {
      throw refel::config_error("grid must be 'count' or 'vmin:vmax:count'");
    }
  }
  return refel::parse_range_flag(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-time Gaussian trajectories: kappa sweeps, boost grids, self-verification"};
  std::string mode_pos, mode_flag, config_path, kappa, signs, grid, out, mass_shell;
  std::optional<double> mu_re, mu_im, eta, tol;
  std::optional<std::uint64_t> seed;
  app.add_option("MODE", mode_pos, "kappa_sweep | boost_grid | verify | multipartite");
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--mode", mode_flag, "overrides the mode");
  app.add_option("--kappa", kappa, "value or start:stop:count");
  app.add_option("--mu-re", mu_re, "real part of mu");
  app.add_option("--mu-im", mu_im, "imaginary part of mu");
  app.add_option("--eta", eta, "external potential strength");
  app.add_option("--signs", signs, "sigma1,sigma2,sigma_plus,sigma_minus");
  app.add_option("--grid", grid, "velocity grid: count or vmin:vmax:count");
  app.add_option("--out", out, "CSV output path (stdout when empty)");
  app.add_option("--seed", seed, "seed for randomized checks");
  app.add_option("--tol", tol, "certification tolerance");
  app.add_option("--mass-shell", mass_shell, "plus | minus (sign convention for the factorizable solution)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  refel::SweepConfig cfg;
  try {
    nlohmann::json j = nlohmann::json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw refel::config_error("cannot open config file '" + config_path + "'");
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        throw refel::config_error(std::string("config is not valid JSON: ") + e.what());
      }
      if (!j.is_object()) throw refel::config_error("configuration must be a JSON object");
    }
    if (!mode_pos.empty()) j["mode"] = mode_pos;
    if (!mode_flag.empty()) j["mode"] = mode_flag;
    cfg = refel::parse_config(j);
    if (!kappa.empty()) cfg.kappa = refel::parse_range_flag(kappa);
    if (mu_re) cfg.mu.real(*mu_re);
    if (mu_im) cfg.mu.imag(*mu_im);
    if (eta) cfg.eta = *eta;
    if (!signs.empty()) cfg.signs = parse_signs_flag(signs);
    if (!grid.empty()) cfg.velocity = parse_grid_flag(grid);
    if (!out.empty()) cfg.output_path = out;
    if (seed) cfg.seed = *seed;
    if (tol) cfg.certification_tol = *tol;
    if (!mass_shell.empty()) {
      if (mass_shell == "plus") cfg.mass_shell = refel::MassShellSign::plus;
      else if (mass_shell == "minus") cfg.mass_shell = refel::MassShellSign::minus;
      else throw refel::config_error("--mass-shell must be plus or minus");
    }
    cfg.validate();
  } catch (const refel::config_error& e) {
    std::cerr << "refel: config error: " << e.what() << '\n';
    return 2;
  }

  refel::Table table;
  try {
    table = refel::run_mode(cfg);
  } catch (const refel::config_error& e) {
    std::cerr << "refel: config error: " << e.what() << '\n';
    return 2;
  } catch (const refel::error& e) {
    std::cerr << "refel: " << e.what() << '\n';
    return 1;
  }

  if (cfg.output_path.empty()) {
    refel::write_csv(std::cout, table, cfg);
  } else {
    std::ofstream f(cfg.output_path, std::ios::binary);
    if (!f) {
      std::cerr << "refel: cannot write '" << cfg.output_path << "'\n";
      return 2;
    }
    refel::write_csv(f, table, cfg);
  }
  if (table.any_failure) {
    std::cerr << "refel: one or more points failed; see the status column\n";
    return 1;
  }
  return 0;
}
