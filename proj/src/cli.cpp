#include "lambda4wm/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lambda4wm/csv.hpp"
#include "lambda4wm/dataset.hpp"
#include "lambda4wm/doppler.hpp"
#include "lambda4wm/errors.hpp"
#include "lambda4wm/fit.hpp"
#include "lambda4wm/params.hpp"
#include "lambda4wm/propagation.hpp"
#include "lambda4wm/steady_state.hpp"
#include "lambda4wm/susceptibility.hpp"
#include "lambda4wm/sweep.hpp"

namespace lambda4wm {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string> kDeltaGridKeys = {"delta_min_gamma", "delta_max_gamma",
                                                 "delta_points"};
const std::vector<std::string> kDopplerKeys = {"doppler_enabled", "doppler_nodes",
                                               "doppler_vmax_sigmas", "doppler_rule",
                                               "doppler_rel_tol"};

std::vector<std::string> command_keys(const std::string& cmd) {
  std::vector<std::string> keys;
  auto add = [&keys](const std::vector<std::string>& more) {
    keys.insert(keys.end(), more.begin(), more.end());
  };
  if (cmd == "chi") {
    add(kDeltaGridKeys);
  } else if (cmd == "propagate") {
    add({"delta_gamma", "theta_deg", "dkz_rad_m"});
    add(kDopplerKeys);
  } else if (cmd == "gainmap") {
    add(kDeltaGridKeys);
    add({"axis", "axis_min", "axis_max", "axis_points"});
    add(kDopplerKeys);
  } else if (cmd == "doppler-gain") {
    add(kDeltaGridKeys);
    add({"theta_deg"});
    add(kDopplerKeys);
  } else if (cmd == "fit") {
    add({"data", "free", "theta_window_deg", "max_iterations"});
    for (auto p : {FitParam::omega_rabi, FitParam::density, FitParam::gamma_c,
                   FitParam::epsilon_pump}) {
      keys.push_back("bounds_" + fit_param_name(p));
    }
    add(kDopplerKeys);
  } else if (cmd == "oracle") {
    add({"delta_gamma", "seed_fraction", "richardson"});
  }
  return keys;
}

// Typed accessors; a wrong type is a validation error naming the key.
double num(const json& cfg, const std::string& key, std::optional<double> fallback = {}) {
  auto it = cfg.find(key);
  if (it == cfg.end()) {
    if (fallback) return *fallback;
    throw ValidationError("missing required field '" + key + "'");
  }
  if (!it->is_number()) throw ValidationError("field '" + key + "' must be a number");
  return it->get<double>();
}

int integer(const json& cfg, const std::string& key, int fallback) {
  auto it = cfg.find(key);
  if (it == cfg.end()) return fallback;
  if (!it->is_number_integer()) throw ValidationError("field '" + key + "' must be an integer");
  return it->get<int>();
}

std::string text(const json& cfg, const std::string& key, const std::string& fallback) {
  auto it = cfg.find(key);
  if (it == cfg.end()) return fallback;
  if (!it->is_string()) throw ValidationError("field '" + key + "' must be a string");
  return it->get<std::string>();
}

bool flag(const json& cfg, const std::string& key, bool fallback) {
  auto it = cfg.find(key);
  if (it == cfg.end()) return fallback;
  if (!it->is_boolean()) throw ValidationError("field '" + key + "' must be true or false");
  return it->get<bool>();
}

std::pair<double, double> range(const json& cfg, const std::string& key) {
  const auto& v = cfg.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ValidationError("field '" + key + "' must be a two-element numeric array");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

DopplerConfig doppler_config(const json& cfg) {
  DopplerConfig d;
  d.enabled = flag(cfg, "doppler_enabled", false);
  d.nodes = integer(cfg, "doppler_nodes", d.nodes);
  d.vmax_sigmas = num(cfg, "doppler_vmax_sigmas", d.vmax_sigmas);
  d.rel_tol = num(cfg, "doppler_rel_tol", d.rel_tol);
  const auto rule = text(cfg, "doppler_rule", "adaptive");
  if (rule == "adaptive") {
    d.rule = DopplerRule::adaptive;
  } else if (rule == "gauss_hermite") {
    d.rule = DopplerRule::gauss_hermite;
  } else {
    throw ValidationError("field 'doppler_rule' must be 'adaptive' or 'gauss_hermite'");
  }
  d.validate();
  return d;
}

json doppler_json(const DopplerConfig& d) {
  return {{"enabled", d.enabled},
          {"nodes", d.nodes},
          {"vmax_sigmas", d.vmax_sigmas},
          {"rule", d.rule == DopplerRule::adaptive ? "adaptive" : "gauss_hermite"},
          {"rel_tol", d.rel_tol}};
}

std::vector<double> delta_grid(const json& cfg) {
  const double lo = num(cfg, "delta_min_gamma", -20.0);
  const double hi = num(cfg, "delta_max_gamma", 20.0);
  const int n = integer(cfg, "delta_points", 401);
  if (n < 1) throw ValidationError("field 'delta_points' must be positive");
  if (n > 1 && !(hi > lo)) throw ValidationError("delta_max_gamma must exceed delta_min_gamma");
  return linspace(lo, hi, n);
}

json complex_json(std::complex<double> z) { return json::array({z.real(), z.imag()}); }

json field_json(const FieldPair& f) {
  return {{"g_p", f.g_p},
          {"g_c", f.g_c},
          {"log_g_p", f.log_g_p},
          {"log_g_c", f.log_g_c},
          {"e_p", complex_json(f.e_p)},
          {"e_c_conj", complex_json(f.e_c_conj)},
          {"log_scale", f.log_scale},
          {"log_form", f.log_form}};
}

json chi_json(const SusceptibilitySet& chi) {
  return {{"chi_pp", complex_json(chi.chi_pp)},
          {"chi_cc", complex_json(chi.chi_cc)},
          {"chi_pc", complex_json(chi.chi_pc)},
          {"chi_cp", complex_json(chi.chi_cp)}};
}

void write_json(const fs::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

struct Job {
  std::string cmd;
  json cfg;
  fs::path config_path, out;
  int threads = 1;
  std::vector<std::string> outputs;

  void emit(const std::string& name, const std::string& content) {
    write_text_file(out / name, content);
    outputs.push_back(name);
  }
};

void run_chi(Job& job) {
  const auto params = build_params(job.cfg);
  const auto deltas = delta_grid(job.cfg);
  std::vector<SusceptibilitySet> rows(deltas.size());
  parallel_for(static_cast<int>(deltas.size()), job.threads,
               [&](int k) { rows[k] = susceptibilities(params, deltas[k]); });
  std::ostringstream csv;
  csv << "delta,re_chi_pp,im_chi_pp,re_chi_cc,im_chi_cc,re_chi_pc,im_chi_pc,re_chi_cp,im_chi_cp\n";
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    const auto& c = rows[k];
    csv << join_row({deltas[k], c.chi_pp.real(), c.chi_pp.imag(), c.chi_cc.real(),
                     c.chi_cc.imag(), c.chi_pc.real(), c.chi_pc.imag(), c.chi_cp.real(),
                     c.chi_cp.imag()})
        << '\n';
  }
  job.emit("chi.csv", csv.str());
}

void run_propagate(Job& job) {
  const auto params = build_params(job.cfg);
  const auto doppler = doppler_config(job.cfg);
  const double delta = num(job.cfg, "delta_gamma");
  const bool by_dkz = job.cfg.contains("dkz_rad_m");
  if (by_dkz && job.cfg.contains("theta_deg")) {
    throw ValidationError("give either 'theta_deg' or 'dkz_rad_m', not both");
  }
  const double theta_deg = num(job.cfg, "theta_deg", 0.0);
  const auto kin = kinematics(params, delta, deg_to_rad(theta_deg));
  const auto chi = doppler.enabled ? averaged_susceptibilities(params, delta, kin, doppler)
                                   : susceptibilities(params, delta);
  const auto cs = by_dkz ? coupling_at(chi, kin, num(job.cfg, "dkz_rad_m"))
                         : coupling(chi, kin, params.pump_index());
  const auto f = solve_closed_form(cs, params.length);
  json j = field_json(f);
  j["dkz_rad_m"] = cs.dkz;
  j["susceptibilities"] = chi_json(chi);
  j["chi_cp_conjugate_deviation"] = cp_conjugate_deviation(chi);
  job.emit("propagate.json", j.dump(2) + "\n");
}

void run_gainmap(Job& job) {
  const auto params = build_params(job.cfg);
  const auto doppler = doppler_config(job.cfg);
  const auto deltas = delta_grid(job.cfg);
  const auto axis = text(job.cfg, "axis", "theta_deg");
  AxisSpec spec;
  if (axis == "theta_deg") {
    spec.kind = AxisKind::theta_deg;
  } else if (axis == "dkz_rad_m") {
    spec.kind = AxisKind::dkz;
  } else {
    throw ValidationError("field 'axis' must be 'theta_deg' or 'dkz_rad_m'");
  }
  const int n = integer(job.cfg, "axis_points", 101);
  if (n < 1) throw ValidationError("field 'axis_points' must be positive");
  spec.values = linspace(num(job.cfg, "axis_min"), num(job.cfg, "axis_max"), n);

  const auto map = gain_map(params, deltas, spec, doppler, job.threads);
  std::ostringstream csv;
  csv << "delta_gamma," << axis_name(spec.kind) << ",g_p,g_c\n";
  for (Eigen::Index i = 0; i < map.gp.rows(); ++i) {
    for (Eigen::Index j = 0; j < map.gp.cols(); ++j) {
      csv << join_row({deltas[i], spec.values[j], map.gp(i, j), map.gc(i, j)}) << '\n';
    }
  }
  job.emit("gainmap.csv", csv.str());

  Eigen::Index ip = 0, jp = 0, ic = 0, jc = 0;
  const Eigen::MatrixXd gp = map.gp.array().isNaN().select(-1.0, map.gp);
  const Eigen::MatrixXd gc = map.gc.array().isNaN().select(-1.0, map.gc);
  gp.maxCoeff(&ip, &jp);
  gc.maxCoeff(&ic, &jc);
  json meta = {{"params", to_json(params)},
               {"doppler", doppler_json(doppler)},
               {"axis", axis_name(spec.kind)},
               {"delta_points", deltas.size()},
               {"axis_points", spec.values.size()},
               {"missing_cells", map.missing},
               {"peak_g_p", {{"value", gp(ip, jp)}, {"delta_gamma", deltas[ip]}, {"axis", spec.values[jp]}}},
               {"peak_g_c", {{"value", gc(ic, jc)}, {"delta_gamma", deltas[ic]}, {"axis", spec.values[jc]}}}};
  job.emit("gainmap.json", meta.dump(2) + "\n");
}

void run_doppler_gain(Job& job) {
  const auto params = build_params(job.cfg);
  auto doppler = doppler_config(job.cfg);
  doppler.enabled = true;
  const auto deltas = delta_grid(job.cfg);
  const double theta = deg_to_rad(num(job.cfg, "theta_deg", 0.0));
  std::vector<std::array<double, 4>> rows(deltas.size());
  parallel_for(static_cast<int>(deltas.size()), job.threads, [&](int k) {
    const auto bare = solve_twin_beam(params, deltas[k], theta);
    const auto avg = solve_twin_beam(params, deltas[k], theta, doppler);
    rows[k] = {bare.g_p, bare.g_c, avg.g_p, avg.g_c};
  });
  std::ostringstream csv;
  csv << "delta_gamma,g_p,g_c,g_p_doppler,g_c_doppler\n";
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    csv << join_row({deltas[k], rows[k][0], rows[k][1], rows[k][2], rows[k][3]}) << '\n';
  }
  job.emit("doppler_gain.csv", csv.str());
}

void run_fit(Job& job) {
  const auto initial = build_params(job.cfg);
  FitOptions opts;
  opts.doppler = doppler_config(job.cfg);
  opts.threads = job.threads;
  opts.max_iterations = integer(job.cfg, "max_iterations", opts.max_iterations);
  if (job.cfg.contains("free")) {
    const auto& f = job.cfg.at("free");
    if (!f.is_array()) throw ValidationError("field 'free' must be an array of parameter names");
    for (const auto& name : f) {
      if (!name.is_string()) throw ValidationError("field 'free' must contain strings");
      opts.free.push_back(parse_fit_param(name.get<std::string>()));
    }
  } else {
    opts.free = {FitParam::omega_rabi, FitParam::density, FitParam::gamma_c,
                 FitParam::epsilon_pump};
  }
  for (auto p : {FitParam::omega_rabi, FitParam::density, FitParam::gamma_c,
                 FitParam::epsilon_pump}) {
    const std::string key = "bounds_" + fit_param_name(p);
    if (job.cfg.contains(key)) {
      const auto [lo, hi] = range(job.cfg, key);
      opts.bounds[p] = {lo, hi};
    }
  }
  if (job.cfg.contains("theta_window_deg")) opts.theta_window_deg = range(job.cfg, "theta_window_deg");

  fs::path data = text(job.cfg, "data", "");
  if (data.empty()) throw ValidationError("missing required field 'data'");
  if (data.is_relative()) data = job.config_path.parent_path() / data;
  const auto dataset = load_gain_data(data);
  const auto result = fit_model(dataset, initial, opts);

  json fitted = json::object();
  for (std::size_t j = 0; j < result.free.size(); ++j) {
    fitted[fit_param_name(result.free[j])] = result.values(static_cast<Eigen::Index>(j));
  }
  json cov = json::array();
  for (Eigen::Index i = 0; i < result.covariance.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < result.covariance.cols(); ++j) row.push_back(result.covariance(i, j));
    cov.push_back(row);
  }
  json j = {{"status", fit_status_name(result.status)},
            {"message", result.message},
            {"fitted", fitted},
            {"params_out", to_json(result.params_out)},
            {"objective_history", result.objective_history},
            {"iterations", result.iterations},
            {"evaluations", result.evaluations},
            {"points", result.points},
            {"residuals", std::vector<double>(result.residuals.data(),
                                              result.residuals.data() + result.residuals.size())},
            {"covariance_search_coordinates", cov},
            {"data", fs::absolute(data).string()}};
  job.emit("fit.json", j.dump(2) + "\n");
}

void run_oracle(Job& job) {
  const auto params = build_params(job.cfg);
  OracleOptions opts;
  opts.seed_fraction = num(job.cfg, "seed_fraction", opts.seed_fraction);
  opts.richardson = flag(job.cfg, "richardson", opts.richardson);
  const double delta = num(job.cfg, "delta_gamma");
  const auto report = oracle_report(params, delta, opts);
  const auto closed = susceptibilities(params, delta);
  const auto pump_only = evolve_to_steady_state(params, delta, 0.0, 0.0);

  auto matrix_json = [](const Eigen::Matrix4cd& m) {
    json rows = json::array();
    for (int n = 0; n < 4; ++n) {
      json row = json::array();
      for (int k = 0; k < 4; ++k) row.push_back(complex_json(m(n, k)));
      rows.push_back(row);
    }
    return rows;
  };
  json rel = json::object();
  const auto a = report.chi.as_vector(), b = closed.as_vector();
  const char* names[] = {"chi_pp", "chi_cc", "chi_pc", "chi_cp"};
  for (int k = 0; k < 4; ++k) rel[names[k]] = std::abs(a(k) - b(k)) / std::abs(b(k));

  json j = {{"delta_gamma", delta},
            {"sigma_pump_only", matrix_json(pump_only.sigma)},
            {"sigma_probe_seed", matrix_json(report.probe_run.sigma)},
            {"sigma_conjugate_seed", matrix_json(report.conjugate_run.sigma)},
            {"steps", report.probe_run.steps},
            {"residual", report.probe_run.residual},
            {"seed_halving_change", report.linearity},
            {"oracle", chi_json(report.chi)},
            {"closed_form", chi_json(closed)},
            {"relative_difference", rel}};
  job.emit("oracle.json", j.dump(2) + "\n");
}

json read_config(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot read config '" + path.string() + "'");
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw ValidationError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void apply_override(json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ValidationError("--set expects key=value, got '" + assignment + "'");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  try {
    cfg[key] = json::parse(value);
  } catch (const json::parse_error&) {
    cfg[key] = value;
  }
}

int execute(const std::string& cmd, const fs::path& config_path, const fs::path& out,
            const std::vector<std::string>& overrides, int threads) {
  const auto start = std::chrono::steady_clock::now();
  Job job{cmd, read_config(config_path), fs::absolute(config_path), out, 1, {}};
  if (!job.cfg.is_object()) throw ValidationError("config '" + config_path.string() + "' must be a JSON object");
  for (const auto& o : overrides) apply_override(job.cfg, o);

  // One config file may serve several subcommands, so any known key is accepted.
  std::set<std::string> allowed(param_keys().begin(), param_keys().end());
  for (const auto& c : {"chi", "propagate", "gainmap", "doppler-gain", "fit", "oracle"}) {
    for (const auto& k : command_keys(c)) allowed.insert(k);
  }
  for (const auto& [key, value] : job.cfg.items()) {
    if (!allowed.count(key)) throw ValidationError("unknown config key '" + key + "'");
  }
  job.threads = threads > 0 ? threads : default_threads();

  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) {
    throw ValidationError("cannot create output directory '" + out.string() + "'");
  }

  if (cmd == "chi") run_chi(job);
  else if (cmd == "propagate") run_propagate(job);
  else if (cmd == "gainmap") run_gainmap(job);
  else if (cmd == "doppler-gain") run_doppler_gain(job);
  else if (cmd == "fit") run_fit(job);
  else if (cmd == "oracle") run_oracle(job);

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json manifest = {{"subcommand", cmd},
                   {"version", kVersion},
                   {"config", job.cfg},
                   {"config_path", job.config_path.string()},
                   {"out_dir", fs::absolute(out).string()},
                   {"outputs", job.outputs},
                   {"threads", job.threads},
                   {"duration_s", seconds}};
  write_json(out / "manifest.json", manifest);
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Double-lambda four-wave mixing: susceptibilities, gains, Doppler averaging, fits"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config, out;
  std::vector<std::string> overrides;
  int threads = 0;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"chi", "four susceptibilities over a detuning grid"},
      {"propagate", "probe and conjugate gains at one point"},
      {"gainmap", "gain map over detuning and angle or phase mismatch"},
      {"doppler-gain", "gain spectrum with and without Doppler averaging"},
      {"fit", "fit omega_rabi, density, gamma_c, epsilon_pump to measured gains"},
      {"oracle", "density-matrix steady state and extracted susceptibilities"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "JSON configuration")->required();
    sub->add_option("--out", out, "output directory")->required();
    sub->add_option("--set", overrides, "override a config key, key=value (value parsed as JSON)");
    sub->add_option("--threads", threads, "worker threads (default: LAMBDA4WM_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    return execute(cmd, config, out, overrides, threads);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace lambda4wm
