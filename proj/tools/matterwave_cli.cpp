// command-line front end: single/pair interferometer runs, noise-budget
// evaluation and sweeps, gravitational-wave response curves, and the
// verification suite.  writes JSON result documents and RFC-4180 CSV tables,
// all stamped with the effective-config hash and seed.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "matterwave/budget.hpp"
#include "matterwave/interferometer.hpp"
#include "matterwave/oracle.hpp"

using nlohmann::json;
namespace mw = matterwave;

namespace {

bool log_enabled() {
  const char* v = std::getenv("MATTERWAVE_LOG");
  return v != nullptr && v[0] != '\0' && std::string(v) != "0" && std::string(v) != "quiet";
}

void log_line(const std::string& msg) {
  if (log_enabled()) std::cerr << "[matterwave] " << msg << "\n";
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return s;
}

// RFC-4180: quote a field when it contains comma, quote, or newline
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

std::string csv_num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

struct run_config {
  std::string mode;
  std::uint64_t seed = 1;
  std::uint64_t samples = 0;
  std::string out = ".";
  double model_omega = 1.0;
  double model_chi_a = 0.01;
  double model_amplitude = 100.0;
  std::array<double, 3> signal_phases{0.0, 0.0, 0.0};
  double pair_amplitude = 100.0;
  std::array<double, 3> pair_signal_phases{0.0, 0.0, 0.0};
  bool pair_severed = false;
  double budget_atom_number = 1e6;
  double budget_photon_number = 1e6;
  double budget_pulse_area = 1.0;
  double sweep_atom_min = 1e3;
  double sweep_atom_max = 1e9;
  std::size_t sweep_points = 200;
  bool sweep_log_spacing = true;
  double sweep_photon_number = 1e6;
  double sweep_pulse_area = 1.0;
  bool gw_enabled = true;
  double gw_omega_min = 0.1;
  double gw_omega_max = 100.0;
  std::size_t gw_points = 200;
  bool gw_log_spacing = true;
  double gw_strain = 1e-21;
  double gw_baseline = 1.0;
  double gw_interrogation_time = 1.0;
  double gw_wavenumber = 1.0;
  double gw_eval_time = 0.5;
  double gw_speed_of_light = 1.0;
  double mc_bin_width = 0.0;         // 0 -> 0.01 / omega
  double verify_grid_scale = 1e-3;   // dt * Omega used by the verify kernel table
  double verify_table_tolerance = 1e-6;
  bool has_lab = false;
  mw::lab_params lab;
};

class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double want_number(const json& j, const std::string& where, const std::string& key,
                   double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number())
    throw config_error("field '" + where + "." + key + "' must be a number");
  return j.at(key).get<double>();
}

bool want_bool(const json& j, const std::string& where, const std::string& key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean())
    throw config_error("field '" + where + "." + key + "' must be a boolean");
  return j.at(key).get<bool>();
}

std::array<double, 3> want_phases(const json& j, const std::string& where,
                                  const std::string& key, std::array<double, 3> fallback) {
  if (!j.contains(key)) return fallback;
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 3)
    throw config_error("field '" + where + "." + key + "' must be an array of 3 numbers");
  std::array<double, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!a[i].is_number())
      throw config_error("field '" + where + "." + key + "' must be an array of 3 numbers");
    out[i] = a[i].get<double>();
  }
  return out;
}

run_config parse_config(const json& root) {
  run_config rc;
  if (root.contains("mode")) {
    if (!root.at("mode").is_string()) throw config_error("field 'mode' must be a string");
    rc.mode = root.at("mode").get<std::string>();
  }
  rc.seed = static_cast<std::uint64_t>(want_number(root, "", "seed", 1.0));
  rc.samples = static_cast<std::uint64_t>(want_number(root, "", "samples", 0.0));
  if (root.contains("out")) {
    if (!root.at("out").is_string()) throw config_error("field 'out' must be a string");
    rc.out = root.at("out").get<std::string>();
  }
  rc.mc_bin_width = want_number(root, "", "mc_bin_width", 0.0);
  if (root.contains("model")) {
    const auto& m = root.at("model");
    if (!m.is_object()) throw config_error("field 'model' must be an object");
    rc.model_omega = want_number(m, "model", "omega", rc.model_omega);
    rc.model_chi_a = want_number(m, "model", "chi_a", rc.model_chi_a);
    rc.model_amplitude = want_number(m, "model", "amplitude", rc.model_amplitude);
    rc.signal_phases = want_phases(m, "model", "signal_phases", rc.signal_phases);
  }
  if (root.contains("pair")) {
    const auto& m = root.at("pair");
    if (!m.is_object()) throw config_error("field 'pair' must be an object");
    rc.pair_amplitude = want_number(m, "pair", "amplitude", rc.pair_amplitude);
    rc.pair_signal_phases = want_phases(m, "pair", "signal_phases", rc.pair_signal_phases);
    rc.pair_severed = want_bool(m, "pair", "severed", rc.pair_severed);
  }
  if (root.contains("budget")) {
    const auto& m = root.at("budget");
    if (!m.is_object()) throw config_error("field 'budget' must be an object");
    rc.budget_atom_number = want_number(m, "budget", "atom_number", rc.budget_atom_number);
    rc.budget_photon_number =
        want_number(m, "budget", "photon_number", rc.budget_photon_number);
    rc.budget_pulse_area = want_number(m, "budget", "pulse_area", rc.budget_pulse_area);
  }
  if (root.contains("sweep")) {
    const auto& m = root.at("sweep");
    if (!m.is_object()) throw config_error("field 'sweep' must be an object");
    rc.sweep_atom_min = want_number(m, "sweep", "atom_min", rc.sweep_atom_min);
    rc.sweep_atom_max = want_number(m, "sweep", "atom_max", rc.sweep_atom_max);
    rc.sweep_points = static_cast<std::size_t>(
        want_number(m, "sweep", "points", static_cast<double>(rc.sweep_points)));
    rc.sweep_log_spacing = want_bool(m, "sweep", "log_spacing", rc.sweep_log_spacing);
    rc.sweep_photon_number =
        want_number(m, "sweep", "photon_number", rc.sweep_photon_number);
    rc.sweep_pulse_area = want_number(m, "sweep", "pulse_area", rc.sweep_pulse_area);
  }
  if (root.contains("gw")) {
    const auto& m = root.at("gw");
    if (!m.is_object()) throw config_error("field 'gw' must be an object");
    rc.gw_enabled = want_bool(m, "gw", "enabled", rc.gw_enabled);
    rc.gw_omega_min = want_number(m, "gw", "omega_min", rc.gw_omega_min);
    rc.gw_omega_max = want_number(m, "gw", "omega_max", rc.gw_omega_max);
    rc.gw_points = static_cast<std::size_t>(
        want_number(m, "gw", "points", static_cast<double>(rc.gw_points)));
    rc.gw_log_spacing = want_bool(m, "gw", "log_spacing", rc.gw_log_spacing);
    rc.gw_strain = want_number(m, "gw", "strain", rc.gw_strain);
    rc.gw_baseline = want_number(m, "gw", "baseline", rc.gw_baseline);
    rc.gw_interrogation_time =
        want_number(m, "gw", "interrogation_time", rc.gw_interrogation_time);
    rc.gw_wavenumber = want_number(m, "gw", "wavenumber", rc.gw_wavenumber);
    rc.gw_eval_time = want_number(m, "gw", "eval_time", rc.gw_eval_time);
    rc.gw_speed_of_light = want_number(m, "gw", "speed_of_light", rc.gw_speed_of_light);
  }
  if (root.contains("verify")) {
    const auto& m = root.at("verify");
    if (!m.is_object()) throw config_error("field 'verify' must be an object");
    rc.verify_grid_scale = want_number(m, "verify", "grid_scale", rc.verify_grid_scale);
    rc.verify_table_tolerance =
        want_number(m, "verify", "table_tolerance", rc.verify_table_tolerance);
  }
  if (root.contains("lab") && !root.at("lab").is_null()) {
    const auto& m = root.at("lab");
    if (!m.is_object()) throw config_error("field 'lab' must be an object or null");
    rc.has_lab = true;
    rc.lab.pulse_length = want_number(m, "lab", "pulse_length", 0.0);
    rc.lab.photon_number = want_number(m, "lab", "photon_number", 0.0);
    rc.lab.atom_number = want_number(m, "lab", "atom_number", 0.0);
    rc.lab.omega_laser = want_number(m, "lab", "omega_laser", 0.0);
    rc.lab.omega_atom = want_number(m, "lab", "omega_atom", 0.0);
    rc.lab.g13 = want_number(m, "lab", "g13", 0.0);
    rc.lab.g23 = want_number(m, "lab", "g23", 0.0);
    rc.lab.detuning = want_number(m, "lab", "detuning", 0.0);
    rc.lab.omega30 = want_number(m, "lab", "omega30", 0.0);
    rc.lab.beam_area = want_number(m, "lab", "beam_area", 0.0);
  }
  return rc;
}

json effective_config(const run_config& rc) {
  json j;
  j["mode"] = rc.mode;
  j["seed"] = rc.seed;
  j["samples"] = rc.samples;
  j["out"] = rc.out;
  j["mc_bin_width"] = rc.mc_bin_width;
  j["model"] = {{"omega", rc.model_omega},
                {"chi_a", rc.model_chi_a},
                {"amplitude", rc.model_amplitude},
                {"signal_phases", rc.signal_phases}};
  j["pair"] = {{"amplitude", rc.pair_amplitude},
               {"signal_phases", rc.pair_signal_phases},
               {"severed", rc.pair_severed}};
  j["budget"] = {{"atom_number", rc.budget_atom_number},
                 {"photon_number", rc.budget_photon_number},
                 {"pulse_area", rc.budget_pulse_area}};
  j["sweep"] = {{"atom_min", rc.sweep_atom_min},
                {"atom_max", rc.sweep_atom_max},
                {"points", rc.sweep_points},
                {"log_spacing", rc.sweep_log_spacing},
                {"photon_number", rc.sweep_photon_number},
                {"pulse_area", rc.sweep_pulse_area}};
  j["gw"] = {{"enabled", rc.gw_enabled},
             {"omega_min", rc.gw_omega_min},
             {"omega_max", rc.gw_omega_max},
             {"points", rc.gw_points},
             {"log_spacing", rc.gw_log_spacing},
             {"strain", rc.gw_strain},
             {"baseline", rc.gw_baseline},
             {"interrogation_time", rc.gw_interrogation_time},
             {"wavenumber", rc.gw_wavenumber},
             {"eval_time", rc.gw_eval_time},
             {"speed_of_light", rc.gw_speed_of_light}};
  j["verify"] = {{"grid_scale", rc.verify_grid_scale},
                 {"table_tolerance", rc.verify_table_tolerance}};
  if (rc.has_lab) {
    j["lab"] = {{"pulse_length", rc.lab.pulse_length},
                {"photon_number", rc.lab.photon_number},
                {"atom_number", rc.lab.atom_number},
                {"omega_laser", rc.lab.omega_laser},
                {"omega_atom", rc.lab.omega_atom},
                {"g13", rc.lab.g13},
                {"g23", rc.lab.g23},
                {"detuning", rc.lab.detuning},
                {"omega30", rc.lab.omega30},
                {"beam_area", rc.lab.beam_area}};
  } else {
    j["lab"] = nullptr;
  }
  return j;
}

json complex_json(const mw::cplx& z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

json output_json(const mw::interferometer_output& o) {
  json j;
  j["mean_out"] = {complex_json(o.mean_out[0]), complex_json(o.mean_out[1])};
  j["mean_number"] = {o.mean_number[0], o.mean_number[1]};
  j["signal_coefficient"] = o.signal_coefficient;
  j["signal_weights"] = o.signal_weights;
  j["delta_n_signal"] = o.delta_n_signal;
  j["variance"] = o.variance;
  j["noise"] = {{"atom_shot", o.noise.atom_shot},
                {"back_action", o.noise.back_action},
                {"optical", o.noise.optical},
                {"from_companion", o.noise.from_companion},
                {"total", o.noise.total()}};
  j["interrogation_time"] = o.interrogation_time;
  if (o.initial_amplitude > 0.0) {
    const auto est = mw::estimator(o);
    j["estimator"] = {{"estimate", est.estimate},
                      {"sigma2_s", est.sigma2_s},
                      {"interrogation_time", est.interrogation_time}};
  }
  return j;
}

json budget_json(const mw::noise_budget& b) {
  return json{{"label", "scaling estimates"},
              {"back_action", b.back_action},
              {"atom_shot", b.atom_shot},
              {"optical", b.optical},
              {"total", b.total},
              {"atom_number_optimum", b.atom_number_optimum},
              {"sql_value", b.sql_value},
              {"validity_warning", b.validity_warning}};
}

double mc_bin(const run_config& rc) {
  return rc.mc_bin_width > 0.0 ? rc.mc_bin_width : 0.01 / rc.model_omega;
}

json mc_json(const mw::mc_report& r) {
  json j;
  j["n_samples"] = r.n_samples;
  j["bin_width"] = r.bin_width;
  j["mean"] = json::array();
  j["variance"] = json::array();
  for (const auto& e : r.mean) j["mean"].push_back({{"value", e.value}, {"std_error", e.std_error}});
  for (const auto& e : r.variance)
    j["variance"].push_back({{"value", e.value}, {"std_error", e.std_error}});
  if (r.covariance.size() > 1) {
    j["covariance_01"] = {{"value", r.covariance[0][1].value},
                          {"std_error", r.covariance[0][1].std_error}};
  }
  return j;
}

void run_single_mode(const run_config& rc, json& result) {
  const auto spec = mw::sequence_spec::from_rates(rc.model_omega, rc.model_chi_a,
                                                  rc.model_amplitude, rc.signal_phases);
  mw::mode_registry reg;
  const auto out = mw::run_sequence(spec, reg);
  result["single"] = output_json(out);
  if (rc.samples > 0) {
    const auto rep =
        mw::monte_carlo({&out.delta_n}, rc.samples, rc.seed, mc_bin(rc));
    result["single"]["monte_carlo"] = mc_json(rep);
  }
  if (rc.has_lab) {
    const auto d = mw::map_params(rc.lab);
    result["derived"] = {{"g_eff", d.g_eff},
                         {"chi_effective", d.chi_effective},
                         {"light_amplitude", d.light_amplitude},
                         {"tau", d.tau},
                         {"rabi_rate", d.rabi_rate},
                         {"chi_a", d.chi_a},
                         {"pulse_area", d.pulse_area},
                         {"validity_warning", d.validity_warning}};
    result["budget"] =
        budget_json(mw::error_budget(rc.lab.atom_number, rc.lab.photon_number, d.pulse_area));
  }
}

void run_pair_mode(const run_config& rc, json& result) {
  const auto s1 = mw::sequence_spec::from_rates(rc.model_omega, rc.model_chi_a,
                                                rc.model_amplitude, rc.signal_phases);
  const auto s2 = mw::sequence_spec::from_rates(rc.model_omega, rc.model_chi_a,
                                                rc.pair_amplitude, rc.pair_signal_phases);
  mw::mode_registry reg;
  const auto po = mw::run_pair(s1, s2, reg, rc.pair_severed);
  result["pair"] = {{"first", output_json(po.first)},
                    {"second", output_json(po.second)},
                    {"covariance", po.covariance},
                    {"differential_signal", po.differential_signal},
                    {"differential_variance", po.differential_variance},
                    {"severed", rc.pair_severed}};
  if (rc.samples > 0) {
    const auto rep = mw::monte_carlo({&po.first.delta_n, &po.second.delta_n}, rc.samples,
                                     rc.seed, mc_bin(rc));
    result["pair"]["monte_carlo"] = mc_json(rep);
  }
}

void run_budget_mode(const run_config& rc, json& result) {
  const auto b = mw::error_budget(rc.budget_atom_number, rc.budget_photon_number,
                                  rc.budget_pulse_area);
  const auto opt = mw::optimize_atom_number(rc.budget_photon_number, rc.budget_pulse_area);
  result["budget"] = budget_json(b);
  result["optimum"] = {{"atom_number", opt.atom_number},
                       {"sigma2_min", opt.sigma2_min},
                       {"ratio_to_sql", opt.ratio_to_sql}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  log_line("wrote " + path.string());
}

void run_sweep_mode(const run_config& rc, json& result, const std::string& hash,
                    const std::filesystem::path& outdir) {
  if (rc.sweep_points < 2) throw config_error("field 'sweep.points' must be >= 2");
  if (!(rc.sweep_atom_min > 0.0) || !(rc.sweep_atom_max > rc.sweep_atom_min))
    throw config_error("field 'sweep.atom_min/atom_max' must satisfy 0 < min < max");

  std::ostringstream csv;
  csv << "atom_number,sigma2_back_action,sigma2_atom_shot,sigma2_optical,sigma2_total,"
         "config_hash,seed\r\n";
  double best_na = 0.0, best_total = 0.0;
  for (std::size_t i = 0; i < rc.sweep_points; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(rc.sweep_points - 1);
    const double na = rc.sweep_log_spacing
                          ? rc.sweep_atom_min *
                                std::pow(rc.sweep_atom_max / rc.sweep_atom_min, t)
                          : rc.sweep_atom_min + t * (rc.sweep_atom_max - rc.sweep_atom_min);
    const auto b = mw::error_budget(na, rc.sweep_photon_number, rc.sweep_pulse_area);
    if (best_na == 0.0 || b.total < best_total) {
      best_na = na;
      best_total = b.total;
    }
    csv << csv_num(na) << "," << csv_num(b.back_action) << "," << csv_num(b.atom_shot) << ","
        << csv_num(b.optical) << "," << csv_num(b.total) << "," << csv_field(hash) << ","
        << rc.seed << "\r\n";
  }
  write_text(outdir / "budget_sweep.csv", csv.str());
  const auto opt = mw::optimize_atom_number(rc.sweep_photon_number, rc.sweep_pulse_area);
  result["sweep"] = {{"csv", "budget_sweep.csv"},
                     {"grid_minimum_atom_number", best_na},
                     {"grid_minimum_total", best_total},
                     {"optimum",
                      {{"atom_number", opt.atom_number},
                       {"sigma2_min", opt.sigma2_min},
                       {"ratio_to_sql", opt.ratio_to_sql}}}};

  if (rc.gw_enabled) {
    if (rc.gw_points < 2) throw config_error("field 'gw.points' must be >= 2");
    if (!(rc.gw_omega_min > 0.0) || !(rc.gw_omega_max > rc.gw_omega_min))
      throw config_error("field 'gw.omega_min/omega_max' must satisfy 0 < min < max");
    std::ostringstream gcsv;
    gcsv << "omega,phase_response,config_hash,seed\r\n";
    for (std::size_t i = 0; i < rc.gw_points; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(rc.gw_points - 1);
      const double w = rc.gw_log_spacing
                           ? rc.gw_omega_min * std::pow(rc.gw_omega_max / rc.gw_omega_min, t)
                           : rc.gw_omega_min + t * (rc.gw_omega_max - rc.gw_omega_min);
      mw::gw_params g;
      g.omega = w;
      g.strain = rc.gw_strain;
      g.baseline = rc.gw_baseline;
      g.interrogation_time = rc.gw_interrogation_time;
      g.wavenumber = rc.gw_wavenumber;
      g.eval_time = rc.gw_eval_time;
      g.speed_of_light = rc.gw_speed_of_light;
      gcsv << csv_num(w) << "," << csv_num(mw::gw_phase_response(g)) << "," << csv_field(hash)
           << "," << rc.seed << "\r\n";
    }
    write_text(outdir / "gw_response.csv", gcsv.str());
    result["gw"] = {{"csv", "gw_response.csv"}};
  }
}

// composed verification: profile identities, numeric-vs-closed-form kernel
// table, propagator accuracy, and a seeded monte-carlo moment check
bool run_verify_mode(const run_config& rc, json& result) {
  bool all = true;
  json checks = json::array();
  auto push = [&](const std::string& name, double value, double expected, double residual,
                  double tol) {
    const bool pass = residual <= tol;
    all = all && pass;
    checks.push_back({{"name", name},
                      {"value", value},
                      {"expected", expected},
                      {"residual", residual},
                      {"tolerance", tol},
                      {"pass", pass}});
  };

  const auto prep = mw::profile_checks(mw::profile_spec{});
  for (const auto& c : prep.checks) {
    all = all && c.pass;
    checks.push_back({{"name", "profile." + c.name},
                      {"value", c.value},
                      {"expected", c.expected},
                      {"residual", c.residual},
                      {"tolerance", c.tolerance},
                      {"pass", c.pass}});
  }
  result["profile_report"] = json::parse(prep.to_json());

  // kernel table vs closed form at a quarter pulse
  {
    mw::kernel_params p;
    p.chi = rc.model_chi_a * rc.model_chi_a / rc.model_omega;
    p.a_c_amp = rc.model_omega / rc.model_chi_a;
    p.a_p_amp = p.a_c_amp;
    p.duration = (3.14159265358979323846 / 4.0) / rc.model_omega;
    mw::mode_registry reg;
    const auto ca = reg.register_mode("verify_c", mw::mode_kind::filtered_optical);
    const auto pa = reg.register_mode("verify_p", mw::mode_kind::filtered_optical);
    const auto aa =
        reg.register_mode("verify_a", mw::mode_kind::discrete_atom, mw::cplx{10.0, 0.0});
    const auto bb = reg.register_mode("verify_b", mw::mode_kind::discrete_atom);
    const auto rec = mw::evolve_fluctuations(p, mw::make_operator(reg, aa),
                                             mw::make_operator(reg, bb), ca, pa, reg);
    if (!(rc.verify_grid_scale > 0.0))
      throw config_error("field 'verify.grid_scale' must be positive");
    const std::size_t n =
        static_cast<std::size_t>(std::llround(p.theta() / rc.verify_grid_scale));
    const auto grid = mw::grid_config::for_duration(p.duration, n, rc.seed);
    const auto tab = mw::integrate_kernel(p, rec.mean_in, grid);
    double num = 0.0, den = 0.0;
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        const mw::mode_id chan = (c == 0) ? ca : pa;
        for (int q = 0; q < 2; ++q) {
          const auto& com = rec.inj_common[r].filtered.at(chan);
          const auto& dif = rec.inj_differential[r].filtered.at(chan);
          const auto b1 = mw::bin_integrals(q == 0 ? com.ann : com.cre, n);
          const auto b2 = mw::bin_integrals(q == 0 ? dif.ann : dif.cre, n);
          for (std::size_t k = 0; k < n; ++k) {
            const mw::cplx closed = b1[k] + b2[k];
            num += std::norm(tab.bins[r][c][q][k] - closed);
            den += std::norm(closed);
          }
        }
      }
    }
    push("kernel_table_l2", std::sqrt(num), 0.0,
         den > 0.0 ? std::sqrt(num / den) : std::sqrt(num), rc.verify_table_tolerance);
    const mw::cplx exact = std::polar(1.0, -p.theta());
    push("propagator_quarter_pulse", std::abs(tab.propagator[0]), 1.0,
         std::abs(tab.propagator[0] - exact), 1e-8);
    push("mean_norm_drift", tab.mean_norm_drift, 0.0, tab.mean_norm_drift, 1e-10);
  }

  // seeded monte-carlo moment check: variance of amp (a + a+) is amp^2
  {
    const double amp = 1000.0;
    mw::mode_registry reg;
    const auto id = reg.register_mode("verify_mc", mw::mode_kind::discrete_atom);
    const auto a = mw::make_operator(reg, id);
    const auto x = mw::combine({{mw::cplx{amp, 0.0}, a}, {mw::cplx{amp, 0.0}, mw::dagger(a)}});
    const std::size_t ns = rc.samples > 0 ? rc.samples : 20000;
    const auto rep = mw::monte_carlo({&x}, ns, rc.seed, 1.0);
    const double expect = amp * amp;
    const double resid = std::abs(rep.variance[0].value - expect);
    push("mc_variance", rep.variance[0].value, expect, resid,
         3.0 * rep.variance[0].std_error);
  }

  result["checks"] = checks;
  result["all_pass"] = all;
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"matter-wave interferometer simulator"};
  std::string config_path, mode_flag, out_flag;
  std::uint64_t seed_flag = 0;
  std::int64_t samples_flag = -1;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--mode", mode_flag, "single | pair | budget | sweep | verify");
  app.add_option("--out", out_flag, "output directory");
  auto* seed_opt = app.add_option("--seed", seed_flag, "rng master seed");
  app.add_option("--samples", samples_flag, "monte-carlo sample count (0 disables)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  run_config rc;
  try {
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw config_error("cannot read config file: " + config_path);
      json root;
      try {
        root = json::parse(f);
      } catch (const json::parse_error& e) {
        throw config_error(std::string("config parse error: ") + e.what());
      }
      if (!root.is_object()) throw config_error("config root must be an object");
      rc = parse_config(root);
    }
    if (!mode_flag.empty()) rc.mode = mode_flag;
    if (!out_flag.empty()) rc.out = out_flag;
    if (seed_opt->count() > 0) rc.seed = seed_flag;
    if (samples_flag >= 0) rc.samples = static_cast<std::uint64_t>(samples_flag);
    if (rc.mode != "single" && rc.mode != "pair" && rc.mode != "budget" &&
        rc.mode != "sweep" && rc.mode != "verify")
      throw config_error(rc.mode.empty()
                             ? "field 'mode' is required (--mode or config)"
                             : "field 'mode' must be one of single|pair|budget|sweep|verify, "
                               "got '" + rc.mode + "'");
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  try {
    const json cfg = effective_config(rc);
    const std::string cfg_text = cfg.dump(2);
    const std::string hash = hex64(fnv1a64(cfg_text));
    log_line("mode=" + rc.mode + " hash=" + hash);
    const std::filesystem::path outdir(rc.out);
    std::filesystem::create_directories(outdir);

    json result;
    result["config"] = cfg;
    result["config_hash"] = hash;
    result["seed"] = rc.seed;
    result["mode"] = rc.mode;

    bool verify_ok = true;
    if (rc.mode == "single") run_single_mode(rc, result);
    else if (rc.mode == "pair") run_pair_mode(rc, result);
    else if (rc.mode == "budget") run_budget_mode(rc, result);
    else if (rc.mode == "sweep") run_sweep_mode(rc, result, hash, outdir);
    else verify_ok = run_verify_mode(rc, result);

    write_text(outdir / "result.json", result.dump(2) + "\n");
    if (!verify_ok) {
      std::cerr << "verification failed; see result.json\n";
      return 2;
    }
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
