#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string cli_path() {
#ifdef MATTERWAVE_BIN
  return MATTERWAVE_BIN;
#else
  const char* p = std::getenv("MATTERWAVE_BIN");
  REQUIRE_MESSAGE(p != nullptr, "MATTERWAVE_BIN must point at the built binary");
  return p;
#endif
}

fs::path case_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "matterwave_cli_tests" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

int run_cli(const std::string& args, const fs::path& stderr_file = {}) {
  std::string cmd = "\"" + cli_path() + "\" " + args + " >/dev/null";
  cmd += stderr_file.empty() ? " 2>/dev/null" : " 2>\"" + stderr_file.string() + "\"";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE_MESSAGE(f.good(), ("missing file: " + p.string()));
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) { return json::parse(read_file(p)); }

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

std::vector<std::string> crlf_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find("\r\n", pos);
    REQUIRE_MESSAGE(nl != std::string::npos, ("csv line without crlf terminator"));
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 2;
  }
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t c = line.find(',', pos);
    if (c == std::string::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, c - pos));
    pos = c + 1;
  }
}

bool is_hex16(const std::string& s) {
  if (s.size() != 16) return false;
  for (const char c : s)
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  return true;
}

}  // namespace

TEST_CASE("verify mode runs every self-check and exits cleanly") {
  const auto dir = case_dir("verify");
  CHECK(run_cli("--mode verify --out \"" + dir.string() + "\" --seed 3") == 0);
  const auto j = read_json(dir / "result.json");
  CHECK(j["mode"] == "verify");
  CHECK(j["seed"] == 3);
  CHECK(is_hex16(j["config_hash"].get<std::string>()));
  CHECK(j["all_pass"].get<bool>());
  REQUIRE(j["checks"].is_array());
  CHECK(j["checks"].size() >= 7);  // four profile identities + table + propagator + drift + mc
  for (const auto& c : j["checks"]) CHECK(c["pass"].get<bool>());
  // the effective configuration is echoed with every default materialized
  CHECK(j["config"]["model"]["omega"].get<double>() == 1.0);
  CHECK(j["config"]["verify"]["table_tolerance"].get<double>() == 1e-6);
}

TEST_CASE("single mode reproduces the frozen reference numbers") {
  const auto dir = case_dir("single");
  write_file(dir / "cfg.json",
             R"({"mode":"single","model":{"omega":1.0,"chi_a":0.01,"amplitude":100.0,)"
             R"("signal_phases":[0.3,0.1,-0.2]}})");
  CHECK(run_cli("--config \"" + (dir / "cfg.json").string() + "\" --out \"" + dir.string() +
                "\"") == 0);
  const auto j = read_json(dir / "result.json");
  const auto& s = j["single"];
  CHECK(s["variance"].get<double>() == doctest::Approx(38738.93571891066).epsilon(1e-12));
  CHECK(s["noise"]["atom_shot"].get<double>() == doctest::Approx(1e4).epsilon(1e-12));
  CHECK(s["noise"]["back_action"].get<double>() == doctest::Approx(1250.0).epsilon(1e-12));
  CHECK(s["noise"]["optical"].get<double>() ==
        doctest::Approx(27488.935718910663).epsilon(1e-12));
  CHECK(s["noise"]["from_companion"].get<double>() == 0.0);
  CHECK(s["mean_out"][0]["re"].get<double>() == doctest::Approx(-50.0).epsilon(1e-10));
  CHECK(s["mean_out"][0]["im"].get<double>() == doctest::Approx(-50.0).epsilon(1e-10));
  CHECK(s["mean_out"][1]["re"].get<double>() == doctest::Approx(-50.0).epsilon(1e-10));
  CHECK(s["mean_out"][1]["im"].get<double>() == doctest::Approx(50.0).epsilon(1e-10));
  CHECK(s["signal_coefficient"].get<double>() == -1e4);
  CHECK(s["delta_n_signal"].get<double>() ==
        doctest::Approx(-1e4 * ((0.3 - 0.2) - 2.0 * 0.1)).epsilon(1e-12));
  CHECK(s["estimator"]["sigma2_s"].get<double>() ==
        doctest::Approx(3.873893571891066e-4).epsilon(1e-12));
}

TEST_CASE("pair mode carries the shared-control covariance") {
  const auto dir = case_dir("pair");
  write_file(dir / "cfg.json",
             R"({"mode":"pair","model":{"omega":1.0,"chi_a":0.01,"amplitude":100.0},)"
             R"("pair":{"amplitude":100.0}})");
  CHECK(run_cli("--config \"" + (dir / "cfg.json").string() + "\" --out \"" + dir.string() +
                "\"") == 0);
  const auto j = read_json(dir / "result.json");
  const auto& p = j["pair"];
  CHECK_FALSE(p["severed"].get<bool>());
  CHECK(p["covariance"].get<double>() ==
        doctest::Approx(13207.963267948959).epsilon(1e-12));
  CHECK(p["first"]["variance"].get<double>() ==
        doctest::Approx(38738.93571891066).epsilon(1e-12));
  CHECK(p["second"]["variance"].get<double>() ==
        doctest::Approx(53738.93571891066).epsilon(1e-12));
  CHECK(p["differential_variance"].get<double>() ==
        doctest::Approx(66061.94490192339).epsilon(1e-12));

  // severing the control link decorrelates the two interferometers
  const auto dir2 = case_dir("pair_severed");
  write_file(dir2 / "cfg.json",
             R"({"mode":"pair","model":{"omega":1.0,"chi_a":0.01,"amplitude":100.0},)"
             R"("pair":{"amplitude":100.0,"severed":true}})");
  CHECK(run_cli("--config \"" + (dir2 / "cfg.json").string() + "\" --out \"" + dir2.string() +
                "\"") == 0);
  const auto j2 = read_json(dir2 / "result.json");
  CHECK(j2["pair"]["covariance"].get<double>() == 0.0);
  CHECK(j2["pair"]["second"]["noise"]["from_companion"].get<double>() == 0.0);
}

TEST_CASE("budget mode prints the scaling estimates and the optimum") {
  const auto dir = case_dir("budget");
  write_file(dir / "cfg.json",
             R"({"mode":"budget","budget":{"atom_number":1e6,"photon_number":1e6,)"
             R"("pulse_area":1.0}})");
  CHECK(run_cli("--config \"" + (dir / "cfg.json").string() + "\" --out \"" + dir.string() +
                "\"") == 0);
  const auto j = read_json(dir / "result.json");
  CHECK(j["budget"]["back_action"].get<double>() == 1e-6);
  CHECK(j["budget"]["atom_shot"].get<double>() == 2e-6);
  CHECK(j["budget"]["optical"].get<double>() == 1e-6);
  CHECK(j["budget"]["total"].get<double>() == doctest::Approx(4e-6).epsilon(1e-14));
  CHECK(j["budget"]["validity_warning"].get<bool>());
  CHECK(j["optimum"]["atom_number"].get<double>() ==
        doctest::Approx(1414213.5623730952).epsilon(1e-12));
  CHECK(j["optimum"]["ratio_to_sql"].get<double>() ==
        doctest::Approx(3.82842712474619).epsilon(1e-12));
}

TEST_CASE("sweep mode writes crlf csv tables keyed by the config hash") {
  const auto dir = case_dir("sweep");
  CHECK(run_cli("--mode sweep --out \"" + dir.string() + "\" --seed 4") == 0);
  const auto j = read_json(dir / "result.json");
  const std::string hash = j["config_hash"].get<std::string>();

  const auto lines = crlf_lines(read_file(dir / "budget_sweep.csv"));
  REQUIRE(lines.size() == 201);  // header + default 200 grid points
  CHECK(lines[0] ==
        "atom_number,sigma2_back_action,sigma2_atom_shot,sigma2_optical,sigma2_total,"
        "config_hash,seed");
  double best_na = 0.0, best_total = 0.0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_fields(lines[i]);
    REQUIRE(f.size() == 7);
    CHECK(f[5] == hash);
    CHECK(f[6] == "4");
    const double na = std::stod(f[0]);
    const double total = std::stod(f[4]);
    // the three parts printed alongside the total must recompose it
    const double parts = std::stod(f[1]) + std::stod(f[2]) + std::stod(f[3]);
    CHECK(total == doctest::Approx(parts).epsilon(1e-12));
    if (best_na == 0.0 || total < best_total) {
      best_na = na;
      best_total = total;
    }
  }
  // grid minimum sits at the closed-form optimum sqrt(2) N_L up to grid spacing
  CHECK(best_na > 1.25e6);
  CHECK(best_na < 1.60e6);
  CHECK(j["sweep"]["grid_minimum_atom_number"].get<double>() ==
        doctest::Approx(best_na).epsilon(1e-15));

  const auto glines = crlf_lines(read_file(dir / "gw_response.csv"));
  REQUIRE(glines.size() == 201);
  CHECK(glines[0] == "omega,phase_response,config_hash,seed");
  for (std::size_t i = 1; i < glines.size(); ++i) {
    const auto f = split_fields(glines[i]);
    REQUIRE(f.size() == 4);
    CHECK(f[2] == hash);
  }
}

TEST_CASE("echoed config reproduces the identical result byte for byte") {
  const auto dir = case_dir("roundtrip");
  write_file(dir / "cfg.json", R"({"model":{"omega":2.0,"chi_a":0.02,"amplitude":50.0}})");
  CHECK(run_cli("--config \"" + (dir / "cfg.json").string() +
                "\" --mode single --seed 5 --out \"" + dir.string() + "\"") == 0);
  const std::string first = read_file(dir / "result.json");
  const json echoed = json::parse(first)["config"];
  write_file(dir / "echo.json", echoed.dump(2));
  // no flag overrides: mode, seed, and output directory come from the echo
  CHECK(run_cli("--config \"" + (dir / "echo.json").string() + "\"") == 0);
  const std::string second = read_file(dir / "result.json");
  CHECK(first == second);
}

TEST_CASE("monte-carlo sampling is deterministic for a fixed seed") {
  const auto d1 = case_dir("mc_a");
  const auto d2 = case_dir("mc_b");
  const std::string args = "--mode single --samples 2000 --seed 7 --out \"";
  CHECK(run_cli(args + d1.string() + "\"") == 0);
  CHECK(run_cli(args + d2.string() + "\"") == 0);
  const auto m1 = read_json(d1 / "result.json")["single"]["monte_carlo"];
  const auto m2 = read_json(d2 / "result.json")["single"]["monte_carlo"];
  CHECK(m1.dump() == m2.dump());
  CHECK(m1["n_samples"] == 2000);
  // the sampled variance agrees with the propagated one within three errors
  const double var = read_json(d1 / "result.json")["single"]["variance"].get<double>();
  CHECK(std::abs(m1["variance"][0]["value"].get<double>() - var) <=
        3.0 * m1["variance"][0]["std_error"].get<double>());

  const auto d3 = case_dir("mc_c");
  CHECK(run_cli("--mode single --samples 2000 --seed 8 --out \"" + d3.string() + "\"") == 0);
  const auto m3 = read_json(d3 / "result.json")["single"]["monte_carlo"];
  CHECK(m1["variance"][0]["value"].get<double>() !=
        m3["variance"][0]["value"].get<double>());
}

TEST_CASE("failures are reported on distinct exit codes") {
  const auto dir = case_dir("errors");

  // unknown mode: configuration error
  CHECK(run_cli("--mode bogus --out \"" + dir.string() + "\"", dir / "err1.txt") == 1);
  CHECK(read_file(dir / "err1.txt").find("config error:") != std::string::npos);

  // missing config file
  CHECK(run_cli("--config /nonexistent.json --mode single --out \"" + dir.string() + "\"") ==
        1);

  // wrong field type names the offending field
  write_file(dir / "bad.json", R"({"mode":"single","model":{"omega":"fast"}})");
  CHECK(run_cli("--config \"" + (dir / "bad.json").string() + "\" --out \"" + dir.string() +
                    "\"",
                dir / "err2.txt") == 1);
  CHECK(read_file(dir / "err2.txt").find("model.omega") != std::string::npos);

  // unattainable verification tolerance: the run completes but verification fails
  write_file(dir / "tight.json", R"({"mode":"verify","verify":{"table_tolerance":1e-18}})");
  CHECK(run_cli("--config \"" + (dir / "tight.json").string() + "\" --out \"" + dir.string() +
                    "\"",
                dir / "err3.txt") == 2);
  CHECK(read_file(dir / "err3.txt").find("verification failed") != std::string::npos);
  const auto j = read_json(dir / "result.json");
  CHECK_FALSE(j["all_pass"].get<bool>());

  // unknown flag: usage error from the argument parser
  CHECK(run_cli("--frobnicate") == 1);
}
