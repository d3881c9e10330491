#include <atomic>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "evodyn/io.hpp"
#include "evodyn/scenario.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int run_one(const std::string& config, const std::string& out_dir, bool write_trajectory) {
  const evodyn::Scenario sc = evodyn::load_scenario(config);
  const fs::path dir = out_dir.empty() ? fs::path(sc.name) : fs::path(out_dir);
  const auto summary = evodyn::run_scenario(sc, dir.string(), write_trajectory);
  std::cout << "scenario '" << sc.name << "' finished: final mass "
            << evodyn::format_g17(summary["final_state"]["total_mass"].get<double>())
            << ", artifacts in " << dir.string() << "\n";
  return kExitOk;
}

int validate_one(const std::string& config) {
  const evodyn::Scenario sc = evodyn::load_scenario(config);
  const auto report = evodyn::validate_scenario(sc);
  const auto& checks = report["assumptions"];
  for (const char* key : {"A1", "A2", "A3", "A4", "A5", "A6"}) {
    const auto& c = checks[key];
    std::cout << key << ": " << (c["pass"].get<bool>() ? "pass" : "FAIL");
    const std::string note = c["note"].get<std::string>();
    if (!note.empty()) std::cout << " (" << note << ")";
    std::cout << "\n";
  }
  std::cout << "varpi = " << evodyn::format_g17(checks["varpi"].get<double>()) << "\n";
  if (checks["plateau"].get<bool>())
    std::cout << "note: R stays at 1 past the capacity root (plateau)\n";
  return kExitOk;
}

int sweep(const std::string& config_dir, const std::string& out_dir, int jobs) {
  std::vector<fs::path> configs;
  for (const auto& entry : fs::directory_iterator(config_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      configs.push_back(entry.path());
  std::sort(configs.begin(), configs.end());
  if (configs.empty()) {
    std::cerr << "no .json scenarios in " << config_dir << "\n";
    return kExitConfig;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<int> worst{kExitOk};
  std::mutex io_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= configs.size()) return;
      const fs::path& cfg = configs[k];
      int code = kExitOk;
      std::string message;
      try {
        const evodyn::Scenario sc = evodyn::load_scenario(cfg.string());
        const fs::path dir = (out_dir.empty() ? fs::path(".") : fs::path(out_dir)) / sc.name;
        evodyn::run_scenario(sc, dir.string(), true);
        message = "ok -> " + dir.string();
      } catch (const evodyn::ConfigError& e) {
        code = kExitConfig;
        message = std::string("config error: ") + e.what();
      } catch (const evodyn::NumericalError& e) {
        code = kExitNumerical;
        message = std::string("numerical failure: ") + e.what();
      }
      std::lock_guard<std::mutex> lock(io_mutex);
      std::cout << cfg.filename().string() << ": " << message << "\n";
      int expect = worst.load();
      while (code > expect && !worst.compare_exchange_weak(expect, code)) {
      }
    }
  };
  std::vector<std::thread> pool;
  const int n_workers = std::max(1, jobs);
  pool.reserve(n_workers);
  for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return worst.load();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"replicator-mutator dynamics on discretized strategy spaces"};
  app.require_subcommand(1);

  std::string config, out_dir, config_dir;
  int jobs = 1;
  std::uint64_t seed = 0;

  auto* sim = app.add_subcommand("simulate", "integrate a scenario and write all artifacts");
  sim->add_option("config", config, "scenario config (JSON)")->required();
  sim->add_option("--out", out_dir, "artifact directory (default: scenario name)");
  sim->add_option("--seed", seed, "reserved; no randomness in the current solvers");

  auto* val = app.add_subcommand("validate", "check the config and the rate assumptions");
  val->add_option("config", config, "scenario config (JSON)")->required();

  auto* ana = app.add_subcommand("analyze", "run analyses without writing the trajectory");
  ana->add_option("config", config, "scenario config (JSON)")->required();
  ana->add_option("--out", out_dir, "artifact directory (default: scenario name)");
  ana->add_option("--seed", seed, "reserved; no randomness in the current solvers");

  auto* swp = app.add_subcommand("sweep", "run every scenario in a directory");
  swp->add_option("config-dir", config_dir, "directory of scenario configs")->required();
  swp->add_option("--out", out_dir, "root artifact directory");
  swp->add_option("--jobs", jobs, "concurrent scenarios")->check(CLI::PositiveNumber);
  swp->add_option("--seed", seed, "reserved; no randomness in the current solvers");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return run_one(config, out_dir, true);
    if (val->parsed()) return validate_one(config);
    if (ana->parsed()) return run_one(config, out_dir, false);
    if (swp->parsed()) return sweep(config_dir, out_dir, jobs);
  } catch (const evodyn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const evodyn::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}
