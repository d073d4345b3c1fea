#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "drabi/error.hpp"
#include "drabi/harness.hpp"

namespace {

int default_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"drabi: worldline Monte Carlo and exact diagonalization for a dissipative qubit-cavity model"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  bool resume = false;
  std::uint64_t stop_after = 0;

  app.add_option("--out", out_dir, "Output directory (overrides out_dir in the config)");
  app.add_option("--seed", seed, "Master seed (overrides seed in the config)");
  app.add_option("--threads", threads, "Worker threads (default: DRABI_THREADS or all cores)")->check(CLI::PositiveNumber);

  auto* kt = app.add_subcommand("kernel-table", "Build and certify kernel tables for every grid point");
  kt->add_option("--config", config_path, "Run configuration")->required();

  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over the (coupling, beta) grid");
  sweep->add_option("--config", config_path, "Run configuration")->required();
  sweep->add_flag("--resume", resume, "Continue from checkpoints in the output directory");
  sweep->add_option("--stop-after", stop_after, "Stop every chain at this sweep")->group("");

  std::vector<std::string> results;
  int bootstrap = 1000;
  auto* fit = app.add_subcommand("bkt-fit", "Locate the transition from sweep result tables");
  fit->add_option("results", results, "results.csv files")->required()->check(CLI::ExistingFile);
  fit->add_option("--bootstrap", bootstrap, "Bootstrap replicas")->check(CLI::NonNegativeNumber);

  auto* ed = app.add_subcommand("ed-check", "Exact-diagonalization identity suite");
  ed->add_option("--config", config_path, "Run configuration")->required();

  auto* relax = app.add_subcommand("relax", "Relaxation traces by exact diagonalization");
  relax->add_option("--config", config_path, "Run configuration")->required();

  double alpha_cav = 0.0;
  auto* res = app.add_subcommand("resistance", "Circuit resistance for a cavity-bath coupling");
  res->add_option("--alpha-cav", alpha_cav, "Cavity-bath coupling")->required();

  CLI11_PARSE(app, argc, argv);

  drabi::HarnessOptions opt;
  opt.log = &std::cerr;
  opt.out_dir = out_dir;
  opt.resume = resume;
  opt.stop_after = stop_after;
  if (app.count("--seed")) {
    opt.seed = seed;
    opt.overrides.emplace_back("seed", std::to_string(seed));
  }
  if (threads > 0) {
    opt.threads = threads;
    opt.overrides.emplace_back("threads", std::to_string(threads) + " (--threads)");
  } else if (const char* env = std::getenv("DRABI_THREADS")) {
    opt.threads = std::max(1, std::atoi(env));
    opt.overrides.emplace_back("threads", std::to_string(opt.threads) + " (DRABI_THREADS)");
  } else {
    opt.threads = default_threads();
  }
  if (!out_dir.empty()) opt.overrides.emplace_back("out_dir", out_dir);
  if (resume) opt.overrides.emplace_back("resume", "true");

  try {
    if (*kt) {
      drabi::cmd_kernel_table(drabi::load_config(config_path), opt);
    } else if (*sweep) {
      drabi::cmd_sweep(drabi::load_config(config_path), opt);
    } else if (*fit) {
      std::vector<std::filesystem::path> paths(results.begin(), results.end());
      drabi::CriticalOptions copt;
      copt.bootstrap = bootstrap;
      if (opt.seed) copt.seed = *opt.seed;
      drabi::cmd_bkt_fit(paths, opt, copt);
    } else if (*ed) {
      const auto lines = drabi::cmd_ed_check(drabi::load_config(config_path), opt);
      bool ok = true;
      for (const auto& l : lines) {
        std::cout << (l.pass ? "PASS " : "FAIL ") << l.name << ": " << std::setprecision(3) << l.value
                  << " (limit " << l.threshold << ")" << (l.detail.empty() ? "" : " " + l.detail) << '\n';
        ok = ok && l.pass;
      }
      return ok ? 0 : 1;
    } else if (*relax) {
      drabi::cmd_relax(drabi::load_config(config_path), opt);
    } else if (*res) {
      std::cout << std::setprecision(6) << drabi::resistance_estimate(alpha_cav) << " kOhm\n";
    }
  } catch (const drabi::Interrupted& e) {
    std::cerr << "interrupted: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
