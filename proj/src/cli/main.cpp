#include <atomic>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "lsqswarm/errors.hpp"
#include "lsqswarm/experiment.hpp"

namespace {

struct JobResult {
  std::filesystem::path path;
  int code = 1;
  std::string log;
  std::string err;
};

int run_all(bool verify_mode, const std::vector<std::string>& config_paths,
            const lsqswarm::CliOverrides& base, unsigned jobs) {
  std::vector<JobResult> results(config_paths.size());
  for (std::size_t i = 0; i < config_paths.size(); ++i)
    results[i].path = config_paths[i];

  // with several configs, a shared --out gets one subdirectory per config
  const bool subdirs = base.out && config_paths.size() > 1;

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= results.size()) break;
      JobResult& job = results[i];
      std::ostringstream log;
      try {
        lsqswarm::ExperimentConfig cfg = lsqswarm::parse_config(job.path);
        lsqswarm::CliOverrides ov = base;
        if (subdirs) ov.out = *base.out / job.path.stem();
        job.code = verify_mode ? lsqswarm::verify_experiment(cfg, ov, log)
                               : lsqswarm::run_experiment(cfg, ov, log);
      } catch (const lsqswarm::Error& e) {
        job.err = e.what();
        job.code = 1;
      }
      job.log = log.str();
    }
  };

  const unsigned workers = std::max(
      1u, std::min<unsigned>(jobs, static_cast<unsigned>(results.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  int rc = 0;
  for (const JobResult& job : results) {
    std::cout << job.log;
    if (!job.err.empty())
      std::cerr << job.path.string() << ": " << job.err << '\n';
    rc = std::max(rc, job.code);
  }
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"continuous-time distributed least-squares simulator"};
  app.set_help_flag("--help", "display help");  // frees -h/--h for the step size
  app.require_subcommand(1);

  std::vector<std::string> configs;
  std::string out;
  std::uint64_t seed = 0;
  double h = 0.0;
  unsigned jobs = 1;

  auto add_common = [&](CLI::App* sub) {
    sub->set_help_flag("--help", "display help");
    sub->add_option("configs", configs, "experiment config files")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out,
                    "output directory (per-config subdirectories when several "
                    "configs are given)");
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--h", h, "override the integrator step size");
    sub->add_option("--jobs", jobs, "worker threads for config sweeps")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* run_cmd = app.add_subcommand(
      "run", "integrate the experiment and write timeseries/summary artifacts");
  add_common(run_cmd);
  CLI::App* verify_cmd = app.add_subcommand(
      "verify", "check the compact system spectrum and field agreement");
  add_common(verify_cmd);

  CLI11_PARSE(app, argc, argv);

  CLI::App* sub = app.get_subcommands().front();
  lsqswarm::CliOverrides ov;
  if (sub->count("--out")) ov.out = std::filesystem::path(out);
  if (sub->count("--seed")) ov.seed = seed;
  if (sub->count("--h")) ov.h = h;

  return run_all(sub == verify_cmd, configs, ov, jobs);
}
