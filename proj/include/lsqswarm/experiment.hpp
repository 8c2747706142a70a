#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lsqswarm/numerics.hpp"
#include "lsqswarm/simulation.hpp"

namespace lsqswarm {

// A fully validated experiment description: raw fields as written in the
// config file plus the resolved problem (matrix, partition, network) ready to
// simulate. Validation happens entirely at parse time.
struct ExperimentConfig {
  std::filesystem::path source_path;
  std::filesystem::path matrix_path;
  std::filesystem::path vector_path;
  Variant variant = Variant::Hom;
  std::string b_rule;

  enum class Topology { StandardGrid, Paths, File };
  Topology topology = Topology::StandardGrid;
  std::filesystem::path topology_path;

  std::vector<std::size_t> flat_widths;                 // case1 col_widths
  std::vector<std::vector<std::size_t>> nested_heights; // case1 row_heights
  std::vector<std::size_t> flat_heights;                // case2 row_heights
  std::vector<std::vector<std::size_t>> nested_widths;  // case2 col_widths

  std::optional<std::filesystem::path> out_dir;
  bool verify_spectral = false;

  DenseMatrix a;
  DenseVector b;
  SimConfig sim;  // partition + network + integrator knobs, ready to run
};

ExperimentConfig parse_config(const std::filesystem::path& path);

struct CliOverrides {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> h;
};

// Output directory precedence: --out flag, config `out:`, $LSQ_SWARM_OUT/<stem>,
// ./out/<stem>.
std::filesystem::path resolve_out_dir(const ExperimentConfig& cfg,
                                      const CliOverrides& ov);

// Integrates the experiment and writes timeseries.csv + summary.txt (and
// spectral.txt when requested). Returns 0 when the run converged, 2 when it
// did not.
int run_experiment(const ExperimentConfig& cfg, const CliOverrides& ov,
                   std::ostream& log);

// Builds the compact system only and checks its spectrum plus the agreement
// between the agent-local field and Q on seeded random states. Returns 0 iff
// every check passes.
int verify_experiment(const ExperimentConfig& cfg, const CliOverrides& ov,
                      std::ostream& log);

void write_timeseries_csv(std::ostream& out, const RunRecord& rec);
void write_summary(std::ostream& out, const ExperimentConfig& cfg,
                   const CliOverrides& ov, const RunRecord& rec);
void write_spectral_report(std::ostream& out, const CompactSystem& cs,
                           const SpectralReport& report);

}  // namespace lsqswarm
