#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "lsqswarm/dynamics.hpp"

namespace lsqswarm {

using PartitionVariant =
    std::variant<HomogeneousPartition, Case1Partition, Case2Partition>;
using NetworkVariant = std::variant<GridNetwork, DoubleLayerNetwork>;

struct SimConfig {
  PartitionVariant partition;
  NetworkVariant network;
  InitRule x0_rule = InitRule::Zero;
  InitRule z0_rule = InitRule::Zero;
  std::uint64_t seed = 0;
  double h = 1e-3;        // virtual-time step
  double t_end = 50.0;
  std::size_t record_every = 10;  // steps between recorded samples
  double tol_converge = 1e-6;
  double tol_exact = 1e-8;

  Variant variant() const { return static_cast<Variant>(partition.index()); }
};

std::unique_ptr<FieldModel> make_model(const SimConfig& cfg);

enum class Classification { Exact, LeastSquaresOnly, NotConverged };
const char* to_string(Classification c);

struct RunRecord {
  std::vector<double> times;
  std::vector<double> e;            // estimation error against `reference`
  std::vector<double> ye;           // sum of squared residual trackers
  std::vector<double> grad_norm;    // normal-equation residual at consensus
  std::vector<double> disagreement;
  std::vector<double> conservation_drift;
  DenseVector final_x;
  Classification classification = Classification::NotConverged;
  double rate_estimate = 0.0;       // NaN when no decay was measurable
  double resolved_h = 0.0;          // after the stability auto-reduction
  DenseVector reference;            // what E was measured against
  bool reference_is_oracle = false; // false: the run's own final consensus
};

// One classical Runge-Kutta update of the swarm state.
SwarmState rk4_step(const FieldModel& model, const SwarmState& s, double h);

RunRecord simulate(const SimConfig& cfg);

struct LogLinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  // max |fit residual| over the window, relative to the log-range covered
  double residual_ratio = 0.0;
};

// Straight least-squares fit of log(values) against times; values <= 1e-13
// are skipped.
LogLinearFit fit_log_linear(const std::vector<double>& times,
                            const std::vector<double>& values);

// Windowed fit over the middle 60% of the decaying part of E(t); throws
// InsufficientDecay when E never drops below a tenth of its initial value or
// fewer than 10 samples sit above the floor.
LogLinearFit decay_fit(const RunRecord& record);
double estimate_rate(const RunRecord& record);

double conservation_drift(const FieldModel& model, const SwarmState& s);

}  // namespace lsqswarm
