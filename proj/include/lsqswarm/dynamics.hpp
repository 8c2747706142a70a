#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "lsqswarm/dense.hpp"
#include "lsqswarm/partition.hpp"
#include "lsqswarm/topology.hpp"

namespace lsqswarm {

enum class Variant { Hom, Case1, Case2 };
enum class InitRule { Zero, SeededUniform };

struct SegmentLayout {
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> sizes;
  std::size_t total = 0;
  void push(std::size_t size) {
    offsets.push_back(total);
    sizes.push_back(size);
    total += size;
  }
};

// Agents are ordered canonically: row-major (i*n + j) for the scalar variant,
// (cluster, member) lexicographic for the clustered ones. The x and z families
// share one segment layout, xi and the derived y share the other.
struct StateLayout {
  Variant variant = Variant::Hom;
  std::size_t agent_count = 0;
  SegmentLayout x;
  SegmentLayout xi;
};

// y is never stored: y_ij = xi_ij + A_ij x_ij - b_ij is materialized on read.
struct SwarmState {
  std::shared_ptr<const StateLayout> layout;
  std::vector<double> x;
  std::vector<double> xi;
  std::vector<double> z;
  Variant variant() const { return layout->variant; }
};

struct Derivative {
  std::vector<double> x;
  std::vector<double> xi;
  std::vector<double> z;
};

// The same dynamics as one autonomous linear system d/dt [x; y; z] = Q [x; y; z],
// stacked in the canonical agent order with families in (x, y, z) sequence.
struct CompactSystem {
  DenseMatrix q;
  std::size_t x_dim = 0;
  std::size_t y_dim = 0;
  std::size_t z_dim = 0;
  std::string stacking_order;
  // Scalar variant only: maps the row-major agent index to its column-major
  // slot, i.e. the permutation that regroups the column-consensus coupling.
  std::vector<std::size_t> perm;
  // Case-2 only: the per-cluster gains c_i making up Gamma = diag(c_i I_n).
  std::vector<double> gamma;
};

// One partition + one network, bound together: evaluates the agent-local
// vector field, materializes y, builds the compact system, and computes the
// variant-appropriate run metrics.
class FieldModel {
 public:
  virtual ~FieldModel() = default;

  const StateLayout& layout() const { return *layout_; }
  Variant variant() const { return layout_->variant; }

  SwarmState init_state(InitRule x0_rule, InitRule z0_rule,
                        std::uint64_t seed) const;
  Derivative make_derivative() const;

  virtual void eval(const SwarmState& s, Derivative& d) const = 0;
  virtual void materialize_y(const SwarmState& s, std::vector<double>& y) const = 0;
  virtual CompactSystem compact() const = 0;

  // [x; y; z] in compact coordinates
  std::vector<double> stack_state(const SwarmState& s) const;
  // [dx; dxi + A dx; dz] — the image of a field derivative in compact coordinates
  std::vector<double> stack_derivative(const Derivative& d) const;

  virtual DenseVector consensus_projection(const std::vector<double>& x_family) const = 0;
  virtual double disagreement(const std::vector<double>& x_family) const = 0;
  virtual double estimation_error(const std::vector<double>& x_family,
                                  const DenseVector& reference) const = 0;
  double ye(const SwarmState& s) const;
  double conservation_drift(const SwarmState& s) const;

  const DenseMatrix& system_matrix() const { return a_full_; }
  const DenseVector& system_rhs() const { return b_full_; }

 protected:
  // A dx per agent, written into the xi-shaped flat vector.
  virtual void apply_blocks(const std::vector<double>& x_family,
                            std::vector<double>& out) const = 0;
  // (A_ij x_ij - b_ij) per agent, xi-shaped.
  virtual void local_residual(const std::vector<double>& x_family,
                              std::vector<double>& out) const = 0;
  // Group sums of an xi-shaped vector (rows for the scalar variant, cluster
  // stacks for Case 1, within-cluster sums for Case 2), concatenated.
  virtual std::vector<double> group_sums(const std::vector<double>& y_family) const = 0;

  std::shared_ptr<const StateLayout> layout_;
  DenseMatrix a_full_;
  DenseVector b_full_;
};

std::unique_ptr<FieldModel> make_model(const HomogeneousPartition& p,
                                       const GridNetwork& net);
std::unique_ptr<FieldModel> make_model(const Case1Partition& p,
                                       const DoubleLayerNetwork& net);
std::unique_ptr<FieldModel> make_model(const Case2Partition& p,
                                       const DoubleLayerNetwork& net);

// Free-function form of the three vector fields and compact assemblies.
// The selector sets (one per cluster) are validated against the partition.
Derivative hom_field(const SwarmState& s, const HomogeneousPartition& p,
                     const GridNetwork& net);
Derivative case1_field(const SwarmState& s, const Case1Partition& p,
                       const DoubleLayerNetwork& net,
                       const std::vector<SelectorSet>& sel);
Derivative case2_field(const SwarmState& s, const Case2Partition& p,
                       const DoubleLayerNetwork& net,
                       const std::vector<SelectorSet>& sel);

CompactSystem compact_hom(const HomogeneousPartition& p, const GridNetwork& net);
CompactSystem compact_case1(const Case1Partition& p, const DoubleLayerNetwork& net);
CompactSystem compact_case2(const Case2Partition& p, const DoubleLayerNetwork& net);

SwarmState init_state(const HomogeneousPartition& p, const GridNetwork& net,
                      InitRule x0_rule, InitRule z0_rule, std::uint64_t seed);
SwarmState init_state(const Case1Partition& p, const DoubleLayerNetwork& net,
                      InitRule x0_rule, InitRule z0_rule, std::uint64_t seed);
SwarmState init_state(const Case2Partition& p, const DoubleLayerNetwork& net,
                      InitRule x0_rule, InitRule z0_rule, std::uint64_t seed);

// Selector sets implied by a clustered partition (row cuts of I_m for Case 1,
// column cuts of I_n for Case 2), one per cluster.
std::vector<SelectorSet> implied_selectors(const Case1Partition& p);
std::vector<SelectorSet> implied_selectors(const Case2Partition& p);

// Deterministic uniform [-1, 1) fill, the same draw init_state uses.
void fill_uniform(std::vector<double>& values, std::uint64_t seed);

}  // namespace lsqswarm
