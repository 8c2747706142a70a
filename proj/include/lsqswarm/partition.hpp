#pragma once

#include <cstddef>
#include <vector>

#include "lsqswarm/dense.hpp"

namespace lsqswarm {

// How the right-hand side is split among the agents that share a row/cluster.
// The split is a free choice; it changes the trajectory but not the limit's
// least-squares residual, so the rule in force is recorded with every run.
enum class BSplitRule { Diagonal, Uniform };
enum class ClusterBRule { FirstClusterAll, Uniform };
enum class RowBRule { Diagonal, Uniform };

// Fully scalar partition: agent (i,j) owns the scalar A(i,j) and a share
// b_split(i,j) of b(i), with sum_j b_split(i,j) == b(i).
struct HomogeneousPartition {
  DenseMatrix a;        // m x n
  DenseMatrix b_split;  // m x n
  std::size_t m = 0;
  std::size_t n = 0;
};

// Column blocks: cluster i owns columns of width col_widths[i]; inside the
// cluster the rows are cut into row_heights[i] sub-blocks, one per agent.
struct Case1Partition {
  std::vector<std::size_t> col_widths;                // n_i, length c
  std::vector<std::vector<std::size_t>> row_heights;  // m_ij per cluster
  std::vector<std::vector<DenseMatrix>> blocks;       // A_ij: m_ij x n_i
  std::vector<DenseVector> b_cluster;                 // b_i in R^m
  std::vector<std::vector<DenseVector>> b_blocks;     // b_ij in R^{m_ij}
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t cluster_count() const { return col_widths.size(); }
  std::size_t agents_in(std::size_t i) const { return row_heights[i].size(); }
};

// Row blocks: cluster i owns rows of height row_heights[i]; inside the
// cluster the columns are cut into col_widths[i] sub-blocks, one per agent.
struct Case2Partition {
  std::vector<std::size_t> row_heights;               // m_i, length c
  std::vector<std::vector<std::size_t>> col_widths;   // n_ij per cluster
  std::vector<std::vector<DenseMatrix>> blocks;       // A_ij: m_i x n_ij
  std::vector<DenseVector> b_rows;                    // b_i in R^{m_i}
  std::vector<std::vector<DenseVector>> b_blocks;     // b_ij in R^{m_i}
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t cluster_count() const { return row_heights.size(); }
  std::size_t agents_in(std::size_t i) const { return col_widths[i].size(); }
};

// Row partition of an identity: E_k is the dims[k] consecutive rows starting
// at offsets[k]; stacking all E_k reproduces the identity.
struct SelectorSet {
  std::vector<std::size_t> dims;
  std::vector<std::size_t> offsets;
  std::size_t total = 0;
  std::vector<DenseMatrix> matrices;

  // E_k * stacked for a stacked vector of length total
  DenseVector apply(std::size_t k, const DenseVector& stacked) const;
};

HomogeneousPartition make_homogeneous(const DenseMatrix& a, const DenseVector& b,
                                      BSplitRule rule);
// Custom split: caller supplies the full b_split matrix.
HomogeneousPartition make_homogeneous(const DenseMatrix& a, const DenseVector& b,
                                      const DenseMatrix& b_split);

Case1Partition make_case1(const DenseMatrix& a, const DenseVector& b,
                          const std::vector<std::size_t>& col_widths,
                          const std::vector<std::vector<std::size_t>>& row_heights,
                          ClusterBRule rule);
// Custom split: caller supplies the cluster shares b_i (must sum to b).
Case1Partition make_case1(const DenseMatrix& a, const DenseVector& b,
                          const std::vector<std::size_t>& col_widths,
                          const std::vector<std::vector<std::size_t>>& row_heights,
                          const std::vector<DenseVector>& b_cluster);

Case2Partition make_case2(const DenseMatrix& a, const DenseVector& b,
                          const std::vector<std::size_t>& row_heights,
                          const std::vector<std::vector<std::size_t>>& col_widths,
                          RowBRule rule);
// Custom split: per-cluster agent shares b_ij (must sum to the row block b_i).
Case2Partition make_case2(const DenseMatrix& a, const DenseVector& b,
                          const std::vector<std::size_t>& row_heights,
                          const std::vector<std::vector<std::size_t>>& col_widths,
                          const std::vector<std::vector<DenseVector>>& b_blocks);

SelectorSet selectors(const std::vector<std::size_t>& dims);

// Block reassembly; used both by tests and by shape validation.
DenseMatrix reassemble_a(const Case1Partition& p);
DenseVector reassemble_b(const Case1Partition& p);
DenseMatrix reassemble_a(const Case2Partition& p);
DenseVector reassemble_b(const Case2Partition& p);
// For the scalar partition: per-row sums of b_split (should reproduce b).
DenseVector reassemble_b(const HomogeneousPartition& p);

}  // namespace lsqswarm
