#include "lsqswarm/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lsqswarm/errors.hpp"

namespace lsqswarm {
namespace {

std::size_t checked_sum(const std::vector<std::size_t>& v) {
  return std::accumulate(v.begin(), v.end(), std::size_t{0});
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw PartitionShapeError(msg);
}

}  // namespace

HomogeneousPartition make_homogeneous(const DenseMatrix& a, const DenseVector& b,
                                      BSplitRule rule) {
  if (a.rows() != b.dim())
    throw DimensionError("b length must equal matrix row count");
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (n == 0) throw PartitionShapeError("matrix must have at least one column");
  DenseMatrix b_split(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    if (rule == BSplitRule::Diagonal) {
      // One slot per row; rows past the last column fold onto the last column.
      b_split(i, std::min(i, n - 1)) = b[i];
    } else {
      const double share = b[i] / static_cast<double>(n);
      for (std::size_t j = 0; j < n; ++j) b_split(i, j) = share;
    }
  }
  return HomogeneousPartition{a, std::move(b_split), m, n};
}

HomogeneousPartition make_homogeneous(const DenseMatrix& a, const DenseVector& b,
                                      const DenseMatrix& b_split) {
  if (a.rows() != b.dim())
    throw DimensionError("b length must equal matrix row count");
  if (b_split.rows() != a.rows() || b_split.cols() != a.cols())
    throw InvalidSplitError("b_split must have the shape of A");
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) sum += b_split(i, j);
    if (std::abs(sum - b[i]) > 1e-12 * (1.0 + std::abs(b[i])))
      throw InvalidSplitError("row " + std::to_string(i) +
                              " of b_split does not sum to b");
  }
  return HomogeneousPartition{a, b_split, a.rows(), a.cols()};
}

Case1Partition make_case1(const DenseMatrix& a, const DenseVector& b,
                          const std::vector<std::size_t>& col_widths,
                          const std::vector<std::vector<std::size_t>>& row_heights,
                          ClusterBRule rule) {
  const std::size_t c = col_widths.size();
  std::vector<DenseVector> b_cluster(c, DenseVector(a.rows()));
  if (c == 0) throw PartitionShapeError("need at least one cluster");
  if (rule == ClusterBRule::FirstClusterAll) {
    b_cluster[0] = b;
  } else {
    for (auto& bi : b_cluster) bi = b.scaled(1.0 / static_cast<double>(c));
  }
  return make_case1(a, b, col_widths, row_heights, b_cluster);
}

Case1Partition make_case1(const DenseMatrix& a, const DenseVector& b,
                          const std::vector<std::size_t>& col_widths,
                          const std::vector<std::vector<std::size_t>>& row_heights,
                          const std::vector<DenseVector>& b_cluster) {
  if (a.rows() != b.dim())
    throw DimensionError("b length must equal matrix row count");
  const std::size_t c = col_widths.size();
  require(c > 0, "need at least one cluster");
  require(row_heights.size() == c, "row_heights must list one cut per cluster");
  require(checked_sum(col_widths) == a.cols(), "column widths must sum to n");
  if (b_cluster.size() != c)
    throw InvalidSplitError("need one b share per cluster");
  DenseVector share_sum(a.rows());
  for (const auto& bi : b_cluster) {
    if (bi.dim() != a.rows())
      throw InvalidSplitError("cluster b share must have length m");
    share_sum = share_sum + bi;
  }
  if (max_abs_diff(share_sum, b) > 1e-12 * (1.0 + b.norm()))
    throw InvalidSplitError("cluster b shares do not sum to b");

  Case1Partition p;
  p.col_widths = col_widths;
  p.row_heights = row_heights;
  p.b_cluster = b_cluster;
  p.m = a.rows();
  p.n = a.cols();
  std::size_t col_off = 0;
  for (std::size_t i = 0; i < c; ++i) {
    require(!row_heights[i].empty(), "cluster " + std::to_string(i) +
                                         " needs at least one agent");
    require(checked_sum(row_heights[i]) == a.rows(),
            "row heights of cluster " + std::to_string(i) + " must sum to m");
    require(col_widths[i] > 0, "column widths must be positive");
    std::vector<DenseMatrix> cluster_blocks;
    std::vector<DenseVector> cluster_b;
    std::size_t row_off = 0;
    for (std::size_t h : row_heights[i]) {
      require(h > 0, "row heights must be positive");
      cluster_blocks.push_back(a.block(row_off, col_off, h, col_widths[i]));
      cluster_b.push_back(b_cluster[i].segment(row_off, h));
      row_off += h;
    }
    p.blocks.push_back(std::move(cluster_blocks));
    p.b_blocks.push_back(std::move(cluster_b));
    col_off += col_widths[i];
  }
  return p;
}

Case2Partition make_case2(const DenseMatrix& a, const DenseVector& b,
                          const std::vector<std::size_t>& row_heights,
                          const std::vector<std::vector<std::size_t>>& col_widths,
                          RowBRule rule) {
  const std::size_t c = row_heights.size();
  if (c == 0) throw PartitionShapeError("need at least one cluster");
  if (col_widths.size() != c)
    throw PartitionShapeError("col_widths must list one cut per cluster");
  std::vector<std::vector<DenseVector>> b_blocks(c);
  std::size_t row_off = 0;
  for (std::size_t i = 0; i < c; ++i) {
    if (row_off + row_heights[i] > b.dim())
      throw PartitionShapeError("row heights must sum to m");
    DenseVector bi = b.segment(row_off, row_heights[i]);
    const std::size_t ci = col_widths[i].size();
    if (ci == 0)
      throw PartitionShapeError("cluster " + std::to_string(i) +
                                " needs at least one agent");
    b_blocks[i].assign(ci, DenseVector(row_heights[i]));
    if (rule == RowBRule::Diagonal) {
      if (ci < i + 1)
        throw InvalidSplitError("diagonal b rule needs cluster " +
                                std::to_string(i) + " to have at least " +
                                std::to_string(i + 1) + " agents");
      b_blocks[i][i] = bi;
    } else {
      for (auto& share : b_blocks[i]) share = bi.scaled(1.0 / static_cast<double>(ci));
    }
    row_off += row_heights[i];
  }
  return make_case2(a, b, row_heights, col_widths, b_blocks);
}

Case2Partition make_case2(const DenseMatrix& a, const DenseVector& b,
                          const std::vector<std::size_t>& row_heights,
                          const std::vector<std::vector<std::size_t>>& col_widths,
                          const std::vector<std::vector<DenseVector>>& b_blocks) {
  if (a.rows() != b.dim())
    throw DimensionError("b length must equal matrix row count");
  const std::size_t c = row_heights.size();
  require(c > 0, "need at least one cluster");
  require(col_widths.size() == c, "col_widths must list one cut per cluster");
  require(checked_sum(row_heights) == a.rows(), "row heights must sum to m");
  if (b_blocks.size() != c) throw InvalidSplitError("need b shares per cluster");

  Case2Partition p;
  p.row_heights = row_heights;
  p.col_widths = col_widths;
  p.m = a.rows();
  p.n = a.cols();
  std::size_t row_off = 0;
  for (std::size_t i = 0; i < c; ++i) {
    require(row_heights[i] > 0, "row heights must be positive");
    require(!col_widths[i].empty(), "cluster " + std::to_string(i) +
                                        " needs at least one agent");
    require(checked_sum(col_widths[i]) == a.cols(),
            "column widths of cluster " + std::to_string(i) + " must sum to n");
    DenseVector bi = b.segment(row_off, row_heights[i]);
    if (b_blocks[i].size() != col_widths[i].size())
      throw InvalidSplitError("cluster " + std::to_string(i) +
                              " needs one b share per agent");
    DenseVector share_sum(row_heights[i]);
    for (const auto& share : b_blocks[i]) {
      if (share.dim() != row_heights[i])
        throw InvalidSplitError("b share must have the cluster row height");
      share_sum = share_sum + share;
    }
    if (max_abs_diff(share_sum, bi) > 1e-12 * (1.0 + bi.norm()))
      throw InvalidSplitError("b shares of cluster " + std::to_string(i) +
                              " do not sum to its row block");
    p.b_rows.push_back(std::move(bi));
    p.b_blocks.push_back(b_blocks[i]);
    std::vector<DenseMatrix> cluster_blocks;
    std::size_t col_off = 0;
    for (std::size_t w : col_widths[i]) {
      require(w > 0, "column widths must be positive");
      cluster_blocks.push_back(a.block(row_off, col_off, row_heights[i], w));
      col_off += w;
    }
    p.blocks.push_back(std::move(cluster_blocks));
    row_off += row_heights[i];
  }
  return p;
}

DenseVector SelectorSet::apply(std::size_t k, const DenseVector& stacked) const {
  if (stacked.dim() != total)
    throw DimensionError("selector input has wrong length");
  return stacked.segment(offsets[k], dims[k]);
}

SelectorSet selectors(const std::vector<std::size_t>& dims) {
  SelectorSet s;
  s.dims = dims;
  for (std::size_t d : dims) {
    if (d == 0) throw InvalidInputError("selector block heights must be positive");
    s.offsets.push_back(s.total);
    s.total += d;
  }
  for (std::size_t k = 0; k < dims.size(); ++k) {
    DenseMatrix e(dims[k], s.total);
    for (std::size_t r = 0; r < dims[k]; ++r) e(r, s.offsets[k] + r) = 1.0;
    s.matrices.push_back(std::move(e));
  }
  return s;
}

DenseMatrix reassemble_a(const Case1Partition& p) {
  DenseMatrix a(p.m, p.n);
  std::size_t col_off = 0;
  for (std::size_t i = 0; i < p.cluster_count(); ++i) {
    std::size_t row_off = 0;
    for (std::size_t j = 0; j < p.agents_in(i); ++j) {
      a.set_block(row_off, col_off, p.blocks[i][j]);
      row_off += p.row_heights[i][j];
    }
    col_off += p.col_widths[i];
  }
  return a;
}

DenseVector reassemble_b(const Case1Partition& p) {
  DenseVector b(p.m);
  for (std::size_t i = 0; i < p.cluster_count(); ++i) {
    DenseVector bi(p.m);
    std::size_t row_off = 0;
    for (std::size_t j = 0; j < p.agents_in(i); ++j) {
      bi.set_segment(row_off, p.b_blocks[i][j]);
      row_off += p.row_heights[i][j];
    }
    b = b + bi;
  }
  return b;
}

DenseMatrix reassemble_a(const Case2Partition& p) {
  DenseMatrix a(p.m, p.n);
  std::size_t row_off = 0;
  for (std::size_t i = 0; i < p.cluster_count(); ++i) {
    std::size_t col_off = 0;
    for (std::size_t j = 0; j < p.agents_in(i); ++j) {
      a.set_block(row_off, col_off, p.blocks[i][j]);
      col_off += p.col_widths[i][j];
    }
    row_off += p.row_heights[i];
  }
  return a;
}

DenseVector reassemble_b(const Case2Partition& p) {
  DenseVector b(p.m);
  std::size_t row_off = 0;
  for (std::size_t i = 0; i < p.cluster_count(); ++i) {
    DenseVector bi(p.row_heights[i]);
    for (const auto& share : p.b_blocks[i]) bi = bi + share;
    b.set_segment(row_off, bi);
    row_off += p.row_heights[i];
  }
  return b;
}

DenseVector reassemble_b(const HomogeneousPartition& p) {
  DenseVector b(p.m);
  for (std::size_t i = 0; i < p.m; ++i)
    for (std::size_t j = 0; j < p.n; ++j) b[i] += p.b_split(i, j);
  return b;
}

}  // namespace lsqswarm
