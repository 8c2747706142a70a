#include "lsqswarm/dynamics.hpp"

#include <cmath>
#include <random>

#include "lsqswarm/errors.hpp"
#include "lsqswarm/kernels.hpp"

namespace lsqswarm {
namespace {

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::Hom: return "hom";
    case Variant::Case1: return "case1";
    case Variant::Case2: return "case2";
  }
  return "?";
}

double uniform_pm1(std::mt19937_64& rng) {
  // 53-bit mantissa draw mapped to [-1, 1); fixed mapping keeps runs
  // reproducible across standard libraries.
  const double u01 =
      static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
  return 2.0 * u01 - 1.0;
}

double norm_of(const std::vector<double>& v) {
  return std::sqrt(kernels::active_kernels().dot(v.data(), v.data(), v.size()));
}

}  // namespace

SwarmState FieldModel::init_state(InitRule x0_rule, InitRule z0_rule,
                                  std::uint64_t seed) const {
  SwarmState s;
  s.layout = layout_;
  s.x.assign(layout_->x.total, 0.0);
  s.xi.assign(layout_->xi.total, 0.0);
  s.z.assign(layout_->x.total, 0.0);
  std::mt19937_64 rng(seed);
  if (x0_rule == InitRule::SeededUniform)
    for (double& v : s.x) v = uniform_pm1(rng);
  if (z0_rule == InitRule::SeededUniform)
    for (double& v : s.z) v = uniform_pm1(rng);
  return s;
}

Derivative FieldModel::make_derivative() const {
  Derivative d;
  d.x.assign(layout_->x.total, 0.0);
  d.xi.assign(layout_->xi.total, 0.0);
  d.z.assign(layout_->x.total, 0.0);
  return d;
}

std::vector<double> FieldModel::stack_state(const SwarmState& s) const {
  std::vector<double> y;
  materialize_y(s, y);
  std::vector<double> out;
  out.reserve(2 * s.x.size() + y.size());
  out.insert(out.end(), s.x.begin(), s.x.end());
  out.insert(out.end(), y.begin(), y.end());
  out.insert(out.end(), s.z.begin(), s.z.end());
  return out;
}

std::vector<double> FieldModel::stack_derivative(const Derivative& d) const {
  // d/dt y = d/dt xi + A d/dt x, blockwise
  std::vector<double> dy(layout_->xi.total, 0.0);
  apply_blocks(d.x, dy);
  for (std::size_t i = 0; i < dy.size(); ++i) dy[i] += d.xi[i];
  std::vector<double> out;
  out.reserve(2 * d.x.size() + dy.size());
  out.insert(out.end(), d.x.begin(), d.x.end());
  out.insert(out.end(), dy.begin(), dy.end());
  out.insert(out.end(), d.z.begin(), d.z.end());
  return out;
}

double FieldModel::ye(const SwarmState& s) const {
  std::vector<double> y;
  materialize_y(s, y);
  return kernels::active_kernels().dot(y.data(), y.data(), y.size());
}

double FieldModel::conservation_drift(const SwarmState& s) const {
  std::vector<double> y;
  materialize_y(s, y);
  std::vector<double> resid(layout_->xi.total, 0.0);
  local_residual(s.x, resid);
  std::vector<double> gy = group_sums(y);
  std::vector<double> gr = group_sums(resid);
  for (std::size_t i = 0; i < gy.size(); ++i) gy[i] -= gr[i];
  return norm_of(gy);
}

namespace {

void check_state_shape(const FieldModel& model, const SwarmState& s) {
  if (!s.layout) throw ShapeError("state has no layout");
  if (s.variant() != model.variant())
    throw VariantError(std::string("state built for variant '") +
                       variant_name(s.variant()) + "', model is '" +
                       variant_name(model.variant()) + "'");
  const StateLayout& l = model.layout();
  if (s.x.size() != l.x.total || s.z.size() != l.x.total ||
      s.xi.size() != l.xi.total)
    throw ShapeError("state family lengths do not match the partition");
}

// ---------------------------------------------------------------------------
// scalar (grid) variant

class HomModel final : public FieldModel {
 public:
  HomModel(HomogeneousPartition p, GridNetwork net)
      : p_(std::move(p)), net_(std::move(net)) {
    m_ = p_.m;
    n_ = p_.n;
    if (net_.m != m_ || net_.n != n_)
      throw ShapeError("network (m, n) does not match the partition");
    if (net_.row_graphs.size() != m_ || net_.col_graphs.size() != n_)
      throw ShapeError("grid network graph counts do not match (m, n)");
    for (const Graph& g : net_.row_graphs)
      if (g.node_count != n_) throw ShapeError("row graphs need n nodes");
    for (const Graph& g : net_.col_graphs)
      if (g.node_count != m_) throw ShapeError("column graphs need m nodes");
    auto layout = std::make_shared<StateLayout>();
    layout->variant = Variant::Hom;
    layout->agent_count = m_ * n_;
    for (std::size_t a = 0; a < m_ * n_; ++a) {
      layout->x.push(1);
      layout->xi.push(1);
    }
    layout_ = std::move(layout);
    a_full_ = p_.a;
    b_full_ = reassemble_b(p_);
  }

  void eval(const SwarmState& s, Derivative& d) const override {
    check_state_shape(*this, s);
    std::vector<double> y;
    materialize_y(s, y);
    d.x.assign(m_ * n_, 0.0);
    d.xi.assign(m_ * n_, 0.0);
    d.z.assign(m_ * n_, 0.0);
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < n_; ++j) {
        const std::size_t a = i * n_ + j;
        const double ay = p_.a(i, j) * y[a];
        double sx = 0.0, sz = 0.0;
        for (std::size_t k : net_.col_graphs[j].adjacency[i]) {
          sx += s.x[a] - s.x[k * n_ + j];
          sz += s.z[a] - s.z[k * n_ + j];
        }
        double sy = 0.0;
        for (std::size_t k : net_.row_graphs[i].adjacency[j])
          sy += y[a] - y[i * n_ + k];
        d.x[a] = -(ay - sz) - sx;
        d.xi[a] = -sy;
        d.z[a] = ay - sz;
      }
  }

  void materialize_y(const SwarmState& s, std::vector<double>& y) const override {
    y.resize(m_ * n_);
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < n_; ++j) {
        const std::size_t a = i * n_ + j;
        y[a] = s.xi[a] + p_.a(i, j) * s.x[a] - p_.b_split(i, j);
      }
  }

  CompactSystem compact() const override {
    assert_assumptions(net_);
    const std::size_t mn = m_ * n_;
    // column-consensus coupling carried back to row-major coordinates
    DenseMatrix ltc(mn, mn);
    for (std::size_t j = 0; j < n_; ++j) {
      DenseMatrix lj = laplacian(net_.col_graphs[j]);
      for (std::size_t i = 0; i < m_; ++i)
        for (std::size_t k = 0; k < m_; ++k)
          ltc(i * n_ + j, k * n_ + j) = lj(i, k);
    }
    DenseMatrix lr(mn, mn);
    for (std::size_t i = 0; i < m_; ++i) {
      DenseMatrix li = laplacian(net_.row_graphs[i]);
      for (std::size_t j = 0; j < n_; ++j)
        for (std::size_t k = 0; k < n_; ++k)
          lr(i * n_ + j, i * n_ + k) = li(j, k);
    }
    std::vector<double> ad(mn);
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < n_; ++j) ad[i * n_ + j] = p_.a(i, j);

    CompactSystem cs;
    cs.x_dim = cs.y_dim = cs.z_dim = mn;
    DenseMatrix q(3 * mn, 3 * mn);
    for (std::size_t r = 0; r < mn; ++r)
      for (std::size_t c = 0; c < mn; ++c) {
        const double lt = ltc(r, c);
        q(r, c) = -lt;
        q(r, 2 * mn + c) = lt;
        q(mn + r, c) = -ad[r] * lt;
        q(mn + r, 2 * mn + c) = ad[r] * lt;
        q(mn + r, mn + c) = -lr(r, c);
        q(2 * mn + r, 2 * mn + c) = -lt;
      }
    for (std::size_t r = 0; r < mn; ++r) {
      q(r, mn + r) -= ad[r];
      q(mn + r, mn + r) -= ad[r] * ad[r];
      q(2 * mn + r, mn + r) += ad[r];
    }
    cs.q = std::move(q);
    cs.stacking_order =
        "agents row-major a=i*n+j; coordinates [x(a) | y(a) | z(a)]";
    cs.perm.resize(mn);
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < n_; ++j) cs.perm[i * n_ + j] = j * m_ + i;
    return cs;
  }

  DenseVector consensus_projection(const std::vector<double>& x) const override {
    DenseVector out(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < m_; ++i) acc += x[i * n_ + j];
      out[j] = acc / static_cast<double>(m_);
    }
    return out;
  }

  double disagreement(const std::vector<double>& x) const override {
    DenseVector mean = consensus_projection(x);
    double acc = 0.0;
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < n_; ++j) {
        const double dlt = x[i * n_ + j] - mean[j];
        acc += dlt * dlt;
      }
    return std::sqrt(acc);
  }

  double estimation_error(const std::vector<double>& x,
                          const DenseVector& ref) const override {
    double acc = 0.0;
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < n_; ++j) {
        const double dlt = x[i * n_ + j] - ref[j];
        acc += dlt * dlt;
      }
    return acc;
  }

 protected:
  void apply_blocks(const std::vector<double>& x,
                    std::vector<double>& out) const override {
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        out[i * n_ + j] = p_.a(i, j) * x[i * n_ + j];
  }

  void local_residual(const std::vector<double>& x,
                      std::vector<double>& out) const override {
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        out[i * n_ + j] = p_.a(i, j) * x[i * n_ + j] - p_.b_split(i, j);
  }

  std::vector<double> group_sums(const std::vector<double>& y) const override {
    // the xi exchange runs along rows, so row sums are conserved
    std::vector<double> out(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < n_; ++j) out[i] += y[i * n_ + j];
    return out;
  }

 private:
  HomogeneousPartition p_;
  GridNetwork net_;
  std::size_t m_ = 0, n_ = 0;
};

DenseMatrix assemble_three_by_three(const DenseMatrix& lx, const DenseMatrix& ly,
                                    const DenseMatrix& a, const DenseMatrix& ty);

// ---------------------------------------------------------------------------
// Case 1: column blocks, double-layered network

class Case1Model final : public FieldModel {
 public:
  Case1Model(Case1Partition p, DoubleLayerNetwork net)
      : p_(std::move(p)), net_(std::move(net)) {
    const std::size_t c = p_.cluster_count();
    if (net_.cluster_graph.node_count != c)
      throw ShapeError("cluster graph needs one node per cluster");
    if (net_.intra_graphs.size() != c)
      throw ShapeError("need one intra graph per cluster");
    auto layout = std::make_shared<StateLayout>();
    layout->variant = Variant::Case1;
    for (std::size_t i = 0; i < c; ++i) {
      if (net_.intra_graphs[i].node_count != p_.agents_in(i))
        throw ShapeError("intra graph size must match the cluster's agent count");
      agent_base_.push_back(layout->agent_count);
      std::size_t off = 0;
      std::vector<std::size_t> offsets;
      for (std::size_t j = 0; j < p_.agents_in(i); ++j) {
        layout->x.push(p_.col_widths[i]);
        layout->xi.push(p_.row_heights[i][j]);
        offsets.push_back(off);
        off += p_.row_heights[i][j];
        ++layout->agent_count;
      }
      row_offsets_.push_back(std::move(offsets));
    }
    layout_ = std::move(layout);
    a_full_ = reassemble_a(p_);
    b_full_ = reassemble_b(p_);
  }

  void eval(const SwarmState& s, Derivative& d) const override {
    check_state_shape(*this, s);
    const StateLayout& l = *layout_;
    std::vector<double> y;
    materialize_y(s, y);
    d.x.assign(l.x.total, 0.0);
    d.xi.assign(l.xi.total, 0.0);
    d.z.assign(l.x.total, 0.0);
    const auto& kt = kernels::active_kernels();
    const std::size_t m = p_.m;
    for (std::size_t i = 0; i < p_.cluster_count(); ++i) {
      const std::size_t ni = p_.col_widths[i];
      for (std::size_t j = 0; j < p_.agents_in(i); ++j) {
        const std::size_t a = agent_base_[i] + j;
        const std::size_t xo = l.x.offsets[a];
        const std::size_t yo = l.xi.offsets[a];
        const std::size_t mij = p_.row_heights[i][j];
        // w = A_ij^T y_ij
        kt.matvec_t(p_.blocks[i][j].data(), mij, ni, y.data() + yo,
                    d.z.data() + xo);
        // intra-cluster consensus sums on x and z
        const auto& nbrs = net_.intra_graphs[i].adjacency[j];
        const double deg = static_cast<double>(nbrs.size());
        for (std::size_t t = 0; t < ni; ++t) {
          double sx = deg * s.x[xo + t];
          double sz = deg * s.z[xo + t];
          for (std::size_t k : nbrs) {
            const std::size_t xok = l.x.offsets[agent_base_[i] + k];
            sx -= s.x[xok + t];
            sz -= s.z[xok + t];
          }
          const double w = d.z[xo + t];
          d.x[xo + t] = -(w - sz) - sx;
          d.z[xo + t] = w - sz;
        }
        // cluster-level residual tracking on xi
        const auto& cnbrs = net_.cluster_graph.adjacency[i];
        const double cdeg = static_cast<double>(cnbrs.size());
        for (std::size_t t = 0; t < mij; ++t) {
          double sy = cdeg * y[yo + t];
          for (std::size_t k : cnbrs)
            sy -= y[k * m + row_offsets_[i][j] + t];
          d.xi[yo + t] = -sy;
        }
      }
    }
  }

  void materialize_y(const SwarmState& s, std::vector<double>& y) const override {
    const StateLayout& l = *layout_;
    y.resize(l.xi.total);
    const auto& kt = kernels::active_kernels();
    for (std::size_t i = 0; i < p_.cluster_count(); ++i)
      for (std::size_t j = 0; j < p_.agents_in(i); ++j) {
        const std::size_t a = agent_base_[i] + j;
        const std::size_t xo = l.x.offsets[a];
        const std::size_t yo = l.xi.offsets[a];
        const std::size_t mij = p_.row_heights[i][j];
        kt.matvec(p_.blocks[i][j].data(), mij, p_.col_widths[i],
                  s.x.data() + xo, y.data() + yo);
        for (std::size_t t = 0; t < mij; ++t)
          y[yo + t] += s.xi[yo + t] - p_.b_blocks[i][j][t];
      }
  }

  CompactSystem compact() const override {
    assert_assumptions(net_);
    const StateLayout& l = *layout_;
    const std::size_t nx = l.x.total;
    const std::size_t ny = l.xi.total;
    DenseMatrix lhat(nx, nx);
    std::size_t xoff = 0;
    for (std::size_t i = 0; i < p_.cluster_count(); ++i) {
      DenseMatrix li = DenseMatrix::kron(laplacian(net_.intra_graphs[i]),
                                         DenseMatrix::identity(p_.col_widths[i]));
      lhat.set_block(xoff, xoff, li);
      xoff += p_.col_widths[i] * p_.agents_in(i);
    }
    DenseMatrix lg = DenseMatrix::kron(laplacian(net_.cluster_graph),
                                       DenseMatrix::identity(p_.m));
    DenseMatrix abig(ny, nx);
    for (std::size_t i = 0; i < p_.cluster_count(); ++i)
      for (std::size_t j = 0; j < p_.agents_in(i); ++j) {
        const std::size_t a = agent_base_[i] + j;
        abig.set_block(l.xi.offsets[a], l.x.offsets[a], p_.blocks[i][j]);
      }
    CompactSystem cs;
    cs.x_dim = nx;
    cs.y_dim = ny;
    cs.z_dim = nx;
    cs.stacking_order =
        "agents (cluster, member) lexicographic; coordinates [x | y | z]";
    cs.q = assemble_three_by_three(lhat, lg, abig, abig.transposed());
    return cs;
  }

  DenseVector consensus_projection(const std::vector<double>& x) const override {
    DenseVector out(p_.n);
    std::size_t col_off = 0;
    for (std::size_t i = 0; i < p_.cluster_count(); ++i) {
      const std::size_t ni = p_.col_widths[i];
      const double ci = static_cast<double>(p_.agents_in(i));
      for (std::size_t j = 0; j < p_.agents_in(i); ++j) {
        const std::size_t xo = layout_->x.offsets[agent_base_[i] + j];
        for (std::size_t t = 0; t < ni; ++t) out[col_off + t] += x[xo + t] / ci;
      }
      col_off += ni;
    }
    return out;
  }

  double disagreement(const std::vector<double>& x) const override {
    DenseVector mean = consensus_projection(x);
    double acc = 0.0;
    std::size_t col_off = 0;
    for (std::size_t i = 0; i < p_.cluster_count(); ++i) {
      const std::size_t ni = p_.col_widths[i];
      for (std::size_t j = 0; j < p_.agents_in(i); ++j) {
        const std::size_t xo = layout_->x.offsets[agent_base_[i] + j];
        for (std::size_t t = 0; t < ni; ++t) {
          const double dlt = x[xo + t] - mean[col_off + t];
          acc += dlt * dlt;
        }
      }
      col_off += ni;
    }
    return std::sqrt(acc);
  }

  double estimation_error(const std::vector<double>& x,
                          const DenseVector& ref) const override {
    double acc = 0.0;
    std::size_t col_off = 0;
    for (std::size_t i = 0; i < p_.cluster_count(); ++i) {
      const std::size_t ni = p_.col_widths[i];
      for (std::size_t j = 0; j < p_.agents_in(i); ++j) {
        const std::size_t xo = layout_->x.offsets[agent_base_[i] + j];
        for (std::size_t t = 0; t < ni; ++t) {
          const double dlt = x[xo + t] - ref[col_off + t];
          acc += dlt * dlt;
        }
      }
      col_off += ni;
    }
    return acc;
  }

 protected:
  void apply_blocks(const std::vector<double>& x,
                    std::vector<double>& out) const override {
    const auto& kt = kernels::active_kernels();
    for (std::size_t i = 0; i < p_.cluster_count(); ++i)
      for (std::size_t j = 0; j < p_.agents_in(i); ++j) {
        const std::size_t a = agent_base_[i] + j;
        kt.matvec(p_.blocks[i][j].data(), p_.row_heights[i][j],
                  p_.col_widths[i], x.data() + layout_->x.offsets[a],
                  out.data() + layout_->xi.offsets[a]);
      }
  }

  void local_residual(const std::vector<double>& x,
                      std::vector<double>& out) const override {
    apply_blocks(x, out);
    for (std::size_t i = 0; i < p_.cluster_count(); ++i)
      for (std::size_t j = 0; j < p_.agents_in(i); ++j) {
        const std::size_t yo = layout_->xi.offsets[agent_base_[i] + j];
        for (std::size_t t = 0; t < p_.row_heights[i][j]; ++t)
          out[yo + t] -= p_.b_blocks[i][j][t];
      }
  }

  std::vector<double> group_sums(const std::vector<double>& y) const override {
    // the xi exchange is cluster-level, so the sum of cluster stacks (each of
    // length m) is conserved
    std::vector<double> out(p_.m, 0.0);
    for (std::size_t i = 0; i < p_.cluster_count(); ++i)
      for (std::size_t r = 0; r < p_.m; ++r) out[r] += y[i * p_.m + r];
    return out;
  }

 private:
  Case1Partition p_;
  DoubleLayerNetwork net_;
  std::vector<std::size_t> agent_base_;
  std::vector<std::vector<std::size_t>> row_offsets_;  // agent rows within I_m
};

// Shared assembly for the clustered variants:
//   [ -Lx      -Ty       Lx  ]
//   [ -A Lx    -(Ly+A·Ty) A Lx ]
//   [  0        Ty      -Lx  ]
// with Lx the x/z-side Laplacian expansion, Ly the y-side one, A the stacked
// block matrix and Ty the (possibly gain-scaled) transpose acting y -> x.
DenseMatrix assemble_three_by_three(const DenseMatrix& lx, const DenseMatrix& ly,
                                    const DenseMatrix& a, const DenseMatrix& ty) {
  const std::size_t nx = lx.rows();
  const std::size_t ny = ly.rows();
  DenseMatrix alx = a * lx;
  DenseMatrix q(2 * nx + ny, 2 * nx + ny);
  q.set_block(0, 0, lx.scaled(-1.0));
  q.set_block(0, nx, ty.scaled(-1.0));
  q.set_block(0, nx + ny, lx);
  q.set_block(nx, 0, alx.scaled(-1.0));
  q.set_block(nx, nx, (ly + a * ty).scaled(-1.0));
  q.set_block(nx, nx + ny, alx);
  q.set_block(nx + ny, nx, ty);
  q.set_block(nx + ny, nx + ny, lx.scaled(-1.0));
  return q;
}

// ---------------------------------------------------------------------------
// Case 2: row blocks, double-layered network, cluster-size gain

class Case2Model final : public FieldModel {
 public:
  Case2Model(Case2Partition p, DoubleLayerNetwork net)
      : p_(std::move(p)), net_(std::move(net)) {
    const std::size_t c = p_.cluster_count();
    if (net_.cluster_graph.node_count != c)
      throw ShapeError("cluster graph needs one node per cluster");
    if (net_.intra_graphs.size() != c)
      throw ShapeError("need one intra graph per cluster");
    auto layout = std::make_shared<StateLayout>();
    layout->variant = Variant::Case2;
    for (std::size_t i = 0; i < c; ++i) {
      if (net_.intra_graphs[i].node_count != p_.agents_in(i))
        throw ShapeError("intra graph size must match the cluster's agent count");
      agent_base_.push_back(layout->agent_count);
      std::size_t off = 0;
      std::vector<std::size_t> offsets;
      for (std::size_t j = 0; j < p_.agents_in(i); ++j) {
        layout->x.push(p_.col_widths[i][j]);
        layout->xi.push(p_.row_heights[i]);
        offsets.push_back(off);
        off += p_.col_widths[i][j];
        ++layout->agent_count;
      }
      col_offsets_.push_back(std::move(offsets));
    }
    layout_ = std::move(layout);
    a_full_ = reassemble_a(p_);
    b_full_ = reassemble_b(p_);
  }

  void eval(const SwarmState& s, Derivative& d) const override {
    check_state_shape(*this, s);
    const StateLayout& l = *layout_;
    std::vector<double> y;
    materialize_y(s, y);
    d.x.assign(l.x.total, 0.0);
    d.xi.assign(l.xi.total, 0.0);
    d.z.assign(l.x.total, 0.0);
    const auto& kt = kernels::active_kernels();
    const std::size_t n = p_.n;
    for (std::size_t i = 0; i < p_.cluster_count(); ++i) {
      const std::size_t mi = p_.row_heights[i];
      const double gain = static_cast<double>(p_.agents_in(i));
      for (std::size_t j = 0; j < p_.agents_in(i); ++j) {
        const std::size_t a = agent_base_[i] + j;
        const std::size_t xo = l.x.offsets[a];
        const std::size_t yo = l.xi.offsets[a];
        const std::size_t nij = p_.col_widths[i][j];
        // w = c_i * A_ij^T y_ij
        kt.matvec_t(p_.blocks[i][j].data(), mi, nij, y.data() + yo,
                    d.z.data() + xo);
        // cluster-level consensus on x and z, routed through the selectors
        const auto& cnbrs = net_.cluster_graph.adjacency[i];
        const double cdeg = static_cast<double>(cnbrs.size());
        for (std::size_t t = 0; t < nij; ++t) {
          double sx = cdeg * s.x[xo + t];
          double sz = cdeg * s.z[xo + t];
          for (std::size_t k : cnbrs) {
            sx -= s.x[k * n + col_offsets_[i][j] + t];
            sz -= s.z[k * n + col_offsets_[i][j] + t];
          }
          const double w = gain * d.z[xo + t];
          d.x[xo + t] = -(w - sz) - sx;
          d.z[xo + t] = w - sz;
        }
        // intra-cluster residual tracking on xi
        const auto& nbrs = net_.intra_graphs[i].adjacency[j];
        const double deg = static_cast<double>(nbrs.size());
        for (std::size_t t = 0; t < mi; ++t) {
          double sy = deg * y[yo + t];
          for (std::size_t k : nbrs)
            sy -= y[l.xi.offsets[agent_base_[i] + k] + t];
          d.xi[yo + t] = -sy;
        }
      }
    }
  }

  void materialize_y(const SwarmState& s, std::vector<double>& y) const override {
    const StateLayout& l = *layout_;
    y.resize(l.xi.total);
    const auto& kt = kernels::active_kernels();
    for (std::size_t i = 0; i < p_.cluster_count(); ++i) {
      const std::size_t mi = p_.row_heights[i];
      for (std::size_t j = 0; j < p_.agents_in(i); ++j) {
        const std::size_t a = agent_base_[i] + j;
        const std::size_t xo = l.x.offsets[a];
        const std::size_t yo = l.xi.offsets[a];
        kt.matvec(p_.blocks[i][j].data(), mi, p_.col_widths[i][j],
                  s.x.data() + xo, y.data() + yo);
        for (std::size_t t = 0; t < mi; ++t)
          y[yo + t] += s.xi[yo + t] - p_.b_blocks[i][j][t];
      }
    }
  }

  CompactSystem compact() const override {
    assert_assumptions(net_);
    const StateLayout& l = *layout_;
    const std::size_t nx = l.x.total;
    const std::size_t ny = l.xi.total;
    DenseMatrix lgx = DenseMatrix::kron(laplacian(net_.cluster_graph),
                                        DenseMatrix::identity(p_.n));
    DenseMatrix lhat(ny, ny);
    for (std::size_t i = 0; i < p_.cluster_count(); ++i) {
      DenseMatrix li = DenseMatrix::kron(laplacian(net_.intra_graphs[i]),
                                         DenseMatrix::identity(p_.row_heights[i]));
      const std::size_t yo = l.xi.offsets[agent_base_[i]];
      lhat.set_block(yo, yo, li);
    }
    DenseMatrix abig(ny, nx);
    for (std::size_t i = 0; i < p_.cluster_count(); ++i)
      for (std::size_t j = 0; j < p_.agents_in(i); ++j) {
        const std::size_t a = agent_base_[i] + j;
        abig.set_block(l.xi.offsets[a], l.x.offsets[a], p_.blocks[i][j]);
      }
    // Gamma-scaled transpose: row block of cluster i multiplied by c_i
    DenseMatrix gat = abig.transposed();
    for (std::size_t i = 0; i < p_.cluster_count(); ++i) {
      const double gain = static_cast<double>(p_.agents_in(i));
      for (std::size_t t = 0; t < p_.n; ++t) {
        double* row = gat.row(i * p_.n + t);
        for (std::size_t cidx = 0; cidx < ny; ++cidx) row[cidx] *= gain;
      }
    }
    CompactSystem cs;
    cs.x_dim = nx;
    cs.y_dim = ny;
    cs.z_dim = nx;
    cs.stacking_order =
        "agents (cluster, member) lexicographic; coordinates [x | y | z]";
    cs.q = assemble_three_by_three(lgx, lhat, abig, gat);
    for (std::size_t i = 0; i < p_.cluster_count(); ++i)
      cs.gamma.push_back(static_cast<double>(p_.agents_in(i)));
    return cs;
  }

  DenseVector consensus_projection(const std::vector<double>& x) const override {
    const double c = static_cast<double>(p_.cluster_count());
    DenseVector out(p_.n);
    for (std::size_t i = 0; i < p_.cluster_count(); ++i)
      for (std::size_t t = 0; t < p_.n; ++t) out[t] += x[i * p_.n + t] / c;
    return out;
  }

  double disagreement(const std::vector<double>& x) const override {
    DenseVector mean = consensus_projection(x);
    double acc = 0.0;
    for (std::size_t i = 0; i < p_.cluster_count(); ++i)
      for (std::size_t t = 0; t < p_.n; ++t) {
        const double dlt = x[i * p_.n + t] - mean[t];
        acc += dlt * dlt;
      }
    return std::sqrt(acc);
  }

  double estimation_error(const std::vector<double>& x,
                          const DenseVector& ref) const override {
    double acc = 0.0;
    for (std::size_t i = 0; i < p_.cluster_count(); ++i)
      for (std::size_t t = 0; t < p_.n; ++t) {
        const double dlt = x[i * p_.n + t] - ref[t];
        acc += dlt * dlt;
      }
    return acc;
  }

 protected:
  void apply_blocks(const std::vector<double>& x,
                    std::vector<double>& out) const override {
    const auto& kt = kernels::active_kernels();
    std::vector<double> tmp;
    for (std::size_t i = 0; i < p_.cluster_count(); ++i) {
      const std::size_t mi = p_.row_heights[i];
      tmp.resize(mi);
      for (std::size_t j = 0; j < p_.agents_in(i); ++j) {
        const std::size_t a = agent_base_[i] + j;
        kt.matvec(p_.blocks[i][j].data(), mi, p_.col_widths[i][j],
                  x.data() + layout_->x.offsets[a], tmp.data());
        double* dst = out.data() + layout_->xi.offsets[a];
        for (std::size_t t = 0; t < mi; ++t) dst[t] = tmp[t];
      }
    }
  }

  void local_residual(const std::vector<double>& x,
                      std::vector<double>& out) const override {
    apply_blocks(x, out);
    for (std::size_t i = 0; i < p_.cluster_count(); ++i)
      for (std::size_t j = 0; j < p_.agents_in(i); ++j) {
        const std::size_t yo = layout_->xi.offsets[agent_base_[i] + j];
        for (std::size_t t = 0; t < p_.row_heights[i]; ++t)
          out[yo + t] -= p_.b_blocks[i][j][t];
      }
  }

  std::vector<double> group_sums(const std::vector<double>& y) const override {
    // the xi exchange is intra-cluster, so each cluster's member sum (length
    // m_i) is conserved; concatenate them
    std::vector<double> out(p_.m, 0.0);
    std::size_t row_off = 0;
    for (std::size_t i = 0; i < p_.cluster_count(); ++i) {
      for (std::size_t j = 0; j < p_.agents_in(i); ++j) {
        const std::size_t yo = layout_->xi.offsets[agent_base_[i] + j];
        for (std::size_t t = 0; t < p_.row_heights[i]; ++t)
          out[row_off + t] += y[yo + t];
      }
      row_off += p_.row_heights[i];
    }
    return out;
  }

 private:
  Case2Partition p_;
  DoubleLayerNetwork net_;
  std::vector<std::size_t> agent_base_;
  std::vector<std::vector<std::size_t>> col_offsets_;  // agent cols within I_n
};

void check_selectors_case1(const Case1Partition& p,
                           const std::vector<SelectorSet>& sel) {
  if (sel.size() != p.cluster_count())
    throw ShapeError("need one selector set per cluster");
  for (std::size_t i = 0; i < sel.size(); ++i)
    if (sel[i].dims != p.row_heights[i] || sel[i].total != p.m)
      throw ShapeError("selector set " + std::to_string(i) +
                       " does not match the cluster's row cut");
}

void check_selectors_case2(const Case2Partition& p,
                           const std::vector<SelectorSet>& sel) {
  if (sel.size() != p.cluster_count())
    throw ShapeError("need one selector set per cluster");
  for (std::size_t i = 0; i < sel.size(); ++i)
    if (sel[i].dims != p.col_widths[i] || sel[i].total != p.n)
      throw ShapeError("selector set " + std::to_string(i) +
                       " does not match the cluster's column cut");
}

}  // namespace

std::unique_ptr<FieldModel> make_model(const HomogeneousPartition& p,
                                       const GridNetwork& net) {
  return std::make_unique<HomModel>(p, net);
}

std::unique_ptr<FieldModel> make_model(const Case1Partition& p,
                                       const DoubleLayerNetwork& net) {
  return std::make_unique<Case1Model>(p, net);
}

std::unique_ptr<FieldModel> make_model(const Case2Partition& p,
                                       const DoubleLayerNetwork& net) {
  return std::make_unique<Case2Model>(p, net);
}

Derivative hom_field(const SwarmState& s, const HomogeneousPartition& p,
                     const GridNetwork& net) {
  HomModel model(p, net);
  Derivative d = model.make_derivative();
  model.eval(s, d);
  return d;
}

Derivative case1_field(const SwarmState& s, const Case1Partition& p,
                       const DoubleLayerNetwork& net,
                       const std::vector<SelectorSet>& sel) {
  check_selectors_case1(p, sel);
  Case1Model model(p, net);
  Derivative d = model.make_derivative();
  model.eval(s, d);
  return d;
}

Derivative case2_field(const SwarmState& s, const Case2Partition& p,
                       const DoubleLayerNetwork& net,
                       const std::vector<SelectorSet>& sel) {
  check_selectors_case2(p, sel);
  Case2Model model(p, net);
  Derivative d = model.make_derivative();
  model.eval(s, d);
  return d;
}

CompactSystem compact_hom(const HomogeneousPartition& p, const GridNetwork& net) {
  return HomModel(p, net).compact();
}

CompactSystem compact_case1(const Case1Partition& p,
                            const DoubleLayerNetwork& net) {
  return Case1Model(p, net).compact();
}

CompactSystem compact_case2(const Case2Partition& p,
                            const DoubleLayerNetwork& net) {
  return Case2Model(p, net).compact();
}

SwarmState init_state(const HomogeneousPartition& p, const GridNetwork& net,
                      InitRule x0_rule, InitRule z0_rule, std::uint64_t seed) {
  return HomModel(p, net).init_state(x0_rule, z0_rule, seed);
}

SwarmState init_state(const Case1Partition& p, const DoubleLayerNetwork& net,
                      InitRule x0_rule, InitRule z0_rule, std::uint64_t seed) {
  return Case1Model(p, net).init_state(x0_rule, z0_rule, seed);
}

SwarmState init_state(const Case2Partition& p, const DoubleLayerNetwork& net,
                      InitRule x0_rule, InitRule z0_rule, std::uint64_t seed) {
  return Case2Model(p, net).init_state(x0_rule, z0_rule, seed);
}

std::vector<SelectorSet> implied_selectors(const Case1Partition& p) {
  std::vector<SelectorSet> out;
  for (const auto& heights : p.row_heights) out.push_back(selectors(heights));
  return out;
}

std::vector<SelectorSet> implied_selectors(const Case2Partition& p) {
  std::vector<SelectorSet> out;
  for (const auto& widths : p.col_widths) out.push_back(selectors(widths));
  return out;
}

void fill_uniform(std::vector<double>& values, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (double& v : values) v = uniform_pm1(rng);
}

}  // namespace lsqswarm
