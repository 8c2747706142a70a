// End-to-end acceptance gate: one PASS/FAIL line per criterion, nonzero exit
// when any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lsqswarm/errors.hpp"
#include "lsqswarm/experiment.hpp"

using namespace lsqswarm;
namespace {

int failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
  std::printf("%s  criterion %d  %s\n", ok ? "PASS" : "FAIL", criterion,
              detail.c_str());
  if (!ok) ++failures;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

ExperimentConfig load(const char* name) {
  return parse_config(std::filesystem::path(LSQ_CONFIG_DIR) / name);
}

double max_drift(const RunRecord& rec) {
  double m = 0.0;
  for (double d : rec.conservation_drift) m = std::max(m, d);
  return m;
}

// criteria 1-3 feed their per-run conservation drift into criterion 6
double crit123_drift = 0.0;

DenseVector run_reference;  // oracle solution of the shared 4x3 problem

bool criterion1() {
  auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg = load("eq_s1_hom.cfg");
  RunRecord rec = simulate(cfg.sim);
  const double secs = elapsed_s(t0);

  run_reference = least_squares_oracle(cfg.a, cfg.b);
  const double expected[3] = {1.1310, 0.4947, 0.2992};
  bool consensus = rec.final_x.dim() == 3;
  for (std::size_t j = 0; j < 3 && consensus; ++j)
    consensus = std::fabs(rec.final_x[j] - expected[j]) <= 1e-3;

  LogLinearFit fit{};
  bool decays = false;
  try {
    fit = decay_fit(rec);
    decays = fit.slope < -0.01 && fit.residual_ratio < 0.2;
  } catch (const InsufficientDecay&) {
  }

  DenseVector r = cfg.a * run_reference - cfg.b;
  const double plateau = r.dot(r) / 3.0;
  const bool ye_ok = std::fabs(rec.ye.back() - plateau) <= 1e-3;
  const bool cls = rec.classification == Classification::LeastSquaresOnly;
  const bool fast = secs < 10.0;
  crit123_drift = std::max(crit123_drift, max_drift(rec));

  std::ostringstream d;
  d << "scalar 4x3 run: consensus " << (consensus ? "hit" : "missed")
    << ", slope " << fmt(fit.slope) << " (residual ratio "
    << fmt(fit.residual_ratio) << "), Ye " << fmt(rec.ye.back()) << " vs "
    << fmt(plateau) << ", " << to_string(rec.classification) << ", "
    << fmt(secs) << " s";
  report(1, consensus && decays && ye_ok && cls && fast, d.str());
  return consensus && decays && ye_ok && cls && fast;
}

bool criterion2() {
  bool all = true;
  std::ostringstream d;
  d << "clustered runs:";
  for (const char* name : {"eq_s1_case1.cfg", "eq_s1_case2.cfg"}) {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg = load(name);
    RunRecord rec = simulate(cfg.sim);
    const double secs = elapsed_s(t0);
    crit123_drift = std::max(crit123_drift, max_drift(rec));

    bool consensus = rec.final_x.dim() == run_reference.dim();
    for (std::size_t j = 0; j < run_reference.dim() && consensus; ++j)
      consensus = std::fabs(rec.final_x[j] - run_reference[j]) <= 2e-3;
    const bool cls = rec.classification == Classification::LeastSquaresOnly;
    const bool e_decays = rec.e.back() < 0.01 * rec.e.front();
    const bool ye_nonzero = rec.ye.back() > 1e-3;
    const bool fast = secs < 10.0;
    const bool ok = consensus && cls && e_decays && ye_nonzero && fast;
    all = all && ok;
    d << ' ' << (ok ? "ok" : "BAD") << " (dev "
      << fmt(max_abs_diff(rec.final_x, run_reference)) << ", Ye "
      << fmt(rec.ye.back()) << ", " << fmt(secs) << " s)";
  }
  report(2, all, d.str());
  return all;
}

bool criterion3() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  // resample badly conditioned draws: a tiny singular value makes the
  // normal-equation residual a blind stopping signal at this horizon
  auto draw_conditioned = [&](std::size_t m, std::size_t n) {
    for (;;) {
      DenseMatrix a(m, n);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = u(rng);
      double lo = 1e300;
      for (const ComplexScalar& ev : eigenvalues(a.transposed() * a))
        lo = std::min(lo, ev.real());
      if (lo >= 0.36) return a;  // smallest singular value >= 0.6
    }
  };
  bool all = true;
  double worst_ye = 0.0;
  int mismatches = 0;
  for (int k = 0; k < 20; ++k) {
    const bool consistent = k < 10;
    const std::size_t m = 3 + k % 3;
    const std::size_t n = 2 + k % 2;
    DenseMatrix a0 = draw_conditioned(m, n);
    DenseVector xr(n);
    for (std::size_t j = 0; j < n; ++j) xr[j] = u(rng);
    DenseVector b0 = a0 * xr;

    DenseMatrix a = a0;
    DenseVector b = b0;
    if (!consistent) {
      // duplicate the first row with a contradicting right-hand side
      a = DenseMatrix(m + 1, n);
      b = DenseVector(m + 1);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) a(i, j) = a0(i, j);
        b[i] = b0[i];
      }
      for (std::size_t j = 0; j < n; ++j) a(m, j) = a0(0, j);
      b[m] = b0[0] + 1.0 + std::fabs(u(rng));
    }

    SimConfig sim;
    sim.partition = make_homogeneous(a, b, BSplitRule::Uniform);
    sim.network = standard_grid(a.rows(), n);
    sim.h = 5e-3;
    sim.t_end = 1000.0;  // headroom for the slowest draws; most stop early
    sim.record_every = 100;
    sim.tol_converge = 1e-8;  // drain the trackers well below the exactness bar
    RunRecord rec = simulate(sim);
    crit123_drift = std::max(crit123_drift, max_drift(rec));

    const Classification want = consistent ? Classification::Exact
                                           : Classification::LeastSquaresOnly;
    if (rec.classification != want) {
      ++mismatches;
      all = false;
    }
    if (consistent) {
      worst_ye = std::max(worst_ye, rec.ye.back());
      all = all && rec.ye.back() < 1e-8;
    }
  }
  std::ostringstream d;
  d << "20 seeded instances: " << mismatches
    << " classification mismatches, worst consistent Ye " << fmt(worst_ye);
  report(3, all, d.str());
  return all;
}

std::vector<std::size_t> composition(std::mt19937_64& rng, std::size_t total,
                                     std::size_t parts) {
  std::vector<std::size_t> out(parts, 1);
  std::uniform_int_distribution<std::size_t> pick(0, parts - 1);
  for (std::size_t r = 0; r < total - parts; ++r) ++out[pick(rng)];
  return out;
}

DenseMatrix random_connected_laplacian(std::mt19937_64& rng, std::size_t k) {
  std::uniform_real_distribution<double> w(0.5, 2.0);
  std::bernoulli_distribution chord(0.4);
  DenseMatrix l(k, k);
  auto add = [&](std::size_t i, std::size_t j) {
    const double wt = w(rng);
    l(i, i) += wt;
    l(j, j) += wt;
    l(i, j) -= wt;
    l(j, i) -= wt;
  };
  for (std::size_t i = 0; i + 1 < k; ++i) add(i, i + 1);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 2; j < k; ++j)
      if (chord(rng)) add(i, j);
  return l;
}

bool criterion4() {
  std::mt19937_64 rng(8182);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  bool all = true;
  double worst_re = -1e300;
  std::size_t max_dim = 0;

  auto draw_problem = [&](std::size_t& m, std::size_t& n, DenseMatrix& a,
                          DenseVector& b) {
    std::uniform_int_distribution<std::size_t> md(2, 5), nd(2, 4);
    m = md(rng);
    n = nd(rng);
    a = DenseMatrix(m, n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) a(i, j) = u(rng);
    b = DenseVector(m);
    for (std::size_t i = 0; i < m; ++i) b[i] = u(rng);
  };

  auto check = [&](const CompactSystem& cs) {
    SpectralReport rep = spectral_verify(cs.q);
    all = all && rep.hurwitz_nonzero && rep.zero_nondefective;
    worst_re = std::max(worst_re, rep.max_nonzero_real_part);
    max_dim = std::max(max_dim, cs.q.rows());
  };

  for (int trial = 0; trial < 50; ++trial) {
    std::size_t m, n;
    DenseMatrix a;
    DenseVector b;

    draw_problem(m, n, a, b);
    check(make_model(make_homogeneous(a, b, BSplitRule::Uniform),
                     standard_grid(m, n))
              ->compact());

    draw_problem(m, n, a, b);
    {
      std::uniform_int_distribution<std::size_t> cd(1, std::min<std::size_t>(3, n));
      const std::size_t c = cd(rng);
      auto widths = composition(rng, n, c);
      std::vector<std::vector<std::size_t>> heights;
      std::vector<std::size_t> sizes;
      for (std::size_t i = 0; i < c; ++i) {
        std::uniform_int_distribution<std::size_t> ad(1, std::min<std::size_t>(3, m));
        const std::size_t ci = ad(rng);
        heights.push_back(composition(rng, m, ci));
        sizes.push_back(ci);
      }
      check(make_model(make_case1(a, b, widths, heights, ClusterBRule::Uniform),
                       path_double_layer(sizes))
                ->compact());
    }

    draw_problem(m, n, a, b);
    {
      std::uniform_int_distribution<std::size_t> cd(1, std::min<std::size_t>(3, m));
      const std::size_t c = cd(rng);
      auto heights = composition(rng, m, c);
      std::vector<std::vector<std::size_t>> widths;
      std::vector<std::size_t> sizes;
      for (std::size_t i = 0; i < c; ++i) {
        std::uniform_int_distribution<std::size_t> ad(1, std::min<std::size_t>(3, n));
        const std::size_t ci = ad(rng);
        widths.push_back(composition(rng, n, ci));
        sizes.push_back(ci);
      }
      check(make_model(make_case2(a, b, heights, widths, RowBRule::Uniform),
                       path_double_layer(sizes))
                ->compact());
    }
  }

  // PSD template triples: weighted connected laplacians plus a dense coupling
  std::mt19937_64 prng(1010);
  std::uniform_real_distribution<double> pu(-1.0, 1.0);
  std::uniform_int_distribution<std::size_t> dim(1, 6);
  bool psd_all = true;
  double psd_worst = -1e300;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t p = dim(prng);
    const std::size_t q = dim(prng);
    DenseMatrix y(p, q);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < q; ++j) y(i, j) = pu(prng);
    DenseMatrix m2 = build_lemma2_matrix(random_connected_laplacian(prng, p),
                                         random_connected_laplacian(prng, q), y);
    SpectralReport rep = spectral_verify(m2);
    psd_all = psd_all && rep.hurwitz_nonzero && rep.zero_nondefective;
    if (rep.zero_eig_count < m2.rows())
      psd_worst = std::max(psd_worst, rep.max_nonzero_real_part);
  }

  std::ostringstream d;
  d << "150 system matrices (max dim " << max_dim << ", worst nonzero Re "
    << fmt(worst_re) << ") + 100 template triples (worst " << fmt(psd_worst)
    << ")";
  report(4, all && psd_all, d.str());
  return all && psd_all;
}

bool criterion5() {
  bool all = true;
  double worst = 0.0;
  ExperimentConfig cfgs[3] = {load("eq_s1_hom.cfg"), load("eq_s1_case1.cfg"),
                              load("eq_s1_case2.cfg")};
  for (const ExperimentConfig& cfg : cfgs) {
    auto model = make_model(cfg.sim);
    CompactSystem cs = model->compact();
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      SwarmState s = model->init_state(InitRule::SeededUniform,
                                       InitRule::SeededUniform, seed);
      fill_uniform(s.xi, seed + 10000);
      Derivative d = model->make_derivative();
      model->eval(s, d);
      std::vector<double> lhs = model->stack_derivative(d);
      std::vector<double> sv = model->stack_state(s);
      DenseVector rhs = cs.q * DenseVector(sv);
      double gap = 0.0;
      for (std::size_t i = 0; i < lhs.size(); ++i)
        gap = std::max(gap, std::fabs(lhs[i] - rhs[i]));
      gap /= 1.0 + DenseVector(sv).norm();
      worst = std::max(worst, gap);
      all = all && gap <= 1e-10;
    }
  }
  std::ostringstream d;
  d << "3 variants x 100 states: worst relative field/compact deviation "
    << fmt(worst);
  report(5, all, d.str());
  return all;
}

bool criterion6() {
  const bool runs_ok = crit123_drift <= 1e-8;

  ExperimentConfig cfg = load("eq_s1_hom.cfg");
  auto model = make_model(cfg.sim);
  SwarmState s = model->init_state(InitRule::SeededUniform,
                                   InitRule::SeededUniform, 17);
  fill_uniform(s.xi, 18);
  const double control = model->conservation_drift(s);
  const bool control_ok = control > 0.0;

  std::ostringstream d;
  d << "max drift over criteria 1-3 runs " << fmt(crit123_drift)
    << "; perturbed-tracker control " << fmt(control);
  report(6, runs_ok && control_ok, d.str());
  return runs_ok && control_ok;
}

bool criterion7() {
  // third column = first + second, so A^T A is singular; b is inconsistent
  DenseMatrix a(4, 3, {1, 0, 1, 0, 1, 1, 1, 1, 2, 2, -1, 1});
  DenseVector b(std::vector<double>{1, 2, 0, 1});
  const bool deficient = numerical_rank(a, 1e-10) == 2;
  const bool inconsistent = !consistency_check(a, b, 1e-10);

  SimConfig sim;
  sim.partition = make_homogeneous(a, b, BSplitRule::Uniform);
  sim.network = standard_grid(4, 3);
  sim.h = 5e-3;
  sim.t_end = 400.0;
  sim.record_every = 100;
  RunRecord rec = simulate(sim);

  const double grad = residual_gradient(a, b, rec.final_x).norm();
  const bool converged = rec.classification != Classification::NotConverged;
  const bool grad_ok = grad <= 1e-5;
  const bool agree_ok = rec.disagreement.back() <= 1e-6;

  std::ostringstream d;
  d << "rank-" << numerical_rank(a, 1e-10)
    << " inconsistent instance: normal-equation residual " << fmt(grad)
    << ", disagreement " << fmt(rec.disagreement.back())
    << ", reference " << (rec.reference_is_oracle ? "oracle" : "own consensus");
  const bool ok =
      deficient && inconsistent && converged && grad_ok && agree_ok;
  report(7, ok, d.str());
  return ok;
}

bool criterion8() {
  // single-agent clusters (gain 1): the row-cluster field must equal the
  // scalar field outright
  DenseMatrix a1(2, 1, {1.5, -0.75});
  DenseVector b1(std::vector<double>{2.0, 1.0});
  HomogeneousPartition hp1 = make_homogeneous(a1, b1, BSplitRule::Uniform);
  GridNetwork grid1 = standard_grid(2, 1);
  Case2Partition cp1 = make_case2(a1, b1, {1, 1}, {{1}, {1}}, RowBRule::Uniform);
  DoubleLayerNetwork net1 = path_double_layer({1, 1});
  auto hom1 = make_model(hp1, grid1);
  auto c21 = make_model(cp1, net1);
  double worst_eq = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SwarmState s = hom1->init_state(InitRule::SeededUniform,
                                    InitRule::SeededUniform, seed);
    fill_uniform(s.xi, seed + 31);
    SwarmState s2 = c21->init_state(InitRule::Zero, InitRule::Zero, 0);
    s2.x = s.x;
    s2.xi = s.xi;
    s2.z = s.z;
    Derivative dh = hom1->make_derivative();
    hom1->eval(s, dh);
    Derivative d2 = c21->make_derivative();
    c21->eval(s2, d2);
    for (std::size_t i = 0; i < dh.x.size(); ++i) {
      worst_eq = std::max(worst_eq, std::fabs(dh.x[i] - d2.x[i]));
      worst_eq = std::max(worst_eq, std::fabs(dh.xi[i] - d2.xi[i]));
      worst_eq = std::max(worst_eq, std::fabs(dh.z[i] - d2.z[i]));
    }
  }
  const bool equal_ok = worst_eq <= 1e-12;

  // 2x2 with full row clusters (gain 2): fields differ by exactly the
  // (gain - 1) * A_ij y_ij correction in the x and z families
  DenseMatrix a2(2, 2, {1.0, -2.0, 0.5, 3.0});
  DenseVector b2(std::vector<double>{1.0, -1.0});
  DenseMatrix b_split(2, 2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) b_split(i, j) = b2[i] / 2.0;
  HomogeneousPartition hp2 = make_homogeneous(a2, b2, b_split);
  GridNetwork grid2 = standard_grid(2, 2);
  Case2Partition cp2 =
      make_case2(a2, b2, {1, 1}, {{1, 1}, {1, 1}}, RowBRule::Uniform);
  DoubleLayerNetwork net2 = path_double_layer({2, 2});
  auto hom2 = make_model(hp2, grid2);
  auto c22 = make_model(cp2, net2);
  double worst_rel = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SwarmState s = hom2->init_state(InitRule::SeededUniform,
                                    InitRule::SeededUniform, seed + 100);
    fill_uniform(s.xi, seed + 131);
    SwarmState s2 = c22->init_state(InitRule::Zero, InitRule::Zero, 0);
    s2.x = s.x;
    s2.xi = s.xi;
    s2.z = s.z;
    Derivative dh = hom2->make_derivative();
    hom2->eval(s, dh);
    Derivative d2 = c22->make_derivative();
    c22->eval(s2, d2);
    std::vector<double> y;
    c22->materialize_y(s2, y);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) {
        const std::size_t k = i * 2 + j;
        const double ay = a2(i, j) * y[k];
        worst_rel = std::max(worst_rel, std::fabs(d2.x[k] - (dh.x[k] - ay)));
        worst_rel = std::max(worst_rel, std::fabs(d2.xi[k] - dh.xi[k]));
        worst_rel = std::max(worst_rel, std::fabs(d2.z[k] - (dh.z[k] + ay)));
      }
  }
  const bool related_ok = worst_rel <= 1e-12;

  std::ostringstream d;
  d << "gain-1 clusters match the scalar field (worst " << fmt(worst_eq)
    << "); gain-2 clusters differ by the gradient correction (worst "
    << fmt(worst_rel) << ")";
  report(8, equal_ok && related_ok, d.str());
  return equal_ok && related_ok;
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  if (failures == 0)
    std::printf("all 8 criteria passed\n");
  else
    std::printf("%d criterion(s) failed\n", failures);
  return failures;
}
