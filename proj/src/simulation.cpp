#include "lsqswarm/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lsqswarm/errors.hpp"
#include "lsqswarm/kernels.hpp"
#include "lsqswarm/numerics.hpp"

namespace lsqswarm {
namespace {

constexpr double kStabilityBound = 0.625;  // h * rho(Q) kept below 2.5/4
constexpr double kDivergenceNorm = 1e12;
constexpr double kLogFloor = 1e-13;
constexpr std::size_t kConsecutiveConverged = 10;

void check_finite_derivative(const Derivative& d, double t) {
  for (const auto* fam : {&d.x, &d.xi, &d.z})
    for (double v : *fam)
      if (!std::isfinite(v))
        throw NumericalError("non-finite derivative at t=" + std::to_string(t));
}

struct Integrator {
  const FieldModel& model;
  Derivative k1, k2, k3, k4;
  SwarmState stage;

  explicit Integrator(const FieldModel& m) : model(m) {
    k1 = m.make_derivative();
    k2 = k1;
    k3 = k1;
    k4 = k1;
  }

  static void blend(const SwarmState& s, const Derivative& k, double a,
                    SwarmState& out) {
    const auto& kt = kernels::active_kernels();
    kt.add_scaled(s.x.data(), a, k.x.data(), out.x.data(), s.x.size());
    kt.add_scaled(s.xi.data(), a, k.xi.data(), out.xi.data(), s.xi.size());
    kt.add_scaled(s.z.data(), a, k.z.data(), out.z.data(), s.z.size());
  }

  void step(SwarmState& s, double h, double t) {
    if (stage.x.empty()) stage = s;
    model.eval(s, k1);
    blend(s, k1, h / 2.0, stage);
    model.eval(stage, k2);
    blend(s, k2, h / 2.0, stage);
    model.eval(stage, k3);
    blend(s, k3, h, stage);
    model.eval(stage, k4);
    check_finite_derivative(k1, t);
    check_finite_derivative(k4, t);
    const auto& kt = kernels::active_kernels();
    kt.rk4_combine(s.x.data(), k1.x.data(), k2.x.data(), k3.x.data(),
                   k4.x.data(), h, s.x.data(), s.x.size());
    kt.rk4_combine(s.xi.data(), k1.xi.data(), k2.xi.data(), k3.xi.data(),
                   k4.xi.data(), h, s.xi.data(), s.xi.size());
    kt.rk4_combine(s.z.data(), k1.z.data(), k2.z.data(), k3.z.data(),
                   k4.z.data(), h, s.z.data(), s.z.size());
  }
};

double state_norm(const SwarmState& s) {
  const auto& kt = kernels::active_kernels();
  double acc = kt.dot(s.x.data(), s.x.data(), s.x.size());
  acc += kt.dot(s.xi.data(), s.xi.data(), s.xi.size());
  acc += kt.dot(s.z.data(), s.z.data(), s.z.size());
  return std::sqrt(acc);
}

bool state_finite(const SwarmState& s) {
  for (const auto* fam : {&s.x, &s.xi, &s.z})
    for (double v : *fam)
      if (!std::isfinite(v)) return false;
  return true;
}

void validate(const SimConfig& cfg) {
  if (!(cfg.h > 0.0)) throw ValidationError("h", "step size must be positive");
  if (!(cfg.t_end >= cfg.h))
    throw ValidationError("t_end", "horizon must cover at least one step");
  if (cfg.record_every == 0)
    throw ValidationError("record_every", "must be at least 1");
  if (!(cfg.tol_converge > 0.0) || !(cfg.tol_exact > 0.0))
    throw ValidationError("tolerances", "must be positive");
}

}  // namespace

const char* to_string(Classification c) {
  switch (c) {
    case Classification::Exact: return "Exact";
    case Classification::LeastSquaresOnly: return "LeastSquaresOnly";
    case Classification::NotConverged: return "NotConverged";
  }
  return "?";
}

std::unique_ptr<FieldModel> make_model(const SimConfig& cfg) {
  return std::visit(
      [&](const auto& p) -> std::unique_ptr<FieldModel> {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, HomogeneousPartition>) {
          const auto* net = std::get_if<GridNetwork>(&cfg.network);
          if (!net)
            throw ShapeError("scalar partition needs a grid network");
          return make_model(p, *net);
        } else {
          const auto* net = std::get_if<DoubleLayerNetwork>(&cfg.network);
          if (!net)
            throw ShapeError("clustered partition needs a double-layered network");
          return make_model(p, *net);
        }
      },
      cfg.partition);
}

SwarmState rk4_step(const FieldModel& model, const SwarmState& s, double h) {
  if (!(h > 0.0)) throw InvalidInputError("step size must be positive");
  SwarmState out = s;
  Integrator integ(model);
  integ.step(out, h, 0.0);
  return out;
}

RunRecord simulate(const SimConfig& cfg) {
  validate(cfg);
  std::unique_ptr<FieldModel> model = make_model(cfg);
  // the compact build asserts connectivity; its spectral radius drives the
  // step-size guard
  CompactSystem cs = model->compact();
  const double rho = spectral_radius(cs.q);
  double h = cfg.h;
  if (h * rho > kStabilityBound) h = kStabilityBound / rho;

  RunRecord rec;
  rec.resolved_h = h;
  SwarmState s = model->init_state(cfg.x0_rule, cfg.z0_rule, cfg.seed);

  const DenseMatrix& a = model->system_matrix();
  const DenseVector& b = model->system_rhs();
  const std::size_t total_steps =
      static_cast<std::size_t>(std::ceil(cfg.t_end / h - 1e-12));

  std::vector<std::vector<double>> x_snapshots;
  std::size_t consecutive_ok = 0;
  bool stopped_early = false;

  auto record_sample = [&](double t) {
    if (!state_finite(s) || state_norm(s) > kDivergenceNorm)
      throw DivergenceError(h, t);
    DenseVector xbar = model->consensus_projection(s.x);
    rec.times.push_back(t);
    rec.ye.push_back(model->ye(s));
    rec.grad_norm.push_back(residual_gradient(a, b, xbar).norm());
    rec.disagreement.push_back(model->disagreement(s.x));
    rec.conservation_drift.push_back(model->conservation_drift(s));
    x_snapshots.push_back(s.x);
    const bool ok = rec.grad_norm.back() < cfg.tol_converge &&
                    rec.disagreement.back() < cfg.tol_converge;
    consecutive_ok = ok ? consecutive_ok + 1 : 0;
    return consecutive_ok >= kConsecutiveConverged;
  };

  record_sample(0.0);
  Integrator integ(*model);
  for (std::size_t step = 1; step <= total_steps; ++step) {
    integ.step(s, h, static_cast<double>(step - 1) * h);
    const double t = static_cast<double>(step) * h;
    if (step % cfg.record_every == 0 || step == total_steps) {
      if (record_sample(t)) {
        stopped_early = true;
        break;
      }
    }
  }
  (void)stopped_early;

  // estimation error is measured against the oracle solution when it is
  // unique, otherwise against the run's own final consensus value
  const std::size_t n = a.cols();
  if (numerical_rank(a, kRankTol) == n) {
    rec.reference = least_squares_oracle(a, b);
    rec.reference_is_oracle = true;
  } else {
    rec.reference = model->consensus_projection(s.x);
    rec.reference_is_oracle = false;
  }
  rec.e.reserve(x_snapshots.size());
  for (const auto& xs : x_snapshots)
    rec.e.push_back(model->estimation_error(xs, rec.reference));

  rec.final_x = model->consensus_projection(s.x);
  const bool converged = rec.grad_norm.back() < cfg.tol_converge &&
                         rec.disagreement.back() < cfg.tol_converge;
  if (!converged)
    rec.classification = Classification::NotConverged;
  else if (rec.ye.back() < cfg.tol_exact)
    rec.classification = Classification::Exact;
  else
    rec.classification = Classification::LeastSquaresOnly;

  try {
    rec.rate_estimate = estimate_rate(rec);
  } catch (const InsufficientDecay&) {
    rec.rate_estimate = std::numeric_limits<double>::quiet_NaN();
  }
  return rec;
}

LogLinearFit fit_log_linear(const std::vector<double>& times,
                            const std::vector<double>& values) {
  std::vector<double> t, le;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] > kLogFloor) {
      t.push_back(times[i]);
      le.push_back(std::log(values[i]));
    }
  if (t.size() < 2)
    throw InsufficientDecay("need at least two samples above the log floor");
  const double nn = static_cast<double>(t.size());
  double st = 0, se = 0, stt = 0, ste = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    se += le[i];
    stt += t[i] * t[i];
    ste += t[i] * le[i];
  }
  const double denom = nn * stt - st * st;
  if (denom == 0.0) throw InsufficientDecay("time window has zero extent");
  LogLinearFit fit;
  fit.slope = (nn * ste - st * se) / denom;
  fit.intercept = (se - fit.slope * st) / nn;
  double max_resid = 0.0, lmin = le[0], lmax = le[0];
  for (std::size_t i = 0; i < t.size(); ++i) {
    max_resid = std::max(max_resid,
                         std::fabs(le[i] - (fit.intercept + fit.slope * t[i])));
    lmin = std::min(lmin, le[i]);
    lmax = std::max(lmax, le[i]);
  }
  fit.residual_ratio = lmax > lmin ? max_resid / (lmax - lmin)
                                   : std::numeric_limits<double>::infinity();
  return fit;
}

LogLinearFit decay_fit(const RunRecord& record) {
  const auto& e = record.e;
  if (e.empty()) throw InsufficientDecay("empty record");
  std::size_t above = 0;
  for (double v : e)
    if (v > kLogFloor) ++above;
  if (above < 10)
    throw InsufficientDecay("fewer than 10 samples above the measurable floor");
  const double e0 = e.front();
  const double emin = *std::min_element(e.begin(), e.end());
  if (!(emin < e0 / 10.0))
    throw InsufficientDecay(
        "estimation error never dropped below a tenth of its initial value");
  // decaying window: from the start until E first reaches its floor
  const double floor_level = std::max(1.5 * emin, kLogFloor);
  std::size_t end = e.size() - 1;
  for (std::size_t i = 0; i < e.size(); ++i)
    if (e[i] <= floor_level) {
      end = i;
      break;
    }
  // middle 60% of that window
  const std::size_t lo = end / 5;
  const std::size_t hi = end - end / 5;
  std::vector<double> t(record.times.begin() + lo, record.times.begin() + hi + 1);
  std::vector<double> v(e.begin() + lo, e.begin() + hi + 1);
  return fit_log_linear(t, v);
}

double estimate_rate(const RunRecord& record) { return decay_fit(record).slope; }

double conservation_drift(const FieldModel& model, const SwarmState& s) {
  return model.conservation_drift(s);
}

}  // namespace lsqswarm
