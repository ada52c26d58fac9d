#include "spurlab/trainer.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>
#include <stdexcept>

#include "spurlab/rng.hpp"

namespace spurlab::trainer {
namespace {

void format_17g(std::ostream& os, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  os << buf;
}

TrajectoryRecord make_record(int step, const Classifier& w, double loss,
                             double accuracy, const Vec& grad, double sigma,
                             double norm_w2_pre) {
  TrajectoryRecord r;
  r.step = step;
  r.norm_w1 = w.w1.norm();
  r.norm_w2 = w.w2.norm();
  r.loss = loss;
  r.accuracy = accuracy;
  r.g1_dot = grad.head(w.d1()).dot(w.w1);
  r.g2_dot = grad.tail(w.d2()).dot(w.w2);
  r.sigma = sigma;
  r.norm_w2_pre = norm_w2_pre;
  return r;
}

void check_finite(double loss, const Vec& grad, int step) {
  if (!std::isfinite(loss))
    throw std::runtime_error("trainer: loss is not finite at step " +
                             std::to_string(step));
  if (!grad.allFinite())
    throw std::runtime_error("trainer: gradient is not finite at step " +
                             std::to_string(step));
}

// Shared main loop; grad_fn(w) supplies the step direction, which differs
// between the entropy, pseudo-label and noisy variants. Record t carries the
// pre-projection w2 norm of the step that produced state t.
template <class GradFn>
Trajectory run_loop(const Classifier& w0, const TrainerConfig& cfg,
                    LossModel& model, GradFn&& grad_fn) {
  if (w0.norm() > cfg.R + 1e-12)
    throw std::invalid_argument("trainer: |w0| exceeds projection radius");
  Trajectory traj;
  Classifier w = w0;
  double produced_pre = w0.w2.norm();
  for (int step = 0;; ++step) {
    model.begin_step(step);
    const double loss = model.loss(w);
    const Vec grad = grad_fn(w);
    check_finite(loss, grad, step);
    traj.records.push_back(make_record(step, w, loss, model.accuracy(w), grad,
                                       model.spurious_sigma(w), produced_pre));
    traj.iterates.push_back(w);
    // The contraction regime needs <grad_{w2} L, w2> >= 0; flag any iterate
    // where that fails instead of halting.
    if (traj.records.back().g2_dot < 0.0 && w.w2.norm() > cfg.stop_tol)
      traj.precondition_violated = true;
    if (step >= cfg.max_steps) break;
    if (w.w2.norm() <= cfg.stop_tol) break;
    const Vec pre = w.full() - cfg.eta * grad;
    produced_pre = pre.tail(w.d2()).norm();
    w = gd_step(w, grad, cfg.eta, cfg.R);
  }
  return traj;
}

}  // namespace

void Trajectory::write_csv(std::ostream& os) const {
  os << "step,norm_w1,norm_w2,loss,accuracy,g1_dot,g2_dot,sigma\n";
  for (const auto& r : records) {
    os << r.step;
    for (double v : {r.norm_w1, r.norm_w2, r.loss, r.accuracy, r.g1_dot,
                     r.g2_dot, r.sigma}) {
      os << ',';
      format_17g(os, v);
    }
    os << "\n";
  }
}

Classifier gd_step(const Classifier& w, const Vec& grad, double eta, double R) {
  if (!grad.allFinite())
    throw std::invalid_argument("gd_step: gradient must be finite");
  const Vec moved = w.full() - eta * grad;
  const double norm = moved.norm();
  if (norm == 0.0)
    throw std::runtime_error("gd_step: degenerate step (post-step vector is 0)");
  return Classifier::from_full((R / norm) * moved, w.d1(), R);
}

Trajectory run_entropy_min(const Classifier& w0, const TrainerConfig& cfg,
                           LossModel& model) {
  return run_loop(w0, cfg, model,
                  [&](const Classifier& w) { return model.grad(w); });
}

Trajectory run_pseudo_step(const Classifier& w0, const TrainerConfig& cfg,
                           LossModel& model) {
  return run_loop(w0, cfg, model,
                  [&](const Classifier& w) { return model.pseudo_grad(w); });
}

Trajectory run_noisy_gd(const Classifier& w0, const TrainerConfig& cfg,
                        LossModel& model) {
  if (cfg.noise_scale < 0.0)
    throw std::invalid_argument("run_noisy_gd: noise_scale must be >= 0");
  auto rng = std::make_shared<CounterRng>(cfg.seed, /*stream=*/11);
  return run_loop(w0, cfg, model, [&, rng](const Classifier& w) {
    Vec g = model.grad(w);
    if (cfg.noise_scale > 0.0)
      for (int i = 0; i < g.size(); ++i) g(i) += cfg.noise_scale * rng->normal();
    return g;
  });
}

Trajectory run_pseudo_rounds(const Classifier& w0, const TrainerConfig& cfg,
                             engine::EmpiricalModel& model) {
  if (cfg.epochs_per_round < 1)
    throw std::invalid_argument("run_pseudo_rounds: epochs_per_round >= 1");
  if (w0.norm() > cfg.R + 1e-12)
    throw std::invalid_argument("trainer: |w0| exceeds projection radius");

  Trajectory traj;
  Classifier w = w0;
  int step = 0;
  const auto record_state = [&](double pre_w2) {
    const double loss = model.loss(w);
    const Vec grad = model.grad(w);
    check_finite(loss, grad, step);
    traj.records.push_back(make_record(step, w, loss, model.accuracy(w), grad,
                                       model.spurious_sigma(w), pre_w2));
    traj.iterates.push_back(w);
  };
  record_state(w.w2.norm());

  for (int round = 0; round < cfg.max_steps; ++round) {
    model.begin_step(round + 1);  // fresh batch per round when provided
    const auto& batch = model.batch();

    // Freeze labels and apply the confidence threshold; samples return at the
    // next relabeling.
    const Vec t = batch.x1 * w.w1 + batch.x2 * w.w2;
    std::vector<int> keep;
    keep.reserve(batch.n());
    for (int i = 0; i < batch.n(); ++i)
      if (std::fabs(t(i)) >= cfg.conf_threshold) keep.push_back(i);
    if (keep.empty())
      throw std::runtime_error(
          "run_pseudo_rounds: confidence threshold dropped every sample in "
          "round " +
          std::to_string(round));

    dist::SampleBatch kept;
    kept.seed = batch.seed;
    kept.x1.resize(static_cast<int>(keep.size()), batch.d1());
    kept.x2.resize(static_cast<int>(keep.size()), batch.d2());
    kept.y.resize(static_cast<int>(keep.size()));
    Vec labels(static_cast<int>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) {
      const int i = keep[j];
      kept.x1.row(static_cast<int>(j)) = batch.x1.row(i);
      kept.x2.row(static_cast<int>(j)) = batch.x2.row(i);
      kept.y(static_cast<int>(j)) = batch.y(i);
      labels(static_cast<int>(j)) = t(i) > 0.0 ? 1.0 : -1.0;
    }

    for (int epoch = 0; epoch < cfg.epochs_per_round; ++epoch) {
      const Vec grad = engine::labeled_empirical_grad(w, kept, labels);
      check_finite(0.0, grad, step);
      const Vec pre = w.full() - cfg.eta * grad;
      const double pre_w2 = pre.tail(w.d2()).norm();
      w = gd_step(w, grad, cfg.eta, cfg.R);
      ++step;
      record_state(pre_w2);
    }
    if (w.w2.norm() <= cfg.stop_tol) break;
  }
  return traj;
}

Trajectory run(const Classifier& w0, const TrainerConfig& cfg,
               LossModel& model) {
  switch (cfg.variant) {
    case Variant::entropy_min:
      return run_entropy_min(w0, cfg, model);
    case Variant::pseudo_step:
      return run_pseudo_step(w0, cfg, model);
    case Variant::noisy_gd:
      return run_noisy_gd(w0, cfg, model);
    case Variant::pseudo_rounds: {
      auto* empirical = dynamic_cast<engine::EmpiricalModel*>(&model);
      if (!empirical)
        throw std::invalid_argument(
            "run: pseudo_rounds requires an empirical batch source");
      return run_pseudo_rounds(w0, cfg, *empirical);
    }
  }
  throw std::logic_error("run: unknown variant");
}

// ---------------------------------------------------------------------------
// Local-minimum certificate
// ---------------------------------------------------------------------------

LocalMinCertificate certify_local_min(
    const Vec& w1, const std::function<double(const Vec&)>& /*purified_loss*/,
    const std::function<Vec(const Vec&)>& purified_grad, double eps,
    double gamma) {
  const int d = static_cast<int>(w1.size());
  LocalMinCertificate cert;
  cert.norm_w1 = w1.norm();
  cert.cond1 = cert.norm_w1 >= 1.0 - eps;

  const Vec g = purified_grad(w1);
  const Eigen::MatrixXd P =
      Eigen::MatrixXd::Identity(d, d) - (w1 * w1.transpose()) / w1.squaredNorm();
  cert.projected_grad_norm = (P * g).norm();
  cert.cond2 = cert.projected_grad_norm <= eps;

  if (d == 1) {
    // Empty tangent space: the curvature condition is vacuous.
    cert.min_tangent_eigenvalue = 0.0;
    cert.cond3 = true;
    return cert;
  }

  // Hessian by central finite differences of the gradient.
  const double h = 1e-4;
  Eigen::MatrixXd H(d, d);
  for (int j = 0; j < d; ++j) {
    Vec ej = Vec::Zero(d);
    ej(j) = h;
    H.col(j) = (purified_grad(w1 + ej) - purified_grad(w1 - ej)) / (2.0 * h);
  }
  H = 0.5 * (H + H.transpose()).eval();

  Eigen::MatrixXd M = P * H * P - w1.dot(g) * P;
  // Shift the known zero eigenvalue along w1 out of the way, then read the
  // smallest remaining (tangent-space) eigenvalue.
  const double shift = M.norm() + std::fabs(gamma) + 1.0;
  M += shift * (w1 * w1.transpose()) / w1.squaredNorm();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  cert.min_tangent_eigenvalue = es.eigenvalues().minCoeff();
  cert.cond3 = cert.min_tangent_eigenvalue >= -gamma;
  return cert;
}

LocalMinCertificate certify_local_min(const Vec& w1,
                                      const dist::GaussianTargetSpec& spec,
                                      double eps, double gamma) {
  const int d2 = spec.d2();
  const auto loss = [&](const Vec& v) {
    return engine::population_loss_gaussian(
        Classifier(v, Vec::Zero(d2), std::max(1.0, v.norm() + 1.0)), spec);
  };
  const auto grad = [&](const Vec& v) -> Vec {
    const Vec g = engine::population_grad_gaussian(
        Classifier(v, Vec::Zero(d2), std::max(1.0, v.norm() + 1.0)), spec);
    return g.head(v.size());
  };
  return certify_local_min(w1, loss, grad, eps, gamma);
}

double default_eta(LossModel& model, double R, std::uint64_t seed, int pairs) {
  CounterRng rng(seed, /*stream=*/13);
  const int d1 = model.d1(), d2 = model.d2();
  double smoothness = 0.0;
  for (int k = 0; k < pairs; ++k) {
    Vec a(d1 + d2), b(d1 + d2);
    for (int i = 0; i < d1 + d2; ++i) {
      a(i) = rng.normal();
      b(i) = rng.normal();
    }
    a *= R / a.norm() * rng.uniform();
    b *= R / b.norm() * rng.uniform();
    const Classifier wa = Classifier::from_full(a, d1, R);
    const Classifier wb = Classifier::from_full(b, d1, R);
    const double quot =
        (model.grad(wa) - model.grad(wb)).norm() / (a - b).norm();
    smoothness = std::max(smoothness, quot);
  }
  return smoothness > 0.0 ? 0.05 / smoothness : 0.05;
}

DecayFit fit_w2_decay(const Trajectory& traj, double lo, double hi) {
  DecayFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int n = 0;
  for (const auto& r : traj.records) {
    if (r.norm_w2 < lo || r.norm_w2 > hi) continue;
    const double x = r.step;
    const double y = std::log(r.norm_w2);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    ++n;
  }
  fit.points = n;
  if (n < 2) return fit;
  const double vxx = sxx - sx * sx / n;
  const double vxy = sxy - sx * sy / n;
  const double vyy = syy - sy * sy / n;
  if (vxx <= 0.0 || vyy <= 0.0) return fit;
  fit.slope = vxy / vxx;
  fit.r_squared = (vxy * vxy) / (vxx * vyy);
  return fit;
}

}  // namespace spurlab::trainer
