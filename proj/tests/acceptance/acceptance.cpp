// Acceptance suite: runs every headline requirement end to end and prints one
// PASS/FAIL line per criterion. Exits nonzero if any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "spurlab/experiments.hpp"
#include "spurlab/io.hpp"
#include "spurlab/kernels.hpp"
#include "spurlab/rng.hpp"
#include "spurlab/trainer.hpp"
#include "spurlab/verify.hpp"

namespace d = spurlab::dist;
namespace e = spurlab::engine;
namespace k = spurlab::kernels;
namespace t = spurlab::trainer;
namespace v = spurlab::verify;
namespace x = spurlab::experiments;
using e::Classifier;
using e::Mat;
using e::Vec;

namespace {

int failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
  std::printf("%s criterion %2d: %s\n", ok ? "PASS" : "FAIL", criterion,
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

spurlab::config::ScenarioConfig toy_config(t::Variant variant) {
  spurlab::config::ScenarioConfig cfg;
  cfg.kind = "toy_gaussian";
  cfg.gamma_radius = 1.9815647609212321;
  cfg.trainer.gradient_source = t::GradientSource::empirical;
  cfg.n_samples = 10000;
  cfg.trainer.eta = 0.1;
  cfg.trainer.stop_tol = 1e-6;
  cfg.trainer.variant = variant;
  if (variant == t::Variant::pseudo_rounds) {
    cfg.trainer.max_steps = 150;  // rounds
    cfg.trainer.epochs_per_round = 25;
    cfg.trainer.conf_threshold = 0.1;
  } else {
    cfg.trainer.max_steps = 2000;
  }
  return cfg;
}

// Criterion 1: toy experiment endpoints across 5 seeds and both variants.
void criterion_1() {
  const std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  bool ok = true;
  double worst_src = 0.959, worst_gap = 0.0, worst_w2 = 0.0;
  for (t::Variant variant :
       {t::Variant::entropy_min, t::Variant::pseudo_rounds}) {
    const auto cfg = toy_config(variant);
    std::vector<x::ToyRunResult> results(seeds.size());
    spurlab::io::parallel_for_jobs(
        static_cast<int>(seeds.size()),
        [&](int i) { results[i] = x::run_toy_experiment(cfg, seeds[i]); });
    for (const auto& r : results) {
      ok &= std::fabs(r.source_target_accuracy - 0.959) <= 0.01;
      const double gap = std::fabs(r.final_accuracy - r.bayes);
      ok &= gap <= 0.005;
      ok &= r.final_max_abs_w2 < 0.02;
      if (std::fabs(r.source_target_accuracy - 0.959) >
          std::fabs(worst_src - 0.959))
        worst_src = r.source_target_accuracy;
      worst_gap = std::max(worst_gap, gap);
      worst_w2 = std::max(worst_w2, r.final_max_abs_w2);
    }
  }
  report(1, ok,
         "toy experiment: worst source acc " + fmt(worst_src) +
             " (want 0.959+-0.01), worst |acc-bayes| " + fmt(worst_gap) +
             " (<=0.005), worst spurious coef " + fmt(worst_w2) + " (<0.02)");
}

// Criterion 2: entropy-min and per-step pseudo-labeling produce identical
// iterates, population and empirical gradients, 3 seeds.
void criterion_2() {
  const d::GaussianTargetSpec spec(Vec::Constant(1, 2.5), 0.5,
                                   0.25 * Mat::Identity(2, 2));
  t::TrainerConfig cfg;
  cfg.eta = 0.2;
  cfg.max_steps = 1000;
  cfg.stop_tol = 0.0;
  double worst = 0.0;
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    spurlab::CounterRng rng(seed, 41);
    Vec w0(3);
    w0(0) = 0.65 + 0.2 * rng.uniform();
    w0(1) = rng.normal();
    w0(2) = rng.normal();
    w0.tail(2) *= 0.5 / w0.tail(2).norm();
    w0 /= w0.norm();
    const Classifier start = Classifier::from_full(w0, 1, 1.0);

    e::PopulationGaussianModel p1(spec), p2(spec);
    const auto pa = t::run_entropy_min(start, cfg, p1);
    const auto pb = t::run_pseudo_step(start, cfg, p2);
    for (std::size_t i = 0; i < pa.iterates.size(); ++i)
      worst = std::max(worst, (pa.iterates[i].full() - pb.iterates[i].full())
                                  .lpNorm<Eigen::Infinity>());

    const auto batch = d::sample_target(spec, 10000, seed);
    e::EmpiricalModel m1(batch), m2(batch);
    const auto ea = t::run_entropy_min(start, cfg, m1);
    const auto eb = t::run_pseudo_step(start, cfg, m2);
    for (std::size_t i = 0; i < ea.iterates.size(); ++i)
      worst = std::max(worst, (ea.iterates[i].full() - eb.iterates[i].full())
                                  .lpNorm<Eigen::Infinity>());
  }
  report(2, worst <= 1e-12,
         "pseudo-label/entropy equivalence over 1000 steps: max iterate gap " +
             fmt(worst) + " (<=1e-12)");
}

// Criterion 3: geometric convergence shape in the Gaussian safe regime.
void criterion_3() {
  const d::GaussianTargetSpec spec(Vec::Constant(1, 2.5), 0.5,
                                   0.25 * Mat::Identity(2, 2));
  e::PopulationGaussianModel model(spec);
  t::TrainerConfig cfg;
  cfg.eta = 0.3;
  cfg.max_steps = 4000;
  cfg.stop_tol = 1e-7;
  Vec w0(3);
  w0 << 0.62, 0.61, 0.49;
  w0 /= w0.norm();
  const auto traj =
      t::run_entropy_min(Classifier::from_full(w0, 1, 1.0), cfg, model);

  bool in_set = true;
  bool w1_monotone = true;
  for (std::size_t i = 0; i < traj.iterates.size(); ++i) {
    in_set &= v::in_safe_set(traj.iterates[i], spec, 1.0).inside;
    if (i > 0)
      w1_monotone &=
          traj.records[i].norm_w1 >= traj.records[i - 1].norm_w1 - 1e-10;
  }
  const auto fit = t::fit_w2_decay(traj, 1e-5, 1e-1);
  const bool ok = fit.r_squared >= 0.99 && in_set && w1_monotone &&
                  traj.back().norm_w2 <= 1e-5;
  report(3, ok,
         "geometric decay: R^2 " + fmt(fit.r_squared) +
             " (>=0.99) over |w2| in [1e-5,1e-1], safe set " +
             (in_set ? "held" : "LEFT") + ", |w1| monotone " +
             (w1_monotone ? "yes" : "no"));
}

// Criterion 4: lemma grid certificates at slack 1e-10.
void criterion_4() {
  const auto qt = v::verify_q_threshold();
  const auto qf = v::verify_q_floor();
  const auto gb = v::verify_g_bounds();
  const bool ok = qt.status == v::CheckStatus::passed &&
                  qf.status == v::CheckStatus::passed &&
                  gb.status == v::CheckStatus::passed;
  report(4, ok,
         std::string("lemma grids: q threshold ") + v::to_string(qt.status) +
             ", derivative floor " + v::to_string(qf.status) +
             ", g envelopes " + v::to_string(gb.status));
}

// Criterion 5: closed forms against quadrature and finite differences.
void criterion_5() {
  const auto backend = v::verify_backend_agreement();
  const auto qfd = v::verify_q_finite_difference();

  // Analytic population gradient vs central differences, 50 random
  // classifiers, relative error 1e-6.
  Mat s2(2, 2);
  s2 << 1.0, 0.2, 0.2, 0.6;
  const d::GaussianTargetSpec spec(Vec::Constant(1, 2.0), 1.0, s2);
  spurlab::CounterRng rng(51, 42);
  double worst_rel = 0.0;
  int done = 0;
  while (done < 50) {
    Vec w(3);
    for (int i = 0; i < 3; ++i) w(i) = rng.normal();
    w *= (0.2 + 0.8 * rng.uniform()) / w.norm();
    const Classifier c = Classifier::from_full(w, 1, 1.0);
    if (c.w2.norm() < 1e-2) continue;
    ++done;
    const Vec g = e::population_grad_gaussian(c, spec);
    const double h = 1e-6;
    for (int j = 0; j < 3; ++j) {
      Vec up = w, dn = w;
      up(j) += h;
      dn(j) -= h;
      const double fd =
          (e::population_loss_gaussian(Classifier::from_full(up, 1, 2.0),
                                       spec) -
           e::population_loss_gaussian(Classifier::from_full(dn, 1, 2.0),
                                       spec)) /
          (2.0 * h);
      worst_rel = std::max(
          worst_rel, std::fabs(g(j) - fd) / std::max(1.0, std::fabs(fd)));
    }
  }
  const bool ok = backend.status == v::CheckStatus::passed &&
                  qfd.status == v::CheckStatus::passed && worst_rel <= 1e-6;
  report(5, ok,
         std::string("backends: g closed-vs-quadrature ") +
             v::to_string(backend.status) + " (<=1e-8), q vs fd " +
             v::to_string(qfd.status) + ", grad vs fd rel err " +
             fmt(worst_rel) + " (<=1e-6)");
}

// Criterion 6: both failure-case reproductions, with the log-smooth control.
void criterion_6() {
  const Mat s1 = Mat::Identity(1, 1);
  const auto ex1 = v::reproduce_example1(s1, 100);
  const auto ex2 = v::reproduce_example2();
  const auto ctrl = v::reproduce_example2_smooth_control();
  const bool ok = ex1.status == v::CheckStatus::passed &&
                  ex2.status == v::CheckStatus::passed &&
                  ctrl.status == v::CheckStatus::passed;
  const auto q = v::example2_quantities(15.0, 0.05, 0.05);
  const auto qc = v::example2_quantities(15.0, 0.05, 8.0);
  report(6, ok,
         "failure cases: spurious growth 100 steps " +
             std::string(v::to_string(ex1.status)) + "; L=" + fmt(q.loss) +
             "<0.05 with dL/dsigma=" + fmt(q.dl_dsigma) +
             "<0; smooth control dL/dsigma=" + fmt(qc.dl_dsigma) + ">0");
}

// Criterion 7: finite-sample deviation rate over n = 1e3..1e6, 20 trials.
void criterion_7() {
  const d::GaussianTargetSpec spec(Vec::Constant(1, 2.0), 1.0,
                                   Mat::Identity(2, 2));
  spurlab::CounterRng rng(7, 43);
  std::vector<Classifier> grid;
  for (int i = 0; i < 8; ++i) {
    Vec w(3);
    for (int j = 0; j < 3; ++j) w(j) = rng.normal();
    w /= w.norm();
    grid.push_back(Classifier::from_full(w, 1, 1.0));
  }
  const auto table =
      e::grad_deviation(spec, {1000, 10000, 100000, 1000000}, 20, grid, 7);
  const double slope = v::estimate_sample_rate(table);
  report(7, slope >= -0.65 && slope <= -0.35,
         "concentration rate: fitted log-log slope " + fmt(slope) +
             " (in [-0.65,-0.35])");
}

// Criterion 8: exp-loss vs entropy-loss training on identical seeds.
void criterion_8() {
  double ratio_min = 1e300, ratio_max = 0.0;
  for (double tt = -10.0; tt <= 10.0 + 1e-12; tt += 0.05) {
    const double r = k::loss_ent(tt) / k::loss_exp(tt);
    ratio_min = std::min(ratio_min, r);
    ratio_max = std::max(ratio_max, r);
  }
  const bool ratio_ok = ratio_max / ratio_min <= 16.0;

  const auto cfg = toy_config(t::Variant::entropy_min);
  bool endpoints_ok = true;
  double worst_gap = 0.0, worst_w2 = 0.0;
  const std::vector<std::uint64_t> seeds = {21, 22, 23};
  std::vector<std::array<double, 4>> results(seeds.size());
  spurlab::io::parallel_for_jobs(
      static_cast<int>(seeds.size()), [&](int idx) {
        const std::uint64_t seed = seeds[idx];
        spurlab::config::ScenarioConfig c = cfg;
        c.seeds = {seed};
        // The exp-loss arm, with its trained source classifier.
        const auto base = x::run_toy_experiment(c, seed);
        // Entropy-loss arm: identical source classifier and batch schedule,
        // only the surrogate differs.
        d::ToySourceSpec tspec;
        tspec.gamma = base.gamma;
        tspec.corr_prob = c.corr_prob;
        tspec.d2 = c.d2;
        const d::GaussianTargetSpec target(base.gamma, 1.0,
                                           Mat::Identity(c.d2, c.d2));
        e::EmpiricalModel model([tspec, seed, n = c.n_samples](int step) {
          return d::sample_target_toy(
              tspec, n,
              seed * 0x9e3779b97f4a7c15ULL +
                  (1000 + static_cast<std::uint64_t>(step)));
        });
        model.set_accuracy_reference(target);
        model.set_surrogate(e::Surrogate::ent_loss);
        t::TrainerConfig tc = c.trainer;
        tc.seed = seed;
        const auto ent = t::run_entropy_min(base.source_classifier, tc, model);
        results[idx] = {base.final_accuracy, ent.back().accuracy,
                        base.trajectory.back().norm_w2, ent.back().norm_w2};
      });
  for (const auto& r : results) {
    const double gap = std::fabs(r[0] - r[1]);
    worst_gap = std::max(worst_gap, gap);
    worst_w2 = std::max(worst_w2, std::max(r[2], r[3]));
    endpoints_ok &= gap < 0.01 && r[2] < 0.02 && r[3] < 0.02;
  }
  report(8, ratio_ok && endpoints_ok,
         "surrogates: ratio spread " + fmt(ratio_max / ratio_min) +
             " (<=16: within a constant factor of [0.25,4]), worst acc gap " +
             fmt(worst_gap) + " (<0.01), worst final |w2| " + fmt(worst_w2) +
             " (<0.02)");
}

// Criterion 9: contraction chain for the separated Gaussian and the shifted
// cosine component, with positive measured margins.
void criterion_9() {
  const auto gauss = v::verify_loss_thresholds(
      d::LogConcaveComponent::gaussian(30.0, 1.0, 1.0),
      Classifier(Vec::Ones(1), Vec::Constant(1, 0.1), 1.1),
      Mat::Identity(1, 1));
  const auto cosy_comp = d::LogConcaveComponent::make(
      [](double x) { return -(x - 4.0) * (x - 4.0) + std::cos(x - 4.0); },
      [](double x) { return -2.0 * (x - 4.0) - std::sin(x - 4.0); },
      [](double x) { return -2.0 - std::cos(x - 4.0); }, 1.0, -6.0, 14.0);
  const auto cosy = v::verify_loss_thresholds(
      cosy_comp, Classifier(Vec::Ones(1), Vec::Constant(1, 0.1), 1.1),
      Mat::Identity(1, 1));

  const auto margin_of = [](const v::VerificationReport& rep,
                            const char* name) {
    for (const auto& w : rep.witnesses)
      if (w.point == name) return w.measured;
    return -1.0;
  };
  const double mg = margin_of(gauss, "derivative_bound: dLdsigma - bound");
  const double mc = margin_of(cosy, "derivative_bound: dLdsigma - bound");
  const bool ok = gauss.status == v::CheckStatus::passed &&
                  cosy.status == v::CheckStatus::passed && mg > 0.0 &&
                  mc > 0.0;
  report(9, ok,
         "threshold chain: gaussian " +
             std::string(v::to_string(gauss.status)) + " margin " + fmt(mg) +
             ", cosine " + v::to_string(cosy.status) + " margin " + fmt(mc));
}

// Criterion 10: byte-identical trajectory CSVs across two identical runs.
void criterion_10() {
  namespace fs = std::filesystem;
  auto cfg = toy_config(t::Variant::entropy_min);
  cfg.trainer.max_steps = 300;
  cfg.seeds = {9};
  const fs::path base = fs::temp_directory_path() / "spurlab_acceptance";
  fs::remove_all(base);
  bool ok = true;
  std::string first;
  for (int run = 0; run < 2; ++run) {
    cfg.out_dir = (base / ("run" + std::to_string(run))).string();
    ok &= x::cmd_simulate(cfg) == 0;
    std::ifstream is(fs::path(cfg.out_dir) / "trajectory_9.csv",
                     std::ios::binary);
    std::ostringstream buf;
    buf << is.rdbuf();
    if (run == 0)
      first = buf.str();
    else
      ok &= !first.empty() && first == buf.str();
  }
  fs::remove_all(base);
  report(10, ok,
         std::string("determinism: repeated run produced ") +
             (ok ? "byte-identical" : "DIFFERING") + " trajectory CSVs");
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  const auto dt = std::chrono::duration_cast<std::chrono::seconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
  std::printf("%s: %d/10 criteria passed (%llds)\n",
              failures == 0 ? "ACCEPTANCE OK" : "ACCEPTANCE FAILED",
              10 - failures, static_cast<long long>(dt));
  return failures == 0 ? 0 : 1;
}
