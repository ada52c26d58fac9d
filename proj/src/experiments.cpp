#include "spurlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "spurlab/io.hpp"
#include "spurlab/kernels.hpp"
#include "spurlab/rng.hpp"
#include "spurlab/svg.hpp"
#include "spurlab/verify.hpp"

namespace spurlab::experiments {

using engine::Classifier;
using engine::Vec;
using json = nlohmann::ordered_json;

namespace {

namespace fs = std::filesystem;

Vec random_direction(int d, CounterRng& rng) {
  Vec v(d);
  double norm = 0.0;
  do {
    for (int i = 0; i < d; ++i) v(i) = rng.normal();
    norm = v.norm();
  } while (norm < 1e-12);
  return v / norm;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  return seed * 0x9e3779b97f4a7c15ULL + salt;
}

dist::ToySourceSpec toy_spec(const config::ScenarioConfig& cfg,
                             std::uint64_t seed) {
  CounterRng rng(seed, /*stream=*/31);
  dist::ToySourceSpec spec;
  spec.gamma = cfg.gamma_radius * random_direction(cfg.d1, rng);
  spec.corr_prob = cfg.corr_prob;
  spec.d2 = cfg.d2;
  return spec;
}

dist::GaussianTargetSpec toy_target_spec(const dist::ToySourceSpec& spec) {
  return dist::GaussianTargetSpec(
      spec.gamma, 1.0, engine::Mat::Identity(spec.d2, spec.d2));
}

std::string render_trajectory_csv(const trainer::Trajectory& traj) {
  std::ostringstream os;
  traj.write_csv(os);
  return os.str();
}

svg::Chart trajectory_chart(const std::string& title, const std::string& ylab,
                            const std::vector<trainer::Trajectory>& trajs,
                            const std::vector<std::uint64_t>& seeds,
                            bool accuracy) {
  static const char* kColors[] = {"#1f6fb2", "#c23b22", "#2e8b57",
                                  "#8a2be2", "#b8860b", "#444444"};
  svg::Chart chart;
  chart.title = title;
  chart.x_label = "step";
  chart.y_label = ylab;
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    svg::Series s;
    s.label = "seed " + std::to_string(seeds[i]);
    s.color = kColors[i % 6];
    for (const auto& r : trajs[i].records) {
      s.x.push_back(r.step);
      s.y.push_back(accuracy ? r.accuracy : r.norm_w2);
    }
    chart.series.push_back(std::move(s));
  }
  return chart;
}

}  // namespace

Classifier train_source_classifier(const dist::SampleBatch& source, double R,
                                   double eta, int max_steps) {
  const int d1 = source.d1(), d2 = source.d2();
  Classifier w(Vec::Zero(d1), Vec::Zero(d2), R);
  for (int t = 0; t < max_steps; ++t) {
    const Vec g = engine::labeled_empirical_grad(w, source, source.y);

    // Projected first-order optimality at the current iterate: on the ball
    // boundary only the tangential part (plus any inward radial part) counts.
    double stat = g.norm();
    if (w.norm() >= R - 1e-12) {
      const Vec unit = w.full() / w.norm();
      const double radial = g.dot(unit);
      if (radial < 0.0) stat = (g - radial * unit).norm();
    }
    if (stat < 1e-8) break;

    Vec moved = w.full() - eta * g;
    if (moved.norm() > R) moved *= R / moved.norm();
    w = Classifier::from_full(moved, d1, R);
  }
  return w;
}

ToyRunResult run_toy_experiment(const config::ScenarioConfig& cfg,
                                std::uint64_t seed) {
  ToyRunResult out;
  const auto spec = toy_spec(cfg, seed);
  out.gamma = spec.gamma;
  const auto target = toy_target_spec(spec);
  out.bayes = dist::bayes_accuracy(target);

  const auto source =
      dist::sample_source_toy(spec, cfg.n_samples, derive_seed(seed, 1));
  out.source_classifier = train_source_classifier(source, cfg.trainer.R);
  out.source_target_accuracy =
      engine::population_accuracy_gaussian(out.source_classifier, target);

  trainer::TrainerConfig tc = cfg.trainer;
  tc.seed = seed;

  std::unique_ptr<engine::LossModel> model;
  if (tc.gradient_source == trainer::GradientSource::population) {
    model = std::make_unique<engine::PopulationGaussianModel>(target);
  } else {
    auto empirical = std::make_unique<engine::EmpiricalModel>(
        [spec, seed, n = cfg.n_samples](int step) {
          return dist::sample_target_toy(
              spec, n, derive_seed(seed, 1000 + static_cast<std::uint64_t>(step)));
        });
    empirical->set_accuracy_reference(target);
    model = std::move(empirical);
  }
  if (cfg.eta_auto) tc.eta = trainer::default_eta(*model, tc.R, seed);

  out.trajectory = trainer::run(out.source_classifier, tc, *model);
  out.final_accuracy = out.trajectory.back().accuracy;
  const auto& final_w = out.trajectory.iterates.back();
  out.final_max_abs_w2 = final_w.w2.cwiseAbs().maxCoeff();
  return out;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

int cmd_simulate(const config::ScenarioConfig& cfg) {
  if (cfg.trainer.variant == trainer::Variant::pseudo_rounds &&
      cfg.trainer.gradient_source == trainer::GradientSource::population)
    throw config::ConfigError(
        "simulate: pseudo_rounds needs gradient_source = empirical");
  const fs::path out_dir(cfg.out_dir);
  const int n_seeds = static_cast<int>(cfg.seeds.size());
  std::vector<ToyRunResult> results(n_seeds);

  if (cfg.kind == "toy_gaussian") {
    io::parallel_for_jobs(n_seeds, [&](int i) {
      results[i] = run_toy_experiment(cfg, cfg.seeds[i]);
    });
  } else {
    // Plain Gaussian target: initialize from a seeded separated classifier
    // instead of a trained source model.
    io::parallel_for_jobs(n_seeds, [&](int i) {
      const std::uint64_t seed = cfg.seeds[i];
      Vec gamma = Vec::Zero(cfg.d1);
      gamma(0) = cfg.gamma_scalar;
      dist::GaussianTargetSpec target(
          gamma, cfg.sigma1,
          cfg.sigma2_scale * engine::Mat::Identity(cfg.d2, cfg.d2));
      CounterRng rng(seed, 32);
      Vec w0(cfg.d1 + cfg.d2);
      w0.setZero();
      w0(0) = 0.7 + 0.1 * rng.uniform();
      for (int j = cfg.d1; j < cfg.d1 + cfg.d2; ++j) w0(j) = rng.normal();
      w0.tail(cfg.d2) *=
          std::sqrt(1.0 - w0(0) * w0(0)) / w0.tail(cfg.d2).norm();
      w0 *= cfg.trainer.R;

      trainer::TrainerConfig tc = cfg.trainer;
      tc.seed = seed;
      ToyRunResult& r = results[i];
      r.gamma = gamma;
      r.bayes = dist::bayes_accuracy(target);
      r.source_classifier = Classifier::from_full(w0, cfg.d1, tc.R);
      r.source_target_accuracy =
          engine::population_accuracy_gaussian(r.source_classifier, target);

      std::unique_ptr<engine::LossModel> model;
      if (tc.gradient_source == trainer::GradientSource::population) {
        model = std::make_unique<engine::PopulationGaussianModel>(target);
      } else {
        auto empirical = std::make_unique<engine::EmpiricalModel>(
            [target, seed, n = cfg.n_samples](int step) {
              return dist::sample_target(
                  target, n,
                  derive_seed(seed, 1000 + static_cast<std::uint64_t>(step)));
            });
        empirical->set_accuracy_reference(target);
        model = std::move(empirical);
      }
      if (cfg.eta_auto) tc.eta = trainer::default_eta(*model, tc.R, seed);
      r.trajectory = trainer::run(r.source_classifier, tc, *model);
      r.final_accuracy = r.trajectory.back().accuracy;
      r.final_max_abs_w2 =
          r.trajectory.iterates.back().w2.cwiseAbs().maxCoeff();
    });
  }

  json summary;
  summary["command"] = "simulate";
  summary["kind"] = cfg.kind;
  summary["runs"] = json::array();
  std::vector<trainer::Trajectory> trajs;
  for (int i = 0; i < n_seeds; ++i) {
    const auto& r = results[i];
    io::atomic_write_text(
        out_dir / ("trajectory_" + std::to_string(cfg.seeds[i]) + ".csv"),
        render_trajectory_csv(r.trajectory));
    json run;
    run["seed"] = cfg.seeds[i];
    run["gamma_norm"] = r.gamma.norm();
    run["bayes_accuracy"] = r.bayes;
    run["initial_accuracy"] = r.source_target_accuracy;
    run["final_accuracy"] = r.final_accuracy;
    run["initial_norm_w2"] = r.trajectory.records.front().norm_w2;
    run["final_norm_w2"] = r.trajectory.back().norm_w2;
    run["initial_max_abs_w2"] =
        r.trajectory.iterates.front().w2.cwiseAbs().maxCoeff();
    run["final_max_abs_w2"] = r.final_max_abs_w2;
    run["steps"] = r.trajectory.steps();
    summary["runs"].push_back(std::move(run));
    trajs.push_back(r.trajectory);
  }
  io::atomic_write_text(out_dir / "summary.json", summary.dump(2) + "\n");
  io::atomic_write_text(
      out_dir / "report.svg",
      svg::render({trajectory_chart("target accuracy", "accuracy", trajs,
                                    cfg.seeds, true),
                   trajectory_chart("spurious weight norm", "|w2|", trajs,
                                    cfg.seeds, false)}));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

int cmd_verify(const std::string& selector, const std::string& out_dir) {
  std::vector<std::string> suites;
  if (selector == "all")
    suites = {"kernels", "lemmas", "examples", "finite-sample"};
  else if (selector == "kernels" || selector == "lemmas" ||
           selector == "examples" || selector == "finite-sample")
    suites = {selector};
  else
    throw config::ConfigError("verify: unknown suite selector: " + selector +
                              " (want all|kernels|lemmas|examples|finite-sample)");

  std::vector<verify::VerificationReport> reports;
  for (const auto& s : suites) {
    std::vector<verify::VerificationReport> part;
    if (s == "kernels")
      part = verify::run_kernel_suite();
    else if (s == "lemmas")
      part = verify::run_lemma_suite();
    else if (s == "examples")
      part = verify::run_example_suite();
    else
      part = verify::run_finite_sample_suite();
    reports.insert(reports.end(), part.begin(), part.end());
  }
  std::sort(reports.begin(), reports.end(),
            [](const auto& a, const auto& b) {
              return a.check_name < b.check_name;
            });

  const fs::path dir(out_dir);
  std::ostringstream summary;
  summary << "name,status,worst_witness,tolerance\n";
  bool all_ok = true;
  for (const auto& rep : reports) {
    summary << rep.summary_line() << "\n";
    all_ok &= rep.passed();
    io::atomic_write(dir / ("check_" + rep.check_name + ".csv"),
                     [&](std::ostream& os) {
                       os << "point,measured,required\n";
                       for (const auto& w : rep.witnesses) {
                         std::string p = w.point;
                         std::replace(p.begin(), p.end(), ',', ';');
                         os << p << ',' << w.measured << ',' << w.required
                            << "\n";
                       }
                     });
    std::cout << rep.check_name << ": " << verify::to_string(rep.status)
              << "\n";
  }
  io::atomic_write_text(dir / "verify_summary.csv", summary.str());
  return all_ok ? kExitOk : kExitCheckFailure;
}

// ---------------------------------------------------------------------------
// surrogate-compare
// ---------------------------------------------------------------------------

int cmd_surrogate_compare(const config::ScenarioConfig& cfg) {
  const fs::path out_dir(cfg.out_dir);

  // Pointwise surrogate ratio table on |t| <= 10.
  double ratio_min = std::numeric_limits<double>::infinity();
  double ratio_max = 0.0;
  std::ostringstream table;
  table << "t,loss_ent,loss_exp,ratio\n";
  for (double t = -10.0; t <= 10.0 + 1e-12; t += 0.05) {
    const double le = kernels::loss_ent(t);
    const double lx = kernels::loss_exp(t);
    const double ratio = le / lx;
    ratio_min = std::min(ratio_min, ratio);
    ratio_max = std::max(ratio_max, ratio);
    char line[128];
    std::snprintf(line, sizeof(line), "%.6g,%.17g,%.17g,%.17g\n", t, le, lx,
                  ratio);
    table << line;
  }
  io::atomic_write_text(out_dir / "ratio_table.csv", table.str());
  // "Within a constant factor": some c places ratio/c inside [1/4, 4].
  const double spread = ratio_max / ratio_min;
  const bool ratio_bounded = spread <= 16.0;

  json summary;
  summary["command"] = "surrogate-compare";
  summary["ratio_min"] = ratio_min;
  summary["ratio_max"] = ratio_max;
  summary["ratio_spread"] = spread;
  summary["ratio_within_constant_factor"] = ratio_bounded;
  summary["runs"] = json::array();

  bool endpoints_ok = ratio_bounded;
  for (std::uint64_t seed : cfg.seeds) {
    const auto spec = toy_spec(cfg, seed);
    const auto target = toy_target_spec(spec);
    const auto source =
        dist::sample_source_toy(spec, cfg.n_samples, derive_seed(seed, 1));
    const Classifier ws = train_source_classifier(source, cfg.trainer.R);

    trainer::TrainerConfig tc = cfg.trainer;
    tc.seed = seed;
    std::map<std::string, trainer::Trajectory> pair;
    for (const auto& which : {engine::Surrogate::exp_loss,
                              engine::Surrogate::ent_loss}) {
      engine::EmpiricalModel model([spec, seed, n = cfg.n_samples](int step) {
        return dist::sample_target_toy(
            spec, n, derive_seed(seed, 1000 + static_cast<std::uint64_t>(step)));
      });
      model.set_accuracy_reference(target);
      model.set_surrogate(which);
      const char* name =
          which == engine::Surrogate::exp_loss ? "exp" : "ent";
      pair[name] = trainer::run_entropy_min(ws, tc, model);
      io::atomic_write_text(out_dir / ("trajectory_" + std::string(name) +
                                       "_" + std::to_string(seed) + ".csv"),
                            render_trajectory_csv(pair[name]));
    }
    const auto& te = pair["exp"];
    const auto& tn = pair["ent"];
    json run;
    run["seed"] = seed;
    run["final_accuracy_exp"] = te.back().accuracy;
    run["final_accuracy_ent"] = tn.back().accuracy;
    run["final_norm_w2_exp"] = te.back().norm_w2;
    run["final_norm_w2_ent"] = tn.back().norm_w2;
    run["accuracy_gap"] =
        std::fabs(te.back().accuracy - tn.back().accuracy);
    summary["runs"].push_back(std::move(run));
    endpoints_ok &= te.back().norm_w2 < 0.02 && tn.back().norm_w2 < 0.02 &&
                    std::fabs(te.back().accuracy - tn.back().accuracy) < 0.01;
  }
  summary["endpoints_match"] = endpoints_ok;
  io::atomic_write_text(out_dir / "summary.json", summary.dump(2) + "\n");
  return endpoints_ok ? kExitOk : kExitCheckFailure;
}

// ---------------------------------------------------------------------------
// concentration
// ---------------------------------------------------------------------------

int cmd_concentration(const config::ScenarioConfig& cfg) {
  if (cfg.n_list.size() < 4)
    throw config::ConfigError(
        "concentration: need at least 4 sample sizes to fit a slope");
  const fs::path out_dir(cfg.out_dir);
  const std::uint64_t seed = cfg.seeds.front();

  Vec gamma = Vec::Zero(cfg.d1);
  gamma(0) = cfg.gamma_scalar;
  dist::GaussianTargetSpec spec(
      gamma, cfg.sigma1,
      cfg.sigma2_scale * engine::Mat::Identity(cfg.d2, cfg.d2));

  CounterRng rng(seed, 33);
  std::vector<Classifier> grid;
  for (int k = 0; k < cfg.w_grid_size; ++k) {
    Vec w(cfg.d1 + cfg.d2);
    for (int i = 0; i < w.size(); ++i) w(i) = rng.normal();
    w *= cfg.trainer.R / w.norm();
    grid.push_back(Classifier::from_full(w, cfg.d1, cfg.trainer.R));
  }

  const auto table =
      engine::grad_deviation(spec, cfg.n_list, cfg.trials, grid, seed);
  io::atomic_write(out_dir / "deviation.csv", [&](std::ostream& os) {
    os << "n,trial,sup_dev\n";
    for (const auto& row : table) {
      char line[96];
      std::snprintf(line, sizeof(line), "%d,%d,%.17g\n", row.n, row.trial,
                    row.sup_dev);
      os << line;
    }
  });

  const double slope = verify::estimate_sample_rate(table);

  // Per-n medians for the plot plus spread (trial band width).
  svg::Chart chart;
  chart.title = "sup gradient deviation vs n (fitted slope " +
                std::to_string(slope).substr(0, 6) + ")";
  chart.x_label = "n";
  chart.y_label = "sup deviation";
  chart.log_x = true;
  chart.log_y = true;
  svg::Series med;
  med.label = "median over trials";
  json bands = json::array();
  for (int n : cfg.n_list) {
    std::vector<double> devs;
    for (const auto& row : table)
      if (row.n == n) devs.push_back(row.sup_dev);
    std::sort(devs.begin(), devs.end());
    med.x.push_back(n);
    med.y.push_back(devs[devs.size() / 2]);
    json b;
    b["n"] = n;
    b["band_width"] = devs.back() - devs.front();
    bands.push_back(std::move(b));
  }
  chart.series.push_back(std::move(med));
  io::atomic_write_text(out_dir / "report.svg", svg::render({chart}));

  json summary;
  summary["command"] = "concentration";
  summary["slope"] = slope;
  summary["slope_in_band"] = slope >= -0.65 && slope <= -0.35;
  summary["trial_bands"] = std::move(bands);
  io::atomic_write_text(out_dir / "summary.json", summary.dump(2) + "\n");
  return (slope >= -0.65 && slope <= -0.35) ? kExitOk : kExitCheckFailure;
}

}  // namespace spurlab::experiments
