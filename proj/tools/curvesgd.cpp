// Command-line front end: run/sweep RunFiles, verify invariants, fit
// curvature, tabulate schedules.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "curvesgd/engine.hpp"
#include "curvesgd/objectives.hpp"
#include "curvesgd/omega.hpp"
#include "curvesgd/results.hpp"
#include "curvesgd/runfile.hpp"
#include "curvesgd/schedule.hpp"
#include "curvesgd/verify.hpp"

namespace fs = std::filesystem;
using namespace curvesgd;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> stride;
  std::optional<std::string> out;
};

struct Problem {
  std::shared_ptr<const Objective> objective;
  std::optional<ReferenceSolution> reference;
};

Problem build_problem(const RunFile& file, const fs::path& base_dir) {
  auto data = std::make_shared<const Dataset>(load_dataset(file.dataset, base_dir));
  auto obj = std::make_shared<const Objective>(Objective::make(file.loss, data).with_regularizer(file.objective, file.lambda));
  Problem p{obj, std::nullopt};
  const bool want = file.reference == ReferencePolicy::required ||
                    (file.reference == ReferencePolicy::automatic && obj->has_unique_minimizer());
  if (want) p.reference = solve_reference(*obj, 1e-10);
  return p;
}

int execute(const fs::path& runfile_path, const Overrides& ov, bool sweep) {
  RunFile file = load_runfile(runfile_path);
  if (ov.seed) file.seeds = {*ov.seed};
  if (ov.epochs) file.epochs = *ov.epochs;
  if (ov.stride) file.stride = *ov.stride;
  if (ov.out) file.output = *ov.out;
  if (!sweep && file.schedules.size() != 1) {
    std::cerr << "run: the run file lists " << file.schedules.size() << " schedules; use sweep\n";
    return 2;
  }

  const fs::path base_dir = runfile_path.parent_path();
  const Problem problem = build_problem(file, base_dir);
  const std::size_t n = problem.objective->component_count();
  const fs::path out_dir = file.output;

  std::vector<PlotCurve> curves;
  for (std::size_t k = 0; k < file.schedules.size(); ++k) {
    RunConfig config;
    config.objective = problem.objective;
    config.schedule = file.schedules[k];
    config.iterations = file.epochs * n;
    config.record_stride = file.stride * n;
    config.region_radius = file.region_radius;
    config.reference = problem.reference;
    config.record_epoch_values = true;
    const SweepResult result = multi_seed_sweep(config, file.seeds);

    const std::string run_id = sweep ? file.name + "_" + std::to_string(k) : file.name;
    const fs::path csv = out_dir / (run_id + ".csv");
    write_results(result_rows(run_id, result, n), csv);
    curves.push_back({csv, schedule_label(file.schedules[k])});

    std::size_t violations = 0;
    for (const auto& r : result.runs) violations += r.violations;
    std::printf("%s  %-40s  final smoothed F %.6g  region violations %zu  -> %s\n", run_id.c_str(),
                to_string(file.schedules[k]).c_str(), result.smoothed_epoch_F.back(), violations,
                csv.string().c_str());
  }
  if (sweep) {
    const fs::path script = out_dir / (file.name + ".gp");
    emit_plot_script(curves, script);
    std::printf("plot script -> %s\n", script.string().c_str());
  }
  return 0;
}

int verify(bool quick, std::uint64_t seed) {
  const auto results = run_verification({quick, seed});
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%s  %-38s %7.2fs  %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.seconds, r.detail.c_str());
    ok = ok && r.passed;
  }
  std::printf("%s\n", ok ? "all checks passed" : "some checks FAILED");
  return ok ? 0 : 1;
}

int schedule_table(const std::string& text, std::vector<double> ts) {
  const ScheduleSpec spec = parse_schedule(text);
  if (ts.empty()) ts = {0, 1, 10, 100, 1000, 10000};
  const bool paper = spec.kind == ScheduleKind::paper_optimal;
  std::printf("# %s\n", to_string(spec).c_str());
  if (paper) {
    std::printf("# Delta = %.17g\n", delta(spec));
    std::printf("%-12s %-24s %-24s %-24s %-24s\n", "t", "eta", "M", "C", "C_bar");
  } else {
    std::printf("%-12s %-24s\n", "t", "eta");
  }
  for (double t : ts) {
    if (!paper) {
      // iteration index t, as used by the SGD loop
      std::printf("%-12g %-24.17g\n", t, step_size(spec, t));
      continue;
    }
    const double C = C_of_t(spec, schedule_rate(spec), t);
    std::printf("%-12g %-24.17g %-24.17g %-24.17g %-24.17g\n", t, eta(spec, t), M_closed_form(spec, t), C,
                c_bar(spec, t));
  }
  return 0;
}

int estimate(const std::string& runfile, std::string dataset, std::optional<std::string> loss,
             std::optional<std::string> objective, std::optional<double> lambda, double radius, std::size_t samples,
             std::uint64_t seed) {
  RunFile file;
  fs::path base_dir;
  if (!runfile.empty()) {
    file = load_runfile(runfile);
    base_dir = fs::path(runfile).parent_path();
  }
  if (!dataset.empty()) file.dataset = dataset;
  if (loss) file.loss = parse_loss(*loss);
  if (objective) file.objective = parse_regularizer(*objective);
  if (lambda) file.lambda = *lambda;
  if (file.dataset.empty()) throw std::invalid_argument("estimate-curvature: no dataset given");
  file.reference = ReferencePolicy::required;
  const Problem p = build_problem(file, base_dir);
  const double h = fit_curvature(*p.objective, *p.reference, {radius, samples, seed});
  std::printf("h = %.6f\n", h);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curvature-aware SGD experiments"};
  app.require_subcommand(1);

  Overrides ov;
  std::string runfile;
  auto add_overrides = [&](CLI::App* sub) {
    sub->add_option("runfile", runfile, "run file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", ov.seed, "single seed instead of the file's list");
    sub->add_option("--epochs", ov.epochs, "number of epochs")->check(CLI::PositiveNumber);
    sub->add_option("--stride", ov.stride, "epochs between records")->check(CLI::PositiveNumber);
    sub->add_option("--out", ov.out, "output directory");
  };
  auto* run = app.add_subcommand("run", "execute a run file with one schedule");
  add_overrides(run);
  auto* sweep = app.add_subcommand("sweep", "execute every schedule of a run file and emit a plot script");
  add_overrides(sweep);

  bool quick = false;
  std::uint64_t verify_seed = 1;
  auto* ver = app.add_subcommand("verify", "run the invariant suite");
  ver->add_flag("--quick", quick, "smaller sample counts");
  ver->add_option("--seed", verify_seed, "seed for sampled checks");

  std::string dataset;
  std::optional<std::string> loss, objective;
  std::optional<double> lambda;
  double radius = 3.0;
  std::size_t samples = 100000;
  std::uint64_t est_seed = 1;
  std::string est_runfile;
  auto* est = app.add_subcommand("estimate-curvature", "fit the curvature h of an objective");
  est->add_option("runfile", est_runfile, "run file supplying dataset/loss/objective/lambda");
  est->add_option("--dataset", dataset, "synthetic:... or libsvm:<path>");
  est->add_option("--loss", loss, "logistic | least_squares | linear | zero");
  est->add_option("--objective", objective, "plain | norm2 | norm2_squared | exp_cosh_G");
  est->add_option("--lambda", lambda, "regularization weight");
  est->add_option("--radius", radius, "sampling box half-width around the minimizer");
  est->add_option("--samples", samples, "number of samples");
  est->add_option("--seed", est_seed, "sampling seed");
  est->add_flag("--quick", [&](std::int64_t) { samples = 20000; }, "use 2e4 samples");

  std::string spec_text;
  std::vector<double> ts;
  auto* sch = app.add_subcommand("schedule", "tabulate eta, M, C, C_bar for a schedule string");
  sch->add_option("spec", spec_text, "e.g. paper-opt:h=0.5,beta=1,L=2,r=inf")->required();
  sch->add_option("--t", ts, "evaluation points (repeatable)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return execute(runfile, ov, false);
    if (*sweep) return execute(runfile, ov, true);
    if (*ver) return verify(quick, verify_seed);
    if (*est) return estimate(est_runfile, dataset, loss, objective, lambda, radius, samples, est_seed);
    if (*sch) return schedule_table(spec_text, ts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
