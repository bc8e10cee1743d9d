// sofri: measurement-error-corrected scalar-on-function regression.
//
//   sofri fit --config fit.toml [--seed N] [--out DIR]
//   sofri summarize --draws DIR [--level 0.9] [--out DIR]
//   sofri delta --w w.csv --m m.csv [--bandwidth H] --out delta.csv
//   sofri simulate --scenario scenario.toml [--reps N] --out report.json
//
// Failures print one JSON line on stderr and exit nonzero.

#include "sofri/app.hpp"
#include "sofri/error.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>

namespace fs = std::filesystem;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& flags, const std::string& out_help) {
  cmd->add_option("--config", flags.config, "TOML configuration file");
  cmd->add_option("--seed", flags.seed, "random seed (overrides the config)");
  cmd->add_option("--out", flags.out, out_help);
}

int cmd_fit(const CommonFlags& flags, const std::string& w, const std::string& m,
            const std::string& scalars) {
  if (flags.config.empty()) {
    throw sofri::Error(sofri::ErrorCode::InvalidConfig, "fit needs --config");
  }
  sofri::RunConfig cfg = sofri::load_run_config(flags.config);
  if (!w.empty()) cfg.w = w;
  if (!m.empty()) cfg.m = m;
  if (!scalars.empty()) cfg.scalars = scalars;
  if (flags.seed) cfg.mcmc.seed = *flags.seed;
  if (!flags.out.empty()) cfg.out = flags.out;
  const auto result = sofri::run_fit(cfg);
  std::cout << "wrote " << result.draws.draw_count() << " draws to " << cfg.out.string() << "\n";
  return 0;
}

int cmd_delta(const CommonFlags& flags, const std::string& w_path, const std::string& m_path,
              std::optional<double> bandwidth, const std::string& transform) {
  sofri::RunConfig cfg;
  if (!flags.config.empty()) cfg = sofri::load_run_config(flags.config);
  if (!w_path.empty()) cfg.w = w_path;
  if (!m_path.empty()) cfg.m = m_path;
  if (!transform.empty()) cfg.transform = sofri::parse_transform(transform);
  if (bandwidth) cfg.delta_bandwidth = *bandwidth;
  if (cfg.w.empty() || cfg.m.empty()) {
    throw sofri::Error(sofri::ErrorCode::InvalidConfig, "delta needs --w and --m");
  }
  sofri::FunctionalDataset w = sofri::read_functional_csv(cfg.w);
  sofri::FunctionalDataset m = sofri::read_functional_csv(cfg.m);
  if (!(w.grid == m.grid)) {
    throw sofri::Error(sofri::ErrorCode::GridMismatch, "W and M files have different grid headers");
  }
  m = sofri::align_rows(m, w.ids, cfg.m.filename().string());
  sofri::apply_transform(w, cfg.transform, cfg.w.filename().string());
  sofri::apply_transform(m, cfg.transform, cfg.m.filename().string());
  const double h =
      cfg.delta_bandwidth < 0.0 ? sofri::default_delta_bandwidth(w.grid) : cfg.delta_bandwidth;
  const auto estimate = sofri::estimate_delta(w, m, h);
  const std::string text = sofri::delta_csv(estimate);
  if (flags.out.empty()) {
    std::cout << text;
  } else {
    sofri::write_text_atomic(flags.out, text);
  }
  return 0;
}

int cmd_simulate(const CommonFlags& flags, const std::string& scenario_path,
                 std::optional<int> reps, const std::vector<std::string>& estimators,
                 unsigned threads, const std::string& data_dir, bool data_only) {
  const std::string path = scenario_path.empty() ? flags.config : scenario_path;
  sofri::StudyFile study;
  if (!path.empty()) study = sofri::load_study_file(path);
  if (reps) study.scenario.n_reps = *reps;
  if (flags.seed) study.scenario.seed = *flags.seed;
  study.settings.threads = threads;
  study.scenario.validate();
  if (!data_dir.empty()) sofri::write_replicate_data(data_dir, study.scenario, 0);
  if (data_only) return 0;
  const auto report = sofri::run_study(study.scenario, estimators, study.settings);
  const std::string text = sofri::study_report_json(report, study.settings);
  if (flags.out.empty()) {
    std::cout << text;
  } else {
    sofri::write_text_atomic(flags.out, text);
  }
  for (const auto& e : report.entries) {
    std::cerr << e.estimator << ": msie " << e.msie << " (se " << e.standard_error() << ")\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian scalar-on-function regression with instrument-based measurement-error "
               "correction"};
  app.set_version_flag("--version", sofri::version_string());
  app.require_subcommand(1);

  CommonFlags fit_flags;
  std::string fit_w, fit_m, fit_scalars;
  auto* fit = app.add_subcommand("fit", "fit the model to curve and scalar CSV files");
  add_common(fit, fit_flags, "output directory");
  fit->add_option("--w", fit_w, "error-prone curves (wide CSV)");
  fit->add_option("--m", fit_m, "instrument curves (wide CSV)");
  fit->add_option("--scalars", fit_scalars, "scalar CSV id,y,z_1,...");

  CommonFlags sum_flags;
  std::string draws_dir;
  std::optional<double> level;
  auto* summarize = app.add_subcommand("summarize", "summarize stored posterior draws");
  add_common(summarize, sum_flags, "output directory (default: the draws directory)");
  summarize->add_option("--draws", draws_dir, "directory written by `sofri fit`")->required();
  summarize->add_option("--level", level, "credible level in (0, 1)");

  CommonFlags delta_flags;
  std::string delta_w, delta_m, transform;
  std::optional<double> bandwidth;
  auto* delta = app.add_subcommand("delta", "estimate the instrument scaling function");
  add_common(delta, delta_flags, "output CSV (default: stdout)");
  delta->add_option("--w", delta_w, "error-prone curves (wide CSV)");
  delta->add_option("--m", delta_m, "instrument curves (wide CSV)");
  delta->add_option("--bandwidth", bandwidth, "Gaussian kernel bandwidth; 0 disables smoothing");
  delta->add_option("--transform", transform, "none or log2");

  CommonFlags sim_flags;
  std::string scenario;
  std::optional<int> reps;
  std::vector<std::string> estimators = sofri::kEstimatorIds;
  unsigned threads = 0;
  std::string data_dir;
  bool data_only = false;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo MSIE study on simulated data");
  add_common(simulate, sim_flags, "report JSON (default: stdout)");
  simulate->add_option("--scenario", scenario, "scenario TOML");
  simulate->add_option("--reps", reps, "number of replicates");
  simulate->add_option("--estimators", estimators, "bayes_iv and/or naive_w");
  simulate->add_option("--threads", threads, "worker threads (0: all cores)");
  simulate->add_option("--write-data", data_dir, "also write replicate 0 as CSV files here");
  simulate->add_flag("--data-only", data_only, "write the data and skip the study");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << R"({"error":"Usage","message":)" << nlohmann::json(e.what()).dump() << "}\n";
    return kExitUsage;
  }

  try {
    if (fit->parsed()) return cmd_fit(fit_flags, fit_w, fit_m, fit_scalars);
    if (summarize->parsed()) {
      const fs::path out = sum_flags.out.empty() ? fs::path(draws_dir) : fs::path(sum_flags.out);
      sofri::run_summarize(draws_dir, out, level);
      return 0;
    }
    if (delta->parsed()) return cmd_delta(delta_flags, delta_w, delta_m, bandwidth, transform);
    if (simulate->parsed()) {
      return cmd_simulate(sim_flags, scenario, reps, estimators, threads, data_dir, data_only);
    }
  } catch (const std::exception& e) {
    std::cerr << sofri::error_json(e) << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
