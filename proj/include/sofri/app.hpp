#pragma once

// Command implementations behind the `sofri` executable: configuration
// files, data ingestion and the fit / summarize / delta / simulate pipelines.
// Everything here is callable in-process; the executable only parses flags.

#include "sofri/delta.hpp"
#include "sofri/fda.hpp"
#include "sofri/io.hpp"
#include "sofri/model.hpp"
#include "sofri/posterior.hpp"
#include "sofri/simulate.hpp"

#include <array>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sofri {

std::string version_string();

enum class Transform { None, Log2 };
Transform parse_transform(const std::string& name);
std::string to_string(Transform t);

struct RunConfig {
  std::filesystem::path w;
  std::filesystem::path m;
  std::filesystem::path scalars;
  std::filesystem::path out = "sofri_out";
  Transform transform = Transform::None;
  double delta_bandwidth = -1.0;  // < 0: twice the grid spacing
  int basis_size = kDefaultBasisSize;
  int degree = 3;
  McmcConfig mcmc;
  double level = 0.9;
  std::array<int, 2> contrast{1, 2};

  /// Throws InvalidConfig.
  void validate() const;
};

/// Sections: [data] w, m, scalars, transform; [delta] bandwidth;
/// [basis] size, degree; [mcmc] (see apply_mcmc_table); [summary] level,
/// contrast; [output] dir. Relative paths resolve against the file's folder.
/// Unknown keys are rejected. Throws InvalidConfig, Io.
RunConfig load_run_config(const std::filesystem::path& path);

/// Scenario keys at top level (n, n_grid, sigma_x, ..., true_beta,
/// error_dist, two_groups) plus delta_bandwidth; optional [mcmc] and
/// [basis] tables configure the fits of a study.
struct StudyFile {
  Scenario scenario;
  StudySettings settings;
};
StudyFile load_study_file(const std::filesystem::path& path);

struct IngestedData {
  FunctionalDataset w;
  FunctionalDataset m;
  ScalarTable scalars;
};

/// Reads the three CSV files, aligns curve rows to the scalar file's order
/// and applies the transform. Throws IdMismatch, MalformedCsv,
/// NonNumericCell, GridMismatch, DomainError.
IngestedData ingest(const RunConfig& config);

/// Reorders `data` rows to follow `ids`; every id must appear exactly once.
FunctionalDataset align_rows(const FunctionalDataset& data, const std::vector<std::string>& ids,
                             const std::string& label);

void apply_transform(FunctionalDataset& data, Transform transform, const std::string& label);

struct SummaryOptions {
  double level = 0.9;
  std::array<int, 2> contrast{1, 2};
};

/// Writes beta_summary.csv and scalars.csv, plus clusters.csv,
/// cluster_means.csv and contrast.json when allocation snapshots exist.
void write_summaries(const std::filesystem::path& dir, const PosteriorDraws& draws,
                     const BasisSystem& basis, const std::vector<std::string>& ids,
                     const SummaryOptions& options);

struct FitOutcome {
  DeltaEstimate delta;
  BasisSystem basis;
  PosteriorDraws draws;
};

/// delta -> scale -> basis -> project -> chains -> summaries, written to
/// config.out together with manifest.json and delta.csv.
FitOutcome run_fit(const RunConfig& config);

/// Re-summarizes a stored fit using its manifest.json; writes into `out`.
void run_summarize(const std::filesystem::path& draws_dir, const std::filesystem::path& out,
                   std::optional<double> level);

/// s,raw,smoothed
std::string delta_csv(const DeltaEstimate& delta);

/// MSIE report as JSON text (scenario, settings, entries with per-replicate
/// contributions).
std::string study_report_json(const MsieReport& report, const StudySettings& settings);

/// Writes replicate `rep` of a scenario (w.csv, m.csv, x.csv, scalars.csv,
/// truth.csv) using the same random streams as run_study.
void write_replicate_data(const std::filesystem::path& dir, const Scenario& scenario, int rep);

/// {"error":"<code>","message":"..."} on one line.
std::string error_json(const std::exception& e);

}  // namespace sofri
