#pragma once

// File formats:
//   functional CSV  id,s_1,...,s_T   (header carries the grid points)
//   scalar CSV      id,y,z_1,...,z_p
//   draws store     draws.csv, allocations.csv, latent_snapshots.csv
// Doubles are written in shortest round-trip form so a write/read cycle is
// exact.

#include "sofri/fda.hpp"
#include "sofri/model.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sofri {

std::string format_double(double value);
/// Throws NonNumericCell with the given location on failure.
double parse_double(std::string_view text, std::size_t row, std::size_t col);

/// Split one CSV line on commas (no quoting support); trims surrounding blanks.
std::vector<std::string> split_csv_line(std::string_view line);

FunctionalDataset read_functional_csv(const std::filesystem::path& path);
void write_functional_csv(const std::filesystem::path& path, const FunctionalDataset& data);

struct ScalarTable {
  std::vector<std::string> ids;
  Eigen::VectorXd y;
  Eigen::MatrixXd z;
  std::vector<std::string> z_names;
};

ScalarTable read_scalar_csv(const std::filesystem::path& path);
void write_scalar_csv(const std::filesystem::path& path, const ScalarTable& table);

/// Writes `content` to `path.partial` and renames it into place.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

void write_draws(const std::filesystem::path& dir, const PosteriorDraws& draws);
/// Reads the three draw files written by write_draws; the shape fields come
/// from the caller (typically the run manifest).
PosteriorDraws read_draws(const std::filesystem::path& dir, int n_obs, int n_basis,
                          int n_covariates, int x_components);

std::string draws_csv(const PosteriorDraws& draws);

}  // namespace sofri
