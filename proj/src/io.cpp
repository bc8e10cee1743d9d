#include "sofri/io.hpp"

#include "sofri/error.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace sofri {

namespace fs = std::filesystem;

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::size_t row, std::size_t col) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, value);
  if (text.empty() || res.ec != std::errc() || res.ptr != last) {
    throw Error(ErrorCode::NonNumericCell, "cell (row " + std::to_string(row) + ", column " +
                                               std::to_string(col) + ") is not numeric: '" +
                                               std::string(text) + "'");
  }
  return value;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t end = line.find(',', start);
    std::string_view cell = line.substr(start, end == std::string_view::npos ? line.npos : end - start);
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) {
      cell.remove_suffix(1);
    }
    out.emplace_back(cell);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

namespace {

std::vector<std::vector<std::string>> read_rows(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    rows.push_back(split_csv_line(line));
  }
  if (rows.empty()) throw Error(ErrorCode::MalformedCsv, path.string() + " is empty");
  return rows;
}

}  // namespace

FunctionalDataset read_functional_csv(const fs::path& path) {
  const auto rows = read_rows(path);
  const auto& header = rows.front();
  if (header.size() < 3 || header.front() != "id") {
    throw Error(ErrorCode::MalformedCsv,
                path.string() + ": header must be id,s_1,...,s_T with at least 2 points");
  }
  std::vector<double> points;
  for (std::size_t c = 1; c < header.size(); ++c) points.push_back(parse_double(header[c], 0, c));
  Grid grid(std::move(points));
  const auto T = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size() - 1), T);
  std::vector<std::string> ids;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size()) {
      throw Error(ErrorCode::MalformedCsv, path.string() + ": row " + std::to_string(r) +
                                               " has " + std::to_string(rows[r].size()) +
                                               " cells, expected " +
                                               std::to_string(header.size()));
    }
    ids.push_back(rows[r][0]);
    for (Eigen::Index t = 0; t < T; ++t) {
      values(static_cast<Eigen::Index>(r - 1), t) =
          parse_double(rows[r][static_cast<std::size_t>(t) + 1], r, static_cast<std::size_t>(t) + 1);
    }
  }
  return make_dataset(std::move(grid), std::move(values), std::move(ids));
}

void write_functional_csv(const fs::path& path, const FunctionalDataset& data) {
  std::ostringstream out;
  out << "id";
  for (const double s : data.grid.points()) out << ',' << format_double(s);
  out << '\n';
  for (Eigen::Index i = 0; i < data.values.rows(); ++i) {
    out << data.ids[static_cast<std::size_t>(i)];
    for (Eigen::Index t = 0; t < data.values.cols(); ++t) {
      out << ',' << format_double(data.values(i, t));
    }
    out << '\n';
  }
  write_text_atomic(path, out.str());
}

ScalarTable read_scalar_csv(const fs::path& path) {
  const auto rows = read_rows(path);
  const auto& header = rows.front();
  if (header.size() < 2 || header[0] != "id" || header[1] != "y") {
    throw Error(ErrorCode::MalformedCsv, path.string() + ": header must start with id,y");
  }
  ScalarTable table;
  const std::size_t p = header.size() - 2;
  table.z_names.assign(header.begin() + 2, header.end());
  const auto n = static_cast<Eigen::Index>(rows.size() - 1);
  table.y.resize(n);
  table.z.resize(n, static_cast<Eigen::Index>(p));
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size()) {
      throw Error(ErrorCode::MalformedCsv,
                  path.string() + ": row " + std::to_string(r) + " has the wrong cell count");
    }
    table.ids.push_back(rows[r][0]);
    const auto i = static_cast<Eigen::Index>(r - 1);
    table.y[i] = parse_double(rows[r][1], r, 1);
    for (std::size_t j = 0; j < p; ++j) {
      table.z(i, static_cast<Eigen::Index>(j)) = parse_double(rows[r][j + 2], r, j + 2);
    }
  }
  return table;
}

void write_scalar_csv(const fs::path& path, const ScalarTable& table) {
  std::ostringstream out;
  out << "id,y";
  for (const auto& name : table.z_names) out << ',' << name;
  out << '\n';
  for (Eigen::Index i = 0; i < table.y.size(); ++i) {
    out << table.ids[static_cast<std::size_t>(i)] << ',' << format_double(table.y[i]);
    for (Eigen::Index j = 0; j < table.z.cols(); ++j) out << ',' << format_double(table.z(i, j));
    out << '\n';
  }
  write_text_atomic(path, out.str());
}

void write_text_atomic(const fs::path& path, const std::string& content) {
  fs::path partial = path;
  partial += ".partial";
  {
    std::ofstream out(partial, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + partial.string());
    out << content;
    if (!out) throw Error(ErrorCode::Io, "write failed for " + partial.string());
  }
  std::error_code ec;
  fs::rename(partial, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot rename " + partial.string() + ": " + ec.message());
}

std::string draws_csv(const PosteriorDraws& draws) {
  std::ostringstream out;
  out << "chain,iteration,alpha0";
  for (int j = 0; j < draws.n_covariates; ++j) out << ",beta_z_" << j + 1;
  for (int k = 0; k < draws.n_basis; ++k) out << ",gamma_" << k + 1;
  out << ",tau\n";
  for (const auto& d : draws.draws) {
    out << d.chain << ',' << d.iteration << ',' << format_double(d.alpha0);
    for (Eigen::Index j = 0; j < d.beta_z.size(); ++j) out << ',' << format_double(d.beta_z[j]);
    for (Eigen::Index k = 0; k < d.gamma.size(); ++k) out << ',' << format_double(d.gamma[k]);
    out << ',' << format_double(d.tau) << '\n';
  }
  return out.str();
}

void write_draws(const fs::path& dir, const PosteriorDraws& draws) {
  fs::create_directories(dir);
  write_text_atomic(dir / "draws.csv", draws_csv(draws));

  std::ostringstream alloc;
  alloc << "chain,iteration";
  for (int i = 0; i < draws.n_obs; ++i) alloc << ",z_" << i + 1;
  alloc << '\n';
  for (const auto& d : draws.draws) {
    if (d.x_allocations.empty()) continue;
    alloc << d.chain << ',' << d.iteration;
    for (const int z : d.x_allocations) alloc << ',' << z + 1;
    alloc << '\n';
  }
  write_text_atomic(dir / "allocations.csv", alloc.str());

  std::ostringstream snap;
  snap << "chain,iteration,row";
  for (int k = 0; k < draws.n_basis; ++k) snap << ",x_" << k + 1;
  snap << '\n';
  for (const auto& s : draws.snapshots) {
    for (Eigen::Index i = 0; i < s.scores.rows(); ++i) {
      snap << s.chain << ',' << s.iteration << ',' << i + 1;
      for (Eigen::Index k = 0; k < s.scores.cols(); ++k) snap << ',' << format_double(s.scores(i, k));
      snap << '\n';
    }
  }
  write_text_atomic(dir / "latent_snapshots.csv", snap.str());
}

PosteriorDraws read_draws(const fs::path& dir, int n_obs, int n_basis, int n_covariates,
                          int x_components) {
  PosteriorDraws out;
  out.n_obs = n_obs;
  out.n_basis = n_basis;
  out.n_covariates = n_covariates;
  out.x_components = x_components;

  const auto rows = read_rows(dir / "draws.csv");
  const std::size_t width = 3 + static_cast<std::size_t>(n_covariates + n_basis) + 1;
  if (rows.front().size() != width) {
    throw Error(ErrorCode::MalformedCsv, "draws.csv header does not match the run manifest");
  }
  std::map<std::pair<int, int>, std::size_t> index;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != width) throw Error(ErrorCode::MalformedCsv, "draws.csv row width mismatch");
    Draw d;
    d.chain = static_cast<int>(parse_double(row[0], r, 0));
    d.iteration = static_cast<int>(parse_double(row[1], r, 1));
    d.alpha0 = parse_double(row[2], r, 2);
    d.beta_z.resize(n_covariates);
    for (int j = 0; j < n_covariates; ++j) d.beta_z[j] = parse_double(row[3 + j], r, 3 + j);
    d.gamma.resize(n_basis);
    for (int k = 0; k < n_basis; ++k) {
      d.gamma[k] = parse_double(row[3 + n_covariates + k], r, 3 + n_covariates + k);
    }
    d.tau = parse_double(row[width - 1], r, width - 1);
    index[{d.chain, d.iteration}] = out.draws.size();
    out.draws.push_back(std::move(d));
  }

  if (fs::exists(dir / "allocations.csv")) {
    const auto alloc = read_rows(dir / "allocations.csv");
    for (std::size_t r = 1; r < alloc.size(); ++r) {
      const auto& row = alloc[r];
      if (row.size() != 2 + static_cast<std::size_t>(n_obs)) {
        throw Error(ErrorCode::MalformedCsv, "allocations.csv row width mismatch");
      }
      const int chain = static_cast<int>(parse_double(row[0], r, 0));
      const int iter = static_cast<int>(parse_double(row[1], r, 1));
      const auto it = index.find({chain, iter});
      if (it == index.end()) {
        throw Error(ErrorCode::MalformedCsv, "allocations.csv refers to an unknown draw");
      }
      auto& z = out.draws[it->second].x_allocations;
      z.resize(static_cast<std::size_t>(n_obs));
      for (int i = 0; i < n_obs; ++i) {
        z[static_cast<std::size_t>(i)] =
            static_cast<int>(parse_double(row[2 + static_cast<std::size_t>(i)], r, 2 + i)) - 1;
      }
    }
  }

  if (fs::exists(dir / "latent_snapshots.csv")) {
    const auto snap = read_rows(dir / "latent_snapshots.csv");
    for (std::size_t r = 1; r < snap.size(); ++r) {
      const auto& row = snap[r];
      if (row.size() != 3 + static_cast<std::size_t>(n_basis)) {
        throw Error(ErrorCode::MalformedCsv, "latent_snapshots.csv row width mismatch");
      }
      const int chain = static_cast<int>(parse_double(row[0], r, 0));
      const int iter = static_cast<int>(parse_double(row[1], r, 1));
      const int obs = static_cast<int>(parse_double(row[2], r, 2)) - 1;
      if (out.snapshots.empty() || out.snapshots.back().chain != chain ||
          out.snapshots.back().iteration != iter) {
        out.snapshots.push_back({chain, iter, Eigen::MatrixXd::Zero(n_obs, n_basis)});
      }
      if (obs < 0 || obs >= n_obs) throw Error(ErrorCode::MalformedCsv, "snapshot row out of range");
      for (int k = 0; k < n_basis; ++k) {
        out.snapshots.back().scores(obs, k) = parse_double(row[3 + k], r, 3 + k);
      }
    }
  }
  return out;
}

}  // namespace sofri
