#include "sofri/app.hpp"

#include "sofri/error.hpp"

#include <json.hpp>
#include <toml.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace sofri {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string version_string() { return "sofri " SOFRI_VERSION; }

Transform parse_transform(const std::string& name) {
  if (name == "none") return Transform::None;
  if (name == "log2") return Transform::Log2;
  throw Error(ErrorCode::InvalidConfig, "unknown transform '" + name + "' (none, log2)");
}

std::string to_string(Transform t) { return t == Transform::Log2 ? "log2" : "none"; }

void RunConfig::validate() const {
  if (w.empty() || m.empty() || scalars.empty()) {
    throw Error(ErrorCode::InvalidConfig, "data paths w, m and scalars are required");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "summary level must lie in (0, 1)");
  }
  if (basis_size < degree + 1 || degree < 0) {
    throw Error(ErrorCode::InvalidK, "basis size must exceed the spline degree");
  }
  if (contrast[0] < 1 || contrast[1] < 1) {
    throw Error(ErrorCode::InvalidConfig, "contrast clusters are 1-based labels");
  }
  mcmc.validate();
}

// ------------------------------------------------------------------ config

namespace {

toml::table parse_toml(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::Io, "config file not found: " + path.string());
  try {
    return toml::parse_file(path.string());
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << path.string() << ":" << e.source().begin.line << ": " << e.description();
    throw Error(ErrorCode::InvalidConfig, msg.str());
  }
}

// Typed access to one TOML table that remembers which keys were consumed so
// leftovers can be reported as typos.
class Section {
 public:
  Section(const toml::table* table, std::string name) : table_(table), name_(std::move(name)) {}

  template <typename T>
  void read(const char* key, T& out) {
    if (table_ == nullptr) return;
    const toml::node* node = table_->get(key);
    if (node == nullptr) return;
    used_.insert(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (auto v = node->value<bool>()) {
        out = *v;
        return;
      }
    } else if constexpr (std::is_integral_v<T>) {
      if (auto v = node->value<std::int64_t>()) {
        if (*v < 0 && std::is_unsigned_v<T>) fail(key, "a nonnegative integer");
        out = static_cast<T>(*v);
        return;
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (auto v = node->value<double>()) {
        out = *v;
        return;
      }
    } else {
      if (auto v = node->value<std::string>()) {
        out = *v;
        return;
      }
    }
    fail(key, "a value of the expected type");
  }

  void read_path(const char* key, fs::path& out, const fs::path& base) {
    std::string text;
    read(key, text);
    if (!text.empty()) {
      const fs::path p(text);
      out = p.is_absolute() ? p : base / p;
    }
  }

  const toml::table* child(const char* key) {
    if (table_ == nullptr) return nullptr;
    const toml::node* node = table_->get(key);
    if (node == nullptr) return nullptr;
    used_.insert(key);
    if (!node->is_table()) fail(key, "a table");
    return node->as_table();
  }

  const toml::array* array(const char* key) {
    if (table_ == nullptr) return nullptr;
    const toml::node* node = table_->get(key);
    if (node == nullptr) return nullptr;
    used_.insert(key);
    if (!node->is_array()) fail(key, "an array");
    return node->as_array();
  }

  void finish() const {
    if (table_ == nullptr) return;
    for (const auto& [key, value] : *table_) {
      if (!used_.contains(std::string(key.str()))) {
        throw Error(ErrorCode::InvalidConfig,
                    "unknown key '" + std::string(key.str()) + "' in " + name_);
      }
    }
  }

 private:
  [[noreturn]] void fail(const char* key, const char* what) const {
    throw Error(ErrorCode::InvalidConfig, name_ + "." + key + " must be " + what);
  }

  const toml::table* table_;
  std::string name_;
  std::set<std::string> used_;
};

void read_mixture(Section& parent, const char* key, MixtureSettings& mix,
                  MvPriorSettings* mv_prior, NigParams* nig_prior) {
  Section s(parent.child(key), std::string("[mcmc.") + key + "]");
  s.read("components", mix.components);
  s.read("concentration", mix.concentration);
  if (mv_prior != nullptr) {
    s.read("kappa0", mv_prior->kappa0);
    s.read("dof_offset", mv_prior->dof_offset);
    s.read("scale", mv_prior->scale);
  }
  if (nig_prior != nullptr) {
    s.read("prior_mean", nig_prior->mean);
    s.read("prior_kappa", nig_prior->kappa);
    s.read("prior_shape", nig_prior->shape);
    s.read("prior_rate", nig_prior->rate);
  }
  s.finish();
}

void read_mcmc(const toml::table* table, McmcConfig& cfg) {
  Section s(table, "[mcmc]");
  s.read("n_iter", cfg.n_iter);
  s.read("burn_in", cfg.burn_in);
  s.read("thin", cfg.thin);
  s.read("seed", cfg.seed);
  s.read("n_chains", cfg.n_chains);
  s.read("snapshot_factor", cfg.snapshot_factor);
  s.read("keep_allocations", cfg.keep_allocations);
  s.read("tau_shape", cfg.tau_shape);
  s.read("tau_scale", cfg.tau_scale);
  read_mixture(s, "eps", cfg.eps, nullptr, &cfg.eps_prior);
  read_mixture(s, "u", cfg.u, &cfg.u_prior, nullptr);
  read_mixture(s, "omega", cfg.omega, &cfg.omega_prior, nullptr);
  read_mixture(s, "x", cfg.x, &cfg.x_prior, nullptr);
  s.finish();
}

json mcmc_json(const McmcConfig& c) {
  auto mv = [](const MixtureSettings& m, const MvPriorSettings& p) {
    return json{{"components", m.components}, {"concentration", m.concentration},
                {"kappa0", p.kappa0},         {"dof_offset", p.dof_offset},
                {"scale", p.scale}};
  };
  return json{{"n_iter", c.n_iter},
              {"burn_in", c.burn_in},
              {"thin", c.thin},
              {"seed", c.seed},
              {"n_chains", c.n_chains},
              {"snapshot_factor", c.snapshot_factor},
              {"keep_allocations", c.keep_allocations},
              {"tau_shape", c.tau_shape},
              {"tau_scale", c.tau_scale},
              {"eps",
               {{"components", c.eps.components},
                {"concentration", c.eps.concentration},
                {"prior_mean", c.eps_prior.mean},
                {"prior_kappa", c.eps_prior.kappa},
                {"prior_shape", c.eps_prior.shape},
                {"prior_rate", c.eps_prior.rate}}},
              {"u", mv(c.u, c.u_prior)},
              {"omega", mv(c.omega, c.omega_prior)},
              {"x", mv(c.x, c.x_prior)}};
}

json scenario_json(const Scenario& s) {
  return json{{"n", s.n},
              {"n_grid", s.n_grid},
              {"sigma_x", s.sigma_x},
              {"sigma_u", s.sigma_u},
              {"sigma_omega", s.sigma_omega},
              {"sigma_e", s.sigma_e},
              {"rho_x", s.rho_x},
              {"rho_u", s.rho_u},
              {"rho_omega", s.rho_omega},
              {"delta", s.delta},
              {"n_covariates", s.n_covariates},
              {"n_reps", s.n_reps},
              {"seed", s.seed},
              {"true_beta", to_string(s.true_beta)},
              {"error_dist", to_string(s.error_dist)},
              {"two_groups", s.two_groups}};
}

}  // namespace

RunConfig load_run_config(const fs::path& path) {
  const toml::table root = parse_toml(path);
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  RunConfig cfg;
  Section top(&root, "config");
  {
    Section s(top.child("data"), "[data]");
    s.read_path("w", cfg.w, base);
    s.read_path("m", cfg.m, base);
    s.read_path("scalars", cfg.scalars, base);
    std::string transform = "none";
    s.read("transform", transform);
    cfg.transform = parse_transform(transform);
    s.finish();
  }
  {
    Section s(top.child("delta"), "[delta]");
    s.read("bandwidth", cfg.delta_bandwidth);
    s.finish();
  }
  {
    Section s(top.child("basis"), "[basis]");
    s.read("size", cfg.basis_size);
    s.read("degree", cfg.degree);
    s.finish();
  }
  read_mcmc(top.child("mcmc"), cfg.mcmc);
  {
    Section s(top.child("summary"), "[summary]");
    s.read("level", cfg.level);
    if (const toml::array* pair = s.array("contrast")) {
      if (pair->size() != 2 || !pair->is_homogeneous<std::int64_t>()) {
        throw Error(ErrorCode::InvalidConfig, "[summary].contrast must be two cluster labels");
      }
      cfg.contrast = {static_cast<int>(*pair->get(0)->value<std::int64_t>()),
                      static_cast<int>(*pair->get(1)->value<std::int64_t>())};
    }
    s.finish();
  }
  {
    Section s(top.child("output"), "[output]");
    s.read_path("dir", cfg.out, base);
    s.finish();
  }
  top.finish();
  return cfg;
}

StudyFile load_study_file(const fs::path& path) {
  const toml::table root = parse_toml(path);
  StudyFile f;
  Scenario& sc = f.scenario;
  Section s(&root, "scenario");
  s.read("n", sc.n);
  s.read("n_grid", sc.n_grid);
  s.read("sigma_x", sc.sigma_x);
  s.read("sigma_u", sc.sigma_u);
  s.read("sigma_omega", sc.sigma_omega);
  s.read("sigma_e", sc.sigma_e);
  s.read("rho_x", sc.rho_x);
  s.read("rho_u", sc.rho_u);
  s.read("rho_omega", sc.rho_omega);
  s.read("delta", sc.delta);
  s.read("n_covariates", sc.n_covariates);
  s.read("n_reps", sc.n_reps);
  s.read("seed", sc.seed);
  s.read("two_groups", sc.two_groups);
  std::string name;
  s.read("true_beta", name);
  if (!name.empty()) sc.true_beta = parse_true_beta(name);
  name.clear();
  s.read("error_dist", name);
  if (!name.empty()) sc.error_dist = parse_error_dist(name);

  read_mcmc(s.child("mcmc"), f.settings.mcmc);
  {
    Section b(s.child("basis"), "[basis]");
    b.read("size", f.settings.basis_size);
    b.read("degree", f.settings.degree);
    b.finish();
  }
  s.read("delta_bandwidth", f.settings.delta_bandwidth);
  s.finish();
  return f;
}

// ------------------------------------------------------------------ ingest

FunctionalDataset align_rows(const FunctionalDataset& data, const std::vector<std::string>& ids,
                             const std::string& label) {
  std::unordered_map<std::string, Eigen::Index> row_of;
  for (std::size_t i = 0; i < data.ids.size(); ++i) {
    if (!row_of.emplace(data.ids[i], static_cast<Eigen::Index>(i)).second) {
      throw Error(ErrorCode::IdMismatch, "id '" + data.ids[i] + "' appears twice in " + label);
    }
  }
  FunctionalDataset out;
  out.grid = data.grid;
  out.values.resize(static_cast<Eigen::Index>(ids.size()), data.values.cols());
  out.ids = ids;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto it = row_of.find(ids[i]);
    if (it == row_of.end()) {
      throw Error(ErrorCode::IdMismatch, "id '" + ids[i] + "' is missing from " + label);
    }
    if (!seen.insert(ids[i]).second) {
      throw Error(ErrorCode::IdMismatch, "id '" + ids[i] + "' appears twice in the scalar file");
    }
    out.values.row(static_cast<Eigen::Index>(i)) = data.values.row(it->second);
  }
  if (data.ids.size() != ids.size()) {
    for (const auto& id : data.ids) {
      if (!seen.contains(id)) {
        throw Error(ErrorCode::IdMismatch,
                    "id '" + id + "' from " + label + " is missing from the scalar file");
      }
    }
  }
  return out;
}

void apply_transform(FunctionalDataset& data, Transform transform, const std::string& label) {
  if (transform == Transform::None) return;
  for (Eigen::Index i = 0; i < data.values.rows(); ++i) {
    for (Eigen::Index t = 0; t < data.values.cols(); ++t) {
      const double v = data.values(i, t);
      if (!(v > 0.0)) {
        std::ostringstream msg;
        msg << "log2 of non-positive value " << v << " in " << label << " (id '"
            << data.ids[static_cast<std::size_t>(i)] << "', column " << t + 2 << ")";
        throw Error(ErrorCode::DomainError, msg.str());
      }
      data.values(i, t) = std::log2(v);
    }
  }
}

IngestedData ingest(const RunConfig& config) {
  IngestedData d;
  d.scalars = read_scalar_csv(config.scalars);
  const FunctionalDataset w = read_functional_csv(config.w);
  const FunctionalDataset m = read_functional_csv(config.m);
  if (!(w.grid == m.grid)) {
    throw Error(ErrorCode::GridMismatch, "W and M files have different grid headers");
  }
  d.w = align_rows(w, d.scalars.ids, config.w.filename().string());
  d.m = align_rows(m, d.scalars.ids, config.m.filename().string());
  apply_transform(d.w, config.transform, config.w.filename().string());
  apply_transform(d.m, config.transform, config.m.filename().string());
  return d;
}

// --------------------------------------------------------------- summaries

namespace {

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string line;
  for (const auto& c : cells) {
    if (!line.empty()) line += ',';
    line += c;
  }
  return line + '\n';
}

}  // namespace

void write_summaries(const fs::path& dir, const PosteriorDraws& draws, const BasisSystem& basis,
                     const std::vector<std::string>& ids, const SummaryOptions& options) {
  const FunctionalSummary beta = summarize_beta(draws, basis, options.level);
  std::string text = "s,mean,lower,upper\n";
  for (Eigen::Index t = 0; t < beta.mean.size(); ++t) {
    text += csv_row({format_double(basis.grid[static_cast<std::size_t>(t)]),
                     format_double(beta.mean[t]), format_double(beta.lower[t]),
                     format_double(beta.upper[t])});
  }
  write_text_atomic(dir / "beta_summary.csv", text);

  text = "name,mean,lower,upper\n";
  for (const auto& s : summarize_scalars(draws, options.level)) {
    text += csv_row({s.name, format_double(s.mean), format_double(s.lower), format_double(s.upper)});
  }
  write_text_atomic(dir / "scalars.csv", text);

  if (draws.snapshots.empty() || draws.draws.front().x_allocations.empty()) return;

  const ClusterResult clusters = extract_clusters(draws, basis);
  text = "id,label\n";
  for (std::size_t i = 0; i < clusters.labels.size(); ++i) {
    text += csv_row({i < ids.size() ? ids[i] : std::to_string(i + 1),
                     std::to_string(clusters.labels[i])});
  }
  write_text_atomic(dir / "clusters.csv", text);

  text = "label,size";
  for (std::size_t t = 0; t < basis.grid.size(); ++t) text += "," + format_double(basis.grid[t]);
  text += '\n';
  for (int c = 0; c < clusters.n_clusters; ++c) {
    text += std::to_string(c + 1) + "," + std::to_string(clusters.sizes[c]);
    for (Eigen::Index t = 0; t < clusters.cluster_mean_curves.cols(); ++t) {
      text += "," + format_double(clusters.cluster_mean_curves(c, t));
    }
    text += '\n';
  }
  write_text_atomic(dir / "cluster_means.csv", text);

  std::vector<int> sizes = clusters.sizes;
  sizes.resize(static_cast<std::size_t>(std::max(clusters.truncation, clusters.n_clusters)), 0);
  json contrast{{"level", options.level},
                {"n_clusters", clusters.n_clusters},
                {"sizes", sizes},
                {"cluster_a", options.contrast[0]},
                {"cluster_b", options.contrast[1]}};
  const int top = std::max(options.contrast[0], options.contrast[1]);
  if (top <= clusters.n_clusters) {
    const ContrastSummary c = cluster_contrast(draws, clusters, options.contrast[0],
                                               options.contrast[1], basis, options.level);
    contrast["mean"] = c.mean;
    contrast["lower"] = c.lower;
    contrast["upper"] = c.upper;
  } else {
    contrast["mean"] = nullptr;
    contrast["lower"] = nullptr;
    contrast["upper"] = nullptr;
    contrast["note"] = "requested cluster is not among the " +
                       std::to_string(clusters.n_clusters) + " recovered clusters";
  }
  write_text_atomic(dir / "contrast.json", contrast.dump(2) + "\n");
}

std::string delta_csv(const DeltaEstimate& delta) {
  std::string text = "s,raw,smoothed\n";
  for (Eigen::Index t = 0; t < delta.raw.size(); ++t) {
    text += csv_row({format_double(delta.grid[static_cast<std::size_t>(t)]),
                     format_double(delta.raw[t]), format_double(delta.smoothed[t])});
  }
  return text;
}

// --------------------------------------------------------------------- fit

FitOutcome run_fit(const RunConfig& config) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  const IngestedData data = ingest(config);

  const double bandwidth =
      config.delta_bandwidth < 0.0 ? default_delta_bandwidth(data.w.grid) : config.delta_bandwidth;
  FitOutcome out;
  out.delta = estimate_delta(data.w, data.m, bandwidth);
  const FunctionalDataset m_star = scale_instrument(data.m, out.delta);
  out.basis = build_bspline_basis(data.w.grid, config.basis_size, config.degree);

  ModelInputs inputs;
  inputs.y = data.scalars.y;
  inputs.z = data.scalars.z;
  inputs.w_scores = project(data.w, out.basis).scores;
  inputs.m_scores = project(m_star, out.basis).scores;
  inputs.basis = out.basis;
  inputs.validate();

  out.draws = run_chains(inputs, config.mcmc, FitMode::Corrected);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  fs::create_directories(config.out);
  write_text_atomic(config.out / "delta.csv", delta_csv(out.delta));
  write_draws(config.out, out.draws);

  json manifest{{"version", version_string()},
                {"command", "fit"},
                {"seed", config.mcmc.seed},
                {"data",
                 {{"w", config.w.string()},
                  {"m", config.m.string()},
                  {"scalars", config.scalars.string()},
                  {"transform", to_string(config.transform)}}},
                {"delta", {{"bandwidth", bandwidth}, {"smoother", "gaussian"}}},
                {"basis", {{"size", config.basis_size}, {"degree", config.degree}}},
                {"mcmc", mcmc_json(config.mcmc)},
                {"summary", {{"level", config.level}, {"contrast", config.contrast}}},
                {"shape",
                 {{"n_obs", out.draws.n_obs},
                  {"n_basis", out.draws.n_basis},
                  {"n_covariates", out.draws.n_covariates},
                  {"x_components", out.draws.x_components},
                  {"draws", out.draws.draw_count()},
                  {"snapshots", out.draws.snapshots.size()}}},
                {"z_names", data.scalars.z_names},
                {"grid", data.w.grid.points()},
                {"ids", data.scalars.ids},
                {"elapsed_seconds", seconds}};
  write_text_atomic(config.out / "manifest.json", manifest.dump(2) + "\n");

  write_summaries(config.out, out.draws, out.basis, data.scalars.ids,
                  {config.level, config.contrast});
  return out;
}

void run_summarize(const fs::path& draws_dir, const fs::path& out, std::optional<double> level) {
  const fs::path manifest_path = draws_dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + manifest_path.string());
  json manifest;
  try {
    manifest = json::parse(in);
    const auto& shape = manifest.at("shape");
    const Grid grid(manifest.at("grid").get<std::vector<double>>());
    const BasisSystem basis =
        build_bspline_basis(grid, manifest.at("basis").at("size").get<int>(),
                            manifest.at("basis").at("degree").get<int>());
    const PosteriorDraws draws =
        read_draws(draws_dir, shape.at("n_obs").get<int>(), shape.at("n_basis").get<int>(),
                   shape.at("n_covariates").get<int>(), shape.at("x_components").get<int>());
    SummaryOptions options;
    options.level = level.value_or(manifest.at("summary").at("level").get<double>());
    options.contrast = manifest.at("summary").at("contrast").get<std::array<int, 2>>();
    fs::create_directories(out);
    write_summaries(out, draws, basis, manifest.at("ids").get<std::vector<std::string>>(),
                    options);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedCsv,
                "run manifest " + manifest_path.string() + " is invalid: " + e.what());
  }
}

// ---------------------------------------------------------------- simulate

std::string study_report_json(const MsieReport& report, const StudySettings& settings) {
  json entries = json::array();
  for (const auto& e : report.entries) {
    entries.push_back({{"estimator", e.estimator},
                       {"abias2", e.abias2},
                       {"avar", e.avar},
                       {"msie", e.msie},
                       {"standard_error", e.standard_error()},
                       {"n_reps", e.n_reps},
                       {"per_rep_ise", e.per_rep}});
  }
  json doc{{"version", version_string()},
           {"scenario", scenario_json(report.scenario)},
           {"settings",
            {{"basis_size", settings.basis_size},
             {"degree", settings.degree},
             {"delta_bandwidth", settings.delta_bandwidth},
             {"mcmc", mcmc_json(settings.mcmc)}}},
           {"entries", entries}};
  return doc.dump(2) + "\n";
}

void write_replicate_data(const fs::path& dir, const Scenario& scenario, int rep) {
  scenario.validate();
  Rng rng = Rng(scenario.seed).derive(static_cast<std::uint64_t>(rep)).derive(0);
  const SimulatedDataset data = simulate_dataset(scenario, rep, rng);
  fs::create_directories(dir);
  write_functional_csv(dir / "w.csv", data.w);
  write_functional_csv(dir / "m.csv", data.m);
  write_functional_csv(dir / "x.csv", data.x);
  ScalarTable table;
  table.ids = data.w.ids;
  table.y = data.y;
  table.z = data.z;
  for (Eigen::Index j = 0; j < data.z.cols(); ++j) table.z_names.push_back("z_" + std::to_string(j + 1));
  write_scalar_csv(dir / "scalars.csv", table);
  std::string text = "s,beta,delta\n";
  for (Eigen::Index t = 0; t < data.beta_true.size(); ++t) {
    text += csv_row({format_double(data.w.grid[static_cast<std::size_t>(t)]),
                     format_double(data.beta_true[t]), format_double(data.delta_true[t])});
  }
  write_text_atomic(dir / "truth.csv", text);
  if (scenario.two_groups) {
    text = "id,group\n";
    for (std::size_t i = 0; i < data.group.size(); ++i) {
      text += csv_row({data.w.ids[i], std::to_string(data.group[i] + 1)});
    }
    write_text_atomic(dir / "groups.csv", text);
  }
}

std::string error_json(const std::exception& e) {
  json doc;
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    doc["error"] = std::string(to_string(err->code()));
  } else {
    doc["error"] = "Internal";
  }
  doc["message"] = e.what();
  return doc.dump();
}

}  // namespace sofri
