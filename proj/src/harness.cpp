#include "specsim/harness.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "specsim/rng.hpp"
#include "specsim/svg.hpp"

namespace specsim {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string resolve_output_dir(const std::string& dir) {
  fs::path p(dir);
  if (p.is_absolute()) return p.string();
  const char* root = std::getenv("SPECSIM_OUT_ROOT");
  return (fs::path(root ? root : ".") / p).string();
}

// ---- config (de)serialization -------------------------------------------------

namespace {

[[noreturn]] void bad_field(const std::string& section, const std::string& field,
                            const std::string& what) {
  throw std::invalid_argument("config: field '" + (section.empty() ? field : section + "." + field) +
                              "' " + what);
}

void reject_unknown(const json& j, const std::string& section,
                    std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }) == allowed.end())
      bad_field(section, key, "is not recognized");
  }
}

template <typename T>
void read(const json& j, const std::string& section, const char* field, T& target) {
  if (!j.contains(field)) return;
  try {
    target = j.at(field).get<T>();
  } catch (const json::exception&) {
    bad_field(section, field, "has the wrong type");
  }
}

json kernel_to_json(const KernelSpec& k) {
  return json{{"half_width", k.half_width},
              {"capacity_kind", k.capacity_kind},
              {"sigma_k", k.sigma_k},
              {"capacity_scale", k.capacity_scale},
              {"capacity_peak", k.capacity_peak},
              {"capacity_halfwidth", k.capacity_halfwidth},
              {"capacity_table", k.capacity_table},
              {"cooperation_kind", k.cooperation_kind},
              {"b", k.b},
              {"m", k.m},
              {"cooperation_value", k.cooperation_value},
              {"competition_kind", k.competition_kind},
              {"sigma_c", k.sigma_c},
              {"competition_halfwidth", k.competition_halfwidth},
              {"competition_value", k.competition_value}};
}

KernelSpec kernel_from_json(const json& j) {
  reject_unknown(j, "kernel",
                 {"half_width", "capacity_kind", "sigma_k", "capacity_scale", "capacity_peak",
                  "capacity_halfwidth", "capacity_table", "cooperation_kind", "b", "m",
                  "cooperation_value", "competition_kind", "sigma_c", "competition_halfwidth",
                  "competition_value"});
  KernelSpec k;
  read(j, "kernel", "half_width", k.half_width);
  read(j, "kernel", "capacity_kind", k.capacity_kind);
  read(j, "kernel", "sigma_k", k.sigma_k);
  read(j, "kernel", "capacity_scale", k.capacity_scale);
  read(j, "kernel", "capacity_peak", k.capacity_peak);
  read(j, "kernel", "capacity_halfwidth", k.capacity_halfwidth);
  read(j, "kernel", "capacity_table", k.capacity_table);
  read(j, "kernel", "cooperation_kind", k.cooperation_kind);
  read(j, "kernel", "b", k.b);
  read(j, "kernel", "m", k.m);
  read(j, "kernel", "cooperation_value", k.cooperation_value);
  read(j, "kernel", "competition_kind", k.competition_kind);
  read(j, "kernel", "sigma_c", k.sigma_c);
  read(j, "kernel", "competition_halfwidth", k.competition_halfwidth);
  read(j, "kernel", "competition_value", k.competition_value);
  return k;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  reject_unknown(j, "",
                 {"model", "seed", "replicas", "horizon", "snapshots", "snapshot_interval",
                  "output_dir", "kernel", "moran", "dd", "conditioned", "ode", "landscape",
                  "bounds", "mcmc", "mu_grid", "criterion"});

  ExperimentConfig c;
  read(j, "", "model", c.model);
  read(j, "", "seed", c.seed);
  read(j, "", "replicas", c.replicas);
  read(j, "", "horizon", c.horizon);
  read(j, "", "snapshots", c.snapshot_times);
  read(j, "", "snapshot_interval", c.snapshot_interval);
  read(j, "", "output_dir", c.output_dir);
  read(j, "", "mu_grid", c.mu_grid);
  if (j.contains("kernel")) c.kernel = kernel_from_json(j.at("kernel"));
  if (j.contains("moran")) {
    const json& s = j.at("moran");
    reject_unknown(s, "moran", {"sigma", "mu", "population", "initial_site"});
    read(s, "moran", "sigma", c.moran.sigma);
    read(s, "moran", "mu", c.moran.mu);
    read(s, "moran", "population", c.moran.population);
    read(s, "moran", "initial_site", c.moran.initial_site);
  }
  if (j.contains("dd")) {
    const json& s = j.at("dd");
    reject_unknown(s, "dd",
                   {"sigma_k", "sigma_c", "capacity_scale", "birth_rate", "death_scale",
                    "mutation_prob", "mutation_std", "x_hat", "initial_site", "initial_count"});
    read(s, "dd", "sigma_k", c.dd.sigma_k);
    read(s, "dd", "sigma_c", c.dd.sigma_c);
    read(s, "dd", "capacity_scale", c.dd.capacity_scale);
    read(s, "dd", "birth_rate", c.dd.birth_rate);
    read(s, "dd", "death_scale", c.dd.death_scale);
    read(s, "dd", "mutation_prob", c.dd.mutation_prob);
    read(s, "dd", "mutation_std", c.dd.mutation_std);
    read(s, "dd", "x_hat", c.dd.x_hat);
    read(s, "dd", "initial_site", c.dd.initial_site);
    read(s, "dd", "initial_count", c.dd.initial_count);
  }
  if (j.contains("conditioned")) {
    const json& s = j.at("conditioned");
    reject_unknown(s, "conditioned",
                   {"fitness", "mutation", "tol", "max_iter", "snapshot_every", "init_eps",
                    "initial_site", "population"});
    read(s, "conditioned", "fitness", c.conditioned.fitness);
    read(s, "conditioned", "mutation", c.conditioned.mutation);
    read(s, "conditioned", "tol", c.conditioned.tol);
    read(s, "conditioned", "max_iter", c.conditioned.max_iter);
    read(s, "conditioned", "snapshot_every", c.conditioned.snapshot_every);
    read(s, "conditioned", "init_eps", c.conditioned.init_eps);
    read(s, "conditioned", "initial_site", c.conditioned.initial_site);
    read(s, "conditioned", "population", c.conditioned.population);
  }
  if (j.contains("ode")) {
    const json& s = j.at("ode");
    reject_unknown(s, "ode", {"variant", "init_eps"});
    read(s, "ode", "variant", c.ode.variant);
    read(s, "ode", "init_eps", c.ode.init_eps);
  }
  if (j.contains("landscape")) {
    const json& s = j.at("landscape");
    reject_unknown(s, "landscape", {"n_starts", "tol"});
    read(s, "landscape", "n_starts", c.landscape.n_starts);
    read(s, "landscape", "tol", c.landscape.tol);
  }
  if (j.contains("bounds")) {
    const json& s = j.at("bounds");
    reject_unknown(s, "bounds", {"n", "epsilon"});
    read(s, "bounds", "n", c.bounds.n);
    read(s, "bounds", "epsilon", c.bounds.epsilon);
  }
  if (j.contains("mcmc")) {
    const json& s = j.at("mcmc");
    reject_unknown(s, "mcmc", {"n_samples", "n_chains", "burn_in", "proposal_scale"});
    read(s, "mcmc", "n_samples", c.mcmc.n_samples);
    read(s, "mcmc", "n_chains", c.mcmc.n_chains);
    read(s, "mcmc", "burn_in", c.mcmc.burn_in);
    read(s, "mcmc", "proposal_scale", c.mcmc.proposal_scale);
  }
  if (j.contains("criterion")) {
    const json& s = j.at("criterion");
    reject_unknown(s, "criterion",
                   {"smooth_window", "min_mode_separation", "min_mode_mass", "mode_mass_radius",
                    "valley_ratio"});
    read(s, "criterion", "smooth_window", c.criterion.smooth_window);
    read(s, "criterion", "min_mode_separation", c.criterion.min_mode_separation);
    read(s, "criterion", "min_mode_mass", c.criterion.min_mode_mass);
    read(s, "criterion", "mode_mass_radius", c.criterion.mode_mass_radius);
    read(s, "criterion", "valley_ratio", c.criterion.valley_ratio);
  }
  return c;
}

std::string ExperimentConfig::to_json_text() const {
  json j{{"model", model},
         {"seed", seed},
         {"replicas", replicas},
         {"horizon", horizon},
         {"snapshots", snapshot_times},
         {"snapshot_interval", snapshot_interval},
         {"output_dir", output_dir},
         {"mu_grid", mu_grid},
         {"kernel", kernel_to_json(kernel)},
         {"moran",
          {{"sigma", moran.sigma},
           {"mu", moran.mu},
           {"population", moran.population},
           {"initial_site", moran.initial_site}}},
         {"dd",
          {{"sigma_k", dd.sigma_k},
           {"sigma_c", dd.sigma_c},
           {"capacity_scale", dd.capacity_scale},
           {"birth_rate", dd.birth_rate},
           {"death_scale", dd.death_scale},
           {"mutation_prob", dd.mutation_prob},
           {"mutation_std", dd.mutation_std},
           {"x_hat", dd.x_hat},
           {"initial_site", dd.initial_site},
           {"initial_count", dd.initial_count}}},
         {"conditioned",
          {{"fitness", conditioned.fitness},
           {"mutation", conditioned.mutation},
           {"tol", conditioned.tol},
           {"max_iter", conditioned.max_iter},
           {"snapshot_every", conditioned.snapshot_every},
           {"init_eps", conditioned.init_eps},
           {"initial_site", conditioned.initial_site},
           {"population", conditioned.population}}},
         {"ode", {{"variant", ode.variant}, {"init_eps", ode.init_eps}}},
         {"landscape", {{"n_starts", landscape.n_starts}, {"tol", landscape.tol}}},
         {"bounds", {{"n", bounds.n}, {"epsilon", bounds.epsilon}}},
         {"mcmc",
          {{"n_samples", mcmc.n_samples},
           {"n_chains", mcmc.n_chains},
           {"burn_in", mcmc.burn_in},
           {"proposal_scale", mcmc.proposal_scale}}},
         {"criterion",
          {{"smooth_window", criterion.smooth_window},
           {"min_mode_separation", criterion.min_mode_separation},
           {"min_mode_mass", criterion.min_mode_mass},
           {"mode_mass_radius", criterion.mode_mass_radius},
           {"valley_ratio", criterion.valley_ratio}}}};
  return j.dump(2);
}

std::string ExperimentConfig::hash() const {
  // the hash identifies the experiment, not where its artifacts land, so the
  // same config run into two directories produces identical file contents
  ExperimentConfig keyed = *this;
  keyed.output_dir.clear();
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(keyed.to_json_text())));
  return buf;
}

void ExperimentConfig::validate() const {
  static const char* kModels[] = {"dd_original", "conditioned_dd", "moran",       "ode",
                                  "landscape",   "mcmc",           "bifurcation", "speciation_sweep"};
  if (std::find_if(std::begin(kModels), std::end(kModels),
                   [&](const char* m) { return model == m; }) == std::end(kModels))
    bad_field("", "model", "must be one of dd_original, conditioned_dd, moran, ode, landscape, "
                           "mcmc, bifurcation, speciation_sweep");
  if (replicas < 1) bad_field("", "replicas", "must be >= 1");
  if (horizon < 0.0) bad_field("", "horizon", "must be >= 0");
  if (snapshot_interval < 0.0) bad_field("", "snapshot_interval", "must be >= 0");
  build_kernels(kernel);  // throws named diagnostics itself
  if (model == "moran" || model == "ode" || model == "landscape" || model == "mcmc" ||
      model == "bifurcation" || model == "speciation_sweep")
    model_params().validate();
  if (model == "conditioned_dd" && conditioned.fitness != "W1" && conditioned.fitness != "W2")
    bad_field("conditioned", "fitness", "must be W1 or W2");
  if (model == "ode" && ode.variant != "eq6" && ode.variant != "eq7" && ode.variant != "eq9")
    bad_field("ode", "variant", "must be eq6, eq7 or eq9");
  if ((model == "bifurcation" || model == "speciation_sweep") && mu_grid.size() < 2)
    bad_field("", "mu_grid", "needs at least two entries");
}

ModelParams ExperimentConfig::model_params() const {
  return ModelParams{moran.sigma, moran.mu, moran.population};
}

KernelSet ExperimentConfig::kernels() const { return build_kernels(kernel); }

std::vector<double> ExperimentConfig::snapshot_schedule() const {
  if (!snapshot_times.empty()) return snapshot_times;
  std::vector<double> out;
  if (snapshot_interval > 0.0)
    for (double t = snapshot_interval; t <= horizon; t += snapshot_interval) out.push_back(t);
  return out;
}

// ---- output plumbing -----------------------------------------------------------

namespace {

class CsvFile {
 public:
  CsvFile(const fs::path& path, const ExperimentConfig& cfg,
          const std::vector<std::string>& columns)
      : out_(path) {
    if (!out_) throw std::runtime_error("cannot open " + path.string());
    out_ << "# config_hash=" << cfg.hash() << "\n";
    out_ << "# seed=" << cfg.seed << "\n";
    out_ << "# criterion_version=" << cfg.criterion.version << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
      out_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
  }

  void comment(const std::string& line) { out_ << "# " << line << "\n"; }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i)
      out_ << fields[i] << (i + 1 < fields.size() ? "," : "\n");
  }

 private:
  std::ofstream out_;
};

std::string fmt(double v) { return format_double(v); }
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(long long v) { return std::to_string(v); }
std::string fmt(std::uint64_t v) { return std::to_string(v); }

void write_trajectory_csv(const fs::path& path, const ExperimentConfig& cfg,
                          const RunRecord& record, const PhenotypeSpace& space,
                          bool with_counts) {
  std::vector<std::string> cols =
      with_counts ? std::vector<std::string>{"time", "x", "count", "frequency"}
                  : std::vector<std::string>{"t", "x", "frequency"};
  CsvFile csv(path, cfg, cols);
  for (std::size_t s = 0; s < record.snapshots.size(); ++s) {
    const auto& snap = record.snapshots[s];
    for (int i = 0; i < space.size(); ++i) {
      const double f = snap.frequency[static_cast<std::size_t>(i)];
      if (with_counts) {
        const double total = s < record.snapshot_totals.size() ? record.snapshot_totals[s] : 0.0;
        csv.row({fmt(snap.time), fmt(space.site(i)), fmt(f * total), fmt(f)});
      } else {
        csv.row({fmt(snap.time), fmt(space.site(i)), fmt(f)});
      }
    }
  }
}

void write_trajectory_heatmap(const fs::path& path, const RunRecord& record,
                              const PhenotypeSpace& space, const std::string& title,
                              bool timestamp) {
  std::vector<double> times, sites, values;
  for (const auto& snap : record.snapshots) times.push_back(snap.time);
  for (int i = 0; i < space.size(); ++i) sites.push_back(space.site(i));
  for (const auto& snap : record.snapshots)
    values.insert(values.end(), snap.frequency.begin(), snap.frequency.end());
  SvgOptions opt;
  opt.timestamp = timestamp;
  opt.title = title;
  write_svg_heatmap(path.string(), times, sites, values, opt);
}

std::optional<double> detect_speciation(const RunRecord& record,
                                        const SpeciationCriterion& crit) {
  return speciation_time(record.snapshots, crit);
}

struct ReplicaStatus {
  int replica = 0;
  std::string status;  // ok | failed
  std::uint64_t events = 0;
  std::string error;
};

void write_run_summary(const fs::path& dir, const ExperimentConfig& cfg,
                       const std::vector<ReplicaStatus>& statuses) {
  CsvFile csv(dir / "run_summary.csv", cfg, {"replica", "status", "events", "error"});
  for (const auto& s : statuses) csv.row({fmt(s.replica), s.status, fmt(s.events), s.error});
}

// ---- per-model drivers --------------------------------------------------------

void run_dd_experiment(const ExperimentConfig& cfg, const fs::path& dir, bool timestamp,
                       ExperimentOutcome& outcome) {
  const PhenotypeSpace space(cfg.kernel.half_width);
  DDParams params;
  params.space = space;
  params.sigma_k = cfg.dd.sigma_k;
  params.sigma_c = cfg.dd.sigma_c;
  params.capacity_scale = cfg.dd.capacity_scale;
  params.birth_rate = cfg.dd.birth_rate;
  params.death_scale = cfg.dd.death_scale;
  params.mutation_prob = cfg.dd.mutation_prob;
  params.mutation_std = cfg.dd.mutation_std;
  params.x_hat = cfg.dd.x_hat;
  const PopulationCounts initial =
      PopulationCounts::delta(space, cfg.dd.initial_site, cfg.dd.initial_count);

  std::vector<ReplicaStatus> statuses;
  for (int r = 0; r < cfg.replicas; ++r) {
    ReplicaStatus st{r, "ok"};
    try {
      const RunRecord rec = run_dd(params, initial, cfg.horizon, cfg.snapshot_schedule(),
                                   cfg.seed, static_cast<std::uint64_t>(r));
      st.events = rec.event_count;
      const fs::path csv = dir / ("dd_r" + std::to_string(r) + ".csv");
      write_trajectory_csv(csv, cfg, rec, space, true);
      outcome.artifacts.push_back(csv.string());
      const fs::path svg = dir / ("dd_r" + std::to_string(r) + ".svg");
      write_trajectory_heatmap(svg, rec, space, "population frequency, replica " +
                               std::to_string(r), timestamp);
      outcome.artifacts.push_back(svg.string());
      if (rec.extinction_time)
        outcome.warnings.push_back("replica " + std::to_string(r) + " went extinct at t=" +
                                   format_double(*rec.extinction_time));
    } catch (const std::exception& e) {
      st.status = "failed";
      st.error = e.what();
      outcome.warnings.push_back("replica " + std::to_string(r) + " failed: " + e.what());
    }
    statuses.push_back(std::move(st));
  }
  write_run_summary(dir, cfg, statuses);
  outcome.artifacts.push_back((dir / "run_summary.csv").string());
}

void run_moran_experiment(const ExperimentConfig& cfg, const fs::path& dir, bool timestamp,
                          ExperimentOutcome& outcome) {
  const PhenotypeSpace space(cfg.kernel.half_width);
  MoranParams params{space, cfg.kernels(), cfg.model_params(), cfg.moran.initial_site};

  CsvFile spec_csv(dir / "speciation.csv", cfg,
                   {"replica", "seed", "speciation_time", "criterion_version"});
  std::vector<ReplicaStatus> statuses;
  for (int r = 0; r < cfg.replicas; ++r) {
    ReplicaStatus st{r, "ok"};
    try {
      const RunRecord rec = run_moran(params, cfg.horizon, cfg.snapshot_schedule(), cfg.seed,
                                      static_cast<std::uint64_t>(r));
      st.events = rec.event_count;
      const auto spec_time = detect_speciation(rec, cfg.criterion);
      spec_csv.row({fmt(r), fmt(cfg.seed), spec_time ? fmt(*spec_time) : "",
                    fmt(cfg.criterion.version)});
      const fs::path csv = dir / ("moran_r" + std::to_string(r) + ".csv");
      write_trajectory_csv(csv, cfg, rec, space, false);
      outcome.artifacts.push_back(csv.string());
      const fs::path svg = dir / ("moran_r" + std::to_string(r) + ".svg");
      write_trajectory_heatmap(svg, rec, space,
                               "frequency trajectory, replica " + std::to_string(r), timestamp);
      outcome.artifacts.push_back(svg.string());
    } catch (const std::exception& e) {
      st.status = "failed";
      st.error = e.what();
      spec_csv.row({fmt(r), fmt(cfg.seed), "", fmt(cfg.criterion.version)});
      outcome.warnings.push_back("replica " + std::to_string(r) + " failed: " + e.what());
    }
    statuses.push_back(std::move(st));
  }
  outcome.artifacts.push_back((dir / "speciation.csv").string());
  write_run_summary(dir, cfg, statuses);
  outcome.artifacts.push_back((dir / "run_summary.csv").string());
}

void run_ode_experiment(const ExperimentConfig& cfg, const fs::path& dir, bool timestamp,
                        ExperimentOutcome& outcome) {
  const KernelSet kernels = cfg.kernels();
  const PhenotypeSpace space = kernels.space;
  OdeVariant variant = OdeVariant::eq7;
  if (cfg.ode.variant == "eq6") variant = OdeVariant::eq6;
  if (cfg.ode.variant == "eq9") variant = OdeVariant::eq9;
  const Simplex start = cfg.ode.init_eps > 0.0
                            ? Simplex::near_delta(space, cfg.moran.initial_site, cfg.ode.init_eps)
                            : Simplex::delta(space, cfg.moran.initial_site);
  OdeOptions opt;
  opt.horizon = cfg.horizon;
  opt.snapshot_interval = cfg.snapshot_interval;
  const OdeResult res = integrate_ode(variant, start, kernels, cfg.model_params(), opt);
  if (!res.ok) outcome.warnings.push_back("integration stopped early: " + res.error);

  RunRecord rec;
  rec.snapshots = res.trajectory;
  const fs::path csv = dir / "ode_trajectory.csv";
  write_trajectory_csv(csv, cfg, rec, space, false);
  outcome.artifacts.push_back(csv.string());

  std::vector<SvgSeries> series;
  const std::size_t stride = std::max<std::size_t>(1, res.trajectory.size() / 6);
  for (std::size_t s = 0; s < res.trajectory.size(); s += stride) {
    SvgSeries line{"t=" + format_double(res.trajectory[s].time), {}};
    for (int i = 0; i < space.size(); ++i)
      line.points.emplace_back(space.site(i),
                               res.trajectory[s].frequency[static_cast<std::size_t>(i)]);
    series.push_back(std::move(line));
  }
  SvgOptions sopt;
  sopt.timestamp = timestamp;
  sopt.title = "frequency profiles (" + cfg.ode.variant + ")";
  const fs::path svg = dir / "ode_profiles.svg";
  write_svg_lines(svg.string(), series, sopt);
  outcome.artifacts.push_back(svg.string());
}

void run_landscape_experiment(const ExperimentConfig& cfg, const fs::path& dir, bool timestamp,
                              ExperimentOutcome& outcome) {
  const KernelSet kernels = cfg.kernels();
  const PhenotypeSpace space = kernels.space;
  MoranParams params{space, kernels, cfg.model_params(), cfg.moran.initial_site};
  const auto points =
      find_stationary_points(params, cfg.landscape.n_starts, cfg.landscape.tol, cfg.seed);

  CsvFile report(dir / "stationary_points.csv", cfg,
                 {"cluster", "x", "pi_x", "m_x", "residual", "classification"});
  for (const auto& pt : points)
    for (int i = 0; i < space.size(); ++i)
      report.row({fmt(pt.basin_tag), fmt(space.site(i)),
                  fmt(pt.pi_hat[static_cast<std::size_t>(i)]),
                  fmt(pt.fitness[static_cast<std::size_t>(i)]), fmt(pt.constancy_residual),
                  to_string(pt.classification)});
  outcome.artifacts.push_back((dir / "stationary_points.csv").string());

  CsvFile ledger(dir / "bound_audit.csv", cfg,
                 {"cluster", "theorem", "hypothesis_ok", "conclusion_ok", "margin",
                  "skip_reason"});
  bool violated = false;
  for (const auto& pt : points) {
    if (pt.constancy_residual > 1e-8) continue;
    // the bounds constrain local maxima of V; saddles are exempt
    if (pt.classification != StationaryClass::local_max_V) continue;
    for (const auto& e : bound_audit(pt.pi_hat, kernels, cfg.model_params(), cfg.bounds)) {
      ledger.row({fmt(pt.basin_tag), e.name, e.hypothesis_ok ? "1" : "0",
                  e.conclusion_ok ? "1" : "0", fmt(e.margin), e.skip_reason});
      if (e.hypothesis_ok && !e.conclusion_ok) violated = true;
    }
  }
  outcome.artifacts.push_back((dir / "bound_audit.csv").string());
  if (violated) {
    outcome.exit_code = 1;
    outcome.warnings.push_back("bound audit conclusion violated; see bound_audit.csv");
  }

  std::vector<SvgSeries> series;
  for (const auto& pt : points) {
    SvgSeries line{"cluster " + std::to_string(pt.basin_tag) + " (" +
                       to_string(pt.classification) + ")",
                   {}};
    for (int i = 0; i < space.size(); ++i)
      line.points.emplace_back(space.site(i), pt.pi_hat[static_cast<std::size_t>(i)]);
    series.push_back(std::move(line));
  }
  SvgOptions sopt;
  sopt.timestamp = timestamp;
  sopt.title = "stationary points";
  write_svg_lines((dir / "stationary_points.svg").string(), series, sopt);
  outcome.artifacts.push_back((dir / "stationary_points.svg").string());
}

void run_mcmc_experiment(const ExperimentConfig& cfg, const fs::path& dir, bool timestamp,
                         ExperimentOutcome& outcome) {
  const KernelSet kernels = cfg.kernels();
  const PhenotypeSpace space = kernels.space;
  StationaryDensity density{kernels, cfg.model_params()};
  McmcOptions opt = cfg.mcmc;
  opt.seed = cfg.seed;
  const McmcResult res = mcmc_sample_stationary(density, opt);

  CsvFile csv(dir / "mcmc_samples.csv", cfg, {"sample_index", "x", "pi_x", "log_density"});
  csv.comment("acceptance_rate=" + format_double(res.acceptance_rate));
  csv.comment("max_split_rhat=" + format_double(res.max_split_rhat));
  for (std::size_t s = 0; s < res.samples.size(); ++s)
    for (int i = 0; i < space.size(); ++i)
      csv.row({fmt(static_cast<long long>(s)), fmt(space.site(i)),
               fmt(res.samples[s][static_cast<std::size_t>(i)]), fmt(res.log_density[s])});
  outcome.artifacts.push_back((dir / "mcmc_samples.csv").string());
  if (res.tuning_warning)
    outcome.warnings.push_back("acceptance rate below 1%; retune proposal_scale");
  if (res.max_split_rhat > 1.1)
    outcome.warnings.push_back("split R-hat " + format_double(res.max_split_rhat) +
                               " exceeds 1.1; chains may not have mixed");

  // marginal means as a quick visual
  std::vector<SvgSeries> series(1);
  series[0].label = "marginal mean";
  for (int i = 0; i < space.size(); ++i) {
    double mean = 0.0;
    for (const auto& s : res.samples) mean += s[static_cast<std::size_t>(i)];
    series[0].points.emplace_back(space.site(i),
                                  mean / static_cast<double>(res.samples.size()));
  }
  SvgOptions sopt;
  sopt.timestamp = timestamp;
  sopt.title = "stationary-law marginal means";
  write_svg_lines((dir / "mcmc_means.svg").string(), series, sopt);
  outcome.artifacts.push_back((dir / "mcmc_means.svg").string());
}

void run_bifurcation_experiment(const ExperimentConfig& cfg, const fs::path& dir, bool,
                                ExperimentOutcome& outcome) {
  const KernelSet kernels = cfg.kernels();
  const BifurcationResult res = bifurcation_scan(kernels, cfg.model_params(), cfg.mu_grid);

  CsvFile grid(dir / "bifurcation_grid.csv", cfg, {"mu", "has_local_max"});
  for (const auto& [mu, has] : res.grid_results) grid.row({fmt(mu), has ? "1" : "0"});
  outcome.artifacts.push_back((dir / "bifurcation_grid.csv").string());

  CsvFile summary(dir / "bifurcation_result.csv", cfg,
                  {"found", "mu_low", "mu_high", "mu_star", "note"});
  summary.row({res.found ? "1" : "0", fmt(res.mu_low), fmt(res.mu_high), fmt(res.mu_star),
               res.note});
  outcome.artifacts.push_back((dir / "bifurcation_result.csv").string());
  if (!res.found) outcome.warnings.push_back(res.note);
}

void run_sweep_experiment(const ExperimentConfig& cfg, const fs::path& dir, bool timestamp,
                          ExperimentOutcome& outcome) {
  const PhenotypeSpace space(cfg.kernel.half_width);
  CsvFile csv(dir / "speciation_sweep.csv", cfg,
              {"mu", "replica", "seed", "speciation_time", "criterion_version"});
  CsvFile means(dir / "speciation_means.csv", cfg,
                {"mu", "replicas", "detected", "mean_speciation_time"});
  std::vector<SvgSeries> groups;

  for (std::size_t g = 0; g < cfg.mu_grid.size(); ++g) {
    const double mu = cfg.mu_grid[g];
    ModelParams mp = cfg.model_params();
    mp.mu = mu;
    MoranParams params{space, cfg.kernels(), mp, cfg.moran.initial_site};
    SvgSeries group{"mu=" + format_double(mu), {}};
    double sum = 0.0;
    int detected = 0;
    for (int r = 0; r < cfg.replicas; ++r) {
      const auto replica_index = static_cast<std::uint64_t>(g) * cfg.replicas + r;
      std::optional<double> spec_time;
      try {
        const RunRecord rec =
            run_moran(params, cfg.horizon, cfg.snapshot_schedule(), cfg.seed, replica_index);
        spec_time = detect_speciation(rec, cfg.criterion);
      } catch (const std::exception& e) {
        outcome.warnings.push_back("mu=" + format_double(mu) + " replica " + std::to_string(r) +
                                   " failed: " + e.what());
      }
      csv.row({fmt(mu), fmt(r), fmt(cfg.seed), spec_time ? fmt(*spec_time) : "",
               fmt(cfg.criterion.version)});
      if (spec_time) {
        sum += *spec_time;
        ++detected;
        group.points.emplace_back(mu, *spec_time);
      }
    }
    means.row({fmt(mu), fmt(cfg.replicas), fmt(detected),
               detected ? fmt(sum / detected) : ""});
    groups.push_back(std::move(group));
  }
  outcome.artifacts.push_back((dir / "speciation_sweep.csv").string());
  outcome.artifacts.push_back((dir / "speciation_means.csv").string());

  SvgOptions sopt;
  sopt.timestamp = timestamp;
  sopt.title = "speciation time vs mutation parameter";
  write_svg_scatter((dir / "speciation_sweep.svg").string(), groups, true, sopt);
  outcome.artifacts.push_back((dir / "speciation_sweep.svg").string());
}

void run_conditioned_experiment(const ExperimentConfig& cfg, const fs::path& dir, bool timestamp,
                                ExperimentOutcome& outcome) {
  const KernelSet kernels = cfg.kernels();
  const PhenotypeSpace space = kernels.space;
  const FitnessKind kind = cfg.conditioned.fitness == "W1" ? FitnessKind::W1 : FitnessKind::W2;
  const MutationMatrix a = cfg.conditioned.mutation > 0.0
                               ? MutationMatrix::tridiagonal(space, cfg.conditioned.mutation)
                               : MutationMatrix::identity(space);
  const Simplex start =
      Simplex::near_delta(space, cfg.conditioned.initial_site, cfg.conditioned.init_eps);

  if (cfg.conditioned.population > 0) {
    // sampled generations, one trajectory per replica
    std::vector<ReplicaStatus> statuses;
    for (int r = 0; r < cfg.replicas; ++r) {
      ReplicaStatus st{r, "ok"};
      Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(r), "conditioned-resampling"));
      PopulationCounts state = PopulationCounts::delta(space, cfg.conditioned.initial_site,
                                                       cfg.conditioned.population);
      RunRecord rec;
      rec.snapshots.push_back({0.0, state.frequencies()});
      try {
        for (int it = 1; it <= cfg.conditioned.max_iter; ++it) {
          state = wf_sample_step(state, kernels, kind, a, rng);
          if (cfg.conditioned.snapshot_every > 0 && it % cfg.conditioned.snapshot_every == 0)
            rec.snapshots.push_back({static_cast<double>(it), state.frequencies()});
        }
        rec.snapshots.push_back({static_cast<double>(cfg.conditioned.max_iter),
                                 state.frequencies()});
      } catch (const std::exception& e) {
        st.status = "failed";
        st.error = e.what();
        outcome.warnings.push_back("replica " + std::to_string(r) + " failed: " + e.what());
      }
      const fs::path csv = dir / ("conditioned_r" + std::to_string(r) + ".csv");
      write_trajectory_csv(csv, cfg, rec, space, false);
      outcome.artifacts.push_back(csv.string());
      statuses.push_back(std::move(st));
    }
    write_run_summary(dir, cfg, statuses);
    outcome.artifacts.push_back((dir / "run_summary.csv").string());
    return;
  }

  FixedPointOptions opt;
  opt.tol = cfg.conditioned.tol;
  opt.max_iter = cfg.conditioned.max_iter;
  opt.snapshot_every = cfg.conditioned.snapshot_every;
  const FixedPointResult res = iterate_to_fixed_point(start, kernels, kind, a, opt);
  if (!res.converged)
    outcome.warnings.push_back("fixed-point iteration did not converge in " +
                               std::to_string(res.iterations) + " iterations");

  RunRecord rec;
  rec.snapshots = res.trajectory;
  const fs::path traj = dir / "conditioned_trajectory.csv";
  write_trajectory_csv(traj, cfg, rec, space, false);
  outcome.artifacts.push_back(traj.string());

  // first iterate at which the trajectory looks bimodal, if any
  std::optional<double> bimodal_from, bimodal_to;
  for (const auto& snap : res.trajectory) {
    if (is_bimodal(snap.frequency, cfg.criterion)) {
      if (!bimodal_from) bimodal_from = snap.time;
      bimodal_to = snap.time;
    }
  }

  const auto w = fitness_w(res.pi_hat, kernels, kind);
  CsvFile report(dir / "fixed_point_report.csv", cfg, {"x", "pi_hat_x", "W_x", "residual"});
  report.comment("converged=" + std::string(res.converged ? "1" : "0"));
  report.comment("iterations=" + std::to_string(res.iterations));
  report.comment("variance=" + format_double(res.pi_hat.variance_site()));
  report.comment("condition3_residual=" + format_double(res.condition3_residual));
  if (bimodal_from)
    report.comment("bimodal_iterations=" + format_double(*bimodal_from) + ".." +
                   format_double(*bimodal_to));
  for (int i = 0; i < space.size(); ++i)
    report.row({fmt(space.site(i)), fmt(res.pi_hat[static_cast<std::size_t>(i)]),
                fmt(w[static_cast<std::size_t>(i)]), fmt(res.condition3_residual)});
  outcome.artifacts.push_back((dir / "fixed_point_report.csv").string());

  std::vector<SvgSeries> series;
  const std::size_t stride = std::max<std::size_t>(1, res.trajectory.size() / 6);
  for (std::size_t s = 0; s < res.trajectory.size(); s += stride) {
    SvgSeries line{"iter " + format_double(res.trajectory[s].time), {}};
    for (int i = 0; i < space.size(); ++i)
      line.points.emplace_back(space.site(i),
                               res.trajectory[s].frequency[static_cast<std::size_t>(i)]);
    series.push_back(std::move(line));
  }
  SvgOptions sopt;
  sopt.timestamp = timestamp;
  sopt.title = "conditioned-model iteration (" + cfg.conditioned.fitness + ")";
  write_svg_lines((dir / "conditioned_profiles.svg").string(), series, sopt);
  outcome.artifacts.push_back((dir / "conditioned_profiles.svg").string());
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& config, bool with_timestamp) {
  config.validate();
  const fs::path dir =
      resolve_output_dir(config.output_dir.empty() ? config.model : config.output_dir);
  fs::create_directories(dir);

  ExperimentOutcome outcome;
  {
    std::ofstream cfg_out(dir / "config.json");
    cfg_out << config.to_json_text() << "\n";
    outcome.artifacts.push_back((dir / "config.json").string());
  }

  if (config.model == "dd_original")
    run_dd_experiment(config, dir, with_timestamp, outcome);
  else if (config.model == "moran")
    run_moran_experiment(config, dir, with_timestamp, outcome);
  else if (config.model == "ode")
    run_ode_experiment(config, dir, with_timestamp, outcome);
  else if (config.model == "landscape")
    run_landscape_experiment(config, dir, with_timestamp, outcome);
  else if (config.model == "mcmc")
    run_mcmc_experiment(config, dir, with_timestamp, outcome);
  else if (config.model == "bifurcation")
    run_bifurcation_experiment(config, dir, with_timestamp, outcome);
  else if (config.model == "speciation_sweep")
    run_sweep_experiment(config, dir, with_timestamp, outcome);
  else if (config.model == "conditioned_dd")
    run_conditioned_experiment(config, dir, with_timestamp, outcome);
  return outcome;
}

// ---- recipes -------------------------------------------------------------------

namespace {

struct Recipe {
  const char* name;
  const char* description;
  const char* text;
};

// sigma_k = sqrt(10) in the particle recipes reproduces exp(-x^2/20)
const Recipe kRecipes[] = {
    {"fig1", "birth/death model: drift toward the capacity peak, then branching",
     R"({
  "model": "dd_original",
  "seed": 20,
  "replicas": 1,
  "horizon": 500,
  "snapshots": [1, 30, 100, 200, 330, 370, 400, 500],
  "output_dir": "fig1",
  "kernel": {"half_width": 50},
  "dd": {
    "sigma_k": 31.622776601683793,
    "sigma_c": 24.494897427831781,
    "capacity_scale": 500,
    "mutation_prob": 0.015,
    "initial_site": -30,
    "initial_count": 300
  }
})"},
    {"fig2", "conditioned model, W1 fitness: transient branching, Gaussian limit",
     R"({
  "model": "conditioned_dd",
  "seed": 2,
  "output_dir": "fig2",
  "kernel": {
    "half_width": 149,
    "capacity_kind": "gaussian",
    "sigma_k": 60,
    "cooperation_kind": "constant",
    "competition_kind": "gaussian",
    "sigma_c": 55
  },
  "conditioned": {"fitness": "W1", "mutation": 0.05, "max_iter": 20000, "snapshot_every": 25,
                  "init_eps": 1e-3}
})"},
    {"fig3", "conditioned model, W2 fitness: spike widens straight to a Gaussian",
     R"({
  "model": "conditioned_dd",
  "seed": 3,
  "output_dir": "fig3",
  "kernel": {
    "half_width": 149,
    "capacity_kind": "gaussian",
    "sigma_k": 60,
    "cooperation_kind": "constant",
    "competition_kind": "gaussian",
    "sigma_c": 55
  },
  "conditioned": {"fitness": "W2", "mutation": 0.05, "max_iter": 20000, "snapshot_every": 25,
                  "init_eps": 1e-3}
})"},
    {"fig4", "particle run, larger mutation: early branching",
     R"({
  "model": "moran",
  "seed": 4,
  "replicas": 5,
  "horizon": 6000,
  "snapshot_interval": 50,
  "output_dir": "fig4",
  "kernel": )"
     R"({
    "half_width": 14,
    "capacity_kind": "gaussian",
    "sigma_k": 3.1622776601683795,
    "cooperation_kind": "step",
    "b": 0.01,
    "m": 10,
    "competition_kind": "constant",
    "competition_value": 1.0
  },
  "moran": {"sigma": 0.5, "mu": 6e-05, "population": 50625, "initial_site": 0}
})"},
    {"fig5", "particle run, smaller mutation: branching arrives much later",
     R"({
  "model": "moran",
  "seed": 5,
  "replicas": 5,
  "horizon": 40000,
  "snapshot_interval": 250,
  "output_dir": "fig5",
  "kernel": )"
     R"({
    "half_width": 14,
    "capacity_kind": "gaussian",
    "sigma_k": 3.1622776601683795,
    "cooperation_kind": "step",
    "b": 0.01,
    "m": 10,
    "competition_kind": "constant",
    "competition_value": 1.0
  },
  "moran": {"sigma": 0.5, "mu": 5e-05, "population": 50625, "initial_site": 0}
})"},
    {"fig6", "branching-time sweep over the mutation grid",
     R"({
  "model": "speciation_sweep",
  "seed": 6,
  "replicas": 5,
  "horizon": 60000,
  "snapshot_interval": 250,
  "output_dir": "fig6",
  "mu_grid": [4.4e-05, 4.6e-05, 4.8e-05, 5e-05, 5.2e-05, 5.5e-05, 6e-05],
  "kernel": )"
     R"({
    "half_width": 14,
    "capacity_kind": "gaussian",
    "sigma_k": 3.1622776601683795,
    "cooperation_kind": "step",
    "b": 0.01,
    "m": 10,
    "competition_kind": "constant",
    "competition_value": 1.0
  },
  "moran": {"sigma": 0.5, "population": 50625, "initial_site": 0}
})"},
    {"thm25", "concentration regime: stationary law piles up near the center corner",
     R"({
  "model": "mcmc",
  "seed": 25,
  "output_dir": "thm25",
  "kernel": {
    "half_width": 2,
    "capacity_kind": "table",
    "capacity_table": [0.5, 0.9, 1.0, 0.9, 0.5],
    "cooperation_kind": "constant",
    "cooperation_value": 0.95,
    "competition_kind": "constant",
    "competition_value": 1.0
  },
  "moran": {"sigma": 0.5, "mu": 0.001, "population": 2000},
  "mcmc": {"n_samples": 4000, "n_chains": 4, "burn_in": 5000, "proposal_scale": 2000}
})"},
    {"prop28", "strong-mutation regime: mass caps force a two-sided configuration",
     R"({
  "model": "landscape",
  "seed": 28,
  "output_dir": "prop28",
  "kernel": {
    "half_width": 6,
    "capacity_kind": "table",
    "capacity_table": [3e-4, 4e-4, 5e-4, 0.3, 0.95, 0.99, 1.0, 0.99, 0.95, 0.3, 5e-4, 4e-4, 3e-4],
    "cooperation_kind": "step",
    "b": 1e-4,
    "m": 4,
    "competition_kind": "constant",
    "competition_value": 1.0
  },
  "moran": {"sigma": 0.5, "mu": 2.1e-4, "population": 200000},
  "landscape": {"n_starts": 24, "tol": 1e-8},
  "bounds": {"n": 4, "epsilon": 0.05}
})"},
    {"bifurcation", "mu threshold where the center-corner maximum of the potential vanishes",
     R"({
  "model": "bifurcation",
  "seed": 10,
  "output_dir": "bifurcation",
  "mu_grid": [4.4e-05, 4.6e-05, 4.8e-05, 5e-05, 5.2e-05, 5.5e-05, 6e-05],
  "kernel": )"
     R"({
    "half_width": 14,
    "capacity_kind": "gaussian",
    "sigma_k": 3.1622776601683795,
    "cooperation_kind": "step",
    "b": 0.01,
    "m": 10,
    "competition_kind": "constant",
    "competition_value": 1.0
  },
  "moran": {"sigma": 0.5, "population": 50625}
})"},
};

}  // namespace

std::vector<std::pair<std::string, std::string>> recipe_list() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& r : kRecipes) out.emplace_back(r.name, r.description);
  return out;
}

std::string recipe_config_text(const std::string& name) {
  for (const auto& r : kRecipes)
    if (name == r.name) return r.text;
  throw std::invalid_argument("unknown recipe '" + name + "'; see `recipes list`");
}

}  // namespace specsim
