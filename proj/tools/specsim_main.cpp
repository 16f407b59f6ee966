#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "specsim/harness.hpp"
#include "specsim/svg.hpp"

namespace fs = std::filesystem;

namespace {

std::string load_config_text(const std::string& arg) {
  if (fs::exists(arg)) {
    std::ifstream in(arg);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }
  return specsim::recipe_config_text(arg);  // throws with a helpful message
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

Table read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Table t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (t.columns.empty()) {
      t.columns = fields;
      continue;
    }
    std::vector<double> row;
    bool numeric = true;
    for (const auto& f : fields) {
      try {
        row.push_back(f.empty() ? std::nan("") : std::stod(f));
      } catch (...) {
        numeric = false;
      }
    }
    if (numeric && row.size() == t.columns.size()) t.rows.push_back(std::move(row));
  }
  return t;
}

int do_plot(const std::string& csv_path, const std::string& kind, const std::string& out,
            bool timestamp) {
  const Table t = read_csv(csv_path);
  if (t.rows.empty()) {
    std::cerr << "no numeric rows in " << csv_path << "\n";
    return 1;
  }
  specsim::SvgOptions opt;
  opt.timestamp = timestamp;
  opt.title = fs::path(csv_path).filename().string();
  const std::string svg = out.empty() ? csv_path + "." + kind + ".svg" : out;

  if (kind == "lines") {
    // wide format: first column is the abscissa, every other column a series
    std::vector<specsim::SvgSeries> series;
    for (std::size_t c = 1; c < t.columns.size(); ++c) {
      specsim::SvgSeries s{t.columns[c], {}};
      for (const auto& row : t.rows)
        if (!std::isnan(row[c])) s.points.emplace_back(row[0], row[c]);
      series.push_back(std::move(s));
    }
    specsim::write_svg_lines(svg, series, opt);
  } else if (kind == "heatmap") {
    // long format: (row coordinate, column coordinate, ..., value)
    if (t.columns.size() < 3) {
      std::cerr << "heatmap needs at least three columns\n";
      return 1;
    }
    std::vector<double> rows_c, cols_c;
    for (const auto& row : t.rows) {
      if (rows_c.empty() || row[0] != rows_c.back()) rows_c.push_back(row[0]);
      if (rows_c.size() == 1) cols_c.push_back(row[1]);
    }
    const std::size_t value_col = t.columns.size() - 1;
    std::vector<double> values;
    values.reserve(t.rows.size());
    for (const auto& row : t.rows) values.push_back(row[value_col]);
    if (values.size() != rows_c.size() * cols_c.size()) {
      std::cerr << "rows do not form a dense grid\n";
      return 1;
    }
    specsim::write_svg_heatmap(svg, rows_c, cols_c, values, opt);
  } else if (kind == "scatter") {
    specsim::SvgSeries s{"", {}};
    for (const auto& row : t.rows)
      if (!std::isnan(row[0]) && !std::isnan(row[1])) s.points.emplace_back(row[0], row[1]);
    specsim::write_svg_scatter(svg, {s}, false, opt);
  } else {
    std::cerr << "unknown plot kind '" << kind << "'\n";
    return 1;
  }
  std::cout << svg << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulation and landscape toolkit for lattice evolution models"};
  app.require_subcommand(1);

  std::string config_arg, out_dir, plot_csv, plot_kind = "lines", plot_out;
  std::optional<std::uint64_t> seed_override;
  std::optional<int> replicas_override;
  bool no_timestamp = false;

  auto* run = app.add_subcommand("run", "run an experiment from a config file or recipe name");
  run->add_option("config", config_arg, "config path or recipe name")->required();
  run->add_option("--seed", seed_override, "override the config seed");
  run->add_option("--replicas", replicas_override, "override the replica count");
  run->add_option("--out", out_dir, "override the output directory");
  run->add_flag("--no-timestamp", no_timestamp, "omit timestamps from SVG output");

  auto* recipes = app.add_subcommand("recipes", "built-in example configs");
  auto* recipes_list = recipes->add_subcommand("list", "list recipe names");
  auto* recipes_show = recipes->add_subcommand("show", "print a recipe config");
  std::string recipe_name;
  recipes_show->add_option("name", recipe_name)->required();

  auto* verify = app.add_subcommand("verify", "validate a config and run only assertion suites");
  verify->add_option("config", config_arg, "config path or recipe name")->required();
  verify->add_option("--seed", seed_override, "override the config seed");
  verify->add_option("--out", out_dir, "override the output directory");

  auto* plot = app.add_subcommand("plot", "render a CSV artifact as SVG");
  plot->add_option("csv", plot_csv)->required();
  plot->add_option("--kind", plot_kind, "lines | heatmap | scatter");
  plot->add_option("--out", plot_out, "output SVG path");
  plot->add_flag("--no-timestamp", no_timestamp, "omit timestamps from SVG output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (recipes_list->parsed()) {
      for (const auto& [name, description] : specsim::recipe_list())
        std::cout << name << "\t" << description << "\n";
      return 0;
    }
    if (recipes_show->parsed()) {
      std::cout << specsim::recipe_config_text(recipe_name) << "\n";
      return 0;
    }
    if (plot->parsed()) return do_plot(plot_csv, plot_kind, plot_out, !no_timestamp);

    auto cfg = specsim::ExperimentConfig::from_json_text(load_config_text(config_arg));
    if (seed_override) cfg.seed = *seed_override;
    if (replicas_override) cfg.replicas = *replicas_override;
    if (!out_dir.empty()) cfg.output_dir = out_dir;

    if (verify->parsed()) {
      cfg.validate();
      if (cfg.model == "landscape") {
        const auto outcome = specsim::run_experiment(cfg, !no_timestamp);
        for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << "\n";
        std::cout << (outcome.exit_code == 0 ? "all assertions passed" : "assertions FAILED")
                  << "\n";
        return outcome.exit_code;
      }
      std::cout << "config OK (hash " << cfg.hash() << ")\n";
      return 0;
    }

    const auto outcome = specsim::run_experiment(cfg, !no_timestamp);
    for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& a : outcome.artifacts) std::cout << a << "\n";
    return outcome.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
