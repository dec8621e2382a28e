#include "memgmm/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "memgmm/errors.hpp"
#include "memgmm/gmm_fit.hpp"
#include "memgmm/io.hpp"
#include "memgmm/mixture.hpp"
#include "memgmm/modal_em.hpp"
#include "memgmm/postprocess.hpp"
#include "memgmm/synth.hpp"

namespace memgmm::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct MemFlags {
  double epsilon = 1e-5;
  int max_iter = 1000;
  bool no_damping = false;
  double beta = 0.1;
  std::optional<double> merge_tol;
  std::string denoise = "gaussian";
  double alpha = 0.01;
  bool paths = false;
  int threads = 0;
};

struct LatticeFlags {
  std::vector<double> bounds;
  std::vector<long> resolution;
};

void add_mem_flags(CLI::App* sub, MemFlags& f, bool with_paths) {
  sub->add_option("--epsilon", f.epsilon, "Relative change below which a point is frozen")->capture_default_str();
  sub->add_option("--max-iter", f.max_iter, "Maximum global MEM iterations")->capture_default_str();
  sub->add_flag("--no-damping", f.no_damping, "Use full M-step updates (step size 1)");
  sub->add_option("--beta", f.beta, "Damping rate in 1 - exp(-beta t)")->capture_default_str();
  sub->add_option("--merge-tol", f.merge_tol,
                  "Distance for merging converged points (default: 1% of the average marginal sd)");
  sub->add_option("--denoise", f.denoise, "Low-density mode filter: none, gaussian, databox, pcabox, min")
      ->capture_default_str()
      ->check(CLI::IsMember({"none", "gaussian", "databox", "pcabox", "min"}));
  sub->add_option("--alpha", f.alpha, "Tail probability of the Gaussian central region")->capture_default_str();
  if (with_paths) sub->add_flag("--paths", f.paths, "Also write paths.csv with per-iteration positions");
  sub->add_option("--threads", f.threads, "Worker threads (0 = all cores)")->capture_default_str();
}

void add_lattice_flags(CLI::App* sub, LatticeFlags& f) {
  sub->add_option("--bounds", f.bounds, "Lattice bounds: xlo xhi ylo yhi")->expected(4)->required();
  sub->add_option("--resolution", f.resolution, "Lattice nodes along x and y")->expected(2)->required();
}

ClusterConfig cluster_config(const MemFlags& f) {
  ClusterConfig c;
  c.mem.tolerance = f.epsilon;
  c.mem.max_iterations = f.max_iter;
  c.mem.damping_enabled = !f.no_damping;
  c.mem.damping_rate = f.beta;
  c.mem.record_paths = f.paths;
  c.mem.threads = f.threads;
  c.merge_tolerance = f.merge_tol;
  c.denoise = *parse_denoise_method(f.denoise);
  c.alpha = f.alpha;
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ValidationError("--alpha must be in (0,1)");
  if (c.merge_tolerance && !(*c.merge_tolerance > 0.0)) throw ValidationError("--merge-tol must be positive");
  c.mem.validate();
  return c;
}

json mem_settings(const ClusterConfig& c, double merge_tol_used) {
  return {{"epsilon", c.mem.tolerance},
          {"max_iter", c.mem.max_iterations},
          {"damping", c.mem.damping_enabled},
          {"beta", c.mem.damping_rate},
          {"merge_tol", merge_tol_used},
          {"merge_tol_source", c.merge_tolerance ? "flag" : "default"},
          {"denoise", std::string(to_string(c.denoise))},
          {"alpha", c.alpha},
          {"paths", c.mem.record_paths},
          {"threads", c.mem.threads}};
}

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string line;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) line += ',';
    line += c;
    first = false;
  }
  return line;
}

std::string join_row(const Matrix<double>& m, Index r) {
  std::string s;
  for (Index c = 0; c < m.cols(); ++c) {
    s += ',';
    s += io::format_double(m(r, c));
  }
  return s;
}

std::array<std::pair<double, double>, 2> lattice_bounds(const LatticeFlags& f) {
  return {std::pair{f.bounds[0], f.bounds[1]}, std::pair{f.bounds[2], f.bounds[3]}};
}

std::array<Index, 2> lattice_resolution(const LatticeFlags& f) {
  return {static_cast<Index>(f.resolution[0]), static_cast<Index>(f.resolution[1])};
}

class Manifest {
 public:
  Manifest(std::string subcommand, const std::vector<std::string>& args)
      : start_(std::chrono::steady_clock::now()) {
    j_["format_version"] = io::kFormatVersion;
    j_["tool"] = "memgmm";
    j_["version"] = kVersion;
    j_["subcommand"] = std::move(subcommand);
    j_["argv"] = args;
    j_["warnings"] = json::array();
    j_["outputs"] = json::array();
  }
  json& operator[](const char* key) { return j_[key]; }
  void warn(const std::string& w) { j_["warnings"].push_back(w); }
  void output(const std::string& path) { j_["outputs"].push_back(path); }
  void write(const std::string& path) {
    j_["wall_time_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    io::write_text_file(path, io::dump_json(j_));
  }

 private:
  json j_;
  std::chrono::steady_clock::time_point start_;
};

std::string in_dir(const std::string& dir, const char* name) { return (fs::path(dir) / name).string(); }

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory " + dir + ": " + ec.message());
}

// ---------------------------------------------------------------- fit

struct FitFlags {
  std::string data;
  std::string models = "EII,VII,EEI,VVI,EEE,VVV";
  std::string components = "1-9";
  std::uint64_t seed = 42;
  int restarts = 5;
  double em_tol = 1e-8;
  int em_max_iter = 500;
  std::string out_dir = ".";
};

int cmd_fit(const FitFlags& f, const std::vector<std::string>& args, std::ostream& out) {
  Manifest manifest("fit", args);
  const io::CsvTable table = io::read_csv(f.data);
  FitConfig config;
  config.components = parse_int_ranges(f.components);
  config.models.clear();
  std::stringstream ss(f.models);
  for (std::string tok; std::getline(ss, tok, ',');) {
    const auto m = parse_model_name(tok);
    if (!m) throw ValidationError("--models: unknown model code '" + tok + "'");
    config.models.push_back(*m);
  }
  config.seed = f.seed;
  config.restarts = f.restarts;
  config.em_tolerance = f.em_tol;
  config.em_max_iter = f.em_max_iter;
  config.validate();

  const SelectionResult sel = select_model(table.values, config);
  const FitResult& best = sel.best;

  ensure_dir(f.out_dir);
  const std::string model_path = in_dir(f.out_dir, "model.json");
  const std::string report_path = in_dir(f.out_dir, "fit_report.json");
  io::write_model(model_path, best.mixture);

  json rows = json::array();
  for (const auto& r : sel.table) {
    json row{{"G", r.components},
             {"model", std::string(to_string(r.model))},
             {"n_parameters", r.n_parameters},
             {"converged", r.converged}};
    row["bic"] = r.bic ? json(*r.bic) : json(nullptr);
    row["log_likelihood"] = r.log_likelihood ? json(*r.log_likelihood) : json(nullptr);
    if (!r.failure.empty()) row["failure"] = r.failure;
    rows.push_back(std::move(row));
  }
  json report{{"format_version", io::kFormatVersion},
              {"n", table.values.rows()},
              {"d", table.values.cols()},
              {"seed", f.seed},
              {"chosen",
               {{"G", best.components},
                {"model", std::string(to_string(best.model))},
                {"bic", best.bic},
                {"log_likelihood", best.log_likelihood},
                {"n_parameters", best.n_parameters},
                {"converged", best.converged},
                {"iterations", best.iterations}}},
              {"bic_table", std::move(rows)}};
  io::write_text_file(report_path, io::dump_json(report));

  manifest["inputs"] = {{"data", f.data}};
  manifest["settings"] = {{"models", f.models},           {"components", config.components},
                          {"seed", f.seed},               {"restarts", f.restarts},
                          {"em_tol", f.em_tol},           {"em_max_iter", f.em_max_iter}};
  manifest["results"] = {{"G", best.components},
                         {"model", std::string(to_string(best.model))},
                         {"em_iterations", best.iterations}};
  if (!best.converged) manifest.warn("chosen fit reached em_max_iter without converging");
  manifest.output(model_path);
  manifest.output(report_path);
  manifest.write(in_dir(f.out_dir, "fit_manifest.json"));
  out << "selected " << to_string(best.model) << " with G=" << best.components << " (BIC " << best.bic << ")\n";
  return kOk;
}

// ---------------------------------------------------------------- cluster

struct ClusterFlags {
  std::string model;
  std::string data;
  MemFlags mem;
  std::string out_dir = ".";
};

int cmd_cluster(const ClusterFlags& f, const std::vector<std::string>& args, std::ostream& out) {
  Manifest manifest("cluster", args);
  const GaussianMixtured mixture = io::read_model(f.model);
  const io::CsvTable table = io::read_csv(f.data);
  if (table.values.cols() != mixture.dim()) {
    throw ValidationError("data has " + std::to_string(table.values.cols()) + " columns but the model has d=" +
                          std::to_string(mixture.dim()));
  }
  const ClusterConfig config = cluster_config(f.mem);
  const ModalClusterResult<double> res = modal_cluster(mixture, table.values, config);
  const ModalPartition<double>& part = res.partition;
  const Index d = mixture.dim();

  ensure_dir(f.out_dir);
  const std::string partition_path = in_dir(f.out_dir, "partition.csv");
  const std::string modes_path = in_dir(f.out_dir, "modes.json");

  std::string csv = "point_index,cluster_label";
  for (Index j = 0; j < d; ++j) csv += ",mode_" + std::to_string(j + 1);
  csv += '\n';
  for (size_t i = 0; i < part.labels.size(); ++i) {
    csv += std::to_string(i + 1) + ',' + std::to_string(part.labels[i] + 1) +
           join_row(part.modes_retained, part.labels[i]) + '\n';
  }
  io::write_text_file(partition_path, csv);

  std::vector<Index> counts(static_cast<size_t>(part.clusters()), 0);
  for (Index l : part.labels) ++counts[static_cast<size_t>(l)];
  json modes = json::array();
  for (Index r = 0; r < part.clusters(); ++r) {
    modes.push_back({{"label", r + 1},
                     {"location", std::vector<double>(part.modes_retained.row(r).begin(),
                                                      part.modes_retained.row(r).end())},
                     {"log_density", part.retained_log_density(r)},
                     {"retained", true},
                     {"points", counts[static_cast<size_t>(r)]}});
  }
  for (Index q = 0; q < part.modes_dropped.rows(); ++q) {
    modes.push_back({{"label", nullptr},
                     {"location", std::vector<double>(part.modes_dropped.row(q).begin(),
                                                      part.modes_dropped.row(q).end())},
                     {"log_density", part.dropped_log_density(q)},
                     {"retained", false}});
  }
  json summary{{"format_version", io::kFormatVersion},
               {"d", d},
               {"merge_tolerance", res.merge_tolerance},
               {"denoise", std::string(to_string(config.denoise))},
               {"modes", std::move(modes)},
               {"reassigned_points", part.reassigned.size()},
               {"reassignment_rule", "nearest retained mode, Mahalanobis distance under the marginal covariance"},
               {"all_modes_below_threshold", part.all_modes_below_threshold}};
  if (res.volume) {
    summary["method"] = std::string(to_string(res.volume->method));
    summary["alpha"] = res.volume->alpha;
    summary["log_volume_used"] = res.volume->log_volume;
    summary["log_density_threshold"] = density_threshold(*res.volume);
  } else {
    summary["method"] = nullptr;
    summary["log_volume_used"] = nullptr;
  }
  io::write_text_file(modes_path, io::dump_json(summary));

  manifest["inputs"] = {{"model", f.model}, {"data", f.data}};
  manifest["settings"] = mem_settings(config, res.merge_tolerance);
  manifest["settings"]["threads_resolved"] = resolve_threads(config.mem.threads);
  manifest["results"] = {{"n_points", table.values.rows()},
                         {"iterations", res.mem.iterations},
                         {"converged", res.mem.converged},
                         {"unconverged_points", res.mem.unconverged.size()},
                         {"merged_modes", res.modes.size()},
                         {"clusters", part.clusters()},
                         {"dropped_modes", part.modes_dropped.rows()}};
  if (!res.mem.converged) {
    manifest.warn(std::to_string(res.mem.unconverged.size()) + " points did not converge within max_iter");
  }
  if (part.all_modes_below_threshold) manifest.warn("every mode was below the density threshold; none dropped");
  manifest.output(partition_path);
  manifest.output(modes_path);

  if (config.mem.record_paths) {
    const std::string paths_path = in_dir(f.out_dir, "paths.csv");
    std::string p = "iteration,point_index";
    for (Index j = 0; j < d; ++j) p += ",x" + std::to_string(j + 1);
    p += '\n';
    for (size_t t = 0; t < res.mem.paths.size(); ++t) {
      for (Index i = 0; i < res.mem.paths[t].rows(); ++i) {
        p += std::to_string(t) + ',' + std::to_string(i + 1) + join_row(res.mem.paths[t], i) + '\n';
      }
    }
    io::write_text_file(paths_path, p);
    manifest.output(paths_path);
  }
  manifest.write(in_dir(f.out_dir, "manifest.json"));
  out << part.clusters() << " clusters after " << res.mem.iterations << " iterations\n";
  return kOk;
}

// ---------------------------------------------------------------- grids

struct GridFlags {
  std::string model;
  LatticeFlags lattice;
  MemFlags mem;
  std::string out_dir = ".";
};

int cmd_density_grid(const GridFlags& f, const std::vector<std::string>& args, std::ostream& out) {
  Manifest manifest("density-grid", args);
  const GaussianMixtured mixture = io::read_model(f.model);
  const auto bounds = lattice_bounds(f.lattice);
  const auto res = lattice_resolution(f.lattice);
  check_lattice(mixture.dim(), bounds, res);
  const Vector<double> xs = lattice_axis(bounds[0].first, bounds[0].second, res[0]);
  const Vector<double> ys = lattice_axis(bounds[1].first, bounds[1].second, res[1]);
  const Matrix<double> nodes = lattice_nodes(xs, ys);
  const Vector<double> logf = log_density(mixture, nodes);

  ensure_dir(f.out_dir);
  const std::string path = in_dir(f.out_dir, "grid.csv");
  std::string csv = "x,y,log_density\n";
  for (Index i = 0; i < nodes.rows(); ++i) {
    csv += csv_row({io::format_double(nodes(i, 0)), io::format_double(nodes(i, 1)), io::format_double(logf(i))});
    csv += '\n';
  }
  io::write_text_file(path, csv);
  manifest["inputs"] = {{"model", f.model}};
  manifest["settings"] = {{"bounds", f.lattice.bounds}, {"resolution", f.lattice.resolution}};
  manifest.output(path);
  manifest.write(in_dir(f.out_dir, "density_grid_manifest.json"));
  out << nodes.rows() << " grid nodes written\n";
  return kOk;
}

int cmd_partition_grid(const GridFlags& f, const std::vector<std::string>& args, std::ostream& out) {
  Manifest manifest("partition-grid", args);
  const GaussianMixtured mixture = io::read_model(f.model);
  const ClusterConfig config = cluster_config(f.mem);
  const GridPartition<double> g =
      attraction_partition_grid(mixture, lattice_bounds(f.lattice), lattice_resolution(f.lattice), config);

  ensure_dir(f.out_dir);
  const std::string path = in_dir(f.out_dir, "regions.csv");
  std::string csv = "node_index,x,y,cluster_label,mode_x,mode_y\n";
  const auto& modes = g.result.partition.modes_retained;
  for (Index i = 0; i < g.nodes.rows(); ++i) {
    const Index l = g.labels[static_cast<size_t>(i)];
    csv += csv_row({std::to_string(i + 1), io::format_double(g.nodes(i, 0)), io::format_double(g.nodes(i, 1)),
                    std::to_string(l + 1), io::format_double(modes(l, 0)), io::format_double(modes(l, 1))});
    csv += '\n';
  }
  io::write_text_file(path, csv);
  manifest["inputs"] = {{"model", f.model}};
  manifest["settings"] = mem_settings(config, g.result.merge_tolerance);
  manifest["settings"]["bounds"] = f.lattice.bounds;
  manifest["settings"]["resolution"] = f.lattice.resolution;
  manifest["results"] = {{"iterations", g.result.mem.iterations},
                         {"converged", g.result.mem.converged},
                         {"clusters", g.result.partition.clusters()}};
  if (!g.result.mem.converged) manifest.warn("some lattice nodes did not converge within max_iter");
  manifest.output(path);
  manifest.write(in_dir(f.out_dir, "partition_grid_manifest.json"));
  out << g.result.partition.clusters() << " domains of attraction\n";
  return kOk;
}

// ---------------------------------------------------------------- synth

struct SynthFlags {
  std::string name;
  long n = 500;
  std::uint64_t seed = 1;
  std::vector<double> slant{5.0, 1.0};
  long components = 3;
  long dim = 2;
  double sep = 10.0;
  std::string out_dir = ".";
};

int cmd_synth(const SynthFlags& f, const std::vector<std::string>& args, std::ostream& out) {
  Manifest manifest("synth", args);
  if (f.n < 1) throw ValidationError("--n must be at least 1");
  synth::Sample s;
  json settings{{"name", f.name}, {"n", f.n}, {"seed", f.seed}, {"rng", "mt19937_64"}};
  if (f.name == "motivating") {
    s = synth::motivating(f.n, f.seed, Vector<double>{{f.slant[0], f.slant[1]}});
    settings["slant"] = f.slant;
  } else if (f.name == "separated-gaussians") {
    s = synth::separated_gaussians(f.n, f.components, f.dim, f.sep, f.seed);
    settings["components"] = f.components;
    settings["dim"] = f.dim;
    settings["sep"] = f.sep;
  } else {
    throw ValidationError("unknown generator '" + f.name + "' (expected motivating or separated-gaussians)");
  }

  ensure_dir(f.out_dir);
  const std::string data_path = in_dir(f.out_dir, "data.csv");
  const std::string truth_path = in_dir(f.out_dir, "truth.csv");
  std::string data;
  for (Index j = 0; j < s.data.cols(); ++j) data += (j ? ",x" : "x") + std::to_string(j + 1);
  data += '\n';
  std::string truth = "point_index,label\n";
  for (Index i = 0; i < s.data.rows(); ++i) {
    data += join_row(s.data, i).substr(1) + '\n';
    truth += std::to_string(i + 1) + ',' + std::to_string(s.labels[static_cast<size_t>(i)] + 1) + '\n';
  }
  io::write_text_file(data_path, data);
  io::write_text_file(truth_path, truth);
  manifest["settings"] = std::move(settings);
  manifest.output(data_path);
  manifest.output(truth_path);
  manifest.write(in_dir(f.out_dir, "synth_manifest.json"));
  out << s.data.rows() << " points written\n";
  return kOk;
}

}  // namespace

std::vector<int> parse_int_ranges(const std::string& text) {
  std::set<int> values;
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');) {
    const auto dash = tok.find('-');
    try {
      size_t used = 0;
      if (dash == std::string::npos) {
        const int v = std::stoi(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        values.insert(v);
      } else {
        const int lo = std::stoi(tok.substr(0, dash), &used);
        if (used != dash) throw std::invalid_argument(tok);
        const std::string rest = tok.substr(dash + 1);
        const int hi = std::stoi(rest, &used);
        if (used != rest.size() || hi < lo) throw std::invalid_argument(tok);
        for (int v = lo; v <= hi; ++v) values.insert(v);
      }
    } catch (const std::logic_error&) {
      throw ValidationError("cannot parse range '" + tok + "' in '" + text + "'");
    }
  }
  if (values.empty()) throw ValidationError("empty range list");
  return {values.begin(), values.end()};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Modes and modal clustering of Gaussian mixtures via Modal EM", "memgmm"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  FitFlags fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit Gaussian mixtures to a CSV and select one by BIC");
  fit_cmd->add_option("data", fit.data, "Input CSV (n rows, d numeric columns)")->required();
  fit_cmd->add_option("--models", fit.models, "Comma-separated covariance models")->capture_default_str();
  fit_cmd->add_option("--components", fit.components, "Component counts, e.g. 1-9 or 2,3")->capture_default_str();
  fit_cmd->add_option("--seed", fit.seed, "Seed for k-means++ initialization")->capture_default_str();
  fit_cmd->add_option("--restarts", fit.restarts, "Independent EM starts per (G, model)")->capture_default_str();
  fit_cmd->add_option("--em-tol", fit.em_tol, "Relative log-likelihood change for EM convergence")
      ->capture_default_str();
  fit_cmd->add_option("--em-max-iter", fit.em_max_iter, "Maximum EM iterations")->capture_default_str();
  fit_cmd->add_option("--out-dir", fit.out_dir, "Directory for model.json and fit_report.json")
      ->capture_default_str();

  ClusterFlags cluster;
  auto* cluster_cmd = app.add_subcommand("cluster", "Find modes and the modal clustering partition");
  cluster_cmd->add_option("model", cluster.model, "Model JSON file")->required();
  cluster_cmd->add_option("data", cluster.data, "Data CSV file")->required();
  add_mem_flags(cluster_cmd, cluster.mem, true);
  cluster_cmd->add_option("--out-dir", cluster.out_dir, "Directory for partition.csv, modes.json, manifest.json")
      ->capture_default_str();

  GridFlags dgrid;
  auto* dgrid_cmd = app.add_subcommand("density-grid", "Evaluate the log-density on a 2-D lattice");
  dgrid_cmd->add_option("model", dgrid.model, "Model JSON file")->required();
  add_lattice_flags(dgrid_cmd, dgrid.lattice);
  dgrid_cmd->add_option("--out-dir", dgrid.out_dir, "Directory for grid.csv")->capture_default_str();

  GridFlags pgrid;
  auto* pgrid_cmd = app.add_subcommand("partition-grid", "Label a 2-D lattice by domain of attraction");
  pgrid_cmd->add_option("model", pgrid.model, "Model JSON file")->required();
  add_lattice_flags(pgrid_cmd, pgrid.lattice);
  add_mem_flags(pgrid_cmd, pgrid.mem, false);
  pgrid_cmd->add_option("--out-dir", pgrid.out_dir, "Directory for regions.csv")->capture_default_str();

  SynthFlags syn;
  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic data with known labels");
  synth_cmd->add_option("name", syn.name, "Generator: motivating or separated-gaussians")->required();
  synth_cmd->add_option("--n", syn.n, "Number of points")->capture_default_str();
  synth_cmd->add_option("--seed", syn.seed, "64-bit seed for mt19937_64")->capture_default_str();
  synth_cmd->add_option("--slant", syn.slant, "Skew-normal slant (motivating)")->expected(2)->capture_default_str();
  synth_cmd->add_option("--components", syn.components, "Components (separated-gaussians)")->capture_default_str();
  synth_cmd->add_option("--dim", syn.dim, "Dimension (separated-gaussians)")->capture_default_str();
  synth_cmd->add_option("--sep", syn.sep, "Mean spacing along x1 (separated-gaussians)")->capture_default_str();
  synth_cmd->add_option("--out-dir", syn.out_dir, "Directory for data.csv and truth.csv")->capture_default_str();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit, args, out);
    if (cluster_cmd->parsed()) return cmd_cluster(cluster, args, out);
    if (dgrid_cmd->parsed()) return cmd_density_grid(dgrid, args, out);
    if (pgrid_cmd->parsed()) return cmd_partition_grid(pgrid, args, out);
    if (synth_cmd->parsed()) return cmd_synth(syn, args, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const DegenerateDataError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kComputeError;
  }
  return kInputError;
}

}  // namespace memgmm::cli
