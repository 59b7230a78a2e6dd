// Command line front end: simulation, estimation, clustering, threshold
// selection, and the validation suites, each writing its outputs plus a
// manifest into a run directory.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tailclust/tailclust.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

std::string prepare_out_dir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec)
    throw std::runtime_error("cannot create output directory " + out + ": " +
                             ec.message());
  return out;
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

// Every run records its resolved parameters; rerunning with the manifest
// values reproduces the outputs bitwise.
ordered_json base_manifest(const std::string& command, std::uint64_t seed) {
  ordered_json m;
  m["command"] = command;
  m["version"] = tailclust::kVersion;
  m["seed"] = seed;
  return m;
}

struct SimulateArgs {
  std::string model, out;
  int n = 0;
  std::uint64_t seed = tailclust::kDefaultSeed;
};

int run_simulate(const SimulateArgs& a) {
  const auto specs = tailclust::io::load_model_specs(a.model);
  const bool blocks = specs.size() > 1 ||
                      tailclust::io::detail::parse_json(a.model).is_array();
  prepare_out_dir(a.out);

  ordered_json manifest = base_manifest("simulate", a.seed);
  manifest["model"] = a.model;
  manifest["n"] = a.n;

  if (blocks) {
    const tailclust::BlockSample sample =
        tailclust::sample_ai_blocks(a.n, specs, a.seed);
    tailclust::io::save_dataset(sample.data, join(a.out, "data.csv"),
                                join(a.out, "layout.json"));
    tailclust::io::save_partition(sample.truth, join(a.out, "truth.json"));
    manifest["outputs"] = {"data.csv", "layout.json", "truth.json"};
    std::printf("wrote %d rows, %d columns, %d planted clusters\n",
                sample.data.n(), sample.data.q(),
                sample.truth.cluster_count());
  } else {
    const tailclust::Dataset ds =
        tailclust::sample_nested_logistic(a.n, specs[0], a.seed);
    tailclust::io::save_dataset(ds, join(a.out, "data.csv"),
                                join(a.out, "layout.json"));
    manifest["outputs"] = {"data.csv", "layout.json"};
    std::printf("wrote %d rows, %d columns\n", ds.n(), ds.q());
  }
  tailclust::io::save_json(manifest, join(a.out, "manifest.json"));
  return kExitOk;
}

struct SecoArgs {
  std::string data, layout, out;
  int k = 0;
  int threads = 1;
  std::uint64_t seed = tailclust::kDefaultSeed;
};

int run_seco(const SecoArgs& a) {
  const tailclust::Dataset ds = tailclust::io::load_dataset(a.data, a.layout);
  tailclust::TailParams{a.k, std::nullopt}.validate(ds.n());
  const tailclust::RankMatrix ranks = tailclust::rank_matrix(ds.values);
  const tailclust::SecoMatrix m =
      tailclust::seco_matrix(ranks, ds.layout, a.k, a.threads);

  prepare_out_dir(a.out);
  tailclust::io::save_seco(m, join(a.out, "seco.csv"), join(a.out, "seco.json"));
  ordered_json manifest = base_manifest("seco", a.seed);
  manifest["data"] = a.data;
  manifest["layout"] = a.layout;
  manifest["k"] = a.k;
  manifest["threads"] = a.threads;
  manifest["outputs"] = {"seco.csv", "seco.json"};
  tailclust::io::save_json(manifest, join(a.out, "manifest.json"));
  std::printf("wrote %d x %d matrix\n", m.dim, m.dim);
  return kExitOk;
}

struct ClusterArgs {
  std::string matrix, sidecar, method, linkage = "average", out;
  std::optional<double> tau;
  std::optional<int> K;
  std::uint64_t seed = tailclust::kDefaultSeed;
};

int run_cluster(const ClusterArgs& a) {
  const tailclust::SecoMatrix m = tailclust::io::load_seco(a.matrix, a.sidecar);
  tailclust::Partition p;
  ordered_json manifest = base_manifest("cluster", a.seed);
  manifest["matrix"] = a.matrix;
  manifest["method"] = a.method;

  if (a.method == "caice") {
    if (!a.tau)
      throw std::invalid_argument("method caice requires --tau");
    p = tailclust::caice(m, *a.tau);
    manifest["tau"] = *a.tau;
  } else if (a.method == "hclust" || a.method == "kmedoids") {
    if (!a.K)
      throw std::invalid_argument("method " + a.method + " requires --K");
    const tailclust::Matrix<double> dissim = tailclust::dissimilarity_from(m);
    if (a.method == "hclust") {
      p = tailclust::hclust(dissim, *a.K, tailclust::parse_linkage(a.linkage));
      manifest["linkage"] = a.linkage;
    } else {
      p = tailclust::kmedoids(dissim, *a.K, a.seed);
    }
    manifest["K"] = *a.K;
    manifest["K_source"] = "user";
    // The quantization baseline from the reference workflow is approximated
    // by PAM k-medoids; the partition metadata says which algorithm ran.
  } else {
    throw std::invalid_argument("unknown method \"" + a.method +
                                "\" (expected caice, hclust or kmedoids)");
  }

  prepare_out_dir(a.out);
  tailclust::io::save_partition(p, join(a.out, "partition.json"));
  manifest["outputs"] = {"partition.json"};
  tailclust::io::save_json(manifest, join(a.out, "manifest.json"));
  std::printf("%d clusters\n", p.cluster_count());
  return kExitOk;
}

struct SelectTauArgs {
  std::string data, layout, matrix, sidecar, grid = "0.05:0.0025:0.12", out;
  std::optional<int> k;
  int k_loss = 30;
  int threads = 1;
  std::uint64_t seed = tailclust::kDefaultSeed;
};

int run_select_tau(const SelectTauArgs& a) {
  const tailclust::Dataset ds = tailclust::io::load_dataset(a.data, a.layout);
  const tailclust::RankMatrix ranks = tailclust::rank_matrix(ds.values);

  tailclust::SecoMatrix m;
  if (!a.matrix.empty()) {
    m = tailclust::io::load_seco(a.matrix, a.sidecar);
    if (m.dim != ds.d())
      throw tailclust::io::ValidationError(
          a.matrix + ": matrix is over " + std::to_string(m.dim) +
          " groups but layout has " + std::to_string(ds.d()));
  } else if (a.k) {
    tailclust::TailParams{*a.k, std::nullopt}.validate(ds.n());
    m = tailclust::seco_matrix(ranks, ds.layout, *a.k, a.threads);
  } else {
    throw std::invalid_argument("provide --matrix or --k");
  }

  const std::vector<double> grid = tailclust::io::parse_grid(a.grid);
  const tailclust::TauCurve curve = tailclust::select_tau(
      ranks, ds.layout, m, grid, a.k_loss, a.threads);

  prepare_out_dir(a.out);
  tailclust::io::save_tau_curve(curve, join(a.out, "tau_curve.csv"));
  tailclust::io::save_partition(curve.best_partition,
                                join(a.out, "partition.json"));
  ordered_json manifest = base_manifest("select-tau", a.seed);
  manifest["data"] = a.data;
  manifest["layout"] = a.layout;
  if (!a.matrix.empty()) manifest["matrix"] = a.matrix;
  if (a.k) manifest["k"] = *a.k;
  manifest["k_loss"] = a.k_loss;
  manifest["grid"] = a.grid;
  manifest["threads"] = a.threads;
  manifest["best_tau"] = curve.best_tau;
  manifest["outputs"] = {"tau_curve.csv", "partition.json"};
  tailclust::io::save_json(manifest, join(a.out, "manifest.json"));
  std::printf("best tau %s, %d clusters\n",
              tailclust::io::format_double(curve.best_tau).c_str(),
              curve.best_partition.cluster_count());
  return kExitOk;
}

struct SilhouetteArgs {
  std::string matrix, sidecar, partition, k_range, method = "hclust",
              linkage = "average", out;
  std::uint64_t seed = tailclust::kDefaultSeed;
};

int run_silhouette(const SilhouetteArgs& a) {
  const tailclust::SecoMatrix m = tailclust::io::load_seco(a.matrix, a.sidecar);
  const tailclust::Matrix<double> dissim = tailclust::dissimilarity_from(m);
  prepare_out_dir(a.out);
  ordered_json manifest = base_manifest("silhouette", a.seed);
  manifest["matrix"] = a.matrix;

  if (!a.partition.empty()) {
    const tailclust::Partition p = tailclust::io::load_partition(a.partition);
    const tailclust::SilhouetteResult res = tailclust::silhouette(dissim, p);
    tailclust::io::save_silhouette_csv(res, p, join(a.out, "silhouette.csv"));
    manifest["partition"] = a.partition;
    manifest["K_source"] = "user";
    manifest["average_silhouette"] = res.average;
    manifest["outputs"] = {"silhouette.csv"};
    tailclust::io::save_json(manifest, join(a.out, "manifest.json"));
    std::printf("average silhouette %s\n",
                tailclust::io::format_double(res.average).c_str());
    return kExitOk;
  }

  if (a.k_range.empty())
    throw std::invalid_argument("provide --partition or --k-range");
  const std::vector<int> range = tailclust::io::parse_int_grid(a.k_range);
  const tailclust::ClusterMethod method =
      a.method == "hclust" ? tailclust::ClusterMethod::kHclust
      : a.method == "kmedoids"
          ? tailclust::ClusterMethod::kKmedoids
          : throw std::invalid_argument("unknown method \"" + a.method +
                                        "\" (expected hclust or kmedoids)");
  const tailclust::KSelection sel = tailclust::choose_k(
      dissim, range, method, a.seed, tailclust::parse_linkage(a.linkage));
  const tailclust::SilhouetteResult res =
      tailclust::silhouette(dissim, sel.best_partition);
  tailclust::io::save_ksel_csv(sel, join(a.out, "silhouette_by_k.csv"));
  tailclust::io::save_silhouette_csv(res, sel.best_partition,
                                     join(a.out, "silhouette.csv"));
  tailclust::io::save_partition(sel.best_partition,
                                join(a.out, "partition.json"));
  manifest["k_range"] = a.k_range;
  manifest["method"] = a.method;
  if (a.method == "hclust") manifest["linkage"] = a.linkage;
  manifest["K"] = sel.best_K;
  manifest["K_source"] = "silhouette";
  manifest["average_silhouette"] = res.average;
  manifest["outputs"] = {"silhouette_by_k.csv", "silhouette.csv",
                         "partition.json"};
  tailclust::io::save_json(manifest, join(a.out, "manifest.json"));
  std::printf("K = %d, average silhouette %s\n", sel.best_K,
              tailclust::io::format_double(res.average).c_str());
  return kExitOk;
}

struct AriArgs {
  std::string p1, p2, out;
  std::uint64_t seed = tailclust::kDefaultSeed;
};

int run_ari(const AriArgs& a, const char* command) {
  const tailclust::Partition p1 = tailclust::io::load_partition(a.p1);
  const tailclust::Partition p2 = tailclust::io::load_partition(a.p2);

  tailclust::Report report;
  double value = 0.0;
  try {
    value = tailclust::ari(p1, p2);
    report.checks.push_back({"ari-defined", true,
                             "ARI = " + tailclust::io::format_double(value)});
  } catch (const std::domain_error& e) {
    report.checks.push_back({"ari-defined", false, e.what()});
  }

  if (!a.out.empty()) {
    prepare_out_dir(a.out);
    tailclust::io::save_report_csv(report, join(a.out, "report.csv"));
    tailclust::io::save_report_json(report, join(a.out, "summary.json"));
    ordered_json manifest = base_manifest(command, a.seed);
    manifest["p1"] = a.p1;
    manifest["p2"] = a.p2;
    if (report.all_passed()) manifest["ari"] = value;
    manifest["outputs"] = {"report.csv", "summary.json"};
    tailclust::io::save_json(manifest, join(a.out, "manifest.json"));
  }
  if (!report.all_passed()) {
    std::fprintf(stderr, "%s\n", report.checks[0].detail.c_str());
    return kExitValidation;
  }
  std::printf("%s\n", tailclust::io::format_double(value).c_str());
  return kExitOk;
}

struct BoundsArgs {
  std::string n_grid = "100:50:1000", out;
  double exponent = 1.25;
  int k = 50, m = 50, threads = 1;
  std::uint64_t seed = tailclust::kDefaultSeed;
};

int run_validate_bounds(const BoundsArgs& a) {
  const std::vector<int> grid = tailclust::io::parse_int_grid(a.n_grid);
  const std::vector<tailclust::BoundsRow> rows = tailclust::bounds_experiment(
      grid, a.exponent, a.k, a.m, a.seed, a.threads);

  tailclust::Report report;
  for (const auto& r : rows) {
    char name[32];
    std::snprintf(name, sizeof(name), "n=%d", r.n);
    report.checks.push_back(
        {name, r.ok(),
         r.ok() ? "" : "estimator bound violated at n=" + std::to_string(r.n)});
  }

  prepare_out_dir(a.out);
  tailclust::io::save_bounds_csv(rows, join(a.out, "bounds.csv"));
  tailclust::io::save_report_json(report, join(a.out, "summary.json"));
  ordered_json manifest = base_manifest("validate-bounds", a.seed);
  manifest["n_grid"] = a.n_grid;
  manifest["exponent"] = a.exponent;
  manifest["k"] = a.k;
  manifest["m"] = a.m;
  manifest["threads"] = a.threads;
  manifest["outputs"] = {"bounds.csv", "summary.json"};
  tailclust::io::save_json(manifest, join(a.out, "manifest.json"));
  std::printf("%d grid points, %d bound violations\n",
              static_cast<int>(rows.size()), report.failed());
  return report.all_passed() ? kExitOk : kExitValidation;
}

struct AxiomsArgs {
  std::string data, layout, out;
  std::optional<int> k;
  int datasets = 100;
  std::uint64_t seed = tailclust::kDefaultSeed;
};

int run_validate_axioms(const AxiomsArgs& a) {
  tailclust::Report report;
  ordered_json manifest = base_manifest("validate-axioms", a.seed);

  if (!a.data.empty()) {
    if (!a.k) throw std::invalid_argument("--data requires --k");
    const tailclust::Dataset ds =
        tailclust::io::load_dataset(a.data, a.layout);
    tailclust::TailParams{*a.k, std::nullopt}.validate(ds.n());
    report = tailclust::axiom_suite(tailclust::rank_matrix(ds.values),
                                    ds.layout, *a.k, a.seed);
    manifest["data"] = a.data;
    manifest["layout"] = a.layout;
    manifest["k"] = *a.k;
  } else {
    // Random sweep: independent uniform datasets with random shapes,
    // layouts, and k, one suite each.
    for (int t = 0; t < a.datasets; ++t) {
      tailclust::CounterRng rng(a.seed, 0x5eed0000ULL + static_cast<std::uint64_t>(t));
      const int n = 20 + static_cast<int>(rng.next_u64() % 81);
      const int q = 2 + static_cast<int>(rng.next_u64() % 9);
      const int k = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n));
      tailclust::Matrix<double> values(static_cast<std::size_t>(n),
                                       static_cast<std::size_t>(q));
      for (int i = 0; i < n; ++i)
        for (int c = 0; c < q; ++c)
          values(static_cast<std::size_t>(i), static_cast<std::size_t>(c)) =
              rng.next_double();
      tailclust::GroupLayout layout;
      for (int c = 0; c < q; ++c) {
        if (layout.groups.empty() || rng.next_u64() % 2 == 0)
          layout.groups.push_back({c});
        else
          layout.groups.back().push_back(c);
      }
      const tailclust::Report one = tailclust::axiom_suite(
          tailclust::rank_matrix(values), layout, k,
          a.seed + static_cast<std::uint64_t>(t));
      for (const auto& c : one.checks)
        report.checks.push_back({"dataset " + std::to_string(t + 1) + ": " +
                                     c.name,
                                 c.passed, c.detail});
    }
    manifest["datasets"] = a.datasets;
  }

  prepare_out_dir(a.out);
  tailclust::io::save_report_csv(report, join(a.out, "report.csv"));
  tailclust::io::save_report_json(report, join(a.out, "summary.json"));
  manifest["outputs"] = {"report.csv", "summary.json"};
  tailclust::io::save_json(manifest, join(a.out, "manifest.json"));
  std::printf("%d checks, %d failures\n",
              static_cast<int>(report.checks.size()), report.failed());
  return report.all_passed() ? kExitOk : kExitValidation;
}

struct CoherenceArgs {
  std::string family, mother_grid, child_grid, out;
  std::uint64_t seed = tailclust::kDefaultSeed;
};

int run_validate_coherence(const CoherenceArgs& a) {
  const tailclust::ModelFamily family = tailclust::parse_family(a.family);
  const std::vector<double> mothers =
      a.mother_grid.empty() ? tailclust::default_mother_grid(family)
                            : tailclust::io::parse_grid(a.mother_grid);
  const std::vector<double> children =
      a.child_grid.empty() ? tailclust::default_child_grid(family)
                           : tailclust::io::parse_grid(a.child_grid);
  const tailclust::Report report =
      tailclust::coherence_levelsets(family, mothers, children);

  prepare_out_dir(a.out);
  tailclust::io::save_report_csv(report, join(a.out, "report.csv"));
  tailclust::io::save_report_json(report, join(a.out, "summary.json"));
  ordered_json manifest = base_manifest("validate-coherence", a.seed);
  manifest["family"] = a.family;
  manifest["mother_grid_points"] = mothers.size();
  manifest["child_grid_points"] = children.size();
  manifest["outputs"] = {"report.csv", "summary.json"};
  tailclust::io::save_json(manifest, join(a.out, "manifest.json"));
  std::printf("%d checks, %d failures\n",
              static_cast<int>(report.checks.size()), report.failed());
  return report.all_passed() ? kExitOk : kExitValidation;
}

// Turns "--config FILE" into explicit option tokens before parsing, so a
// plain key=value file behaves exactly like command-line arguments while
// options given on the command line keep precedence.  A key named "x"
// supplies "--x"; blank lines and lines starting with '#' or ';' are
// ignored; values may be wrapped in single or double quotes.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size())
      path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0)
      path = args[i].substr(9);
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);

  auto trim = [](std::string s) {
    const char* ws = " \t\r";
    const std::size_t a = s.find_first_not_of(ws);
    if (a == std::string::npos) return std::string();
    const std::size_t b = s.find_last_not_of(ws);
    return s.substr(a, b - a + 1);
  };
  auto given = [&args](const std::string& flag) {
    const std::string prefix = flag + "=";
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) {
                         return a == flag || a.rfind(prefix, 0) == 0;
                       });
  };

  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw tailclust::io::ValidationError("config line is not key=value: " +
                                           line);
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw tailclust::io::ValidationError("config line has an empty key: " +
                                           line);
    if (value.size() >= 2 &&
        ((value.front() == '"' && value.back() == '"') ||
         (value.front() == '\'' && value.back() == '\'')))
      value = value.substr(1, value.size() - 2);
    if (key == "config") continue;
    const std::string flag = "--" + key;
    if (!given(flag)) {
      args.push_back(flag);
      args.push_back(value);
    }
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tail dependence estimation and variable clustering"};
  app.require_subcommand(1);
  std::string config_sink;  // consumed before parsing; see expand_config

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "draw a synthetic dataset from a model spec");
  simulate->add_option("--model", sim.model, "model spec JSON")->required();
  simulate->add_option("--n", sim.n, "number of rows")->required();
  simulate->add_option("--seed", sim.seed, "random seed");
  simulate->add_option("--out", sim.out, "output directory")->required();
  simulate->add_option("--config", config_sink,
                  "key=value defaults file; command line wins");

  SecoArgs seco;
  CLI::App* seco_cmd = app.add_subcommand(
      "seco", "estimate the normalized pairwise excess matrix");
  seco_cmd->add_option("--data", seco.data, "dataset CSV")->required();
  seco_cmd->add_option("--layout", seco.layout, "group layout JSON")->required();
  seco_cmd->add_option("--k", seco.k, "number of tail exceedances")->required();
  seco_cmd->add_option("--threads", seco.threads, "worker threads");
  seco_cmd->add_option("--seed", seco.seed, "random seed (recorded only)");
  seco_cmd->add_option("--out", seco.out, "output directory")->required();
  seco_cmd->add_option("--config", config_sink,
                  "key=value defaults file; command line wins");

  ClusterArgs clus;
  CLI::App* cluster = app.add_subcommand(
      "cluster", "partition groups from a matrix file");
  cluster->add_option("--matrix", clus.matrix, "matrix CSV")->required();
  cluster->add_option("--sidecar", clus.sidecar, "matrix JSON sidecar");
  cluster->add_option("--method", clus.method,
                      "caice, hclust or kmedoids")->required();
  double tau_val = 0.0;
  CLI::Option* tau_opt =
      cluster->add_option("--tau", tau_val, "threshold for caice");
  int K_val = 0;
  CLI::Option* K_opt =
      cluster->add_option("--K", K_val, "cluster count for baselines");
  cluster->add_option("--linkage", clus.linkage,
                      "average, single or complete");
  cluster->add_option("--seed", clus.seed, "random seed for kmedoids");
  cluster->add_option("--out", clus.out, "output directory")->required();
  cluster->add_option("--config", config_sink,
                  "key=value defaults file; command line wins");

  SelectTauArgs sel;
  CLI::App* select_tau = app.add_subcommand(
      "select-tau", "sweep thresholds and pick the best partition");
  select_tau->add_option("--data", sel.data, "dataset CSV")->required();
  select_tau->add_option("--layout", sel.layout, "group layout JSON")->required();
  select_tau->add_option("--matrix", sel.matrix, "precomputed matrix CSV");
  select_tau->add_option("--sidecar", sel.sidecar, "matrix JSON sidecar");
  select_tau->add_option("--k", sel.k,
                         "tail exceedances for the matrix (if no --matrix)");
  select_tau->add_option("--k-loss", sel.k_loss,
                         "tail exceedances for scoring partitions");
  select_tau->add_option("--grid", sel.grid, "threshold grid start:step:end");
  select_tau->add_option("--threads", sel.threads, "worker threads");
  select_tau->add_option("--seed", sel.seed, "random seed (recorded only)");
  select_tau->add_option("--out", sel.out, "output directory")->required();
  select_tau->add_option("--config", config_sink,
                  "key=value defaults file; command line wins");

  SilhouetteArgs sil;
  CLI::App* silhouette = app.add_subcommand(
      "silhouette", "score a partition or pick a cluster count");
  silhouette->add_option("--matrix", sil.matrix, "matrix CSV")->required();
  silhouette->add_option("--sidecar", sil.sidecar, "matrix JSON sidecar");
  silhouette->add_option("--partition", sil.partition, "partition JSON");
  silhouette->add_option("--k-range", sil.k_range,
                         "candidate cluster counts start:step:end");
  silhouette->add_option("--method", sil.method, "hclust or kmedoids");
  silhouette->add_option("--linkage", sil.linkage,
                         "average, single or complete");
  silhouette->add_option("--seed", sil.seed, "random seed for kmedoids");
  silhouette->add_option("--out", sil.out, "output directory")->required();
  silhouette->add_option("--config", config_sink,
                  "key=value defaults file; command line wins");

  AriArgs ari_args;
  CLI::App* ari_cmd = app.add_subcommand(
      "ari", "adjusted Rand index between two partitions");
  ari_cmd->add_option("--p1", ari_args.p1, "first partition JSON")->required();
  ari_cmd->add_option("--p2", ari_args.p2, "second partition JSON")->required();
  ari_cmd->add_option("--seed", ari_args.seed, "random seed (recorded only)");
  ari_cmd->add_option("--out", ari_args.out, "output directory (optional)");
  ari_cmd->add_option("--config", config_sink,
                  "key=value defaults file; command line wins");

  CLI::App* validate = app.add_subcommand("validate", "validation suites");
  validate->require_subcommand(1);

  BoundsArgs bounds;
  CLI::App* v_bounds = validate->add_subcommand(
      "bounds", "estimator saturation experiment on independent noise");
  v_bounds->add_option("--n-grid", bounds.n_grid, "sample sizes start:step:end");
  v_bounds->add_option("--exponent", bounds.exponent,
                       "columns grow as ceil(n^exponent)");
  v_bounds->add_option("--k", bounds.k, "tail exceedances");
  v_bounds->add_option("--m", bounds.m, "block length");
  v_bounds->add_option("--threads", bounds.threads, "worker threads");
  v_bounds->add_option("--seed", bounds.seed, "random seed");
  v_bounds->add_option("--out", bounds.out, "output directory")->required();
  v_bounds->add_option("--config", config_sink,
                  "key=value defaults file; command line wins");

  AxiomsArgs axioms;
  CLI::App* v_axioms = validate->add_subcommand(
      "axioms", "structural properties of the estimators");
  v_axioms->add_option("--data", axioms.data, "dataset CSV");
  v_axioms->add_option("--layout", axioms.layout, "group layout JSON");
  v_axioms->add_option("--k", axioms.k, "tail exceedances");
  v_axioms->add_option("--datasets", axioms.datasets,
                       "random datasets to sweep when no --data is given");
  v_axioms->add_option("--seed", axioms.seed, "random seed");
  v_axioms->add_option("--out", axioms.out, "output directory")->required();
  v_axioms->add_option("--config", config_sink,
                  "key=value defaults file; command line wins");

  CoherenceArgs coh;
  CLI::App* v_coherence = validate->add_subcommand(
      "coherence", "monotonicity of the closed-form model excess");
  v_coherence->add_option("--family", coh.family,
                          "logistic or husler-reiss")->required();
  v_coherence->add_option("--mother-grid", coh.mother_grid,
                          "mother parameters start:step:end");
  v_coherence->add_option("--child-grid", coh.child_grid,
                          "child parameters start:step:end");
  v_coherence->add_option("--seed", coh.seed, "random seed (recorded only)");
  v_coherence->add_option("--out", coh.out, "output directory")->required();
  v_coherence->add_option("--config", config_sink,
                  "key=value defaults file; command line wins");

  AriArgs vari;
  CLI::App* v_ari = validate->add_subcommand(
      "ari", "adjusted Rand index as a validation check");
  v_ari->add_option("--p1", vari.p1, "first partition JSON")->required();
  v_ari->add_option("--p2", vari.p2, "second partition JSON")->required();
  v_ari->add_option("--seed", vari.seed, "random seed (recorded only)");
  v_ari->add_option("--out", vari.out, "output directory (optional)");
  v_ari->add_option("--config", config_sink,
                  "key=value defaults file; command line wins");

  try {
    if (argc > 0) app.name(argv[0]);
    std::vector<std::string> args(argv + std::min(argc, 1), argv + argc);
    args = expand_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
    if (*simulate) return run_simulate(sim);
    if (*seco_cmd) return run_seco(seco);
    if (*cluster) {
      if (tau_opt->count()) clus.tau = tau_val;
      if (K_opt->count()) clus.K = K_val;
      return run_cluster(clus);
    }
    if (*select_tau) return run_select_tau(sel);
    if (*silhouette) return run_silhouette(sil);
    if (*ari_cmd) return run_ari(ari_args, "ari");
    if (*validate) {
      if (*v_bounds) return run_validate_bounds(bounds);
      if (*v_axioms) return run_validate_axioms(axioms);
      if (*v_coherence) return run_validate_coherence(coh);
      if (*v_ari) return run_ari(vari, "validate-ari");
    }
    std::fprintf(stderr, "no subcommand given\n");
    return kExitUsage;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::FileError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitIo;
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitUsage;
  } catch (const tailclust::io::ValidationError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitValidation;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitUsage;
  } catch (const std::logic_error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitIo;
  }
}
