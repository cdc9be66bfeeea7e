// Command-line front end: dataset generation, subdata selection, sweep and
// timing experiments, and SVG report rendering. Every command echoes its
// resolved configuration and master seed into a .meta.json sidecar so runs
// can be audited and reproduced bit-for-bit.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "aoss/aoss.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out)
    throw aoss::ValidationError("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
}

fs::path prepare_output_dir(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

/// Peeks at the CSV header to decide whether a response column is present.
std::optional<std::string> detect_response(const std::string& path,
                                           const std::string& wanted) {
  std::ifstream in(path);
  if (!in) throw aoss::ValidationError("input file not found: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw aoss::ParseError(path + ": empty file, expected a header row");
  for (const std::string& name : aoss::split_csv_record(line))
    if (name == wanted) return wanted;
  return std::nullopt;
}

std::vector<aoss::Algorithm> parse_algorithms(const std::vector<std::string>& names) {
  std::vector<aoss::Algorithm> out;
  out.reserve(names.size());
  for (const std::string& s : names) out.push_back(aoss::algorithm_from_string(s));
  return out;
}

std::vector<aoss::Index> to_indices(const std::vector<long long>& ks) {
  return std::vector<aoss::Index>(ks.begin(), ks.end());
}

// ---------------------------------------------------------------------------
// generate

struct GenerateOpts {
  int case_id = 1;
  long long n = 1000;
  std::uint64_t seed = 0;
  std::string output_dir = ".";
};

int cmd_generate(const GenerateOpts& o) {
  const fs::path dir = prepare_output_dir(o.output_dir);
  const aoss::TrueModelSpec tm =
      aoss::gen_true_model(aoss::derive_seed(o.seed, "beta"));
  const aoss::Matrix x = aoss::gen_covariates(aoss::CaseSpec{
      o.case_id, static_cast<aoss::Index>(o.n), 7,
      aoss::derive_seed(o.seed, "covariates")});
  auto [y, mu] = aoss::gen_response(x, tm, aoss::derive_seed(o.seed, "noise"));

  aoss::DataMatrix d;
  d.X = x;
  d.y = std::move(y);
  for (int j = 1; j <= 7; ++j) d.column_names.push_back("x" + std::to_string(j));
  d.response_name = "y";
  aoss::write_dataset_csv((dir / "dataset.csv").string(), d);

  json meta{{"command", "generate"},
            {"case", o.case_id},
            {"n", o.n},
            {"p", 7},
            {"seed", o.seed},
            {"rng", aoss::kRngDescription},
            {"files", {"dataset.csv"}},
            {"truth",
             {{"beta", std::vector<double>(tm.beta.begin(), tm.beta.end())},
              {"beta0", tm.beta0},
              {"sigma", tm.sigma},
              {"active_columns", json::array({"x1", "x2", "x3", "x4"})}}}};
  write_json_file(dir / "dataset.meta.json", meta);
  std::cout << "wrote " << (dir / "dataset.csv").string() << " (" << o.n
            << " rows)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// select

struct SelectOpts {
  std::string input;
  std::string output_dir = ".";
  std::string algorithm = "alg1";
  long long k = 0;
  int t_rounds = 10;
  double pool_multiplier = 2.0;
  std::uint64_t seed = 0;
  std::string response = "y";
  std::string alg2_gain = "inverse-gram";
};

int cmd_select(const SelectOpts& o) {
  const fs::path dir = prepare_output_dir(o.output_dir);
  const aoss::DataMatrix d =
      aoss::load_csv(o.input, detect_response(o.input, o.response));
  const aoss::SelectionResult sel = aoss::select_subdata(
      d, static_cast<aoss::Index>(o.k), aoss::algorithm_from_string(o.algorithm),
      o.t_rounds, o.pool_multiplier, aoss::derive_seed(o.seed, "select"),
      aoss::alg2_gain_from_string(o.alg2_gain));
  aoss::write_indices_csv((dir / "indices.csv").string(), sel);

  json report = aoss::selection_to_json(sel);
  report["command"] = "select";
  report["input"] = o.input;
  report["t_rounds"] = o.t_rounds;
  report["pool_multiplier"] = o.pool_multiplier;
  report["alg2_gain"] = o.alg2_gain;
  report["seed"] = o.seed;
  report["rng"] = aoss::kRngDescription;
  report["files"] = {"indices.csv"};
  write_json_file(dir / "selection.json", report);
  std::cout << "selected " << sel.indices.size() << " rows with " << o.algorithm
            << " in " << sel.elapsed_seconds << " s\n";
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepOpts {
  std::vector<int> cases;
  long long n = 10000;
  long long n_test = 500;
  std::string input;  // real-data CSV; empty = synthetic
  std::string response = "y";
  double test_fraction = 0.10;
  std::vector<std::string> algorithms = {"levss", "alg1", "alg2"};
  std::vector<long long> ks = {300, 500, 700, 1000};
  int replicates = 100;
  int t_rounds = 10;
  double pool_multiplier = 2.0;
  std::string search = "all-subset";
  std::string alg2_gain = "inverse-gram";
  std::uint64_t seed = 0;
  std::string output_dir = ".";
};

json sweep_config_json(const SweepOpts& o) {
  return json{{"cases", o.cases},
              {"n", o.n},
              {"n_test", o.n_test},
              {"input", o.input},
              {"response", o.response},
              {"test_fraction", o.test_fraction},
              {"algorithms", o.algorithms},
              {"k", o.ks},
              {"replicates", o.replicates},
              {"t_rounds", o.t_rounds},
              {"pool_multiplier", o.pool_multiplier},
              {"search", o.search},
              {"alg2_gain", o.alg2_gain},
              {"seed", o.seed},
              {"rng", aoss::kRngDescription}};
}

int cmd_sweep(const SweepOpts& o) {
  if (!o.input.empty() && !o.cases.empty())
    throw aoss::ValidationError(
        "sweep: --input (real data) and --case (synthetic) are mutually exclusive");

  const fs::path dir = prepare_output_dir(o.output_dir);
  aoss::SweepConfig cfg;
  cfg.cases = o.cases.empty() ? std::vector<int>{1} : o.cases;
  cfg.n = static_cast<aoss::Index>(o.n);
  cfg.n_test = static_cast<aoss::Index>(o.n_test);
  cfg.real_data = o.input;
  cfg.response_column = o.response;
  cfg.test_fraction = o.test_fraction;
  cfg.algorithms = parse_algorithms(o.algorithms);
  cfg.k_values = to_indices(o.ks);
  cfg.replicates = o.replicates;
  cfg.t_rounds = o.t_rounds;
  cfg.pool_multiplier = o.pool_multiplier;
  cfg.search = aoss::search_from_string(o.search);
  cfg.alg2_gain = aoss::alg2_gain_from_string(o.alg2_gain);
  cfg.seed = o.seed;

  const aoss::SweepSummary summary = aoss::run_sweep(cfg);
  aoss::write_summary_csv((dir / "sweep.csv").string(), summary);

  json meta{{"command", "sweep"},
            {"config", sweep_config_json(o)},
            {"files", {"sweep.csv"}},
            {"diagnostics", summary.diagnostics}};
  write_json_file(dir / "sweep.meta.json", meta);
  std::cout << "wrote " << (dir / "sweep.csv").string() << " ("
            << summary.cells.size() << " cells, " << summary.diagnostics.size()
            << " diagnostics)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// bench

struct BenchOpts {
  long long n = 5000;
  long long p = 7;
  std::vector<long long> ks = {300, 1000};
  std::vector<std::string> algorithms = {"levss", "alg1", "alg2"};
  int runs = 5;
  std::uint64_t seed = 0;
  std::string output_dir = ".";
};

int cmd_bench(const BenchOpts& o) {
  const fs::path dir = prepare_output_dir(o.output_dir);
  const aoss::BenchTable table = aoss::bench_timing(
      static_cast<aoss::Index>(o.n), static_cast<aoss::Index>(o.p),
      to_indices(o.ks), parse_algorithms(o.algorithms), o.runs, o.seed);
  aoss::write_bench_csv((dir / "bench.csv").string(), table);

  json meta{{"command", "bench"},
            {"n", o.n},
            {"p", o.p},
            {"k", o.ks},
            {"algorithms", o.algorithms},
            {"runs", o.runs},
            {"seed", o.seed},
            {"rng", aoss::kRngDescription},
            {"files", {"bench.csv"}}};
  write_json_file(dir / "bench.meta.json", meta);
  std::cout << "wrote " << (dir / "bench.csv").string() << " ("
            << table.cells.size() << " cells)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// report

struct ReportOpts {
  std::string input;
  std::string output_dir = ".";
};

int cmd_report(const ReportOpts& o) {
  const fs::path dir = prepare_output_dir(o.output_dir);
  const aoss::SweepSummary summary = aoss::read_summary_csv(o.input);
  if (summary.cells.empty())
    throw aoss::ValidationError("report: sweep summary has no cells");

  // One series per (case, algorithm), points ordered by k.
  std::map<std::pair<int, std::string>, aoss::Series> acc_series, mspe_series;
  bool multi_case = false;
  const int first_case = summary.cells.front().case_id;
  for (const aoss::SweepCell& c : summary.cells)
    if (c.case_id != first_case) multi_case = true;
  for (const aoss::SweepCell& c : summary.cells) {
    const std::string alg = aoss::to_string(c.algorithm);
    const std::string label =
        multi_case ? "case " + std::to_string(c.case_id) + " " + alg : alg;
    auto key = std::make_pair(c.case_id, alg);
    aoss::Series& sa = acc_series[key];
    aoss::Series& sm = mspe_series[key];
    sa.label = sm.label = label;
    sa.xs.push_back(static_cast<double>(c.k));
    sa.ys.push_back(c.accuracy);
    sm.xs.push_back(static_cast<double>(c.k));
    sm.ys.push_back(std::log10(std::max(c.mean_mspe, 1e-300)));
  }
  auto ordered = [](std::map<std::pair<int, std::string>, aoss::Series>& m) {
    std::vector<aoss::Series> v;
    for (auto& [key, s] : m) {
      std::vector<std::size_t> idx(s.xs.size());
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      std::sort(idx.begin(), idx.end(),
                [&](std::size_t a, std::size_t b) { return s.xs[a] < s.xs[b]; });
      aoss::Series sorted;
      sorted.label = s.label;
      for (std::size_t i : idx) {
        sorted.xs.push_back(s.xs[i]);
        sorted.ys.push_back(s.ys[i]);
      }
      v.push_back(std::move(sorted));
    }
    return v;
  };

  aoss::PlotSpec acc_spec;
  acc_spec.title = "Model-selection accuracy vs subdata size";
  acc_spec.x_label = "k";
  acc_spec.y_label = "accuracy";
  aoss::write_svg((dir / "accuracy_vs_k.svg").string(), acc_spec,
                  ordered(acc_series));

  aoss::PlotSpec mspe_spec;
  mspe_spec.title = "Prediction error vs subdata size";
  mspe_spec.x_label = "k";
  mspe_spec.y_label = "log10 MSPE";
  aoss::write_svg((dir / "mspe_vs_k.svg").string(), mspe_spec,
                  ordered(mspe_series));

  json meta{{"command", "report"},
            {"input", o.input},
            {"files", {"accuracy_vs_k.svg", "mspe_vs_k.svg"}}};
  write_json_file(dir / "report.meta.json", meta);
  std::cout << "wrote " << (dir / "accuracy_vs_k.svg").string() << " and "
            << (dir / "mspe_vs_k.svg").string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Subdata selection for big-data linear regression: pick k rows that "
      "keep the information matrix strong, then run BIC model selection on "
      "the subdata only."};
  app.require_subcommand(1);
  app.set_config("--config", "", "Key-value config file; command-line flags win");

  const std::vector<std::string> algorithm_names = {"levss", "alg1", "alg2",
                                                    "random"};

  GenerateOpts gen;
  CLI::App* cgen = app.add_subcommand("generate", "Write a synthetic dataset CSV");
  cgen->add_option("--case", gen.case_id, "Covariate scenario (1..6)")
      ->check(CLI::Range(1, 6));
  cgen->add_option("--n", gen.n, "Number of rows")->check(CLI::PositiveNumber);
  cgen->add_option("--seed", gen.seed, "Master seed");
  cgen->add_option("--output-dir", gen.output_dir, "Output directory");

  SelectOpts sel;
  CLI::App* csel = app.add_subcommand("select", "Select subdata rows from a CSV");
  csel->add_option("--input", sel.input, "Input dataset CSV")->required();
  csel->add_option("--output-dir", sel.output_dir, "Output directory");
  csel->add_option("--algorithm", sel.algorithm, "Selection strategy")
      ->check(CLI::IsMember(algorithm_names));
  csel->add_option("--k", sel.k, "Subdata size")->required()
      ->check(CLI::PositiveNumber);
  csel->add_option("--t-rounds", sel.t_rounds, "Leverage selection rounds")
      ->check(CLI::PositiveNumber);
  csel->add_option("--pool-multiplier", sel.pool_multiplier,
                   "Elimination pool size as a multiple of k");
  csel->add_option("--seed", sel.seed, "Master seed");
  csel->add_option("--response", sel.response,
                   "Response column to exclude from selection, if present");
  csel->add_option("--alg2-gain", sel.alg2_gain, "Removal-gain variant for alg2")
      ->check(CLI::IsMember({"inverse-gram", "squared-gram"}));

  SweepOpts swp;
  CLI::App* cswp = app.add_subcommand(
      "sweep", "Accuracy/MSPE sweep over cases, algorithms and k");
  cswp->add_option("--case", swp.cases, "Covariate scenarios (repeatable)")
      ->check(CLI::Range(1, 6));
  cswp->add_option("--n", swp.n, "Rows per synthetic replicate")
      ->check(CLI::PositiveNumber);
  cswp->add_option("--n-test", swp.n_test, "Test rows per synthetic replicate")
      ->check(CLI::PositiveNumber);
  cswp->add_option("--input", swp.input, "Real dataset CSV (disables --case)");
  cswp->add_option("--response", swp.response, "Response column name");
  cswp->add_option("--test-fraction", swp.test_fraction,
                   "Held-out fraction for real data");
  cswp->add_option("--algorithm", swp.algorithms, "Strategies (repeatable)")
      ->check(CLI::IsMember(algorithm_names));
  cswp->add_option("--k", swp.ks, "Subdata sizes (repeatable)")
      ->check(CLI::PositiveNumber);
  cswp->add_option("--replicates", swp.replicates, "Replicates per case")
      ->check(CLI::PositiveNumber);
  cswp->add_option("--t-rounds", swp.t_rounds, "Leverage selection rounds")
      ->check(CLI::PositiveNumber);
  cswp->add_option("--pool-multiplier", swp.pool_multiplier,
                   "Elimination pool size as a multiple of k");
  cswp->add_option("--search", swp.search, "Model search method")
      ->check(CLI::IsMember({"all-subset", "forward"}));
  cswp->add_option("--alg2-gain", swp.alg2_gain, "Removal-gain variant for alg2")
      ->check(CLI::IsMember({"inverse-gram", "squared-gram"}));
  cswp->add_option("--seed", swp.seed, "Master seed");
  cswp->add_option("--output-dir", swp.output_dir, "Output directory");

  BenchOpts ben;
  CLI::App* cben = app.add_subcommand("bench", "Time the selection strategies");
  cben->add_option("--n", ben.n, "Dataset rows")->check(CLI::PositiveNumber);
  cben->add_option("--p", ben.p, "Predictor count")->check(CLI::PositiveNumber);
  cben->add_option("--k", ben.ks, "Subdata sizes (repeatable)")
      ->check(CLI::PositiveNumber);
  cben->add_option("--algorithm", ben.algorithms, "Strategies (repeatable)")
      ->check(CLI::IsMember(algorithm_names));
  cben->add_option("--runs", ben.runs, "Measured runs per cell (>= 5)")
      ->check(CLI::PositiveNumber);
  cben->add_option("--seed", ben.seed, "Master seed");
  cben->add_option("--output-dir", ben.output_dir, "Output directory");

  ReportOpts rep;
  CLI::App* crep = app.add_subcommand("report", "Render SVG plots from a sweep CSV");
  crep->add_option("--input", rep.input, "Sweep summary CSV")->required();
  crep->add_option("--output-dir", rep.output_dir, "Output directory");

  try {
    app.parse(argc, argv);
    if (cgen->parsed()) return cmd_generate(gen);
    if (csel->parsed()) return cmd_select(sel);
    if (cswp->parsed()) return cmd_sweep(swp);
    if (cben->parsed()) return cmd_bench(ben);
    if (crep->parsed()) return cmd_report(rep);
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const aoss::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const aoss::PoolTooSmallError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const aoss::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const aoss::MissingColumnError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const aoss::TooManyPredictorsError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const aoss::DimensionMismatchError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const aoss::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
