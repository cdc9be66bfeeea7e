#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aoss/csv.hpp"
#include "aoss/error.hpp"
#include "aoss/modelsel.hpp"
#include "aoss/preprocess.hpp"
#include "aoss/rng.hpp"
#include "aoss/simgen.hpp"
#include "aoss/subselect.hpp"
#include "aoss/types.hpp"

namespace aoss {

/// One replicate's verdict: which model the subdata search picked, which one
/// it should have picked, the prediction error on the held-out set and how
/// long the subdata selection took.
struct ReplicateOutcome {
  ModelId selected_model;
  ModelId true_model;
  double mspe = 0.0;
  double select_seconds = 0.0;
};

/// Full experiment description. Synthetic sweeps draw the listed cases;
/// setting `real_data` switches to a seeded train/test split of that CSV
/// (cases are then ignored and the cell case id is 0).
struct SweepConfig {
  std::vector<int> cases = {1};
  Index n = 10000;
  Index p = 7;
  Index n_test = 500;
  std::string real_data;
  std::string response_column = "y";
  double test_fraction = 0.10;
  std::vector<Algorithm> algorithms = {Algorithm::kLevss, Algorithm::kAlg1,
                                       Algorithm::kAlg2};
  std::vector<Index> k_values = {300, 500, 700, 1000};
  int replicates = 100;
  int t_rounds = 10;
  double pool_multiplier = 2.0;
  SearchMethod search = SearchMethod::kAllSubset;
  Alg2Gain alg2_gain = Alg2Gain::kInverseGram;
  std::uint64_t seed = 0;
};

/// Aggregated results for one (case, algorithm, k) cell. `replicates` counts
/// the successful ones; failed replicates are excluded from the averages and
/// reported in `failures`.
struct SweepCell {
  int case_id = 0;
  Algorithm algorithm = Algorithm::kLevss;
  Index k = 0;
  int replicates = 0;
  int failures = 0;
  double accuracy = 0.0;
  double mean_mspe = 0.0;
  double mean_seconds = 0.0;
};

struct SweepSummary {
  std::vector<SweepCell> cells;
  std::vector<std::string> diagnostics;
};

/// Fraction of outcomes whose selected model equals the true model exactly.
inline double accuracy(const std::vector<ReplicateOutcome>& outcomes) {
  if (outcomes.empty()) throw ValidationError("accuracy: empty outcome list");
  std::size_t hits = 0;
  for (const ReplicateOutcome& o : outcomes)
    if (o.selected_model == o.true_model) ++hits;
  return static_cast<double>(hits) / static_cast<double>(outcomes.size());
}

/// Mean squared prediction error of `fit` against the test targets:
/// (1/n_t) sum_i (mu_i - beta0 - x_i' beta)^2. For synthetic data the target
/// is the latent conditional mean; for real data the observed test response
/// stands in for it.
inline double mspe(const Vector& test_mu, const Matrix& test_x,
                   const FitResult& fit) {
  if (test_mu.size() != test_x.rows())
    throw DimensionMismatchError("mspe: target and test rows disagree");
  if (fit.beta.size() != static_cast<Index>(fit.model.predictors.size()))
    throw DimensionMismatchError("mspe: coefficient count != model size");
  for (Index v : fit.model.predictors)
    if (v < 0 || v >= test_x.cols())
      throw DimensionMismatchError("mspe: model predictor outside test matrix");
  Vector pred = Vector::Constant(test_x.rows(), fit.intercept);
  for (std::size_t j = 0; j < fit.model.predictors.size(); ++j)
    pred += fit.beta(static_cast<Index>(j)) * test_x.col(fit.model.predictors[j]);
  return (test_mu - pred).squaredNorm() / static_cast<double>(test_mu.size());
}

namespace detail {

inline DataMatrix take_rows(const DataMatrix& d, const std::vector<Index>& rows) {
  DataMatrix out;
  out.X.resize(static_cast<Index>(rows.size()), d.cols());
  if (d.y) out.y = Vector(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.X.row(static_cast<Index>(i)) = d.X.row(rows[i]);
    if (d.y) (*out.y)(static_cast<Index>(i)) = (*d.y)(rows[i]);
  }
  out.column_names = d.column_names;
  out.response_name = d.response_name;
  return out;
}

inline Vector means_for_model(const Vector& x_means, const ModelId& model) {
  Vector m(static_cast<Index>(model.predictors.size()));
  for (std::size_t j = 0; j < model.predictors.size(); ++j)
    m(static_cast<Index>(j)) = x_means(model.predictors[j]);
  return m;
}

/// Running totals for one sweep cell.
struct CellAccum {
  int ok = 0;
  int fail = 0;
  int hits = 0;
  double mspe_sum = 0.0;
  double sec_sum = 0.0;
};

inline SweepCell finish_cell(int case_id, Algorithm a, Index k,
                             const CellAccum& acc) {
  SweepCell cell;
  cell.case_id = case_id;
  cell.algorithm = a;
  cell.k = k;
  cell.replicates = acc.ok;
  cell.failures = acc.fail;
  if (acc.ok > 0) {
    cell.accuracy = static_cast<double>(acc.hits) / acc.ok;
    cell.mean_mspe = acc.mspe_sum / acc.ok;
    cell.mean_seconds = acc.sec_sum / acc.ok;
  }
  return cell;
}

constexpr std::size_t kMaxDiagnostics = 50;

inline void note_failure(SweepSummary& summary, std::string message) {
  if (summary.diagnostics.size() < kMaxDiagnostics)
    summary.diagnostics.push_back(std::move(message));
  else if (summary.diagnostics.size() == kMaxDiagnostics)
    summary.diagnostics.push_back("further failure messages suppressed");
}

/// Selects subdata on the raw rows, fits every candidate on the matching
/// rows of the centralized data and returns the outcome against `truth`.
/// `test_target` is the latent mean (synthetic) or observed response (real).
inline ReplicateOutcome evaluate_one(const DataMatrix& raw,
                                     const DataMatrix& centered,
                                     const CenterMap& cm, const ModelId& truth,
                                     const Vector& test_target,
                                     const Matrix& test_x, Index k,
                                     Algorithm a, const SweepConfig& cfg,
                                     std::uint64_t select_seed) {
  SelectionResult sel = select_subdata(raw, k, a, cfg.t_rounds,
                                       cfg.pool_multiplier, select_seed,
                                       cfg.alg2_gain);
  DataMatrix sub = take_rows(centered, sel.indices);
  CandidateSetReport report = cfg.search == SearchMethod::kAllSubset
                                  ? all_subset_bic(sub)
                                  : forward_bic(sub);
  FitResult fit = selected_fit(report);
  fit.intercept = adjusted_intercept(cm.y_mean.value_or(0.0),
                                     means_for_model(cm.x_means, fit.model),
                                     fit.beta);
  ReplicateOutcome out;
  out.selected_model = report.selected;
  out.true_model = truth;
  out.mspe = mspe(test_target, test_x, fit);
  out.select_seconds = sel.elapsed_seconds;
  if (!std::isfinite(out.mspe))
    throw ValidationError("replicate produced a non-finite MSPE");
  return out;
}

inline void validate_common(const SweepConfig& cfg) {
  if (cfg.algorithms.empty())
    throw ValidationError("sweep: no algorithms requested");
  if (cfg.k_values.empty()) throw ValidationError("sweep: no k values requested");
  if (cfg.replicates < 1) throw ValidationError("sweep: replicates >= 1 required");
  if (cfg.t_rounds < 1) throw ValidationError("sweep: t_rounds >= 1 required");
}

inline SweepSummary run_real_sweep(const SweepConfig& cfg) {
  const DataMatrix data = load_csv(cfg.real_data, cfg.response_column);
  if (!data.y)
    throw ValidationError("sweep: real dataset is missing the response column");
  if (cfg.test_fraction <= 0.0 || cfg.test_fraction >= 1.0)
    throw ValidationError("sweep: test fraction must lie strictly in (0,1)");
  const Index n = data.rows();
  const Index p = data.cols();
  for (Index k : cfg.k_values)
    if (k <= p)
      throw ValidationError("sweep: every k must exceed the predictor count");
  const Index n_test = std::max<Index>(1, static_cast<Index>(std::llround(
                                              cfg.test_fraction * static_cast<double>(n))));
  if (n - n_test <= p)
    throw ValidationError("sweep: train split too small after holdout");

  SweepSummary summary;
  summary.diagnostics.push_back(
      "real data: observed test response substitutes for the latent mean in MSPE");
  std::vector<CellAccum> accum(cfg.algorithms.size() * cfg.k_values.size());
  auto slot = [&](std::size_t ai, std::size_t ki) -> CellAccum& {
    return accum[ai * cfg.k_values.size() + ki];
  };

  std::vector<Index> order(n);
  for (int r = 0; r < cfg.replicates; ++r) {
    std::iota(order.begin(), order.end(), Index{0});
    Rng rng(derive_seed(cfg.seed, "split", r));
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Index> test_rows(order.begin(), order.begin() + n_test);
    std::vector<Index> train_rows(order.begin() + n_test, order.end());
    std::sort(test_rows.begin(), test_rows.end());
    std::sort(train_rows.begin(), train_rows.end());

    const DataMatrix train = take_rows(data, train_rows);
    const DataMatrix test = take_rows(data, test_rows);
    auto [train_centered, cm] = centralize(train);

    // With no ground truth available, the model the chosen search picks on
    // the full training data serves as the reference.
    ModelId truth;
    try {
      truth = (cfg.search == SearchMethod::kAllSubset
                   ? all_subset_bic(train_centered)
                   : forward_bic(train_centered))
                  .selected;
    } catch (const Error& e) {
      for (std::size_t ai = 0; ai < cfg.algorithms.size(); ++ai)
        for (std::size_t ki = 0; ki < cfg.k_values.size(); ++ki)
          ++slot(ai, ki).fail;
      note_failure(summary, "replicate " + std::to_string(r) +
                                ": reference fit failed: " + e.what());
      continue;
    }

    for (std::size_t ai = 0; ai < cfg.algorithms.size(); ++ai) {
      for (std::size_t ki = 0; ki < cfg.k_values.size(); ++ki) {
        const Algorithm a = cfg.algorithms[ai];
        const Index k = cfg.k_values[ki];
        try {
          ReplicateOutcome out = evaluate_one(
              train, train_centered, cm, truth, *test.y, test.X, k, a, cfg,
              derive_seed(cfg.seed, "select", 0, r, static_cast<int>(a), k));
          CellAccum& acc = slot(ai, ki);
          ++acc.ok;
          acc.hits += out.selected_model == out.true_model ? 1 : 0;
          acc.mspe_sum += out.mspe;
          acc.sec_sum += out.select_seconds;
        } catch (const Error& e) {
          ++slot(ai, ki).fail;
          note_failure(summary, "replicate " + std::to_string(r) + " " +
                                    to_string(a) + " k=" + std::to_string(k) +
                                    ": " + e.what());
        }
      }
    }
  }

  for (std::size_t ai = 0; ai < cfg.algorithms.size(); ++ai)
    for (std::size_t ki = 0; ki < cfg.k_values.size(); ++ki)
      summary.cells.push_back(finish_cell(0, cfg.algorithms[ai],
                                          cfg.k_values[ki], slot(ai, ki)));
  return summary;
}

}  // namespace detail

/// Runs the full sweep grid (cases x algorithms x k x replicates) and
/// aggregates accuracy, MSPE and selection time per cell. Per-replicate
/// failures are counted and excluded from the averages, never hidden. All
/// randomness derives from cfg.seed, so a config reruns bit-identically.
inline SweepSummary run_sweep(const SweepConfig& cfg) {
  detail::validate_common(cfg);
  if (!cfg.real_data.empty()) return detail::run_real_sweep(cfg);

  if (cfg.cases.empty()) throw ValidationError("sweep: no cases requested");
  for (int c : cfg.cases)
    if (c < 1 || c > 6)
      throw ValidationError("sweep: case " + std::to_string(c) +
                            " is not one of 1..6");
  for (Index k : cfg.k_values)
    if (k <= cfg.p)
      throw ValidationError("sweep: every k must exceed the predictor count");
  if (cfg.n_test < 1) throw ValidationError("sweep: n_test >= 1 required");

  SweepSummary summary;
  std::vector<detail::CellAccum> accum(cfg.cases.size() * cfg.algorithms.size() *
                                       cfg.k_values.size());
  auto slot = [&](std::size_t ci, std::size_t ai, std::size_t ki) -> detail::CellAccum& {
    return accum[(ci * cfg.algorithms.size() + ai) * cfg.k_values.size() + ki];
  };

  for (std::size_t ci = 0; ci < cfg.cases.size(); ++ci) {
    const int c = cfg.cases[ci];
    for (int r = 0; r < cfg.replicates; ++r) {
      const TrueModelSpec tm = gen_true_model(derive_seed(cfg.seed, "beta", c, r));
      const Matrix x = gen_covariates(
          CaseSpec{c, cfg.n, static_cast<int>(cfg.p), derive_seed(cfg.seed, "covariates", c, r)});
      auto [y, mu] = gen_response(x, tm, derive_seed(cfg.seed, "noise", c, r));
      const Matrix x_test = gen_covariates(
          CaseSpec{c, cfg.n_test, static_cast<int>(cfg.p), derive_seed(cfg.seed, "test", c, r)});
      const Vector mu_test = true_mean(x_test, tm);

      DataMatrix full;
      full.X = x;
      full.y = std::move(y);
      auto [centered, cm] = centralize(full);
      const ModelId truth{tm.active_set};

      for (std::size_t ai = 0; ai < cfg.algorithms.size(); ++ai) {
        for (std::size_t ki = 0; ki < cfg.k_values.size(); ++ki) {
          const Algorithm a = cfg.algorithms[ai];
          const Index k = cfg.k_values[ki];
          try {
            ReplicateOutcome out = detail::evaluate_one(
                full, centered, cm, truth, mu_test, x_test, k, a, cfg,
                derive_seed(cfg.seed, "select", c, r, static_cast<int>(a), k));
            detail::CellAccum& acc = slot(ci, ai, ki);
            ++acc.ok;
            acc.hits += out.selected_model == out.true_model ? 1 : 0;
            acc.mspe_sum += out.mspe;
            acc.sec_sum += out.select_seconds;
          } catch (const Error& e) {
            ++slot(ci, ai, ki).fail;
            detail::note_failure(summary, "case " + std::to_string(c) +
                                              " replicate " + std::to_string(r) +
                                              " " + to_string(a) + " k=" +
                                              std::to_string(k) + ": " + e.what());
          }
        }
      }
    }
  }

  for (std::size_t ci = 0; ci < cfg.cases.size(); ++ci)
    for (std::size_t ai = 0; ai < cfg.algorithms.size(); ++ai)
      for (std::size_t ki = 0; ki < cfg.k_values.size(); ++ki)
        summary.cells.push_back(detail::finish_cell(
            cfg.cases[ci], cfg.algorithms[ai], cfg.k_values[ki], slot(ci, ai, ki)));
  return summary;
}

/// One benchmark cell: mean wall-clock seconds of select_subdata.
struct BenchCell {
  Algorithm algorithm = Algorithm::kLevss;
  Index k = 0;
  int runs = 0;
  double mean_seconds = 0.0;
};

struct BenchTable {
  Index n = 0;
  Index p = 0;
  std::vector<BenchCell> cells;
};

/// Times select_subdata on one fixed dataset (case 1 covariates) for every
/// (algorithm, k) cell: one unmeasured warm-up run per cell, then `runs`
/// measured runs. The measured runs are interleaved round-robin across the
/// cells so a transient host slowdown spreads over every mean instead of
/// poisoning one cell. Means are wall-clock seconds.
inline BenchTable bench_timing(Index n, Index p, const std::vector<Index>& ks,
                               const std::vector<Algorithm>& algorithms,
                               int runs = 5, std::uint64_t seed = 0) {
  if (runs < 5) throw ValidationError("bench_timing: at least 5 runs per cell");
  if (ks.empty() || algorithms.empty())
    throw ValidationError("bench_timing: empty grid");
  for (Index k : ks)
    if (k <= p) throw ValidationError("bench_timing: every k must exceed p");

  DataMatrix d;
  d.X = gen_covariates(
      CaseSpec{1, n, static_cast<int>(p), derive_seed(seed, "bench-data")});

  BenchTable table;
  table.n = n;
  table.p = p;
  for (Algorithm a : algorithms) {
    for (Index k : ks) {
      BenchCell cell;
      cell.algorithm = a;
      cell.k = k;
      cell.runs = runs;
      table.cells.push_back(cell);
    }
  }
  for (const BenchCell& cell : table.cells)
    select_subdata(d, cell.k, cell.algorithm, 10, 2.0,
                   derive_seed(seed, "bench-warmup"));
  for (int r = 0; r < runs; ++r)
    for (BenchCell& cell : table.cells)
      cell.mean_seconds +=
          select_subdata(d, cell.k, cell.algorithm, 10, 2.0,
                         derive_seed(seed, "bench", static_cast<int>(cell.algorithm), cell.k, r))
              .elapsed_seconds;
  for (BenchCell& cell : table.cells) cell.mean_seconds /= runs;
  return table;
}

/// Sweep summary as CSV, one row per cell.
inline void write_summary_csv(const std::string& path, const SweepSummary& s) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  out << "case,algorithm,k,replicates,failures,accuracy,mean_mspe,mean_seconds\n";
  for (const SweepCell& c : s.cells)
    out << c.case_id << ',' << to_string(c.algorithm) << ',' << c.k << ','
        << c.replicates << ',' << c.failures << ',' << format_double(c.accuracy)
        << ',' << format_double(c.mean_mspe) << ','
        << format_double(c.mean_seconds) << '\n';
}

inline SweepSummary read_summary_csv(const std::string& path) {
  const CsvTable table = read_csv_table(path);
  const std::vector<std::string> expect = {"case",     "algorithm", "k",
                                           "replicates", "failures", "accuracy",
                                           "mean_mspe", "mean_seconds"};
  if (table.header != expect)
    throw ParseError(path + ": unexpected sweep summary header");
  SweepSummary s;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    if (row.size() != expect.size())
      throw ParseError(path + ": row " + std::to_string(i + 2) +
                       " has the wrong field count");
    SweepCell c;
    c.case_id = static_cast<int>(parse_double(row[0]));
    c.algorithm = algorithm_from_string(row[1]);
    c.k = static_cast<Index>(parse_double(row[2]));
    c.replicates = static_cast<int>(parse_double(row[3]));
    c.failures = static_cast<int>(parse_double(row[4]));
    c.accuracy = parse_double(row[5]);
    c.mean_mspe = parse_double(row[6]);
    c.mean_seconds = parse_double(row[7]);
    s.cells.push_back(c);
  }
  return s;
}

/// Benchmark table as CSV, one row per (algorithm, k) cell.
inline void write_bench_csv(const std::string& path, const BenchTable& t) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  out << "algorithm,k,runs,mean_seconds\n";
  for (const BenchCell& c : t.cells)
    out << to_string(c.algorithm) << ',' << c.k << ',' << c.runs << ','
        << format_double(c.mean_seconds) << '\n';
}

}  // namespace aoss
