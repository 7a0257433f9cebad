#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "dinfo/estimators.hpp"
#include "dinfo/process_model.hpp"

namespace dinfo {

// Batch protocol: sample a population of models from a structure preset,
// compute exact rate brackets, sample a path per model, run both estimators,
// and aggregate the gaps against the converged squeeze value. Every trial is
// reproducible from the master seed alone.

struct ExperimentConfig {
  std::string structure = "s1";
  AlphabetSpec alphabet;   // defaulted per structure when x_size == 0
  int order = 0;           // defaulted per structure when 0
  int trials = 20;
  long n = 100000;
  std::vector<int> k_list;  // defaulted to {d, d+1, d+2} when empty
  int k_max = 0;            // squeeze order, defaulted to d+4 when 0
  EstimatorKind kind = EstimatorKind::Ctw;
  std::uint64_t master_seed = 1;
  bool paper_scale = false;  // restores the published protocol (100 trials, n=300000)

  ExperimentConfig() : alphabet{0, 0, 0} {}
};

// Fills in structure-dependent defaults and applies paper_scale.
ExperimentConfig resolve_config(ExperimentConfig cfg);

nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);

struct KOutcome {
  int k = 0;
  double exact_tdi = 0.0;
  double exact_pdi = 0.0;
  double est_tdi = 0.0;
  double est_pdi = 0.0;
};

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;       // model seed; the path seed is derived
  bool ok = false;
  std::string error;
  std::vector<KOutcome> per_k;
  double squeeze_lo = 0.0;      // pdi(k_max)
  double squeeze_hi = 0.0;      // tdi(k_max)
  double di_proxy = 0.0;        // squeeze midpoint
  bool squeeze_converged = false;
};

struct SummaryRow {
  int k = 0;
  std::string measure;  // e.g. "est_tdi_gap"
  long count = 0;
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<TrialRecord> trials;
  std::vector<SummaryRow> summary;
  long failed = 0;
};

ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Boxplot quartiles (linear interpolation between order statistics).
double quantile(std::vector<double> values, double p);

std::string report_detail_csv(const ExperimentReport& report);
std::string report_summary_csv(const ExperimentReport& report);
nlohmann::json report_to_json(const ExperimentReport& report);

// format "csv" writes <path>.detail.csv and <path>.summary.csv;
// format "json" writes <path>.json.
void emit_report(const ExperimentReport& report, const std::string& format,
                 const std::string& path);

// Deterministic per-trial model seed.
std::uint64_t trial_seed(std::uint64_t master_seed, int trial);
// Path seed derived from a model seed.
std::uint64_t path_seed(std::uint64_t model_seed);

}  // namespace dinfo
