#include "dinfo/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dinfo/exact_info.hpp"
#include "dinfo/rng.hpp"
#include "dinfo/serialize.hpp"

namespace dinfo {

using nlohmann::json;

std::uint64_t trial_seed(std::uint64_t master_seed, int trial) {
  return mix64(master_seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(trial) + 1));
}

std::uint64_t path_seed(std::uint64_t model_seed) {
  return mix64(model_seed ^ 0x5851f42d4c957f2dULL);
}

ExperimentConfig resolve_config(ExperimentConfig cfg) {
  StructureTemplate tmpl = StructureTemplate::preset(cfg.structure);
  if (cfg.order == 0) cfg.order = tmpl.max_lag();
  if (cfg.alphabet.x_size == 0) {
    cfg.alphabet = cfg.structure == "s4" ? AlphabetSpec{3, 3, 1}
                                         : AlphabetSpec{4, 4, 1};
  }
  cfg.alphabet.validate();
  if (cfg.order < tmpl.max_used_lag()) {
    throw MaskError("experiment: order below structure lag");
  }
  if (cfg.paper_scale) {
    cfg.trials = 100;
    cfg.n = 300000;
  }
  if (cfg.k_list.empty()) {
    cfg.k_list = {cfg.order, cfg.order + 1, cfg.order + 2};
  }
  if (cfg.k_max == 0) cfg.k_max = cfg.order + 4;
  if (cfg.trials < 1) throw ShapeError("experiment: trials must be >= 1");
  if (cfg.n < 1) throw ShapeError("experiment: n must be >= 1");
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  return json{{"structure", cfg.structure},
              {"alphabet",
               {{"x", cfg.alphabet.x_size},
                {"y", cfg.alphabet.y_size},
                {"z", cfg.alphabet.z_size}}},
              {"order", cfg.order},
              {"trials", cfg.trials},
              {"n", cfg.n},
              {"k_list", cfg.k_list},
              {"k_max", cfg.k_max},
              {"kind", cfg.kind == EstimatorKind::PlugIn ? "plugin" : "ctw"},
              {"master_seed", cfg.master_seed},
              {"paper_scale", cfg.paper_scale}};
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  cfg.structure = j.value("structure", std::string("s1"));
  if (j.contains("alphabet")) {
    const auto& ja = j.at("alphabet");
    cfg.alphabet = {ja.at("x").get<int>(), ja.at("y").get<int>(),
                    ja.at("z").get<int>()};
  }
  cfg.order = j.value("order", 0);
  cfg.trials = j.value("trials", 20);
  cfg.n = j.value("n", 100000L);
  if (j.contains("k_list")) cfg.k_list = j.at("k_list").get<std::vector<int>>();
  cfg.k_max = j.value("k_max", 0);
  std::string kind = j.value("kind", std::string("ctw"));
  if (kind == "plugin") {
    cfg.kind = EstimatorKind::PlugIn;
  } else if (kind == "ctw") {
    cfg.kind = EstimatorKind::Ctw;
  } else {
    throw ShapeError("experiment config: unknown kind " + kind);
  }
  cfg.master_seed = j.value("master_seed", std::uint64_t{1});
  cfg.paper_scale = j.value("paper_scale", false);
  return cfg;
}

ExperimentReport run_experiment(const ExperimentConfig& raw) {
  ExperimentConfig cfg = resolve_config(raw);
  StructureTemplate tmpl = StructureTemplate::preset(cfg.structure);

  ExperimentReport report;
  report.config = cfg;

  for (int t = 0; t < cfg.trials; ++t) {
    TrialRecord rec;
    rec.trial = t;
    rec.seed = trial_seed(cfg.master_seed, t);
    try {
      TransitionModel model =
          sample_structured_model(tmpl, cfg.alphabet, cfg.order, rec.seed);

      InfoRates squeeze =
          sandwich(model, cfg.k_max, std::max(cfg.k_max, cfg.order));
      rec.squeeze_lo = squeeze.pdi_bits;
      rec.squeeze_hi = squeeze.tdi_bits;
      rec.di_proxy = 0.5 * (squeeze.pdi_bits + squeeze.tdi_bits);
      rec.squeeze_converged = squeeze.di_proxy_bits.has_value();

      SampleSequence seq = sample_sequence(model, cfg.n, path_seed(rec.seed));

      for (int k : cfg.k_list) {
        KOutcome out;
        out.k = k;
        out.exact_tdi = exact_tdi_rate(model, k);
        out.exact_pdi = exact_pdi_rate(model, k);
        out.est_tdi = estimate_tdi(seq, k, cfg.kind);
        out.est_pdi = estimate_pdi(seq, k, cfg.order, cfg.kind);
        rec.per_k.push_back(out);
      }
      rec.ok = true;
    } catch (const Error& e) {
      rec.ok = false;
      rec.error = e.what();
      ++report.failed;
    }
    report.trials.push_back(std::move(rec));
  }

  // Gap quartiles per (k, measure) over successful trials.
  const char* measures[4] = {"exact_tdi_gap", "exact_pdi_gap", "est_tdi_gap",
                             "est_pdi_gap"};
  for (std::size_t ki = 0; ki < cfg.k_list.size(); ++ki) {
    for (int mi = 0; mi < 4; ++mi) {
      std::vector<double> gaps;
      for (const auto& rec : report.trials) {
        if (!rec.ok) continue;
        const KOutcome& out = rec.per_k[ki];
        double value = mi == 0   ? out.exact_tdi
                       : mi == 1 ? out.exact_pdi
                       : mi == 2 ? out.est_tdi
                                 : out.est_pdi;
        gaps.push_back(value - rec.di_proxy);
      }
      SummaryRow row;
      row.k = cfg.k_list[ki];
      row.measure = measures[mi];
      row.count = static_cast<long>(gaps.size());
      if (!gaps.empty()) {
        row.min = quantile(gaps, 0.0);
        row.q1 = quantile(gaps, 0.25);
        row.median = quantile(gaps, 0.5);
        row.q3 = quantile(gaps, 0.75);
        row.max = quantile(gaps, 1.0);
      }
      report.summary.push_back(std::move(row));
    }
  }
  return report;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw ShapeError("quantile: empty sample");
  std::sort(values.begin(), values.end());
  double h = (static_cast<double>(values.size()) - 1.0) * p;
  std::size_t lo = static_cast<std::size_t>(std::floor(h));
  std::size_t hi = std::min(lo + 1, values.size() - 1);
  double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::string report_detail_csv(const ExperimentReport& report) {
  std::ostringstream os;
  os << "model_id,structure,seed,trial,n,kind,k,exact_tdi_bits,exact_pdi_bits,"
        "tdi_hat_bits,pdi_hat_bits,di_proxy_bits,squeeze_lo_bits,"
        "squeeze_hi_bits,ok,error\n";
  const ExperimentConfig& cfg = report.config;
  std::string kind = cfg.kind == EstimatorKind::PlugIn ? "plugin" : "ctw";
  for (const auto& rec : report.trials) {
    std::string model_id =
        cfg.structure + "-" + std::to_string(rec.seed);
    if (!rec.ok) {
      os << model_id << ',' << cfg.structure << ',' << rec.seed << ','
         << rec.trial << ',' << cfg.n << ',' << kind
         << ",,,,,,,,false," << rec.error << '\n';
      continue;
    }
    for (const auto& out : rec.per_k) {
      os << model_id << ',' << cfg.structure << ',' << rec.seed << ','
         << rec.trial << ',' << cfg.n << ',' << kind << ',' << out.k << ','
         << format_double(out.exact_tdi) << ',' << format_double(out.exact_pdi)
         << ',' << format_double(out.est_tdi) << ','
         << format_double(out.est_pdi) << ',' << format_double(rec.di_proxy)
         << ',' << format_double(rec.squeeze_lo) << ','
         << format_double(rec.squeeze_hi) << ",true,\n";
    }
  }
  return os.str();
}

std::string report_summary_csv(const ExperimentReport& report) {
  std::ostringstream os;
  os << "structure,k,measure,count,min,q1,median,q3,max\n";
  for (const auto& row : report.summary) {
    os << report.config.structure << ',' << row.k << ',' << row.measure << ','
       << row.count << ',' << format_double(row.min) << ','
       << format_double(row.q1) << ',' << format_double(row.median) << ','
       << format_double(row.q3) << ',' << format_double(row.max) << '\n';
  }
  return os.str();
}

json report_to_json(const ExperimentReport& report) {
  json trials = json::array();
  for (const auto& rec : report.trials) {
    json per_k = json::array();
    for (const auto& out : rec.per_k) {
      per_k.push_back({{"k", out.k},
                       {"exact_tdi_bits", out.exact_tdi},
                       {"exact_pdi_bits", out.exact_pdi},
                       {"tdi_hat_bits", out.est_tdi},
                       {"pdi_hat_bits", out.est_pdi}});
    }
    trials.push_back({{"trial", rec.trial},
                      {"seed", rec.seed},
                      {"ok", rec.ok},
                      {"error", rec.error},
                      {"per_k", std::move(per_k)},
                      {"squeeze_lo_bits", rec.squeeze_lo},
                      {"squeeze_hi_bits", rec.squeeze_hi},
                      {"di_proxy_bits", rec.di_proxy},
                      {"squeeze_converged", rec.squeeze_converged}});
  }
  json summary = json::array();
  for (const auto& row : report.summary) {
    summary.push_back({{"k", row.k},
                       {"measure", row.measure},
                       {"count", row.count},
                       {"min", row.min},
                       {"q1", row.q1},
                       {"median", row.median},
                       {"q3", row.q3},
                       {"max", row.max}});
  }
  return json{{"config", config_to_json(report.config)},
              {"failed", report.failed},
              {"trials", std::move(trials)},
              {"summary", std::move(summary)}};
}

void emit_report(const ExperimentReport& report, const std::string& format,
                 const std::string& path) {
  if (format == "csv") {
    write_text_file(path + ".detail.csv", report_detail_csv(report));
    write_text_file(path + ".summary.csv", report_summary_csv(report));
  } else if (format == "json") {
    write_json_file(path + ".json", report_to_json(report));
  } else {
    throw IOError("emit_report: unknown format " + format);
  }
}

}  // namespace dinfo
