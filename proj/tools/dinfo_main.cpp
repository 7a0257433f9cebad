// Command-line front end: model sampling, simulation, exact rates,
// estimation, separation queries, certificates, and batch experiments.
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dinfo/estimators.hpp"
#include "dinfo/exact_info.hpp"
#include "dinfo/experiments.hpp"
#include "dinfo/graph.hpp"
#include "dinfo/process_model.hpp"
#include "dinfo/serialize.hpp"

namespace {

using dinfo::AlphabetSpec;
using dinfo::Process;
using dinfo::TimeNode;
using nlohmann::json;

AlphabetSpec parse_alphabet(const std::string& text) {
  int x, y, z;
  if (std::sscanf(text.c_str(), "%d,%d,%d", &x, &y, &z) != 3) {
    throw dinfo::ShapeError("--alphabet expects three sizes, e.g. 4,4,1");
  }
  AlphabetSpec a{x, y, z};
  a.validate();
  return a;
}

dinfo::EstimatorKind parse_kind(const std::string& text) {
  if (text == "plugin") return dinfo::EstimatorKind::PlugIn;
  if (text == "ctw") return dinfo::EstimatorKind::Ctw;
  throw dinfo::ShapeError("--kind must be plugin or ctw");
}

// Node lists are written "X@3,Y@5": process letter, '@', 1-based time.
std::vector<TimeNode> parse_nodes(const std::string& text) {
  std::vector<TimeNode> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t comma = text.find(',', pos);
    std::string tok = text.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos);
    int t = 0;
    char p = 0;
    if (std::sscanf(tok.c_str(), " %c@%d", &p, &t) != 2) {
      throw dinfo::SelectorError("bad node '" + tok + "', expected e.g. X@3");
    }
    out.push_back({dinfo::process_from_name(std::string(1, p)), t});
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

dinfo::LoadedModel load_model(const std::string& path) {
  return dinfo::model_from_json(dinfo::read_json_file(path));
}

void emit(const json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    dinfo::write_json_file(out_path, j);
  }
}

void emit_text(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    dinfo::write_text_file(out_path, text);
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Directed-information rate bounds for Markov process triples"};
  app.require_subcommand(1);

  // sample-model
  auto* sm = app.add_subcommand(
      "sample-model", "Sample kernel rows for a structure preset");
  std::string sm_structure = "s1", sm_alphabet, sm_out;
  int sm_d = 0;
  std::uint64_t sm_seed = 1;
  sm->add_option("--structure", sm_structure, "Preset s1..s4")
      ->check(CLI::IsMember({"s1", "s2", "s3", "s4"}));
  sm->add_option("--alphabet", sm_alphabet, "Sizes X,Y,Z (default per preset)");
  sm->add_option("--d", sm_d, "Model order (default: preset order)");
  sm->add_option("--seed", sm_seed, "Sampling seed");
  sm->add_option("--out", sm_out, "Output model JSON path (default stdout)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Sample a joint sequence");
  std::string sim_model, sim_out, sim_format = "json";
  long sim_n = 100000;
  std::uint64_t sim_seed = 0;
  bool sim_seed_set = false;
  sim->add_option("--model", sim_model, "Model JSON path")->required();
  sim->add_option("--n", sim_n, "Sequence length");
  sim->add_option("--seed", sim_seed, "Path seed (default: derived from the model seed)")
      ->each([&](const std::string&) { sim_seed_set = true; });
  sim->add_option("--format", sim_format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  sim->add_option("--out", sim_out, "Output path (default stdout)");

  // exact
  auto* ex = app.add_subcommand(
      "exact", "Exact truncated/partial rates and the squeeze bracket");
  std::string ex_model;
  int ex_k = 0, ex_k_pdi = 0, ex_k_tdi = 0;
  ex->add_option("--model", ex_model, "Model JSON path")->required();
  ex->add_option("--k", ex_k, "Truncation order for both bounds (default d+4)");
  ex->add_option("--k-pdi", ex_k_pdi, "Override partial-rate order");
  ex->add_option("--k-tdi", ex_k_tdi, "Override truncated-rate order");

  // estimate
  auto* est = app.add_subcommand(
      "estimate", "Estimate both rates from a sequence file");
  std::string est_seq, est_alphabet, est_kind = "ctw", est_out;
  int est_k = 0, est_d = 1;
  est->add_option("--sequence", est_seq, "Sequence path (.json or .csv)")
      ->required();
  est->add_option("--alphabet", est_alphabet,
                  "Sizes X,Y,Z (required for CSV input)");
  est->add_option("--k", est_k, "Truncation order")->required();
  est->add_option("--d", est_d, "Assumed model order for the partial rate");
  est->add_option("--kind", est_kind, "plugin or ctw")
      ->check(CLI::IsMember({"plugin", "ctw"}));
  est->add_option("--out", est_out, "Output JSON path (default stdout)");

  // dsep
  auto* ds = app.add_subcommand(
      "dsep", "d-separation query on the unrolled network");
  std::string ds_model, ds_a, ds_b, ds_c, ds_dot;
  int ds_horizon = 0;
  ds->add_option("--model", ds_model, "Model JSON path")->required();
  ds->add_option("--a", ds_a, "First node set, e.g. X@8")->required();
  ds->add_option("--b", ds_b, "Second node set, e.g. Y@3,Y@4")->required();
  ds->add_option("--c", ds_c, "Conditioning node set (may be empty)");
  ds->add_option("--horizon", ds_horizon, "Network horizon (default 4d+4)");
  ds->add_option("--dot", ds_dot, "Also write the network in DOT form");

  // certify
  auto* ct = app.add_subcommand(
      "certify", "Certificate that X is Markov of order l once Y is dropped");
  std::string ct_model, ct_out, ct_dot;
  int ct_l = 0, ct_horizon = 0;
  ct->add_option("--model", ct_model, "Model JSON path")->required();
  ct->add_option("--l", ct_l, "Candidate Markov order")->required();
  ct->add_option("--horizon", ct_horizon,
                 "Network horizon (default max(4d+4, 4(d+l)+4))");
  ct->add_option("--out", ct_out, "Output JSON path (default stdout)");
  ct->add_option("--dot", ct_dot, "Also write the network in DOT form");

  // experiment
  auto* xp = app.add_subcommand(
      "experiment", "Batch protocol: sample models, estimate, aggregate gaps");
  std::string xp_config, xp_structure, xp_alphabet, xp_kind, xp_format = "csv",
              xp_out;
  int xp_trials = 0, xp_d = 0, xp_kmax = 0;
  long xp_n = 0;
  std::uint64_t xp_seed = 0;
  bool xp_seed_set = false, xp_paper = false;
  std::vector<int> xp_k;
  xp->add_option("--config", xp_config,
                 "JSON config file (flags override its fields)");
  xp->add_option("--structure", xp_structure, "Preset s1..s4")
      ->check(CLI::IsMember({"s1", "s2", "s3", "s4"}));
  xp->add_option("--alphabet", xp_alphabet, "Sizes X,Y,Z");
  xp->add_option("--d", xp_d, "Model order");
  xp->add_option("--trials", xp_trials, "Number of sampled models");
  xp->add_option("--n", xp_n, "Sequence length per trial");
  xp->add_option("--k", xp_k, "Truncation order (repeatable)");
  xp->add_option("--k-max", xp_kmax, "Squeeze order for the DI proxy");
  xp->add_option("--kind", xp_kind, "plugin or ctw")
      ->check(CLI::IsMember({"plugin", "ctw"}));
  xp->add_option("--seed", xp_seed, "Master seed")
      ->each([&](const std::string&) { xp_seed_set = true; });
  xp->add_flag("--paper-scale", xp_paper,
               "Published protocol: 100 trials, n = 300000");
  xp->add_option("--format", xp_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  xp->add_option("--out", xp_out, "Output path stem")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (sm->parsed()) {
    dinfo::StructureTemplate tmpl = dinfo::StructureTemplate::preset(sm_structure);
    int d = sm_d > 0 ? sm_d : tmpl.max_lag();
    AlphabetSpec alphabet = sm_alphabet.empty()
                                ? (sm_structure == "s4" ? AlphabetSpec{3, 3, 1}
                                                        : AlphabetSpec{4, 4, 1})
                                : parse_alphabet(sm_alphabet);
    dinfo::TransitionModel model =
        dinfo::sample_structured_model(tmpl, alphabet, d, sm_seed);
    emit(dinfo::model_to_json(model, &tmpl, sm_seed), sm_out);
    return 0;
  }

  if (sim->parsed()) {
    dinfo::LoadedModel lm = load_model(sim_model);
    std::uint64_t seed = sim_seed_set
                             ? sim_seed
                             : dinfo::path_seed(lm.seed.value_or(0));
    dinfo::SampleSequence seq = dinfo::sample_sequence(lm.model, sim_n, seed);
    if (sim_format == "csv") {
      emit_text(dinfo::sequence_to_csv(seq), sim_out);
    } else {
      emit(dinfo::sequence_to_json(seq), sim_out);
    }
    return 0;
  }

  if (ex->parsed()) {
    dinfo::LoadedModel lm = load_model(ex_model);
    int d = lm.model.order();
    int k = ex_k > 0 ? ex_k : d + 4;
    int k_pdi = ex_k_pdi > 0 ? ex_k_pdi : k;
    int k_tdi = ex_k_tdi > 0 ? ex_k_tdi : std::max(k, d);
    dinfo::InfoRates r = dinfo::sandwich(lm.model, k_pdi, k_tdi);
    json j{{"order", d},
           {"pdi_order", r.pdi_order},
           {"tdi_order", r.tdi_order},
           {"pdi_bits", r.pdi_bits},
           {"tdi_bits", r.tdi_bits},
           {"width_bits", r.width()},
           {"di_proxy_bits",
            r.di_proxy_bits ? json(*r.di_proxy_bits) : json(nullptr)}};
    emit(j, "");
    return 0;
  }

  if (est->parsed()) {
    dinfo::SampleSequence seq;
    if (est_seq.size() >= 4 &&
        est_seq.compare(est_seq.size() - 4, 4, ".csv") == 0) {
      if (est_alphabet.empty()) {
        throw dinfo::ShapeError("CSV sequences need --alphabet");
      }
      seq = dinfo::sequence_from_csv(dinfo::read_text_file(est_seq),
                                     parse_alphabet(est_alphabet));
    } else {
      seq = dinfo::sequence_from_json(dinfo::read_json_file(est_seq));
    }
    dinfo::EstimatorKind kind = parse_kind(est_kind);
    json j{{"n", seq.size()},
           {"k", est_k},
           {"d", est_d},
           {"kind", est_kind},
           {"tdi_hat_bits", dinfo::estimate_tdi(seq, est_k, kind)},
           {"pdi_hat_bits", dinfo::estimate_pdi(seq, est_k, est_d, kind)}};
    emit(j, est_out);
    return 0;
  }

  if (ds->parsed()) {
    dinfo::LoadedModel lm = load_model(ds_model);
    int horizon = ds_horizon > 0 ? ds_horizon : 4 * lm.model.order() + 4;
    dinfo::TimeNetwork net = dinfo::build_time_network(lm.model, horizon);
    if (!ds_dot.empty()) dinfo::write_text_file(ds_dot, net.to_dot());
    dinfo::DSeparationResult res = dinfo::d_separation_query(
        net, parse_nodes(ds_a), parse_nodes(ds_b),
        ds_c.empty() ? std::vector<TimeNode>{} : parse_nodes(ds_c));
    json path = json::array();
    for (const auto& v : res.witness_path) {
      path.push_back({{"process", dinfo::process_name(v.process)},
                      {"time", v.time}});
    }
    emit(json{{"separated", res.separated}, {"witness_path", path}}, "");
    return 0;
  }

  if (ct->parsed()) {
    dinfo::LoadedModel lm = load_model(ct_model);
    int horizon = ct_horizon > 0
                      ? ct_horizon
                      : dinfo::default_horizon(lm.model.order(), ct_l);
    dinfo::TimeNetwork net = dinfo::build_time_network(lm.model, horizon);
    if (!ct_dot.empty()) dinfo::write_text_file(ct_dot, net.to_dot());
    dinfo::MarkovCertificate cert = dinfo::markov_certificate(net, ct_l);
    emit(dinfo::certificate_to_json(cert), ct_out);
    return 0;
  }

  if (xp->parsed()) {
    dinfo::ExperimentConfig cfg;
    if (!xp_config.empty()) {
      cfg = dinfo::config_from_json(dinfo::read_json_file(xp_config));
    }
    if (!xp_structure.empty()) cfg.structure = xp_structure;
    if (!xp_alphabet.empty()) cfg.alphabet = parse_alphabet(xp_alphabet);
    if (xp_d > 0) cfg.order = xp_d;
    if (xp_trials > 0) cfg.trials = xp_trials;
    if (xp_n > 0) cfg.n = xp_n;
    if (!xp_k.empty()) cfg.k_list = xp_k;
    if (xp_kmax > 0) cfg.k_max = xp_kmax;
    if (!xp_kind.empty()) cfg.kind = parse_kind(xp_kind);
    if (xp_seed_set) cfg.master_seed = xp_seed;
    if (xp_paper) cfg.paper_scale = true;
    dinfo::ExperimentReport report = dinfo::run_experiment(cfg);
    dinfo::emit_report(report, xp_format, xp_out);
    std::cerr << "wrote " << xp_out << (xp_format == "csv" ? ".{detail,summary}.csv" : ".json")
              << " (" << report.trials.size() << " trials, " << report.failed
              << " failed)\n";
    return 0;
  }

  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const dinfo::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
