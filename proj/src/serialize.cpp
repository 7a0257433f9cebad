#include "dinfo/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace dinfo {

using nlohmann::json;

Process process_from_name(const std::string& name) {
  if (name == "X" || name == "x") return Process::X;
  if (name == "Y" || name == "y") return Process::Y;
  if (name == "Z" || name == "z") return Process::Z;
  throw SelectorError("unknown process name: " + name);
}

json template_to_json(const StructureTemplate& tmpl) {
  json edges = json::array();
  for (int ti = 0; ti < 3; ++ti) {
    for (int si = 0; si < 3; ++si) {
      for (int lag = 1; lag <= tmpl.max_lag(); ++lag) {
        if (tmpl.allowed(static_cast<Process>(ti), static_cast<Process>(si),
                         lag)) {
          edges.push_back({{"target", process_name(static_cast<Process>(ti))},
                           {"source", process_name(static_cast<Process>(si))},
                           {"lag", lag}});
        }
      }
    }
  }
  return json{{"name", tmpl.name()},
              {"max_lag", tmpl.max_lag()},
              {"edges", std::move(edges)}};
}

StructureTemplate template_from_json(const json& j) {
  StructureTemplate tmpl(j.at("max_lag").get<int>(),
                         j.value("name", std::string{}));
  for (const auto& e : j.at("edges")) {
    tmpl.allow(process_from_name(e.at("target").get<std::string>()),
               process_from_name(e.at("source").get<std::string>()),
               e.at("lag").get<int>());
  }
  return tmpl;
}

namespace {

json kernel_to_json(const TransitionModel& model, Process p) {
  json rows = json::array();
  long m = model.alphabet().size(p);
  for (long c = 0; c < model.context_count(); ++c) {
    auto row = model.row(p, c);
    json r = json::array();
    for (long a = 0; a < m; ++a) r.push_back(row[a]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<double> kernel_from_json(const json& rows, long contexts, long m,
                                     const char* which) {
  if (static_cast<long>(rows.size()) != contexts) {
    throw ShapeError(std::string("model json: kernel ") + which + " has " +
                     std::to_string(rows.size()) + " rows, expected " +
                     std::to_string(contexts));
  }
  std::vector<double> k;
  k.reserve(contexts * m);
  for (const auto& row : rows) {
    if (static_cast<long>(row.size()) != m) {
      throw ShapeError(std::string("model json: kernel ") + which +
                       " row width mismatch");
    }
    for (const auto& v : row) k.push_back(v.get<double>());
  }
  return k;
}

}  // namespace

json model_to_json(const TransitionModel& model, const StructureTemplate* tmpl,
                   std::optional<std::uint64_t> seed) {
  json j{{"alphabet",
          {{"x", model.alphabet().x_size},
           {"y", model.alphabet().y_size},
           {"z", model.alphabet().z_size}}},
         {"order", model.order()},
         {"kernels",
          {{"x", kernel_to_json(model, Process::X)},
           {"y", kernel_to_json(model, Process::Y)},
           {"z", kernel_to_json(model, Process::Z)}}}};
  j["template"] = tmpl ? template_to_json(*tmpl) : json(nullptr);
  if (seed) {
    j["seed"] = *seed;
  } else {
    j["seed"] = json(nullptr);
  }
  return j;
}

LoadedModel model_from_json(const json& j) {
  const auto& ja = j.at("alphabet");
  AlphabetSpec alphabet{ja.at("x").get<int>(), ja.at("y").get<int>(),
                        ja.at("z").get<int>()};
  int order = j.at("order").get<int>();
  long contexts = 1;
  for (int i = 0; i < order; ++i) contexts *= alphabet.joint_size();

  const auto& jk = j.at("kernels");
  TransitionModel model(
      alphabet, order,
      kernel_from_json(jk.at("x"), contexts, alphabet.x_size, "x"),
      kernel_from_json(jk.at("y"), contexts, alphabet.y_size, "y"),
      kernel_from_json(jk.at("z"), contexts, alphabet.z_size, "z"));

  std::optional<StructureTemplate> tmpl;
  if (j.contains("template") && !j.at("template").is_null()) {
    tmpl = template_from_json(j.at("template"));
  }
  std::optional<std::uint64_t> seed;
  if (j.contains("seed") && !j.at("seed").is_null()) {
    seed = j.at("seed").get<std::uint64_t>();
  }
  return LoadedModel{std::move(model), std::move(tmpl), seed};
}

json sequence_to_json(const SampleSequence& seq) {
  return json{{"alphabet",
               {{"x", seq.alphabet.x_size},
                {"y", seq.alphabet.y_size},
                {"z", seq.alphabet.z_size}}},
              {"seed", seq.seed},
              {"x", seq.x},
              {"y", seq.y},
              {"z", seq.z}};
}

SampleSequence sequence_from_json(const json& j) {
  SampleSequence seq;
  const auto& ja = j.at("alphabet");
  seq.alphabet = {ja.at("x").get<int>(), ja.at("y").get<int>(),
                  ja.at("z").get<int>()};
  seq.alphabet.validate();
  seq.seed = j.value("seed", std::uint64_t{0});
  seq.x = j.at("x").get<std::vector<int>>();
  seq.y = j.at("y").get<std::vector<int>>();
  seq.z = j.at("z").get<std::vector<int>>();
  if (seq.y.size() != seq.x.size() || seq.z.size() != seq.x.size()) {
    throw ShapeError("sequence json: component lengths differ");
  }
  for (long t = 0; t < seq.size(); ++t) {
    if (seq.x[t] < 0 || seq.x[t] >= seq.alphabet.x_size ||
        seq.y[t] < 0 || seq.y[t] >= seq.alphabet.y_size ||
        seq.z[t] < 0 || seq.z[t] >= seq.alphabet.z_size) {
      throw ShapeError("sequence json: symbol outside alphabet at t=" +
                       std::to_string(t));
    }
  }
  return seq;
}

std::string sequence_to_csv(const SampleSequence& seq) {
  std::ostringstream os;
  os << "t,x,y,z\n";
  for (long t = 0; t < seq.size(); ++t) {
    os << t << ',' << seq.x[t] << ',' << seq.y[t] << ',' << seq.z[t] << '\n';
  }
  return os.str();
}

SampleSequence sequence_from_csv(const std::string& text,
                                 const AlphabetSpec& alphabet) {
  alphabet.validate();
  SampleSequence seq;
  seq.alphabet = alphabet;
  std::istringstream is(text);
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.rfind("t,", 0) == 0) continue;  // header
    }
    int t, x, y, z;
    if (std::sscanf(line.c_str(), "%d,%d,%d,%d", &t, &x, &y, &z) != 4) {
      throw IOError("sequence csv: malformed line: " + line);
    }
    if (x < 0 || x >= alphabet.x_size || y < 0 || y >= alphabet.y_size ||
        z < 0 || z >= alphabet.z_size) {
      throw ShapeError("sequence csv: symbol outside alphabet at t=" +
                       std::to_string(t));
    }
    seq.x.push_back(x);
    seq.y.push_back(y);
    seq.z.push_back(z);
  }
  return seq;
}

json certificate_to_json(const MarkovCertificate& cert) {
  json path = json::array();
  for (const auto& node : cert.witness_path) {
    path.push_back(
        {{"process", process_name(node.process)}, {"time", node.time}});
  }
  return json{{"verdict", verdict_name(cert.verdict)},
              {"tested_l_values", cert.tested_l_values},
              {"anchor", cert.anchor},
              {"conditioning_set_size", cert.conditioning_set_size},
              {"witness_path", std::move(path)}};
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot write " + path);
  out << content;
  if (!out) throw IOError("write failed for " + path);
}

json read_json_file(const std::string& path) {
  json j = json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded()) throw IOError("invalid json in " + path);
  return j;
}

void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace dinfo
