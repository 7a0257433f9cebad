#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "dinfo/graph.hpp"
#include "dinfo/process_model.hpp"

namespace dinfo {

// JSON and CSV interchange. Kernel probabilities survive a JSON round trip
// bit-exactly (the writer emits shortest-round-trip decimal forms).

Process process_from_name(const std::string& name);

nlohmann::json template_to_json(const StructureTemplate& tmpl);
StructureTemplate template_from_json(const nlohmann::json& j);

// Kernels are emitted as one row per context, contexts ordered with the X
// block leading (lag 1 outermost), then Y, then Z.
nlohmann::json model_to_json(const TransitionModel& model,
                             const StructureTemplate* tmpl = nullptr,
                             std::optional<std::uint64_t> seed = std::nullopt);

struct LoadedModel {
  TransitionModel model;
  std::optional<StructureTemplate> tmpl;
  std::optional<std::uint64_t> seed;
};

LoadedModel model_from_json(const nlohmann::json& j);

nlohmann::json sequence_to_json(const SampleSequence& seq);
SampleSequence sequence_from_json(const nlohmann::json& j);
std::string sequence_to_csv(const SampleSequence& seq);
SampleSequence sequence_from_csv(const std::string& text,
                                 const AlphabetSpec& alphabet);

nlohmann::json certificate_to_json(const MarkovCertificate& cert);

// Round-trip-exact decimal form of a double, for CSV output.
std::string format_double(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

}  // namespace dinfo
