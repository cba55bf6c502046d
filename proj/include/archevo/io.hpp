#pragma once

// JSON wire forms shared by the CLI, the HTTP service, the event log and the
// experiment reports. Readers are strict: unknown keys are rejected.

#include <filesystem>
#include <string>
#include <string_view>

#include "archevo/archive.hpp"
#include "archevo/engine.hpp"
#include "archevo/individual.hpp"
#include "archevo/preferences.hpp"
#include "json.hpp"

namespace archevo {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

/// Run configuration: engine parameters plus the interaction schedule size.
/// Missing keys keep their defaults.
EngineConfig config_from_json(const Json& j);
EngineConfig parse_config(std::string_view document);
EngineConfig load_config(const std::filesystem::path& path);
OrderedJson config_to_json(const EngineConfig& cfg);

/// `{"kind":..., "payload":..., "confidence":1..5}` with class ids as strings.
/// Throws ParseError on shape errors and ValidationError on unknown classes,
/// methods, kinds or metric ids.
Preference preference_from_json(const Json& j, const AnalysisModel& model);
OrderedJson preference_to_json(const Preference& p, const AnalysisModel& model);

OrderedJson metrics_to_json(const MetricVector& m);
OrderedJson objectives_to_json(const ObjectiveVector& v);
OrderedJson fitness_to_json(const FitnessRecord& f);

/// Components, derived interfaces and the feasibility report.
OrderedJson phenotype_to_json(const Architecture& arch, const AnalysisModel& model);

/// Reads back the component list of a phenotype (class ids and frozen flags).
/// A component may also be given as a bare array of class ids.
Architecture architecture_from_json(const Json& j, const AnalysisModel& model);

OrderedJson individual_to_json(const Individual& ind, const AnalysisModel& model);
OrderedJson archive_to_json(const TerritoryArchive& archive, const AnalysisModel& model);
OrderedJson stats_to_json(const GenerationStats& s);

/// Canonical text form: two-space indentation and a trailing newline.
std::string dump(const OrderedJson& j);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view text);

}  // namespace archevo
