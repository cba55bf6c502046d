#include "archevo/io.hpp"

#include <fstream>
#include <sstream>

#include "archevo/errors.hpp"
#include "json_util.hpp"

namespace archevo {

namespace {

using namespace detail;

template <class T>
void read_count(const Json& obj, std::string_view where, const char* key, T& out) {
  if (!obj.contains(key)) return;
  const long long v = require_integer(obj, where, key);
  if (v < 0) throw ValidationError(std::string(where) + "/" + key + ": must be non-negative");
  out = static_cast<T>(v);
}

void read_real(const Json& obj, std::string_view where, const char* key, double& out) {
  if (obj.contains(key)) out = require_number(obj, where, key);
}

ObjectiveVector read_triple(const Json& obj, std::string_view where, const char* key) {
  const Json& arr = require_array(obj, where, key);
  if (arr.size() != kObjectiveCount) {
    throw ParseError(std::string(where) + "/" + key + ": expected 3 numbers", 0);
  }
  ObjectiveVector v{};
  for (std::size_t k = 0; k < kObjectiveCount; ++k) {
    if (!arr[k].is_number()) throw ParseError(std::string(where) + "/" + key + ": expected numbers", 0);
    v[k] = arr[k].get<double>();
  }
  return v;
}

ClassIndex resolve_class(const AnalysisModel& model, const Json& id, std::string_view where) {
  if (!id.is_string()) throw ParseError(std::string(where) + ": expected a class id string", 0);
  auto idx = model.class_index(id.get<std::string>());
  if (!idx) throw ValidationError(std::string(where) + ": unknown class id '" + id.get<std::string>() + "'");
  return *idx;
}

OrderedJson class_list(const AnalysisModel& model, std::span<const ClassIndex> classes) {
  OrderedJson out = OrderedJson::array();
  for (ClassIndex c : classes) out.push_back(model.class_id(c));
  return out;
}

OrderedJson operation_list(const AnalysisModel& model, std::span<const Operation> ops) {
  OrderedJson out = OrderedJson::array();
  for (const auto& op : ops) out.push_back({{"class", model.class_id(op.cls)}, {"method", op.method}});
  return out;
}

}  // namespace

EngineConfig config_from_json(const Json& j) {
  constexpr std::string_view w = "config";
  expect_keys(j, w,
              {"population_size", "max_evaluations", "n_min", "n_max", "mutation", "erp", "fitness",
               "archive", "interactions", "candidates", "seed", "execution"});
  EngineConfig cfg;
  read_count(j, w, "population_size", cfg.population_size);
  read_count(j, w, "max_evaluations", cfg.max_evaluations);
  read_count(j, w, "n_min", cfg.n_min);
  read_count(j, w, "n_max", cfg.n_max);
  read_count(j, w, "interactions", cfg.interactions);
  read_count(j, w, "candidates", cfg.candidates);
  read_count(j, w, "seed", cfg.seed);
  if (j.contains("mutation")) {
    const Json& m = j["mutation"];
    expect_keys(m, "config/mutation", {"add", "remove", "merge", "split", "move"});
    read_real(m, "config/mutation", "add", cfg.mutation.add);
    read_real(m, "config/mutation", "remove", cfg.mutation.remove);
    read_real(m, "config/mutation", "merge", cfg.mutation.merge);
    read_real(m, "config/mutation", "split", cfg.mutation.split);
    read_real(m, "config/mutation", "move", cfg.mutation.move);
  }
  if (j.contains("erp")) {
    const Json& e = j["erp"];
    expect_keys(e, "config/erp", {"as", "ag", "co", "ge"});
    read_real(e, "config/erp", "as", cfg.erp.as);
    read_real(e, "config/erp", "ag", cfg.erp.ag);
    read_real(e, "config/erp", "co", cfg.erp.co);
    read_real(e, "config/erp", "ge", cfg.erp.ge);
  }
  if (j.contains("fitness")) {
    const Json& f = j["fitness"];
    expect_keys(f, "config/fitness", {"w_obj", "w_sub"});
    read_real(f, "config/fitness", "w_obj", cfg.fitness.w_obj);
    read_real(f, "config/fitness", "w_sub", cfg.fitness.w_sub);
  }
  if (j.contains("archive")) {
    const Json& a = j["archive"];
    expect_keys(a, "config/archive", {"tau0", "tau_final", "decrease"});
    read_real(a, "config/archive", "tau0", cfg.archive.tau0);
    read_real(a, "config/archive", "tau_final", cfg.archive.tau_final);
    read_real(a, "config/archive", "decrease", cfg.archive.decrease);
  }
  if (j.contains("execution")) {
    const std::string ex = require_string(j, w, "execution");
    if (ex == "serial") {
      cfg.execution = Execution::serial;
    } else if (ex == "parallel") {
      cfg.execution = Execution::parallel;
    } else {
      throw ValidationError("config/execution: expected 'serial' or 'parallel'");
    }
  }
  cfg.validate();
  return cfg;
}

EngineConfig parse_config(std::string_view document) { return config_from_json(parse_json(document)); }

EngineConfig load_config(const std::filesystem::path& path) { return parse_config(read_file(path)); }

OrderedJson config_to_json(const EngineConfig& cfg) {
  OrderedJson j;
  j["population_size"] = cfg.population_size;
  j["max_evaluations"] = cfg.max_evaluations;
  j["n_min"] = cfg.n_min;
  j["n_max"] = cfg.n_max;
  j["mutation"] = {{"add", cfg.mutation.add},
                   {"remove", cfg.mutation.remove},
                   {"merge", cfg.mutation.merge},
                   {"split", cfg.mutation.split},
                   {"move", cfg.mutation.move}};
  j["erp"] = {{"as", cfg.erp.as}, {"ag", cfg.erp.ag}, {"co", cfg.erp.co}, {"ge", cfg.erp.ge}};
  j["fitness"] = {{"w_obj", cfg.fitness.w_obj}, {"w_sub", cfg.fitness.w_sub}};
  j["archive"] = {{"tau0", cfg.archive.tau0},
                  {"tau_final", cfg.archive.tau_final},
                  {"decrease", cfg.archive.decrease}};
  j["interactions"] = cfg.interactions;
  j["candidates"] = cfg.candidates;
  j["seed"] = cfg.seed;
  j["execution"] = cfg.execution == Execution::serial ? "serial" : "parallel";
  return j;
}

Preference preference_from_json(const Json& j, const AnalysisModel& model) {
  constexpr std::string_view w = "preference";
  expect_keys(j, w, {"kind", "payload", "confidence"});
  Preference p;
  const std::string kind = require_string(j, w, "kind");
  auto parsed = preference_kind_from_string(kind);
  if (!parsed) throw ValidationError("preference/kind: unknown preference kind '" + kind + "'");
  p.kind = *parsed;
  if (j.contains("confidence")) p.confidence = static_cast<int>(require_integer(j, w, "confidence"));

  const Json empty = Json::object();
  const Json& payload = j.contains("payload") && !j["payload"].is_null() ? j["payload"] : empty;
  const std::string pw = "preference/payload";
  switch (p.kind) {
    case PreferenceKind::none:
      expect_keys(payload, pw, {});
      break;
    case PreferenceKind::best_component:
    case PreferenceKind::worst_component: {
      expect_keys(payload, pw, {"classes"});
      ComponentTarget t;
      const Json& arr = require_array(payload, pw, "classes");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        t.classes.push_back(resolve_class(model, arr[i], pw + "/classes/" + std::to_string(i)));
      }
      std::sort(t.classes.begin(), t.classes.end());
      if (std::adjacent_find(t.classes.begin(), t.classes.end()) != t.classes.end()) {
        throw ValidationError(pw + "/classes: duplicate class id");
      }
      p.payload = std::move(t);
      break;
    }
    case PreferenceKind::best_interface:
    case PreferenceKind::worst_interface: {
      expect_keys(payload, pw, {"operations"});
      InterfaceTarget t;
      const Json& arr = require_array(payload, pw, "operations");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string ow = pw + "/operations/" + std::to_string(i);
        expect_keys(arr[i], ow, {"class", "method"});
        Operation op{resolve_class(model, require(arr[i], ow, "class"), ow + "/class"),
                     require_string(arr[i], ow, "method")};
        const auto& methods = model.public_methods(op.cls);
        if (std::find(methods.begin(), methods.end(), op.method) == methods.end()) {
          throw ValidationError(ow + ": '" + op.method + "' is not a public method of " +
                                model.class_id(op.cls));
        }
        t.operations.push_back(std::move(op));
      }
      std::sort(t.operations.begin(), t.operations.end());
      if (std::adjacent_find(t.operations.begin(), t.operations.end()) != t.operations.end()) {
        throw ValidationError(pw + "/operations: duplicate operation");
      }
      p.payload = std::move(t);
      break;
    }
    case PreferenceKind::number_of_components: {
      expect_keys(payload, pw, {"n"});
      const long long n = require_integer(payload, pw, "n");
      if (n < 0) throw ValidationError(pw + "/n: must be non-negative");
      p.payload = ComponentCount{static_cast<std::size_t>(n)};
      break;
    }
    case PreferenceKind::metric_in_range: {
      expect_keys(payload, pw, {"metric", "min", "max"});
      MetricRange r;
      try {
        r.metric = metric_id_from_string(require_string(payload, pw, "metric"));
      } catch (const ConfigError& e) {
        throw ValidationError(pw + "/metric: " + e.what());
      }
      r.min = require_number(payload, pw, "min");
      r.max = require_number(payload, pw, "max");
      p.payload = r;
      break;
    }
    case PreferenceKind::aspiration_levels: {
      expect_keys(payload, pw, {"reference", "weights"});
      AspirationLevels a;
      a.reference = read_triple(payload, pw, "reference");
      if (payload.contains("weights")) a.weights = read_triple(payload, pw, "weights");
      p.payload = a;
      break;
    }
  }
  return p;
}

OrderedJson preference_to_json(const Preference& p, const AnalysisModel& model) {
  OrderedJson j;
  j["kind"] = std::string(to_string(p.kind));
  OrderedJson payload = OrderedJson::object();
  if (const auto* t = std::get_if<ComponentTarget>(&p.payload)) {
    payload["classes"] = class_list(model, t->classes);
  } else if (const auto* t = std::get_if<InterfaceTarget>(&p.payload)) {
    payload["operations"] = operation_list(model, t->operations);
  } else if (const auto* t = std::get_if<ComponentCount>(&p.payload)) {
    payload["n"] = t->preferred;
  } else if (const auto* t = std::get_if<MetricRange>(&p.payload)) {
    payload["metric"] = std::string(to_string(t->metric));
    payload["min"] = t->min;
    payload["max"] = t->max;
  } else if (const auto* t = std::get_if<AspirationLevels>(&p.payload)) {
    payload["reference"] = t->reference;
    payload["weights"] = t->weights;
  }
  j["payload"] = std::move(payload);
  j["confidence"] = p.confidence;
  return j;
}

OrderedJson metrics_to_json(const MetricVector& m) {
  return {{"icd", m.icd}, {"erp", m.erp}, {"gcr", m.gcr}};
}

OrderedJson objectives_to_json(const ObjectiveVector& v) { return OrderedJson(v); }

OrderedJson fitness_to_json(const FitnessRecord& f) {
  OrderedJson j;
  j["f_obj"] = f.f_obj;
  j["f_sub"] = f.f_sub ? OrderedJson(*f.f_sub) : OrderedJson(nullptr);
  j["combined"] = f.combined;
  j["feasible"] = f.feasible;
  j["violation_count"] = f.violation_count;
  j["removal_penalized"] = f.removal_penalized;
  return j;
}

OrderedJson phenotype_to_json(const Architecture& arch, const AnalysisModel& model) {
  OrderedJson comps = OrderedJson::array();
  for (const auto& c : arch.components()) {
    comps.push_back({{"classes", class_list(model, c.classes)}, {"frozen", c.frozen}});
  }
  OrderedJson itfs = OrderedJson::array();
  for (const auto& itf : derive_interfaces(arch, model)) {
    OrderedJson ji;
    ji["provider"] = itf.provider;
    ji["exposed_classes"] = class_list(model, itf.exposed_classes);
    ji["operations"] = operation_list(model, itf.operations);
    ji["consumers"] = itf.consumers;
    itfs.push_back(std::move(ji));
  }
  const FeasibilityReport f = check_feasibility(arch, model);
  OrderedJson j;
  j["components"] = std::move(comps);
  j["interfaces"] = std::move(itfs);
  j["feasibility"] = {{"feasible", f.feasible},
                      {"empty_component", f.empty_component},
                      {"interfaceless_component", f.interfaceless_component},
                      {"mutual_provision_pair", f.mutual_provision_pair}};
  return j;
}

Architecture architecture_from_json(const Json& j, const AnalysisModel& model) {
  constexpr std::string_view w = "architecture";
  if (!j.is_object()) throw ParseError("architecture: expected an object", 0);
  const Json& comps = require_array(j, w, "components");
  std::vector<Component> out;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const std::string cw = "architecture/components/" + std::to_string(i);
    Component c;
    const bool bare = comps[i].is_array();
    const Json& classes = bare ? comps[i] : require_array(comps[i], cw, "classes");
    for (std::size_t k = 0; k < classes.size(); ++k) {
      c.classes.push_back(resolve_class(model, classes[k], cw + "/classes/" + std::to_string(k)));
    }
    if (!bare && comps[i].contains("frozen")) c.frozen = require_bool(comps[i], cw, "frozen");
    out.push_back(std::move(c));
  }
  return Architecture(std::move(out), model.class_count());
}

OrderedJson individual_to_json(const Individual& ind, const AnalysisModel& model) {
  OrderedJson j;
  j["uid"] = ind.uid;
  j["phenotype"] = phenotype_to_json(ind.architecture, model);
  j["metrics"] = metrics_to_json(ind.raw);
  j["objectives"] = objectives_to_json(ind.objectives);
  j["fitness"] = fitness_to_json(ind.fitness);
  j["marked_for_removal"] = ind.marked_for_removal;
  j["preserved"] = ind.preserved;
  return j;
}

OrderedJson archive_to_json(const TerritoryArchive& archive, const AnalysisModel& model) {
  OrderedJson members = OrderedJson::array();
  for (const auto& m : archive.members()) {
    OrderedJson jm = individual_to_json(m.individual, model);
    jm["region"] = m.region;
    members.push_back(std::move(jm));
  }
  OrderedJson j;
  j["size"] = archive.size();
  j["territories"] = std::vector<double>(archive.territories().begin(), archive.territories().end());
  j["members"] = std::move(members);
  return j;
}

OrderedJson stats_to_json(const GenerationStats& s) {
  OrderedJson j;
  j["generation"] = s.generation;
  j["evaluations"] = s.evaluations;
  j["best_combined"] = s.best_combined;
  j["mean_combined"] = s.mean_combined;
  j["population_mean"] = metrics_to_json(s.population_mean);
  j["population_mean_normalized"] = objectives_to_json(s.population_mean_normalized);
  j["archive_mean"] = metrics_to_json(s.archive_mean);
  j["archive_mean_normalized"] = objectives_to_json(s.archive_mean_normalized);
  j["archive_size"] = s.archive_size;
  j["component_histogram"] = s.component_histogram;
  return j;
}

std::string dump(const OrderedJson& j) { return j.dump(2) + "\n"; }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace archevo
