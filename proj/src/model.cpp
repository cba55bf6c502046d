#include "archevo/model.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "archevo/errors.hpp"
#include "archevo/rng.hpp"
#include "json_util.hpp"

namespace archevo {

namespace {

constexpr std::array<std::string_view, kRelationKindCount> kKindTokens = {"as", "ag", "co", "ge",
                                                                          "de"};

}  // namespace

std::string_view to_string(RelationKind kind) { return kKindTokens[static_cast<std::size_t>(kind)]; }

std::optional<RelationKind> relation_kind_from_string(std::string_view token) {
  for (std::size_t i = 0; i < kKindTokens.size(); ++i) {
    if (kKindTokens[i] == token) return static_cast<RelationKind>(i);
  }
  return std::nullopt;
}

AnalysisModel::AnalysisModel(std::vector<ClassDef> classes, std::vector<Relationship> relationships)
    : classes_(std::move(classes)), relationships_(std::move(relationships)) {
  if (classes_.size() < 2) {
    throw ValidationError("model must contain at least 2 classes");
  }
  public_methods_.resize(classes_.size());
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    const ClassDef& c = classes_[i];
    if (c.id.empty()) throw ValidationError("class #" + std::to_string(i) + " has an empty id");
    if (c.name.empty()) throw ValidationError("class '" + c.id + "' has an empty name");
    if (!index_.emplace(c.id, static_cast<ClassIndex>(i)).second) {
      throw ValidationError("duplicate class id '" + c.id + "'");
    }
    std::unordered_set<std::string> names;
    for (const MethodDef& m : c.methods) {
      if (m.name.empty()) throw ValidationError("class '" + c.id + "' has a method with empty name");
      if (!names.insert(m.name).second) {
        throw ValidationError("class '" + c.id + "' declares method '" + m.name + "' twice");
      }
      if (m.visibility == Visibility::public_) public_methods_[i].push_back(m.name);
    }
  }

  std::unordered_set<std::string> rel_ids;
  edges_.reserve(relationships_.size());
  for (const Relationship& r : relationships_) {
    if (r.id.empty()) throw ValidationError("relationship with empty id");
    if (!rel_ids.insert(r.id).second) {
      throw ValidationError("duplicate relationship id '" + r.id + "'");
    }
    auto src = index_.find(r.source);
    if (src == index_.end()) {
      throw ValidationError("relationship '" + r.id + "' references unknown source class '" +
                            r.source + "'");
    }
    auto dst = index_.find(r.target);
    if (dst == index_.end()) {
      throw ValidationError("relationship '" + r.id + "' references unknown target class '" +
                            r.target + "'");
    }
    if (r.kind == RelationKind::generalization) {
      if (src->second == dst->second) {
        throw ValidationError("relationship '" + r.id + "' is a self-generalization");
      }
      if (r.navigable) {
        throw ValidationError("relationship '" + r.id + "': generalizations are never navigable");
      }
    }
    if (r.kind == RelationKind::dependency && !r.navigable) {
      throw ValidationError("relationship '" + r.id + "': dependencies are always navigable");
    }
    edges_.push_back(Edge{src->second, dst->second, r.kind, r.navigable});
  }
}

std::optional<ClassIndex> AnalysisModel::class_index(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::array<std::size_t, kRelationKindCount> AnalysisModel::kind_counts() const {
  std::array<std::size_t, kRelationKindCount> counts{};
  for (const Edge& e : edges_) ++counts[static_cast<std::size_t>(e.kind)];
  return counts;
}

AnalysisModel parse_model(std::string_view document) {
  using namespace detail;
  const Json root = parse_json(document);
  expect_keys(root, "", {"classes", "relationships"});

  std::vector<ClassDef> classes;
  const Json& jclasses = require_array(root, "", "classes");
  for (std::size_t i = 0; i < jclasses.size(); ++i) {
    const std::string where = "/classes/" + std::to_string(i);
    const Json& jc = jclasses[i];
    expect_keys(jc, where, {"id", "name", "methods"});
    ClassDef c;
    c.id = require_string(jc, where, "id");
    c.name = require_string(jc, where, "name");
    const Json& jmethods = require_array(jc, where, "methods");
    for (std::size_t k = 0; k < jmethods.size(); ++k) {
      const std::string mwhere = where + "/methods/" + std::to_string(k);
      expect_keys(jmethods[k], mwhere, {"name", "visibility"});
      MethodDef m;
      m.name = require_string(jmethods[k], mwhere, "name");
      const std::string vis = require_string(jmethods[k], mwhere, "visibility");
      if (vis == "public") {
        m.visibility = Visibility::public_;
      } else if (vis == "nonpublic") {
        m.visibility = Visibility::nonpublic;
      } else {
        throw ValidationError(mwhere + "/visibility: unknown visibility '" + vis + "'");
      }
      c.methods.push_back(std::move(m));
    }
    classes.push_back(std::move(c));
  }

  std::vector<Relationship> relationships;
  const Json& jrels = require_array(root, "", "relationships");
  for (std::size_t i = 0; i < jrels.size(); ++i) {
    const std::string where = "/relationships/" + std::to_string(i);
    const Json& jr = jrels[i];
    expect_keys(jr, where, {"id", "kind", "source", "target", "navigable"});
    Relationship r;
    r.id = require_string(jr, where, "id");
    const std::string kind = require_string(jr, where, "kind");
    auto parsed = relation_kind_from_string(kind);
    if (!parsed) throw ValidationError(where + "/kind: unknown relationship kind '" + kind + "'");
    r.kind = *parsed;
    r.source = require_string(jr, where, "source");
    r.target = require_string(jr, where, "target");
    r.navigable = require_bool(jr, where, "navigable");
    relationships.push_back(std::move(r));
  }
  return AnalysisModel(std::move(classes), std::move(relationships));
}

AnalysisModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_model(buffer.str());
}

std::string serialize_model(const AnalysisModel& model) {
  using detail::OrderedJson;
  OrderedJson root;
  OrderedJson classes = OrderedJson::array();
  for (const ClassDef& c : model.classes()) {
    OrderedJson jc;
    jc["id"] = c.id;
    jc["name"] = c.name;
    OrderedJson methods = OrderedJson::array();
    for (const MethodDef& m : c.methods) {
      OrderedJson jm;
      jm["name"] = m.name;
      jm["visibility"] = m.visibility == Visibility::public_ ? "public" : "nonpublic";
      methods.push_back(std::move(jm));
    }
    jc["methods"] = std::move(methods);
    classes.push_back(std::move(jc));
  }
  root["classes"] = std::move(classes);
  OrderedJson rels = OrderedJson::array();
  for (const Relationship& r : model.relationships()) {
    OrderedJson jr;
    jr["id"] = r.id;
    jr["kind"] = std::string(to_string(r.kind));
    jr["source"] = r.source;
    jr["target"] = r.target;
    jr["navigable"] = r.navigable;
    rels.push_back(std::move(jr));
  }
  root["relationships"] = std::move(rels);
  return root.dump(2) + "\n";
}

AnalysisModel generate_model(const GeneratorSpec& spec) {
  if (spec.n_classes < 2) throw ConfigError("generator needs at least 2 classes");
  if (!(spec.navigable_probability >= 0.0 && spec.navigable_probability <= 1.0)) {
    throw ConfigError("navigable probability must lie in [0, 1]");
  }
  Rng rng(spec.seed);

  std::vector<ClassDef> classes;
  classes.reserve(spec.n_classes);
  for (std::size_t i = 0; i < spec.n_classes; ++i) {
    ClassDef c;
    c.id = "C" + std::to_string(i + 1);
    c.name = "Class" + std::to_string(i + 1);
    const std::size_t n_public = rng.between(1, 3);
    for (std::size_t k = 0; k < n_public; ++k) {
      c.methods.push_back({"op" + std::to_string(k + 1), Visibility::public_});
    }
    if (rng.bernoulli(0.5)) c.methods.push_back({"helper", Visibility::nonpublic});
    classes.push_back(std::move(c));
  }

  std::vector<Relationship> rels;
  std::size_t next_id = 1;
  for (std::size_t kind = 0; kind < kRelationKindCount; ++kind) {
    const auto rk = static_cast<RelationKind>(kind);
    for (std::size_t k = 0; k < spec.counts[kind]; ++k) {
      const std::size_t s = rng.index(spec.n_classes);
      std::size_t t = rng.index(spec.n_classes - 1);
      if (t >= s) ++t;  // distinct endpoints
      Relationship r;
      r.id = "R" + std::to_string(next_id++);
      r.kind = rk;
      r.source = classes[s].id;
      r.target = classes[t].id;
      switch (rk) {
        case RelationKind::generalization: r.navigable = false; break;
        case RelationKind::dependency: r.navigable = true; break;
        default: r.navigable = rng.bernoulli(spec.navigable_probability); break;
      }
      rels.push_back(std::move(r));
    }
  }
  return AnalysisModel(std::move(classes), std::move(rels));
}

std::size_t candidate_interface_count(const AnalysisModel& model) {
  std::size_t count = 0;
  for (const Edge& e : model.edges()) count += e.navigable ? 1 : 0;
  return count;
}

}  // namespace archevo
