#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace archevo {

using ClassIndex = std::uint32_t;

enum class RelationKind : std::uint8_t {
  association,
  aggregation,
  composition,
  generalization,
  dependency,
};
inline constexpr std::size_t kRelationKindCount = 5;

std::string_view to_string(RelationKind kind);
std::optional<RelationKind> relation_kind_from_string(std::string_view token);

enum class Visibility : std::uint8_t { public_, nonpublic };

struct MethodDef {
  std::string name;
  Visibility visibility = Visibility::public_;

  bool operator==(const MethodDef&) const = default;
};

struct ClassDef {
  std::string id;
  std::string name;
  std::vector<MethodDef> methods;

  bool operator==(const ClassDef&) const = default;
};

struct Relationship {
  std::string id;
  RelationKind kind = RelationKind::association;
  std::string source;
  std::string target;
  bool navigable = false;

  bool operator==(const Relationship&) const = default;
};

/// Relationship resolved to class indices; this is what the metric and
/// interface code iterates over.
struct Edge {
  ClassIndex source;
  ClassIndex target;
  RelationKind kind;
  bool navigable;
};

/// Validated class diagram. Immutable once constructed.
class AnalysisModel {
 public:
  /// Throws ValidationError if any invariant is broken: duplicate ids, empty
  /// names, duplicate method names, dangling endpoints, self-generalization,
  /// navigable generalization, non-navigable dependency, fewer than 2 classes.
  AnalysisModel(std::vector<ClassDef> classes, std::vector<Relationship> relationships);

  const std::vector<ClassDef>& classes() const noexcept { return classes_; }
  const std::vector<Relationship>& relationships() const noexcept { return relationships_; }
  std::span<const Edge> edges() const noexcept { return edges_; }

  std::size_t class_count() const noexcept { return classes_.size(); }
  std::optional<ClassIndex> class_index(std::string_view id) const;
  const std::string& class_id(ClassIndex index) const { return classes_[index].id; }

  /// Public method names of a class, in declaration order.
  const std::vector<std::string>& public_methods(ClassIndex index) const {
    return public_methods_[index];
  }

  std::array<std::size_t, kRelationKindCount> kind_counts() const;

  bool operator==(const AnalysisModel& other) const {
    return classes_ == other.classes_ && relationships_ == other.relationships_;
  }

 private:
  std::vector<ClassDef> classes_;
  std::vector<Relationship> relationships_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::string>> public_methods_;
  std::unordered_map<std::string, ClassIndex> index_;
};

/// Parses the strict JSON model format. Throws ParseError (malformed JSON or
/// wrong shape) or ValidationError (model invariants).
AnalysisModel parse_model(std::string_view document);
AnalysisModel load_model(const std::filesystem::path& path);

/// Canonical serialization; parse_model(serialize_model(m)) == m.
std::string serialize_model(const AnalysisModel& model);

struct GeneratorSpec {
  std::size_t n_classes = 10;
  /// Indexed by RelationKind.
  std::array<std::size_t, kRelationKindCount> counts{};
  double navigable_probability = 0.5;
  std::uint64_t seed = 1;
};

/// Deterministic synthetic model. Throws ConfigError when the settings cannot be
/// satisfied.
AnalysisModel generate_model(const GeneratorSpec& spec);

/// Relationships whose navigability is set: navigable as/ag/co plus every
/// dependency.
std::size_t candidate_interface_count(const AnalysisModel& model);

}  // namespace archevo
