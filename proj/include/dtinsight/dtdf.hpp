#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace dtinsight::dtdf {

inline constexpr std::string_view kVocabPrefix = "DTDFVocab";
inline constexpr std::string_view kBasePrefix = "base";

bool is_identifier(std::string_view s);

// prefix:local, e.g. DTDFVocab:Service.
class QualifiedName {
public:
    QualifiedName() = default;
    QualifiedName(std::string prefix, std::string local);

    // Parses "prefix:local"; throws std::invalid_argument on malformed input.
    static QualifiedName parse(std::string_view text);

    const std::string& prefix() const { return prefix_; }
    const std::string& local() const { return local_; }
    std::string str() const { return prefix_ + ":" + local_; }

    auto operator<=>(const QualifiedName&) const = default;

private:
    std::string prefix_;
    std::string local_;
};

QualifiedName vocab_name(std::string_view local);

struct ConceptDef {
    QualifiedName name;
    std::vector<QualifiedName> parents;
    bool isAspect = false;

    bool operator==(const ConceptDef&) const = default;
};

struct RelationDef {
    QualifiedName name;
    QualifiedName domain;
    QualifiedName range;
    std::string forward;
    std::string reverse;

    bool operator==(const RelationDef&) const = default;
};

enum class PrimitiveKind { Boolean, String, Number };

std::string_view to_string(PrimitiveKind k);

struct ScalarPropDef {
    QualifiedName name;
    QualifiedName domain;
    PrimitiveKind range = PrimitiveKind::String;
    bool functional = false;

    bool operator==(const ScalarPropDef&) const = default;
};

// One problem found while assembling a vocabulary. `name` is the offending
// declaration.
struct VocabularyIssue {
    QualifiedName name;
    std::string message;
};

class VocabularyError : public std::runtime_error {
public:
    explicit VocabularyError(std::vector<VocabularyIssue> issues);
    const std::vector<VocabularyIssue>& issues() const { return issues_; }

private:
    std::vector<VocabularyIssue> issues_;
};

// Immutable schema: concepts/aspects with specialization, relation entities,
// scalar properties. Built in one batch so declarations may reference each
// other in any order.
class Vocabulary {
public:
    Vocabulary() = default;

    // Returns the issues that would make `extend` throw; empty means the batch
    // is acceptable.
    std::vector<VocabularyIssue> check_extension(const std::vector<ConceptDef>& concepts,
                                                 const std::vector<RelationDef>& relations,
                                                 const std::vector<ScalarPropDef>& scalars) const;

    // New vocabulary = this + batch. Throws VocabularyError.
    Vocabulary extend(const std::vector<ConceptDef>& concepts,
                      const std::vector<RelationDef>& relations,
                      const std::vector<ScalarPropDef>& scalars) const;

    const std::vector<ConceptDef>& concepts() const { return concepts_; }
    const std::vector<RelationDef>& relations() const { return relations_; }
    const std::vector<ScalarPropDef>& scalar_props() const { return scalars_; }

    const ConceptDef* find_concept(const QualifiedName& name) const;
    const RelationDef* find_relation(const QualifiedName& name) const;
    // Assertion keys name the forward identifier, e.g. DTDFVocab:enables.
    const RelationDef* find_relation_by_forward(const QualifiedName& key) const;
    const ScalarPropDef* find_scalar(const QualifiedName& name) const;
    bool has_name(const QualifiedName& name) const;

    // Reflexive, transitive. False when either side is undeclared.
    bool specializes(const QualifiedName& sub, const QualifiedName& super) const;
    const std::set<QualifiedName>& ancestors(const QualifiedName& name) const;

    bool operator==(const Vocabulary& o) const {
        return concepts_ == o.concepts_ && relations_ == o.relations_ && scalars_ == o.scalars_;
    }

private:
    void rebuild_index();

    std::vector<ConceptDef> concepts_;
    std::vector<RelationDef> relations_;
    std::vector<ScalarPropDef> scalars_;

    std::map<QualifiedName, std::size_t> conceptIndex_;
    std::map<QualifiedName, std::size_t> relationIndex_;
    std::map<QualifiedName, std::size_t> forwardIndex_;
    std::map<QualifiedName, std::size_t> scalarIndex_;
    std::map<QualifiedName, std::set<QualifiedName>> ancestors_;
};

const Vocabulary& builtin_vocabulary();

// ---------------------------------------------------------------------------
// Description models

using Literal = std::variant<bool, double, std::string>;

std::string render_literal(const Literal& lit);

struct RelationAssertion {
    QualifiedName relation;  // as written: prefix + forward name
    QualifiedName target;

    bool operator==(const RelationAssertion&) const = default;
};

struct ScalarAssertion {
    QualifiedName property;
    Literal value;

    bool operator==(const ScalarAssertion&) const = default;
};

struct Instance {
    QualifiedName id;
    QualifiedName kind;
    std::vector<RelationAssertion> relations;
    std::vector<ScalarAssertion> scalars;
    std::optional<std::string> desc;

    bool operator==(const Instance&) const = default;
};

struct DescriptionModel {
    std::string name;
    std::vector<std::string> imports;
    std::vector<Instance> instances;

    // Bare local name for ids in this model's own namespace, prefix:local otherwise.
    std::string display_id(const QualifiedName& id) const;
    const Instance* find(const QualifiedName& id) const;

    bool operator==(const DescriptionModel&) const = default;
};

inline const QualifiedName kDescAnnotation{"base", "desc"};

// ---------------------------------------------------------------------------
// Validation

enum class Severity { Error, Warning };

std::string_view to_string(Severity s);

struct Finding {
    Severity severity;
    std::string code;
    QualifiedName instance;
    std::string message;

    auto operator<=>(const Finding&) const = default;
};

struct ValidationReport {
    std::vector<Finding> findings;

    std::size_t error_count() const;
    bool ok() const { return error_count() == 0; }
};

ValidationReport validate(const DescriptionModel& model, const Vocabulary& vocab);

// ---------------------------------------------------------------------------
// Characteristics

struct CharacteristicEntry {
    std::string label;
    std::vector<QualifiedName> boundConcepts;

    bool operator==(const CharacteristicEntry&) const = default;
};

class RegistryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kCharacteristicCount = 21;

// Codes C1..C21 mapped to a label and bound concepts.
class CharacteristicRegistry {
public:
    static CharacteristicRegistry defaults();

    // Overlays a JSON object {"C<n>": {"label": ..., "concepts": [...]}}.
    // Unknown codes, empty labels and (when a vocabulary is given)
    // unresolved concepts raise RegistryError.
    CharacteristicRegistry with_overrides(std::string_view json_text,
                                          const Vocabulary* vocab = nullptr) const;

    const CharacteristicEntry& entry(int number) const;  // 1-based
    static std::string code(int number) { return "C" + std::to_string(number); }

private:
    std::vector<CharacteristicEntry> entries_;
};

inline constexpr std::string_view kNotReported = "not reported";

struct CharacteristicRow {
    std::string code;
    std::string label;
    std::string text;
    std::vector<std::string> sourceInstanceIds;

    bool operator==(const CharacteristicRow&) const = default;
};

using CharacteristicsTable = std::vector<CharacteristicRow>;

CharacteristicsTable characteristics_table(const DescriptionModel& model,
                                           const Vocabulary& vocab,
                                           const CharacteristicRegistry& registry);

}  // namespace dtinsight::dtdf
