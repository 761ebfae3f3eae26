#include "dtinsight/dtdf.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace dtinsight::dtdf {

bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    auto head = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
    auto tail = [&](char c) { return head(c) || (c >= '0' && c <= '9'); };
    if (!head(s.front())) return false;
    return std::all_of(s.begin() + 1, s.end(), tail);
}

QualifiedName::QualifiedName(std::string prefix, std::string local)
    : prefix_(std::move(prefix)), local_(std::move(local)) {
    if (!is_identifier(prefix_) || !is_identifier(local_))
        throw std::invalid_argument("malformed qualified name '" + prefix_ + ":" + local_ + "'");
}

QualifiedName QualifiedName::parse(std::string_view text) {
    auto colon = text.find(':');
    if (colon == std::string_view::npos)
        throw std::invalid_argument("qualified name needs a prefix: '" + std::string(text) + "'");
    return QualifiedName(std::string(text.substr(0, colon)), std::string(text.substr(colon + 1)));
}

QualifiedName vocab_name(std::string_view local) {
    return QualifiedName(std::string(kVocabPrefix), std::string(local));
}

std::string_view to_string(PrimitiveKind k) {
    switch (k) {
    case PrimitiveKind::Boolean: return "boolean";
    case PrimitiveKind::String: return "string";
    case PrimitiveKind::Number: return "number";
    }
    return "?";
}

namespace {

std::string join_issues(const std::vector<VocabularyIssue>& issues) {
    std::ostringstream os;
    os << "invalid vocabulary";
    for (const auto& i : issues) os << "\n  " << i.name.str() << ": " << i.message;
    return os.str();
}

}  // namespace

VocabularyError::VocabularyError(std::vector<VocabularyIssue> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

const ConceptDef* Vocabulary::find_concept(const QualifiedName& name) const {
    auto it = conceptIndex_.find(name);
    return it == conceptIndex_.end() ? nullptr : &concepts_[it->second];
}

const RelationDef* Vocabulary::find_relation(const QualifiedName& name) const {
    auto it = relationIndex_.find(name);
    return it == relationIndex_.end() ? nullptr : &relations_[it->second];
}

const RelationDef* Vocabulary::find_relation_by_forward(const QualifiedName& key) const {
    auto it = forwardIndex_.find(key);
    return it == forwardIndex_.end() ? nullptr : &relations_[it->second];
}

const ScalarPropDef* Vocabulary::find_scalar(const QualifiedName& name) const {
    auto it = scalarIndex_.find(name);
    return it == scalarIndex_.end() ? nullptr : &scalars_[it->second];
}

bool Vocabulary::has_name(const QualifiedName& name) const {
    return conceptIndex_.count(name) || relationIndex_.count(name) || scalarIndex_.count(name);
}

const std::set<QualifiedName>& Vocabulary::ancestors(const QualifiedName& name) const {
    static const std::set<QualifiedName> empty;
    auto it = ancestors_.find(name);
    return it == ancestors_.end() ? empty : it->second;
}

bool Vocabulary::specializes(const QualifiedName& sub, const QualifiedName& super) const {
    auto it = ancestors_.find(sub);
    if (it == ancestors_.end() || !conceptIndex_.count(super)) return false;
    return it->second.count(super) > 0;
}

std::vector<VocabularyIssue> Vocabulary::check_extension(const std::vector<ConceptDef>& concepts,
                                                         const std::vector<RelationDef>& relations,
                                                         const std::vector<ScalarPropDef>& scalars) const {
    std::vector<VocabularyIssue> issues;
    std::set<QualifiedName> batchNames;
    auto claim = [&](const QualifiedName& n) {
        if (has_name(n))
            issues.push_back({n, "redefinition of existing name"});
        else if (!batchNames.insert(n).second)
            issues.push_back({n, "declared more than once"});
    };
    for (const auto& c : concepts) claim(c.name);
    for (const auto& r : relations) claim(r.name);
    for (const auto& s : scalars) claim(s.name);

    std::map<QualifiedName, const ConceptDef*> allConcepts;
    for (const auto& c : concepts_) allConcepts.emplace(c.name, &c);
    for (const auto& c : concepts) allConcepts.emplace(c.name, &c);

    for (const auto& c : concepts) {
        for (const auto& p : c.parents) {
            auto it = allConcepts.find(p);
            if (it == allConcepts.end()) {
                issues.push_back({c.name, "unknown parent '" + p.str() + "'"});
            } else if (c.isAspect && !it->second->isAspect) {
                issues.push_back({c.name, "aspect cannot specialize concept '" + p.str() + "'"});
            }
            if (p == c.name) issues.push_back({c.name, "concept specializes itself"});
        }
    }

    // Cycle detection over the merged specialization graph.
    enum class Mark { None, Active, Done };
    std::map<QualifiedName, Mark> marks;
    std::set<QualifiedName> cyclic;
    std::function<bool(const QualifiedName&)> visit = [&](const QualifiedName& n) -> bool {
        auto& m = marks[n];
        if (m == Mark::Active) return true;
        if (m == Mark::Done) return false;
        m = Mark::Active;
        bool cycle = false;
        auto it = allConcepts.find(n);
        if (it != allConcepts.end())
            for (const auto& p : it->second->parents)
                if (p != n && visit(p)) cycle = true;
        marks[n] = Mark::Done;
        if (cycle) cyclic.insert(n);
        return cycle;
    };
    for (const auto& c : concepts) {
        marks.clear();
        if (visit(c.name)) issues.push_back({c.name, "specialization cycle"});
    }

    std::set<std::string> directionNames;
    for (const auto& r : relations_) {
        directionNames.insert(r.name.prefix() + ":" + r.forward);
        directionNames.insert(r.name.prefix() + ":" + r.reverse);
    }
    for (const auto& r : relations) {
        if (!allConcepts.count(r.domain))
            issues.push_back({r.name, "unknown domain '" + r.domain.str() + "'"});
        if (!allConcepts.count(r.range))
            issues.push_back({r.name, "unknown range '" + r.range.str() + "'"});
        if (!is_identifier(r.forward) || !is_identifier(r.reverse))
            issues.push_back({r.name, "forward/reverse must be identifiers"});
        if (r.forward == r.reverse)
            issues.push_back({r.name, "forward and reverse names must differ"});
        for (const auto* dir : {&r.forward, &r.reverse})
            if (!directionNames.insert(r.name.prefix() + ":" + *dir).second)
                issues.push_back({r.name, "forward/reverse name '" + *dir + "' already in use"});
    }
    for (const auto& s : scalars)
        if (!allConcepts.count(s.domain))
            issues.push_back({s.name, "unknown domain '" + s.domain.str() + "'"});
    return issues;
}

Vocabulary Vocabulary::extend(const std::vector<ConceptDef>& concepts,
                              const std::vector<RelationDef>& relations,
                              const std::vector<ScalarPropDef>& scalars) const {
    auto issues = check_extension(concepts, relations, scalars);
    if (!issues.empty()) throw VocabularyError(std::move(issues));
    Vocabulary out = *this;
    out.concepts_.insert(out.concepts_.end(), concepts.begin(), concepts.end());
    out.relations_.insert(out.relations_.end(), relations.begin(), relations.end());
    out.scalars_.insert(out.scalars_.end(), scalars.begin(), scalars.end());
    out.rebuild_index();
    return out;
}

void Vocabulary::rebuild_index() {
    conceptIndex_.clear();
    relationIndex_.clear();
    forwardIndex_.clear();
    scalarIndex_.clear();
    ancestors_.clear();
    for (std::size_t i = 0; i < concepts_.size(); ++i) conceptIndex_[concepts_[i].name] = i;
    for (std::size_t i = 0; i < relations_.size(); ++i) {
        const auto& r = relations_[i];
        relationIndex_[r.name] = i;
        forwardIndex_[QualifiedName(r.name.prefix(), r.forward)] = i;
    }
    for (std::size_t i = 0; i < scalars_.size(); ++i) scalarIndex_[scalars_[i].name] = i;

    // acyclic, so plain memoized recursion terminates
    std::function<const std::set<QualifiedName>&(const QualifiedName&)> closure =
        [&](const QualifiedName& n) -> const std::set<QualifiedName>& {
        if (auto it = ancestors_.find(n); it != ancestors_.end()) return it->second;
        std::set<QualifiedName> acc{n};
        for (const auto& p : concepts_[conceptIndex_.at(n)].parents) {
            const auto& up = closure(p);
            acc.insert(up.begin(), up.end());
        }
        return ancestors_.emplace(n, std::move(acc)).first->second;
    };
    for (const auto& c : concepts_) closure(c.name);
}

const Vocabulary& builtin_vocabulary() {
    static const Vocabulary vocab = [] {
        auto v = vocab_name;
        const QualifiedName described(std::string(kBasePrefix), "DescribedThing");
        auto concept_ = [](QualifiedName n, std::vector<QualifiedName> parents = {}) {
            return ConceptDef{std::move(n), std::move(parents), false};
        };
        std::vector<ConceptDef> concepts = {
            concept_(described),
            concept_(v("DTComponent")),
            concept_(v("TimeScaleThing")),
            concept_(v("ProvidedThing")),
            // C6 Services, C11 Enablers, C10 Models/Data
            concept_(v("Service"), {v("DTComponent"), v("TimeScaleThing")}),
            concept_(v("Enabler"), {v("DTComponent")}),
            ConceptDef{v("Input"), {}, true},
            concept_(v("Model"), {v("DTComponent"), v("Input")}),
            concept_(v("Data"), {v("DTComponent"), v("Input")}),
            // described characteristics
            concept_(v("Standardization"), {described}),
            concept_(v("TimeScale"), {described}),
            concept_(v("FidelityValidity"), {described}),
            concept_(v("TechnicalImplementation"), {described}),
            concept_(v("SecuritySafety"), {described}),
            concept_(v("LifecycleStage"), {described}),
            // physical twin side
            concept_(v("PTComponent")),
            concept_(v("Operator"), {v("PTComponent")}),
            concept_(v("Machine"), {v("PTComponent")}),
            concept_(v("SystemEnvironment"), {v("PTComponent")}),
            concept_(v("System"), {v("PTComponent")}),
            concept_(v("SensorsDataTransmission"), {v("PTComponent")}),
            concept_(v("DataTransmitted"), {v("SensorsDataTransmission")}),
        };
        std::vector<RelationDef> relations = {
            {v("Provides"), v("Service"), v("ProvidedThing"), "provides", "providedBy"},
            {v("Enables"), v("Enabler"), v("Service"), "enables", "enabledBy"},
            {v("InputTo"), v("Input"), v("Enabler"), "inputTo", "hasInput"},
            {v("DataInput"), v("DataTransmitted"), v("Data"), "asData", "fromData"},
            {v("AtStage"), v("DTComponent"), v("LifecycleStage"), "atStage", "stageOf"},
        };
        std::vector<ScalarPropDef> scalars = {
            {v("IsCommEnabler"), v("Enabler"), PrimitiveKind::Boolean, true},
        };
        return Vocabulary{}.extend(concepts, relations, scalars);
    }();
    return vocab;
}

}  // namespace dtinsight::dtdf
