#include "dtinsight/dtdf.hpp"

#include <algorithm>
#include <charconv>
#include <json.hpp>

#include "dtinsight/text.hpp"

namespace dtinsight::dtdf {

std::string render_literal(const Literal& lit) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, bool>)
                return v ? "true" : "false";
            else if constexpr (std::is_same_v<T, double>)
                return text::format_decimal(v);
            else
                return text::quote(v);
        },
        lit);
}

std::string DescriptionModel::display_id(const QualifiedName& id) const {
    return id.prefix() == name ? id.local() : id.str();
}

const Instance* DescriptionModel::find(const QualifiedName& id) const {
    auto it = std::find_if(instances.begin(), instances.end(),
                           [&](const Instance& i) { return i.id == id; });
    return it == instances.end() ? nullptr : &*it;
}

std::string_view to_string(Severity s) { return s == Severity::Error ? "error" : "warning"; }

std::size_t ValidationReport::error_count() const {
    return static_cast<std::size_t>(std::count_if(findings.begin(), findings.end(), [](const Finding& f) {
        return f.severity == Severity::Error;
    }));
}

namespace {

bool literal_matches(const Literal& lit, PrimitiveKind kind) {
    switch (kind) {
    case PrimitiveKind::Boolean: return std::holds_alternative<bool>(lit);
    case PrimitiveKind::Number: return std::holds_alternative<double>(lit);
    case PrimitiveKind::String: return std::holds_alternative<std::string>(lit);
    }
    return false;
}

}  // namespace

ValidationReport validate(const DescriptionModel& model, const Vocabulary& vocab) {
    ValidationReport report;
    auto add = [&](Severity sev, std::string code, const Instance& inst, std::string msg) {
        report.findings.push_back({sev, std::move(code), inst.id, std::move(msg)});
    };

    std::map<QualifiedName, std::vector<const Instance*>> byId;
    for (const auto& inst : model.instances) byId[inst.id].push_back(&inst);

    auto usable_kind = [&](const Instance& inst) {
        const auto* c = vocab.find_concept(inst.kind);
        return c != nullptr && !c->isAspect;
    };

    for (const auto& inst : model.instances) {
        if (byId[inst.id].front() != &inst)
            add(Severity::Error, "DuplicateId", inst, "duplicate instance id '" + inst.id.str() + "'");

        const auto* kind = vocab.find_concept(inst.kind);
        if (!kind)
            add(Severity::Error, "UnknownKind", inst, "unknown kind '" + inst.kind.str() + "'");
        else if (kind->isAspect)
            add(Severity::Error, "KindIsAspect", inst,
                "kind '" + inst.kind.str() + "' is an aspect and cannot be instantiated");
        const bool kindOk = usable_kind(inst);

        for (const auto& a : inst.relations) {
            const auto* rel = vocab.find_relation_by_forward(a.relation);
            if (!rel) {
                add(Severity::Error, "UnknownRelation", inst, "unknown relation '" + a.relation.str() + "'");
                continue;
            }
            if (kindOk && !vocab.specializes(inst.kind, rel->domain))
                add(Severity::Error, "DomainRangeViolation", inst,
                    "subject kind '" + inst.kind.str() + "' does not specialize domain '" +
                        rel->domain.str() + "' of " + a.relation.str());
            auto targets = byId.find(a.target);
            if (targets == byId.end()) {
                add(Severity::Warning, "DanglingTarget", inst,
                    "target '" + a.target.str() + "' of " + a.relation.str() + " is not in the model");
                continue;
            }
            bool rangeOk = std::all_of(targets->second.begin(), targets->second.end(), [&](const Instance* t) {
                return !usable_kind(*t) || vocab.specializes(t->kind, rel->range);
            });
            if (!rangeOk)
                add(Severity::Error, "DomainRangeViolation", inst,
                    "target '" + a.target.str() + "' does not specialize range '" + rel->range.str() +
                        "' of " + a.relation.str());
        }

        std::map<QualifiedName, int> counts;
        for (const auto& s : inst.scalars) {
            const auto* prop = vocab.find_scalar(s.property);
            if (!prop) {
                add(Severity::Error, "UnknownProperty", inst, "unknown scalar property '" + s.property.str() + "'");
                continue;
            }
            if (kindOk && !vocab.specializes(inst.kind, prop->domain))
                add(Severity::Error, "DomainRangeViolation", inst,
                    "subject kind '" + inst.kind.str() + "' does not specialize domain '" +
                        prop->domain.str() + "' of " + s.property.str());
            if (!literal_matches(s.value, prop->range))
                add(Severity::Error, "ScalarRangeMismatch", inst,
                    s.property.str() + " expects a " + std::string(to_string(prop->range)) + " literal");
            if (prop->functional && ++counts[s.property] == 2)
                add(Severity::Error, "FunctionalViolation", inst,
                    "functional property " + s.property.str() + " asserted more than once");
        }
    }
    return report;
}

// ---------------------------------------------------------------------------

CharacteristicRegistry CharacteristicRegistry::defaults() {
    CharacteristicRegistry r;
    r.entries_.resize(kCharacteristicCount);
    for (int n = 1; n <= kCharacteristicCount; ++n)
        r.entries_[n - 1].label = code(n) + " (per DTDF)";
    auto set = [&](int n, std::string label, std::vector<QualifiedName> concepts) {
        r.entries_[n - 1] = {std::move(label), std::move(concepts)};
    };
    set(6, "Services", {vocab_name("Service")});
    set(7, "Twinning time-scale", {vocab_name("TimeScale")});
    set(10, "Models/Data", {vocab_name("Model"), vocab_name("Data")});
    set(11, "Enablers", {vocab_name("Enabler")});
    set(14, "Fidelity and validity considerations", {vocab_name("FidelityValidity")});
    set(15, "Technical implementation", {vocab_name("TechnicalImplementation")});
    set(20, "Standardization", {vocab_name("Standardization")});
    set(21, "Security and safety considerations", {vocab_name("SecuritySafety")});
    return r;
}

CharacteristicRegistry CharacteristicRegistry::with_overrides(std::string_view json_text,
                                                              const Vocabulary* vocab) const {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw RegistryError(std::string("registry file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw RegistryError("registry file must contain a JSON object");

    CharacteristicRegistry out = *this;
    for (const auto& [key, value] : doc.items()) {
        int n = 0;
        if (key.size() >= 2 && key[0] == 'C') {
            auto [ptr, ec] = std::from_chars(key.data() + 1, key.data() + key.size(), n);
            if (ec != std::errc{} || ptr != key.data() + key.size()) n = 0;
        }
        if (n < 1 || n > kCharacteristicCount || key != code(n))
            throw RegistryError("unknown characteristic code '" + key + "'");
        if (!value.is_object()) throw RegistryError(key + ": entry must be an object");

        auto& entry = out.entries_[n - 1];
        auto label = value.find("label");
        if (label == value.end() || !label->is_string() || label->get<std::string>().empty())
            throw RegistryError(key + ": 'label' must be a non-empty string");
        entry.label = label->get<std::string>();

        if (auto concepts = value.find("concepts"); concepts != value.end()) {
            if (!concepts->is_array()) throw RegistryError(key + ": 'concepts' must be an array");
            entry.boundConcepts.clear();
            for (const auto& c : *concepts) {
                if (!c.is_string()) throw RegistryError(key + ": concept names must be strings");
                QualifiedName qn;
                try {
                    qn = QualifiedName::parse(c.get<std::string>());
                } catch (const std::invalid_argument& e) {
                    throw RegistryError(key + ": " + e.what());
                }
                if (vocab && !vocab->find_concept(qn))
                    throw RegistryError(key + ": unknown concept '" + qn.str() + "'");
                entry.boundConcepts.push_back(std::move(qn));
            }
        }
    }
    return out;
}

const CharacteristicEntry& CharacteristicRegistry::entry(int number) const {
    if (number < 1 || number > kCharacteristicCount) throw std::out_of_range("characteristic number");
    return entries_.at(number - 1);
}

CharacteristicsTable characteristics_table(const DescriptionModel& model,
                                           const Vocabulary& vocab,
                                           const CharacteristicRegistry& registry) {
    CharacteristicsTable table;
    table.reserve(kCharacteristicCount);
    for (int n = 1; n <= kCharacteristicCount; ++n) {
        const auto& entry = registry.entry(n);
        CharacteristicRow row{CharacteristicRegistry::code(n), entry.label, {}, {}};
        for (const auto& inst : model.instances) {
            if (!inst.desc || text::trim(*inst.desc).empty()) continue;
            bool bound = std::any_of(entry.boundConcepts.begin(), entry.boundConcepts.end(),
                                     [&](const QualifiedName& c) { return vocab.specializes(inst.kind, c); });
            if (!bound) continue;
            if (!row.text.empty()) row.text += "\n\n";
            row.text += *inst.desc;
            row.sourceInstanceIds.push_back(model.display_id(inst.id));
        }
        if (row.sourceInstanceIds.empty()) row.text = kNotReported;
        table.push_back(std::move(row));
    }
    return table;
}

}  // namespace dtinsight::dtdf
