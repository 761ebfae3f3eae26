#include <algorithm>
#include <deque>
#include <json.hpp>

#include "dtinsight/constellation.hpp"

namespace dtinsight::constellation {

using dtdf::QualifiedName;
using dtdf::vocab_name;

std::string_view to_string(NodeCategory c) {
    switch (c) {
    case NodeCategory::PT_Operator: return "PT_Operator";
    case NodeCategory::PT_Machine: return "PT_Machine";
    case NodeCategory::PT_SystemEnvironment: return "PT_SystemEnvironment";
    case NodeCategory::PT_System: return "PT_System";
    case NodeCategory::PT_Sensors: return "PT_Sensors";
    case NodeCategory::DT_ModelData: return "DT_ModelData";
    case NodeCategory::DT_Enabler: return "DT_Enabler";
    case NodeCategory::DT_Service: return "DT_Service";
    case NodeCategory::DT_Provided: return "DT_Provided";
    }
    return "?";
}

std::optional<NodeCategory> category_from_string(std::string_view s) {
    for (int i = 0; i <= static_cast<int>(NodeCategory::DT_Provided); ++i) {
        auto c = static_cast<NodeCategory>(i);
        if (to_string(c) == s) return c;
    }
    return std::nullopt;
}

bool is_physical(NodeCategory c) { return c <= NodeCategory::PT_Sensors; }

const Node* ConstellationGraph::find(std::string_view id) const {
    auto it = std::find_if(nodes.begin(), nodes.end(), [&](const Node& n) { return n.id == id; });
    return it == nodes.end() ? nullptr : &*it;
}

namespace {

const std::vector<std::pair<QualifiedName, NodeCategory>>& category_concepts() {
    static const std::vector<std::pair<QualifiedName, NodeCategory>> table = {
        {vocab_name("Service"), NodeCategory::DT_Service},
        {vocab_name("Enabler"), NodeCategory::DT_Enabler},
        {vocab_name("Model"), NodeCategory::DT_ModelData},
        {vocab_name("Data"), NodeCategory::DT_ModelData},
        {vocab_name("Operator"), NodeCategory::PT_Operator},
        {vocab_name("Machine"), NodeCategory::PT_Machine},
        {vocab_name("SystemEnvironment"), NodeCategory::PT_SystemEnvironment},
        {vocab_name("System"), NodeCategory::PT_System},
        {vocab_name("SensorsDataTransmission"), NodeCategory::PT_Sensors},
    };
    return table;
}

// Breadth-first up the specialization graph; the first category concept met wins.
std::optional<NodeCategory> nearest_category(const QualifiedName& kind, const dtdf::Vocabulary& vocab) {
    std::deque<QualifiedName> queue{kind};
    std::set<QualifiedName> seen{kind};
    while (!queue.empty()) {
        QualifiedName current = queue.front();
        queue.pop_front();
        for (const auto& [concept_, category] : category_concepts())
            if (concept_ == current) return category;
        if (const auto* def = vocab.find_concept(current))
            for (const auto& p : def->parents)
                if (seen.insert(p).second) queue.push_back(p);
    }
    return std::nullopt;
}

}  // namespace

ConstellationGraph build_constellation(const dtdf::DescriptionModel& model,
                                       const dtdf::Vocabulary& vocab,
                                       const BuildOptions& options) {
    const auto dtComponent = vocab_name("DTComponent");
    const auto ptComponent = vocab_name("PTComponent");
    const auto* provides = vocab.find_relation(vocab_name("Provides"));
    const std::set<const dtdf::RelationDef*> drawn = {
        vocab.find_relation(vocab_name("Enables")), vocab.find_relation(vocab_name("InputTo")),
        vocab.find_relation(vocab_name("DataInput")), provides};

    std::map<QualifiedName, NodeCategory> categories;
    for (const auto& inst : model.instances) {
        if (!vocab.specializes(inst.kind, dtComponent) && !vocab.specializes(inst.kind, ptComponent)) continue;
        if (auto c = nearest_category(inst.kind, vocab)) categories.emplace(inst.id, *c);
    }
    if (options.providedSatellites && provides) {
        for (const auto& inst : model.instances) {
            auto it = categories.find(inst.id);
            if (it == categories.end() || it->second != NodeCategory::DT_Service) continue;
            for (const auto& a : inst.relations) {
                if (vocab.find_relation_by_forward(a.relation) != provides || categories.count(a.target)) continue;
                const auto* target = model.find(a.target);
                if (target && vocab.find_concept(target->kind)) categories.emplace(a.target, NodeCategory::DT_Provided);
            }
        }
    }

    ConstellationGraph g;
    std::set<QualifiedName> placed;
    for (const auto& inst : model.instances) {
        auto it = categories.find(inst.id);
        if (it == categories.end() || !placed.insert(inst.id).second) continue;
        g.nodes.push_back({model.display_id(inst.id), inst.id.local(), it->second});
    }
    for (const auto& inst : model.instances) {
        if (!categories.count(inst.id)) continue;
        for (const auto& a : inst.relations) {
            const auto* rel = vocab.find_relation_by_forward(a.relation);
            if (!rel || !drawn.count(rel) || !categories.count(a.target) || a.target == inst.id) continue;
            g.edges.push_back({model.display_id(inst.id), model.display_id(a.target), rel->forward});
        }
    }
    return g;
}

std::optional<Direction> direction_from_string(std::string_view s) {
    if (s == "forward") return Direction::Forward;
    if (s == "backward") return Direction::Backward;
    if (s == "both") return Direction::Both;
    return std::nullopt;
}

std::set<std::string> closure(const ConstellationGraph& graph, std::string_view start, Direction direction) {
    if (!graph.find(start)) throw UnknownNode(std::string(start));
    if (direction == Direction::Both) {
        // upstream plus downstream, not undirected reachability
        auto up = closure(graph, start, Direction::Backward);
        up.merge(closure(graph, start, Direction::Forward));
        return up;
    }
    std::map<std::string, std::vector<std::string>> adjacency;
    for (const auto& e : graph.edges) {
        if (direction == Direction::Forward)
            adjacency[e.src].push_back(e.dst);
        else
            adjacency[e.dst].push_back(e.src);
    }
    std::set<std::string> seen{std::string(start)};
    std::deque<std::string> queue{std::string(start)};
    while (!queue.empty()) {
        auto id = std::move(queue.front());
        queue.pop_front();
        for (const auto& next : adjacency[id])
            if (seen.insert(next).second) queue.push_back(next);
    }
    return seen;
}

std::string closure_json(const std::set<std::string>& ids) {
    nlohmann::json doc;
    doc["ids"] = nlohmann::json::array();
    for (const auto& id : ids) doc["ids"].push_back(id);
    return doc.dump();
}

}  // namespace dtinsight::constellation
