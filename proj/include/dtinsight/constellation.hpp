#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dtinsight/dtdf.hpp"

namespace dtinsight::constellation {

enum class NodeCategory {
    PT_Operator,
    PT_Machine,
    PT_SystemEnvironment,
    PT_System,
    PT_Sensors,
    DT_ModelData,
    DT_Enabler,
    DT_Service,
    // Provides targets that carry no DT component category; only present
    // when satellites are enabled.
    DT_Provided,
};

std::string_view to_string(NodeCategory c);
std::optional<NodeCategory> category_from_string(std::string_view s);
bool is_physical(NodeCategory c);

struct Node {
    std::string id;  // display id (bare local name inside the model's namespace)
    std::string label;
    NodeCategory category;

    bool operator==(const Node&) const = default;
};

struct Edge {
    std::string src;
    std::string dst;
    std::string relation;  // forward name, e.g. "enables"

    bool operator==(const Edge&) const = default;
};

struct ConstellationGraph {
    std::vector<Node> nodes;  // model source order
    std::vector<Edge> edges;  // assertion source order

    const Node* find(std::string_view id) const;
    bool operator==(const ConstellationGraph&) const = default;
};

struct BuildOptions {
    bool providedSatellites = true;
};

ConstellationGraph build_constellation(const dtdf::DescriptionModel& model,
                                       const dtdf::Vocabulary& vocab,
                                       const BuildOptions& options = {});

enum class Direction { Forward, Backward, Both };

std::optional<Direction> direction_from_string(std::string_view s);

class UnknownNode : public std::runtime_error {
public:
    explicit UnknownNode(const std::string& id) : std::runtime_error("unknown node '" + id + "'") {}
};

// Reachable ids along edge direction, including `start`. Throws UnknownNode.
std::set<std::string> closure(const ConstellationGraph& graph, std::string_view start, Direction direction);

// {"ids":[...]} with ids in lexicographic order. The gateway serves exactly
// these bytes.
std::string closure_json(const std::set<std::string>& ids);

// ---------------------------------------------------------------------------
// Layout

namespace spacing {
inline constexpr double kLayerGap = 180;
inline constexpr double kNodeGap = 140;
inline constexpr double kPhysicalX = 0;
inline constexpr double kDigitalX = 400;
inline constexpr int kSweeps = 4;
}  // namespace spacing

struct Point {
    double x = 0;
    double y = 0;
    bool operator==(const Point&) const = default;
};

struct LayoutResult {
    std::map<std::string, Point> positions;  // node centres
    double width = 0;
    double height = 0;
    // Node ids: PT column top to bottom, then DT layers top to bottom, left to right.
    std::vector<std::string> order;

    bool operator==(const LayoutResult&) const = default;
};

LayoutResult layout(const ConstellationGraph& graph);

// Crossings between adjacent DT layers for the given positions (edges whose
// ends are not in adjacent DT layers are ignored).
std::size_t count_crossings(const ConstellationGraph& graph, const LayoutResult& layout);

// Same crossing count for an explicit per-layer ordering of the DT layers.
std::size_t count_crossings(const ConstellationGraph& graph,
                            const std::map<NodeCategory, std::vector<std::string>>& layers);

// Per-layer orders before any barycenter sweep (id-lexicographic).
std::map<NodeCategory, std::vector<std::string>> initial_layers(const ConstellationGraph& graph);

// ---------------------------------------------------------------------------
// Rendering

std::string to_yaml(const ConstellationGraph& graph, const LayoutResult& layout);

struct SvgOptions {
    // Standalone documents carry the XML prolog and namespace; inline ones
    // are meant for embedding in HTML.
    bool standalone = true;
};

std::string render_svg(const ConstellationGraph& graph, const LayoutResult& layout, const SvgOptions& options = {});

}  // namespace dtinsight::constellation
