#include <algorithm>
#include <cmath>
#include <sstream>

#include "dtinsight/constellation.hpp"
#include "dtinsight/text.hpp"

namespace dtinsight::constellation {

namespace {

using Layers = std::map<NodeCategory, std::vector<std::string>>;

constexpr NodeCategory kPhysicalOrder[] = {NodeCategory::PT_Operator, NodeCategory::PT_Machine,
                                           NodeCategory::PT_SystemEnvironment, NodeCategory::PT_System,
                                           NodeCategory::PT_Sensors};

// DT rows top to bottom; Models/Data sit at the bottom.
constexpr NodeCategory kDigitalRows[] = {NodeCategory::DT_Provided, NodeCategory::DT_Service,
                                         NodeCategory::DT_Enabler, NodeCategory::DT_ModelData};

int row_of(NodeCategory c) {
    for (int i = 0; i < 4; ++i)
        if (kDigitalRows[i] == c) return i;
    return -1;
}

std::map<std::string, NodeCategory> category_index(const ConstellationGraph& g) {
    std::map<std::string, NodeCategory> idx;
    for (const auto& n : g.nodes) idx.emplace(n.id, n.category);
    return idx;
}

struct Link {
    std::string upper;
    std::string lower;
};

// Edges joining DT rows r and r+1, normalised so `upper` is in row r.
std::vector<std::vector<Link>> row_links(const ConstellationGraph& g) {
    auto cats = category_index(g);
    std::vector<std::vector<Link>> links(3);
    for (const auto& e : g.edges) {
        auto a = cats.find(e.src), b = cats.find(e.dst);
        if (a == cats.end() || b == cats.end()) continue;
        int ra = row_of(a->second), rb = row_of(b->second);
        if (ra < 0 || rb < 0 || std::abs(ra - rb) != 1) continue;
        if (ra < rb)
            links[ra].push_back({e.src, e.dst});
        else
            links[rb].push_back({e.dst, e.src});
    }
    return links;
}

std::size_t crossings(const std::vector<std::vector<Link>>& links, const Layers& layers) {
    std::map<std::string, std::size_t> pos;
    for (const auto& [cat, ids] : layers)
        for (std::size_t i = 0; i < ids.size(); ++i) pos[ids[i]] = i;
    std::size_t total = 0;
    for (const auto& band : links) {
        for (std::size_t i = 0; i < band.size(); ++i) {
            for (std::size_t j = i + 1; j < band.size(); ++j) {
                auto u1 = static_cast<long>(pos.at(band[i].upper)), u2 = static_cast<long>(pos.at(band[j].upper));
                auto l1 = static_cast<long>(pos.at(band[i].lower)), l2 = static_cast<long>(pos.at(band[j].lower));
                if ((u1 - u2) * (l1 - l2) < 0) ++total;
            }
        }
    }
    return total;
}

// Reorders `layer` by the mean position of its neighbours in `fixed`.
void barycenter_pass(std::vector<std::string>& layer, const std::vector<std::string>& fixed,
                     const std::vector<Link>& band, bool layerIsUpper) {
    std::map<std::string, double> fixedPos;
    for (std::size_t i = 0; i < fixed.size(); ++i) fixedPos[fixed[i]] = static_cast<double>(i);
    std::map<std::string, std::pair<double, int>> acc;
    for (const auto& l : band) {
        const auto& mine = layerIsUpper ? l.upper : l.lower;
        const auto& other = layerIsUpper ? l.lower : l.upper;
        auto& [sum, count] = acc[mine];
        sum += fixedPos.at(other);
        ++count;
    }
    std::vector<std::pair<double, std::string>> keyed;
    for (std::size_t i = 0; i < layer.size(); ++i) {
        auto it = acc.find(layer[i]);
        double bary = it == acc.end() ? static_cast<double>(i) : it->second.first / it->second.second;
        keyed.emplace_back(bary, layer[i]);
    }
    std::sort(keyed.begin(), keyed.end());  // ties fall back to id order
    for (std::size_t i = 0; i < layer.size(); ++i) layer[i] = keyed[i].second;
}

Layers order_digital_layers(const ConstellationGraph& g) {
    Layers layers = initial_layers(g);
    const auto links = row_links(g);
    auto row = [&](int r) -> std::vector<std::string>& { return layers[kDigitalRows[r]]; };

    Layers best = layers;
    std::size_t bestCrossings = crossings(links, layers);
    for (int sweep = 0; sweep < spacing::kSweeps && bestCrossings > 0; ++sweep) {
        if (sweep % 2 == 0) {
            for (int r = 1; r < 4; ++r) barycenter_pass(row(r), row(r - 1), links[r - 1], false);
        } else {
            for (int r = 2; r >= 0; --r) barycenter_pass(row(r), row(r + 1), links[r], true);
        }
        std::size_t c = crossings(links, layers);
        if (c < bestCrossings) {
            bestCrossings = c;
            best = layers;
        }
    }
    return best;
}

}  // namespace

Layers initial_layers(const ConstellationGraph& graph) {
    Layers layers;
    for (auto c : kDigitalRows) layers[c];
    for (const auto& n : graph.nodes)
        if (!is_physical(n.category)) layers[n.category].push_back(n.id);
    for (auto& [c, ids] : layers) std::sort(ids.begin(), ids.end());
    return layers;
}

std::size_t count_crossings(const ConstellationGraph& graph, const Layers& layers) {
    return crossings(row_links(graph), layers);
}

std::size_t count_crossings(const ConstellationGraph& graph, const LayoutResult& result) {
    Layers layers;
    for (auto c : kDigitalRows) layers[c];
    for (const auto& n : graph.nodes)
        if (!is_physical(n.category)) layers[n.category].push_back(n.id);
    for (auto& [c, ids] : layers)
        std::sort(ids.begin(), ids.end(), [&](const std::string& a, const std::string& b) {
            return result.positions.at(a).x < result.positions.at(b).x;
        });
    return crossings(row_links(graph), layers);
}

LayoutResult layout(const ConstellationGraph& graph) {
    LayoutResult out;
    if (graph.nodes.empty()) return out;

    double y = 0;
    for (auto cat : kPhysicalOrder) {
        std::vector<std::string> ids;
        for (const auto& n : graph.nodes)
            if (n.category == cat) ids.push_back(n.id);
        std::sort(ids.begin(), ids.end());
        for (const auto& id : ids) {
            out.positions[id] = {spacing::kPhysicalX, y};
            out.order.push_back(id);
            y += spacing::kNodeGap;
        }
    }

    const Layers layers = order_digital_layers(graph);
    std::size_t widest = 0;
    for (const auto& [c, ids] : layers) widest = std::max(widest, ids.size());
    const bool hasProvided = !layers.at(NodeCategory::DT_Provided).empty();
    for (int r = 0; r < 4; ++r) {
        const auto& ids = layers.at(kDigitalRows[r]);
        const int slot = hasProvided ? r : r - 1;
        const double rowY = slot * spacing::kLayerGap;
        const double offset = static_cast<double>(widest - ids.size()) * spacing::kNodeGap / 2;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            out.positions[ids[i]] = {spacing::kDigitalX + offset + static_cast<double>(i) * spacing::kNodeGap, rowY};
            out.order.push_back(ids[i]);
        }
    }

    for (const auto& [id, p] : out.positions) {
        out.width = std::max(out.width, p.x + spacing::kNodeGap);
        out.height = std::max(out.height, p.y + spacing::kLayerGap);
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

bool yaml_plain(std::string_view s) {
    static const char* reserved[] = {"true", "false", "yes", "no", "on", "off", "null", "y", "n"};
    if (!dtdf::is_identifier(s)) return false;
    std::string lower;
    for (char c : s) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return std::none_of(std::begin(reserved), std::end(reserved), [&](const char* r) { return lower == r; });
}

std::string yaml_scalar(std::string_view s) { return yaml_plain(s) ? std::string(s) : text::quote(s); }

std::string num(double v) { return text::format_json_number(std::round(v * 10) / 10); }

std::string xml_escape(std::string_view s) { return text::html_escape(s); }

struct Style {
    const char* fill;
    const char* stroke;
};

Style style_for(NodeCategory c) {
    if (is_physical(c)) return {"#e8edf3", "#5b6b7f"};
    switch (c) {
    case NodeCategory::DT_ModelData: return {"#e3f4e1", "#3f7f3a"};
    case NodeCategory::DT_Enabler: return {"#fdf0dc", "#b8741a"};
    case NodeCategory::DT_Service: return {"#dfeafb", "#2f5fa8"};
    default: return {"#f4f4f4", "#888888"};
    }
}

constexpr double kBoxW = 120;
constexpr double kBoxH = 44;
constexpr double kPad = 100;

// Point where the segment from `from` toward `to` leaves the box around `from`.
Point box_exit(Point from, Point to) {
    double dx = to.x - from.x, dy = to.y - from.y;
    if (dx == 0 && dy == 0) return from;
    double tx = dx == 0 ? INFINITY : (kBoxW / 2) / std::abs(dx);
    double ty = dy == 0 ? INFINITY : (kBoxH / 2) / std::abs(dy);
    double t = std::min(tx, ty);
    return {from.x + dx * t, from.y + dy * t};
}

std::string shorten(const std::string& label) {
    constexpr std::size_t kMax = 18;
    if (label.size() <= kMax) return label;
    return label.substr(0, kMax - 1) + "…";
}

}  // namespace

std::string to_yaml(const ConstellationGraph& graph, const LayoutResult& result) {
    std::ostringstream os;
    os << "constellation: 1\n";
    if (result.order.empty()) {
        os << "nodes: []\n";
    } else {
        os << "nodes:\n";
        for (const auto& id : result.order) {
            const Node* n = graph.find(id);
            const Point& p = result.positions.at(id);
            os << "  - id: " << yaml_scalar(n->id) << '\n'
               << "    label: " << yaml_scalar(n->label) << '\n'
               << "    category: " << to_string(n->category) << '\n'
               << "    x: " << num(p.x) << '\n'
               << "    y: " << num(p.y) << '\n';
        }
    }
    if (graph.edges.empty()) {
        os << "edges: []\n";
    } else {
        os << "edges:\n";
        for (const auto& e : graph.edges)
            os << "  - src: " << yaml_scalar(e.src) << '\n'
               << "    dst: " << yaml_scalar(e.dst) << '\n'
               << "    relation: " << yaml_scalar(e.relation) << '\n';
    }
    return os.str();
}

std::string render_svg(const ConstellationGraph& graph, const LayoutResult& result, const SvgOptions& options) {
    const double w = result.width + 2 * kPad;
    const double h = result.height + 2 * kPad;
    auto at = [&](const std::string& id) {
        Point p = result.positions.at(id);
        return Point{p.x + kPad, p.y + kPad};
    };

    std::ostringstream os;
    if (options.standalone) os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg";
    if (options.standalone) os << " xmlns=\"http://www.w3.org/2000/svg\"";
    os << " version=\"1.1\" width=\"" << num(w) << "\" height=\"" << num(h) << "\" viewBox=\"0 0 " << num(w) << ' '
       << num(h) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";

    if (!graph.edges.empty()) {
        os << "  <defs>\n"
              "    <marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"8\" "
              "markerHeight=\"8\" orient=\"auto\">\n"
              "      <path d=\"M0,0 L10,5 L0,10 z\" fill=\"#555555\"/>\n"
              "    </marker>\n"
              "  </defs>\n";
    }

    // lane captions for populated lanes
    bool anyPhysical = false;
    std::map<NodeCategory, double> rowY;
    for (const auto& n : graph.nodes) {
        if (is_physical(n.category))
            anyPhysical = true;
        else
            rowY[n.category] = at(n.id).y;
    }
    if (anyPhysical)
        os << "  <text x=\"" << num(kPad + spacing::kPhysicalX) << "\" y=\"" << num(kPad / 2)
           << "\" text-anchor=\"middle\" font-weight=\"bold\" fill=\"#333333\">Physical Twin</text>\n";
    static const std::map<NodeCategory, const char*> captions = {
        {NodeCategory::DT_Provided, "Provided"},
        {NodeCategory::DT_Service, "Services"},
        {NodeCategory::DT_Enabler, "Enablers"},
        {NodeCategory::DT_ModelData, "Models / Data"},
    };
    for (const auto& [cat, y] : rowY)
        os << "  <text x=\"" << num(kPad + spacing::kDigitalX - kBoxW / 2 - 16) << "\" y=\"" << num(y)
           << "\" text-anchor=\"end\" dominant-baseline=\"middle\" font-weight=\"bold\" fill=\"#333333\">"
           << captions.at(cat) << "</text>\n";

    for (const auto& e : graph.edges) {
        Point a = at(e.src), b = at(e.dst);
        Point from = box_exit(a, b), to = box_exit(b, a);
        os << "  <line class=\"edge\" data-src=\"" << xml_escape(e.src) << "\" data-dst=\"" << xml_escape(e.dst)
           << "\" data-relation=\"" << xml_escape(e.relation) << "\" x1=\"" << num(from.x) << "\" y1=\""
           << num(from.y) << "\" x2=\"" << num(to.x) << "\" y2=\"" << num(to.y)
           << "\" stroke=\"#555555\" stroke-width=\"1.5\" marker-end=\"url(#arrow)\"/>\n";
    }

    for (const auto& id : result.order) {
        const Node* n = graph.find(id);
        Point c = at(id);
        Style s = style_for(n->category);
        os << "  <g class=\"node\" data-id=\"" << xml_escape(n->id) << "\" data-category=\""
           << to_string(n->category) << "\">\n"
           << "    <title>" << xml_escape(n->id) << "</title>\n"
           << "    <rect x=\"" << num(c.x - kBoxW / 2) << "\" y=\"" << num(c.y - kBoxH / 2) << "\" width=\""
           << num(kBoxW) << "\" height=\"" << num(kBoxH) << "\" rx=\"6\" fill=\"" << s.fill << "\" stroke=\""
           << s.stroke << "\"/>\n"
           << "    <text x=\"" << num(c.x) << "\" y=\"" << num(c.y)
           << "\" text-anchor=\"middle\" dominant-baseline=\"middle\">" << xml_escape(shorten(n->label))
           << "</text>\n"
           << "  </g>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace dtinsight::constellation
