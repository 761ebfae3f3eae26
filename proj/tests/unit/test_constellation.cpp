#include <doctest.h>
#include <yaml-cpp/yaml.h>

#include "dtinsight/constellation.hpp"
#include "dtinsight/dsl.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace dtinsight;
using namespace dtinsight::constellation;

namespace {

dtdf::DescriptionModel parse(const std::string& src) {
    auto r = dsl::parse_description(src);
    REQUIRE_MESSAGE(r, (r.diagnostics.empty() ? "" : dsl::format_diagnostic(r.diagnostics[0])));
    return *r.value;
}

const char* kExcerpt = R"(
instance what_if_sim : DTDFVocab:Service [DTDFVocab:provides what_if_sim_results DTDFVocab:atStage baseDesc:operation]
instance simulator : DTDFVocab:Enabler [DTDFVocab:enables what_if_sim]
instance controller_model : DTDFVocab:Model [DTDFVocab:inputTo simulator DTDFVocab:inputTo state_estimator DTDFVocab:inputTo optimization_algs]
instance standardization : DTDFVocab:Standardization [base:desc "Communication is carried out using AMQP standard via RabbitMQ."]
)";

ConstellationGraph graph_of(const dtdf::DescriptionModel& m, BuildOptions o = {}) {
    return build_constellation(m, dtdf::builtin_vocabulary(), o);
}

}  // namespace

TEST_CASE("excerpt yields three DT nodes and two arrows") {
    auto g = graph_of(parse(kExcerpt));
    REQUIRE(g.nodes.size() == 3);
    CHECK(g.find("what_if_sim")->category == NodeCategory::DT_Service);
    CHECK(g.find("simulator")->category == NodeCategory::DT_Enabler);
    CHECK(g.find("controller_model")->category == NodeCategory::DT_ModelData);
    REQUIRE(g.edges.size() == 2);
    CHECK(g.edges[0] == Edge{"simulator", "what_if_sim", "enables"});
    CHECK(g.edges[1] == Edge{"controller_model", "simulator", "inputTo"});

    CHECK(closure_json(closure(g, "controller_model", Direction::Forward)) ==
          R"({"ids":["controller_model","simulator","what_if_sim"]})");
    CHECK(closure(g, "what_if_sim", Direction::Backward) ==
          std::set<std::string>{"what_if_sim", "simulator", "controller_model"});
    CHECK(closure(g, "what_if_sim", Direction::Forward) == std::set<std::string>{"what_if_sim"});
    CHECK_THROWS_AS(closure(g, "nope", Direction::Both), UnknownNode);
    CHECK(closure_json({}) == R"({"ids":[]})");
}

TEST_CASE("provided things become satellites only when enabled") {
    auto m = parse(R"(
instance s : DTDFVocab:Service [DTDFVocab:provides out]
instance out : DTDFVocab:ProvidedThing [ ]
)");
    auto g = graph_of(m);
    REQUIRE(g.find("out"));
    CHECK(g.find("out")->category == NodeCategory::DT_Provided);
    CHECK(g.edges == std::vector<Edge>{{"s", "out", "provides"}});
    auto lay = layout(g);
    CHECK(lay.positions.at("out").y < lay.positions.at("s").y);

    auto bare = graph_of(m, BuildOptions{false});
    CHECK_FALSE(bare.find("out"));
    CHECK(bare.edges.empty());
}

TEST_CASE("direction parsing") {
    CHECK(direction_from_string("forward") == Direction::Forward);
    CHECK(direction_from_string("backward") == Direction::Backward);
    CHECK(direction_from_string("both") == Direction::Both);
    CHECK_FALSE(direction_from_string("sideways"));
}

TEST_CASE("edges respect the layer contract on random models") {
    testgen::Rng rng(31337);
    const auto& expected = testgen::expected_category();
    for (int i = 0; i < 100; ++i) {
        auto m = testgen::random_valid_model(rng);
        REQUIRE(dtdf::validate(m, dtdf::builtin_vocabulary()).ok());
        auto g = graph_of(m);

        for (const auto& inst : m.instances) {
            auto it = expected.find(inst.kind.local());
            const auto* node = g.find(m.display_id(inst.id));
            if (it == expected.end()) {
                if (inst.kind.local() != "ProvidedThing") CHECK_FALSE(node);
                continue;
            }
            REQUIRE(node);
            CHECK(to_string(node->category) == it->second);
        }
        for (const auto& e : g.edges) {
            const auto s = g.find(e.src)->category, d = g.find(e.dst)->category;
            if (e.relation == "enables") CHECK((s == NodeCategory::DT_Enabler && d == NodeCategory::DT_Service));
            if (e.relation == "inputTo") CHECK((s == NodeCategory::DT_ModelData && d == NodeCategory::DT_Enabler));
            if (e.relation == "asData") CHECK((s == NodeCategory::PT_Sensors && d == NodeCategory::DT_ModelData));
            if (e.relation == "provides") CHECK((s == NodeCategory::DT_Service && d == NodeCategory::DT_Provided));
        }

        auto lay = layout(g);
        std::map<NodeCategory, std::vector<double>> ys;
        for (const auto& n : g.nodes) ys[n.category].push_back(lay.positions.at(n.id).y);
        auto row_y = [&](NodeCategory c) -> std::optional<double> {
            if (!ys.count(c)) return std::nullopt;
            const auto& v = ys[c];
            for (double y : v) CHECK(y == v.front());
            return v.front();
        };
        auto md = row_y(NodeCategory::DT_ModelData), en = row_y(NodeCategory::DT_Enabler),
             sv = row_y(NodeCategory::DT_Service);
        if (md && en) CHECK(*md > *en);
        if (en && sv) CHECK(*en > *sv);
        if (md && sv) CHECK(*md > *sv);
        for (const auto& n : g.nodes) {
            const auto& p = lay.positions.at(n.id);
            if (is_physical(n.category))
                CHECK(p.x == spacing::kPhysicalX);
            else
                CHECK(p.x >= spacing::kDigitalX);
            CHECK(p.x < lay.width);
            CHECK(p.y < lay.height);
        }
        CHECK(lay.order.size() == g.nodes.size());
    }
}

TEST_CASE("closure matches transitive-closure oracle and both is the union") {
    testgen::Rng rng(4);
    for (int i = 0; i < 100; ++i) {
        auto g = graph_of(testgen::random_valid_model(rng, 30));
        for (const auto& n : g.nodes) {
            auto f = closure(g, n.id, Direction::Forward);
            auto b = closure(g, n.id, Direction::Backward);
            auto both = closure(g, n.id, Direction::Both);
            CHECK(f == oracle::closure(g, n.id, Direction::Forward));
            CHECK(b == oracle::closure(g, n.id, Direction::Backward));
            std::set<std::string> u = f;
            u.insert(b.begin(), b.end());
            CHECK(both == u);
            CHECK(f.count(n.id));
        }
    }
}

TEST_CASE("barycenter sweeps never add crossings") {
    testgen::Rng rng(2718);
    int improved = 0;
    for (int i = 0; i < 100; ++i) {
        // Random bipartite Enabler/Service graph plus a Models/Data row.
        dtdf::DescriptionModel m{"g", {}, {}};
        const int ne = testgen::uniform_int(rng, 1, 8), ns = testgen::uniform_int(rng, 1, 8),
                  nm = testgen::uniform_int(rng, 0, 6);
        for (int k = 0; k < ns; ++k) m.instances.push_back({{"g", "s" + std::to_string(k)}, dtdf::vocab_name("Service"), {}, {}, {}});
        for (int k = 0; k < ne; ++k) {
            dtdf::Instance e{{"g", "e" + std::to_string(k)}, dtdf::vocab_name("Enabler"), {}, {}, {}};
            for (int j = 0; j < ns; ++j)
                if (testgen::coin(rng, 0.35)) e.relations.push_back({dtdf::vocab_name("enables"), {"g", "s" + std::to_string(j)}});
            m.instances.push_back(e);
        }
        for (int k = 0; k < nm; ++k) {
            dtdf::Instance d{{"g", "m" + std::to_string(k)}, dtdf::vocab_name("Model"), {}, {}, {}};
            for (int j = 0; j < ne; ++j)
                if (testgen::coin(rng, 0.3)) d.relations.push_back({dtdf::vocab_name("inputTo"), {"g", "e" + std::to_string(j)}});
            m.instances.push_back(d);
        }
        auto g = graph_of(m);
        auto lay = layout(g);
        const auto before = count_crossings(g, initial_layers(g));
        const auto after = count_crossings(g, lay);
        CHECK(after <= before);
        CHECK(after == oracle::crossings(g, lay));
        if (after < before) ++improved;
    }
    CHECK(improved > 10);
}

TEST_CASE("YAML is well-formed and mirrors the graph") {
    testgen::Rng rng(17);
    for (int i = 0; i < 50; ++i) {
        auto g = graph_of(testgen::random_valid_model(rng, 25));
        auto lay = layout(g);
        const auto text = to_yaml(g, lay);
        CHECK(text == to_yaml(g, layout(g)));
        YAML::Node doc = YAML::Load(text);
        CHECK(doc["constellation"].as<int>() == 1);
        REQUIRE(doc["nodes"].size() == g.nodes.size());
        REQUIRE(doc["edges"].size() == g.edges.size());
        for (std::size_t k = 0; k < lay.order.size(); ++k) {
            const auto& id = lay.order[k];
            auto n = doc["nodes"][k];
            CHECK(n["id"].as<std::string>() == id);
            CHECK(n["category"].as<std::string>() == to_string(g.find(id)->category));
            CHECK(n["x"].as<double>() == doctest::Approx(lay.positions.at(id).x).epsilon(1e-9));
            CHECK(n["y"].as<double>() == doctest::Approx(lay.positions.at(id).y).epsilon(1e-9));
        }
        for (std::size_t k = 0; k < g.edges.size(); ++k) {
            CHECK(doc["edges"][k]["src"].as<std::string>() == g.edges[k].src);
            CHECK(doc["edges"][k]["relation"].as<std::string>() == g.edges[k].relation);
        }
    }
    auto empty = ConstellationGraph{};
    YAML::Node doc = YAML::Load(to_yaml(empty, layout(empty)));
    CHECK(doc["nodes"].size() == 0);
}

TEST_CASE("SVG output is deterministic and carries every node") {
    auto g = graph_of(parse(kExcerpt));
    auto lay = layout(g);
    const auto svg = render_svg(g, lay);
    CHECK(svg == render_svg(g, layout(g)));
    CHECK(svg.rfind("<?xml", 0) == 0);
    CHECK(svg.find("xmlns=\"http://www.w3.org/2000/svg\"") != std::string::npos);
    for (const auto& n : g.nodes) CHECK(svg.find(">" + n.label + "<") != std::string::npos);
    CHECK(svg.find("marker") != std::string::npos);

    const auto inlined = render_svg(g, lay, SvgOptions{false});
    CHECK(inlined.rfind("<svg", 0) == 0);
    CHECK(inlined.find("http://") == std::string::npos);

    auto empty = ConstellationGraph{};
    const auto blank = render_svg(empty, layout(empty));
    CHECK(blank.find("<svg") != std::string::npos);
    CHECK(blank.find("marker") == std::string::npos);
}
