#include <doctest.h>

#include <json.hpp>

#include "dtinsight/dsl.hpp"
#include "dtinsight/store.hpp"
#include "generators.hpp"
#include "oracles.hpp"
#include "query_gen.hpp"

using namespace dtinsight;
using namespace dtinsight::store;
using dtdf::vocab_name;
using testgen::Universe;
using testgen::random_query;
using testgen::random_triples;
using testgen::rendered;
using testgen::query_text;

namespace {

dtdf::DescriptionModel parse(const std::string& src) {
    auto r = dsl::parse_description(src);
    REQUIRE(r);
    return *r.value;
}

}  // namespace

TEST_CASE("select agrees with exhaustive enumeration on random stores") {
    testgen::Rng rng(424242);
    Universe u;
    int nonEmpty = 0;
    for (int i = 0; i < 200; ++i) {
        TripleStore store(random_triples(rng, u, 200));
        REQUIRE(store.triples().size() <= 200);
        for (int k = 0; k < 5; ++k) {
            Query q = random_query(rng, u);
            if (q.selectVars.empty()) continue;
            const auto got = rendered(q, select(q, store));
            const auto want = oracle::select(q, store.triples());
            REQUIRE_MESSAGE(got == want, "store " << i << " query " << query_text(q));
            if (!got.empty()) ++nonEmpty;

            // The text form parses back to the same query.
            auto reparsed = parse_query(query_text(q), store);
            CHECK(rendered(reparsed, select(reparsed, store)) == want);
        }
    }
    CHECK(nonEmpty > 100);  // the generator must exercise real joins
}

TEST_CASE("duplicate triples collapse") {
    const Triple t{{"ex", "a"}, {"ex", "p"}, Node{QualifiedName{"ex", "b"}}};
    TripleStore s({t, t, t});
    CHECK(s.triples().size() == 1);
    CHECK(s.contains(t));
    CHECK(s.nodes().size() == 3);
}

TEST_CASE("query text: prefixes, bare names, shorthand and errors") {
    auto m = parse(R"(
instance what_if_sim : DTDFVocab:Service [ ]
instance simulator : DTDFVocab:Enabler [ DTDFVocab:enables what_if_sim DTDFVocab:IsCommEnabler false ]
instance controller_model : DTDFVocab:Model [ DTDFVocab:inputTo simulator ]
)");
    TripleStore st(to_triples(m));

    auto q = parse_query("SELECT ?e WHERE { ?e enables what_if_sim . }", st);
    auto rows = select(q, st);
    REQUIRE(rows.size() == 1);
    CHECK(display(rows[0].at("e"), m) == "simulator");

    q = parse_query("select ?x ?k where { ?x a ?k . ?x DTDFVocab:IsCommEnabler false }", st);
    rows = select(q, st);
    REQUIRE(rows.size() == 1);
    CHECK(render(rows[0].at("k")) == "DTDFVocab:Enabler");

    q = parse_query("SELECT * WHERE { ?m <DTDFVocab:inputTo> ?e . ?e enables ?s . }", st);
    CHECK(q.selectVars == std::vector<std::string>{"m", "e", "s"});
    CHECK(select(q, st).size() == 1);

    CHECK(select(parse_query("SELECT ?x WHERE { ?x enables nowhere . }", st), st).empty());

    CHECK_THROWS_AS(parse_query("SELECT ?x WHERE { ?y a ?z . }", st), QueryError);
    CHECK_THROWS_AS(parse_query("SELECT ?x WHERE { \"lit\" a ?x . }", st), QueryError);
    CHECK_THROWS_AS(parse_query("SELECT ?x { ?x a ?z . }", st), QueryError);
    CHECK_THROWS_AS(parse_query("SELECT ?x WHERE { ?x a ?z ", st), QueryError);

    auto j = nlohmann::json::parse(
        results_json(parse_query("SELECT ?e ?f WHERE { ?e DTDFVocab:IsCommEnabler ?f }", st),
                     select(parse_query("SELECT ?e ?f WHERE { ?e DTDFVocab:IsCommEnabler ?f }", st), st), m));
    CHECK(j["vars"] == nlohmann::json::array({"e", "f"}));
    CHECK(j["bindings"][0]["e"] == "simulator");
    CHECK(j["bindings"][0]["f"] == false);
}

TEST_CASE("bare names that match several IRIs are rejected") {
    auto m = parse(R"(description m [
instance x : DTDFVocab:Service [ ]
instance other:x : DTDFVocab:Service [ ]
])");
    TripleStore st(to_triples(m));
    CHECK_THROWS_AS(parse_query("SELECT ?k WHERE { x a ?k }", st), QueryError);
    CHECK(select(parse_query("SELECT ?k WHERE { m:x a ?k }", st), st).size() == 1);
}

TEST_CASE("typed accessors equal their query equivalents") {
    testgen::Rng rng(8);
    for (int i = 0; i < 100; ++i) {
        auto m = testgen::random_valid_model(rng, 30);
        ModelView view(m, dtdf::builtin_vocabulary());
        const auto& st = view.store();

        auto names = [](const std::vector<Binding>& rows, const std::string& v) {
            std::vector<QualifiedName> out;
            for (const auto& b : rows) {
                auto q = std::get<QualifiedName>(b.at(v));
                if (std::find(out.begin(), out.end(), q) == out.end()) out.push_back(q);
            }
            std::sort(out.begin(), out.end());
            return out;
        };
        auto sorted = [](std::vector<QualifiedName> v) {
            std::sort(v.begin(), v.end());
            return v;
        };

        Query qs{{"s"}, {{Variable{"s"}, kRdfType, vocab_name("Service")}}, true};
        CHECK(sorted(view.services()) == names(select(qs, st), "s"));

        for (const auto& svc : view.services()) {
            Query qe{{"e"}, {{Variable{"e"}, vocab_name("enables"), svc}}, true};
            CHECK(sorted(view.enablers_of(svc)) == names(select(qe, st), "e"));
            for (const auto& en : view.enablers_of(svc)) {
                Query qi{{"i"}, {{Variable{"i"}, vocab_name("inputTo"), en}}, true};
                CHECK(sorted(view.inputs_of(en)) == names(select(qi, st), "i"));
            }
        }

        Query qd{{"t", "d"}, {{Variable{"t"}, vocab_name("asData"), Variable{"d"}}}, true};
        std::vector<std::pair<QualifiedName, QualifiedName>> want;
        for (const auto& b : select(qd, st))
            want.emplace_back(std::get<QualifiedName>(b.at("t")), std::get<QualifiedName>(b.at("d")));
        auto got = view.data_links();
        std::sort(got.begin(), got.end());
        got.erase(std::unique(got.begin(), got.end()), got.end());
        CHECK(got == want);
    }
}
