// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails. Every tolerance used below is pinned in this file.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "dtinsight/constellation.hpp"
#include "dtinsight/dsl.hpp"
#include "dtinsight/report.hpp"
#include "dtinsight/sim.hpp"
#include "dtinsight/store.hpp"
#include "generators.hpp"
#include "hub_workload.hpp"
#include "oracles.hpp"
#include "pipeline.hpp"
#include "process.hpp"
#include "query_gen.hpp"

using namespace dtinsight;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace tol {
constexpr double kParseSeconds = 1.0;
constexpr int kRoundTripModels = 1000;
constexpr int kRoundTripMaxInstances = 50;
constexpr int kQueryStores = 200;
constexpr int kQueryMaxTriples = 200;
constexpr int kQueriesPerStore = 5;
constexpr int kLayoutModels = 100;
constexpr std::size_t kOrderingSamples = 10000;
constexpr std::size_t kSlowQueue = 1024;
constexpr double kThroughputFloor = 0.90;  // slow-subscriber run vs baseline, median of trials
constexpr double kSteadyStateK = 0.1;
constexpr double kSteadyStateSeconds = 20000;
constexpr double kClosedLoopSeconds = 20000;
constexpr double kPipelineSeconds = 30.0;
}  // namespace tol

namespace {

const fs::path kData = DTINSIGHT_DATA;
const fs::path kFixtures = DTINSIGHT_FIXTURES;
const std::string kCli = DTINSIGHT_CLI;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct Verdict {
    bool pass = false;
    std::string detail;
};

Verdict excerpt_fidelity() {
    const auto src = slurp(kFixtures / "incubator_excerpt.dtdf");
    const auto t0 = Clock::now();
    auto r = dsl::parse_description(src);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (!r) return {false, "parse failed"};
    const auto& m = *r.value;
    auto find = [&](const std::string& local) { return m.find({"description", local}); };
    const auto* cm = find("controller_model");
    const auto* sim = find("simulator");
    const auto* std20 = find("standardization");
    const auto* svc = find("what_if_sim");
    bool ok = m.instances.size() == 4 && cm && sim && std20 && svc;
    if (ok) {
        int inputs = 0;
        for (const auto& rel : cm->relations) inputs += rel.relation == dtdf::vocab_name("inputTo");
        ok = inputs == 3 && cm->relations.size() == 3 && sim->relations.size() == 1 &&
             sim->relations[0].relation == dtdf::vocab_name("enables") &&
             sim->relations[0].target.local() == "what_if_sim" && std20->desc &&
             std20->desc->rfind("Communication is carried out using AMQP standard", 0) == 0;
    }
    ok = ok && secs < tol::kParseSeconds;
    return {ok, std::to_string(m.instances.size()) + " instances, parsed in " + std::to_string(secs) + " s"};
}

Verdict round_trip() {
    testgen::Rng rng(20240601);
    int failures = 0;
    for (int i = 0; i < tol::kRoundTripModels; ++i) {
        const auto m = testgen::random_valid_model(rng, tol::kRoundTripMaxInstances);
        auto once = dsl::parse_description(dsl::serialize(m));
        if (!once || !(*once.value == m)) {
            ++failures;
            continue;
        }
        auto twice = dsl::parse_description(dsl::serialize(*once.value));
        if (!twice || !(*twice.value == *once.value)) ++failures;
    }
    return {failures == 0, std::to_string(tol::kRoundTripModels) + " models, " + std::to_string(failures) + " failures"};
}

Verdict query_oracle() {
    testgen::Rng rng(424242);
    testgen::Universe u;
    int mismatches = 0, queries = 0;
    for (int i = 0; i < tol::kQueryStores; ++i) {
        store::TripleStore st(testgen::random_triples(rng, u, tol::kQueryMaxTriples));
        for (int k = 0; k < tol::kQueriesPerStore; ++k) {
            auto q = testgen::random_query(rng, u);
            if (q.selectVars.empty()) continue;
            ++queries;
            if (testgen::rendered(q, store::select(q, st)) != oracle::select(q, st.triples())) ++mismatches;
        }
    }
    return {mismatches == 0, std::to_string(queries) + " queries, " + std::to_string(mismatches) + " mismatches"};
}

Verdict constellation_invariants() {
    using constellation::NodeCategory;
    testgen::Rng rng(31337);
    int violations = 0;
    for (int i = 0; i < tol::kLayoutModels; ++i) {
        auto m = testgen::random_valid_model(rng);
        if (!dtdf::validate(m, dtdf::builtin_vocabulary()).ok()) {
            ++violations;
            continue;
        }
        auto g = constellation::build_constellation(m, dtdf::builtin_vocabulary());
        for (const auto& e : g.edges) {
            const auto s = g.find(e.src)->category, d = g.find(e.dst)->category;
            if (e.relation == "enables" && !(s == NodeCategory::DT_Enabler && d == NodeCategory::DT_Service)) ++violations;
            if (e.relation == "inputTo" && !(s == NodeCategory::DT_ModelData && d == NodeCategory::DT_Enabler)) ++violations;
            if (e.relation == "asData" && !(s == NodeCategory::PT_Sensors && d == NodeCategory::DT_ModelData)) ++violations;
        }
        auto lay = constellation::layout(g);
        std::map<NodeCategory, std::pair<double, double>> span;  // min, max y per layer
        for (const auto& n : g.nodes) {
            const double y = lay.positions.at(n.id).y;
            auto [it, fresh] = span.try_emplace(n.category, y, y);
            it->second.first = std::min(it->second.first, y);
            it->second.second = std::max(it->second.second, y);
        }
        auto below = [&](NodeCategory lower, NodeCategory upper) {
            if (!span.count(lower) || !span.count(upper)) return true;
            return span[lower].first > span[upper].second;
        };
        if (!below(NodeCategory::DT_ModelData, NodeCategory::DT_Enabler)) ++violations;
        if (!below(NodeCategory::DT_Enabler, NodeCategory::DT_Service)) ++violations;
    }
    return {violations == 0, std::to_string(tol::kLayoutModels) + " models, " + std::to_string(violations) + " violations"};
}

Verdict report_determinism() {
    const auto work = fs::temp_directory_path() / ("dti-accept-report-" + std::to_string(::getpid()));
    fs::remove_all(work);
    fs::create_directories(work);
    const auto model = (kData / "incubator.dtdf").string();
    auto a = proc::run({kCli, "report", model, "--out", (work / "a").string()});
    auto b = proc::run({kCli, "report", model, "--out", (work / "b").string()});
    bool ok = a.exitCode == 0 && b.exitCode == 0;
    for (const char* f : {"table.html", "constellation.svg", "constellation.yaml"})
        ok = ok && slurp(work / "a" / f) == slurp(work / "b" / f);

    auto edited = slurp(model);
    const std::string needle = "Communication is carried out using AMQP standard";
    bool changed = false;
    if (auto pos = edited.find(needle); pos != std::string::npos) {
        edited.replace(pos, needle.size(), "Communication runs over MQTT");
        std::ofstream(work / "edited.dtdf") << edited;
        auto c = proc::run({kCli, "report", (work / "edited.dtdf").string(), "--out", (work / "c").string()});
        changed = c.exitCode == 0 && slurp(work / "c" / "table.html") != slurp(work / "a" / "table.html");
    }
    fs::remove_all(work);
    return {ok && changed, std::string("identical artifacts: ") + (ok ? "yes" : "no") +
                               ", desc edit changes table.html: " + (changed ? "yes" : "no")};
}

Verdict characteristics_rows() {
    const auto reg = dtdf::CharacteristicRegistry::defaults();
    const auto& vocab = dtdf::builtin_vocabulary();
    int bad = 0;
    auto check = [&](const dtdf::DescriptionModel& m) {
        auto t = dtdf::characteristics_table(m, vocab, reg);
        if (t.size() != 21) ++bad;
        for (const auto& row : t)
            if (row.sourceInstanceIds.empty() != (row.text == dtdf::kNotReported)) ++bad;
    };
    check(dtdf::DescriptionModel{"empty", {}, {}});
    auto inc = dsl::parse_description(slurp(kData / "incubator.dtdf"));
    if (!inc) return {false, "incubator model does not parse"};
    check(*inc.value);
    auto excerpt = dsl::parse_description(slurp(kFixtures / "incubator_excerpt.dtdf"));
    check(*excerpt.value);
    testgen::Rng rng(5);
    for (int i = 0; i < 100; ++i) check(testgen::random_valid_model(rng));
    const auto empty = dtdf::characteristics_table(dtdf::DescriptionModel{"empty", {}, {}}, vocab, reg);
    for (const auto& row : empty)
        if (row.text != "not reported") ++bad;
    return {bad == 0, "103 models, " + std::to_string(bad) + " bad rows"};
}

Verdict gateway_ordering() {
    const auto r = workload::ordering_trial(tol::kOrderingSamples, tol::kSlowQueue);
    const double ratio = workload::slow_subscriber_throughput_ratio();
    const bool ok = r.ordered && r.complete && r.slowGapEvents == 1 &&
                    r.slowDropped == tol::kOrderingSamples - tol::kSlowQueue && ratio >= tol::kThroughputFloor;
    char buf[200];
    std::snprintf(buf, sizeof buf, "ordered=%s complete=%s gapEvents=%zu dropped=%llu throughputRatio=%.3f",
                  r.ordered ? "yes" : "no", r.complete ? "yes" : "no", r.slowGapEvents,
                  static_cast<unsigned long long>(r.slowDropped), ratio);
    return {ok, buf};
}

Verdict simulator_physics() {
    sim::SimParams p = sim::params_from_json(slurp(kData / "sim_params.json"));
    const double analytic = p.ambient + p.heaterPower / p.lossConductance;

    sim::SimParams open = p;
    open.closedLoop = false;
    open.initialHeater = true;
    auto s = sim::initial_state(open);
    const auto steps = static_cast<long>(tol::kSteadyStateSeconds / open.dt);
    for (long k = 0; k < steps; ++k) s = sim::step(s, open);
    const double err = std::abs(s.temperature - analytic);

    const double slack = p.dt * p.heaterPower / p.heatCapacity;
    auto c = sim::initial_state(p);
    bool entered = false, held = true;
    for (long k = 0; k < static_cast<long>(tol::kClosedLoopSeconds / p.dt); ++k) {
        c = sim::step(c, p);
        if (!entered && std::abs(c.temperature - p.setpoint) <= p.halfBand) entered = true;
        if (entered && std::abs(c.temperature - p.setpoint) > p.halfBand + slack) held = false;
    }

    auto a = proc::run({kCli, "simulate", "--params", (kData / "sim_params.json").string(), "--duration", "600"});
    auto b = proc::run({kCli, "simulate", "--params", (kData / "sim_params.json").string(), "--duration", "600"});
    const bool same = a.exitCode == 0 && !a.out.empty() && a.out == b.out;

    char buf[200];
    std::snprintf(buf, sizeof buf, "steady %.4f vs %.1f (err %.4f K), band held=%s, identical bytes=%s", s.temperature,
                  analytic, err, (entered && held) ? "yes" : "no", same ? "yes" : "no");
    return {err <= tol::kSteadyStateK && entered && held && same, buf};
}

Verdict end_to_end() {
    const auto work = fs::temp_directory_path() / ("dti-accept-e2e-" + std::to_string(::getpid()));
    auto o = pipeline::run(kCli, kData, work);
    fs::remove_all(work);
    char buf[300];
    std::snprintf(buf, sizeof buf, "%.2f s, %llu samples ingested, closure %s%s%s", o.seconds,
                  static_cast<unsigned long long>(o.ingested), o.closureBody == o.expectedClosure ? "matches" : "differs",
                  o.failure.empty() ? "" : ", ", o.failure.c_str());
    return {o.ok && o.seconds < tol::kPipelineSeconds, buf};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"incubator excerpt fidelity", excerpt_fidelity},
        {"parse/serialize round trip", round_trip},
        {"query engine vs enumeration oracle", query_oracle},
        {"constellation layer invariants", constellation_invariants},
        {"report determinism", report_determinism},
        {"characteristics table shape", characteristics_rows},
        {"gateway ordering and slow subscribers", gateway_ordering},
        {"simulator physics", simulator_physics},
        {"end-to-end pipeline", end_to_end},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        if (!v.pass) ++failed;
        std::cout << (v.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << " (" << v.detail
                  << ")" << std::endl;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
              << std::endl;
    return failed == 0 ? 0 : 1;
}
