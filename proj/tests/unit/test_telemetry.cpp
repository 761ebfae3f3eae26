#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "dtinsight/sim.hpp"
#include "dtinsight/telemetry.hpp"
#include "hub_workload.hpp"

using namespace dtinsight::telemetry;
using namespace std::chrono_literals;
namespace fs = std::filesystem;

namespace {

template <class Pred>
bool eventually(Pred pred, std::chrono::milliseconds limit = 5000ms) {
    const auto end = std::chrono::steady_clock::now() + limit;
    while (std::chrono::steady_clock::now() < end) {
        if (pred()) return true;
        std::this_thread::sleep_for(10ms);
    }
    return pred();
}

std::uint64_t accepted(const Hub& hub, const std::string& prefix) {
    std::uint64_t n = 0;
    for (const auto& [src, st] : hub.source_stats())
        if (src.rfind(prefix, 0) == 0) n += st.accepted;
    return n;
}

}  // namespace

TEST_CASE("wire format parsing") {
    Hub hub;
    auto r = hub.ingest_line(R"({"topic":"incubator.t1","ts":1700000000.0,"fields":{"temperature":25.3}})", "t");
    REQUIRE(std::holds_alternative<Sample>(r));
    const auto& s = std::get<Sample>(r);
    CHECK(s.seq == 1);
    CHECK(s.topic == "incubator.t1");
    CHECK(s.ts == 1700000000.0);
    CHECK(s.fields.at("temperature") == 25.3);
    CHECK(sample_json(s) == R"({"topic":"incubator.t1","ts":1700000000,"fields":{"temperature":25.3},"seq":1})");

    auto bad = hub.ingest_line("not json", "t");
    CHECK(std::holds_alternative<IngestError>(bad));
    CHECK(hub.source_stats().at("t").errors == 1);
    CHECK(hub.source_stats().at("t").accepted == 1);
    auto snap = hub.snapshot("incubator.t1", 0);
    REQUIRE(snap);
    CHECK(snap->samples.size() == 1);  // buffers untouched by the bad line

    for (const char* line : {R"([1])", R"({"ts":1,"fields":{}})", R"({"topic":"","ts":1,"fields":{}})",
                             R"({"topic":"a","ts":"x","fields":{}})", R"({"topic":"a","ts":1})",
                             R"({"topic":"a","ts":1,"fields":{"k":"v"}})"})
        CHECK_MESSAGE(std::holds_alternative<IngestError>(parse_line(line)), line);
    auto extra = parse_line(R"({"topic":"a","ts":1,"fields":{},"seq":99,"x":1})");
    REQUIRE(std::holds_alternative<Sample>(extra));
    CHECK(std::get<Sample>(extra).seq == 0);
    CHECK(gap_json(7) == R"({"gap":7})");
}

TEST_CASE("ring buffer keeps the newest samples") {
    Hub hub(4);
    for (int i = 0; i < 5; ++i)
        hub.ingest_line(R"({"topic":"x","ts":)" + std::to_string(i) + R"(,"fields":{"v":1}})", "s");
    auto snap = hub.snapshot("x", 0);
    REQUIRE(snap);
    CHECK(snap->samples.size() == 4);
    CHECK(snap->samples.front().seq == 2);
    CHECK(snap->dropped == 1);
    CHECK(snap->lastSeq == 5);
    CHECK(hub.snapshot("x", 4)->samples.size() == 1);
    CHECK(hub.snapshot("x", 5)->samples.empty());
    CHECK_FALSE(hub.snapshot("nope", 0));
    CHECK(hub.topics() == std::vector<std::string>{"x"});
}

TEST_CASE("topic-filtered subscriptions see only their topic") {
    Hub hub;
    auto sub = hub.subscribe("b");
    hub.ingest_line(R"({"topic":"a","ts":1,"fields":{"v":1}})", "s");
    hub.ingest_line(R"({"topic":"b","ts":2,"fields":{"v":2}})", "s");
    auto ev = sub->wait(100ms);
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].find(R"("topic":"b")") != std::string::npos);
    CHECK(hub.subscriber_count() == 1);
    hub.unsubscribe(sub);
    CHECK(hub.subscriber_count() == 0);
    CHECK(sub->closed());
}

TEST_CASE("concurrent sources keep per-topic order; a stalled subscriber gets one gap") {
    const auto r = workload::ordering_trial(10000, 1024);
    CHECK(r.ordered);
    CHECK(r.complete);
    CHECK(r.slowGapEvents == 1);
    CHECK(r.slowDropped == 10000 - 1024);
    CHECK(r.slowDelivered == 1024);
}

TEST_CASE("a stalled subscriber does not slow ingestion") {
    const double ratio = workload::slow_subscriber_throughput_ratio();
    MESSAGE("throughput ratio with stalled subscriber: " << ratio);
    CHECK(ratio >= 0.9);
}

TEST_CASE("host:port and replay specs") {
    auto hp = parse_host_port("127.0.0.1:8080");
    CHECK(hp.host == "127.0.0.1");
    CHECK(hp.port == 8080);
    CHECK(parse_host_port("localhost:0").port == 0);
    CHECK_THROWS_AS(parse_host_port("nohost"), std::invalid_argument);
    CHECK_THROWS_AS(parse_host_port("h:99999"), std::invalid_argument);
    CHECK_THROWS_AS(parse_host_port("h:x"), std::invalid_argument);

    auto [f, speed] = parse_replay_spec("run.jsonl");
    CHECK(f == "run.jsonl");
    CHECK(speed == 1);
    CHECK(parse_replay_spec("dir/run.jsonl:0").second == 0);
    CHECK(parse_replay_spec("run.jsonl:2.5").second == 2.5);
    CHECK_THROWS_AS(parse_replay_spec("run.jsonl:-1"), std::invalid_argument);
}

TEST_CASE("TCP ingest accepts newline-delimited samples from several clients") {
    Hub hub;
    TcpIngest ingest(hub, parse_host_port("127.0.0.1:0"));
    REQUIRE(ingest.port() != 0);
    {
        TcpLineWriter a({"127.0.0.1", ingest.port()});
        TcpLineWriter b({"127.0.0.1", ingest.port()});
        dtinsight::sim::SimParams p;
        dtinsight::sim::run(p, 50, [&](const std::string& l) { a.write_line(l); });
        b.write_line("garbage");
        b.write_line(R"({"topic":"other","ts":1,"fields":{"v":1}})");
        a.flush();
        b.flush();
    }
    CHECK(eventually([&] { return accepted(hub, "tcp:") == 101; }));
    std::uint64_t errors = 0;
    for (const auto& [src, st] : hub.source_stats()) errors += st.errors;
    CHECK(errors == 1);
    CHECK(hub.snapshot("incubator.t1", 0)->lastSeq == 50);
    ingest.stop();
}

TEST_CASE("replay feeds a recorded file") {
    const auto file = fs::temp_directory_path() / ("dti-replay-" + std::to_string(::getpid()) + ".jsonl");
    {
        std::ofstream out(file);
        dtinsight::sim::SimParams p;
        p.dt = 0.01;
        dtinsight::sim::run(p, 0.5, [&](const std::string& l) { out << l << "\r\n"; });
        out << "\n";
    }
    Hub hub;
    const auto t0 = std::chrono::steady_clock::now();
    Replay replay(hub, file, 1);
    replay.wait();
    const auto elapsed = std::chrono::steady_clock::now() - t0;
    CHECK(replay.finished());
    CHECK(accepted(hub, "replay:") == 100);
    CHECK(elapsed >= 400ms);  // paced by ts deltas (first line at +0.01 s, last at +0.5 s)

    Hub fast;
    Replay unpaced(fast, file, 0);
    unpaced.wait();
    CHECK(accepted(fast, "replay:") == 100);

    Hub none;
    CHECK_THROWS_AS(Replay(none, file.string() + ".missing", 0), std::system_error);
    fs::remove(file);
}
