#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

namespace dtinsight::telemetry {

struct Sample {
    std::string topic;
    double ts = 0;
    std::map<std::string, double> fields;
    std::uint64_t seq = 0;  // assigned by the hub, per topic, from 1

    bool operator==(const Sample&) const = default;
};

struct IngestError {
    std::string message;
};

// Wire format: {"topic": t, "ts": x, "fields": {k: number, ...}}. Extra keys
// are ignored; seq is never read from the wire.
std::variant<Sample, IngestError> parse_line(std::string_view line);

// {"topic":..,"ts":..,"fields":{..},"seq":n}
std::string sample_json(const Sample& s);
std::string gap_json(std::uint64_t dropped);

inline constexpr std::size_t kDefaultRingCapacity = 4096;
inline constexpr std::size_t kDefaultSubscriberQueue = 1024;

// Most recent `capacity` samples of one topic, oldest first.
class TopicBuffer {
public:
    explicit TopicBuffer(std::size_t capacity = kDefaultRingCapacity);

    void push(Sample s);
    std::vector<Sample> since(std::uint64_t seq) const;
    std::size_t size() const { return samples_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::uint64_t dropped() const { return dropped_; }

private:
    std::size_t capacity_;
    std::deque<Sample> samples_;
    std::uint64_t dropped_ = 0;
};

// Bounded per-consumer event queue. A full queue drops its oldest sample and
// owes the consumer one gap notice carrying the number dropped.
class Subscription {
public:
    explicit Subscription(std::size_t capacity, std::optional<std::string> topic = std::nullopt)
        : capacity_(capacity), topic_(std::move(topic)) {}

    // Waits up to `timeout` for something to deliver. A pending gap notice
    // comes first, then queued samples (at most `max`), each as one JSON event.
    std::vector<std::string> wait(std::chrono::milliseconds timeout, std::size_t max = 256);

    void close();
    bool closed() const;
    std::uint64_t total_dropped() const;

private:
    friend class Hub;
    // Samples are shared between all subscriber queues; fan-out copies a
    // pointer, not the sample.
    void push(const std::shared_ptr<const Sample>& s);

    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::deque<std::shared_ptr<const Sample>> queue_;
    std::size_t capacity_;
    std::optional<std::string> topic_;  // only this topic when set
    std::uint64_t pendingGap_ = 0;
    std::uint64_t totalDropped_ = 0;
    bool closed_ = false;
};

struct SourceStats {
    std::uint64_t accepted = 0;
    std::uint64_t errors = 0;
};

struct TopicSnapshot {
    std::vector<Sample> samples;
    std::uint64_t dropped = 0;
    std::uint64_t lastSeq = 0;
};

// Topic buffers plus fan-out. Sequence numbers are assigned and fanned out
// under the topic's lock, so every subscriber sees each topic in seq order no
// matter how many sources ingest concurrently.
class Hub {
public:
    explicit Hub(std::size_t ringCapacity = kDefaultRingCapacity,
                 std::size_t subscriberQueue = kDefaultSubscriberQueue);
    ~Hub();

    std::variant<Sample, IngestError> ingest_line(std::string_view line, const std::string& source);
    Sample ingest(Sample s, const std::string& source);

    // `queueCapacity` overrides the hub-wide subscriber queue size.
    std::shared_ptr<Subscription> subscribe(std::optional<std::string> topic = std::nullopt,
                                            std::optional<std::size_t> queueCapacity = std::nullopt);
    void unsubscribe(const std::shared_ptr<Subscription>& sub);
    void close_all();

    std::optional<TopicSnapshot> snapshot(const std::string& topic, std::uint64_t sinceSeq) const;
    std::vector<std::string> topics() const;
    std::map<std::string, SourceStats> source_stats() const;
    std::size_t subscriber_count() const;

private:
    struct Topic {
        explicit Topic(std::size_t cap) : buffer(cap) {}
        mutable std::mutex mu;
        TopicBuffer buffer;
        std::uint64_t nextSeq = 1;
    };

    Topic& topic(const std::string& name);
    void count(const std::string& source, bool ok);

    std::size_t ringCapacity_;
    std::size_t subscriberQueue_;

    mutable std::shared_mutex topicsMu_;
    std::map<std::string, std::unique_ptr<Topic>> topics_;

    mutable std::mutex subsMu_;
    std::vector<std::shared_ptr<Subscription>> subs_;

    mutable std::mutex statsMu_;
    std::map<std::string, SourceStats> stats_;
};

// ---------------------------------------------------------------------------
// Ingest sources

struct HostPort {
    std::string host;
    std::uint16_t port = 0;
};

// "host:port"; throws std::invalid_argument.
HostPort parse_host_port(std::string_view text);

// Newline-delimited JSON over TCP, one hub source per connection.
class TcpIngest {
public:
    TcpIngest(Hub& hub, const HostPort& bind);  // throws std::system_error
    ~TcpIngest();
    TcpIngest(const TcpIngest&) = delete;
    TcpIngest& operator=(const TcpIngest&) = delete;

    std::uint16_t port() const { return port_; }
    void stop();

private:
    void accept_loop();
    void serve_connection(int fd, std::string source);

    Hub& hub_;
    int listenFd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};
    std::thread acceptThread_;
    std::mutex connMu_;
    std::vector<int> connFds_;
    std::vector<std::thread> connThreads_;
};

// Replays a JSONL file. speed > 0 paces by the ts deltas divided by speed;
// speed == 0 replays as fast as possible.
class Replay {
public:
    Replay(Hub& hub, std::filesystem::path file, double speed);
    ~Replay();
    Replay(const Replay&) = delete;
    Replay& operator=(const Replay&) = delete;

    void wait();
    void stop();
    bool finished() const { return finished_; }

private:
    void run();

    Hub& hub_;
    std::filesystem::path file_;
    double speed_;
    std::atomic<bool> stopping_{false};
    std::atomic<bool> finished_{false};
    std::mutex mu_;
    std::condition_variable cv_;
    std::thread thread_;
};

// "file[:speed]"; speed defaults to 1.
std::pair<std::filesystem::path, double> parse_replay_spec(std::string_view spec);

// Blocking line writer to a TCP endpoint, used by the simulator sink.
class TcpLineWriter {
public:
    // Retries connecting `attempts` times with `backoff` between tries;
    // throws std::system_error when all fail.
    TcpLineWriter(const HostPort& target, int attempts = 5,
                  std::chrono::milliseconds backoff = std::chrono::milliseconds(200));
    ~TcpLineWriter();
    TcpLineWriter(const TcpLineWriter&) = delete;
    TcpLineWriter& operator=(const TcpLineWriter&) = delete;

    void write_line(std::string_view line);  // appends '\n'
    void flush();

private:
    int fd_ = -1;
    std::string pending_;
};

}  // namespace dtinsight::telemetry
