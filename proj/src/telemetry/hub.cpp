#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "dtinsight/telemetry.hpp"
#include "dtinsight/text.hpp"

namespace dtinsight::telemetry {

std::variant<Sample, IngestError> parse_line(std::string_view line) {
    auto doc = nlohmann::json::parse(line, nullptr, false);
    if (doc.is_discarded()) return IngestError{"malformed JSON"};
    if (!doc.is_object()) return IngestError{"sample must be a JSON object"};

    Sample s;
    auto topic = doc.find("topic");
    if (topic == doc.end() || !topic->is_string() || topic->get_ref<const std::string&>().empty())
        return IngestError{"missing or empty 'topic'"};
    s.topic = topic->get<std::string>();

    auto ts = doc.find("ts");
    if (ts == doc.end() || !ts->is_number()) return IngestError{"missing or non-numeric 'ts'"};
    s.ts = ts->get<double>();
    if (!std::isfinite(s.ts)) return IngestError{"'ts' must be finite"};

    auto fields = doc.find("fields");
    if (fields == doc.end() || !fields->is_object()) return IngestError{"missing 'fields' object"};
    for (const auto& [k, v] : fields->items()) {
        if (!v.is_number()) return IngestError{"field '" + k + "' is not numeric"};
        double d = v.get<double>();
        if (!std::isfinite(d)) return IngestError{"field '" + k + "' is not finite"};
        s.fields.emplace(k, d);
    }
    return s;
}

std::string sample_json(const Sample& s) {
    std::string out = "{\"topic\":";
    out += nlohmann::json(s.topic).dump();
    out += ",\"ts\":";
    out += text::format_json_number(s.ts);
    out += ",\"fields\":{";
    bool first = true;
    for (const auto& [k, v] : s.fields) {
        if (!first) out += ',';
        first = false;
        out += nlohmann::json(k).dump();
        out += ':';
        out += text::format_json_number(v);
    }
    out += "},\"seq\":";
    out += std::to_string(s.seq);
    out += '}';
    return out;
}

std::string gap_json(std::uint64_t dropped) { return "{\"gap\":" + std::to_string(dropped) + "}"; }

// ---------------------------------------------------------------------------

TopicBuffer::TopicBuffer(std::size_t capacity) : capacity_(std::max<std::size_t>(capacity, 1)) {}

void TopicBuffer::push(Sample s) {
    if (samples_.size() == capacity_) {
        samples_.pop_front();
        ++dropped_;
    }
    samples_.push_back(std::move(s));
}

std::vector<Sample> TopicBuffer::since(std::uint64_t seq) const {
    auto first = std::upper_bound(samples_.begin(), samples_.end(), seq,
                                  [](std::uint64_t v, const Sample& s) { return v < s.seq; });
    return {first, samples_.end()};
}

// ---------------------------------------------------------------------------

void Subscription::push(const std::shared_ptr<const Sample>& s) {
    if (topic_ && *topic_ != s->topic) return;
    {
        std::lock_guard lk(mu_);
        if (closed_) return;
        if (queue_.size() >= capacity_) {
            queue_.pop_front();
            ++pendingGap_;
            ++totalDropped_;
        }
        queue_.push_back(s);
    }
    cv_.notify_one();
}

std::vector<std::string> Subscription::wait(std::chrono::milliseconds timeout, std::size_t max) {
    std::uint64_t gap = 0;
    std::vector<std::shared_ptr<const Sample>> batch;
    {
        std::unique_lock lk(mu_);
        cv_.wait_for(lk, timeout, [&] { return closed_ || pendingGap_ > 0 || !queue_.empty(); });
        gap = std::exchange(pendingGap_, 0);
        while (!queue_.empty() && batch.size() < max) {
            batch.push_back(std::move(queue_.front()));
            queue_.pop_front();
        }
    }
    std::vector<std::string> events;
    events.reserve(batch.size() + 1);
    if (gap > 0) events.push_back(gap_json(gap));
    for (const auto& s : batch) events.push_back(sample_json(*s));
    return events;
}

void Subscription::close() {
    {
        std::lock_guard lk(mu_);
        closed_ = true;
    }
    cv_.notify_all();
}

bool Subscription::closed() const {
    std::lock_guard lk(mu_);
    return closed_;
}

std::uint64_t Subscription::total_dropped() const {
    std::lock_guard lk(mu_);
    return totalDropped_;
}

// ---------------------------------------------------------------------------

Hub::Hub(std::size_t ringCapacity, std::size_t subscriberQueue)
    : ringCapacity_(std::max<std::size_t>(ringCapacity, 1)),
      subscriberQueue_(std::max<std::size_t>(subscriberQueue, 1)) {}

Hub::~Hub() { close_all(); }

Hub::Topic& Hub::topic(const std::string& name) {
    {
        std::shared_lock lk(topicsMu_);
        if (auto it = topics_.find(name); it != topics_.end()) return *it->second;
    }
    std::unique_lock lk(topicsMu_);
    auto& slot = topics_[name];
    if (!slot) slot = std::make_unique<Topic>(ringCapacity_);
    return *slot;
}

void Hub::count(const std::string& source, bool ok) {
    std::lock_guard lk(statsMu_);
    auto& st = stats_[source];
    if (ok)
        ++st.accepted;
    else
        ++st.errors;
}

Sample Hub::ingest(Sample s, const std::string& source) {
    Topic& t = topic(s.topic);
    std::shared_ptr<const Sample> shared;
    {
        std::lock_guard lk(t.mu);
        s.seq = t.nextSeq++;
        shared = std::make_shared<const Sample>(std::move(s));
        t.buffer.push(*shared);
        std::lock_guard subs(subsMu_);
        for (const auto& sub : subs_) sub->push(shared);
    }
    count(source, true);
    return *shared;
}

std::variant<Sample, IngestError> Hub::ingest_line(std::string_view line, const std::string& source) {
    auto parsed = parse_line(line);
    if (auto* err = std::get_if<IngestError>(&parsed)) {
        count(source, false);
        return *err;
    }
    return ingest(std::move(std::get<Sample>(parsed)), source);
}

std::shared_ptr<Subscription> Hub::subscribe(std::optional<std::string> topic,
                                             std::optional<std::size_t> queueCapacity) {
    auto sub = std::make_shared<Subscription>(std::max<std::size_t>(queueCapacity.value_or(subscriberQueue_), 1),
                                              std::move(topic));
    std::lock_guard lk(subsMu_);
    subs_.push_back(sub);
    return sub;
}

void Hub::unsubscribe(const std::shared_ptr<Subscription>& sub) {
    sub->close();
    std::lock_guard lk(subsMu_);
    subs_.erase(std::remove(subs_.begin(), subs_.end(), sub), subs_.end());
}

void Hub::close_all() {
    std::lock_guard lk(subsMu_);
    for (const auto& s : subs_) s->close();
    subs_.clear();
}

std::optional<TopicSnapshot> Hub::snapshot(const std::string& name, std::uint64_t sinceSeq) const {
    const Topic* t = nullptr;
    {
        std::shared_lock lk(topicsMu_);
        auto it = topics_.find(name);
        if (it == topics_.end()) return std::nullopt;
        t = it->second.get();
    }
    std::lock_guard lk(t->mu);
    return TopicSnapshot{t->buffer.since(sinceSeq), t->buffer.dropped(), t->nextSeq - 1};
}

std::vector<std::string> Hub::topics() const {
    std::shared_lock lk(topicsMu_);
    std::vector<std::string> out;
    for (const auto& [name, t] : topics_) out.push_back(name);
    return out;
}

std::map<std::string, SourceStats> Hub::source_stats() const {
    std::lock_guard lk(statsMu_);
    return stats_;
}

std::size_t Hub::subscriber_count() const {
    std::lock_guard lk(subsMu_);
    return subs_.size();
}

}  // namespace dtinsight::telemetry
