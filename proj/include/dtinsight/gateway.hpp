#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>

#include "dtinsight/report.hpp"
#include "dtinsight/store.hpp"
#include "dtinsight/telemetry.hpp"

namespace httplib {
class Server;
}

namespace dtinsight::telemetry {

struct Binding {
    std::optional<std::string> topic;
    std::optional<std::string> scriptPath;  // relative to Bindings::sourceRoot
};

// Links instance display ids to telemetry topics and script files.
struct Bindings {
    std::filesystem::path sourceRoot;
    std::map<std::string, Binding> components;
};

class BindingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// {"sourceRoot": "src", "components": {"id": {"topic": "...", "script": "..."}}}
// A relative sourceRoot is resolved against `baseDir` (normally the
// directory holding the bindings file). Script paths that leave the root
// after normalization are rejected here, before the server ever sees them.
Bindings parse_bindings(std::string_view json_text, const std::filesystem::path& baseDir);
Bindings load_bindings(const std::filesystem::path& file);

// Resolves `relative` under `root`, or nullopt when the result escapes it.
std::optional<std::filesystem::path> contained_path(const std::filesystem::path& root, std::string_view relative);

struct ServeOptions {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;  // 0 picks a free port
    std::optional<std::filesystem::path> uiDir;
    bool enableQuery = false;
    std::size_t ringCapacity = kDefaultRingCapacity;
    std::size_t subscriberQueue = kDefaultSubscriberQueue;
    std::chrono::milliseconds heartbeat{5000};
};

// JSON documents the HTTP API serves; exposed so tests can compare them with
// the core modules directly.
std::string graph_json(const report::Artifacts& a);
std::string characteristics_json(const dtdf::CharacteristicsTable& table);

class Gateway {
public:
    Gateway(report::Artifacts artifacts, Bindings bindings, ServeOptions options);
    ~Gateway();
    Gateway(const Gateway&) = delete;
    Gateway& operator=(const Gateway&) = delete;

    // Binds and starts serving on a background thread; returns the bound
    // port. Throws std::system_error when the address cannot be bound.
    std::uint16_t start();
    void stop();
    // Blocks until stop() is called from another thread.
    void wait();

    Hub& hub() { return hub_; }
    std::uint16_t port() const { return port_; }

private:
    void install_routes();

    report::Artifacts artifacts_;
    Bindings bindings_;
    ServeOptions options_;
    Hub hub_;
    std::string graphJson_;
    std::string characteristicsJson_;
    std::unique_ptr<store::TripleStore> store_;

    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    std::uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};
    std::mutex stopMu_;
};

}  // namespace dtinsight::telemetry
