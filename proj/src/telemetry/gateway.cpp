#include "dtinsight/gateway.hpp"

#include <httplib.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <system_error>

#include "dtinsight/text.hpp"

namespace dtinsight::telemetry {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::system_error(std::make_error_code(std::errc::no_such_file_or_directory), p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

double rounded(double v) { return std::round(v * 10) / 10; }

void send_json(httplib::Response& res, const std::string& body, int status = 200) {
    res.status = status;
    res.set_content(body, "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, json{{"error", message}}.dump(), status);
}

std::string_view mime_for(const fs::path& p) {
    const auto ext = p.extension().string();
    if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
    if (ext == ".js" || ext == ".mjs") return "text/javascript";
    if (ext == ".css") return "text/css";
    if (ext == ".json") return "application/json";
    if (ext == ".svg") return "image/svg+xml";
    if (ext == ".png") return "image/png";
    if (ext == ".ico") return "image/x-icon";
    if (ext == ".yaml" || ext == ".yml" || ext == ".txt") return "text/plain; charset=utf-8";
    return "application/octet-stream";
}

constexpr std::string_view kFallbackPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>dtinsight gateway</title></head>
<body><h1>dtinsight gateway</h1>
<p>No UI bundle configured (start with <code>--ui-dir</code>). API endpoints:</p>
<ul>
<li><a href="/api/graph">/api/graph</a></li>
<li><a href="/api/characteristics">/api/characteristics</a></li>
<li>/api/components/{id}</li>
<li>/api/closure/{id}?direction=forward|backward|both</li>
<li>/api/script/{id}</li>
<li>/api/samples/{topic}?sinceSeq=k</li>
<li><a href="/api/stream">/api/stream</a></li>
<li><a href="/api/ingest">/api/ingest</a></li>
</ul></body></html>
)";

}  // namespace

// ---------------------------------------------------------------------------
// Bindings

std::optional<fs::path> contained_path(const fs::path& root, std::string_view relative) {
    fs::path rel{std::string(relative)};
    if (rel.empty() || rel.has_root_path()) return std::nullopt;
    std::error_code ec;
    const fs::path base = fs::weakly_canonical(root, ec);
    if (ec) return std::nullopt;
    const fs::path full = fs::weakly_canonical(base / rel, ec);
    if (ec) return std::nullopt;
    const fs::path inside = full.lexically_relative(base);
    if (inside.empty() || *inside.begin() == "..") return std::nullopt;
    return full;
}

Bindings parse_bindings(std::string_view json_text, const fs::path& baseDir) {
    auto doc = nlohmann::json::parse(json_text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw BindingError("bindings: expected a JSON object");

    Bindings b;
    b.sourceRoot = baseDir;
    if (auto it = doc.find("sourceRoot"); it != doc.end()) {
        if (!it->is_string()) throw BindingError("bindings: 'sourceRoot' must be a string");
        fs::path root = it->get<std::string>();
        b.sourceRoot = root.is_absolute() ? root : baseDir / root;
    }
    b.sourceRoot = fs::weakly_canonical(b.sourceRoot);

    auto comps = doc.find("components");
    if (comps == doc.end()) return b;
    if (!comps->is_object()) throw BindingError("bindings: 'components' must be an object");
    for (const auto& [id, entry] : comps->items()) {
        if (!entry.is_object()) throw BindingError("bindings: entry '" + id + "' must be an object");
        Binding bind;
        if (auto t = entry.find("topic"); t != entry.end()) {
            if (!t->is_string() || t->get_ref<const std::string&>().empty())
                throw BindingError("bindings: '" + id + "'.topic must be a non-empty string");
            bind.topic = t->get<std::string>();
        }
        if (auto s = entry.find("script"); s != entry.end()) {
            if (!s->is_string()) throw BindingError("bindings: '" + id + "'.script must be a string");
            const auto& rel = s->get_ref<const std::string&>();
            if (!contained_path(b.sourceRoot, rel))
                throw BindingError("bindings: script for '" + id + "' escapes the source root");
            bind.scriptPath = rel;
        }
        b.components.emplace(id, std::move(bind));
    }
    return b;
}

Bindings load_bindings(const fs::path& file) {
    std::string text;
    try {
        text = read_file(file);
    } catch (const std::system_error&) {
        throw BindingError("cannot read bindings file " + file.string());
    }
    return parse_bindings(text, file.parent_path().empty() ? fs::path(".") : file.parent_path());
}

// ---------------------------------------------------------------------------
// Documents

std::string graph_json(const report::Artifacts& a) {
    json doc;
    doc["constellation"] = 1;
    doc["width"] = a.layout.width;
    doc["height"] = a.layout.height;
    auto& nodes = doc["nodes"] = json::array();
    for (const auto& id : a.layout.order) {
        const auto* n = a.graph.find(id);
        const auto& p = a.layout.positions.at(id);
        nodes.push_back({{"id", n->id},
                         {"label", n->label},
                         {"category", std::string(constellation::to_string(n->category))},
                         {"x", rounded(p.x)},
                         {"y", rounded(p.y)}});
    }
    auto& edges = doc["edges"] = json::array();
    for (const auto& e : a.graph.edges) edges.push_back({{"src", e.src}, {"dst", e.dst}, {"relation", e.relation}});
    return doc.dump();
}

std::string characteristics_json(const dtdf::CharacteristicsTable& table) {
    json rows = json::array();
    for (const auto& r : table)
        rows.push_back({{"code", r.code}, {"label", r.label}, {"text", r.text}, {"sources", r.sourceInstanceIds}});
    return rows.dump();
}

namespace {

json component_json(const report::Artifacts& a, const dtdf::Instance& inst, const Bindings& bindings) {
    const auto& m = a.model;
    const std::string id = m.display_id(inst.id);
    json doc;
    doc["id"] = id;
    doc["iri"] = inst.id.str();
    doc["kind"] = inst.kind.str();
    if (const auto* node = a.graph.find(id))
        doc["category"] = std::string(constellation::to_string(node->category));
    else
        doc["category"] = nullptr;
    doc["desc"] = inst.desc ? json(*inst.desc) : json(nullptr);

    auto& rels = doc["relations"] = json::array();
    for (const auto& r : inst.relations)
        rels.push_back({{"relation", r.relation.str()}, {"target", m.display_id(r.target)}});
    auto& scalars = doc["scalars"] = json::array();
    for (const auto& s : inst.scalars) {
        json v;
        std::visit([&](const auto& lit) { v = lit; }, s.value);
        scalars.push_back({{"property", s.property.str()}, {"value", v}});
    }

    if (auto it = bindings.components.find(id); it != bindings.components.end()) {
        json b;
        b["topic"] = it->second.topic ? json(*it->second.topic) : json(nullptr);
        b["script"] = it->second.scriptPath ? json(*it->second.scriptPath) : json(nullptr);
        doc["binding"] = std::move(b);
    } else {
        doc["binding"] = nullptr;
    }
    return doc;
}

const dtdf::Instance* find_by_display(const dtdf::DescriptionModel& m, std::string_view id) {
    for (const auto& inst : m.instances)
        if (m.display_id(inst.id) == id) return &inst;
    return nullptr;
}

}  // namespace

// ---------------------------------------------------------------------------
// Gateway

Gateway::Gateway(report::Artifacts artifacts, Bindings bindings, ServeOptions options)
    : artifacts_(std::move(artifacts)),
      bindings_(std::move(bindings)),
      options_(std::move(options)),
      hub_(options_.ringCapacity, options_.subscriberQueue),
      graphJson_(graph_json(artifacts_)),
      characteristicsJson_(characteristics_json(artifacts_.table)),
      store_(std::make_unique<store::TripleStore>(store::to_triples(artifacts_.model))),
      server_(std::make_unique<httplib::Server>()) {
    if (options_.uiDir) options_.uiDir = fs::weakly_canonical(*options_.uiDir);
    server_->new_task_queue = [] { return new httplib::ThreadPool(32); };
    // httplib defaults to SO_REUSEPORT, which lets a second server share a
    // busy port silently. Plain SO_REUSEADDR makes that a bind error.
    server_->set_socket_options([](int sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    });
    install_routes();
}

Gateway::~Gateway() { stop(); }

void Gateway::install_routes() {
    auto& svr = *server_;

    svr.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
        send_error(res, res.status, res.status == 404 ? "not found" : "request failed");
        return httplib::Server::HandlerResponse::Handled;
    });

    svr.Get("/api/graph", [this](const httplib::Request&, httplib::Response& res) { send_json(res, graphJson_); });

    svr.Get("/api/characteristics",
            [this](const httplib::Request&, httplib::Response& res) { send_json(res, characteristicsJson_); });

    svr.Get(R"(/api/components/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        const auto* inst = find_by_display(artifacts_.model, id);
        if (!inst) return send_error(res, 404, "unknown component '" + id + "'");
        send_json(res, component_json(artifacts_, *inst, bindings_).dump());
    });

    svr.Get(R"(/api/closure/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        auto dir = constellation::Direction::Both;
        if (req.has_param("direction")) {
            auto parsed = constellation::direction_from_string(req.get_param_value("direction"));
            if (!parsed) return send_error(res, 400, "direction must be forward, backward or both");
            dir = *parsed;
        }
        try {
            send_json(res, constellation::closure_json(constellation::closure(artifacts_.graph, id, dir)));
        } catch (const constellation::UnknownNode& e) {
            send_error(res, 404, e.what());
        }
    });

    svr.Get(R"(/api/script/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        auto it = bindings_.components.find(id);
        if (it == bindings_.components.end() || !it->second.scriptPath)
            return send_error(res, 404, "no script bound to '" + id + "'");
        auto path = contained_path(bindings_.sourceRoot, *it->second.scriptPath);
        if (!path) return send_error(res, 403, "script path escapes the source root");
        std::error_code ec;
        if (!fs::is_regular_file(*path, ec)) return send_error(res, 404, "script file not found");
        res.set_content(read_file(*path), "text/plain; charset=utf-8");
    });

    svr.Get(R"(/api/samples/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string topic = req.matches[1];
        std::uint64_t since = 0;
        if (req.has_param("sinceSeq")) {
            const auto v = req.get_param_value("sinceSeq");
            auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), since);
            if (ec != std::errc{} || ptr != v.data() + v.size()) return send_error(res, 400, "bad sinceSeq");
        }
        auto snap = hub_.snapshot(topic, since);
        if (!snap) return send_error(res, 404, "unknown topic '" + topic + "'");
        std::string body = "{\"topic\":" + json(topic).dump() + ",\"dropped\":" + std::to_string(snap->dropped) +
                           ",\"lastSeq\":" + std::to_string(snap->lastSeq) + ",\"samples\":[";
        for (std::size_t i = 0; i < snap->samples.size(); ++i) {
            if (i) body += ',';
            body += sample_json(snap->samples[i]);
        }
        body += "]}";
        send_json(res, body);
    });

    svr.Get("/api/stream", [this](const httplib::Request& req, httplib::Response& res) {
        std::optional<std::string> topic;
        if (req.has_param("topic")) topic = req.get_param_value("topic");
        auto sub = hub_.subscribe(topic);
        res.set_header("Cache-Control", "no-cache");
        res.set_header("X-Accel-Buffering", "no");
        auto idle = std::make_shared<std::chrono::milliseconds>(0);
        res.set_chunked_content_provider(
            "text/event-stream",
            [this, sub, idle](std::size_t offset, httplib::DataSink& sink) {
                if (offset == 0) {
                    // Flush headers right away so clients see the stream open.
                    static constexpr std::string_view hello = ": stream open\n\n";
                    if (!sink.write(hello.data(), hello.size())) return false;
                }
                constexpr auto tick = std::chrono::milliseconds(200);
                while (!stopping_ && !sub->closed()) {
                    auto events = sub->wait(tick);
                    if (events.empty()) {
                        *idle += tick;
                        if (*idle < options_.heartbeat) continue;
                        *idle = std::chrono::milliseconds(0);
                        static constexpr std::string_view beat = ": keepalive\n\n";
                        return sink.write(beat.data(), beat.size());
                    }
                    *idle = std::chrono::milliseconds(0);
                    std::string chunk;
                    for (const auto& e : events) {
                        chunk += "data: ";
                        chunk += e;
                        chunk += "\n\n";
                    }
                    return sink.write(chunk.data(), chunk.size());
                }
                sink.done();
                return true;
            },
            [this, sub](bool) { hub_.unsubscribe(sub); });
    });

    svr.Get("/api/ingest", [this](const httplib::Request&, httplib::Response& res) {
        json doc;
        auto& sources = doc["sources"] = json::object();
        for (const auto& [name, st] : hub_.source_stats())
            sources[name] = {{"accepted", st.accepted}, {"errors", st.errors}};
        doc["topics"] = hub_.topics();
        doc["subscribers"] = hub_.subscriber_count();
        send_json(res, doc.dump());
    });

    if (options_.enableQuery) {
        svr.Post("/api/query", [this](const httplib::Request& req, httplib::Response& res) {
            std::string text = req.body;
            if (req.get_header_value("Content-Type").starts_with("application/json")) {
                auto doc = nlohmann::json::parse(req.body, nullptr, false);
                if (doc.is_discarded() || !doc.contains("query") || !doc["query"].is_string())
                    return send_error(res, 400, "expected {\"query\": \"...\"}");
                text = doc["query"].get<std::string>();
            }
            try {
                auto q = store::parse_query(text, *store_);
                send_json(res, store::results_json(q, store::select(q, *store_), artifacts_.model));
            } catch (const store::QueryError& e) {
                send_error(res, 400, e.what());
            }
        });
    }

    if (options_.uiDir) {
        svr.Get(R"(/(.*))", [this](const httplib::Request& req, httplib::Response& res) {
            std::string rel = req.matches[1];
            if (rel.empty() || rel.back() == '/') rel += "index.html";
            auto path = contained_path(*options_.uiDir, rel);
            if (!path) return send_error(res, 403, "path outside the UI bundle");
            std::error_code ec;
            if (fs::is_directory(*path, ec)) path = *path / "index.html";
            if (!fs::is_regular_file(*path, ec)) return send_error(res, 404, "not found");
            res.set_content(read_file(*path), std::string(mime_for(*path)));
        });
    } else {
        svr.Get("/", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(std::string(kFallbackPage), "text/html; charset=utf-8");
        });
    }
}

std::uint16_t Gateway::start() {
    int port = options_.port == 0 ? server_->bind_to_any_port(options_.host)
                                  : (server_->bind_to_port(options_.host, options_.port) ? options_.port : -1);
    if (port <= 0)
        throw std::system_error(std::make_error_code(std::errc::address_in_use),
                                "cannot bind " + options_.host + ":" + std::to_string(options_.port));
    port_ = static_cast<std::uint16_t>(port);
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port_;
}

void Gateway::stop() {
    std::lock_guard lk(stopMu_);
    stopping_ = true;
    hub_.close_all();
    server_->stop();
    if (thread_.joinable()) thread_.join();
}

void Gateway::wait() {
    while (!stopping_) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

}  // namespace dtinsight::telemetry
