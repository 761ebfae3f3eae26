// dtinsight: command-line entry point for the description, report and
// telemetry pipeline. Exit codes: 0 ok, 1 parse/validation failure, 2 I/O or
// network failure, 3 usage error. Data goes to stdout, diagnostics to stderr.

#include <CLI11.hpp>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "dtinsight/constellation.hpp"
#include "dtinsight/dsl.hpp"
#include "dtinsight/dtdf.hpp"
#include "dtinsight/gateway.hpp"
#include "dtinsight/report.hpp"
#include "dtinsight/sim.hpp"
#include "dtinsight/store.hpp"
#include "dtinsight/telemetry.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace dtinsight;

namespace {

enum Exit : int { kOk = 0, kInvalid = 1, kIo = 2, kUsage = 3 };

struct Failure {
    int code;
    std::string message;
};

std::string read_text(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure{kIo, std::string("cannot read ") + what + " '" + path + "'"};
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(content.data(), static_cast<std::streamsize>(content.size())))
        throw Failure{kIo, "cannot write '" + path + "'"};
}

// Shared by every subcommand that loads a model.
struct ModelArgs {
    std::string model;
    std::string vocab;
    std::string registry;

    report::BuildInputs inputs() const {
        report::BuildInputs in;
        in.modelSource = read_text(model, "model");
        in.sourceName = model;
        if (!vocab.empty()) in.vocabularySource = read_text(vocab, "vocabulary");
        std::string reg = registry;
        if (reg.empty())
            if (const char* env = std::getenv("DTINSIGHT_REGISTRY"); env && *env) reg = env;
        if (!reg.empty()) in.registryOverride = read_text(reg, "registry");
        return in;
    }
};

report::Artifacts build(const ModelArgs& args) {
    try {
        return report::build_artifacts(args.inputs());
    } catch (const report::ReportError& e) {
        throw Failure{e.kind() == report::ReportError::Kind::Io ? kIo : kInvalid, e.what()};
    }
}

// ---------------------------------------------------------------------------

int cmd_validate(const ModelArgs& args, bool asJson) {
    const std::string source = read_text(args.model, "model");
    dtdf::Vocabulary vocab = dtdf::builtin_vocabulary();
    std::vector<dsl::ParseDiagnostic> diags;
    if (!args.vocab.empty()) {
        auto v = dsl::parse_vocabulary(read_text(args.vocab, "vocabulary"));
        if (v)
            vocab = std::move(*v.value);
        else
            diags = std::move(v.diagnostics);
    }
    std::optional<dtdf::DescriptionModel> model;
    if (diags.empty()) {
        auto parsed = dsl::parse_description(source);
        if (parsed)
            model = std::move(parsed.value);
        else
            diags = std::move(parsed.diagnostics);
    }

    if (!model) {
        if (asJson) {
            json doc{{"ok", false}, {"diagnostics", json::array()}};
            for (const auto& d : diags)
                doc["diagnostics"].push_back({{"line", d.span.line},
                                              {"column", d.span.column},
                                              {"length", d.span.length},
                                              {"message", d.message},
                                              {"expected", d.expected ? json(*d.expected) : json(nullptr)}});
            std::cout << doc.dump(2) << '\n';
        }
        for (const auto& d : diags) std::cerr << dsl::format_diagnostic(d, args.model) << '\n';
        return kInvalid;
    }

    const auto report = dtdf::validate(*model, vocab);
    if (asJson) {
        json doc{{"ok", report.ok()},
                 {"model", model->name},
                 {"instances", model->instances.size()},
                 {"errors", report.error_count()},
                 {"findings", json::array()}};
        for (const auto& f : report.findings)
            doc["findings"].push_back({{"severity", std::string(dtdf::to_string(f.severity))},
                                       {"code", f.code},
                                       {"instance", model->display_id(f.instance)},
                                       {"message", f.message}});
        std::cout << doc.dump(2) << '\n';
    } else {
        for (const auto& f : report.findings)
            std::cout << args.model << ": " << dtdf::to_string(f.severity) << ": " << f.code << ": "
                      << model->display_id(f.instance) << ": " << f.message << '\n';
        std::cout << model->instances.size() << " instances, " << report.error_count() << " errors, "
                  << report.findings.size() - report.error_count() << " warnings\n";
    }
    return report.ok() ? kOk : kInvalid;
}

int cmd_query(const ModelArgs& args, std::string queryArg, bool asJson) {
    if (!queryArg.empty() && queryArg.front() == '@') queryArg = read_text(queryArg.substr(1), "query file");
    const auto a = build(args);
    store::TripleStore st(store::to_triples(a.model));
    store::Query q;
    std::vector<store::Binding> rows;
    try {
        q = store::parse_query(queryArg, st);
        rows = store::select(q, st);
    } catch (const store::QueryError& e) {
        throw Failure{kInvalid, std::string("query: ") + e.what()};
    }

    if (asJson) {
        std::cout << json::parse(store::results_json(q, rows, a.model)).dump(2) << '\n';
        return kOk;
    }
    std::vector<std::vector<std::string>> cells;
    std::vector<std::size_t> width;
    for (const auto& v : q.selectVars) width.push_back(v.size() + 1);
    for (const auto& row : rows) {
        auto& line = cells.emplace_back();
        for (std::size_t i = 0; i < q.selectVars.size(); ++i) {
            line.push_back(store::display(row.at(q.selectVars[i]), a.model));
            width[i] = std::max(width[i], line.back().size());
        }
    }
    auto print_row = [&](const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i) std::cout << "  ";
            if (i + 1 == r.size())
                std::cout << r[i];
            else
                std::cout << std::left << std::setw(static_cast<int>(width[i])) << r[i];
        }
        std::cout << '\n';
    };
    std::vector<std::string> header;
    for (const auto& v : q.selectVars) header.push_back("?" + v);
    print_row(header);
    for (const auto& r : cells) print_row(r);
    std::cerr << rows.size() << (rows.size() == 1 ? " row\n" : " rows\n");
    return kOk;
}

int cmd_render(const ModelArgs& args, const std::string& svgOut, const std::string& yamlOut, bool asJson) {
    if (svgOut.empty() && yamlOut.empty()) throw Failure{kUsage, "render: give --svg and/or --yaml"};
    const auto a = build(args);
    if (!svgOut.empty()) write_text(svgOut, constellation::render_svg(a.graph, a.layout));
    if (!yamlOut.empty()) write_text(yamlOut, constellation::to_yaml(a.graph, a.layout));
    if (asJson) {
        json doc{{"nodes", a.graph.nodes.size()},
                 {"edges", a.graph.edges.size()},
                 {"crossings", constellation::count_crossings(a.graph, a.layout)}};
        if (!svgOut.empty()) doc["svg"] = svgOut;
        if (!yamlOut.empty()) doc["yaml"] = yamlOut;
        std::cout << doc.dump(2) << '\n';
    }
    return kOk;
}

struct ReportArgs {
    std::string out;
    bool embedUi = false;
    std::string uiDir = "webui/dist";
    std::string generatedAt;
};

int cmd_report(const ModelArgs& args, const ReportArgs& r, bool asJson) {
    auto inputs = args.inputs();
    report::ReportOptions opts;
    if (!r.generatedAt.empty()) opts.generatedAt = r.generatedAt;
    if (r.embedUi) {
        if (!fs::is_directory(r.uiDir)) throw Failure{kIo, "UI bundle directory '" + r.uiDir + "' not found"};
        opts.embedUiDir = r.uiDir;
    }
    report::ReportBundle bundle;
    try {
        bundle = report::generate_report(inputs, r.out, opts);
    } catch (const report::ReportError& e) {
        throw Failure{e.kind() == report::ReportError::Kind::Io ? kIo : kInvalid, e.what()};
    } catch (const fs::filesystem_error& e) {
        throw Failure{kIo, e.what()};
    }
    if (asJson) {
        json doc{{"out", r.out},
                 {"generatedAt", bundle.manifest.generatedAt},
                 {"modelName", bundle.manifest.modelName},
                 {"modelHash", bundle.manifest.modelHash}};
        std::cout << doc.dump(2) << '\n';
    } else {
        std::cerr << "report written to " << r.out << '\n';
    }
    return kOk;
}

struct ServeArgs {
    std::string bind = "127.0.0.1:8080";
    std::string ingestTcp;
    std::string replay;
    std::string bindings;
    std::string uiDir;
    bool enableQuery = false;
    std::size_t ringCapacity = telemetry::kDefaultRingCapacity;
};

int cmd_serve(const ModelArgs& args, const ServeArgs& s, bool asJson) {
    auto artifacts = build(args);

    telemetry::ServeOptions opts;
    telemetry::HostPort bind;
    std::optional<telemetry::HostPort> ingestAt;
    std::optional<std::pair<fs::path, double>> replaySpec;
    try {
        bind = telemetry::parse_host_port(s.bind);
        if (!s.ingestTcp.empty()) ingestAt = telemetry::parse_host_port(s.ingestTcp);
        if (!s.replay.empty()) replaySpec = telemetry::parse_replay_spec(s.replay);
    } catch (const std::invalid_argument& e) {
        throw Failure{kUsage, e.what()};
    }
    if (s.ringCapacity == 0) throw Failure{kUsage, "--ring-capacity must be positive"};
    opts.host = bind.host.empty() ? "0.0.0.0" : bind.host;
    opts.port = bind.port;
    opts.enableQuery = s.enableQuery;
    opts.ringCapacity = s.ringCapacity;
    if (!s.uiDir.empty()) opts.uiDir = s.uiDir;

    telemetry::Bindings bindings;
    if (!s.bindings.empty()) {
        try {
            bindings = telemetry::load_bindings(s.bindings);
        } catch (const telemetry::BindingError& e) {
            throw Failure{kInvalid, e.what()};
        }
    }

    // Block termination signals before any thread starts so that only the
    // sigwait below receives them.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    telemetry::Gateway gateway(std::move(artifacts), std::move(bindings), opts);
    std::unique_ptr<telemetry::TcpIngest> ingest;
    std::unique_ptr<telemetry::Replay> replay;
    std::uint16_t httpPort = 0;
    try {
        httpPort = gateway.start();
        if (ingestAt) ingest = std::make_unique<telemetry::TcpIngest>(gateway.hub(), *ingestAt);
        if (replaySpec) replay = std::make_unique<telemetry::Replay>(gateway.hub(), replaySpec->first, replaySpec->second);
    } catch (const std::system_error& e) {
        throw Failure{kIo, e.what()};
    }

    if (asJson) {
        json doc{{"http", httpPort}, {"ingest", ingest ? json(ingest->port()) : json(nullptr)}};
        std::cout << doc.dump() << std::endl;
    } else {
        std::cerr << "serving on http://" << opts.host << ':' << httpPort << '\n';
        if (ingest) std::cerr << "ingesting on tcp://" << (ingestAt->host.empty() ? "0.0.0.0" : ingestAt->host)
                              << ':' << ingest->port() << '\n';
    }

    int sig = 0;
    sigwait(&signals, &sig);
    std::cerr << "shutting down\n";
    if (replay) replay->stop();
    if (ingest) ingest->stop();
    gateway.stop();
    return kOk;
}

struct SimulateArgs {
    std::string params;
    double duration = 600;
    std::string sink = "-";
    std::optional<std::uint64_t> seed;
    double rate = 0;
};

int cmd_simulate(const SimulateArgs& a, bool asJson) {
    if (asJson && a.sink == "-") throw Failure{kUsage, "simulate: --json needs a sink other than stdout"};
    if (a.rate < 0) throw Failure{kUsage, "--rate must be >= 0"};
    sim::SimParams params;
    try {
        if (!a.params.empty()) params = sim::params_from_json(read_text(a.params, "parameter file"));
        if (a.seed) params.seed = *a.seed;
        params.check();
    } catch (const std::invalid_argument& e) {
        throw Failure{kInvalid, e.what()};
    }

    std::unique_ptr<telemetry::TcpLineWriter> tcp;
    std::ofstream file;
    std::function<void(const std::string&)> sink;
    if (a.sink == "-") {
        sink = [](const std::string& line) { std::cout << line << '\n'; };
    } else if (a.sink.starts_with("tcp://")) {
        try {
            tcp = std::make_unique<telemetry::TcpLineWriter>(telemetry::parse_host_port(a.sink.substr(6)));
        } catch (const std::invalid_argument& e) {
            throw Failure{kUsage, e.what()};
        } catch (const std::system_error& e) {
            throw Failure{kIo, e.what()};
        }
        sink = [&](const std::string& line) { tcp->write_line(line); };
    } else {
        file.open(a.sink, std::ios::binary | std::ios::trunc);
        if (!file) throw Failure{kIo, "cannot open sink '" + a.sink + "'"};
        sink = [&](const std::string& line) { file << line << '\n'; };
    }

    std::function<void()> pace;
    auto next = std::chrono::steady_clock::now();
    if (a.rate > 0) {
        const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(1.0 / a.rate));
        pace = [&, period] {
            if (tcp) tcp->flush();
            next += period;
            std::this_thread::sleep_until(next);
        };
    }

    std::size_t lines = 0;
    try {
        lines = sim::run(params, a.duration, sink, pace);
        if (tcp) tcp->flush();
    } catch (const std::system_error& e) {
        throw Failure{kIo, e.what()};
    }
    if (file.is_open() && !file.flush()) throw Failure{kIo, "write to '" + a.sink + "' failed"};
    std::cout.flush();
    if (asJson) std::cout << json{{"lines", lines}, {"sink", a.sink}, {"seed", params.seed}}.dump(2) << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    std::signal(SIGPIPE, SIG_IGN);

    CLI::App app{"dtinsight: digital twin descriptions, reports and live telemetry"};
    app.require_subcommand(1);
    bool asJson = false;
    app.add_flag("--json", asJson, "Emit a single JSON document on stdout");

    auto model_options = [](CLI::App* sub, ModelArgs& m) {
        sub->add_option("model", m.model, "Description model (.dtdf)")->required();
        sub->add_option("--vocab", m.vocab, "Vocabulary extension (.dtdfv)");
    };

    ModelArgs validateArgs;
    auto* validate = app.add_subcommand("validate", "Parse and validate a description model");
    model_options(validate, validateArgs);
    validate->add_flag("--json", asJson, "Machine-readable findings");

    ModelArgs queryArgs;
    std::string queryText;
    auto* query = app.add_subcommand("query", "Run a basic graph pattern query");
    model_options(query, queryArgs);
    query->add_option("--query,-q", queryText, "Query text, or @file")->required();
    query->add_flag("--json", asJson, "Bindings as JSON");

    ModelArgs renderArgs;
    std::string svgOut, yamlOut;
    auto* render = app.add_subcommand("render", "Write the constellation as SVG and/or YAML");
    model_options(render, renderArgs);
    render->add_option("--svg", svgOut, "SVG output path");
    render->add_option("--yaml", yamlOut, "YAML output path");
    render->add_flag("--json", asJson, "Print a summary as JSON");

    ModelArgs reportModel;
    ReportArgs reportArgs;
    auto* reportCmd = app.add_subcommand("report", "Generate the static report site");
    model_options(reportCmd, reportModel);
    reportCmd->add_option("--out,-o", reportArgs.out, "Output directory")->required();
    reportCmd->add_option("--registry", reportModel.registry, "Characteristic registry override (JSON)");
    reportCmd->add_flag("--embed-ui", reportArgs.embedUi, "Copy the built UI bundle into <out>/app/");
    reportCmd->add_option("--ui-dir", reportArgs.uiDir, "Built UI bundle to embed")->capture_default_str();
    reportCmd->add_option("--generated-at", reportArgs.generatedAt, "Fixed manifest timestamp (RFC 3339)");
    reportCmd->add_flag("--json", asJson, "Print the manifest as JSON");

    ModelArgs serveModel;
    ServeArgs serveArgs;
    auto* serve = app.add_subcommand("serve", "Run the telemetry gateway and HTTP API");
    model_options(serve, serveModel);
    serve->add_option("--registry", serveModel.registry, "Characteristic registry override (JSON)");
    serve->add_option("--bind", serveArgs.bind, "HTTP listen address host:port")->capture_default_str();
    serve->add_option("--ingest-tcp", serveArgs.ingestTcp, "Newline-delimited JSON ingest address host:port");
    serve->add_option("--replay", serveArgs.replay, "Replay a JSONL file: file[:speed]");
    serve->add_option("--bindings", serveArgs.bindings, "Component bindings file (JSON)");
    serve->add_option("--ui-dir", serveArgs.uiDir, "Static UI bundle served at /");
    serve->add_flag("--enable-query", serveArgs.enableQuery, "Expose POST /api/query");
    serve->add_option("--ring-capacity", serveArgs.ringCapacity, "Samples kept per topic")->capture_default_str();
    serve->add_flag("--json", asJson, "Print bound ports as JSON");

    SimulateArgs simArgs;
    std::uint64_t seed = 0;
    auto* simulate = app.add_subcommand("simulate", "Run the incubator simulator");
    simulate->add_option("--params", simArgs.params, "Parameter file (JSON)");
    simulate->add_option("--duration", simArgs.duration, "Simulated seconds")->capture_default_str();
    simulate->add_option("--sink", simArgs.sink, "tcp://host:port, a .jsonl path, or - for stdout")
        ->capture_default_str();
    auto* seedOpt = simulate->add_option("--seed", seed, "Noise seed (overrides the parameter file)");
    simulate->add_option("--rate", simArgs.rate, "Emissions per wall-clock second (0 = unpaced)")
        ->capture_default_str();
    simulate->add_flag("--json", asJson, "Print a run summary as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }
    if (*seedOpt) simArgs.seed = seed;

    try {
        if (*validate) return cmd_validate(validateArgs, asJson);
        if (*query) return cmd_query(queryArgs, queryText, asJson);
        if (*render) return cmd_render(renderArgs, svgOut, yamlOut, asJson);
        if (*reportCmd) return cmd_report(reportModel, reportArgs, asJson);
        if (*serve) return cmd_serve(serveModel, serveArgs, asJson);
        if (*simulate) return cmd_simulate(simArgs, asJson);
    } catch (const Failure& f) {
        std::cerr << "dtinsight: " << f.message;
        if (f.message.empty() || f.message.back() != '\n') std::cerr << '\n';
        return f.code;
    }
    return kUsage;
}
