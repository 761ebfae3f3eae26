#include "dtinsight/report.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "dtinsight/dsl.hpp"
#include "dtinsight/text.hpp"

namespace dtinsight::report {

namespace fs = std::filesystem;

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

std::string rfc3339_now() {
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buf;
}

namespace {

std::string html_multiline(std::string_view s) {
    std::string escaped = text::html_escape(s);
    std::string out;
    for (char c : escaped) {
        if (c == '\n')
            out += "<br>";
        else
            out += c;
    }
    return out;
}

}  // namespace

std::string table_html(const dtdf::CharacteristicsTable& table) {
    std::ostringstream os;
    os << "<table class=\"characteristics\">\n"
       << "<thead><tr><th>Code</th><th>Characteristic</th><th>Description</th></tr></thead>\n"
       << "<tbody>\n";
    for (const auto& row : table) {
        os << "<tr";
        if (row.sourceInstanceIds.empty()) os << " class=\"not-reported\"";
        os << "><td>" << text::html_escape(row.code) << "</td><td>" << text::html_escape(row.label) << "</td><td>"
           << html_multiline(row.text) << "</td></tr>\n";
    }
    os << "</tbody>\n</table>\n";
    return os.str();
}

std::string manifest_json(const Manifest& m) {
    nlohmann::json doc = {
        {"generatedAt", m.generatedAt},
        {"modelName", m.modelName},
        {"modelHash", m.modelHash},
    };
    return doc.dump(2) + "\n";
}

Artifacts build_artifacts(const BuildInputs& inputs) {
    auto parsed = dsl::parse_description(inputs.modelSource);
    if (!parsed) {
        std::string msg;
        for (const auto& d : parsed.diagnostics) msg += dsl::format_diagnostic(d, inputs.sourceName) + "\n";
        throw ReportError(ReportError::Kind::Invalid, msg);
    }

    dtdf::Vocabulary vocab = dtdf::builtin_vocabulary();
    if (inputs.vocabularySource) {
        auto v = dsl::parse_vocabulary(*inputs.vocabularySource);
        if (!v) {
            std::string msg;
            for (const auto& d : v.diagnostics) msg += dsl::format_diagnostic(d, "vocabulary") + "\n";
            throw ReportError(ReportError::Kind::Invalid, msg);
        }
        vocab = std::move(*v.value);
    }

    Artifacts a{std::move(*parsed.value), std::move(vocab), {}, {}, {}, {}};
    a.validation = dtdf::validate(a.model, a.vocab);
    if (!a.validation.ok()) {
        std::string msg;
        for (const auto& f : a.validation.findings)
            if (f.severity == dtdf::Severity::Error)
                msg += inputs.sourceName + ": error: " + f.code + ": " + a.model.display_id(f.instance) + ": " +
                       f.message + "\n";
        throw ReportError(ReportError::Kind::Invalid, msg);
    }

    auto registry = dtdf::CharacteristicRegistry::defaults();
    if (inputs.registryOverride) {
        try {
            registry = registry.with_overrides(*inputs.registryOverride, &a.vocab);
        } catch (const dtdf::RegistryError& e) {
            throw ReportError(ReportError::Kind::Invalid, std::string("registry: ") + e.what());
        }
    }

    a.graph = constellation::build_constellation(a.model, a.vocab, inputs.graphOptions);
    a.layout = constellation::layout(a.graph);
    a.table = dtdf::characteristics_table(a.model, a.vocab, registry);
    return a;
}

namespace {

constexpr std::string_view kPageStyle = R"(body{font-family:sans-serif;margin:2rem auto;max-width:72rem;color:#222;padding:0 1rem}
h1{font-size:1.6rem}h2{font-size:1.2rem;margin-top:2rem;border-bottom:1px solid #ddd}
.meta{color:#666;font-size:.85rem}
.diagram{overflow-x:auto;border:1px solid #eee}
iframe{width:100%;height:36rem;border:1px solid #ddd}
table.characteristics{border-collapse:collapse;width:100%}
table.characteristics th,table.characteristics td{border:1px solid #ccc;padding:.4rem .6rem;text-align:left;vertical-align:top}
table.characteristics th{background:#f3f5f8}
tr.not-reported td:last-child{color:#999;font-style:italic})";

std::string index_html(const Artifacts& a, const std::string& tableHtml, const std::string& inlineSvg,
                       const Manifest& m) {
    std::ostringstream os;
    const std::string name = text::html_escape(a.model.name);
    os << "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n"
       << "<title>Digital twin report: " << name << "</title>\n"
       << "<style>\n" << kPageStyle << "\n</style>\n</head>\n<body>\n"
       << "<header>\n<h1>Digital twin report: " << name << "</h1>\n"
       << "<p class=\"meta\">Model hash <code>" << m.modelHash << "</code> &middot; " << a.graph.nodes.size()
       << " components &middot; " << a.graph.edges.size() << " data flows</p>\n</header>\n"
       << "<section id=\"architecture\">\n<h2>Conceptual architecture</h2>\n<div class=\"diagram\">\n"
       << inlineSvg << "</div>\n</section>\n"
       << "<section id=\"explorer\">\n<h2>Interactive explorer</h2>\n"
       << "<iframe src=\"./app/\" title=\"Constellation explorer\" loading=\"lazy\"></iframe>\n</section>\n"
       << "<section id=\"characteristics\">\n<h2>Characteristics</h2>\n"
       << tableHtml << "</section>\n</body>\n</html>\n";
    return os.str();
}

void write_file(const fs::path& p, std::string_view content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw ReportError(ReportError::Kind::Io, "cannot write " + p.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ReportError(ReportError::Kind::Io, "write failed for " + p.string());
}

fs::path staging_path(const fs::path& outDir, std::string_view tag) {
    static std::atomic<unsigned> counter{0};
    auto name = "." + outDir.filename().string() + "." + std::string(tag) + "-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter++);
    return outDir.parent_path() / name;
}

}  // namespace

ReportBundle render_bundle(const Artifacts& a, std::string_view modelSource, std::string generatedAt) {
    ReportBundle b;
    b.manifest = {std::move(generatedAt), a.model.name, sha256_hex(modelSource)};
    b.tableHtml = table_html(a.table);
    b.constellationSvg = constellation::render_svg(a.graph, a.layout);
    b.constellationYaml = constellation::to_yaml(a.graph, a.layout);
    b.indexHtml = index_html(a, b.tableHtml, constellation::render_svg(a.graph, a.layout, {.standalone = false}),
                             b.manifest);
    return b;
}

ReportBundle generate_report(const BuildInputs& inputs, const fs::path& outDirArg, const ReportOptions& options) {
    const Artifacts artifacts = build_artifacts(inputs);
    ReportBundle bundle =
        render_bundle(artifacts, inputs.modelSource, options.generatedAt.value_or(rfc3339_now()));

    std::error_code ec;
    fs::path outDir = fs::absolute(outDirArg, ec).lexically_normal();
    if (ec) throw ReportError(ReportError::Kind::Io, "bad output path: " + ec.message());
    if (outDir.filename().empty()) outDir = outDir.parent_path();  // trailing slash

    if (fs::exists(outDir)) {
        if (!fs::is_directory(outDir))
            throw ReportError(ReportError::Kind::Io, outDir.string() + " exists and is not a directory");
        if (!fs::is_empty(outDir) && !fs::exists(outDir / "manifest.json"))
            throw ReportError(ReportError::Kind::Io,
                              "refusing to replace " + outDir.string() + ": not empty and not a previous report");
    }
    if (options.embedUiDir && !fs::is_directory(*options.embedUiDir))
        throw ReportError(ReportError::Kind::Io, "UI bundle directory not found: " + options.embedUiDir->string());

    fs::create_directories(outDir.parent_path(), ec);
    if (ec) throw ReportError(ReportError::Kind::Io, "cannot create " + outDir.parent_path().string());

    const fs::path staged = staging_path(outDir, "staging");
    try {
        if (!fs::create_directory(staged, ec) || ec)
            throw ReportError(ReportError::Kind::Io, "cannot create staging directory " + staged.string());
        write_file(staged / "index.html", bundle.indexHtml);
        write_file(staged / "table.html", bundle.tableHtml);
        write_file(staged / "constellation.svg", bundle.constellationSvg);
        write_file(staged / "constellation.yaml", bundle.constellationYaml);
        write_file(staged / "manifest.json", manifest_json(bundle.manifest));
        if (options.embedUiDir) {
            fs::copy(*options.embedUiDir, staged / "app", fs::copy_options::recursive, ec);
            if (ec) throw ReportError(ReportError::Kind::Io, "copying UI bundle: " + ec.message());
        }

        fs::path backup;
        if (fs::exists(outDir)) {
            backup = staging_path(outDir, "previous");
            fs::rename(outDir, backup);
        }
        try {
            fs::rename(staged, outDir);
        } catch (const fs::filesystem_error&) {
            if (!backup.empty()) fs::rename(backup, outDir, ec);  // put the old report back
            throw;
        }
        if (!backup.empty()) fs::remove_all(backup, ec);
    } catch (const fs::filesystem_error& e) {
        fs::remove_all(staged, ec);
        throw ReportError(ReportError::Kind::Io, e.what());
    } catch (...) {
        fs::remove_all(staged, ec);
        throw;
    }
    return bundle;
}

}  // namespace dtinsight::report
