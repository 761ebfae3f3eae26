#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "dtinsight/constellation.hpp"
#include "dtinsight/dtdf.hpp"

namespace dtinsight::report {

std::string sha256_hex(std::string_view bytes);

// RFC 3339 UTC timestamp for "now", e.g. 2026-10-15T09:43:00Z.
std::string rfc3339_now();

// <table> with a Code/Characteristic/Description header and one row per code.
std::string table_html(const dtdf::CharacteristicsTable& table);

struct Manifest {
    std::string generatedAt;
    std::string modelName;
    std::string modelHash;
};

std::string manifest_json(const Manifest& m);

struct ReportBundle {
    std::string tableHtml;
    std::string constellationSvg;
    std::string constellationYaml;
    std::string indexHtml;
    Manifest manifest;
};

// Everything derived from one validated model, shared by `report`, `render`
// and `serve`.
struct Artifacts {
    dtdf::DescriptionModel model;
    dtdf::Vocabulary vocab;
    dtdf::ValidationReport validation;
    constellation::ConstellationGraph graph;
    constellation::LayoutResult layout;
    dtdf::CharacteristicsTable table;
};

class ReportError : public std::runtime_error {
public:
    enum class Kind { Invalid, Io };
    ReportError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

struct BuildInputs {
    std::string modelSource;
    std::string sourceName = "model.dtdf";                // for diagnostics
    std::optional<std::string> vocabularySource;          // .dtdfv extension text
    std::optional<std::string> registryOverride;          // registry JSON text
    constellation::BuildOptions graphOptions;
};

// Parse, validate (errors abort with Kind::Invalid), build graph, layout, table.
Artifacts build_artifacts(const BuildInputs& inputs);

ReportBundle render_bundle(const Artifacts& artifacts, std::string_view modelSource,
                           std::string generatedAt);

struct ReportOptions {
    std::optional<std::string> generatedAt;            // defaults to now
    std::optional<std::filesystem::path> embedUiDir;  // copied to outDir/app/
};

// Builds and writes index.html, table.html, constellation.svg,
// constellation.yaml and manifest.json. Files are staged in a sibling
// directory and moved into place, so `outDir` either receives the full set or
// is left untouched. An existing non-empty `outDir` is only replaced when it
// holds a previous report (has manifest.json).
ReportBundle generate_report(const BuildInputs& inputs, const std::filesystem::path& outDir,
                             const ReportOptions& options = {});

}  // namespace dtinsight::report
