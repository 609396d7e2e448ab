#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace causeway::io {

enum class DocumentKind { graph, worldview, script, report };
const char* to_string(DocumentKind kind);
/// "graph", "worldview", "script" or "report"; throws ValidationError otherwise.
DocumentKind parse_kind(const std::string& text);

/// Guesses the kind from the document's top-level fields.
DocumentKind detect_kind(const nlohmann::json& j);

struct SchemaReport {
    DocumentKind kind = DocumentKind::graph;
    bool pass = true;
    /// Each message starts with the JSON pointer of the offending field.
    std::vector<std::string> errors;
};

SchemaReport validate_document(const nlohmann::json& j, DocumentKind kind);

/// Reads and validates a file; malformed JSON is reported, not thrown.
SchemaReport validate_file(const std::filesystem::path& path);
SchemaReport validate_file(const std::filesystem::path& path, DocumentKind kind);

nlohmann::json to_json(const SchemaReport& r);

/// Parses a file as JSON, raising ValidationError with the path on failure.
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace causeway::io
