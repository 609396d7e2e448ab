#include "causeway/io/validate.hpp"

#include <fstream>

#include "causeway/common.hpp"
#include "causeway/graph/serialize.hpp"
#include "causeway/hypothesis/provider.hpp"
#include "causeway/intervene/intervene.hpp"
#include "causeway/pipeline/pipeline.hpp"

namespace causeway::io {

using nlohmann::json;

const char* to_string(DocumentKind kind) {
    switch (kind) {
        case DocumentKind::graph: return "graph";
        case DocumentKind::worldview: return "worldview";
        case DocumentKind::script: return "script";
        case DocumentKind::report: return "report";
    }
    return "graph";
}

DocumentKind parse_kind(const std::string& text) {
    for (auto k : {DocumentKind::graph, DocumentKind::worldview, DocumentKind::script, DocumentKind::report})
        if (text == to_string(k)) return k;
    throw ValidationError("unknown document kind '" + text + "' (graph, worldview, script, report)");
}

DocumentKind detect_kind(const json& j) {
    const json* probe = &j;
    if (j.is_array() && !j.empty()) probe = &j.front();
    if (probe->is_object()) {
        if (probe->contains("schema")) return DocumentKind::report;
        if (probe->contains("unified_indicators") || probe->contains("worldviews")) return DocumentKind::worldview;
        if (probe->contains("knob") || probe->contains("scripts")) return DocumentKind::script;
    }
    return DocumentKind::graph;
}

namespace {

// Report fields: name, expected JSON type, and a check of the value.
void check_report(const json& j, std::vector<std::string>& errors) {
    if (!j.is_object()) {
        errors.push_back(": expected an object");
        return;
    }
    auto need = [&](const char* key, json::value_t type, const char* what) -> const json* {
        if (!j.contains(key)) {
            errors.push_back(std::string("/") + key + ": missing required field");
            return nullptr;
        }
        const auto& v = j.at(key);
        const bool ok = type == json::value_t::number_float     ? v.is_number()
                        : type == json::value_t::number_integer ? v.is_number_integer()
                                                                : v.type() == type;
        if (!ok) {
            errors.push_back(std::string("/") + key + ": expected " + what);
            return nullptr;
        }
        return &v;
    };
    if (auto s = need("schema", json::value_t::string, "a string"); s && *s != pipeline::kReportSchema)
        errors.push_back("/schema: expected \"" + std::string(pipeline::kReportSchema) + "\"");
    need("tool_version", json::value_t::string, "a string");
    if (auto h = need("config_hash", json::value_t::string, "a string"); h && h->get<std::string>().size() != 16)
        errors.push_back("/config_hash: expected 16 hex digits");
    if (auto c = need("config", json::value_t::object, "an object")) {
        try {
            pipeline::PipelineConfig::from_json(*c);
        } catch (const ValidationError& e) {
            errors.push_back(std::string("/config") + e.what());
        }
    }
    need("target", json::value_t::string, "a string");
    if (auto mb = need("markov_boundary", json::value_t::array, "an array of names"))
        for (std::size_t i = 0; i < mb->size(); ++i)
            if (!(*mb)[i].is_string()) errors.push_back("/markov_boundary/" + std::to_string(i) + ": expected a string");
    for (const char* key : {"cpdag", "projected"})
        if (auto g = need(key, json::value_t::object, "a graph")) {
            try {
                graph::from_json(*g);
            } catch (const ValidationError& e) {
                errors.push_back(std::string("/") + key + e.what());
            }
        }
    if (auto e = need("e_y", json::value_t::object, "an object")) {
        if (!e->contains("graph"))
            errors.push_back("/e_y/graph: missing required field");
        else
            try {
                graph::from_json(e->at("graph"));
            } catch (const ValidationError& x) {
                errors.push_back(std::string("/e_y/graph") + x.what());
            }
    }
    need("adjudications", json::value_t::array, "an array");
    if (auto m = need("minimality", json::value_t::object, "an object"); m && !(m->contains("pass") && (*m)["pass"].is_boolean()))
        errors.push_back("/minimality/pass: expected a boolean");
    need("rollouts_used", json::value_t::number_integer, "an integer");
    need("budget_exhausted", json::value_t::boolean, "a boolean");
}

}  // namespace

SchemaReport validate_document(const json& j, DocumentKind kind) {
    SchemaReport r;
    r.kind = kind;
    try {
        switch (kind) {
            case DocumentKind::graph: graph::from_json(j); break;
            case DocumentKind::worldview: hypothesis::worldviews_from_json(j); break;
            case DocumentKind::script: {
                const json* list = &j;
                if (j.is_object() && j.contains("scripts")) list = &j.at("scripts");
                if (list->is_array()) {
                    for (std::size_t i = 0; i < list->size(); ++i) {
                        try {
                            intervene::script_from_json((*list)[i]);
                        } catch (const ValidationError& e) {
                            r.errors.push_back("/scripts/" + std::to_string(i) + ": " + e.what());
                        }
                    }
                } else {
                    intervene::script_from_json(j);
                }
                break;
            }
            case DocumentKind::report: check_report(j, r.errors); break;
        }
    } catch (const ValidationError& e) {
        r.errors.push_back(e.what());
    } catch (const json::exception& e) {
        r.errors.push_back(std::string(": ") + e.what());
    }
    r.pass = r.errors.empty();
    return r;
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + ": malformed JSON: " + e.what());
    }
}

SchemaReport validate_file(const std::filesystem::path& path) {
    json j;
    try {
        j = read_json(path);
    } catch (const ValidationError& e) {
        return {DocumentKind::graph, false, {e.what()}};
    }
    return validate_document(j, detect_kind(j));
}

SchemaReport validate_file(const std::filesystem::path& path, DocumentKind kind) {
    json j;
    try {
        j = read_json(path);
    } catch (const ValidationError& e) {
        return {kind, false, {e.what()}};
    }
    return validate_document(j, kind);
}

json to_json(const SchemaReport& r) {
    return {{"kind", to_string(r.kind)}, {"pass", r.pass}, {"errors", r.errors}};
}

}  // namespace causeway::io
