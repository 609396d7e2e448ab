#include "causeway/hypothesis/provider.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <httplib.h>

#include "causeway/common.hpp"

namespace causeway::hypothesis {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::vector<Worldview> worldviews_from_json(const json& j, const std::string& origin) {
    std::vector<Worldview> out;
    auto one = [&](const json& w, const std::string& path) {
        try {
            out.push_back(worldview_from_json(w));
        } catch (const ValidationError& e) {
            throw ValidationError(origin + path + e.what());
        }
    };
    if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) one(j[i], "/" + std::to_string(i));
    } else if (j.is_object() && j.contains("worldviews")) {
        if (!j["worldviews"].is_array()) throw ValidationError(origin + "/worldviews: expected array");
        for (std::size_t i = 0; i < j["worldviews"].size(); ++i) one(j["worldviews"][i], "/worldviews/" + std::to_string(i));
    } else {
        one(j, "");
    }
    return out;
}

FileProvider::FileProvider(std::vector<std::string> paths, int shortlist)
    : paths_(std::move(paths)), shortlist_(shortlist) {
    if (paths_.empty()) throw ValidationError("file provider: no worldview files");
}

std::vector<Worldview> FileProvider::parse(const std::string&, const std::vector<std::string>&) {
    std::vector<Worldview> out;
    for (const auto& path : paths_) {
        json j;
        try {
            j = json::parse(read_file(path));
        } catch (const json::parse_error& e) {
            throw ValidationError(path + ": malformed JSON: " + e.what());
        }
        for (auto& w : worldviews_from_json(j, path + ":")) out.push_back(std::move(w));
    }
    return out;
}

Worldview FileProvider::integrate(const std::vector<Worldview>& worldviews) {
    return select_worldview(worldviews, RuleJudge(), shortlist_);
}

Worldview FileProvider::revise(const Worldview& w, const intervene::EdgeAdjudication& evidence) {
    return apply_contradiction(w, evidence);
}

std::optional<RemoteConfig> RemoteConfig::from_env() {
    const char* url = std::getenv("CAUSEWAY_PROVIDER_URL");
    if (!url || !*url) return std::nullopt;
    RemoteConfig c;
    c.url = url;
    if (const char* token = std::getenv("CAUSEWAY_PROVIDER_TOKEN")) c.token = token;
    if (const char* t = std::getenv("CAUSEWAY_PROVIDER_TIMEOUT")) {
        char* end = nullptr;
        const double v = std::strtod(t, &end);
        if (end == t || !(v > 0.0)) throw ValidationError("CAUSEWAY_PROVIDER_TIMEOUT must be a positive number");
        c.timeout_seconds = v;
    }
    if (const char* dir = std::getenv("CAUSEWAY_PROMPT_DIR")) c.prompt_dir = dir;
    return c;
}

RemoteProvider::RemoteProvider(RemoteConfig config) : config_(std::move(config)) {
    const std::string scheme = "http://";
    if (config_.url.rfind(scheme, 0) != 0)
        throw ValidationError("remote provider: only http:// endpoints are supported, got '" + config_.url + "'");
    const auto slash = config_.url.find('/', scheme.size());
    origin_ = config_.url.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : config_.url.substr(slash);
    if (origin_.size() == scheme.size()) throw ValidationError("remote provider: missing host in '" + config_.url + "'");
}

json RemoteProvider::call(const std::string& task, json payload) const {
    std::string prompt;
    if (!config_.prompt_dir.empty()) {
        const auto file = std::filesystem::path(config_.prompt_dir) / (task + ".txt");
        if (std::filesystem::exists(file)) prompt = read_file(file.string());
    }
    httplib::Client client(origin_);
    const auto secs = static_cast<time_t>(config_.timeout_seconds);
    const auto usecs = static_cast<time_t>((config_.timeout_seconds - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (!config_.token.empty()) headers.emplace("Authorization", "Bearer " + config_.token);
    const json body = {{"task", task}, {"prompt", prompt}, {"payload", std::move(payload)}};
    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res) throw ProviderError("remote provider: request failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw ProviderError("remote provider: HTTP " + std::to_string(res->status) + " for task '" + task + "'");
    try {
        return json::parse(res->body);
    } catch (const json::parse_error& e) {
        throw ValidationError("remote provider: malformed JSON response for task '" + task + "': " + e.what());
    }
}

std::vector<Worldview> RemoteProvider::parse(const std::string& query, const std::vector<std::string>& texts) {
    const auto r = call("parse", {{"query", query}, {"texts", texts}});
    if (!r.is_object() || !r.contains("worldviews"))
        throw ValidationError("remote provider: parse response needs /worldviews");
    return worldviews_from_json(r, "remote:");
}

Worldview RemoteProvider::integrate(const std::vector<Worldview>& worldviews) {
    json list = json::array();
    for (const auto& w : worldviews) list.push_back(to_json(w));
    const auto r = call("integrate", {{"worldviews", list}});
    if (!r.is_object() || !r.contains("worldview"))
        throw ValidationError("remote provider: integrate response needs /worldview");
    return worldviews_from_json(r["worldview"], "remote:/worldview").front();
}

Worldview RemoteProvider::revise(const Worldview& w, const intervene::EdgeAdjudication& evidence) {
    const auto r = call("revise", {{"worldview", to_json(w)}, {"evidence", intervene::to_json(evidence)}});
    if (!r.is_object() || !r.contains("worldview"))
        throw ValidationError("remote provider: revise response needs /worldview");
    return worldviews_from_json(r["worldview"], "remote:/worldview").front();
}

std::unique_ptr<Provider> make_provider(const std::vector<std::string>& worldview_files) {
    if (!worldview_files.empty()) return std::make_unique<FileProvider>(worldview_files);
    if (auto remote = RemoteConfig::from_env()) return std::make_unique<RemoteProvider>(*remote);
    throw ValidationError(
        "no hypothesis provider: pass a worldview file or set CAUSEWAY_PROVIDER_URL for the remote provider");
}

}  // namespace causeway::hypothesis
