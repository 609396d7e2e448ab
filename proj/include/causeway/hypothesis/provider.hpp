#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "causeway/hypothesis/worldview.hpp"

namespace causeway::hypothesis {

/// A provider could not be reached or answered with an error status.
class ProviderError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Source of worldviews: parses hypotheses, integrates them into a decision
/// worldview, and revises one against counterfactual evidence.
class Provider {
public:
    virtual ~Provider() = default;
    virtual std::string name() const = 0;
    virtual std::vector<Worldview> parse(const std::string& query, const std::vector<std::string>& texts) = 0;
    virtual Worldview integrate(const std::vector<Worldview>& worldviews) = 0;
    virtual Worldview revise(const Worldview& w, const intervene::EdgeAdjudication& evidence) = 0;
};

/// Worldviews authored as JSON files. Each file holds one worldview, an
/// array of them, or {"worldviews": [...]}. Integration uses the rule judge.
class FileProvider : public Provider {
public:
    explicit FileProvider(std::vector<std::string> paths, int shortlist = kDefaultShortlist);
    std::string name() const override { return "file"; }
    std::vector<Worldview> parse(const std::string& query, const std::vector<std::string>& texts) override;
    Worldview integrate(const std::vector<Worldview>& worldviews) override;
    Worldview revise(const Worldview& w, const intervene::EdgeAdjudication& evidence) override;

private:
    std::vector<std::string> paths_;
    int shortlist_;
};

/// Worldviews parsed from a JSON document (same shapes as the files).
std::vector<Worldview> worldviews_from_json(const nlohmann::json& j, const std::string& origin = "");

struct RemoteConfig {
    /// http://host[:port][/path]
    std::string url;
    std::string token;
    double timeout_seconds = 60.0;
    /// Directory with <task>.txt prompt templates sent as opaque strings.
    std::string prompt_dir;

    /// CAUSEWAY_PROVIDER_URL, CAUSEWAY_PROVIDER_TOKEN,
    /// CAUSEWAY_PROVIDER_TIMEOUT and CAUSEWAY_PROMPT_DIR. Empty when no URL
    /// is set.
    static std::optional<RemoteConfig> from_env();
};

/// JSON over HTTP. Each call POSTs {"task", "prompt", "payload"} and expects
/// {"worldviews": [...]} for parse and {"worldview": {...}} otherwise.
/// Responses are validated like authored files.
class RemoteProvider : public Provider {
public:
    explicit RemoteProvider(RemoteConfig config);
    std::string name() const override { return "remote"; }
    std::vector<Worldview> parse(const std::string& query, const std::vector<std::string>& texts) override;
    Worldview integrate(const std::vector<Worldview>& worldviews) override;
    Worldview revise(const Worldview& w, const intervene::EdgeAdjudication& evidence) override;

private:
    nlohmann::json call(const std::string& task, nlohmann::json payload) const;
    RemoteConfig config_;
    std::string origin_;
    std::string path_;
};

/// File provider when worldview files are given, else the remote provider
/// when configured in the environment. Throws ValidationError naming the
/// missing provider otherwise.
std::unique_ptr<Provider> make_provider(const std::vector<std::string>& worldview_files);

}  // namespace causeway::hypothesis
