#include "weave/rephrase_client.hpp"

#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

namespace weave {

namespace {

// "http://host:port/path" -> (host, port, path)
void split_endpoint(const std::string& endpoint, std::string& host, int& port,
                    std::string& path) {
    std::string rest = endpoint;
    const std::string scheme = "http://";
    if (rest.rfind(scheme, 0) == 0) {
        rest = rest.substr(scheme.size());
    } else if (rest.rfind("https://", 0) == 0) {
        throw ConfigError(
            "rephrase client: https endpoints are not supported, use http");
    }
    const std::size_t slash = rest.find('/');
    std::string hostport = rest.substr(0, slash);
    path = slash == std::string::npos ? "/" : rest.substr(slash);
    const std::size_t colon = hostport.find(':');
    port = 80;
    if (colon != std::string::npos) {
        host = hostport.substr(0, colon);
        port = std::atoi(hostport.c_str() + colon + 1);
        if (port <= 0) {
            throw ConfigError("rephrase client: bad port in endpoint " +
                              endpoint);
        }
    } else {
        host = hostport;
    }
    if (host.empty()) {
        throw ConfigError("rephrase client: empty host in endpoint " +
                          endpoint);
    }
}

} // namespace

HttpRephrasingClient::HttpRephrasingClient(std::string endpoint,
                                           std::string api_key)
    : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)) {
    if (endpoint_.empty()) {
        throw ConfigError(
            "rephrase client: no endpoint (set FORGE_ENDPOINT or pass one)");
    }
    split_endpoint(endpoint_, host_, port_, path_);
}

HttpRephrasingClient HttpRephrasingClient::from_env() {
    const char* ep = std::getenv("FORGE_ENDPOINT");
    const char* key = std::getenv("FORGE_API_KEY");
    return HttpRephrasingClient(ep ? ep : "", key ? key : "");
}

std::string HttpRephrasingClient::rephrase(const RephraseRequest& req) {
    httplib::Client cli(host_, port_);
    cli.set_connection_timeout(5, 0);
    cli.set_read_timeout(30, 0);
    httplib::Headers headers;
    if (!api_key_.empty()) {
        headers.emplace("Authorization", "Bearer " + api_key_);
    }
    const nlohmann::json body{{"system", req.system},
                              {"user", req.user},
                              {"temperature", req.temperature}};
    auto res = cli.Post(path_, headers, body.dump(), "application/json");
    if (!res) {
        throw ClientError("rephrase client: transport failure talking to " +
                          endpoint_ + " (" + httplib::to_string(res.error()) +
                          ")");
    }
    if (res->status != 200) {
        throw ClientError("rephrase client: HTTP " +
                          std::to_string(res->status) + " from " + endpoint_);
    }
    const auto parsed =
        nlohmann::json::parse(res->body, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded() || !parsed.is_object() ||
        !parsed.contains("revised_prompt") ||
        !parsed["revised_prompt"].is_string()) {
        throw ParseError(
            "rephrase client: response is not {\"revised_prompt\": ...}");
    }
    return parsed["revised_prompt"].get<std::string>();
}

} // namespace weave
