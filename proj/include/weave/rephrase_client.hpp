#pragma once

#include <string>

#include "weave/errors.hpp"

namespace weave {

struct RephraseRequest {
    std::string system;
    std::string user;
    double temperature = 0.7;
};

// Wire contract: POST {system, user, temperature} as JSON, receive
// {"revised_prompt": "..."}. Implemented over HTTP for the real service and
// stubbed directly in tests.
class RephrasingClient {
public:
    virtual ~RephrasingClient() = default;
    // Returns the revised prompt text. Transport failure → ClientError,
    // malformed response → ParseError.
    virtual std::string rephrase(const RephraseRequest& req) = 0;
};

class HttpRephrasingClient : public RephrasingClient {
public:
    // endpoint like "http://host:port/rephrase"; api_key may be empty, else
    // sent as a bearer token. Reads FORGE_ENDPOINT / FORGE_API_KEY when the
    // arguments are empty.
    HttpRephrasingClient(std::string endpoint, std::string api_key);
    static HttpRephrasingClient from_env();

    std::string rephrase(const RephraseRequest& req) override;

    const std::string& endpoint() const { return endpoint_; }

private:
    std::string endpoint_;
    std::string api_key_;
    std::string host_;
    int port_ = 80;
    std::string path_;
};

} // namespace weave
