#include <cstdlib>
#include <string>

#include "httplib.h"
#include "moca/oracle.h"

namespace moca {
namespace {

struct SplitUrl {
    std::string base;  // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string & url) {
    size_t scheme = url.find("://");
    size_t slash  = scheme == std::string::npos ? url.find('/') : url.find('/', scheme + 3);
    if (slash == std::string::npos) {
        return { url, "/v1/chat/completions" };
    }
    return { url.substr(0, slash), url.substr(slash) };
}

}  // namespace

Transport::Response HttpTransport::post(const ClientConfig & config, const std::string & json_body) {
    calls_.fetch_add(1);

    SplitUrl        url = split_url(config.endpoint_url);
    httplib::Client client(url.base);
    client.set_connection_timeout(0, config.timeout_ms * 1000LL);
    client.set_read_timeout(config.timeout_ms / 1000, (config.timeout_ms % 1000) * 1000);
    client.set_write_timeout(config.timeout_ms / 1000, (config.timeout_ms % 1000) * 1000);

    httplib::Headers headers;
    if (!config.auth_token_env.empty()) {
        if (const char * token = std::getenv(config.auth_token_env.c_str())) {
            headers.emplace("Authorization", std::string("Bearer ") + token);
        }
    }

    auto result = client.Post(url.path, headers, json_body, "application/json");
    if (!result) {
        return { 0, "", httplib::to_string(result.error()) };
    }
    return { result->status, result->body, "" };
}

}  // namespace moca
