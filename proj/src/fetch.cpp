#include "stochlab/fetch.hpp"

#include <httplib.h>

#include "stochlab/errors.hpp"

namespace stochlab {

namespace {

struct UrlParts {
    std::string base; // scheme://host[:port]
    std::string path; // /path?query
};

UrlParts split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw InvalidInput("fetch: URL must start with http:// or https://");
    }
    const std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw InvalidInput("fetch: unsupported scheme '" + scheme + "'");
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

} // namespace

std::string http_get(const std::string& url) {
    const UrlParts parts = split_url(url);
    httplib::Client client(parts.base);
    client.set_follow_location(true);
    client.set_connection_timeout(10);
    client.set_read_timeout(30);

    const auto res = client.Get(parts.path);
    if (!res) {
        throw InvalidInput("fetch: request to " + url + " failed (" +
                           httplib::to_string(res.error()) + ")");
    }
    if (res->status != 200) {
        throw InvalidInput("fetch: " + url + " returned HTTP " + std::to_string(res->status));
    }
    return res->body;
}

} // namespace stochlab
