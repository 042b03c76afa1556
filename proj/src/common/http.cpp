#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "debate/http.hpp"

#include <httplib.h>

#include <regex>

#include "debate/errors.hpp"
#include "debate/util.hpp"

namespace debate::http {
namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, re)) throw TransportError("malformed URL: " + url);
    return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

}  // namespace

Response post_json(const std::string& url, const std::string& body, const std::map<std::string, std::string>& headers,
                   std::chrono::milliseconds timeout) {
    auto parts = split_url(url);
    httplib::Client cli(parts.origin);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout).count();
    cli.set_connection_timeout(10, 0);
    cli.set_read_timeout(static_cast<time_t>(secs), 0);
    cli.set_write_timeout(static_cast<time_t>(secs), 0);
    httplib::Headers hs;
    for (const auto& [k, v] : headers) hs.emplace(k, v);
    auto res = cli.Post(parts.path, hs, body, "application/json");
    if (!res) throw TransportError("HTTP request to " + url + " failed: " + httplib::to_string(res.error()));
    return {res->status, res->body};
}

void download(const std::string& url, const std::string& dest) {
    auto parts = split_url(url);
    httplib::Client cli(parts.origin);
    cli.set_follow_location(true);
    cli.set_read_timeout(300, 0);
    auto res = cli.Get(parts.path);
    if (!res) throw TransportError("download of " + url + " failed: " + httplib::to_string(res.error()));
    if (res->status != 200) throw TransportError("download of " + url + " returned HTTP " + std::to_string(res->status));
    write_file(dest, res->body);
}

}  // namespace debate::http
