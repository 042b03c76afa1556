#pragma once

#include <chrono>
#include <map>
#include <string>

namespace debate::http {

struct Response {
    int status = 0;
    std::string body;
};

/// POST with a JSON body. Connection-level failures throw TransportError.
Response post_json(const std::string& url, const std::string& body, const std::map<std::string, std::string>& headers,
                   std::chrono::milliseconds timeout);

/// GET following redirects, writing the body to `dest`.
void download(const std::string& url, const std::string& dest);

}  // namespace debate::http
