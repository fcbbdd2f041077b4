#pragma once

#include "distaf/api.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <string>

namespace distaf {

namespace detail {

inline ApiRequest to_api_request(const httplib::Request& r) {
    ApiRequest req;
    req.method = r.method;
    req.path = r.path;
    req.body = r.body;
    for (const auto& [k, v] : r.params) req.query[k] = v;
    for (const auto& [k, v] : r.headers) {
        std::string key = k;
        std::transform(key.begin(), key.end(), key.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        req.headers[key] = v;
    }
    return req;
}

} // namespace detail

/// Mounts every route of `api` on an httplib server.
inline void bind_routes(httplib::Server& server, ApiService& api) {
    auto handler = [&api](const httplib::Request& r, httplib::Response& res) {
        auto out = api.handle(detail::to_api_request(r));
        res.status = out.status;
        res.set_content(out.body, out.content_type.c_str());
    };
    server.Get(".*", handler);
    server.Post(".*", handler);
    server.Patch(".*", handler);
    server.Put(".*", handler);
    server.Delete(".*", handler);
}

} // namespace distaf
