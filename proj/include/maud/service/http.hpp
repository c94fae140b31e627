#pragma once

#include <cstdlib>
#include <string>

#include <httplib.h>

#include "maud/error.hpp"
#include "maud/service/api.hpp"

namespace maud::service {

struct ListenAddress {
  std::string host = "127.0.0.1";
  int port = 8080;
};

/// "host:port", ":port" or "port".
inline ListenAddress parse_listen_address(const std::string& s) {
  ListenAddress a;
  auto colon = s.rfind(':');
  std::string port = colon == std::string::npos ? s : s.substr(colon + 1);
  if (colon != std::string::npos && colon > 0) a.host = s.substr(0, colon);
  try {
    std::size_t used = 0;
    a.port = std::stoi(port, &used);
    if (used != port.size() || a.port < 0 || a.port > 65535) throw std::invalid_argument(port);
  } catch (const std::exception&) {
    throw Error(Errc::usage, "invalid listen address '" + s + "'", "addr");
  }
  return a;
}

/// Routes every request through Api. The browser client is served from
/// another origin, so responses carry permissive CORS headers.
inline void install_routes(httplib::Server& server, Api& api) {
  auto forward = [&api](const httplib::Request& req, httplib::Response& res) {
    auto out = api.handle({req.method, req.path, req.body});
    res.status = out.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    if (!out.body.empty()) res.set_content(out.body, out.content_type);
  };
  server.Get(".*", forward);
  server.Post(".*", forward);
  server.Options(".*", forward);
}

}  // namespace maud::service
