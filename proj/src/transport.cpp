#include <httplib.h>

#include "psv/transport.hpp"

namespace psv {

HttpTransport::HttpTransport(std::string base_url, std::chrono::seconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

HttpResponse HttpTransport::post(const HttpRequest& request) {
  // httplib::Client takes scheme://host:port only; a base path such as /v1 goes on each request.
  std::string host = base_url_;
  std::string prefix;
  if (auto scheme = host.find("://"); scheme != std::string::npos) {
    if (auto slash = host.find('/', scheme + 3); slash != std::string::npos) {
      prefix = host.substr(slash);
      host = host.substr(0, slash);
    }
  }
  httplib::Client client(host);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  httplib::Headers headers;
  std::string content_type = "application/json";
  for (const auto& [k, v] : request.headers) {
    if (k == "Content-Type") {
      content_type = v;
    } else {
      headers.emplace(k, v);
    }
  }
  auto res = client.Post(prefix + request.path, headers, request.body, content_type);
  HttpResponse out;
  if (!res) {
    out.error = httplib::to_string(res.error());
    return out;
  }
  out.status = res->status;
  out.body = res->body;
  return out;
}

}  // namespace psv
