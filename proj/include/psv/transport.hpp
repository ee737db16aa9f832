#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace psv {

struct HttpRequest {
  std::string path;  // appended to the transport's base URL
  std::string body;
  std::vector<std::pair<std::string, std::string>> headers;
};

struct HttpResponse {
  int status = 0;  // 0 means the request never got a response
  std::string body;
  std::string error;  // network-level failure description when status == 0
};

// Minimal POST-only transport so clients can be driven by a mock in tests.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

// cpp-httplib backed transport; base_url like "https://api.example.com" or "http://127.0.0.1:8080".
class HttpTransport : public Transport {
 public:
  explicit HttpTransport(std::string base_url,
                         std::chrono::seconds timeout = std::chrono::seconds(120));
  HttpResponse post(const HttpRequest& request) override;

 private:
  std::string base_url_;
  std::chrono::seconds timeout_;
};

}  // namespace psv
