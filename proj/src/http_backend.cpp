// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The utdebug Authors

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <thread>

#include "utdebug/gateway.hpp"

namespace utdebug {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // without trailing slash
};

SplitUrl split_url(const std::string& base) {
  const auto scheme_end = base.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("UTD_API_BASE must include a scheme: " + base);
  const auto path_start = base.find('/', scheme_end + 3);
  SplitUrl u;
  u.origin = base.substr(0, path_start);
  u.path = path_start == std::string::npos ? "" : base.substr(path_start);
  while (!u.path.empty() && u.path.back() == '/') u.path.pop_back();
  return u;
}

}  // namespace

HttpBackendConfig HttpBackendConfig::from_env() {
  auto get = [](const char* n) {
    const char* v = std::getenv(n);
    return std::string(v ? v : "");
  };
  HttpBackendConfig c;
  c.api_base = get("UTD_API_BASE");
  c.api_key = get("UTD_API_KEY");
  c.model = get("UTD_MODEL");
  if (c.api_base.empty()) throw ConfigError("UTD_API_BASE is not set");
  if (c.model.empty()) throw ConfigError("UTD_MODEL is not set (or pass --model)");
  return c;
}

HttpBackend::HttpBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)) {
  split_url(cfg_.api_base);  // validates
}

Json HttpBackend::request_body(const GenRequest& req, const std::string& model, int n) {
  Json body;
  body["model"] = model;
  body["messages"] = Json::array();
  for (const auto& m : req.messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  body["temperature"] = req.temperature;
  body["top_p"] = req.top_p;
  body["n"] = n;
  body["max_tokens"] = req.max_tokens;
  return body;
}

std::vector<std::string> HttpBackend::parse_choices(const std::string& body) {
  std::vector<std::string> out;
  try {
    const auto j = Json::parse(body);
    for (const auto& c : j.at("choices")) {
      const auto& content = c.at("message").at("content");
      out.push_back(content.is_string() ? content.get<std::string>() : std::string());
    }
  } catch (const Json::exception& e) {
    throw GatewayError(std::string("malformed chat-completions response: ") + e.what());
  }
  return out;
}

std::vector<std::string> HttpBackend::complete(const GenRequest& req, int count) {
  const auto url = split_url(cfg_.api_base);
  const std::string model = req.model.empty() ? cfg_.model : req.model;
  httplib::Client client(url.origin);
  client.set_read_timeout(cfg_.timeout_s, 0);
  client.set_write_timeout(60, 0);
  client.set_connection_timeout(30, 0);
  if (!cfg_.api_key.empty()) client.set_bearer_token_auth(cfg_.api_key);

  std::vector<std::string> out;
  std::string last_error;
  int failures = 0;
  while (static_cast<int>(out.size()) < count) {
    const int want = count - static_cast<int>(out.size());
    auto res = client.Post(url.path + "/chat/completions", request_body(req, model, want).dump(), "application/json");
    if (res && res->status == 200) {
      auto got = parse_choices(res->body);
      if (got.empty()) {
        last_error = "empty choices";
      } else {
        for (auto& g : got) {
          if (static_cast<int>(out.size()) < count) out.push_back(std::move(g));
        }
        continue;
      }
    } else if (res) {
      last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 300);
      if (res->status >= 400 && res->status < 500 && res->status != 429) throw GatewayError(last_error);
    } else {
      last_error = "transport error: " + httplib::to_string(res.error());
    }
    if (++failures > cfg_.max_retries) throw GatewayError("giving up after retries: " + last_error);
    std::this_thread::sleep_for(std::chrono::seconds(1 << (failures - 1)));
  }
  return out;
}

}  // namespace utdebug
