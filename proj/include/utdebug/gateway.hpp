// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The utdebug Authors

#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "utdebug/core.hpp"
#include "utdebug/serialize.hpp"

namespace utdebug {

class GatewayError : public Error {
 public:
  using Error::Error;
};

/// A scripted backend ran out of matching completions. Always a test bug.
class ScriptExhausted : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

/// Replay-only gateway asked for something that was never recorded.
class CacheMiss : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

struct Message {
  std::string role;
  std::string content;

  friend bool operator==(const Message&, const Message&) = default;
};

struct GenRequest {
  std::vector<Message> messages;
  double temperature = 0.7;
  double top_p = 0.9;
  int n_samples = 1;
  int max_tokens = 2048;
  /// Replay-key component; distinct tags force distinct samples for the
  /// same prompt.
  std::string seed_tag;
  /// Empty means the gateway's default model.
  std::string model;
};

struct GenResponse {
  std::vector<std::string> completions;
  std::string backend_id;
  bool cached = false;
};

/// Flattened prompt text: role line, content, record separator per message.
std::string render_messages(const std::vector<Message>& messages);

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string id() const = 0;
  /// Returns exactly `count` completions for the request.
  virtual std::vector<std::string> complete(const GenRequest& req, int count) = 0;
};

struct ScriptEntry {
  /// Every substring must occur in the rendered messages.
  std::vector<std::string> match_all;
  /// When non-empty, the request's seed_tag must start with it.
  std::string tag_prefix;
  std::vector<std::string> completions;
  /// Cycle through completions forever instead of exhausting.
  bool repeat = false;
};

/// Deterministic playback. Each request consumes completions from the
/// first matching entry that still has some, moving on to later matching
/// entries when one runs dry.
class ScriptedBackend : public Backend {
 public:
  explicit ScriptedBackend(std::vector<ScriptEntry> entries, std::string id = "scripted");

  /// Fixture file: {"entries": [{"match": [..], "tag": "..", "completions": [..], "repeat": false}]}
  static std::unique_ptr<ScriptedBackend> from_file(const std::filesystem::path& path);
  static std::vector<ScriptEntry> entries_from_json(const Json& j);

  std::string id() const override { return id_; }
  std::vector<std::string> complete(const GenRequest& req, int count) override;

  /// Completions still available (non-repeating entries only).
  std::size_t remaining() const;

 private:
  struct State {
    ScriptEntry entry;
    std::size_t cursor = 0;
  };
  std::vector<State> entries_;
  std::string id_;
  mutable std::mutex mu_;
};

/// Backend driven by a callable; the workhorse of randomized tests.
class FunctionBackend : public Backend {
 public:
  using Fn = std::function<std::vector<std::string>(const GenRequest&, int count)>;
  explicit FunctionBackend(Fn fn, std::string id = "function") : fn_(std::move(fn)), id_(std::move(id)) {}
  std::string id() const override { return id_; }
  std::vector<std::string> complete(const GenRequest& req, int count) override;

 private:
  Fn fn_;
  std::string id_;
  std::mutex mu_;
};

struct HttpBackendConfig {
  std::string api_base;  // e.g. https://api.example.com/v1
  std::string api_key;
  std::string model;
  int max_retries = 3;
  int timeout_s = 300;

  /// Reads UTD_API_BASE, UTD_API_KEY, UTD_MODEL. Throws ConfigError when
  /// the base URL or model is missing.
  static HttpBackendConfig from_env();
};

/// OpenAI-compatible chat-completions client.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig cfg);
  std::string id() const override { return "http:" + cfg_.model; }
  std::vector<std::string> complete(const GenRequest& req, int count) override;

  /// Request body for the chat-completions endpoint.
  static Json request_body(const GenRequest& req, const std::string& model, int n);
  /// Extracts choices[*].message.content.
  static std::vector<std::string> parse_choices(const std::string& body);

 private:
  HttpBackendConfig cfg_;
};

struct GatewayStats {
  long requests = 0;
  long samples = 0;
  long cache_hits = 0;
};

/// Front door for all sampling. Optionally records every sample to a cache
/// directory (one JSON file per key) and serves hits from it.
class Gateway {
 public:
  /// Live or scripted sampling without a cache.
  explicit Gateway(std::shared_ptr<Backend> backend, std::string default_model = {});
  /// Record-through cache around a backend; a null backend makes the
  /// gateway replay-only, where every miss is a CacheMiss.
  Gateway(std::shared_ptr<Backend> backend, std::filesystem::path cache_dir, std::string default_model = {});

  GenResponse generate(GenRequest req);

  /// sha256 hex of the key material for one sample.
  static std::string cache_key(const GenRequest& req, int sample_index);

  GatewayStats stats() const;
  double cache_hit_ratio() const;
  const std::string& default_model() const { return default_model_; }

 private:
  std::optional<std::string> load_cached(const std::string& key) const;
  void store(const std::string& key, const GenRequest& req, int index, const std::string& completion,
             const std::string& backend_id) const;

  std::shared_ptr<Backend> backend_;
  std::optional<std::filesystem::path> cache_dir_;
  std::string default_model_;
  std::atomic<long> requests_{0};
  std::atomic<long> samples_{0};
  std::atomic<long> hits_{0};
};

}  // namespace utdebug
