// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The utdebug Authors

#include "utdebug/gateway.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <thread>

#include <openssl/sha.h>

namespace utdebug {

namespace {

std::string rstrip(std::string s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\n' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
  return s;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), digest);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * SHA256_DIGEST_LENGTH);
  for (unsigned char b : digest) {
    out.push_back(hex[b >> 4]);
    out.push_back(hex[b & 0xf]);
  }
  return out;
}

bool entry_matches(const ScriptEntry& e, const std::string& prompt, const std::string& tag) {
  if (!e.tag_prefix.empty() && tag.rfind(e.tag_prefix, 0) != 0) return false;
  for (const auto& m : e.match_all) {
    if (prompt.find(m) == std::string::npos) return false;
  }
  return true;
}

}  // namespace

std::string render_messages(const std::vector<Message>& messages) {
  std::string out;
  for (const auto& m : messages) {
    out += m.role;
    out += '\n';
    out += m.content;
    out += '\x1e';
  }
  return out;
}

// ---------------------------------------------------------------- scripted

ScriptedBackend::ScriptedBackend(std::vector<ScriptEntry> entries, std::string id) : id_(std::move(id)) {
  entries_.reserve(entries.size());
  for (auto& e : entries) entries_.push_back({std::move(e), 0});
}

std::vector<ScriptEntry> ScriptedBackend::entries_from_json(const Json& j) {
  std::vector<ScriptEntry> out;
  for (const auto& e : j.at("entries")) {
    ScriptEntry entry;
    if (e.contains("match")) {
      if (e["match"].is_string()) entry.match_all.push_back(e["match"].get<std::string>());
      else entry.match_all = e["match"].get<std::vector<std::string>>();
    }
    entry.tag_prefix = e.value("tag", "");
    entry.completions = e.at("completions").get<std::vector<std::string>>();
    entry.repeat = e.value("repeat", false);
    if (entry.completions.empty()) throw ConfigError("script entry without completions");
    out.push_back(std::move(entry));
  }
  return out;
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
    return std::make_unique<ScriptedBackend>(entries_from_json(j), "scripted:" + path.filename().string());
  } catch (const Json::exception& e) {
    throw ConfigError("bad script fixture " + path.string() + ": " + e.what());
  }
}

std::vector<std::string> ScriptedBackend::complete(const GenRequest& req, int count) {
  const auto prompt = render_messages(req.messages);
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (auto& st : entries_) {
    if (static_cast<int>(out.size()) == count) break;
    if (!entry_matches(st.entry, prompt, req.seed_tag)) continue;
    const auto& c = st.entry.completions;
    while (static_cast<int>(out.size()) < count) {
      if (st.cursor >= c.size()) {
        if (!st.entry.repeat) break;
        st.cursor = 0;
      }
      out.push_back(c[st.cursor++]);
    }
  }
  if (static_cast<int>(out.size()) < count) {
    throw ScriptExhausted("script exhausted for seed_tag '" + req.seed_tag + "' (wanted " +
                          std::to_string(count) + ", had " + std::to_string(out.size()) + ")");
  }
  return out;
}

std::size_t ScriptedBackend::remaining() const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (const auto& st : entries_) {
    if (!st.entry.repeat) n += st.entry.completions.size() - st.cursor;
  }
  return n;
}

std::vector<std::string> FunctionBackend::complete(const GenRequest& req, int count) {
  std::lock_guard lock(mu_);
  auto out = fn_(req, count);
  if (static_cast<int>(out.size()) != count) throw GatewayError("function backend returned wrong sample count");
  return out;
}

// ---------------------------------------------------------------- gateway

Gateway::Gateway(std::shared_ptr<Backend> backend, std::string default_model)
    : backend_(std::move(backend)), default_model_(std::move(default_model)) {
  if (!backend_) throw ConfigError("gateway needs a backend or a cache directory");
}

Gateway::Gateway(std::shared_ptr<Backend> backend, std::filesystem::path cache_dir, std::string default_model)
    : backend_(std::move(backend)), cache_dir_(std::move(cache_dir)), default_model_(std::move(default_model)) {
  if (!backend_ && !std::filesystem::is_directory(*cache_dir_)) {
    throw ConfigError("replay directory does not exist: " + cache_dir_->string());
  }
  if (backend_) std::filesystem::create_directories(*cache_dir_);
}

std::string Gateway::cache_key(const GenRequest& req, int sample_index) {
  Json material;
  material["messages"] = Json::array();
  for (const auto& m : req.messages) material["messages"].push_back({{"role", m.role}, {"content", m.content}});
  material["temperature"] = req.temperature;
  material["top_p"] = req.top_p;
  material["sample_index"] = sample_index;
  material["seed_tag"] = req.seed_tag;
  material["model"] = req.model;
  return sha256_hex(material.dump());
}

std::optional<std::string> Gateway::load_cached(const std::string& key) const {
  const auto path = *cache_dir_ / (key + ".json");
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    const auto j = Json::parse(read_file(path));
    return j.at("completion").get<std::string>();
  } catch (const Json::exception& e) {
    throw GatewayError("corrupt cache entry " + path.string() + ": " + e.what());
  }
}

void Gateway::store(const std::string& key, const GenRequest& req, int index, const std::string& completion,
                    const std::string& backend_id) const {
  Json j;
  j["key"] = key;
  j["seed_tag"] = req.seed_tag;
  j["sample_index"] = index;
  j["model"] = req.model;
  j["temperature"] = req.temperature;
  j["top_p"] = req.top_p;
  j["backend_id"] = backend_id;
  j["completion"] = completion;
  write_file_atomic(*cache_dir_ / (key + ".json"), j.dump(2) + "\n");
}

GenResponse Gateway::generate(GenRequest req) {
  if (req.n_samples < 1) throw ConfigError("n_samples must be >= 1");
  if (req.temperature < 0) throw ConfigError("temperature must be >= 0");
  if (req.model.empty()) req.model = default_model_;
  requests_.fetch_add(1);
  samples_.fetch_add(req.n_samples);

  GenResponse resp;
  resp.backend_id = backend_ ? backend_->id() : "replay";
  std::vector<std::optional<std::string>> slots(static_cast<std::size_t>(req.n_samples));
  std::vector<std::string> keys;
  int missing = req.n_samples;
  if (cache_dir_) {
    missing = 0;
    for (int i = 0; i < req.n_samples; ++i) {
      keys.push_back(cache_key(req, i));
      slots[i] = load_cached(keys.back());
      if (slots[i]) hits_.fetch_add(1);
      else ++missing;
    }
  }
  if (missing > 0) {
    if (!backend_) throw CacheMiss("no recorded completion for seed_tag '" + req.seed_tag + "'");
    auto fresh = backend_->complete(req, missing);
    std::size_t next = 0;
    for (int i = 0; i < req.n_samples; ++i) {
      if (slots[i]) continue;
      slots[i] = rstrip(std::move(fresh.at(next++)));
      if (cache_dir_) store(keys[i], req, i, *slots[i], backend_->id());
    }
  }
  resp.cached = missing == 0;
  for (auto& s : slots) resp.completions.push_back(rstrip(std::move(*s)));
  return resp;
}

GatewayStats Gateway::stats() const { return {requests_.load(), samples_.load(), hits_.load()}; }

double Gateway::cache_hit_ratio() const {
  const long s = samples_.load();
  return s == 0 ? 0.0 : static_cast<double>(hits_.load()) / static_cast<double>(s);
}

}  // namespace utdebug
