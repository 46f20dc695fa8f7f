#include "comicscript/llm.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <future>
#include <thread>

#include "comicscript/digest.hpp"
#include "comicscript/errors.hpp"

#include "httplib.h"

namespace comicscript {

using nlohmann::json;

const char* to_string(ChatRole role) {
  switch (role) {
    case ChatRole::System:
      return "system";
    case ChatRole::User:
      return "user";
    case ChatRole::Assistant:
      return "assistant";
  }
  return "user";
}

json message_to_json(const ChatMessage& message) {
  json j;
  j["role"] = to_string(message.role);
  if (!message.image) {
    j["content"] = message.content;
  } else {
    json parts = json::array();
    parts.push_back({{"type", "text"}, {"text", message.content}});
    std::string url = "data:" + message.image->media_type + ";base64," +
                      base64_encode(message.image->bytes);
    parts.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
    j["content"] = std::move(parts);
  }
  return j;
}

Cassette Cassette::open(const std::string& path) {
  Cassette c;
  c.path_ = path;
  std::ifstream in(path);
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json entry;
    try {
      entry = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("cassette " + path + ": invalid JSON: " + e.what(), lineno);
    }
    if (!entry.contains("digest") || !entry.contains("response"))
      throw ParseError("cassette " + path + ": entry needs digest and response", lineno);
    c.responses_[entry["digest"].get<std::string>()] = entry["response"];
  }
  return c;
}

std::optional<json> Cassette::lookup(const std::string& digest) const {
  std::lock_guard lock(mu_);
  auto it = responses_.find(digest);
  if (it == responses_.end()) return std::nullopt;
  return it->second;
}

void Cassette::record(const std::string& digest, const json& request, const json& response) {
  std::lock_guard lock(mu_);
  if (responses_.count(digest)) return;
  responses_[digest] = response;
  std::ofstream out(path_, std::ios::app);
  if (!out) throw ProviderError("cannot append to cassette " + path_);
  json entry{{"digest", digest}, {"request", request}, {"response", response}};
  out << entry.dump() << "\n";
}

size_t Cassette::size() const {
  std::lock_guard lock(mu_);
  return responses_.size();
}

namespace {

Transport http_transport(const LlmConfig& config) {
  return [config](const WireRequest& request) -> json {
    httplib::Client client(config.endpoint);
    client.set_connection_timeout(30);
    client.set_read_timeout(120);
    httplib::Headers headers;
    if (!config.api_key_env.empty()) {
      const char* key = std::getenv(config.api_key_env.c_str());
      if (!key || !*key)
        throw ProviderError("environment variable " + config.api_key_env +
                            " is not set; cannot authenticate live requests");
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    auto res = client.Post(request.path, headers, request.body.dump(), "application/json");
    if (!res)
      throw ProviderError("request to " + config.endpoint + request.path + " failed: " +
                          httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
      throw ProviderError("endpoint returned HTTP " + std::to_string(res->status) + ": " +
                          res->body.substr(0, 300));
    try {
      return json::parse(res->body);
    } catch (const json::parse_error&) {
      throw ProviderError("endpoint returned unparsable JSON body");
    }
  };
}

std::string first_words(const std::string& text, size_t limit = 60) {
  if (text.size() <= limit) return text;
  return text.substr(0, limit) + "...";
}

}  // namespace

ChatClient::ChatClient(LlmConfig config, CassetteMode mode, Cassette* cassette,
                       Transport transport)
    : config_(std::move(config)), mode_(mode), cassette_(cassette),
      transport_(std::move(transport)) {
  if (!transport_) transport_ = http_transport(config_);
  if (mode_ != CassetteMode::Passthrough && !cassette_)
    throw ValidationError("record/replay mode needs a cassette");
}

json ChatClient::transport_with_retries(const WireRequest& request,
                                        const std::string& summary) {
  int attempts = config_.max_retries + 1;
  std::string last_error;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    try {
      network_calls_.fetch_add(1);
      return transport_(request);
    } catch (const ProviderError& e) {
      last_error = e.what();
      if (attempt < attempts && config_.retry_backoff_ms > 0)
        std::this_thread::sleep_for(
            std::chrono::milliseconds(config_.retry_backoff_ms * attempt));
    }
  }
  throw ProviderError("giving up after " + std::to_string(attempts) + " attempts (" +
                      summary + "): " + last_error);
}

json ChatClient::exchange(const WireRequest& request, const json& digest_payload,
                          const std::string& summary) {
  std::string digest = request_digest(digest_payload);
  if (mode_ != CassetteMode::Passthrough) {
    if (auto hit = cassette_->lookup(digest)) return *hit;
    if (mode_ == CassetteMode::Replay) throw CassetteMissError(digest, summary);
  }
  json response = transport_with_retries(request, summary);
  if (mode_ == CassetteMode::Record) cassette_->record(digest, request.body, response);
  return response;
}

ChatMessage ChatClient::chat(const std::vector<ChatMessage>& messages,
                             const std::string& model_id, const SamplingParams& params) {
  json wire_messages = json::array();
  for (const auto& m : messages) wire_messages.push_back(message_to_json(m));

  WireRequest request;
  request.path = "/v1/chat/completions";
  request.body = {{"model", model_id},
                  {"messages", wire_messages},
                  {"temperature", params.temperature}};
  if (params.seed) request.body["seed"] = *params.seed;

  json digest_payload = {{"endpoint", request.path},
                         {"model", model_id},
                         {"messages", wire_messages},
                         {"params", {{"temperature", params.temperature}}}};
  if (params.seed) digest_payload["params"]["seed"] = *params.seed;

  std::string summary = model_id + ", " + std::to_string(messages.size()) + " messages";
  if (!messages.empty()) summary += ", last: \"" + first_words(messages.back().content) + "\"";

  json response = exchange(request, digest_payload, summary);
  try {
    return ChatMessage::assistant(
        response.at("choices").at(0).at("message").at("content").get<std::string>());
  } catch (const json::exception&) {
    throw ProviderError("malformed chat response (" + summary + "): " +
                        first_words(response.dump(), 200));
  }
}

std::vector<ChatMessage> ChatClient::run_chain(const std::vector<ChatMessage>& user_turns,
                                               const std::string& model_id,
                                               const SamplingParams& params) {
  std::vector<ChatMessage> conversation;
  if (!config_.system_prompt.empty())
    conversation.push_back(ChatMessage::system(config_.system_prompt));

  std::vector<ChatMessage> replies;
  for (size_t i = 0; i < user_turns.size(); ++i) {
    conversation.push_back(user_turns[i]);
    try {
      ChatMessage reply = chat(conversation, model_id, params);
      conversation.push_back(reply);
      replies.push_back(std::move(reply));
    } catch (const CassetteMissError& e) {
      throw CassetteMissError(e.digest(), "chain turn " + std::to_string(i + 1) + " of " +
                                              std::to_string(user_turns.size()));
    } catch (const ProviderError& e) {
      throw ProviderError("chain turn " + std::to_string(i + 1) + " of " +
                          std::to_string(user_turns.size()) + ": " + e.what());
    }
  }
  return replies;
}

std::vector<float> ChatClient::embed_one(const json& input, const std::string& summary) {
  WireRequest request;
  request.path = "/v1/embeddings";
  request.body = {{"model", config_.embed_model}, {"input", json::array({input})}};

  json digest_payload = {{"endpoint", request.path},
                         {"model", config_.embed_model},
                         {"input", json::array({input})}};

  json response = exchange(request, digest_payload, summary);
  try {
    return response.at("data").at(0).at("embedding").get<std::vector<float>>();
  } catch (const json::exception&) {
    throw ProviderError("malformed embedding response (" + summary + ")");
  }
}

namespace {

// Runs fn(i) for every index with bounded concurrency, preserving order.
template <typename Fn>
void for_each_bounded(size_t count, int max_in_flight, Fn&& fn) {
  if (max_in_flight < 1) max_in_flight = 1;
  size_t next = 0;
  while (next < count) {
    size_t wave = std::min(count - next, static_cast<size_t>(max_in_flight));
    std::vector<std::future<void>> futures;
    futures.reserve(wave);
    for (size_t k = 0; k < wave; ++k)
      futures.push_back(std::async(std::launch::async, fn, next + k));
    next += wave;
    for (auto& f : futures) f.get();  // rethrows the first failure
  }
}

}  // namespace

std::vector<std::vector<float>> ChatClient::embed_images(
    const std::vector<std::vector<std::uint8_t>>& pngs) {
  std::vector<std::vector<float>> out(pngs.size());
  for_each_bounded(pngs.size(), config_.max_in_flight, [&](size_t i) {
    std::string url = "data:image/png;base64," + base64_encode(pngs[i]);
    out[i] = embed_one(json(url), "image " + std::to_string(i + 1) + " of " +
                                      std::to_string(pngs.size()));
  });
  size_t dim = 0;
  for (const auto& v : out) {
    if (dim == 0) dim = v.size();
    if (v.size() != dim)
      throw ProviderError("embedding dimensions disagree across inputs");
  }
  return out;
}

std::vector<std::vector<float>> ChatClient::embed_texts(const std::vector<std::string>& texts) {
  std::vector<std::vector<float>> out(texts.size());
  for_each_bounded(texts.size(), config_.max_in_flight, [&](size_t i) {
    out[i] = embed_one(json(texts[i]), "text " + std::to_string(i + 1) + " of " +
                                           std::to_string(texts.size()));
  });
  size_t dim = 0;
  for (const auto& v : out) {
    if (dim == 0) dim = v.size();
    if (v.size() != dim)
      throw ProviderError("embedding dimensions disagree across inputs");
  }
  return out;
}

}  // namespace comicscript
