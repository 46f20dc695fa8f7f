#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace comicscript {

enum class ChatRole { System, User, Assistant };

const char* to_string(ChatRole role);

struct ImageRef {
  std::string media_type = "image/png";
  std::vector<std::uint8_t> bytes;
};

struct ChatMessage {
  ChatRole role = ChatRole::User;
  std::string content;
  std::optional<ImageRef> image;

  static ChatMessage system(std::string text) { return {ChatRole::System, std::move(text), {}}; }
  static ChatMessage user(std::string text) { return {ChatRole::User, std::move(text), {}}; }
  static ChatMessage assistant(std::string text) {
    return {ChatRole::Assistant, std::move(text), {}};
  }
};

struct SamplingParams {
  double temperature = 0.0;
  std::optional<long> seed;
};

struct LlmConfig {
  std::string endpoint = "http://localhost:8080";
  std::string model = "gpt-4o";
  std::string vision_model = "gpt-4o";
  std::string embed_model = "clip-vit-l-14";
  std::string api_key_env = "COMICSCRIPT_API_KEY";
  std::string system_prompt;  // omitted from requests when empty
  int max_retries = 2;        // extra attempts after the first failure
  int retry_backoff_ms = 200;
  int max_in_flight = 4;
};

enum class CassetteMode { Record, Replay, Passthrough };

// Append-only JSONL store of {digest, request, response} entries. The
// digest keys a canonical serialization of everything that shapes the
// response (endpoint path, model id, ordered messages, sampling params),
// so replays are exact and repeated identical requests hit one entry.
class Cassette {
 public:
  Cassette() = default;
  // The mutex guards the maps, never identity; a moved-from cassette is
  // simply empty.
  Cassette(Cassette&& other) noexcept
      : path_(std::move(other.path_)), responses_(std::move(other.responses_)) {}

  static Cassette open(const std::string& path);

  std::optional<nlohmann::json> lookup(const std::string& digest) const;
  void record(const std::string& digest, const nlohmann::json& request,
              const nlohmann::json& response);
  size_t size() const;
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::map<std::string, nlohmann::json> responses_;
  mutable std::mutex mu_;
};

struct WireRequest {
  std::string path;  // e.g. "/v1/chat/completions"
  nlohmann::json body;
};

// Pluggable transport; the default posts JSON over HTTP to the configured
// endpoint. Tests substitute an in-process function.
using Transport = std::function<nlohmann::json(const WireRequest&)>;

class ChatClient {
 public:
  ChatClient(LlmConfig config, CassetteMode mode, Cassette* cassette,
             Transport transport = {});

  // One request/response exchange. Replay mode never touches the network;
  // record mode consults the cassette first, then records what it fetched.
  ChatMessage chat(const std::vector<ChatMessage>& messages, const std::string& model_id,
                   const SamplingParams& params = {});

  // Runs user turns in order, feeding each assistant reply back into the
  // conversation (prefixed by the configured system prompt when set).
  // Returns the assistant replies; errors name the failing turn.
  std::vector<ChatMessage> run_chain(const std::vector<ChatMessage>& user_turns,
                                     const std::string& model_id,
                                     const SamplingParams& params = {});

  // Embeds each input; order-aligned with the inputs. Issues at most
  // max_in_flight live requests at a time; one cassette entry per input.
  std::vector<std::vector<float>> embed_images(
      const std::vector<std::vector<std::uint8_t>>& pngs);
  std::vector<std::vector<float>> embed_texts(const std::vector<std::string>& texts);

  const LlmConfig& config() const { return config_; }
  // Live transport invocations (attempts included); 0 proves hermetic replay.
  int network_calls() const { return network_calls_.load(); }

 private:
  nlohmann::json exchange(const WireRequest& request, const nlohmann::json& digest_payload,
                          const std::string& summary);
  nlohmann::json transport_with_retries(const WireRequest& request, const std::string& summary);
  std::vector<float> embed_one(const nlohmann::json& input, const std::string& summary);

  LlmConfig config_;
  CassetteMode mode_;
  Cassette* cassette_;
  Transport transport_;
  std::atomic<int> network_calls_{0};
};

// Request-body JSON for one message, as sent on the wire and digested.
nlohmann::json message_to_json(const ChatMessage& message);

}  // namespace comicscript
