// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pathnav/image.hpp"

#include <json.hpp>

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace pathnav::policy
{

struct PromptBundle;

struct ChatMessage
{
    std::string role;
    std::string text;
    std::vector<ImagePtr> images;
};

struct ChatRequest
{
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
};

/// system + user(text, images...) request from a prompt bundle.
[[nodiscard]] ChatRequest make_request(const PromptBundle& bundle, const std::string& model);

/// Chat-completions body; images are inlined as base64 PNG data URLs.
/// The serialization is canonical, so it doubles as the cache key material.
[[nodiscard]] nlohmann::json request_json(const ChatRequest& request);
/// SHA-256 hex of the canonical request body.
[[nodiscard]] std::string request_digest(const ChatRequest& request);

class ChatClient
{
public:
    virtual ~ChatClient() = default;
    /// Returns the assistant text. Throws Transport on network failure.
    virtual std::string complete(const ChatRequest& request) = 0;
};

struct HttpClientOptions
{
    std::string endpoint; // e.g. https://host/v1/chat/completions
    std::string model;
    std::string api_key;
    std::chrono::seconds timeout{120};
    int max_attempts = 3;
    std::chrono::milliseconds backoff{500};
};

/// PATHNAV_LLM_ENDPOINT, PATHNAV_LLM_MODEL, PATHNAV_LLM_API_KEY.
[[nodiscard]] HttpClientOptions http_options_from_env();

class HttpChatClient final : public ChatClient
{
public:
    /// Throws Config when the endpoint is empty or malformed.
    explicit HttpChatClient(HttpClientOptions options);
    std::string complete(const ChatRequest& request) override;

private:
    HttpClientOptions _options;
    std::string _base;
    std::string _path;
};

/// Replays canned replies in order (the last one repeats), or calls a responder.
class MockChatClient final : public ChatClient
{
public:
    using Responder = std::function<std::string(const ChatRequest&)>;

    explicit MockChatClient(std::vector<std::string> replies);
    explicit MockChatClient(Responder responder);
    std::string complete(const ChatRequest& request) override;

    [[nodiscard]] std::size_t calls() const noexcept { return _calls; }
    [[nodiscard]] const std::vector<ChatRequest>& requests() const noexcept { return _requests; }

private:
    std::vector<std::string> _replies;
    Responder _responder;
    std::size_t _calls = 0;
    std::vector<ChatRequest> _requests;
};

/// Append-only JSONL store of {"digest", "response"} records. A cache is
/// frozen when the sidecar `<path>.frozen` exists; frozen caches never grow.
class ResponseCache
{
public:
    struct Entry
    {
        std::string digest;
        std::string response;
    };

    /// Empty path: in-memory only.
    explicit ResponseCache(std::filesystem::path path = {});

    [[nodiscard]] std::optional<std::string> lookup(const std::string& digest) const;
    /// Appends one record; a no-op for digests already present. Throws CacheMiss when frozen.
    void store(const std::string& digest, const std::string& response);

    [[nodiscard]] bool frozen() const;
    void freeze();
    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] std::vector<Entry> entries() const;
    [[nodiscard]] const std::filesystem::path& path() const noexcept { return _path; }
    /// SHA-256 of the cache file, or empty when there is none.
    [[nodiscard]] std::string file_digest() const;

private:
    std::filesystem::path _path;
    mutable std::mutex _mutex;
    std::vector<Entry> _entries;
    std::unordered_map<std::string, std::size_t> _index;
    bool _frozen = false;
};

[[nodiscard]] std::filesystem::path frozen_marker(const std::filesystem::path& cache_path);

/// Serves hits from the cache and forwards misses upstream.
class CachingChatClient final : public ChatClient
{
public:
    /// upstream may be null (offline): misses then fail with Transport.
    CachingChatClient(std::shared_ptr<ResponseCache> cache, std::shared_ptr<ChatClient> upstream);
    std::string complete(const ChatRequest& request) override;

    [[nodiscard]] std::size_t hits() const noexcept { return _hits; }
    [[nodiscard]] std::size_t upstream_calls() const noexcept { return _upstream_calls; }
    [[nodiscard]] const ResponseCache& cache() const noexcept { return *_cache; }

private:
    std::shared_ptr<ResponseCache> _cache;
    std::shared_ptr<ChatClient> _upstream;
    std::size_t _hits = 0;
    std::size_t _upstream_calls = 0;
};

} // namespace pathnav::policy
