// SPDX-License-Identifier: Apache-2.0
#include "pathnav/policy/chat.hpp"

#include "pathnav/crypto.hpp"
#include "pathnav/error.hpp"
#include "pathnav/policy/prompts.hpp"

#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <regex>
#include <thread>

namespace pathnav::policy
{

namespace
{

// PNG encoding of a 1024px patch costs tens of milliseconds and the same
// patches are resent every round, so data URLs are memoized per image.
std::string data_url(const ImagePtr& img)
{
    static std::mutex mutex;
    static std::unordered_map<const Image*, std::pair<std::weak_ptr<const Image>, std::string>> memo;

    std::lock_guard lock(mutex);
    if (auto it = memo.find(img.get()); it != memo.end())
    {
        if (auto live = it->second.first.lock(); live && live.get() == img.get())
            return it->second.second;
        memo.erase(it);
    }
    if (memo.size() > 64)
        std::erase_if(memo, [](const auto& kv) { return kv.second.first.expired(); });
    const auto png = encode_png(*img);
    auto url = "data:image/png;base64," + base64_encode(png);
    memo[img.get()] = {img, url};
    return url;
}

std::string env_or_empty(const char* name)
{
    const char* v = std::getenv(name);
    return v ? std::string(v) : std::string();
}

} // namespace

ChatRequest make_request(const PromptBundle& bundle, const std::string& model)
{
    ChatRequest r;
    r.model = model;
    r.messages.push_back({"system", bundle.system_text, {}});
    r.messages.push_back({"user", bundle.user_text, bundle.images});
    return r;
}

nlohmann::json request_json(const ChatRequest& request)
{
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& m: request.messages)
    {
        if (m.images.empty())
        {
            messages.push_back({{"role", m.role}, {"content", m.text}});
            continue;
        }
        nlohmann::json content = nlohmann::json::array();
        content.push_back({{"type", "text"}, {"text", m.text}});
        for (const auto& img: m.images)
        {
            if (!img)
                throw Error(ErrorCode::Precondition, "null image in chat message");
            content.push_back({{"type", "image_url"}, {"image_url", {{"url", data_url(img)}}}});
        }
        messages.push_back({{"role", m.role}, {"content", std::move(content)}});
    }
    return {{"model", request.model}, {"temperature", request.temperature}, {"messages", std::move(messages)}};
}

std::string request_digest(const ChatRequest& request)
{
    return sha256_hex(request_json(request).dump());
}

HttpClientOptions http_options_from_env()
{
    HttpClientOptions o;
    o.endpoint = env_or_empty("PATHNAV_LLM_ENDPOINT");
    o.model = env_or_empty("PATHNAV_LLM_MODEL");
    o.api_key = env_or_empty("PATHNAV_LLM_API_KEY");
    return o;
}

HttpChatClient::HttpChatClient(HttpClientOptions options) : _options(std::move(options))
{
    if (_options.endpoint.empty())
        throw Error(ErrorCode::Config, "no chat endpoint configured; set PATHNAV_LLM_ENDPOINT");
    static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(_options.endpoint, m, url))
        throw Error(ErrorCode::Config, fmt::format("malformed endpoint URL '{}'", _options.endpoint));
    _base = m[1].str();
    _path = m[2].matched ? m[2].str() : std::string("/v1/chat/completions");
    if (_options.max_attempts < 1)
        _options.max_attempts = 1;
}

std::string HttpChatClient::complete(const ChatRequest& request)
{
    auto body = request_json(request);
    if (request.model.empty())
        body["model"] = _options.model;
    const auto payload = body.dump();

    httplib::Client cli(_base);
    cli.set_connection_timeout(_options.timeout);
    cli.set_read_timeout(_options.timeout);
    cli.set_write_timeout(_options.timeout);
    httplib::Headers headers;
    if (!_options.api_key.empty())
        headers.emplace("Authorization", "Bearer " + _options.api_key);

    std::string last_error;
    for (int attempt = 1; attempt <= _options.max_attempts; ++attempt)
    {
        if (attempt > 1)
            std::this_thread::sleep_for(_options.backoff * (1 << (attempt - 2)));
        auto res = cli.Post(_path, headers, payload, "application/json");
        if (!res)
        {
            last_error = httplib::to_string(res.error());
            spdlog::warn("chat request attempt {}/{} failed: {}", attempt, _options.max_attempts, last_error);
            continue;
        }
        if (res->status == 429 || res->status >= 500)
        {
            last_error = fmt::format("HTTP {}", res->status);
            spdlog::warn("chat request attempt {}/{} got {}", attempt, _options.max_attempts, last_error);
            continue;
        }
        if (res->status != 200)
            throw Error(ErrorCode::Transport, fmt::format("HTTP {}: {}", res->status, res->body.substr(0, 500)));
        try
        {
            const auto j = nlohmann::json::parse(res->body);
            const auto& content = j.at("choices").at(0).at("message").at("content");
            if (content.is_string())
                return content.get<std::string>();
            std::string text;
            for (const auto& part: content)
                if (part.value("type", "") == "text")
                    text += part.value("text", "");
            return text;
        }
        catch (const nlohmann::json::exception& e)
        {
            throw Error(ErrorCode::Transport, fmt::format("unexpected response body: {}", e.what()));
        }
    }
    throw Error(ErrorCode::Transport,
                fmt::format("{} unreachable after {} attempts: {}", _options.endpoint, _options.max_attempts, last_error));
}

MockChatClient::MockChatClient(std::vector<std::string> replies) : _replies(std::move(replies))
{
    if (_replies.empty())
        throw Error(ErrorCode::Precondition, "mock client needs at least one reply");
}

MockChatClient::MockChatClient(Responder responder) : _responder(std::move(responder)) {}

std::string MockChatClient::complete(const ChatRequest& request)
{
    _requests.push_back(request);
    const auto i = _calls++;
    if (_responder)
        return _responder(request);
    return _replies[std::min(i, _replies.size() - 1)];
}

std::filesystem::path frozen_marker(const std::filesystem::path& cache_path)
{
    auto p = cache_path;
    p += ".frozen";
    return p;
}

ResponseCache::ResponseCache(std::filesystem::path path) : _path(std::move(path))
{
    if (_path.empty())
        return;
    _frozen = std::filesystem::exists(frozen_marker(_path));
    std::ifstream in(_path);
    if (!in)
        return;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        if (line.empty())
            continue;
        try
        {
            const auto j = nlohmann::json::parse(line);
            auto digest = j.at("digest").get<std::string>();
            if (_index.contains(digest))
                continue;
            _index.emplace(digest, _entries.size());
            _entries.push_back({std::move(digest), j.at("response").get<std::string>()});
        }
        catch (const nlohmann::json::exception&)
        {
            // an interrupted append leaves at most one torn trailing record
            spdlog::warn("{}:{}: skipping unreadable cache record", _path.string(), lineno);
        }
    }
}

std::optional<std::string> ResponseCache::lookup(const std::string& digest) const
{
    std::lock_guard lock(_mutex);
    if (auto it = _index.find(digest); it != _index.end())
        return _entries[it->second].response;
    return std::nullopt;
}

void ResponseCache::store(const std::string& digest, const std::string& response)
{
    std::lock_guard lock(_mutex);
    if (_index.contains(digest))
        return;
    if (_frozen || (!_path.empty() && std::filesystem::exists(frozen_marker(_path))))
        throw Error(ErrorCode::CacheMiss, "cache is frozen");
    if (!_path.empty())
    {
        std::ofstream out(_path, std::ios::app);
        if (!out)
            throw Error(ErrorCode::Io, fmt::format("cannot append to cache {}", _path.string()));
        out << nlohmann::json{{"digest", digest}, {"response", response}}.dump() << '\n';
        out.flush();
        if (!out)
            throw Error(ErrorCode::Io, fmt::format("write to cache {} failed", _path.string()));
    }
    _index.emplace(digest, _entries.size());
    _entries.push_back({digest, response});
}

bool ResponseCache::frozen() const
{
    std::lock_guard lock(_mutex);
    return _frozen || (!_path.empty() && std::filesystem::exists(frozen_marker(_path)));
}

void ResponseCache::freeze()
{
    std::lock_guard lock(_mutex);
    _frozen = true;
    if (_path.empty())
        return;
    if (!std::filesystem::exists(_path))
        std::ofstream(_path, std::ios::app).flush();
    std::ofstream marker(frozen_marker(_path), std::ios::trunc);
    marker << sha256_file_hex(_path) << '\n';
    if (!marker)
        throw Error(ErrorCode::Io, fmt::format("cannot write {}", frozen_marker(_path).string()));
}

std::size_t ResponseCache::size() const
{
    std::lock_guard lock(_mutex);
    return _entries.size();
}

std::vector<ResponseCache::Entry> ResponseCache::entries() const
{
    std::lock_guard lock(_mutex);
    return _entries;
}

std::string ResponseCache::file_digest() const
{
    if (_path.empty() || !std::filesystem::exists(_path))
        return {};
    return sha256_file_hex(_path);
}

CachingChatClient::CachingChatClient(std::shared_ptr<ResponseCache> cache, std::shared_ptr<ChatClient> upstream)
    : _cache(std::move(cache)), _upstream(std::move(upstream))
{
    if (!_cache)
        _cache = std::make_shared<ResponseCache>();
}

std::string CachingChatClient::complete(const ChatRequest& request)
{
    const auto digest = request_digest(request);
    if (auto hit = _cache->lookup(digest))
    {
        ++_hits;
        return *hit;
    }
    if (_cache->frozen())
        throw Error(ErrorCode::CacheMiss, fmt::format("request {} is not in the frozen cache", digest.substr(0, 12)));
    if (!_upstream)
        throw Error(ErrorCode::Transport,
                    "cache miss and no chat endpoint configured; set PATHNAV_LLM_ENDPOINT or use a warm cache");
    auto response = _upstream->complete(request);
    ++_upstream_calls;
    _cache->store(digest, response);
    return response;
}

} // namespace pathnav::policy
