#pragma once

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <functional>
#include <regex>
#include <string>
#include <thread>

namespace pathnav::test
{

/// Text parts of the last user message in a chat-completions body.
inline std::string request_text(const nlohmann::json& body)
{
    std::string out;
    const auto& messages = body.at("messages");
    for (auto it = messages.rbegin(); it != messages.rend(); ++it)
    {
        if (it->value("role", "") != "user")
            continue;
        const auto& c = it->at("content");
        if (c.is_string())
            out += c.get<std::string>() + "\n";
        else
            for (const auto& part: c)
                if (part.value("type", "") == "text")
                    out += part.at("text").get<std::string>() + "\n";
        break;
    }
    return out;
}

/// Navigation rounds: echo the first listed candidate, TERMINATE once no list
/// is offered. Anything else gets `fallback`.
inline std::string scripted_reply(const std::string& text, const std::string& fallback = "HBAND")
{
    static const std::regex first(R"(\n1\. \(x=([0-9.]+), y=([0-9.]+)\))");
    std::smatch m;
    if (std::regex_search(text, m, first))
        return fmt::format("The first candidate looks cellular.\n<<x={}, y={}, level=0>>", m[1].str(), m[2].str());
    if (text.find("Round ") != std::string::npos)
        return "Enough evidence.\nTERMINATE";
    return fallback;
}

/// Local chat-completions endpoint on an ephemeral port.
class MockLlmServer
{
public:
    using Responder = std::function<std::string(const nlohmann::json&)>;

    explicit MockLlmServer(Responder responder = [](const nlohmann::json& b) { return scripted_reply(request_text(b)); })
        : _responder(std::move(responder))
    {
        _server.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            ++_hits;
            const auto body = nlohmann::json::parse(req.body);
            const nlohmann::json reply = {
                {"choices", {{{"message", {{"role", "assistant"}, {"content", _responder(body)}}}}}}};
            res.set_content(reply.dump(), "application/json");
        });
        _port = _server.bind_to_any_port("127.0.0.1");
        _thread = std::thread([this] { _server.listen_after_bind(); });
        _server.wait_until_ready();
    }
    ~MockLlmServer()
    {
        _server.stop();
        _thread.join();
    }
    MockLlmServer(const MockLlmServer&) = delete;
    MockLlmServer& operator=(const MockLlmServer&) = delete;

    [[nodiscard]] std::string endpoint() const
    {
        return fmt::format("http://127.0.0.1:{}/v1/chat/completions", _port);
    }
    [[nodiscard]] int hits() const noexcept { return _hits; }

private:
    Responder _responder;
    httplib::Server _server;
    std::thread _thread;
    int _port = 0;
    std::atomic<int> _hits{0};
};

} // namespace pathnav::test
