#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "evopoc/oracle/backend.hpp"

#include <fmt/format.h>
#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <regex>

namespace evopoc::oracle {

using nlohmann::json;

const char* to_string(Schema s) {
    switch (s) {
    case Schema::Relevance: return "relevance";
    case Schema::Selection: return "selection";
    case Schema::Equivalence: return "equivalence";
    case Schema::Plan: return "plan";
    case Schema::Script: return "script";
    case Schema::Text: return "text";
    }
    return "?";
}

Schema parse_schema(const std::string& s) {
    for (Schema k : {Schema::Relevance, Schema::Selection, Schema::Equivalence, Schema::Plan, Schema::Script,
                     Schema::Text})
        if (s == to_string(k)) return k;
    throw OracleFailure(OracleFailure::Cause::Schema, "unknown schema tag '" + s + "'");
}

std::optional<std::string> schema_error(Schema s, const json& p) {
    if (s == Schema::Text) return std::nullopt;
    if (!p.is_object()) return std::string("payload is not an object");
    switch (s) {
    case Schema::Relevance:
        if (!p.contains("keep") || !p["keep"].is_boolean()) return std::string("'keep' must be a boolean");
        if (p.contains("confidence") && !p["confidence"].is_number()) return std::string("'confidence' must be a number");
        if (p["keep"].get<bool>() && !p.contains("confidence")) return std::string("'confidence' is required when keeping");
        if (p.contains("confidence")) {
            double c = p["confidence"].get<double>();
            if (c < 0 || c > 1) return std::string("'confidence' outside [0, 1]");
        }
        if (p.contains("rationale") && !p["rationale"].is_string()) return std::string("'rationale' must be text");
        return std::nullopt;
    case Schema::Selection:
        if (!p.contains("choice") || !(p["choice"].is_string() || p["choice"].is_null()))
            return std::string("'choice' must be an id or null");
        return std::nullopt;
    case Schema::Equivalence: {
        static const std::vector<std::string> ok = {"Equivalent", "Variant", "Distinct"};
        if (!p.contains("verdict") || !p["verdict"].is_string() ||
            std::find(ok.begin(), ok.end(), p["verdict"].get<std::string>()) == ok.end())
            return std::string("'verdict' must be Equivalent, Variant or Distinct");
        return std::nullopt;
    }
    case Schema::Plan:
        if (!p.contains("steps") || !p["steps"].is_array()) return std::string("'steps' must be a list");
        return std::nullopt;
    case Schema::Script:
        if (!p.contains("projection") || !p["projection"].is_array()) return std::string("'projection' must be a list");
        return std::nullopt;
    case Schema::Text: break;
    }
    return std::nullopt;
}

std::optional<json> extract_json_block(const std::string& text) {
    static const std::regex fence(R"(```(?:json)?[ \t]*\r?\n([\s\S]*?)```)");
    std::smatch m;
    std::string body = std::regex_search(text, m, fence) ? m[1].str() : text;
    json j = json::parse(body, nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    return j;
}

// ---- scripted ----

BackendResponse ScriptedBackend::chat(const BackendRequest& request) {
    std::lock_guard lock(mu_);
    if (next_ >= entries_.size())
        throw OracleFailure(OracleFailure::Cause::Exhausted,
                            fmt::format("scripted transcript exhausted after {} replies", entries_.size()));
    const ScriptedEntry& e = entries_[next_];
    if (e.schema != request.schema)
        throw OracleFailure(OracleFailure::Cause::Mismatch,
                            fmt::format("transcript entry {} answers a {} request, got {}", next_, to_string(e.schema),
                                        to_string(request.schema)));
    if (e.expect) {
        std::string last;
        for (const auto& m : request.messages)
            if (m.role == "user") last = m.content;
        if (last.find(*e.expect) == std::string::npos)
            throw OracleFailure(OracleFailure::Cause::Mismatch,
                                fmt::format("transcript entry {} expects a request mentioning '{}'", next_, *e.expect));
    }
    ++next_;
    BackendResponse r;
    if (e.schema == Schema::Text) {
        r.text = e.response.is_string() ? e.response.get<std::string>() : e.response.dump();
        return r;
    }
    if (auto err = schema_error(e.schema, e.response))
        throw OracleFailure(OracleFailure::Cause::Schema, fmt::format("transcript entry {}: {}", next_ - 1, *err));
    r.text = "```json\n" + e.response.dump(2) + "\n```";
    r.payload = e.response;
    return r;
}

std::vector<ScriptedEntry> scripted_entries_from_json(const json& j) {
    if (!j.is_array()) throw OracleFailure(OracleFailure::Cause::Schema, "scripted transcript must be a list");
    std::vector<ScriptedEntry> out;
    for (const auto& e : j) {
        if (!e.is_object() || !e.contains("schema") || !e.contains("response"))
            throw OracleFailure(OracleFailure::Cause::Schema, "transcript entries need 'schema' and 'response'");
        ScriptedEntry s{parse_schema(e["schema"].get<std::string>()), std::nullopt, e["response"]};
        if (e.contains("expect")) s.expect = e["expect"].get<std::string>();
        out.push_back(std::move(s));
    }
    return out;
}

// ---- live ----

HttpReply HttpTransport::post(const std::string& url, const std::string& body, const std::string& bearer,
                              std::chrono::milliseconds timeout) {
    static const std::regex split(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, split)) throw TransportError(false, "bad endpoint URL '" + url + "'");
    httplib::Client cli(m[1].str());
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    cli.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers headers;
    if (!bearer.empty()) headers.emplace("Authorization", "Bearer " + bearer);
    auto res = cli.Post(m[2].matched ? m[2].str() : "/", headers, body, "application/json");
    if (!res) {
        auto err = res.error();
        bool timed_out = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
                         err == httplib::Error::Write;
        throw TransportError(timed_out, "request failed: " + httplib::to_string(err));
    }
    return {res->status, res->body};
}

LiveConfig live_config_from_env(LiveConfig base) {
    auto get = [](const char* name) -> std::optional<std::string> {
        const char* v = std::getenv(name);
        return v && *v ? std::optional<std::string>(v) : std::nullopt;
    };
    if (auto v = get("EVOPOC_ENDPOINT")) base.url = *v;
    if (auto v = get("EVOPOC_API_KEY")) base.credential = *v;
    if (auto v = get("EVOPOC_MODEL")) base.model = *v;
    if (auto v = get("EVOPOC_TEMPERATURE")) base.temperature = std::stod(*v);
    return base;
}

LiveBackend::LiveBackend(LiveConfig config, std::shared_ptr<Transport> transport)
    : config_(std::move(config)), transport_(std::move(transport)), slots_(std::clamp(config_.max_in_flight, 1, 64)) {
    if (config_.url.empty()) throw OracleFailure(OracleFailure::Cause::Transport, "no endpoint configured");
}

std::string LiveBackend::round_trip(const std::vector<Message>& messages) {
    json msgs = json::array();
    for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    const std::string body =
        json{{"model", config_.model}, {"temperature", config_.temperature}, {"messages", msgs}}.dump();
    std::string last_error;
    bool timed_out = false;
    for (int attempt = 0; attempt <= config_.retries; ++attempt) {
        slots_.acquire();
        HttpReply reply;
        try {
            ++sent_;
            reply = transport_->post(config_.url, body, config_.credential, config_.timeout);
            slots_.release();
        } catch (const TransportError& e) {
            slots_.release();
            last_error = e.what();
            timed_out = e.timeout();
            continue;
        }
        if (reply.status < 200 || reply.status >= 300) {
            last_error = fmt::format("HTTP {}", reply.status);
            timed_out = false;
            continue;
        }
        json j = json::parse(reply.body, nullptr, false);
        if (j.is_discarded() || !j.contains("choices") || !j["choices"].is_array() || j["choices"].empty() ||
            !j["choices"][0].contains("message") || !j["choices"][0]["message"].contains("content") ||
            !j["choices"][0]["message"]["content"].is_string())
            throw OracleFailure(OracleFailure::Cause::Schema, "reply is not a chat completion");
        return j["choices"][0]["message"]["content"].get<std::string>();
    }
    throw OracleFailure(timed_out ? OracleFailure::Cause::Timeout : OracleFailure::Cause::Transport,
                        fmt::format("{} after {} attempts", last_error, config_.retries + 1));
}

BackendResponse LiveBackend::chat(const BackendRequest& request) {
    std::vector<Message> messages = request.messages;
    std::string problem;
    for (int ask = 0; ask < 2; ++ask) {
        BackendResponse r;
        r.text = round_trip(messages);
        if (request.schema == Schema::Text) return r;
        auto payload = extract_json_block(r.text);
        if (!payload) problem = "no JSON block found";
        else if (auto err = schema_error(request.schema, *payload)) problem = *err;
        else {
            r.payload = std::move(payload);
            return r;
        }
        messages.push_back({"assistant", r.text});
        messages.push_back({"user", fmt::format("The reply could not be used ({}). Answer again with a single ```json "
                                                "block matching the {} schema.",
                                                problem, to_string(request.schema))});
    }
    throw OracleFailure(OracleFailure::Cause::Schema,
                        fmt::format("{} reply still invalid after a re-ask: {}", to_string(request.schema), problem));
}

}  // namespace evopoc::oracle
