#pragma once

#include "evopoc/common/errors.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

namespace evopoc::oracle {

/// Expected shape of the structured payload in a reply.
enum class Schema { Relevance, Selection, Equivalence, Plan, Script, Text };
const char* to_string(Schema s);
Schema parse_schema(const std::string& s);

struct Message {
    std::string role;  // system, user or assistant
    std::string content;
};

struct BackendRequest {
    std::vector<Message> messages;
    Schema schema = Schema::Text;
};

struct BackendResponse {
    std::string text;
    std::optional<nlohmann::json> payload;  // absent for Text requests
};

/// Structural check of a payload against its schema tag; the message of the
/// first problem, or nullopt. Plan and Script payloads get a shallow check
/// here and a full one when decoded.
std::optional<std::string> schema_error(Schema s, const nlohmann::json& payload);

/// First ```json fenced block (or a bare JSON document) in `text`.
std::optional<nlohmann::json> extract_json_block(const std::string& text);

class Backend {
public:
    virtual ~Backend() = default;
    virtual BackendResponse chat(const BackendRequest& request) = 0;
    virtual bool scripted() const = 0;
};

struct ScriptedEntry {
    Schema schema = Schema::Text;
    // Substring the last user message must contain, when set.
    std::optional<std::string> expect;
    nlohmann::json response;
};

/// Canned replies consumed strictly in order. A request whose schema or
/// expected text does not match the next entry fails with Mismatch; running
/// past the end fails with Exhausted.
class ScriptedBackend final : public Backend {
public:
    explicit ScriptedBackend(std::vector<ScriptedEntry> entries) : entries_(std::move(entries)) {}
    BackendResponse chat(const BackendRequest& request) override;
    bool scripted() const override { return true; }
    std::size_t consumed() const { return next_; }
    std::size_t remaining() const { return entries_.size() - next_; }

private:
    std::vector<ScriptedEntry> entries_;
    std::size_t next_ = 0;
    std::mutex mu_;
};

/// List of {schema, expect?, response}.
std::vector<ScriptedEntry> scripted_entries_from_json(const nlohmann::json& j);

struct HttpReply {
    int status = 0;
    std::string body;
};

class TransportError : public std::runtime_error {
public:
    TransportError(bool timeout, const std::string& what) : std::runtime_error(what), timeout_(timeout) {}
    bool timeout() const { return timeout_; }

private:
    bool timeout_;
};

class Transport {
public:
    virtual ~Transport() = default;
    /// Throws TransportError.
    virtual HttpReply post(const std::string& url, const std::string& body, const std::string& bearer,
                           std::chrono::milliseconds timeout) = 0;
};

/// cpp-httplib client; https needs OpenSSL at build time.
class HttpTransport final : public Transport {
public:
    HttpReply post(const std::string& url, const std::string& body, const std::string& bearer,
                   std::chrono::milliseconds timeout) override;
};

struct LiveConfig {
    std::string url;
    std::string credential;
    std::string model;
    double temperature = 0.2;
    std::chrono::milliseconds timeout{60000};
    int retries = 2;
    int max_in_flight = 4;
};

/// Reads EVOPOC_ENDPOINT, EVOPOC_API_KEY, EVOPOC_MODEL and EVOPOC_TEMPERATURE
/// over the given defaults.
LiveConfig live_config_from_env(LiveConfig base = {});

/// Generic JSON chat-completion client: POSTs {model, temperature, messages}
/// and reads choices[0].message.content. A reply without a valid payload is
/// re-asked once before failing with Schema.
class LiveBackend final : public Backend {
public:
    LiveBackend(LiveConfig config, std::shared_ptr<Transport> transport);
    BackendResponse chat(const BackendRequest& request) override;
    bool scripted() const override { return false; }
    std::size_t requests_sent() const { return sent_; }

private:
    std::string round_trip(const std::vector<Message>& messages);

    LiveConfig config_;
    std::shared_ptr<Transport> transport_;
    std::counting_semaphore<64> slots_;
    std::atomic<std::size_t> sent_ = 0;
};

}  // namespace evopoc::oracle
