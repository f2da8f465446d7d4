#include "evopoc/cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <fmt/format.h>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace evopoc::cli {

namespace {

std::string clean(std::string v) {
    auto trim = [](std::string& s) {
        s.erase(0, s.find_first_not_of(" \t"));
        s.erase(s.find_last_not_of(" \t\r") + 1);
    };
    trim(v);
    if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'')) {
        auto close = v.find(v.front(), 1);
        if (close == std::string::npos) throw ConfigError("unterminated string " + v);
        return v.substr(1, close - 1);
    }
    if (auto hash = v.find(" #"); hash != std::string::npos) v.erase(hash);
    trim(v);
    return v;
}

template <class T>
T number(const std::string& key, const std::string& v) {
    std::istringstream in(v);
    T out{};
    in >> out;
    if (!in || !in.eof() || v.empty()) throw ConfigError(fmt::format("{}: '{}' is not a number", key, v));
    return out;
}

template <class T>
T ranged(const std::string& key, const std::string& v, T lo, T hi) {
    if constexpr (std::is_unsigned_v<T>) {
        if (!v.empty() && v.front() == '-') throw ConfigError(fmt::format("{} must be in [{}, {}]", key, lo, hi));
    }
    T x = number<T>(key, v);
    if (x < lo || x > hi) throw ConfigError(fmt::format("{} must be in [{}, {}]", key, lo, hi));
    return x;
}

using Setter = std::function<void(Config&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
    using sz = std::size_t;
    static const std::map<std::string, Setter> m = {
        {"store", [](Config& c, auto&, auto& v) { c.store = v; }},
        {"numeraire", [](Config& c, auto&, auto& v) { c.numeraire = v; }},
        {"iteration_cap", [](Config& c, auto& k, auto& v) { c.iteration_cap = ranged<int>(k, v, 1, 5); }},
        {"gamma_ppm",
         [](Config& c, auto& k, auto& v) { c.gamma_ppm = ranged<std::uint32_t>(k, v, 1, profit::kPpm); }},
        {"embedding.dimension", [](Config& c, auto& k, auto& v) { c.embedding_dim = ranged<sz>(k, v, 1, 65536); }},
        {"fusion.tau", [](Config& c, auto& k, auto& v) { c.fusion_tau = ranged<double>(k, v, 0.0, 1.0); }},
        {"fusion.variant_floor",
         [](Config& c, auto& k, auto& v) { c.fusion_variant_floor = ranged<double>(k, v, 0.0, 1.0); }},
        {"fusion.k", [](Config& c, auto& k, auto& v) { c.fusion_k = ranged<sz>(k, v, 1, 1000); }},
        {"memory.threshold", [](Config& c, auto& k, auto& v) { c.memory.threshold = ranged<double>(k, v, 0.0, 1.0); }},
        {"memory.hop_budget", [](Config& c, auto& k, auto& v) { c.memory.hop_budget = ranged<int>(k, v, 0, 64); }},
        {"memory.seed_k", [](Config& c, auto& k, auto& v) { c.memory.seed_k = ranged<sz>(k, v, 1, 1000); }},
        {"memory.dense_k", [](Config& c, auto& k, auto& v) { c.memory.dense_k = ranged<sz>(k, v, 1, 1000); }},
        {"solver.node_budget",
         [](Config& c, auto& k, auto& v) { c.path.solver.node_budget = ranged<sz>(k, v, 1, sz(1) << 32); }},
        {"solver.max_constraints",
         [](Config& c, auto& k, auto& v) { c.path.solver.max_constraints = ranged<sz>(k, v, 1, sz(1) << 32); }},
        {"solver.nonlinear_max_symbols",
         [](Config& c, auto& k, auto& v) { c.path.solver.nonlinear_max_symbols = ranged<sz>(k, v, 0, 8); }},
        {"solver.nonlinear_max_domain",
         [](Config& c, auto& k, auto& v) {
             c.path.solver.nonlinear_max_domain = BigInt(ranged<sz>(k, v, 1, sz(1) << 24));
         }},
        {"solver.depth_limit", [](Config& c, auto& k, auto& v) { c.path.traversal.depth_limit = ranged<int>(k, v, 1, 64); }},
        {"solver.alternates", [](Config& c, auto& k, auto& v) { c.path.alternates = ranged<sz>(k, v, 1, 4096); }},
        {"backend.endpoint", [](Config& c, auto&, auto& v) { c.backend.url = v; }},
        {"backend.model", [](Config& c, auto&, auto& v) { c.backend.model = v; }},
        {"backend.temperature",
         [](Config& c, auto& k, auto& v) { c.backend.temperature = ranged<double>(k, v, 0.0, 2.0); }},
        {"backend.timeout_ms",
         [](Config& c, auto& k, auto& v) {
             c.backend.timeout = std::chrono::milliseconds(ranged<long>(k, v, 1, 3600000));
         }},
        {"backend.retries", [](Config& c, auto& k, auto& v) { c.backend.retries = ranged<int>(k, v, 0, 10); }},
        {"backend.max_in_flight",
         [](Config& c, auto& k, auto& v) { c.backend.max_in_flight = ranged<int>(k, v, 1, 64); }},
    };
    return m;
}

}  // namespace

Config parse_config(const std::string& text) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(e.what());
    }
    Config c;
    auto set = [&](const std::string& key, const std::string& raw) {
        auto it = setters().find(key);
        if (it == setters().end()) throw ConfigError("unknown config key '" + key + "'");
        it->second(c, key, clean(raw));
        c.given.insert(key);
    };
    for (const auto& [k, v] : tree) {
        if (v.empty()) {
            set(k, v.data());
            continue;
        }
        for (const auto& [k2, v2] : v) set(k + "." + k2, v2.data());
    }
    if (c.fusion_variant_floor > c.fusion_tau) throw ConfigError("fusion.variant_floor must not exceed fusion.tau");
    return c;
}

Config load_config(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw ConfigError("cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void apply_backend_env(Config& c) {
    auto get = [](const char* name) -> std::optional<std::string> {
        const char* v = std::getenv(name);
        return v && *v ? std::optional<std::string>(v) : std::nullopt;
    };
    if (auto v = get("EVOPOC_API_KEY")) c.backend.credential = *v;
    if (!c.given.count("backend.endpoint"))
        if (auto v = get("EVOPOC_ENDPOINT")) c.backend.url = *v;
    if (!c.given.count("backend.model"))
        if (auto v = get("EVOPOC_MODEL")) c.backend.model = *v;
    if (!c.given.count("backend.temperature"))
        if (auto v = get("EVOPOC_TEMPERATURE")) c.backend.temperature = ranged<double>("EVOPOC_TEMPERATURE", *v, 0.0, 2.0);
}

}  // namespace evopoc::cli
