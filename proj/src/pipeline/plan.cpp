#include "evopoc/pipeline/plan.hpp"

#include <fmt/format.h>

#include <fstream>
#include <set>

namespace evopoc::pipeline {

using nlohmann::json;

const char* to_string(Phase p) {
    switch (p) {
    case Phase::Preparation: return "Preparation";
    case Phase::Exploitation: return "Exploitation";
    case Phase::Extraction: return "Extraction";
    }
    return "?";
}

Phase parse_phase(const std::string& s) {
    if (s == "Preparation") return Phase::Preparation;
    if (s == "Exploitation") return Phase::Exploitation;
    if (s == "Extraction") return Phase::Extraction;
    throw PlanSchemaViolation("unknown phase '" + s + "'");
}

void validate_plan(const ExploitPlan& plan) {
    bool exploit = false;
    Phase last = Phase::Preparation;
    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        const TxStep& s = plan.steps[i];
        if (s.contract.empty() || s.function.empty())
            throw PlanSchemaViolation(fmt::format("step {} lacks a contract or function", i));
        if (s.phase < last)
            throw PlanSchemaViolation(fmt::format("step {} is {} after a {} step", i, to_string(s.phase), to_string(last)));
        last = s.phase;
        exploit = exploit || s.phase == Phase::Exploitation;
        std::set<std::string> seen;
        for (const auto& b : s.params) {
            if (b.symbol.empty()) throw PlanSchemaViolation(fmt::format("step {} has an unnamed parameter", i));
            if (!seen.insert(b.symbol).second)
                throw PlanSchemaViolation(fmt::format("step {} reuses parameter symbol '{}'", i, b.symbol));
        }
    }
    if (!plan.steps.empty() && !exploit) throw PlanSchemaViolation("plan has no Exploitation step");
}

std::optional<std::string> ExecutionEnv::address_of(const std::string& name) const {
    if (auto it = addresses.find(name); it != addresses.end()) return it->second;
    if (auto it = tokens.find(name); it != tokens.end()) return it->second;
    return std::nullopt;
}

void validate_projection(const std::vector<profit::LabeledOp>& ops, const ExecutionEnv& env) {
    std::set<std::string> tokens;
    for (const auto& [sym, addr] : env.tokens) tokens.insert(sym);
    for (const auto& t : env.initial.tokens()) tokens.insert(t);
    for (std::size_t i = 0; i < ops.size(); ++i) {
        for (const auto& p : profit::op_pools(ops[i].op))
            if (!env.initial.pools.count(p))
                throw ProjectionSchemaViolation(fmt::format("op {} names unknown pool '{}'", i, p));
        for (const auto& t : profit::op_tokens(ops[i].op))
            if (!tokens.count(t)) throw ProjectionSchemaViolation(fmt::format("op {} names unknown token '{}'", i, t));
    }
}

const char* to_string(Diagnostic::Kind k) {
    return k == Diagnostic::Kind::PathInfeasible ? "PathInfeasible" : "NotProfitable";
}

json to_json(const Diagnostic& d) {
    json j = {{"iteration", d.iteration}, {"kind", to_string(d.kind)}};
    if (d.step) j["step"] = *d.step;
    if (!d.witness.empty()) j["witness"] = d.witness;
    if (d.delta_w) j["delta_w"] = profit::to_string(*d.delta_w);
    if (d.failed_op)
        j["failed_op"] = {{"step", d.failed_op->step}, {"kind", d.failed_op->kind}, {"message", d.failed_op->message}};
    if (!d.note.empty()) j["note"] = d.note;
    return j;
}

namespace {

std::string need_string(const json& j, const char* key, const char* where) {
    if (!j.contains(key) || !j[key].is_string())
        throw PlanSchemaViolation(fmt::format("{} needs a string '{}'", where, key));
    return j[key].get<std::string>();
}

BigInt param_number(const json& v) {
    if (v.is_boolean()) return v.get<bool>() ? 1 : 0;
    try {
        return profit::amount_from_json(v);
    } catch (const profit::ScenarioFormat& e) {
        throw PlanSchemaViolation(std::string("bad parameter value: ") + e.what());
    }
}

void only_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
    for (const auto& [k, v] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) throw PlanSchemaViolation(fmt::format("{}: unknown field '{}'", where, k));
    }
}

}  // namespace

json to_json(const sol::Binding& b) {
    if (!b.value && !b.length) return b.symbol;
    json j = {{"symbol", b.symbol}};
    if (b.value) j["value"] = b.value->str();
    if (b.length) j["length"] = b.length->str();
    return j;
}

sol::Binding binding_from_json(const json& j) {
    if (j.is_string()) return {j.get<std::string>(), std::nullopt, std::nullopt};
    if (!j.is_object()) throw PlanSchemaViolation("parameter must be a symbol name or an object");
    only_keys(j, {"symbol", "value", "length"}, "parameter");
    sol::Binding b{need_string(j, "symbol", "parameter"), std::nullopt, std::nullopt};
    if (j.contains("value")) b.value = param_number(j["value"]);
    if (j.contains("length")) b.length = param_number(j["length"]);
    return b;
}

json to_json(const TxStep& s) {
    json params = json::array();
    for (const auto& b : s.params) params.push_back(to_json(b));
    json target = {{"category", sol::to_string(s.target.category)}};
    if (s.target.sink) target["sink"] = *s.target.sink;
    json j = {{"contract", s.contract}, {"function", s.function}, {"params", params},
              {"target", target},       {"phase", to_string(s.phase)}};
    if (!s.nodes.empty()) j["nodes"] = s.nodes;
    return j;
}

TxStep step_from_json(const json& j) {
    if (!j.is_object()) throw PlanSchemaViolation("step must be an object");
    only_keys(j, {"contract", "function", "params", "target", "phase", "nodes"}, "step");
    TxStep s;
    s.contract = need_string(j, "contract", "step");
    s.function = need_string(j, "function", "step");
    if (j.contains("params")) {
        if (!j["params"].is_array()) throw PlanSchemaViolation("step params must be a list");
        for (const auto& p : j["params"]) s.params.push_back(binding_from_json(p));
    }
    if (!j.contains("target")) throw PlanSchemaViolation("step needs a target");
    const json& t = j["target"];
    try {
        if (t.is_string()) {
            s.target.category = sol::parse_target_category(t.get<std::string>());
        } else {
            only_keys(t, {"category", "sink"}, "target");
            s.target.category = sol::parse_target_category(need_string(t, "category", "target"));
            if (t.contains("sink") && !t["sink"].is_null()) s.target.sink = need_string(t, "sink", "target");
        }
    } catch (const sol::FrontendError& e) {
        throw PlanSchemaViolation(e.what());
    }
    s.phase = parse_phase(need_string(j, "phase", "step"));
    for (const auto& n : j.value("nodes", json::array())) {
        if (!n.is_string()) throw PlanSchemaViolation("step nodes must be ids");
        s.nodes.push_back(n.get<std::string>());
    }
    return s;
}

json to_json(const ExploitPlan& p) {
    json steps = json::array();
    for (const auto& s : p.steps) steps.push_back(to_json(s));
    json j = {{"steps", steps}};
    if (!p.env_ref.empty()) j["env_ref"] = p.env_ref;
    if (!p.rationale.empty()) j["rationale"] = p.rationale;
    return j;
}

ExploitPlan plan_from_json(const json& j) {
    if (!j.is_object()) throw PlanSchemaViolation("plan must be an object");
    only_keys(j, {"steps", "env_ref", "rationale", "projection"}, "plan");
    if (!j.contains("steps") || !j["steps"].is_array()) throw PlanSchemaViolation("plan needs a steps list");
    ExploitPlan p;
    for (const auto& s : j["steps"]) p.steps.push_back(step_from_json(s));
    p.env_ref = j.value("env_ref", "");
    p.rationale = j.value("rationale", "");
    validate_plan(p);
    return p;
}

json to_json(const ExploitScript& s) {
    json calls = json::object();
    for (const auto& [i, c] : s.calls) calls[std::to_string(i)] = c;
    json ops = json::array();
    for (const auto& o : s.projection) {
        json e = profit::to_json(o.op);
        if (!o.label.empty()) e["label"] = o.label;
        ops.push_back(e);
    }
    return {{"declarations", s.declarations}, {"setup", s.setup}, {"calls", calls}, {"projection", ops}};
}

ExploitScript script_from_json(const json& j) {
    if (!j.is_object()) throw ProjectionSchemaViolation("script must be an object");
    for (const auto& [k, v] : j.items())
        if (k != "declarations" && k != "setup" && k != "calls" && k != "projection")
            throw ProjectionSchemaViolation("script: unknown field '" + k + "'");
    ExploitScript s;
    try {
        for (const auto& d : j.value("declarations", json::array())) s.declarations.push_back(d.get<std::string>());
        for (const auto& d : j.value("setup", json::array())) s.setup.push_back(d.get<std::string>());
        const json calls = j.value("calls", json::object());
        for (const auto& [k, v] : calls.items())
            s.calls[std::stoul(k)] = v.get<std::string>();
        s.projection = profit::script_from_json(j.value("projection", json::array()));
    } catch (const profit::ScenarioFormat& e) {
        throw ProjectionSchemaViolation(e.what());
    } catch (const json::exception& e) {
        throw ProjectionSchemaViolation(e.what());
    } catch (const std::logic_error& e) {
        throw ProjectionSchemaViolation(std::string("bad call index: ") + e.what());
    }
    return s;
}

json to_json(const ExecutionEnv& e) {
    json state = profit::to_json(e.initial);
    json j = {{"addresses", e.addresses}, {"tokens", e.tokens},     {"chain", e.chain},
              {"numeraire", e.numeraire}, {"attackers", e.attackers}, {"mode", profit::to_string(e.sim.mode)},
              {"flash_fee_ppm", e.sim.flash_fee_ppm}, {"pools", state["pools"]}, {"balances", state["balances"]},
              {"prices", state["prices"]}};
    if (e.block) j["block"] = *e.block;
    return j;
}

ExecutionEnv env_from_json(const json& j) {
    if (!j.is_object()) throw EnvError("env must be an object");
    ExecutionEnv e;
    try {
        for (const auto& [k, v] : j.items()) {
            static const std::set<std::string> known = {"addresses", "tokens", "block", "chain", "numeraire",
                                                        "attackers", "mode", "flash_fee_ppm", "pools", "balances",
                                                        "prices"};
            if (!known.count(k)) throw EnvError("env: unknown field '" + k + "'");
        }
        e.addresses = j.value("addresses", std::map<std::string, std::string>{});
        e.tokens = j.value("tokens", std::map<std::string, std::string>{});
        if (j.contains("block")) e.block = j["block"].get<std::uint64_t>();
        e.chain = j.value("chain", "");
        e.numeraire = j.value("numeraire", "");
        if (e.numeraire.empty()) throw EnvError("env needs a numeraire");
        if (j.contains("attackers")) e.attackers = j["attackers"].get<std::vector<std::string>>();
        if (e.attackers.empty()) throw EnvError("env names no attacker accounts");
        e.sim.mode = profit::parse_mode(j.value("mode", "amm"));
        e.sim.flash_fee_ppm = j.value("flash_fee_ppm", 0u);
        json state = json::object();
        for (const char* k : {"pools", "balances", "prices"})
            if (j.contains(k)) state[k] = j[k];
        e.initial = profit::state_from_json(state);
    } catch (const json::exception& ex) {
        throw EnvError(std::string("env: ") + ex.what());
    } catch (const profit::SimError& ex) {
        throw EnvError(std::string("env: ") + ex.what());
    }
    return e;
}

ExecutionEnv load_env(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw EnvError("cannot read " + p.string());
    try {
        return env_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw EnvError(p.string() + ": " + e.what());
    }
}

}  // namespace evopoc::pipeline
