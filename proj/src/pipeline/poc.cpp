#include "evopoc/pipeline/poc.hpp"

#include "evopoc/frontend/parser.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>

namespace evopoc::pipeline {

namespace {

using sol::TypeName;

bool is_reference(const TypeName& t) {
    return t.is_array() || (t.kind == TypeName::Kind::Elementary && (t.name == "string" || t.name == "bytes"));
}

std::string param_decl(const sol::Param& p, bool external) {
    std::string s = sol::unparse(p.type);
    if (is_reference(p.type)) s += " " + (p.location.empty() || (external && p.location == "storage") ? std::string("memory") : p.location);
    if (!p.name.empty()) s += " " + p.name;
    return s;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::optional<std::string> lookup_address(const ExecutionEnv& env, const std::string& name) {
    if (auto a = env.address_of(name)) return a;
    for (const auto* m : {&env.addresses, &env.tokens})
        for (const auto& [k, v] : *m)
            if (lower(k) == lower(name)) return v;
    return std::nullopt;
}

bool defined_in(const std::vector<std::string>& lines, const std::string& symbol) {
    std::string esc;
    for (char c : symbol) esc += std::isalnum(static_cast<unsigned char>(c)) || c == '_' ? std::string(1, c) : std::string("\\") + c;
    const std::regex def("\\b" + esc + "\\s*(=|;)");
    for (const auto& l : lines)
        if (std::regex_search(l, def)) return true;
    return false;
}

// Initializer for a local of type `t`, or nullopt when none can be written.
std::optional<std::string> initializer(const TypeName& t, const sol::Binding& b, const ExecutionEnv& env) {
    const std::string v = b.value ? b.value->str() : "0";
    if (t.is_array()) {
        if (!t.length.empty()) return std::nullopt;
        return fmt::format("new {}[]({})", sol::unparse(t.args.at(0)), b.length ? b.length->str() : "0");
    }
    if (t.kind != TypeName::Kind::Elementary) return std::nullopt;
    const std::string& n = t.name;
    if (n == "address" || n == "address payable") {
        if (auto a = lookup_address(env, b.symbol)) return fmt::format("vm.parseAddress(\"{}\")", *a);
        return fmt::format("address(uint160({}))", v);
    }
    if (n == "bool") return std::string(b.value && *b.value != 0 ? "true" : "false");
    if (n == "string") return fmt::format("\"{}\"", b.value ? v : b.symbol);
    if (n == "bytes") return std::string("hex\"\"");
    if (n.rfind("bytes", 0) == 0) return fmt::format("{}(uint256({}))", n, v);
    if (n.rfind("uint", 0) == 0 || n.rfind("int", 0) == 0) return v;
    return std::nullopt;
}

const sol::FunctionDef* model_function(const sol::ProjectModel& model, const TxStep& s) {
    if (!model.find(s.contract)) return nullptr;
    return model.resolve_function(s.contract, s.function).function;
}

}  // namespace

std::string emit_poc(const ExploitPlan& plan, const ExploitScript& script, const ExecutionEnv& env,
                     const sol::ProjectModel& model, const reach::PathVerdict* reach) {
    if (plan.steps.empty()) throw EmptyPlan();

    std::vector<std::string> contracts;
    for (const auto& s : plan.steps)
        if (std::find(contracts.begin(), contracts.end(), s.contract) == contracts.end()) contracts.push_back(s.contract);
    std::map<std::string, std::string> addr;
    for (const auto& c : contracts) {
        auto a = env.address_of(c);
        if (!a) throw UnresolvedAddress("no address for contract '" + c + "'");
        addr[c] = *a;
    }
    auto numeraire = lookup_address(env, env.numeraire);
    if (!numeraire) throw UnresolvedAddress("no address for numeraire '" + env.numeraire + "'");

    std::string out;
    auto line = [&](const std::string& l = "") { out += l + "\n"; };

    line("// SPDX-License-Identifier: UNLICENSED");
    line("pragma solidity ^0.8.10;");
    line();
    line("import \"forge-std/Test.sol\";");
    line();
    line("// chain: " + (env.chain.empty() ? std::string("unspecified") : env.chain));
    line("// fork block: " + (env.block ? std::to_string(*env.block) : std::string("latest")));
    for (const auto& c : contracts) line(fmt::format("// {}: {}", c, addr.at(c)));
    line(fmt::format("// numeraire: {} {}", env.numeraire, *numeraire));
    if (!plan.rationale.empty()) line("// plan: " + plan.rationale);
    line();

    line("interface IERC20Balance {");
    line("    function balanceOf(address account) external view returns (uint256);");
    line("}");
    line();
    for (const auto& c : contracts) {
        if (!model.find(c)) continue;
        line(fmt::format("interface I{} {{", c));
        std::set<std::string> seen;
        for (const auto& s : plan.steps) {
            if (s.contract != c || !seen.insert(s.function).second) continue;
            const sol::FunctionDef* f = model_function(model, s);
            if (!f) continue;
            std::vector<std::string> ps, rs;
            for (const auto& p : f->params) ps.push_back(param_decl(p, true));
            for (const auto& p : f->returns) rs.push_back(param_decl(p, true));
            std::string sig = fmt::format("    function {}({}) external", f->name, fmt::join(ps, ", "));
            if (f->mutability == "view" || f->mutability == "pure" || f->mutability == "payable") sig += " " + f->mutability;
            if (!rs.empty()) sig += fmt::format(" returns ({})", fmt::join(rs, ", "));
            line(sig + ";");
        }
        line("}");
        line();
    }
    for (const auto& d : script.declarations) {
        line(d);
        line();
    }

    line("contract EvoPoCTest is Test {");
    for (const auto& c : contracts) line(fmt::format("    I{} internal {};", c, c));
    line("    IERC20Balance internal numeraireToken;");
    line();
    line("    function setUp() public {");
    if (env.block) line(fmt::format("        vm.createSelectFork(vm.envString(\"EVOPOC_RPC_URL\"), {});", *env.block));
    for (const auto& c : contracts) line(fmt::format("        {} = I{}(vm.parseAddress(\"{}\"));", c, c, addr.at(c)));
    line(fmt::format("        numeraireToken = IERC20Balance(vm.parseAddress(\"{}\"));", *numeraire));
    line("    }");
    line();
    line("    function testExploit() public {");
    for (const auto& a : env.attackers) line(fmt::format("        address {} = address(this);", a));

    std::set<std::string> declared(env.attackers.begin(), env.attackers.end());
    std::vector<std::string> calls;
    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        const TxStep& s = plan.steps[i];
        const sol::Sigma& sigma = reach && i < reach->steps.size() && reach->steps[i].sigma.size() == s.params.size()
                                      ? reach->steps[i].sigma
                                      : s.params;
        const sol::FunctionDef* f = model_function(model, s);
        std::vector<std::string> args;
        for (std::size_t j = 0; j < sigma.size(); ++j) {
            const sol::Binding& b = sigma[j];
            const TypeName* t = f && j < f->params.size() ? &f->params[j].type : nullptr;
            if (t && t->is_array() && b.length && *b.length == 0) {
                args.push_back("[]");
                continue;
            }
            args.push_back(b.symbol);
            if (!t || declared.count(b.symbol) || defined_in(script.setup, b.symbol)) continue;
            auto init = initializer(*t, b, env);
            if (!init) continue;
            declared.insert(b.symbol);
            line(fmt::format("        {}{} {} = {};", sol::unparse(*t), is_reference(*t) ? " memory" : "", b.symbol,
                             *init));
        }
        if (auto it = script.calls.find(i); it != script.calls.end())
            calls.push_back(it->second);
        else
            calls.push_back(fmt::format("{}.{}({});", s.contract, s.function, fmt::join(args, ", ")));
    }
    for (const auto& l : script.setup) line("        " + l);
    line(fmt::format("        uint256 wealthBefore = numeraireToken.balanceOf({});", env.attackers.front()));
    for (std::size_t i = 0; i < calls.size(); ++i) {
        line(fmt::format("        // step {}: {} ({})", i + 1, to_string(plan.steps[i].phase),
                         sol::to_string(plan.steps[i].target.category)));
        line("        " + calls[i]);
    }
    line(fmt::format("        uint256 wealthAfter = numeraireToken.balanceOf({});", env.attackers.front()));
    line("        assertGt(wealthAfter, wealthBefore, \"attacker numeraire wealth must strictly increase\");");
    line("    }");
    line("}");
    return out;
}

}  // namespace evopoc::pipeline
