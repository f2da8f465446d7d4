#include "evopoc/pipeline/poc.hpp"
#include "evopoc/pipeline/synthesis.hpp"
#include "support/paths.hpp"

#include <doctest.h>

using namespace evopoc;
using namespace evopoc::pipeline;

namespace {

const sol::ProjectModel& bego_model() {
    static const sol::ProjectModel m =
        sol::filter_candidates(sol::parse_project(sol::load_sources(testing::fixture("bego"))));
    return m;
}

ExecutionEnv env() { return load_env(testing::fixture("bego/env.json")); }

oracle::Reasoner reasoner(const std::string& transcript) {
    auto t = oracle::load_transcript(testing::fixture("bego/" + transcript));
    return oracle::Reasoner(std::make_shared<oracle::ScriptedBackend>(t.backend));
}

SynthesisOutcome run(const std::string& transcript, SynthesisOptions options = {}) {
    auto r = reasoner(transcript);
    return exploit_synthesis(memory::WorkingMemory{}, env(), bego_model(), r, options);
}

}  // namespace

TEST_CASE("BEGO transcript succeeds on the first iteration") {
    auto o = run("transcript.json");
    REQUIRE(std::holds_alternative<SynthesisSuccess>(o));
    const auto& s = std::get<SynthesisSuccess>(o);
    CHECK(s.iterations == 1);
    CHECK(s.diagnostics.empty());
    auto golden = testing::read_json(testing::test_data("bego_trace_golden.json"));
    CHECK(profit::to_string(s.simulation.delta_w) == golden["delta_w"].get<std::string>());
    CHECK(s.simulation.delta_w > 0);
    CHECK(s.poc.find("BEGO.mint(M_raw, h, attacker, [], [], []);") != std::string::npos);
    CHECK(s.poc.find("Router.swapExactTokensForTokensSupportingFeeOnTransferTokens(") != std::string::npos);
    CHECK(s.poc.find("assertGt(wealthAfter, wealthBefore") != std::string::npos);
    CHECK(s.poc.find("pragma solidity") == s.poc.find('\n') + 1);
    CHECK(s.poc.find("// fork block: 22315679") != std::string::npos);
}

TEST_CASE("PoC text is deterministic and declares the mint parameters") {
    auto a = std::get<SynthesisSuccess>(run("transcript.json")).poc;
    auto b = std::get<SynthesisSuccess>(run("transcript.json")).poc;
    CHECK(a == b);
    CHECK(a.find("uint256 M_raw = 1000000000000000000000000000000;") != std::string::npos);
    CHECK(a.find("address router = vm.parseAddress(\"0x1000000000000000000000000000000000000002\");") !=
          std::string::npos);
    CHECK(a.find("interface IBEGO {") != std::string::npos);
    CHECK(a.find("interface IRouter {") != std::string::npos);
    // Step calls follow the wealth capture, in plan order.
    auto before = a.find("wealthBefore =");
    auto mint = a.find("BEGO.mint(");
    auto approve = a.find("BEGO.approve(");
    auto swap = a.find("Router.swap");
    CHECK(before < mint);
    CHECK(mint < approve);
    CHECK(approve < swap);
}

TEST_CASE("infeasible plan is refined on the next iteration") {
    auto o = run("transcript_retry.json");
    REQUIRE(std::holds_alternative<SynthesisSuccess>(o));
    const auto& s = std::get<SynthesisSuccess>(o);
    CHECK(s.iterations == 2);
    REQUIRE(s.diagnostics.size() == 1);
    CHECK(s.diagnostics[0].kind == Diagnostic::Kind::PathInfeasible);
    CHECK(s.diagnostics[0].step == std::optional<std::size_t>(0));
    CHECK(s.diagnostics[0].witness == std::vector<std::string>{"false"});
}

TEST_CASE("perpetually unprofitable scripts exhaust the budget after five iterations") {
    int plans = 0;
    SynthesisOptions opt;
    opt.observer = [&](const SynthesisEvent& e) { plans += e.kind == SynthesisEvent::Kind::PlanGenerated; };
    auto o = run("transcript_unprofitable.json", opt);
    REQUIRE(std::holds_alternative<SynthesisFailure>(o));
    const auto& f = std::get<SynthesisFailure>(o);
    CHECK(f.reason == SynthesisFailure::Reason::IterationBudgetExhausted);
    CHECK(f.iterations == 5);
    CHECK(plans == 5);
    REQUIRE(f.diagnostics.size() == 5);
    for (const auto& d : f.diagnostics) {
        CHECK(d.kind == Diagnostic::Kind::NotProfitable);
        CHECK(d.delta_w == std::optional<Rational>(0));
    }
}

TEST_CASE("lower iteration caps are honoured") {
    SynthesisOptions opt;
    opt.iteration_cap = 2;
    auto o = run("transcript_unprofitable.json", opt);
    CHECK(iterations(o) == 2);
    CHECK(std::get<SynthesisFailure>(o).diagnostics.size() == 2);
}

TEST_CASE("an exhausted transcript ends with the last diagnostic") {
    auto plan = testing::read_json(testing::fixture("bego/plan_infeasible.json"));
    plan.erase("projection");
    oracle::Reasoner r(std::make_shared<oracle::ScriptedBackend>(
        std::vector<oracle::ScriptedEntry>{{oracle::Schema::Plan, std::nullopt, plan}}));
    auto o = exploit_synthesis(memory::WorkingMemory{}, env(), bego_model(), r);
    REQUIRE(std::holds_alternative<SynthesisFailure>(o));
    const auto& f = std::get<SynthesisFailure>(o);
    CHECK(f.reason == SynthesisFailure::Reason::PathInfeasible);
    CHECK(f.iterations == 1);
    CHECK(f.diagnostics.size() == 1);

    oracle::Reasoner empty(std::make_shared<oracle::ScriptedBackend>(std::vector<oracle::ScriptedEntry>{}));
    CHECK_THROWS_AS(exploit_synthesis(memory::WorkingMemory{}, env(), bego_model(), empty), OracleFailure);
}

TEST_CASE("unreachable plans are never simulated") {
    std::vector<SynthesisEvent> events;
    SynthesisOptions opt;
    opt.observer = [&](const SynthesisEvent& e) { events.push_back(e); };
    run("transcript_retry.json", opt);
    std::vector<SynthesisEvent::Kind> kinds;
    for (const auto& e : events) kinds.push_back(e.kind);
    using K = SynthesisEvent::Kind;
    CHECK(kinds == std::vector<K>{K::PlanGenerated, K::ReachabilityChecked, K::PlanGenerated, K::ReachabilityChecked,
                                  K::ScriptGenerated, K::Simulated});
    CHECK_FALSE(events[1].reachable);
    CHECK(events[3].reachable);
}

TEST_CASE("outcome JSON carries the reason and per-iteration diagnostics") {
    auto j = to_json(run("transcript_unprofitable.json"));
    CHECK(j["outcome"] == "Failure");
    CHECK(j["reason"] == "IterationBudgetExhausted");
    CHECK(j["diagnostics"].size() == 5);
    auto s = to_json(run("transcript.json"));
    CHECK(s["outcome"] == "Success");
    CHECK(s["iterations"] == 1);
    CHECK(s["diagnostics"].empty());
}

TEST_CASE("emit_poc rejects empty plans and unresolved contracts") {
    CHECK_THROWS_AS(emit_poc(ExploitPlan{}, ExploitScript{}, env(), bego_model()), EmptyPlan);
    auto plan = plan_from_json([] {
        auto p = testing::read_json(testing::fixture("bego/plan_infeasible.json"));
        p.erase("projection");
        return p;
    }());
    CHECK_THROWS_AS(emit_poc(plan, ExploitScript{}, env(), bego_model()), UnresolvedAddress);
}

TEST_CASE("contract context lists callable functions") {
    auto ctx = contract_context(bego_model());
    CHECK(ctx.summary.find("BEGO") != std::string::npos);
    CHECK(ctx.summary.find("mint isSigned") != std::string::npos);
    CHECK(ctx.digest.size() == 16);
    CHECK(contract_context(bego_model()).digest == ctx.digest);
}
