// Acceptance run: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include "evopoc/frontend/project.hpp"
#include "evopoc/frontend/symbolic.hpp"
#include "evopoc/fusion/fusion.hpp"
#include "evopoc/ontology/serialize.hpp"
#include "evopoc/pipeline/synthesis.hpp"
#include "evopoc/reachability/path_check.hpp"
#include "support/paths.hpp"
#include "support/profit_checks.hpp"
#include "support/random_cases.hpp"
#include "support/random_constraints.hpp"
#include "support/random_pipeline.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <fmt/format.h>

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <unistd.h>

using namespace evopoc;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const sol::ProjectModel& bego_model() {
    static const sol::ProjectModel m =
        sol::filter_candidates(sol::parse_project(sol::load_sources(testing::fixture("bego"))));
    return m;
}

profit::SimResult simulate(const std::string& rel) {
    auto s = profit::load_scenario(testing::fixture(rel));
    return profit::simulate(s.script, s.initial, s.numeraire, s.accounts, s.options);
}

Verdict bego_reachability() {
    auto t0 = Clock::now();
    const auto& model = bego_model();
    auto path = sol::traverse(model, "BEGO", "mint", {sol::TargetCategory::StateModification, "_mint"});
    sol::Sigma sigma = {{"M_raw", pow10(30), std::nullopt}, {"h", std::nullopt, std::nullopt},
                        {"attacker", std::nullopt, std::nullopt}, {"R", std::nullopt, BigInt(0)},
                        {"S", std::nullopt, BigInt(0)},          {"V", std::nullopt, BigInt(0)}};
    auto pp = sol::collect_predicates(model, path, sigma);
    std::vector<std::string> got;
    for (const auto& p : pp.predicates()) got.push_back(reach::to_string(p));
    const std::vector<std::string> want = {"len(R) == len(S)", "len(S) == len(V)", "!txHashes[h]"};
    auto all = pp.predicates();
    all.insert(all.end(), pp.sigma_constraints.begin(), pp.sigma_constraints.end());
    auto r = reach::check_sat(all, pp.symbols);
    bool zero = r.is_sat();
    for (const char* len : {"len(R)", "len(S)", "len(V)"}) {
        auto it = r.model.find(len);
        zero = zero && it != r.model.end() && it->second == reach::Value(BigInt(0));
    }
    double secs = seconds_since(t0);
    bool pass = got == want && r.is_sat() && zero && reach::satisfies(all, r.model) && secs < 1.0;
    return {pass, fmt::format("predicates=[{}] sat={} zero_lengths={} {:.3f}s", fmt::join(got, ", "), r.is_sat(),
                              zero, secs)};
}

Verdict bego_profitability() {
    using boost::multiprecision::cpp_int;
    using boost::multiprecision::cpp_rational;
    auto t0 = Clock::now();
    auto r = simulate("bego/scenario.json");
    auto mismatch = testing::golden_mismatch(r, testing::read_json(testing::test_data("bego_trace_golden.json")));

    // Fixture pool (R_B, R_W) = (2e6 * 1e18, 150 * 1e18), gamma 997000, x = 1e12 * 1e18.
    const cpp_int e18 = cpp_int(1000000000000000000);
    const cpp_int rb = 2000000 * e18, rw = 150 * e18, x = cpp_int(1000000000000) * e18, gamma = 997000;
    cpp_rational exact(gamma * x * rw, rb * 1000000 + gamma * x);
    const cpp_int out = numerator(exact) / denominator(exact);

    bool shape = r.trace.size() == 4;
    if (shape) {
        const auto& s0 = r.trace.front().state;
        const auto& s1 = r.trace[1].state;
        const auto& fin = r.final_state;
        const auto& p0 = s0.pool("pair");
        const auto& pf = fin.pool("pair");
        shape = s0.balance("attacker", "BEGO") == 0 && s0.balance("attacker", "WBNB") == 0 &&
                s1.balance("attacker", "BEGO") == x && fin.balance("attacker", "BEGO") == 0 &&
                fin.balance("attacker", "WBNB") == out && p0.reserve0 == rb && p0.reserve1 == rw &&
                pf.reserve0 == rb + x && pf.reserve1 == rw - out;
    }
    double secs = seconds_since(t0);
    bool pass = !mismatch && shape && r.delta_w == Rational(out) && r.delta_w > 0 && secs < 1.0;
    return {pass, fmt::format("delta_w={} oracle_out={} shape={} golden={} {:.3f}s", profit::to_string(r.delta_w),
                              out.str(), shape, mismatch.value_or("match"), secs)};
}

Verdict solver_equivalence() {
    auto t0 = Clock::now();
    testing::ConstraintGenerator gen(20240601);
    const int n = 1200;
    int agree = 0, sat = 0, resat = 0;
    for (int i = 0; i < n; ++i) {
        auto inst = gen.next();
        bool expected = testing::brute_force_sat(inst);
        auto r = reach::check_sat(inst.predicates, inst.symbols);
        if (!r.is_unknown() && r.is_sat() == expected) ++agree;
        if (r.is_sat()) {
            ++sat;
            if (reach::satisfies(inst.predicates, r.model)) ++resat;
        }
    }
    double secs = seconds_since(t0);
    return {agree == n && resat == sat && secs < 60.0,
            fmt::format("instances={} agree={} sat={} resatisfied={} {:.2f}s", n, agree, sat, resat, secs)};
}

Verdict constant_product() {
    auto rep = testing::constant_product_run(777, 10000);
    return {rep.ops >= 10000 && rep.violations == 0,
            fmt::format("ops={} violations={}{}", rep.ops, rep.violations, rep.first.empty() ? "" : " " + rep.first)};
}

Verdict fusion_idempotence() {
    testing::CaseGenerator gen(4242);
    int failures = 0;
    std::string first;
    std::size_t total_nodes = 0, total_edges = 0;
    auto fail = [&](int set, const std::string& why) {
        if (failures++ == 0) first = fmt::format("set {}: {}", set, why);
    };
    for (int set = 0; set < 100; ++set) {
        hkg::Graph g;
        fusion::VectorIndex index;
        fusion::HashedEmbedding provider;
        fusion::ThresholdJudge judge;
        std::vector<fusion::CaseSubgraph> cases;
        std::size_t case_nodes = 0;
        for (int c = 0, k = 2 + set % 4; c < k; ++c) {
            cases.push_back(gen.next(fmt::format("case-{}-{}", set, c)));
            case_nodes += cases.back().nodes.size();
        }
        for (const auto& c : cases) fusion::ingest_case(g, index, c, judge, provider);
        const json once = hkg::graph_to_json(g);
        for (const auto& c : cases) {
            auto rep = fusion::ingest_case(g, index, c, judge, provider);
            if (rep.count(fusion::NodeOutcome::Kind::Inserted) || rep.count(fusion::NodeOutcome::Kind::KeptAsVariant) ||
                rep.count(fusion::EdgeOutcome::Kind::Added))
                fail(set, "second ingest reported changes");
        }
        if (hkg::graph_to_json(g) != once) fail(set, "second ingest changed the graph");
        if (g.node_count() > case_nodes) fail(set, fmt::format("{} nodes from {} case nodes", g.node_count(), case_nodes));
        for (const auto& e : g.edges())
            if (!testing::rule_admits(g.node(e.src), e.kind, g.node(e.dst)))
                fail(set, fmt::format("inadmissible edge {} -> {}", e.src, e.dst));
        if (!g.conformant()) fail(set, "graph not conformant");
        total_nodes += g.node_count();
        total_edges += g.edges().size();
    }
    return {failures == 0, fmt::format("sets=100 failures={} stored_nodes={} stored_edges={}{}", failures, total_nodes,
                                       total_edges, first.empty() ? "" : " first: " + first)};
}

struct Spawned {
    int code;
    std::string out;
};

Spawned spawn(const std::vector<std::string>& args, const fs::path& scratch) {
    std::string cmd = fmt::format("'{}'", EVOPOC_BIN);
    for (const auto& a : args) cmd += fmt::format(" '{}'", a);
    auto out_file = scratch / "stdout.json";
    cmd += fmt::format(" > '{}' 2> '{}'", out_file.string(), (scratch / "stderr.txt").string());
    int status = std::system(cmd.c_str());
    int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return {code, testing::read_text(out_file)};
}

fs::path scratch_dir(const std::string& name) {
    auto p = fs::temp_directory_path() / fmt::format("evopoc-acceptance-{}-{}", ::getpid(), name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::vector<std::string> analyze_args(const std::string& transcript, const fs::path& out) {
    return {"analyze", testing::fixture("bego").string(), "--env", testing::fixture("bego/env.json").string(),
            "--backend", "scripted:" + testing::fixture("bego/" + transcript).string(), "--out", out.string()};
}

Verdict pipeline_golden() {
    auto dir = scratch_dir("golden");
    auto r = spawn(analyze_args("transcript.json", dir), dir);
    json report = json::parse(r.out, nullptr, false);
    int iterations = report.is_object() && report.contains("iterations") ? report["iterations"].get<int>() : -1;
    auto poc_path = dir / "bego" / "Exploit.t.sol";
    std::string poc = fs::exists(poc_path) ? testing::read_text(poc_path) : "";
    bool mint = poc.find("BEGO.mint(M_raw, h, attacker, [], [], []);") != std::string::npos;
    bool assertion = poc.find("assertGt(wealthAfter, wealthBefore") != std::string::npos;
    return {r.code == 0 && iterations == 1 && mint && assertion,
            fmt::format("exit={} iterations={} mint_with_empty_arrays={} strict_increase_assert={}", r.code,
                        iterations, mint, assertion)};
}

Verdict iteration_cap() {
    auto dir = scratch_dir("cap");
    auto r = spawn(analyze_args("transcript_unprofitable.json", dir), dir);
    json report = json::parse(r.out, nullptr, false);
    int iterations = report.is_object() && report.contains("iterations") ? report["iterations"].get<int>() : -1;
    std::string reason = report.is_object() ? report.value("reason", "") : "";
    return {r.code == 5 && iterations == 5 && reason == "IterationBudgetExhausted",
            fmt::format("exit={} iterations={} reason={}", r.code, iterations, reason)};
}

Verdict fee_on_transfer() {
    auto r = simulate("fot/scenario.json");
    auto mismatch = testing::golden_mismatch(r, testing::read_json(testing::test_data("fot_trace_golden.json")));
    std::vector<std::string> labels;
    for (const auto& e : r.trace) labels.push_back(e.label);
    return {!mismatch && r.profitable(),
            fmt::format("delta_w={} golden={} steps=[{}]", profit::to_string(r.delta_w), mismatch.value_or("match"),
                        fmt::join(labels, ", "))};
}

Verdict validation_ordering() {
    auto env = pipeline::load_env(testing::fixture("bego/env.json"));
    // The random step pool also targets the vault, so the PoC needs its address.
    env.addresses["PausedVault"] = "0x1000000000000000000000000000000000000005";
    const auto& model = bego_model();
    int violations = 0, runs = 300, unreachable_iterations = 0, simulated = 0, successes = 0;
    std::string first;
    for (int seed = 0; seed < runs; ++seed) {
        testing::RandomPlanOracle oracle(seed);
        using K = pipeline::SynthesisEvent::Kind;
        int blocked_iteration = -1;
        pipeline::SynthesisOptions opt;
        opt.observer = [&](const pipeline::SynthesisEvent& e) {
            if (e.kind == K::ReachabilityChecked && !e.reachable) {
                blocked_iteration = e.iteration;
                ++unreachable_iterations;
            }
            if ((e.kind == K::ScriptGenerated || e.kind == K::Simulated) && e.iteration == blocked_iteration) {
                if (violations++ == 0) first = fmt::format("seed {} iteration {}", seed, e.iteration);
            }
            if (e.kind == K::Simulated) ++simulated;
        };
        auto o = pipeline::exploit_synthesis(memory::WorkingMemory{}, env, model, oracle, opt);
        if (auto* s = std::get_if<pipeline::SynthesisSuccess>(&o)) {
            ++successes;
            if (!reach::check_path_reachability(s->plan, env, model).reachable && violations++ == 0)
                first = fmt::format("seed {} succeeded on an unreachable plan", seed);
        }
    }
    bool exercised = unreachable_iterations > 0 && simulated > 0;
    return {violations == 0 && exercised,
            fmt::format("runs={} unreachable_iterations={} simulations={} successes={} violations={}{}", runs,
                        unreachable_iterations, simulated, successes, violations,
                        first.empty() ? "" : " first: " + first)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"1 BEGO reachability golden", bego_reachability},
        {"2 BEGO profitability golden", bego_profitability},
        {"3 solver vs brute-force enumeration", solver_equivalence},
        {"4 constant-product invariant", constant_product},
        {"5 fusion idempotence and monotonicity", fusion_idempotence},
        {"6 end-to-end pipeline golden", pipeline_golden},
        {"7 iteration cap", iteration_cap},
        {"8 fee-on-transfer scenario", fee_on_transfer},
        {"9 validation ordering", validation_ordering},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Verdict v{false, ""};
        try {
            v = check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        if (!v.pass) ++failed;
        std::cout << (v.pass ? "PASS" : "FAIL") << "  " << name << "  (" << v.detail << ")" << std::endl;
    }
    std::cout << (failed ? fmt::format("{} criteria failed", failed) : std::string("all criteria passed")) << std::endl;
    return failed ? 1 : 0;
}
