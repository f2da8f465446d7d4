#include "evopoc/memory/working_memory.hpp"
#include "support/fixtures.hpp"

#include <doctest.h>

using namespace evopoc;
using namespace evopoc::memory;
using hkg::Layer;

namespace {

ContractContext portal_ctx() {
    auto golden = testing::read_json(testing::test_data("embedding_golden.json"));
    return {golden["portal_summary"].get<std::string>(), {}, "fixture"};
}

ScriptedRelevance fot_transcript() {
    return ScriptedRelevance(transcript_from_json(testing::read_json(testing::fixture("fot/relevance.json"))));
}

std::vector<std::string> sorted(std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    return v;
}

class RejectAll final : public RelevanceOracle {
public:
    RelevanceVerdict judge(const ContractContext&, const WorkingMemory&, const hkg::Node&, int) override {
        ++calls;
        return {false, 0.0, "no"};
    }
    std::optional<std::string> select(const ContractContext&, const WorkingMemory&, Layer,
                                      const std::vector<fusion::Scored>&) override {
        ++selects;
        return std::nullopt;
    }
    int calls = 0;
    int selects = 0;
};

}  // namespace

TEST_CASE("seed retrieval ranks protocol primary categories") {
    auto f = testing::fot_graph();
    auto golden = testing::read_json(testing::test_data("embedding_golden.json"));
    auto seeds = seed_retrieval(f.graph, f.index, f.provider, portal_ctx(), 10);
    std::vector<std::string> ids;
    for (const auto& s : seeds) ids.push_back(s.id);
    CHECK(ids == golden["seed_ranking"].get<std::vector<std::string>>());
    CHECK(ids.front() == "TokenWrapping");

    hkg::Graph empty;
    fusion::VectorIndex none;
    CHECK(seed_retrieval(empty, none, f.provider, portal_ctx(), 3).empty());
}

TEST_CASE("working memory reproduces the fee-on-transfer retrieval") {
    auto f = testing::fot_graph();
    auto oracle = fot_transcript();
    auto wm = build_working_memory(f.graph, f.index, f.provider, portal_ctx(), oracle);
    CHECK(wm.complete());
    CHECK_FALSE(wm.stalled_at);
    CHECK(oracle.remaining() == 0);
    CHECK(sorted(wm.accepted[Layer::ContractSemantics]) ==
          sorted({"TokenWrapping", "Portal", "DepositMint", "AssetBacking", "DeterministicMinting", "BalanceDeltaBased",
                  "ERC20Token", "NonStandardERC20", "FeeOnTransfer"}));
    CHECK(sorted(wm.accepted[Layer::FailureMode]) ==
          sorted({"ERC20Incompatibility", "AccountingMismatch", "FullTransferAssumption", "CollateralConsistency",
                  "Redeemability", "OverMinting", "DoS"}));
    CHECK(sorted(wm.accepted[Layer::ExploitPrimitive]) ==
          sorted({"DepositWithdrawCycle", "TokenDeployment", "TokenRegistration", "RepeatedDeposits",
                  "RepeatedWithdrawals"}));

    // every candidate evaluated once
    std::set<std::string> seen;
    for (const auto& t : wm.trace) CHECK(seen.insert(t.candidate).second);

    // every accepted node is a seed or a neighbour of an earlier acceptance
    std::set<std::string> accepted_so_far;
    for (const auto& t : wm.trace) {
        if (!t.keep) continue;
        if (t.via.rfind("neighbor:", 0) == 0) CHECK(accepted_so_far.count(t.via.substr(9)));
        accepted_so_far.insert(t.candidate);
    }

    // sparse transition into the failure layer: 3 of 4 informed sources
    auto fm_seed = std::find_if(wm.trace.begin(), wm.trace.end(), [](const TraceEntry& t) { return t.via == "sparse"; });
    REQUIRE(fm_seed != wm.trace.end());
    CHECK(fm_seed->candidate == "AccountingMismatch");
    CHECK(fm_seed->confidence == doctest::Approx(0.75));

    // deterministic
    auto again_oracle = fot_transcript();
    auto again = build_working_memory(f.graph, f.index, f.provider, portal_ctx(), again_oracle);
    CHECK(to_json(again) == to_json(wm));
}

TEST_CASE("rejecting oracle leaves only trace entries") {
    auto f = testing::fot_graph();
    WorkingMemory wm;
    wm.accepted[Layer::ContractSemantics] = {"TokenWrapping"};
    wm.trace.push_back({"TokenWrapping", Layer::ContractSemantics, true, 1.0, "", 0, "seed"});
    wm.frontier.emplace_back("TokenWrapping", 0);
    RejectAll oracle;
    expand_layer(f.graph, wm, Layer::ContractSemantics, portal_ctx(), oracle);
    CHECK(wm.accepted[Layer::ContractSemantics] == std::vector<std::string>{"TokenWrapping"});
    CHECK(oracle.calls == 4);
    CHECK(wm.trace.size() == 5);
    // already evaluated candidates are not re-queried
    wm.frontier.emplace_back("TokenWrapping", 0);
    expand_layer(f.graph, wm, Layer::ContractSemantics, portal_ctx(), oracle);
    CHECK(oracle.calls == 4);
}

TEST_CASE("hop budget bounds expansion") {
    auto f = testing::fot_graph();
    WorkingMemory wm;
    wm.accepted[Layer::ExploitPrimitive] = {"DepositWithdrawCycle"};
    wm.trace.push_back({"DepositWithdrawCycle", Layer::ExploitPrimitive, true, 1.0, "", 0, "seed"});
    wm.frontier.emplace_back("DepositWithdrawCycle", 0);
    ScriptedRelevance keep_all({{"*", true, 1.0, ""}, {"*", true, 1.0, ""}, {"*", true, 1.0, ""},
                                {"*", true, 1.0, ""}, {"*", true, 1.0, ""}});
    MemoryOptions opts;
    opts.hop_budget = 2;
    expand_layer(f.graph, wm, Layer::ExploitPrimitive, portal_ctx(), keep_all, opts);
    // hop 1: TokenDeployment, example; hop 2: TokenRegistration
    CHECK(wm.accepted[Layer::ExploitPrimitive].size() == 4);
    CHECK(keep_all.remaining() == 2);
}

TEST_CASE("cross-layer transition: sparse confidence, ties and dense fallback") {
    // crafted graph: two CS sources voting for two failure patterns equally
    hkg::Graph g;
    fusion::HashedEmbedding e;
    auto add = [&](std::string id, hkg::NodeKind kind, std::string desc) {
        hkg::Node n;
        n.id = std::move(id);
        n.layer = hkg::layer_of(kind);
        n.kind = kind;
        n.granularity = n.layer == Layer::ContractSemantics ? hkg::Granularity::PrimaryCategory
                                                           : hkg::Granularity::NotApplicable;
        n.description = std::move(desc);
        n.embedding = e.embed(n.description);
        g.add_node(n);
    };
    add("S1", hkg::NodeKind::Protocol, "vault deposits");
    add("S2", hkg::NodeKind::Dependency, "oracle feed");
    add("FA", hkg::NodeKind::FailurePattern, "rounding error in share price");
    add("FB", hkg::NodeKind::FailurePattern, "vault deposits oracle feed manipulation");
    add("FC", hkg::NodeKind::FailurePattern, "vault deposits oracle feed manipulation");
    g.add_edge({"S1", "FA", hkg::EdgeKind::related_exploit});
    g.add_edge({"S2", "FB", hkg::EdgeKind::related_exploit});
    auto index = fusion::VectorIndex::build(g, e);
    ContractContext ctx{"vault deposits oracle feed", {}, ""};

    WorkingMemory wm;
    wm.accepted[Layer::ContractSemantics] = {"S1", "S2"};
    auto q = e.embed("vault deposits oracle feed\nvault deposits\noracle feed");
    auto scores = sparse_scores(g, wm, Layer::ContractSemantics, Layer::FailureMode, q);
    REQUIRE(scores.size() == 2);
    CHECK(scores[0].confidence == doctest::Approx(0.5));
    CHECK(scores[1].confidence == doctest::Approx(0.5));
    // equal confidence: higher dense similarity first
    CHECK(scores[0].similarity > scores[1].similarity);
    CHECK(scores[0].id == "FB");

    // equal confidence and similarity: lexicographic id
    g.add_edge({"S1", "FC", hkg::EdgeKind::related_exploit});
    g.add_edge({"S2", "FC", hkg::EdgeKind::related_exploit});
    g.add_edge({"S1", "FB", hkg::EdgeKind::related_exploit});
    scores = sparse_scores(g, wm, Layer::ContractSemantics, Layer::FailureMode, q);
    CHECK(scores[0].id == "FB");
    CHECK(scores[1].id == "FC");
    CHECK(scores[0].confidence == doctest::Approx(1.0));

    RejectAll oracle;
    auto seed = cross_layer_transition(g, index, e, wm, Layer::FailureMode, ctx, oracle);
    CHECK(seed == std::optional<std::string>("FB"));
    CHECK(oracle.selects == 0);

    // no cross-layer edges at all: dense phase runs and is visible in the trace
    WorkingMemory lonely;
    add("S3", hkg::NodeKind::AccessControl, "owner only");
    lonely.accepted[Layer::ContractSemantics] = {"S3"};
    auto idx2 = fusion::VectorIndex::build(g, e);
    ScriptedRelevance pick({{"FC", true, 0.6, "closest"}});
    auto dense = cross_layer_transition(g, idx2, e, lonely, Layer::FailureMode, ctx, pick);
    CHECK(dense == std::optional<std::string>("FC"));
    CHECK(std::all_of(lonely.trace.begin(), lonely.trace.end(), [](const TraceEntry& t) { return t.via == "dense"; }));
    CHECK(lonely.trace.size() == 3);
}

TEST_CASE("partial results and missing seeds") {
    auto f = testing::fot_graph();
    ScriptedRelevance cs_only({{"TokenWrapping", true, 0.9, ""}});
    RejectAll reject;
    auto wm = build_working_memory(f.graph, f.index, f.provider, portal_ctx(), reject);
    CHECK(wm.stalled_at == std::optional<Layer>(Layer::ContractSemantics));

    // keep the protocol layer, reject the dense failure-mode choice: TokenWrapping alone has no
    // cross-layer edge, so the transition falls back to dense selection, which the oracle declines
    auto wm2 = build_working_memory(f.graph, f.index, f.provider, portal_ctx(), cs_only);
    CHECK(wm2.stalled_at == std::optional<Layer>(Layer::FailureMode));
    CHECK(wm2.accepted[Layer::ContractSemantics] == std::vector<std::string>{"TokenWrapping"});

    hkg::Graph empty;
    fusion::VectorIndex none;
    CHECK_THROWS_AS(build_working_memory(empty, none, f.provider, portal_ctx(), reject), NoSeedFound);
}

TEST_CASE("transcript parsing") {
    CHECK_THROWS(transcript_from_json(nlohmann::json::parse(R"([{"match":"a","keep":true}])")));
    CHECK_THROWS(transcript_from_json(nlohmann::json::parse(R"([{"match":"a","keep":true,"confidence":2}])")));
    auto t = transcript_from_json(nlohmann::json::parse(R"([{"match":"Fee*","keep":false}])"));
    CHECK(glob_match(t[0].match, "FeeOnTransfer"));
    CHECK_FALSE(glob_match(t[0].match, "NoFee"));
}
