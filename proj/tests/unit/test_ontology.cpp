#include "evopoc/ontology/serialize.hpp"
#include "support/fixtures.hpp"

#include <doctest.h>

using namespace evopoc;
using namespace evopoc::hkg;

namespace {

Node cs(std::string id, NodeKind kind, Granularity g, std::string desc = "x") {
    Node n;
    n.id = std::move(id);
    n.layer = Layer::ContractSemantics;
    n.kind = kind;
    n.granularity = g;
    n.description = std::move(desc);
    return n;
}

Node other(std::string id, NodeKind kind, std::string desc = "x") {
    Node n;
    n.id = std::move(id);
    n.layer = layer_of(kind);
    n.kind = kind;
    n.description = std::move(desc);
    return n;
}

}  // namespace

TEST_CASE("add_node validates layer, kind and description") {
    Graph g;
    auto id = g.add_node(cs("TokenWrapping", NodeKind::Protocol, Granularity::PrimaryCategory, "token wrapping"));
    CHECK(id == "TokenWrapping");
    CHECK(g.node("TokenWrapping").kind == NodeKind::Protocol);
    CHECK_THROWS_AS(g.add_node(cs("", NodeKind::Protocol, Granularity::PrimaryCategory, "  ")), InvalidKind);
    auto bad = cs("b", NodeKind::FailurePattern, Granularity::NotApplicable);
    CHECK_THROWS_AS(g.add_node(bad), InvalidKind);
    auto fp = other("fp", NodeKind::FailurePattern);
    fp.granularity = Granularity::SubCategory;
    CHECK_THROWS_AS(g.add_node(fp), InvalidKind);
    auto role = other("r", NodeKind::Skeleton);
    role.role = PrimitiveRole::Setup;
    CHECK_THROWS_AS(g.add_node(role), InvalidKind);
}

TEST_CASE("the store does not deduplicate") {
    Graph g;
    auto a = g.add_node(cs("", NodeKind::Protocol, Granularity::PrimaryCategory, "same"));
    auto b = g.add_node(cs("", NodeKind::Protocol, Granularity::PrimaryCategory, "same"));
    CHECK(a != b);
    CHECK(g.node_count() == 2);
}

TEST_CASE("admissibility table") {
    Graph g;
    g.add_node(cs("P", NodeKind::Protocol, Granularity::PrimaryCategory));
    g.add_node(cs("P2", NodeKind::Protocol, Granularity::SubCategory));
    g.add_node(cs("P3", NodeKind::Protocol, Granularity::ImplementLogic));
    g.add_node(cs("A", NodeKind::AccessControl, Granularity::PrimaryCategory));
    g.add_node(cs("E2", NodeKind::EconomicModel, Granularity::SubCategory));
    g.add_node(other("FP", NodeKind::FailurePattern));
    g.add_node(other("RC", NodeKind::RootCause));
    g.add_node(other("INV", NodeKind::InvariantViolation));
    g.add_node(other("SK", NodeKind::Skeleton));
    g.add_node(other("PR", NodeKind::Primitive));
    g.add_node(other("EX", NodeKind::Example));

    CHECK(g.add_edge({"P", "A", EdgeKind::enforces}));
    CHECK(g.add_edge({"FP", "RC", EdgeKind::caused_by}));
    CHECK_THROWS_AS(g.add_edge({"RC", "P", EdgeKind::leads_to}), InadmissibleEdge);
    CHECK(g.add_edge({"RC", "INV", EdgeKind::leads_to}));
    CHECK(g.add_edge({"P", "P2", EdgeKind::subsume}));
    CHECK(g.add_edge({"P2", "P3", EdgeKind::implements}));
    CHECK_THROWS_AS(g.add_edge({"P", "P3", EdgeKind::subsume}), InadmissibleEdge);
    CHECK_THROWS_AS(g.add_edge({"P", "E2", EdgeKind::subsume}), InadmissibleEdge);
    CHECK(g.add_edge({"P3", "FP", EdgeKind::related_exploit}));
    CHECK(g.add_edge({"RC", "SK", EdgeKind::related_exploit}));
    CHECK(g.add_edge({"RC", "PR", EdgeKind::related_exploit}));
    CHECK_THROWS_AS(g.add_edge({"RC", "EX", EdgeKind::related_exploit}), InadmissibleEdge);
    CHECK_THROWS_AS(g.add_edge({"FP", "SK", EdgeKind::related_exploit}), InadmissibleEdge);
    CHECK(g.add_edge({"SK", "PR", EdgeKind::start_at}));
    CHECK(g.add_edge({"SK", "EX", EdgeKind::illustrated_by}));
    CHECK_THROWS_AS(g.add_edge({"PR", "PR", EdgeKind::next}), InadmissibleEdge);
    CHECK_THROWS_AS(g.add_edge({"P", "nope", EdgeKind::enforces}), MissingEndpoint);
    // duplicates are no-ops
    CHECK_FALSE(g.add_edge({"P", "A", EdgeKind::enforces}));
    CHECK(g.conformant());
}

TEST_CASE("subsume forms a forest") {
    Graph g;
    g.add_node(cs("P1", NodeKind::Protocol, Granularity::PrimaryCategory));
    g.add_node(cs("P2", NodeKind::Protocol, Granularity::PrimaryCategory));
    g.add_node(cs("S", NodeKind::Protocol, Granularity::SubCategory));
    g.add_edge({"P1", "S", EdgeKind::subsume});
    CHECK_THROWS_AS(g.add_edge({"P2", "S", EdgeKind::subsume}), InadmissibleEdge);
}

TEST_CASE("neighbors on the fee-on-transfer fixture") {
    auto f = testing::fot_graph();
    auto out = f.graph.neighbors("FullTransferAssumption", Direction::Out, {EdgeKind::leads_to});
    REQUIRE(out.size() == 2);
    CHECK(out[0].node->id == "CollateralConsistency");
    CHECK(out[1].node->id == "Redeemability");

    // out and in together enumerate every incident edge
    for (const auto& [id, n] : f.graph.nodes()) {
        std::set<Edge> seen;
        for (const auto& nb : f.graph.neighbors(id, Direction::Out)) seen.insert(nb.edge);
        for (const auto& nb : f.graph.neighbors(id, Direction::In)) seen.insert(nb.edge);
        std::set<Edge> expected;
        for (const auto& e : f.graph.edges())
            if (e.src == id || e.dst == id) expected.insert(e);
        CHECK(seen == expected);
    }
    // ordered by edge kind, then far endpoint
    auto tw = f.graph.neighbors("TokenWrapping", Direction::Out);
    REQUIRE(tw.size() == 4);
    CHECK(tw[0].node->id == "PortalAdmin");
    CHECK(tw[3].node->id == "Portal");

    CHECK(f.graph.neighbors("FullTransferAssumption", Direction::Out, {EdgeKind::enforces}).empty());
    Graph lone;
    lone.add_node(other("x", NodeKind::Impact));
    CHECK(lone.neighbors("x", Direction::Out).empty());
    CHECK_THROWS_AS(lone.neighbors("y", Direction::In), MissingEndpoint);
}

TEST_CASE("induced subgraphs") {
    auto f = testing::fot_graph();
    std::set<std::string> all;
    for (const auto& [id, n] : f.graph.nodes()) all.insert(id);
    auto whole = f.graph.subgraph(all);
    CHECK(whole.edges() == f.graph.edges());
    CHECK(whole.node_count() == f.graph.node_count());
    CHECK(f.graph.subgraph({}).node_count() == 0);

    auto pair = f.graph.subgraph({"Portal", "DepositMint"});
    CHECK(pair.node_count() == 2);
    // brute-force filter
    std::set<Edge> expected;
    for (const auto& e : f.graph.edges())
        if ((e.src == "Portal" || e.src == "DepositMint") && (e.dst == "Portal" || e.dst == "DepositMint"))
            expected.insert(e);
    CHECK(pair.edges() == expected);
    CHECK(expected.size() == 1);
    CHECK_THROWS_AS(f.graph.subgraph({"missing"}), MissingEndpoint);
}

TEST_CASE("serialization round trip") {
    auto f = testing::fot_graph();
    f.graph.mutable_node("RepeatedDeposits").specific = true;
    f.graph.mutable_node("Redeemability").variant_of = "CollateralConsistency";
    auto doc = graph_to_json(f.graph);
    for (const auto& n : doc["nodes"]) {
        std::set<std::string> keys;
        for (const auto& [k, v] : n.items()) keys.insert(k);
        keys.erase("embedding");
        CHECK(keys == std::set<std::string>{"id", "layer", "kind", "granularity", "role", "description", "provenance"});
    }
    auto back = graph_from_json(doc);
    CHECK(back.edges() == f.graph.edges());
    REQUIRE(back.node_count() == f.graph.node_count());
    for (const auto& [id, n] : f.graph.nodes()) {
        const auto& m = back.node(id);
        CHECK(m.description == n.description);
        CHECK(m.provenance == n.provenance);
        CHECK(m.granularity == n.granularity);
        CHECK(m.role == n.role);
        CHECK(m.specific == n.specific);
        CHECK(m.variant_of == n.variant_of);
        CHECK(m.embedding == n.embedding);
    }
    CHECK(graph_to_json(back) == doc);
    CHECK_THROWS_AS(graph_from_json(nlohmann::json{{"nodes", {{{"id", "x"}}}}, {"edges", nlohmann::json::array()}}),
                    FormatError);
}
