#pragma once

// Random ontology-conformant case sets. Edge admissibility is restated here
// from the ontology's relation list rather than taken from the library, so
// the full-scan check does not lean on the code under test.

#include "evopoc/fusion/fusion.hpp"

#include <random>
#include <string>
#include <vector>

namespace evopoc::testing {

struct EdgeRule {
    hkg::NodeKind src;
    hkg::EdgeKind kind;
    hkg::NodeKind dst;
    // subsume: Primary -> Sub; implements: Sub -> Implement, same kind.
};

inline const std::vector<EdgeRule>& edge_rules() {
    using K = hkg::NodeKind;
    using E = hkg::EdgeKind;
    static const std::vector<EdgeRule> rules = [] {
        std::vector<EdgeRule> r = {
            {K::Protocol, E::enforces, K::AccessControl},     {K::Protocol, E::adopts, K::EconomicModel},
            {K::Protocol, E::depends_on, K::Dependency},      {K::FailurePattern, E::caused_by, K::RootCause},
            {K::FailurePattern, E::needs, K::Condition},      {K::FailurePattern, E::can_cause, K::Impact},
            {K::RootCause, E::leads_to, K::InvariantViolation}, {K::Skeleton, E::start_at, K::Primitive},
            {K::Primitive, E::next, K::Primitive},            {K::Skeleton, E::illustrated_by, K::Example},
            {K::RootCause, E::related_exploit, K::Skeleton},  {K::RootCause, E::related_exploit, K::Primitive},
        };
        for (K k : {K::Protocol, K::AccessControl, K::EconomicModel, K::Dependency}) {
            r.push_back({k, E::subsume, k});
            r.push_back({k, E::implements, k});
            r.push_back({k, E::related_exploit, K::FailurePattern});
        }
        return r;
    }();
    return rules;
}

inline bool rule_admits(const hkg::Node& s, hkg::EdgeKind kind, const hkg::Node& d) {
    using G = hkg::Granularity;
    for (const auto& r : edge_rules()) {
        if (r.kind != kind || r.src != s.kind || r.dst != d.kind) continue;
        if (kind == hkg::EdgeKind::subsume) return s.granularity == G::PrimaryCategory && d.granularity == G::SubCategory;
        if (kind == hkg::EdgeKind::implements)
            return s.granularity == G::SubCategory && d.granularity == G::ImplementLogic;
        return true;
    }
    return false;
}

class CaseGenerator {
public:
    explicit CaseGenerator(std::uint64_t seed) : rng_(seed) {}

    fusion::CaseSubgraph next(const std::string& case_id) {
        using K = hkg::NodeKind;
        using L = hkg::Layer;
        static const std::vector<std::pair<K, L>> kinds = {
            {K::Protocol, L::ContractSemantics},      {K::AccessControl, L::ContractSemantics},
            {K::EconomicModel, L::ContractSemantics}, {K::Dependency, L::ContractSemantics},
            {K::FailurePattern, L::FailureMode},      {K::Condition, L::FailureMode},
            {K::Impact, L::FailureMode},              {K::RootCause, L::FailureMode},
            {K::InvariantViolation, L::FailureMode},  {K::Skeleton, L::ExploitPrimitive},
            {K::Primitive, L::ExploitPrimitive},      {K::Example, L::ExploitPrimitive},
        };
        static const std::vector<std::string> words = {"token", "mint",   "fee",    "pool",  "oracle", "owner",
                                                       "swap",  "reward", "burn",   "price", "loan",   "vault"};
        fusion::CaseSubgraph c;
        c.case_id = case_id;
        const int n = pick(3, 12);
        for (int i = 0; i < n; ++i) {
            hkg::Node node;
            node.id = "n" + std::to_string(i);
            auto [k, l] = kinds[pick(0, (int)kinds.size() - 1)];
            node.kind = k;
            node.layer = l;
            if (l == L::ContractSemantics)
                node.granularity = static_cast<hkg::Granularity>(pick(0, 2));
            if (k == K::Primitive) node.role = static_cast<hkg::PrimitiveRole>(pick(0, 3));
            // A small vocabulary so that cases overlap.
            node.description = words[pick(0, 3)] + " " + words[pick(4, 7)] + " " + words[pick(8, 11)];
            c.nodes.push_back(node);
        }
        std::vector<bool> has_parent(n, false);
        const int tries = pick(n, 3 * n);
        for (int t = 0; t < tries; ++t) {
            int a = pick(0, n - 1), b = pick(0, n - 1);
            if (a == b) continue;
            std::vector<hkg::EdgeKind> ok;
            for (const auto& r : edge_rules())
                if (rule_admits(c.nodes[a], r.kind, c.nodes[b])) ok.push_back(r.kind);
            if (ok.empty()) continue;
            auto kind = ok[pick(0, (int)ok.size() - 1)];
            bool tree = kind == hkg::EdgeKind::subsume || kind == hkg::EdgeKind::implements;
            if (tree && has_parent[b]) continue;
            hkg::Edge e{c.nodes[a].id, c.nodes[b].id, kind};
            bool dup = false;
            for (const auto& x : c.edges) dup = dup || x == e;
            if (dup) continue;
            if (tree) has_parent[b] = true;
            c.edges.push_back(e);
        }
        return c;
    }

private:
    int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    std::mt19937_64 rng_;
};

}  // namespace evopoc::testing
