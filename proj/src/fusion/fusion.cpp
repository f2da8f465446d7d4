#include "evopoc/fusion/fusion.hpp"

#include "evopoc/ontology/serialize.hpp"

#include <fmt/format.h>

#include <fstream>
#include <map>

namespace evopoc::fusion {

using hkg::Edge;
using hkg::EdgeKind;
using hkg::Graph;
using hkg::Node;
using nlohmann::json;

Verdict ThresholdJudge::judge(const Node& incoming, const Node& existing, double similarity) {
    if (incoming.kind != existing.kind) return Verdict::Distinct;
    if (similarity >= tau_) return incoming.granularity == existing.granularity ? Verdict::Equivalent : Verdict::Variant;
    if (similarity >= floor_) return Verdict::Variant;
    return Verdict::Distinct;
}

std::size_t FusionReport::count(NodeOutcome::Kind k) const {
    std::size_t n = 0;
    for (const auto& o : nodes) n += o.kind == k;
    return n;
}

std::size_t FusionReport::count(EdgeOutcome::Kind k) const {
    std::size_t n = 0;
    for (const auto& o : edges) n += o.kind == k;
    return n;
}

std::string_view to_string(NodeOutcome::Kind k) {
    switch (k) {
        case NodeOutcome::Kind::Inserted: return "Inserted";
        case NodeOutcome::Kind::MergedInto: return "MergedInto";
        case NodeOutcome::Kind::KeptAsVariant: return "KeptAsVariant";
    }
    return "?";
}

std::string_view to_string(EdgeOutcome::Kind k) {
    switch (k) {
        case EdgeOutcome::Kind::Added: return "Added";
        case EdgeOutcome::Kind::AlreadyPresent: return "AlreadyPresent";
        case EdgeOutcome::Kind::Deferred: return "Deferred";
        case EdgeOutcome::Kind::Conflict: return "Conflict";
    }
    return "?";
}

namespace {

std::string fresh_id(const Graph& g, const std::string& wanted) {
    if (!wanted.empty() && !g.contains(wanted)) return wanted;
    for (int i = 2;; ++i) {
        auto id = fmt::format("{}#{}", wanted.empty() ? "n" : wanted, i);
        if (!g.contains(id)) return id;
    }
}

bool is_tree_edge(EdgeKind k) { return k == EdgeKind::subsume || k == EdgeKind::implements; }

// Parent already recorded for `dst` through a tree edge, other than `src`.
std::string conflicting_parent(const Graph& g, const Edge& e) {
    if (!is_tree_edge(e.kind)) return {};
    for (const auto& nb : g.neighbors(e.dst, hkg::Direction::In, {EdgeKind::subsume, EdgeKind::implements}))
        if (nb.edge.src != e.src) return nb.edge.src;
    return {};
}

}  // namespace

FusionReport ingest_case(Graph& g, VectorIndex& index, const CaseSubgraph& c, EquivalenceJudge& judge,
                         const EmbeddingProvider& provider, const FusionOptions& options) {
    FusionReport report;
    report.case_id = c.case_id;
    std::map<std::string, std::string> resolved;  // case node id -> stored id

    for (const auto& original : c.nodes) {
        Node n = original;
        if (!c.import) {
            if (!n.provenance.empty() && n.provenance != std::set<std::string>{c.case_id})
                throw MalformedCase(fmt::format("node '{}' carries provenance from another case", n.id));
            n.provenance = {c.case_id};
            n.variant_of.reset();
        } else if (n.provenance.empty()) {
            throw MalformedCase(fmt::format("imported node '{}' has no provenance", n.id));
        }
        try {
            hkg::validate_node(n);
        } catch (const hkg::InvalidKind& e) {
            throw MalformedCase(e.what());
        }
        if (resolved.count(n.id)) throw MalformedCase(fmt::format("duplicate node id '{}' in case", n.id));

        auto vec = provider.embed(n.description);
        auto candidates = index.topk({n.layer, n.kind, std::nullopt}, vec, options.k);
        const Scored* equivalent = nullptr;
        const Scored* variant = nullptr;
        for (const auto& cand : candidates) {
            auto v = judge.judge(n, g.node(cand.id), cand.similarity);
            if (v == Verdict::Equivalent) {
                equivalent = &cand;
                break;
            }
            if (v == Verdict::Variant && !variant) variant = &cand;
        }

        NodeOutcome out;
        out.case_node = n.id;
        if (equivalent) {
            Node& target = g.mutable_node(equivalent->id);
            target.provenance.insert(n.provenance.begin(), n.provenance.end());
            target.specific = target.specific || n.specific;
            out.kind = NodeOutcome::Kind::MergedInto;
            out.target = equivalent->id;
        } else {
            if (c.import) {
                // Keep the recorded sibling when it is already stored.
                if (n.variant_of && !g.contains(*n.variant_of)) n.variant_of.reset();
            } else if (variant) {
                n.variant_of = variant->id;
            }
            out.kind = n.variant_of ? NodeOutcome::Kind::KeptAsVariant : NodeOutcome::Kind::Inserted;
            if (n.variant_of) out.sibling = *n.variant_of;
            n.id = fresh_id(g, n.id);
            n.embedding = vec;
            out.target = g.add_node(n);
            index.insert(g.node(out.target), vec);
        }
        resolved[original.id] = out.target;
        report.nodes.push_back(std::move(out));
    }

    auto resolve = [&](const std::string& id) -> std::string {
        if (auto it = resolved.find(id); it != resolved.end()) return it->second;
        if (g.contains(id)) return id;
        return {};
    };
    for (const auto& e : c.edges) {
        EdgeOutcome out;
        out.input = e;
        auto src = resolve(e.src);
        auto dst = resolve(e.dst);
        if (src.empty() || dst.empty()) {
            out.kind = EdgeOutcome::Kind::Deferred;
            out.detail = src.empty() ? e.src : e.dst;
            report.edges.push_back(std::move(out));
            continue;
        }
        Edge mapped{src, dst, e.kind};
        if (g.has_edge(mapped)) {
            out.kind = EdgeOutcome::Kind::AlreadyPresent;
        } else if (auto parent = conflicting_parent(g, mapped); !parent.empty()) {
            out.kind = EdgeOutcome::Kind::Conflict;
            out.detail = parent;
        } else if (src == dst) {
            // Both endpoints collapsed onto one stored node.
            out.kind = EdgeOutcome::Kind::Conflict;
            out.detail = src;
        } else {
            g.add_edge(mapped);
            out.kind = EdgeOutcome::Kind::Added;
        }
        report.edges.push_back(std::move(out));
    }
    return report;
}

CaseSubgraph case_from_json(const json& j) {
    if (!j.is_object() || !j.contains("nodes") || !j.contains("edges"))
        throw MalformedCase("case document needs nodes and edges");
    CaseSubgraph c;
    c.import = !j.contains("case_id");
    if (!c.import) {
        if (!j.at("case_id").is_string() || j.at("case_id").get<std::string>().empty())
            throw MalformedCase("case_id must be a non-empty string");
        c.case_id = j.at("case_id").get<std::string>();
    } else {
        c.case_id = "import";
    }
    try {
        if (!j.at("nodes").is_array() || !j.at("edges").is_array())
            throw MalformedCase("nodes and edges must be arrays");
        std::map<std::string, std::size_t> pos;
        for (const auto& n : j.at("nodes")) {
            c.nodes.push_back(hkg::node_from_json(n));
            pos[c.nodes.back().id] = c.nodes.size() - 1;
        }
        for (const auto& e : j.at("edges")) c.edges.push_back(hkg::edge_from_json(e));
        if (j.contains("annotations")) {
            const auto& a = j.at("annotations");
            for (const auto& id : a.value("specific", json::array())) {
                if (!id.is_string() || !pos.count(id.get<std::string>()))
                    throw MalformedCase("specific annotation references unknown node " + id.dump());
                c.nodes[pos[id.get<std::string>()]].specific = true;
            }
            if (c.import) {
                for (const auto& pair : a.value("variants", json::array())) {
                    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string() ||
                        !pos.count(pair[0].get<std::string>()))
                        throw MalformedCase("malformed variant annotation " + pair.dump());
                    c.nodes[pos[pair[0].get<std::string>()]].variant_of = pair[1].get<std::string>();
                }
            }
        }
    } catch (const hkg::FormatError& e) {
        throw MalformedCase(e.what());
    } catch (const hkg::InvalidKind& e) {
        throw MalformedCase(e.what());
    }
    return c;
}

CaseSubgraph load_case(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MalformedCase("cannot open " + path.string());
    try {
        return case_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw MalformedCase(path.string() + ": " + e.what());
    }
}

json report_to_json(const FusionReport& r) {
    json nodes = json::array();
    for (const auto& o : r.nodes) {
        json n = {{"node", o.case_node}, {"outcome", to_string(o.kind)}, {"target", o.target}};
        if (!o.sibling.empty()) n["sibling"] = o.sibling;
        nodes.push_back(std::move(n));
    }
    json edges = json::array();
    for (const auto& o : r.edges) {
        json e = hkg::edge_to_json(o.input);
        e["outcome"] = to_string(o.kind);
        if (!o.detail.empty()) e["detail"] = o.detail;
        edges.push_back(std::move(e));
    }
    return {{"case_id", r.case_id},
            {"inserted", r.count(NodeOutcome::Kind::Inserted)},
            {"merged", r.count(NodeOutcome::Kind::MergedInto)},
            {"variants", r.count(NodeOutcome::Kind::KeptAsVariant)},
            {"edges_added", r.count(EdgeOutcome::Kind::Added)},
            {"edges_present", r.count(EdgeOutcome::Kind::AlreadyPresent)},
            {"edges_deferred", r.count(EdgeOutcome::Kind::Deferred)},
            {"edges_conflict", r.count(EdgeOutcome::Kind::Conflict)},
            {"nodes", std::move(nodes)},
            {"edges", std::move(edges)}};
}

}  // namespace evopoc::fusion
