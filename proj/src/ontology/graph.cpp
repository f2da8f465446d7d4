#include "evopoc/ontology/graph.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace evopoc::hkg {

namespace {

bool is_tree_edge(EdgeKind k) { return k == EdgeKind::subsume || k == EdgeKind::implements; }

}  // namespace

std::string Graph::add_node(Node n) {
    if (n.id.empty()) {
        do n.id = fmt::format("n{}", next_id_++);
        while (nodes_.count(n.id));
    }
    validate_node(n);
    if (nodes_.count(n.id)) throw InvalidKind("duplicate node id '" + n.id + "'");
    auto id = n.id;
    nodes_.emplace(id, std::move(n));
    return id;
}

const Node& Graph::endpoint(const std::string& id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw MissingEndpoint("no node '" + id + "'");
    return it->second;
}

const Node& Graph::node(const std::string& id) const { return endpoint(id); }

Node& Graph::mutable_node(const std::string& id) {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw MissingEndpoint("no node '" + id + "'");
    return it->second;
}

bool Graph::add_edge(const Edge& e) {
    const Node& s = endpoint(e.src);
    const Node& d = endpoint(e.dst);
    if (edges_.count(e)) return false;
    auto reject = [&](const std::string& why) {
        throw InadmissibleEdge(fmt::format("{} {} -> {} {} ({}): {}", to_string(e.kind), to_string(s.kind), e.dst,
                                           to_string(d.kind), e.src, why));
    };
    if (e.src == e.dst) reject("self-loop");
    if (!admissible(s, e.kind, d)) reject("not in admissibility table");
    if (is_tree_edge(e.kind)) {
        for (const auto& in : in_[e.dst])
            if (is_tree_edge(in.kind) && in.src != e.src) reject("node already has parent '" + in.src + "'");
    }
    edges_.insert(e);
    out_[e.src].insert(e);
    in_[e.dst].insert(e);
    return true;
}

std::vector<Neighbor> Graph::neighbors(const std::string& id, Direction dir, const std::set<EdgeKind>& kinds) const {
    endpoint(id);
    std::vector<Neighbor> out;
    const auto& adj = dir == Direction::Out ? out_ : in_;
    auto it = adj.find(id);
    if (it == adj.end()) return out;
    for (const auto& e : it->second) {
        if (!kinds.empty() && !kinds.count(e.kind)) continue;
        out.push_back({e, &nodes_.at(dir == Direction::Out ? e.dst : e.src)});
    }
    // Edge order is (src, dst, kind); re-sort by kind, then the far endpoint.
    std::stable_sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
        if (a.edge.kind != b.edge.kind) return a.edge.kind < b.edge.kind;
        return a.node->id < b.node->id;
    });
    return out;
}

Graph Graph::subgraph(const std::set<std::string>& ids) const {
    Graph g;
    for (const auto& id : ids) g.nodes_.emplace(id, endpoint(id));
    for (const auto& e : edges_) {
        if (ids.count(e.src) && ids.count(e.dst)) {
            g.edges_.insert(e);
            g.out_[e.src].insert(e);
            g.in_[e.dst].insert(e);
        }
    }
    g.next_id_ = next_id_;
    return g;
}

bool Graph::conformant() const {
    std::map<std::string, std::string> parent;
    for (const auto& e : edges_) {
        auto s = nodes_.find(e.src);
        auto d = nodes_.find(e.dst);
        if (s == nodes_.end() || d == nodes_.end() || e.src == e.dst) return false;
        if (!admissible(s->second, e.kind, d->second)) return false;
        if (is_tree_edge(e.kind)) {
            auto [it, fresh] = parent.emplace(e.dst, e.src);
            if (!fresh && it->second != e.src) return false;
        }
    }
    return true;
}

}  // namespace evopoc::hkg
