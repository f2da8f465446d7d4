#pragma once

#include "evopoc/ontology/types.hpp"

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace evopoc::hkg {

enum class Direction { Out, In };

struct Neighbor {
    Edge edge;
    const Node* node = nullptr;  // the endpoint opposite the queried node
};

/// Typed graph store. Enforces node validity, edge admissibility, and the
/// single-parent rule for subsume/implements. Not synchronized: concurrent
/// readers are fine, writers need exclusive access.
class Graph {
public:
    /// Inserts `n`. An empty id is replaced by a fresh opaque one. Returns the id.
    std::string add_node(Node n);
    /// Adds `e`; re-adding an existing triple is a no-op. Returns true when
    /// the edge is new.
    bool add_edge(const Edge& e);

    bool contains(const std::string& id) const { return nodes_.count(id) != 0; }
    bool has_edge(const Edge& e) const { return edges_.count(e) != 0; }
    const Node& node(const std::string& id) const;
    Node& mutable_node(const std::string& id);

    const std::map<std::string, Node>& nodes() const { return nodes_; }
    const std::set<Edge>& edges() const { return edges_; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    /// Incident edges in `dir` whose kind is in `kinds` (all kinds when
    /// empty), ordered by edge kind then opposite endpoint id.
    std::vector<Neighbor> neighbors(const std::string& id, Direction dir, const std::set<EdgeKind>& kinds = {}) const;

    /// Induced subgraph on `ids`.
    Graph subgraph(const std::set<std::string>& ids) const;

    /// Full scan: every stored edge admissible and the subsume/implements
    /// forest intact.
    bool conformant() const;

private:
    const Node& endpoint(const std::string& id) const;

    std::map<std::string, Node> nodes_;
    std::set<Edge> edges_;
    std::map<std::string, std::set<Edge>> out_;
    std::map<std::string, std::set<Edge>> in_;
    std::size_t next_id_ = 1;
};

}  // namespace evopoc::hkg
