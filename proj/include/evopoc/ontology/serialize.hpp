#pragma once

#include "evopoc/ontology/graph.hpp"

#include <json.hpp>

#include <filesystem>

namespace evopoc::hkg {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

nlohmann::json node_to_json(const Node& n);
Node node_from_json(const nlohmann::json& j);
nlohmann::json edge_to_json(const Edge& e);
Edge edge_from_json(const nlohmann::json& j);

/// {nodes, edges} plus an `annotations` object carrying variant siblings and
/// specific-primitive flags when any are set.
nlohmann::json graph_to_json(const Graph& g);
Graph graph_from_json(const nlohmann::json& j);

Graph load_graph(const std::filesystem::path& path);
void save_graph(const Graph& g, const std::filesystem::path& path);

}  // namespace evopoc::hkg
