#include "evopoc/ontology/serialize.hpp"

#include <fstream>

namespace evopoc::hkg {

using nlohmann::json;

namespace {

const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
    return j.at(key);
}

std::string string_field(const json& j, const char* key) {
    const auto& v = field(j, key);
    if (!v.is_string()) throw FormatError(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

}  // namespace

json node_to_json(const Node& n) {
    json j = {
        {"id", n.id},
        {"layer", to_string(n.layer)},
        {"kind", to_string(n.kind)},
        {"granularity", to_string(n.granularity)},
        {"role", to_string(n.role)},
        {"description", n.description},
        {"provenance", n.provenance},
    };
    if (n.embedding) j["embedding"] = *n.embedding;
    return j;
}

Node node_from_json(const json& j) {
    static const std::set<std::string> known = {"id",   "layer",       "kind",       "granularity",
                                                "role", "description", "provenance", "embedding"};
    if (!j.is_object()) throw FormatError("node record must be an object");
    for (const auto& [k, v] : j.items())
        if (!known.count(k)) throw FormatError("unknown node field '" + k + "'");
    Node n;
    n.id = string_field(j, "id");
    n.layer = parse_layer(string_field(j, "layer"));
    n.kind = parse_node_kind(string_field(j, "kind"));
    n.granularity = j.contains("granularity") ? parse_granularity(string_field(j, "granularity"))
                                              : Granularity::NotApplicable;
    n.role = j.contains("role") ? parse_role(string_field(j, "role")) : PrimitiveRole::NotApplicable;
    n.description = string_field(j, "description");
    if (j.contains("provenance")) {
        const auto& p = j.at("provenance");
        if (!p.is_array()) throw FormatError("provenance must be an array");
        for (const auto& c : p) {
            if (!c.is_string()) throw FormatError("provenance entries must be strings");
            n.provenance.insert(c.get<std::string>());
        }
    }
    if (j.contains("embedding")) {
        const auto& e = j.at("embedding");
        if (!e.is_array()) throw FormatError("embedding must be an array");
        Embedding v;
        for (const auto& x : e) {
            if (!x.is_number()) throw FormatError("embedding entries must be numbers");
            v.push_back(x.get<double>());
        }
        n.embedding = std::move(v);
    }
    return n;
}

json edge_to_json(const Edge& e) { return {{"src", e.src}, {"dst", e.dst}, {"kind", to_string(e.kind)}}; }

Edge edge_from_json(const json& j) {
    if (!j.is_object()) throw FormatError("edge record must be an object");
    return {string_field(j, "src"), string_field(j, "dst"), parse_edge_kind(string_field(j, "kind"))};
}

json graph_to_json(const Graph& g) {
    json nodes = json::array();
    json variants = json::array();
    json specific = json::array();
    for (const auto& [id, n] : g.nodes()) {
        nodes.push_back(node_to_json(n));
        if (n.variant_of) variants.push_back({id, *n.variant_of});
        if (n.specific) specific.push_back(id);
    }
    json edges = json::array();
    for (const auto& e : g.edges()) edges.push_back(edge_to_json(e));
    json doc = {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
    if (!variants.empty() || !specific.empty())
        doc["annotations"] = {{"variants", std::move(variants)}, {"specific", std::move(specific)}};
    return doc;
}

Graph graph_from_json(const json& j) {
    const auto& nodes = field(j, "nodes");
    const auto& edges = field(j, "edges");
    if (!nodes.is_array() || !edges.is_array()) throw FormatError("nodes and edges must be arrays");
    std::vector<Node> parsed;
    for (const auto& n : nodes) parsed.push_back(node_from_json(n));
    if (j.contains("annotations")) {
        const auto& a = j.at("annotations");
        std::map<std::string, Node*> by_id;
        for (auto& n : parsed) by_id[n.id] = &n;
        auto lookup = [&](const json& id) -> Node& {
            if (!id.is_string() || !by_id.count(id.get<std::string>()))
                throw FormatError("annotation references unknown node " + id.dump());
            return *by_id[id.get<std::string>()];
        };
        for (const auto& pair : a.value("variants", json::array())) {
            if (!pair.is_array() || pair.size() != 2) throw FormatError("variant annotation must be [id, sibling]");
            lookup(pair[1]);
            lookup(pair[0]).variant_of = pair[1].get<std::string>();
        }
        for (const auto& id : a.value("specific", json::array())) lookup(id).specific = true;
    }
    Graph g;
    for (auto& n : parsed) g.add_node(std::move(n));
    for (const auto& e : edges) g.add_edge(edge_from_json(e));
    return g;
}

Graph load_graph(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return graph_from_json(j);
}

void save_graph(const Graph& g, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw FormatError("cannot write " + tmp.string());
        out << graph_to_json(g).dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace evopoc::hkg
