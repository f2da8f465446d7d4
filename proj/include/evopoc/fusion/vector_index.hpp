#pragma once

#include "evopoc/fusion/embedding.hpp"
#include "evopoc/ontology/graph.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace evopoc::fusion {

struct TypeFilter {
    hkg::Layer layer;
    hkg::NodeKind kind;
    std::optional<hkg::Granularity> granularity;
};

struct Scored {
    std::string id;
    double similarity = 0;
};

/// Exact cosine index partitioned by (layer, kind). The type filter is
/// applied before any similarity is computed.
class VectorIndex {
public:
    void insert(const hkg::Node& n, Embedding v);
    void erase(const std::string& id);
    bool contains(const std::string& id) const { return where_.count(id) != 0; }
    std::size_t size() const { return where_.size(); }

    /// Descending similarity, ties by id. Requires k >= 1.
    std::vector<Scored> topk(const TypeFilter& filter, const Embedding& query, std::size_t k) const;

    /// Index over every node of `g`, using cached embeddings when their
    /// dimension matches the provider and embedding descriptions otherwise.
    static VectorIndex build(const hkg::Graph& g, const EmbeddingProvider& provider);

private:
    struct Entry {
        std::string id;
        hkg::Granularity granularity;
        Embedding vector;
    };
    using Bucket = std::pair<hkg::Layer, hkg::NodeKind>;
    std::map<Bucket, std::map<std::string, Entry>> buckets_;
    std::map<std::string, Bucket> where_;
};

}  // namespace evopoc::fusion
