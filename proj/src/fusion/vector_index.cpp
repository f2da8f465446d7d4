#include "evopoc/fusion/vector_index.hpp"

#include <algorithm>

namespace evopoc::fusion {

void VectorIndex::insert(const hkg::Node& n, Embedding v) {
    erase(n.id);
    Bucket b{n.layer, n.kind};
    buckets_[b][n.id] = Entry{n.id, n.granularity, std::move(v)};
    where_[n.id] = b;
}

void VectorIndex::erase(const std::string& id) {
    auto it = where_.find(id);
    if (it == where_.end()) return;
    buckets_[it->second].erase(id);
    where_.erase(it);
}

std::vector<Scored> VectorIndex::topk(const TypeFilter& filter, const Embedding& query, std::size_t k) const {
    if (k == 0) throw std::invalid_argument("k must be at least 1");
    std::vector<Scored> out;
    auto it = buckets_.find({filter.layer, filter.kind});
    if (it == buckets_.end()) return out;
    for (const auto& [id, e] : it->second) {
        if (filter.granularity && e.granularity != *filter.granularity) continue;
        out.push_back({id, cosine(query, e.vector)});
    }
    std::sort(out.begin(), out.end(), [](const Scored& a, const Scored& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.id < b.id;
    });
    if (out.size() > k) out.resize(k);
    return out;
}

VectorIndex VectorIndex::build(const hkg::Graph& g, const EmbeddingProvider& provider) {
    VectorIndex idx;
    for (const auto& [id, n] : g.nodes()) {
        if (n.embedding && n.embedding->size() == provider.dimension())
            idx.insert(n, *n.embedding);
        else
            idx.insert(n, provider.embed(n.description));
    }
    return idx;
}

}  // namespace evopoc::fusion
