#pragma once

#include "evopoc/ontology/types.hpp"

#include <cstddef>
#include <string_view>

namespace evopoc::fusion {

using hkg::Embedding;

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::size_t dimension() const = 0;
    virtual Embedding embed(std::string_view text) const = 0;
};

/// Lower-cased alphanumeric tokens, each hashed (FNV-1a) into a signed bucket,
/// then L2-normalized. Empty text maps to the zero vector.
class HashedEmbedding final : public EmbeddingProvider {
public:
    explicit HashedEmbedding(std::size_t dim = 256);
    std::size_t dimension() const override { return dim_; }
    Embedding embed(std::string_view text) const override;

private:
    std::size_t dim_;
};

/// Cosine similarity; 0 when either vector is all-zero.
double cosine(const Embedding& a, const Embedding& b);

}  // namespace evopoc::fusion
