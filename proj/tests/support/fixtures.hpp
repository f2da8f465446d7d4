#pragma once

#include "evopoc/fusion/fusion.hpp"
#include "evopoc/ontology/serialize.hpp"

#include "support/paths.hpp"

namespace evopoc::testing {

struct FusedGraph {
    hkg::Graph graph;
    fusion::HashedEmbedding provider;
    fusion::VectorIndex index;
};

/// The fee-on-transfer case file fused into an empty store.
inline FusedGraph fot_graph() {
    FusedGraph f;
    fusion::ThresholdJudge judge;
    fusion::ingest_case(f.graph, f.index, fusion::load_case(fixture("fot/case.json")), judge, f.provider);
    return f;
}

}  // namespace evopoc::testing
