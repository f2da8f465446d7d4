#pragma once

#include "evopoc/common/errors.hpp"
#include "evopoc/fusion/vector_index.hpp"
#include "evopoc/ontology/graph.hpp"

#include <json.hpp>

#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace evopoc::memory {

using hkg::Layer;

struct FunctionSummary {
    std::string name;
    std::string visibility;
    std::vector<std::string> modifiers;
};

struct ContractContext {
    std::string summary;
    std::vector<FunctionSummary> functions;
    std::string digest;  // cache key over the analyzed sources
};

struct RelevanceVerdict {
    bool keep = false;
    std::optional<double> confidence;  // required when keep
    std::string rationale;
};

struct TraceEntry {
    std::string candidate;
    Layer layer = Layer::ContractSemantics;
    bool keep = false;
    double confidence = 0;
    std::string rationale;
    int hop = 0;
    // "seed", "neighbor:<id>", "sparse" or "dense"
    std::string via;
};

struct WorkingMemory {
    std::map<Layer, std::vector<std::string>> accepted;
    std::vector<hkg::Edge> links;  // cross-layer edges that produced a seed
    std::deque<std::pair<std::string, int>> frontier;  // (node id, hop)
    std::vector<TraceEntry> trace;
    // Layer where reasoning stopped early, if it did.
    std::optional<Layer> stalled_at;

    bool evaluated(const std::string& id) const;
    bool is_accepted(const std::string& id) const;
    std::vector<std::string> all_accepted() const;
    bool complete() const;
};

class NoSeedFound : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Relevance judgments during retrieval.
class RelevanceOracle {
public:
    virtual ~RelevanceOracle() = default;
    virtual RelevanceVerdict judge(const ContractContext& ctx, const WorkingMemory& wm, const hkg::Node& candidate,
                                   int hop) = 0;
    /// Picks one of `candidates` (ranked) or none.
    virtual std::optional<std::string> select(const ContractContext& ctx, const WorkingMemory& wm, Layer target,
                                              const std::vector<fusion::Scored>& candidates) = 0;
};

struct TranscriptEntry {
    std::string match;  // candidate id, or a glob pattern with * and ?
    bool keep = false;
    std::optional<double> confidence;
    std::string rationale;
};

/// Replays a recorded list of verdicts. The next entry is consumed only when
/// its pattern matches the candidate; otherwise the candidate is rejected and
/// the entry stays pending.
class ScriptedRelevance final : public RelevanceOracle {
public:
    explicit ScriptedRelevance(std::vector<TranscriptEntry> entries);
    RelevanceVerdict judge(const ContractContext& ctx, const WorkingMemory& wm, const hkg::Node& candidate,
                           int hop) override;
    std::optional<std::string> select(const ContractContext& ctx, const WorkingMemory& wm, Layer target,
                                      const std::vector<fusion::Scored>& candidates) override;
    std::size_t remaining() const { return entries_.size() - next_; }

private:
    std::vector<TranscriptEntry> entries_;
    std::size_t next_ = 0;
};

std::vector<TranscriptEntry> transcript_from_json(const nlohmann::json& j);
bool glob_match(const std::string& pattern, const std::string& text);

struct MemoryOptions {
    std::size_t seed_k = 5;
    std::size_t dense_k = 5;
    int hop_budget = 6;
    double threshold = 0.5;
};

std::vector<fusion::Scored> seed_retrieval(const hkg::Graph& g, const fusion::VectorIndex& index,
                                           const fusion::EmbeddingProvider& provider, const ContractContext& ctx,
                                           std::size_t k);

/// Breadth-first expansion of the layer of the accepted nodes queued in
/// wm.frontier. Mutates `wm` in place, so an OracleFailure leaves the
/// partial state visible to the caller.
void expand_layer(const hkg::Graph& g, WorkingMemory& wm, Layer layer, const ContractContext& ctx,
                  RelevanceOracle& oracle, const MemoryOptions& options = {});

struct SparseScore {
    std::string id;
    double confidence = 0;
    double similarity = 0;
};

/// Sparse-phase confidences for target-layer nodes linked from accepted
/// source-layer nodes, best first.
std::vector<SparseScore> sparse_scores(const hkg::Graph& g, const WorkingMemory& wm, Layer source, Layer target,
                                       const fusion::Embedding& query);

std::optional<std::string> cross_layer_transition(const hkg::Graph& g, const fusion::VectorIndex& index,
                                                  const fusion::EmbeddingProvider& provider, WorkingMemory& wm,
                                                  Layer target, const ContractContext& ctx, RelevanceOracle& oracle,
                                                  const MemoryOptions& options = {});

WorkingMemory build_working_memory(const hkg::Graph& g, const fusion::VectorIndex& index,
                                   const fusion::EmbeddingProvider& provider, const ContractContext& ctx,
                                   RelevanceOracle& oracle, const MemoryOptions& options = {});

nlohmann::json to_json(const WorkingMemory& wm);

}  // namespace evopoc::memory
