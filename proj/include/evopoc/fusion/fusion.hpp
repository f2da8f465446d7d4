#pragma once

#include "evopoc/fusion/vector_index.hpp"
#include "evopoc/ontology/graph.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace evopoc::fusion {

class MalformedCase : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CaseSubgraph {
    std::string case_id;
    std::vector<hkg::Node> nodes;
    std::vector<hkg::Edge> edges;
    // Set for graph export documents: nodes keep their own provenance and
    // variant annotations instead of being stamped with case_id.
    bool import = false;
};

enum class Verdict { Equivalent, Variant, Distinct };

class EquivalenceJudge {
public:
    virtual ~EquivalenceJudge() = default;
    virtual Verdict judge(const hkg::Node& incoming, const hkg::Node& existing, double similarity) = 0;
};

/// Same kind and cosine >= tau: Equivalent when granularities agree,
/// Variant otherwise. Same kind and cosine in [variant_floor, tau): Variant.
class ThresholdJudge final : public EquivalenceJudge {
public:
    explicit ThresholdJudge(double tau = 0.95, double variant_floor = 0.80) : tau_(tau), floor_(variant_floor) {}
    Verdict judge(const hkg::Node& incoming, const hkg::Node& existing, double similarity) override;

private:
    double tau_;
    double floor_;
};

struct NodeOutcome {
    enum class Kind { Inserted, MergedInto, KeptAsVariant };
    std::string case_node;
    Kind kind = Kind::Inserted;
    std::string target;  // stored id: the node itself, the merge target, or the new variant
    std::string sibling; // KeptAsVariant only
};

struct EdgeOutcome {
    enum class Kind { Added, AlreadyPresent, Deferred, Conflict };
    hkg::Edge input;
    Kind kind = Kind::Added;
    std::string detail;  // missing endpoint id, or the conflicting parent
};

struct FusionReport {
    std::string case_id;
    std::vector<NodeOutcome> nodes;
    std::vector<EdgeOutcome> edges;

    std::size_t count(NodeOutcome::Kind k) const;
    std::size_t count(EdgeOutcome::Kind k) const;
};

struct FusionOptions {
    std::size_t k = 5;
};

/// Fuses `c` into `g`, keeping `index` in sync. Node resolution happens
/// first for every case node; edges are added afterwards, once both
/// endpoints are known.
FusionReport ingest_case(hkg::Graph& g, VectorIndex& index, const CaseSubgraph& c, EquivalenceJudge& judge,
                         const EmbeddingProvider& provider, const FusionOptions& options = {});

std::string_view to_string(NodeOutcome::Kind k);
std::string_view to_string(EdgeOutcome::Kind k);

/// Case file {case_id, nodes, edges}, or a graph export {nodes, edges,
/// annotations?} which is read in import mode.
CaseSubgraph case_from_json(const nlohmann::json& j);
CaseSubgraph load_case(const std::filesystem::path& path);
nlohmann::json report_to_json(const FusionReport& r);

}  // namespace evopoc::fusion
