#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace evopoc::hkg {

enum class Layer { ContractSemantics, FailureMode, ExploitPrimitive };

enum class NodeKind {
    // ContractSemantics
    Protocol,
    AccessControl,
    EconomicModel,
    Dependency,
    // FailureMode
    FailurePattern,
    Condition,
    Impact,
    RootCause,
    InvariantViolation,
    // ExploitPrimitive
    Skeleton,
    Primitive,
    Example,
};

enum class Granularity { PrimaryCategory, SubCategory, ImplementLogic, NotApplicable };

enum class PrimitiveRole { Setup, EnvironmentManipulation, ExploitationAndAmplification, ArbitrageAndExit, NotApplicable };

enum class EdgeKind {
    enforces,
    adopts,
    depends_on,
    subsume,
    implements,
    caused_by,
    needs,
    can_cause,
    leads_to,
    start_at,
    next,
    illustrated_by,
    related_exploit,
};

inline constexpr Layer kLayers[] = {Layer::ContractSemantics, Layer::FailureMode, Layer::ExploitPrimitive};

Layer layer_of(NodeKind k);
bool is_cross_layer(EdgeKind k);

std::string_view to_string(Layer v);
std::string_view to_string(NodeKind v);
std::string_view to_string(Granularity v);
std::string_view to_string(PrimitiveRole v);
std::string_view to_string(EdgeKind v);

// Parsers throw InvalidKind on unknown names.
Layer parse_layer(std::string_view s);
NodeKind parse_node_kind(std::string_view s);
Granularity parse_granularity(std::string_view s);
PrimitiveRole parse_role(std::string_view s);
EdgeKind parse_edge_kind(std::string_view s);

class OntologyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class InvalidKind : public OntologyError {
public:
    using OntologyError::OntologyError;
};
class InadmissibleEdge : public OntologyError {
public:
    using OntologyError::OntologyError;
};
class MissingEndpoint : public OntologyError {
public:
    using OntologyError::OntologyError;
};

using Embedding = std::vector<double>;

struct Node {
    std::string id;
    Layer layer = Layer::ContractSemantics;
    NodeKind kind = NodeKind::Protocol;
    Granularity granularity = Granularity::NotApplicable;
    PrimitiveRole role = PrimitiveRole::NotApplicable;
    std::string description;
    std::set<std::string> provenance;
    std::optional<Embedding> embedding;
    // Primitive nodes only: a case-specific plan step rather than a
    // reusable behaviour.
    bool specific = false;
    // Set when fusion kept this node as a parallel variant of another.
    std::optional<std::string> variant_of;
};

struct Edge {
    std::string src;
    std::string dst;
    EdgeKind kind = EdgeKind::enforces;

    auto operator<=>(const Edge&) const = default;
};

/// Throws InvalidKind when layer, kind, granularity and role disagree or the
/// description is blank.
void validate_node(const Node& n);

/// The admissibility table: whether `kind` may connect `src` to `dst`.
bool admissible(const Node& src, EdgeKind kind, const Node& dst);

/// Kind plus whitespace- and case-normalized description.
std::string content_key(const Node& n);
std::string normalize_description(std::string_view text);

}  // namespace evopoc::hkg
