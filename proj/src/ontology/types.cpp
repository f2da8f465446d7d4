#include "evopoc/ontology/types.hpp"

#include <array>
#include <cctype>
#include <utility>

namespace evopoc::hkg {

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::pair<E, std::string_view>, N>& names, const char* what) {
    for (const auto& [v, name] : names)
        if (name == s) return v;
    throw InvalidKind(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

template <typename E, std::size_t N>
std::string_view name_of(E v, const std::array<std::pair<E, std::string_view>, N>& names) {
    for (const auto& [e, name] : names)
        if (e == v) return name;
    return "?";
}

constexpr std::array<std::pair<Layer, std::string_view>, 3> kLayerNames{{
    {Layer::ContractSemantics, "ContractSemantics"},
    {Layer::FailureMode, "FailureMode"},
    {Layer::ExploitPrimitive, "ExploitPrimitive"},
}};

constexpr std::array<std::pair<NodeKind, std::string_view>, 12> kKindNames{{
    {NodeKind::Protocol, "Protocol"},
    {NodeKind::AccessControl, "AccessControl"},
    {NodeKind::EconomicModel, "EconomicModel"},
    {NodeKind::Dependency, "Dependency"},
    {NodeKind::FailurePattern, "FailurePattern"},
    {NodeKind::Condition, "Condition"},
    {NodeKind::Impact, "Impact"},
    {NodeKind::RootCause, "RootCause"},
    {NodeKind::InvariantViolation, "InvariantViolation"},
    {NodeKind::Skeleton, "Skeleton"},
    {NodeKind::Primitive, "Primitive"},
    {NodeKind::Example, "Example"},
}};

constexpr std::array<std::pair<Granularity, std::string_view>, 4> kGranularityNames{{
    {Granularity::PrimaryCategory, "PrimaryCategory"},
    {Granularity::SubCategory, "SubCategory"},
    {Granularity::ImplementLogic, "ImplementLogic"},
    {Granularity::NotApplicable, "NotApplicable"},
}};

constexpr std::array<std::pair<PrimitiveRole, std::string_view>, 5> kRoleNames{{
    {PrimitiveRole::Setup, "Setup"},
    {PrimitiveRole::EnvironmentManipulation, "EnvironmentManipulation"},
    {PrimitiveRole::ExploitationAndAmplification, "ExploitationAndAmplification"},
    {PrimitiveRole::ArbitrageAndExit, "ArbitrageAndExit"},
    {PrimitiveRole::NotApplicable, "NotApplicable"},
}};

constexpr std::array<std::pair<EdgeKind, std::string_view>, 13> kEdgeNames{{
    {EdgeKind::enforces, "enforces"},
    {EdgeKind::adopts, "adopts"},
    {EdgeKind::depends_on, "depends_on"},
    {EdgeKind::subsume, "subsume"},
    {EdgeKind::implements, "implements"},
    {EdgeKind::caused_by, "caused_by"},
    {EdgeKind::needs, "needs"},
    {EdgeKind::can_cause, "can_cause"},
    {EdgeKind::leads_to, "leads_to"},
    {EdgeKind::start_at, "start_at"},
    {EdgeKind::next, "next"},
    {EdgeKind::illustrated_by, "illustrated_by"},
    {EdgeKind::related_exploit, "related_exploit"},
}};

bool is_cs(const Node& n) { return n.layer == Layer::ContractSemantics; }

}  // namespace

Layer layer_of(NodeKind k) {
    switch (k) {
        case NodeKind::Protocol:
        case NodeKind::AccessControl:
        case NodeKind::EconomicModel:
        case NodeKind::Dependency:
            return Layer::ContractSemantics;
        case NodeKind::FailurePattern:
        case NodeKind::Condition:
        case NodeKind::Impact:
        case NodeKind::RootCause:
        case NodeKind::InvariantViolation:
            return Layer::FailureMode;
        case NodeKind::Skeleton:
        case NodeKind::Primitive:
        case NodeKind::Example:
            return Layer::ExploitPrimitive;
    }
    return Layer::ContractSemantics;
}

bool is_cross_layer(EdgeKind k) { return k == EdgeKind::related_exploit; }

std::string_view to_string(Layer v) { return name_of(v, kLayerNames); }
std::string_view to_string(NodeKind v) { return name_of(v, kKindNames); }
std::string_view to_string(Granularity v) { return name_of(v, kGranularityNames); }
std::string_view to_string(PrimitiveRole v) { return name_of(v, kRoleNames); }
std::string_view to_string(EdgeKind v) { return name_of(v, kEdgeNames); }

Layer parse_layer(std::string_view s) { return parse_enum(s, kLayerNames, "layer"); }
NodeKind parse_node_kind(std::string_view s) { return parse_enum(s, kKindNames, "node kind"); }
Granularity parse_granularity(std::string_view s) { return parse_enum(s, kGranularityNames, "granularity"); }
PrimitiveRole parse_role(std::string_view s) { return parse_enum(s, kRoleNames, "primitive role"); }
EdgeKind parse_edge_kind(std::string_view s) { return parse_enum(s, kEdgeNames, "edge kind"); }

void validate_node(const Node& n) {
    auto fail = [&](const std::string& why) { throw InvalidKind("node '" + n.id + "': " + why); };
    if (normalize_description(n.description).empty()) fail("empty description");
    if (layer_of(n.kind) != n.layer)
        fail(std::string(to_string(n.kind)) + " is not a " + std::string(to_string(n.layer)) + " kind");
    if (is_cs(n) && n.granularity == Granularity::NotApplicable) fail("contract-semantics node needs a granularity");
    if (!is_cs(n) && n.granularity != Granularity::NotApplicable) fail("granularity only applies to contract semantics");
    if (n.kind != NodeKind::Primitive && n.role != PrimitiveRole::NotApplicable) fail("role only applies to primitives");
    if (n.kind != NodeKind::Primitive && n.specific) fail("specific flag only applies to primitives");
}

bool admissible(const Node& s, EdgeKind kind, const Node& d) {
    using K = NodeKind;
    using G = Granularity;
    switch (kind) {
        case EdgeKind::enforces: return s.kind == K::Protocol && d.kind == K::AccessControl;
        case EdgeKind::adopts: return s.kind == K::Protocol && d.kind == K::EconomicModel;
        case EdgeKind::depends_on: return s.kind == K::Protocol && d.kind == K::Dependency;
        case EdgeKind::subsume:
            return is_cs(s) && s.kind == d.kind && s.granularity == G::PrimaryCategory && d.granularity == G::SubCategory;
        case EdgeKind::implements:
            return is_cs(s) && s.kind == d.kind && s.granularity == G::SubCategory && d.granularity == G::ImplementLogic;
        case EdgeKind::caused_by: return s.kind == K::FailurePattern && d.kind == K::RootCause;
        case EdgeKind::needs: return s.kind == K::FailurePattern && d.kind == K::Condition;
        case EdgeKind::can_cause: return s.kind == K::FailurePattern && d.kind == K::Impact;
        case EdgeKind::leads_to: return s.kind == K::RootCause && d.kind == K::InvariantViolation;
        case EdgeKind::start_at: return s.kind == K::Skeleton && d.kind == K::Primitive;
        case EdgeKind::next: return s.kind == K::Primitive && d.kind == K::Primitive;
        case EdgeKind::illustrated_by: return s.kind == K::Skeleton && d.kind == K::Example;
        case EdgeKind::related_exploit:
            return (is_cs(s) && d.kind == K::FailurePattern) ||
                   (s.kind == K::RootCause && (d.kind == K::Skeleton || d.kind == K::Primitive));
    }
    return false;
}

std::string normalize_description(std::string_view text) {
    std::string out;
    bool space = false;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            space = !out.empty();
            continue;
        }
        if (space) out.push_back(' ');
        space = false;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

std::string content_key(const Node& n) { return std::string(to_string(n.kind)) + "|" + normalize_description(n.description); }

}  // namespace evopoc::hkg
