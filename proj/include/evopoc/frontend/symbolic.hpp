#pragma once

#include "evopoc/common/bigint.hpp"
#include "evopoc/frontend/project.hpp"
#include "evopoc/reachability/expr.hpp"
#include "evopoc/reachability/solver.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace evopoc::sol {

enum class TargetCategory { StateModification, ExternalCall, FundTransfer };
const char* to_string(TargetCategory c);
TargetCategory parse_target_category(const std::string& s);

/// Target operation K. Without a sink name any statement of the category
/// matches; with one, only calls to that function or writes to that state
/// variable do.
struct TargetOp {
    TargetCategory category = TargetCategory::StateModification;
    std::optional<std::string> sink;
};

/// One entry of sigma: the symbol standing for a parameter, optionally pinned
/// to a concrete value (scalars) or length (arrays).
struct Binding {
    std::string symbol;
    std::optional<BigInt> value;
    std::optional<BigInt> length;
};
using Sigma = std::vector<Binding>;

struct PathHop {
    enum class Kind { Entry, Modifier, Call, LoopSkip, LoopEnter, Sink };
    Kind kind = Kind::Call;
    std::string contract;
    std::string name;  // function or modifier; empty for loop markers
    // Parameter name -> rendering of the bound argument.
    std::map<std::string, std::string> bindings;
    SourceLoc loc;
};
const char* to_string(PathHop::Kind k);

struct CallPath {
    std::string contract;
    std::string entry;
    TargetOp target;
    std::vector<PathHop> hops;
    // Choice taken at each branch point; replaying it reproduces the path.
    std::vector<int> decisions;

    /// Function and modifier names along the path, loop markers excluded.
    std::vector<std::string> functions() const;
};

struct Guard {
    enum class Origin { Require, Assert, Branch };
    reach::ExprPtr condition;
    Origin origin = Origin::Require;
    SourceLoc loc;
    // Depends on a fresh symbol standing for an external or opaque result.
    bool conservative = false;
};
const char* to_string(Guard::Origin o);

/// Loop-condition constraint for the chosen iteration count (0 or 1).
struct LoopBound {
    reach::ExprPtr condition;
    SourceLoc loc;
    bool entered = false;
};

struct PathPredicates {
    std::vector<Guard> guards;
    std::vector<LoopBound> bounds;
    reach::SymbolTable symbols;
    // Parameter symbols of the entry function in declaration order.
    std::vector<std::string> entry_symbols;

    /// Guard conditions split into conjuncts, literal `true` dropped.
    std::vector<reach::ExprPtr> predicates() const;
    /// Constraints from sigma: pinned values and array lengths.
    std::vector<reach::ExprPtr> sigma_constraints;
};

class NoPath : public FrontendError {
public:
    using FrontendError::FrontendError;
};

class DepthExceeded : public FrontendError {
public:
    using FrontendError::FrontendError;
};

class UnsupportedExpression : public FrontendError {
public:
    UnsupportedExpression(SourceLoc loc, const std::string& what);
    const SourceLoc& loc() const { return loc_; }

private:
    SourceLoc loc_;
};

struct TraversalOptions {
    int depth_limit = 8;
    // Complete runs explored per query before giving up with NoPath.
    std::size_t run_budget = 4096;
};

/// First path (in statement order, then-branches and loop skips first) from
/// `entry` to a statement matching `target`.
CallPath traverse(const ProjectModel& model, const std::string& contract, const std::string& entry,
                  const TargetOp& target, const TraversalOptions& options = {});

/// Up to `limit` distinct paths in the same order as traverse. Empty when
/// none exists.
std::vector<CallPath> enumerate_paths(const ProjectModel& model, const std::string& contract,
                                      const std::string& entry, const TargetOp& target, std::size_t limit,
                                      const TraversalOptions& options = {});

/// Replays `path` with sigma and collects its guards and loop bounds.
PathPredicates collect_predicates(const ProjectModel& model, const CallPath& path, const Sigma& sigma,
                                  const TraversalOptions& options = {});

}  // namespace evopoc::sol
