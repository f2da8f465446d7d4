#pragma once

#include "evopoc/frontend/symbolic.hpp"
#include "evopoc/profitability/asset.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace evopoc::pipeline {

class PlanSchemaViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ProjectionSchemaViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EnvError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Phase { Preparation, Exploitation, Extraction };
const char* to_string(Phase p);
Phase parse_phase(const std::string& s);

/// One transaction <C, f, sigma, K>.
struct TxStep {
    std::string contract;
    std::string function;
    sol::Sigma params;
    sol::TargetOp target;
    Phase phase = Phase::Exploitation;
    std::vector<std::string> nodes;  // working-memory node ids the step relies on
};

struct ExploitPlan {
    std::vector<TxStep> steps;
    std::string env_ref;
    std::string rationale;
};

/// Phases non-decreasing, at least one Exploitation step in a non-empty
/// plan, every step names a contract and a function. Throws
/// PlanSchemaViolation.
void validate_plan(const ExploitPlan& plan);

struct ExecutionEnv {
    std::map<std::string, std::string> addresses;  // contract name -> address
    std::map<std::string, std::string> tokens;     // token symbol -> address
    std::optional<std::uint64_t> block;
    std::string chain;
    std::string numeraire;
    std::vector<std::string> attackers{"attacker"};
    profit::SimOptions sim;
    // Pools, balances and prices the asset simulation starts from.
    profit::AssetState initial;

    std::optional<std::string> address_of(const std::string& name) const;
};

/// Solidity-side fragments plus the asset-level projection of the script.
struct ExploitScript {
    std::vector<std::string> declarations;  // file-scope items, e.g. interfaces
    std::vector<std::string> setup;         // statements before the calls
    std::map<std::size_t, std::string> calls;  // step index -> call statement overriding the rendered one
    std::vector<profit::LabeledOp> projection;
};

/// Projection ops may only name pools and tokens known to the env.
/// Throws ProjectionSchemaViolation.
void validate_projection(const std::vector<profit::LabeledOp>& ops, const ExecutionEnv& env);

/// Feedback from one failed iteration, handed to the next plan request.
struct Diagnostic {
    enum class Kind { PathInfeasible, NotProfitable };
    int iteration = 0;
    Kind kind = Kind::PathInfeasible;
    std::optional<std::size_t> step;    // failed plan step (PathInfeasible)
    std::vector<std::string> witness;   // unsat predicate subset
    std::optional<Rational> delta_w;    // NotProfitable
    std::optional<profit::SimFailure> failed_op;
    std::string note;
};
const char* to_string(Diagnostic::Kind k);
nlohmann::json to_json(const Diagnostic& d);

nlohmann::json to_json(const sol::Binding& b);
sol::Binding binding_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TxStep& s);
TxStep step_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExploitPlan& p);
ExploitPlan plan_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExploitScript& s);
ExploitScript script_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExecutionEnv& e);
ExecutionEnv env_from_json(const nlohmann::json& j);
ExecutionEnv load_env(const std::filesystem::path& p);

}  // namespace evopoc::pipeline
