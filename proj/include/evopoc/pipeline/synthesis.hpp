#pragma once

#include "evopoc/memory/working_memory.hpp"
#include "evopoc/oracle/reasoner.hpp"
#include "evopoc/pipeline/plan.hpp"
#include "evopoc/reachability/path_check.hpp"

#include <json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace evopoc::pipeline {

/// Stage notifications, in the order they happen within an iteration.
struct SynthesisEvent {
    enum class Kind { PlanGenerated, ReachabilityChecked, ScriptGenerated, Simulated };
    Kind kind = Kind::PlanGenerated;
    int iteration = 0;
    bool reachable = false;                // ReachabilityChecked
    std::optional<Rational> delta_w;       // Simulated
};
const char* to_string(SynthesisEvent::Kind k);

struct SynthesisOptions {
    int iteration_cap = 5;
    reach::PathCheckOptions path;
    std::function<void(const SynthesisEvent&)> observer;
};

struct SynthesisSuccess {
    ExploitPlan plan;
    ExploitScript script;
    reach::PathVerdict reachability;
    profit::SimResult simulation;
    std::string poc;
    int iterations = 0;
    std::vector<Diagnostic> diagnostics;  // one per failed iteration
};

struct SynthesisFailure {
    enum class Reason { PathInfeasible, NotProfitable, IterationBudgetExhausted };
    Reason reason = Reason::IterationBudgetExhausted;
    int iterations = 0;
    std::vector<Diagnostic> diagnostics;
    std::string note;
};
const char* to_string(SynthesisFailure::Reason r);

using SynthesisOutcome = std::variant<SynthesisSuccess, SynthesisFailure>;

/// Refinement loop: each iteration asks for a plan, checks reachability,
/// then asks for a script and simulates its projection. The first plan with
/// positive wealth change wins. A failed stage becomes a diagnostic for the
/// next plan request; an unreachable plan is never simulated.
///
/// A scripted oracle that runs out of replies after at least one complete
/// iteration ends the loop with the reason of the last diagnostic. Other
/// OracleFailures, schema violations and env errors propagate.
SynthesisOutcome exploit_synthesis(const memory::WorkingMemory& wm, const ExecutionEnv& env,
                                   const sol::ProjectModel& model, oracle::PlanOracle& oracle,
                                   const SynthesisOptions& options = {});

int iterations(const SynthesisOutcome& o);
nlohmann::json to_json(const SynthesisOutcome& o);

/// Retrieval query for a project: contract names, externally callable
/// functions and their modifiers.
memory::ContractContext contract_context(const sol::ProjectModel& model);

}  // namespace evopoc::pipeline
