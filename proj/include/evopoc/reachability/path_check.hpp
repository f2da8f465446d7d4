#pragma once

#include "evopoc/frontend/project.hpp"
#include "evopoc/frontend/symbolic.hpp"
#include "evopoc/pipeline/plan.hpp"
#include "evopoc/reachability/solver.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace evopoc::reach {

class MissingContract : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StepVerdict {
    // External: the contract is outside the model but has an env address;
    // no guards are known for it.
    enum class Status { Sat, Unknown, External, Unsat };
    std::size_t step = 0;
    Status status = Status::Unsat;
    std::optional<sol::CallPath> path;  // the path that decided the verdict
    std::vector<std::string> predicates;
    Model model;
    sol::Sigma sigma;  // plan sigma with solver values filled in
    std::size_t paths_tried = 0;
    std::string note;
};
const char* to_string(StepVerdict::Status s);

struct PathVerdict {
    bool reachable = true;
    std::vector<StepVerdict> steps;
    std::optional<std::size_t> failed_step;
    // Minimal unsatisfiable subset on the first enumerated path of the
    // failed step; empty when no path reaches the target at all.
    std::vector<std::string> witness;
};

struct PathCheckOptions {
    std::size_t alternates = 16;
    sol::TraversalOptions traversal;
    SolverOptions solver;
};

/// Traverses, collects and solves every plan step in order, stopping at the
/// first step whose enumerated paths are all Unsat. Unknown counts as
/// reachable.
PathVerdict check_path_reachability(const pipeline::ExploitPlan& plan, const pipeline::ExecutionEnv& env,
                                    const sol::ProjectModel& model, const PathCheckOptions& options = {});

nlohmann::json to_json(const PathVerdict& v);

}  // namespace evopoc::reach
