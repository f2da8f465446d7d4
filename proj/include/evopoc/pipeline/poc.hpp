#pragma once

#include "evopoc/frontend/project.hpp"
#include "evopoc/pipeline/plan.hpp"
#include "evopoc/reachability/path_check.hpp"

#include <stdexcept>
#include <string>

namespace evopoc::pipeline {

class EmptyPlan : public std::logic_error {
public:
    EmptyPlan() : std::logic_error("cannot emit a PoC for a plan with no steps") {}
};

class UnresolvedAddress : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Foundry test file for a validated plan. Parameter values come from the
/// concretized sigma in `reach` when it covers the step, else from the plan.
/// Interfaces are derived from `model`; contracts outside it rely on the
/// script's declarations. Output depends only on the inputs.
std::string emit_poc(const ExploitPlan& plan, const ExploitScript& script, const ExecutionEnv& env,
                     const sol::ProjectModel& model, const reach::PathVerdict* reach = nullptr);

}  // namespace evopoc::pipeline
