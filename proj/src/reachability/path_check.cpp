#include "evopoc/reachability/path_check.hpp"

#include <fmt/format.h>

namespace evopoc::reach {

const char* to_string(StepVerdict::Status s) {
    switch (s) {
    case StepVerdict::Status::Sat: return "Sat";
    case StepVerdict::Status::Unknown: return "Unknown";
    case StepVerdict::Status::External: return "External";
    case StepVerdict::Status::Unsat: return "Unsat";
    }
    return "?";
}

namespace {

std::vector<std::string> render(const std::vector<ExprPtr>& ps) {
    std::vector<std::string> out;
    for (const auto& p : ps) out.push_back(to_string(p));
    return out;
}

sol::Sigma concretize(const sol::Sigma& sigma, const Model& model) {
    sol::Sigma out = sigma;
    for (auto& b : out) {
        if (!b.length) {
            auto it = model.find(length_symbol_name(b.symbol));
            if (it != model.end() && std::holds_alternative<BigInt>(it->second)) b.length = std::get<BigInt>(it->second);
        }
        if (!b.value) {
            auto it = model.find(b.symbol);
            if (it == model.end()) continue;
            if (const auto* n = std::get_if<BigInt>(&it->second)) b.value = *n;
            else b.value = std::get<bool>(it->second) ? 1 : 0;
        }
    }
    return out;
}

}  // namespace

PathVerdict check_path_reachability(const pipeline::ExploitPlan& plan, const pipeline::ExecutionEnv& env,
                                    const sol::ProjectModel& model, const PathCheckOptions& options) {
    BuiltinSolver solver(options.solver);
    PathVerdict out;
    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        const pipeline::TxStep& step = plan.steps[i];
        StepVerdict v;
        v.step = i;
        v.sigma = step.params;
        if (!model.find(step.contract)) {
            if (!env.address_of(step.contract))
                throw MissingContract(fmt::format("step {}: contract '{}' is neither in the project nor in the env", i,
                                                  step.contract));
            v.status = StepVerdict::Status::External;
            v.note = "outside the analyzed sources";
            out.steps.push_back(std::move(v));
            continue;
        }
        std::vector<sol::CallPath> paths;
        try {
            paths = sol::enumerate_paths(model, step.contract, step.function, step.target, options.alternates,
                                         options.traversal);
        } catch (const sol::NoPath& e) {
            v.note = e.what();
        }
        std::optional<std::vector<std::string>> first_witness;
        bool decided = false;
        for (const auto& path : paths) {
            ++v.paths_tried;
            std::vector<ExprPtr> preds;
            SymbolTable symbols;
            try {
                sol::PathPredicates pp = sol::collect_predicates(model, path, step.params, options.traversal);
                preds = pp.predicates();
                for (const auto& b : pp.bounds) preds.push_back(b.condition);
                preds.insert(preds.end(), pp.sigma_constraints.begin(), pp.sigma_constraints.end());
                symbols = pp.symbols;
            } catch (const sol::UnsupportedExpression& e) {
                v.status = StepVerdict::Status::Unknown;
                v.path = path;
                v.note = e.what();
                decided = true;
                break;
            }
            SatResult r = solver.check(preds, symbols);
            if (r.is_unsat()) {
                if (!first_witness) first_witness = render(minimal_unsat_subset(preds, symbols, solver));
                continue;
            }
            v.status = r.is_sat() ? StepVerdict::Status::Sat : StepVerdict::Status::Unknown;
            v.path = path;
            v.predicates = render(preds);
            v.model = r.model;
            v.sigma = concretize(step.params, r.model);
            if (r.is_unknown()) v.note = r.reason;
            decided = true;
            break;
        }
        if (!decided) {
            if (paths.empty() && v.note.empty())
                v.note = fmt::format("no path from {}.{} to {}", step.contract, step.function,
                                     sol::to_string(step.target.category));
            out.reachable = false;
            out.failed_step = i;
            out.witness = first_witness.value_or(std::vector<std::string>{});
            out.steps.push_back(std::move(v));
            break;
        }
        out.steps.push_back(std::move(v));
    }
    return out;
}

nlohmann::json to_json(const PathVerdict& v) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : v.steps) {
        nlohmann::json model = nlohmann::json::object();
        for (const auto& [k, val] : s.model) model[k] = to_string(val);
        nlohmann::json sigma = nlohmann::json::array();
        for (const auto& b : s.sigma) sigma.push_back(pipeline::to_json(b));
        nlohmann::json j = {{"step", s.step},   {"status", to_string(s.status)}, {"predicates", s.predicates},
                            {"model", model},   {"sigma", sigma},                {"paths_tried", s.paths_tried}};
        if (s.path) j["path"] = s.path->functions();
        if (!s.note.empty()) j["note"] = s.note;
        steps.push_back(j);
    }
    nlohmann::json j = {{"reachable", v.reachable}, {"steps", steps}};
    if (v.failed_step) {
        j["failed_step"] = *v.failed_step;
        j["witness"] = v.witness;
    }
    return j;
}

}  // namespace evopoc::reach
