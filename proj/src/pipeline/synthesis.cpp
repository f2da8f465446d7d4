#include "evopoc/pipeline/synthesis.hpp"

#include "evopoc/pipeline/poc.hpp"

#include <fmt/format.h>

#include <cstdint>

namespace evopoc::pipeline {

using nlohmann::json;

const char* to_string(SynthesisEvent::Kind k) {
    switch (k) {
    case SynthesisEvent::Kind::PlanGenerated: return "PlanGenerated";
    case SynthesisEvent::Kind::ReachabilityChecked: return "ReachabilityChecked";
    case SynthesisEvent::Kind::ScriptGenerated: return "ScriptGenerated";
    case SynthesisEvent::Kind::Simulated: return "Simulated";
    }
    return "?";
}

const char* to_string(SynthesisFailure::Reason r) {
    switch (r) {
    case SynthesisFailure::Reason::PathInfeasible: return "PathInfeasible";
    case SynthesisFailure::Reason::NotProfitable: return "NotProfitable";
    case SynthesisFailure::Reason::IterationBudgetExhausted: return "IterationBudgetExhausted";
    }
    return "?";
}

namespace {

std::string describe(const Diagnostic& d) {
    if (d.kind == Diagnostic::Kind::PathInfeasible) {
        std::string w;
        for (const auto& p : d.witness) w += (w.empty() ? "" : ", ") + p;
        return fmt::format("step {} unreachable{}", d.step.value_or(0), w.empty() ? d.note : " (" + w + ")");
    }
    if (d.failed_op) return fmt::format("op {} failed: {}", d.failed_op->step, d.failed_op->message);
    return "wealth change " + profit::to_string(d.delta_w.value_or(0));
}

}  // namespace

SynthesisOutcome exploit_synthesis(const memory::WorkingMemory& wm, const ExecutionEnv& env,
                                   const sol::ProjectModel& model, oracle::PlanOracle& oracle,
                                   const SynthesisOptions& options) {
    const int cap = std::clamp(options.iteration_cap, 1, 5);
    auto notify = [&](SynthesisEvent e) {
        if (options.observer) options.observer(e);
    };
    std::vector<Diagnostic> diagnostics;

    for (int it = 1; it <= cap; ++it) {
        ExploitPlan plan;
        ExploitScript script;
        try {
            plan = oracle.generate_plan(wm, diagnostics);
        } catch (const OracleFailure& e) {
            if (e.cause() != OracleFailure::Cause::Exhausted || diagnostics.empty()) throw;
            const Diagnostic& last = diagnostics.back();
            return SynthesisFailure{last.kind == Diagnostic::Kind::PathInfeasible
                                        ? SynthesisFailure::Reason::PathInfeasible
                                        : SynthesisFailure::Reason::NotProfitable,
                                    static_cast<int>(diagnostics.size()), diagnostics,
                                    "oracle ran out of replies; last attempt: " + describe(last)};
        }
        notify({SynthesisEvent::Kind::PlanGenerated, it});

        reach::PathVerdict verdict = reach::check_path_reachability(plan, env, model, options.path);
        notify({SynthesisEvent::Kind::ReachabilityChecked, it, verdict.reachable});
        if (!verdict.reachable) {
            Diagnostic d;
            d.iteration = it;
            d.kind = Diagnostic::Kind::PathInfeasible;
            d.step = verdict.failed_step;
            d.witness = verdict.witness;
            if (verdict.failed_step) d.note = verdict.steps.back().note;
            diagnostics.push_back(std::move(d));
            continue;
        }

        try {
            script = oracle.generate_script(plan, env);
        } catch (const OracleFailure& e) {
            if (e.cause() != OracleFailure::Cause::Exhausted || diagnostics.empty()) throw;
            const Diagnostic& last = diagnostics.back();
            return SynthesisFailure{last.kind == Diagnostic::Kind::PathInfeasible
                                        ? SynthesisFailure::Reason::PathInfeasible
                                        : SynthesisFailure::Reason::NotProfitable,
                                    static_cast<int>(diagnostics.size()), diagnostics,
                                    "oracle ran out of replies; last attempt: " + describe(last)};
        }
        notify({SynthesisEvent::Kind::ScriptGenerated, it});

        profit::SimResult sim = profit::simulate(script.projection, env.initial, env.numeraire, env.attackers, env.sim);
        notify({SynthesisEvent::Kind::Simulated, it, true, sim.delta_w});
        if (sim.profitable()) {
            SynthesisSuccess s;
            s.poc = emit_poc(plan, script, env, model, &verdict);
            s.plan = std::move(plan);
            s.script = std::move(script);
            s.reachability = std::move(verdict);
            s.simulation = std::move(sim);
            s.iterations = it;
            s.diagnostics = std::move(diagnostics);
            return s;
        }
        Diagnostic d;
        d.iteration = it;
        d.kind = Diagnostic::Kind::NotProfitable;
        d.delta_w = sim.delta_w;
        d.failed_op = sim.failure;
        diagnostics.push_back(std::move(d));
    }
    return SynthesisFailure{SynthesisFailure::Reason::IterationBudgetExhausted, cap, std::move(diagnostics),
                            fmt::format("no profitable plan within {} iterations", cap)};
}

int iterations(const SynthesisOutcome& o) {
    return std::visit([](const auto& v) { return v.iterations; }, o);
}

json to_json(const SynthesisOutcome& o) {
    auto diags = [](const std::vector<Diagnostic>& ds) {
        json a = json::array();
        for (const auto& d : ds) a.push_back(to_json(d));
        return a;
    };
    if (const auto* s = std::get_if<SynthesisSuccess>(&o)) {
        return {{"outcome", "Success"},
                {"iterations", s->iterations},
                {"delta_w", profit::to_string(s->simulation.delta_w)},
                {"plan", to_json(s->plan)},
                {"script", to_json(s->script)},
                {"reachability", reach::to_json(s->reachability)},
                {"simulation", profit::to_json(s->simulation)},
                {"diagnostics", diags(s->diagnostics)}};
    }
    const auto& f = std::get<SynthesisFailure>(o);
    return {{"outcome", "Failure"},
            {"reason", to_string(f.reason)},
            {"iterations", f.iterations},
            {"note", f.note},
            {"diagnostics", diags(f.diagnostics)}};
}

memory::ContractContext contract_context(const sol::ProjectModel& model) {
    memory::ContractContext ctx;
    std::string summary;
    for (const auto& c : model.contracts()) {
        summary += (summary.empty() ? "" : " ") + c.name;
        for (const auto& f : c.functions) {
            if (f.kind != sol::FunctionDef::Kind::Function || !f.externally_callable()) continue;
            memory::FunctionSummary fs{f.name, f.effective_visibility(), {}};
            summary += " " + f.name;
            for (const auto& m : f.modifiers) {
                fs.modifiers.push_back(m.name);
                summary += " " + m.name;
            }
            ctx.functions.push_back(std::move(fs));
        }
    }
    ctx.summary = summary;
    // FNV-1a over the summary; a cache key, not a security boundary.
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : summary) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    ctx.digest = fmt::format("{:016x}", h);
    return ctx;
}

}  // namespace evopoc::pipeline
