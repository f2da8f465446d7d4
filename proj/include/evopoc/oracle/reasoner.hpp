#pragma once

#include "evopoc/fusion/fusion.hpp"
#include "evopoc/memory/working_memory.hpp"
#include "evopoc/oracle/backend.hpp"
#include "evopoc/pipeline/plan.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace evopoc::oracle {

/// Source of exploit plans and scripts for the synthesis loop.
class PlanOracle {
public:
    virtual ~PlanOracle() = default;
    virtual pipeline::ExploitPlan generate_plan(const memory::WorkingMemory& wm,
                                                const std::vector<pipeline::Diagnostic>& diagnostics) = 0;
    virtual pipeline::ExploitScript generate_script(const pipeline::ExploitPlan& plan,
                                                    const pipeline::ExecutionEnv& env) = 0;
};

/// PlanOracle over a chat backend. Plans are decoded and validated, and their
/// node references checked against the working memory; scripted backends
/// skip that check when the working memory is empty.
class Reasoner final : public PlanOracle {
public:
    explicit Reasoner(std::shared_ptr<Backend> backend) : backend_(std::move(backend)) {}
    pipeline::ExploitPlan generate_plan(const memory::WorkingMemory& wm,
                                        const std::vector<pipeline::Diagnostic>& diagnostics) override;
    pipeline::ExploitScript generate_script(const pipeline::ExploitPlan& plan,
                                            const pipeline::ExecutionEnv& env) override;

private:
    std::shared_ptr<Backend> backend_;
};

/// Relevance judgments and dense-phase selection through a chat backend.
class BackendRelevance final : public memory::RelevanceOracle {
public:
    explicit BackendRelevance(std::shared_ptr<Backend> backend) : backend_(std::move(backend)) {}
    memory::RelevanceVerdict judge(const memory::ContractContext& ctx, const memory::WorkingMemory& wm,
                                   const hkg::Node& candidate, int hop) override;
    std::optional<std::string> select(const memory::ContractContext& ctx, const memory::WorkingMemory& wm,
                                      hkg::Layer target, const std::vector<fusion::Scored>& candidates) override;

private:
    std::shared_ptr<Backend> backend_;
};

/// Node equivalence during fusion through a chat backend.
class BackendJudge final : public fusion::EquivalenceJudge {
public:
    explicit BackendJudge(std::shared_ptr<Backend> backend) : backend_(std::move(backend)) {}
    fusion::Verdict judge(const hkg::Node& incoming, const hkg::Node& existing, double similarity) override;

private:
    std::shared_ptr<Backend> backend_;
};

/// Recorded session for scripted runs: {relevance: [...], backend: [...]}.
/// A bare list is read as backend entries only.
struct Transcript {
    std::vector<memory::TranscriptEntry> relevance;
    std::vector<ScriptedEntry> backend;
};
Transcript transcript_from_json(const nlohmann::json& j);
Transcript load_transcript(const std::filesystem::path& p);

}  // namespace evopoc::oracle
