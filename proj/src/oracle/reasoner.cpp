#include "evopoc/oracle/reasoner.hpp"

#include "evopoc/ontology/serialize.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>

namespace evopoc::oracle {

using nlohmann::json;

namespace {

const char* kSystem =
    "You are a smart contract security auditor working on contracts you are authorized to test. "
    "Answer with one ```json block in the requested shape and nothing else.";

BackendRequest request(Schema schema, std::string user) {
    return {{{"system", kSystem}, {"user", std::move(user)}}, schema};
}

json payload_of(const BackendResponse& r) {
    if (!r.payload) throw OracleFailure(OracleFailure::Cause::Schema, "reply carries no structured payload");
    return *r.payload;
}

}  // namespace

pipeline::ExploitPlan Reasoner::generate_plan(const memory::WorkingMemory& wm,
                                              const std::vector<pipeline::Diagnostic>& diagnostics) {
    json diags = json::array();
    for (const auto& d : diagnostics) diags.push_back(pipeline::to_json(d));
    std::string user = fmt::format(
        "Task: plan\nWorking memory:\n{}\nFeedback from earlier attempts:\n{}\n"
        "Return {{\"steps\": [{{\"contract\", \"function\", \"params\", \"target\", \"phase\", \"nodes\"}}]}} "
        "with phases Preparation, Exploitation, Extraction in that order.",
        memory::to_json(wm).dump(), diags.dump());
    json p = payload_of(backend_->chat(request(Schema::Plan, std::move(user))));
    pipeline::ExploitPlan plan = pipeline::plan_from_json(p);

    const auto accepted = wm.all_accepted();
    if (accepted.empty() && backend_->scripted()) {
        spdlog::info("scripted plan accepted without working-memory grounding");
        return plan;
    }
    for (std::size_t i = 0; i < plan.steps.size(); ++i)
        for (const auto& n : plan.steps[i].nodes)
            if (std::find(accepted.begin(), accepted.end(), n) == accepted.end())
                throw pipeline::PlanSchemaViolation(
                    fmt::format("step {} references '{}', which is not in the working memory", i, n));
    return plan;
}

pipeline::ExploitScript Reasoner::generate_script(const pipeline::ExploitPlan& plan,
                                                  const pipeline::ExecutionEnv& env) {
    std::string user = fmt::format(
        "Task: script\nPlan:\n{}\nEnvironment:\n{}\n"
        "Return {{\"declarations\", \"setup\", \"calls\", \"projection\"}} where projection lists the asset-level "
        "operations of the script.",
        pipeline::to_json(plan).dump(), pipeline::to_json(env).dump());
    json p = payload_of(backend_->chat(request(Schema::Script, std::move(user))));
    pipeline::ExploitScript script = pipeline::script_from_json(p);
    pipeline::validate_projection(script.projection, env);
    for (const auto& [i, call] : script.calls)
        if (i >= plan.steps.size())
            throw pipeline::ProjectionSchemaViolation(fmt::format("call override for missing step {}", i));
    return script;
}

memory::RelevanceVerdict BackendRelevance::judge(const memory::ContractContext& ctx, const memory::WorkingMemory& wm,
                                                 const hkg::Node& candidate, int hop) {
    std::string user = fmt::format(
        "Task: relevance\nContract summary: {}\nAccepted so far: {}\nCandidate (hop {}):\n{}\n"
        "Return {{\"keep\": bool, \"confidence\": 0..1, \"rationale\": text}}.",
        ctx.summary, json(wm.all_accepted()).dump(), hop, hkg::node_to_json(candidate).dump());
    json p = payload_of(backend_->chat(request(Schema::Relevance, std::move(user))));
    memory::RelevanceVerdict v;
    v.keep = p["keep"].get<bool>();
    if (p.contains("confidence")) v.confidence = p["confidence"].get<double>();
    v.rationale = p.value("rationale", "");
    return v;
}

std::optional<std::string> BackendRelevance::select(const memory::ContractContext& ctx,
                                                    const memory::WorkingMemory& wm, hkg::Layer target,
                                                    const std::vector<fusion::Scored>& candidates) {
    json list = json::array();
    for (const auto& c : candidates) list.push_back({{"id", c.id}, {"similarity", c.similarity}});
    std::string user = fmt::format(
        "Task: select\nContract summary: {}\nAccepted so far: {}\nTarget layer: {}\nCandidates: {}\n"
        "Return {{\"choice\": id or null}}.",
        ctx.summary, json(wm.all_accepted()).dump(), hkg::to_string(target), list.dump());
    json p = payload_of(backend_->chat(request(Schema::Selection, std::move(user))));
    if (p["choice"].is_null()) return std::nullopt;
    std::string id = p["choice"].get<std::string>();
    for (const auto& c : candidates)
        if (c.id == id) return id;
    throw OracleFailure(OracleFailure::Cause::Schema, "selected '" + id + "' is not among the candidates");
}

fusion::Verdict BackendJudge::judge(const hkg::Node& incoming, const hkg::Node& existing, double similarity) {
    std::string user = fmt::format(
        "Task: equivalence\nIncoming:\n{}\nExisting:\n{}\nCosine similarity: {:.4f}\n"
        "Return {{\"verdict\": \"Equivalent\" | \"Variant\" | \"Distinct\"}}.",
        hkg::node_to_json(incoming).dump(), hkg::node_to_json(existing).dump(), similarity);
    json p = payload_of(backend_->chat(request(Schema::Equivalence, std::move(user))));
    const std::string v = p["verdict"].get<std::string>();
    if (v == "Equivalent") return fusion::Verdict::Equivalent;
    if (v == "Variant") return fusion::Verdict::Variant;
    return fusion::Verdict::Distinct;
}

Transcript transcript_from_json(const json& j) {
    Transcript t;
    if (j.is_array()) {
        t.backend = scripted_entries_from_json(j);
        return t;
    }
    if (!j.is_object()) throw OracleFailure(OracleFailure::Cause::Schema, "transcript must be an object or a list");
    for (const auto& [k, v] : j.items())
        if (k != "relevance" && k != "backend")
            throw OracleFailure(OracleFailure::Cause::Schema, "transcript: unknown field '" + k + "'");
    if (j.contains("relevance")) t.relevance = memory::transcript_from_json(j["relevance"]);
    if (j.contains("backend")) t.backend = scripted_entries_from_json(j["backend"]);
    return t;
}

Transcript load_transcript(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw OracleFailure(OracleFailure::Cause::Transport, "cannot read transcript " + p.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw OracleFailure(OracleFailure::Cause::Schema, p.string() + " is not JSON");
    return transcript_from_json(j);
}

}  // namespace evopoc::oracle
