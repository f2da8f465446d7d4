#include "evopoc/memory/working_memory.hpp"

#include <fmt/format.h>
#include <fnmatch.h>

#include <algorithm>

namespace evopoc::memory {

using hkg::EdgeKind;
using hkg::Graph;
using hkg::Node;
using hkg::NodeKind;
using nlohmann::json;

bool WorkingMemory::evaluated(const std::string& id) const {
    return std::any_of(trace.begin(), trace.end(), [&](const TraceEntry& t) { return t.candidate == id; });
}

bool WorkingMemory::is_accepted(const std::string& id) const {
    for (const auto& [layer, ids] : accepted)
        if (std::find(ids.begin(), ids.end(), id) != ids.end()) return true;
    return false;
}

std::vector<std::string> WorkingMemory::all_accepted() const {
    std::vector<std::string> out;
    for (auto l : hkg::kLayers) {
        auto it = accepted.find(l);
        if (it != accepted.end()) out.insert(out.end(), it->second.begin(), it->second.end());
    }
    return out;
}

bool WorkingMemory::complete() const {
    for (auto l : hkg::kLayers) {
        auto it = accepted.find(l);
        if (it == accepted.end() || it->second.empty()) return false;
    }
    return true;
}

bool glob_match(const std::string& pattern, const std::string& text) {
    return ::fnmatch(pattern.c_str(), text.c_str(), 0) == 0;
}

ScriptedRelevance::ScriptedRelevance(std::vector<TranscriptEntry> entries) : entries_(std::move(entries)) {}

RelevanceVerdict ScriptedRelevance::judge(const ContractContext&, const WorkingMemory&, const Node& candidate, int) {
    if (next_ < entries_.size() && glob_match(entries_[next_].match, candidate.id)) {
        const auto& e = entries_[next_++];
        return {e.keep, e.confidence, e.rationale};
    }
    return {false, 0.0, "no matching transcript entry"};
}

std::optional<std::string> ScriptedRelevance::select(const ContractContext&, const WorkingMemory&, Layer,
                                                     const std::vector<fusion::Scored>& candidates) {
    if (next_ >= entries_.size()) return std::nullopt;
    for (const auto& c : candidates) {
        if (glob_match(entries_[next_].match, c.id)) {
            bool keep = entries_[next_++].keep;
            return keep ? std::optional<std::string>(c.id) : std::nullopt;
        }
    }
    return std::nullopt;
}

std::vector<TranscriptEntry> transcript_from_json(const json& j) {
    if (!j.is_array()) throw std::invalid_argument("relevance transcript must be a list");
    std::vector<TranscriptEntry> out;
    for (const auto& e : j) {
        if (!e.is_object() || !e.contains("match") || !e.at("match").is_string() || !e.contains("keep") ||
            !e.at("keep").is_boolean())
            throw std::invalid_argument("transcript entry needs string 'match' and boolean 'keep': " + e.dump());
        TranscriptEntry t;
        t.match = e.at("match").get<std::string>();
        t.keep = e.at("keep").get<bool>();
        if (e.contains("confidence")) {
            if (!e.at("confidence").is_number()) throw std::invalid_argument("confidence must be a number");
            double c = e.at("confidence").get<double>();
            if (c < 0 || c > 1) throw std::invalid_argument("confidence must lie in [0, 1]");
            t.confidence = c;
        }
        if (t.keep && !t.confidence) throw std::invalid_argument("kept entry '" + t.match + "' needs a confidence");
        t.rationale = e.value("rationale", "");
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<fusion::Scored> seed_retrieval(const Graph&, const fusion::VectorIndex& index,
                                           const fusion::EmbeddingProvider& provider, const ContractContext& ctx,
                                           std::size_t k) {
    return index.topk({Layer::ContractSemantics, NodeKind::Protocol, hkg::Granularity::PrimaryCategory},
                      provider.embed(ctx.summary), k);
}

namespace {

const std::set<EdgeKind>& intra_kinds() {
    static const std::set<EdgeKind> kinds = {
        EdgeKind::enforces, EdgeKind::adopts,    EdgeKind::depends_on, EdgeKind::subsume,   EdgeKind::implements,
        EdgeKind::caused_by, EdgeKind::needs,    EdgeKind::can_cause,  EdgeKind::leads_to,  EdgeKind::start_at,
        EdgeKind::next,      EdgeKind::illustrated_by};
    return kinds;
}

void accept(WorkingMemory& wm, Layer layer, const std::string& id, int hop) {
    wm.accepted[layer].push_back(id);
    wm.frontier.emplace_back(id, hop);
}

Layer previous(Layer l) { return l == Layer::ExploitPrimitive ? Layer::FailureMode : Layer::ContractSemantics; }

NodeKind anchor_kind(Layer l) { return l == Layer::FailureMode ? NodeKind::FailurePattern : NodeKind::Skeleton; }

fusion::Embedding transition_query(const Graph& g, const WorkingMemory& wm, Layer source,
                                   const fusion::EmbeddingProvider& provider, const ContractContext& ctx) {
    std::string text = ctx.summary;
    if (auto it = wm.accepted.find(source); it != wm.accepted.end())
        for (const auto& id : it->second) text += "\n" + g.node(id).description;
    return provider.embed(text);
}

}  // namespace

void expand_layer(const Graph& g, WorkingMemory& wm, Layer layer, const ContractContext& ctx, RelevanceOracle& oracle,
                  const MemoryOptions& options) {
    while (!wm.frontier.empty()) {
        auto [id, hop] = wm.frontier.front();
        wm.frontier.pop_front();
        if (hop >= options.hop_budget) continue;
        std::vector<hkg::Neighbor> around = g.neighbors(id, hkg::Direction::Out, intra_kinds());
        auto in = g.neighbors(id, hkg::Direction::In, intra_kinds());
        around.insert(around.end(), in.begin(), in.end());
        for (const auto& nb : around) {
            const Node& cand = *nb.node;
            if (cand.layer != layer || wm.evaluated(cand.id)) continue;
            auto v = oracle.judge(ctx, wm, cand, hop + 1);
            if (v.keep && !v.confidence) throw OracleFailure(OracleFailure::Cause::Schema, "kept verdict without confidence");
            wm.trace.push_back({cand.id, layer, v.keep, v.confidence.value_or(0.0), v.rationale, hop + 1,
                                "neighbor:" + id});
            if (v.keep) accept(wm, layer, cand.id, hop + 1);
        }
    }
}

std::vector<SparseScore> sparse_scores(const Graph& g, const WorkingMemory& wm, Layer source, Layer target,
                                       const fusion::Embedding& query) {
    std::map<std::string, std::set<std::string>> votes;
    std::size_t informed = 0;
    auto it = wm.accepted.find(source);
    if (it == wm.accepted.end()) return {};
    for (const auto& src : it->second) {
        bool any = false;
        for (const auto& nb : g.neighbors(src, hkg::Direction::Out, {EdgeKind::related_exploit})) {
            if (nb.node->layer != target) continue;
            any = true;
            votes[nb.node->id].insert(src);
        }
        informed += any;
    }
    std::vector<SparseScore> out;
    for (const auto& [id, srcs] : votes) {
        const Node& n = g.node(id);
        double sim = n.embedding && n.embedding->size() == query.size() ? fusion::cosine(query, *n.embedding) : 0.0;
        out.push_back({id, static_cast<double>(srcs.size()) / static_cast<double>(informed), sim});
    }
    std::sort(out.begin(), out.end(), [](const SparseScore& a, const SparseScore& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.id < b.id;
    });
    return out;
}

std::optional<std::string> cross_layer_transition(const Graph& g, const fusion::VectorIndex& index,
                                                  const fusion::EmbeddingProvider& provider, WorkingMemory& wm,
                                                  Layer target, const ContractContext& ctx, RelevanceOracle& oracle,
                                                  const MemoryOptions& options) {
    Layer source = previous(target);
    auto query = transition_query(g, wm, source, provider, ctx);
    for (const auto& s : sparse_scores(g, wm, source, target, query)) {
        if (s.confidence < options.threshold) break;
        if (wm.evaluated(s.id)) continue;
        wm.trace.push_back({s.id, target, true, s.confidence,
                            fmt::format("{} of the linked accepted nodes converge here", s.confidence), 0, "sparse"});
        for (const auto& src : wm.accepted[source])
            if (g.has_edge({src, s.id, EdgeKind::related_exploit})) wm.links.push_back({src, s.id, EdgeKind::related_exploit});
        accept(wm, target, s.id, 0);
        return s.id;
    }

    std::vector<fusion::Scored> candidates;
    for (const auto& c : index.topk({target, anchor_kind(target), std::nullopt}, query, options.dense_k + wm.trace.size()))
        if (!wm.evaluated(c.id) && candidates.size() < options.dense_k) candidates.push_back(c);
    auto chosen = oracle.select(ctx, wm, target, candidates);
    if (chosen && std::none_of(candidates.begin(), candidates.end(), [&](const auto& c) { return c.id == *chosen; }))
        throw OracleFailure(OracleFailure::Cause::Schema, "selection '" + *chosen + "' is not among the candidates");
    for (const auto& c : candidates) {
        bool keep = chosen && c.id == *chosen;
        wm.trace.push_back({c.id, target, keep, keep ? std::clamp(c.similarity, 0.0, 1.0) : 0.0,
                            keep ? "selected from dense candidates" : "not selected", 0, "dense"});
    }
    if (chosen) accept(wm, target, *chosen, 0);
    return chosen;
}

WorkingMemory build_working_memory(const Graph& g, const fusion::VectorIndex& index,
                                   const fusion::EmbeddingProvider& provider, const ContractContext& ctx,
                                   RelevanceOracle& oracle, const MemoryOptions& options) {
    if (ctx.summary.empty()) throw std::invalid_argument("contract context has an empty summary");
    auto seeds = seed_retrieval(g, index, provider, ctx, options.seed_k);
    if (seeds.empty()) throw NoSeedFound("no protocol primary-category node in the graph");
    WorkingMemory wm;
    for (const auto& s : seeds) {
        auto v = oracle.judge(ctx, wm, g.node(s.id), 0);
        if (v.keep && !v.confidence) throw OracleFailure(OracleFailure::Cause::Schema, "kept verdict without confidence");
        wm.trace.push_back({s.id, Layer::ContractSemantics, v.keep, v.confidence.value_or(0.0), v.rationale, 0, "seed"});
        if (v.keep) accept(wm, Layer::ContractSemantics, s.id, 0);
    }
    if (wm.accepted[Layer::ContractSemantics].empty()) {
        wm.stalled_at = Layer::ContractSemantics;
        return wm;
    }
    expand_layer(g, wm, Layer::ContractSemantics, ctx, oracle, options);
    for (Layer target : {Layer::FailureMode, Layer::ExploitPrimitive}) {
        if (!cross_layer_transition(g, index, provider, wm, target, ctx, oracle, options)) {
            wm.stalled_at = target;
            return wm;
        }
        expand_layer(g, wm, target, ctx, oracle, options);
    }
    return wm;
}

json to_json(const WorkingMemory& wm) {
    json accepted = json::object();
    for (auto l : hkg::kLayers) {
        auto it = wm.accepted.find(l);
        accepted[std::string(hkg::to_string(l))] = it == wm.accepted.end() ? json::array() : json(it->second);
    }
    json links = json::array();
    for (const auto& e : wm.links) links.push_back({{"src", e.src}, {"dst", e.dst}});
    json trace = json::array();
    for (const auto& t : wm.trace)
        trace.push_back({{"candidate", t.candidate},
                         {"layer", hkg::to_string(t.layer)},
                         {"keep", t.keep},
                         {"confidence", t.confidence},
                         {"rationale", t.rationale},
                         {"hop", t.hop},
                         {"via", t.via}});
    json out = {{"accepted", accepted}, {"links", links}, {"trace", trace}};
    out["stalled_at"] = wm.stalled_at ? json(hkg::to_string(*wm.stalled_at)) : json(nullptr);
    return out;
}

}  // namespace evopoc::memory
