#include "evopoc/cli/commands.hpp"

#include "evopoc/cli/config.hpp"
#include "evopoc/fusion/embedding.hpp"
#include "evopoc/fusion/fusion.hpp"
#include "evopoc/ontology/serialize.hpp"
#include "evopoc/pipeline/poc.hpp"
#include "evopoc/pipeline/synthesis.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <fstream>
#include <thread>

namespace evopoc::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Failure that maps straight to an exit code.
struct Exit {
    int code;
    std::string message;
};

Config config_from(const std::string& path) {
    Config c;
    try {
        if (!path.empty()) c = load_config(path);
        apply_backend_env(c);
    } catch (const ConfigError& e) {
        throw Exit{exit_code::input, std::string("config: ") + e.what()};
    }
    return c;
}

fs::path store_path(const Config& c, const std::string& flag) {
    if (!flag.empty()) return flag;
    if (!c.store.empty()) return c.store;
    throw Exit{exit_code::input, "no graph store given (--store or 'store' in the config)"};
}

// A missing store file is an empty graph.
hkg::Graph open_store(const fs::path& p) {
    if (!fs::exists(p)) return {};
    try {
        return hkg::load_graph(p);
    } catch (const std::exception& e) {
        throw Exit{exit_code::store_or_oracle, std::string("store: ") + e.what()};
    }
}

void write_file(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw Exit{exit_code::store_or_oracle, "cannot write " + p.string()};
    out << text;
}

pipeline::ExecutionEnv env_from(const std::string& path, const Config& c) {
    std::ifstream in(path);
    if (!in) throw Exit{exit_code::input, "cannot read env " + path};
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Exit{exit_code::input, path + " is not JSON"};
    try {
        if (j.is_object() && j.contains("pools") && j["pools"].is_array())
            for (auto& p : j["pools"])
                if (p.is_object() && !p.contains("gamma_ppm")) p["gamma_ppm"] = c.gamma_ppm;
        if (!c.numeraire.empty() && j.is_object()) j["numeraire"] = c.numeraire;
        return pipeline::env_from_json(j);
    } catch (const pipeline::EnvError& e) {
        throw Exit{exit_code::input, e.what()};
    }
}

sol::ProjectModel project_from(const std::string& dir) {
    if (!fs::is_directory(dir)) throw Exit{exit_code::input, dir + " is not a directory"};
    try {
        return sol::filter_candidates(sol::parse_project(sol::load_sources(dir)));
    } catch (const sol::ParseError& e) {
        throw Exit{exit_code::input, std::string("parse error: ") + e.what()};
    } catch (const sol::FrontendError& e) {
        throw Exit{exit_code::input, e.what()};
    }
}

std::size_t nodes_in(const hkg::Graph& g, hkg::Layer l) {
    std::size_t n = 0;
    for (const auto& [id, node] : g.nodes()) n += node.layer == l;
    return n;
}

// ---- hkg ----

json ingest_all(hkg::Graph& g, const std::vector<std::string>& files, const Config& c) {
    fusion::HashedEmbedding provider(c.embedding_dim);
    fusion::VectorIndex index = fusion::VectorIndex::build(g, provider);
    fusion::ThresholdJudge judge(c.fusion_tau, c.fusion_variant_floor);
    fusion::FusionOptions opt;
    opt.k = c.fusion_k;
    json reports = json::array();
    for (const auto& f : files) {
        fusion::CaseSubgraph cs;
        try {
            cs = fusion::load_case(f);
        } catch (const std::exception& e) {
            throw Exit{exit_code::input, f + ": " + e.what()};
        }
        try {
            reports.push_back(fusion::report_to_json(fusion::ingest_case(g, index, cs, judge, provider, opt)));
        } catch (const hkg::OntologyError& e) {
            throw Exit{exit_code::input, f + ": " + e.what()};
        } catch (const fusion::MalformedCase& e) {
            throw Exit{exit_code::input, f + ": " + e.what()};
        }
    }
    return reports;
}

std::string report_line(const json& r) {
    return fmt::format("{}: {} inserted, {} merged, {} variants, {} edges added", r.value("case_id", "?"),
                       r["inserted"].get<std::size_t>(), r["merged"].get<std::size_t>(),
                       r["variants"].get<std::size_t>(), r["edges_added"].get<std::size_t>());
}

json stats(const hkg::Graph& g) {
    json layers = json::object();
    for (auto l : {hkg::Layer::ContractSemantics, hkg::Layer::FailureMode, hkg::Layer::ExploitPrimitive})
        layers[std::string(hkg::to_string(l))] = nodes_in(g, l);
    json edges = json::object();
    for (const auto& e : g.edges()) {
        auto k = std::string(hkg::to_string(e.kind));
        edges[k] = edges.value(k, 0) + 1;
    }
    return {{"nodes", g.node_count()}, {"edges", g.edge_count()}, {"layers", layers}, {"edge_kinds", edges}};
}

// ---- analyze ----

struct Target {
    std::string dir;
    int code = exit_code::ok;
    json report;
};

struct AnalyzeArgs {
    std::string env, backend, store, out = "evopoc-out";
};

void analyze_one(Target& t, const AnalyzeArgs& a, const Config& c, const hkg::Graph& g,
                 const fusion::VectorIndex& index, const fusion::EmbeddingProvider& provider) {
    auto model = project_from(t.dir);
    auto env = env_from(a.env, c);

    std::shared_ptr<oracle::Backend> backend;
    std::unique_ptr<memory::RelevanceOracle> relevance;
    if (a.backend.rfind("scripted:", 0) == 0) {
        oracle::Transcript tr;
        try {
            tr = oracle::load_transcript(a.backend.substr(9));
        } catch (const std::exception& e) {
            throw Exit{exit_code::input, std::string("transcript: ") + e.what()};
        }
        backend = std::make_shared<oracle::ScriptedBackend>(tr.backend);
        relevance = std::make_unique<memory::ScriptedRelevance>(tr.relevance);
    } else if (a.backend == "live") {
        backend = std::make_shared<oracle::LiveBackend>(c.backend, std::make_shared<oracle::HttpTransport>());
        relevance = std::make_unique<oracle::BackendRelevance>(backend);
    } else {
        throw Exit{exit_code::input, "--backend must be scripted:<transcript> or live"};
    }

    memory::WorkingMemory wm;
    if (g.node_count() > 0) {
        try {
            wm = memory::build_working_memory(g, index, provider, pipeline::contract_context(model), *relevance,
                                              c.memory);
        } catch (const memory::NoSeedFound& e) {
            spdlog::warn("{}: {}; continuing with an empty working memory", t.dir, e.what());
        }
    }

    pipeline::SynthesisOptions opt;
    opt.iteration_cap = c.iteration_cap;
    opt.path = c.path;
    oracle::Reasoner reasoner(backend);
    pipeline::SynthesisOutcome o;
    try {
        o = pipeline::exploit_synthesis(wm, env, model, reasoner, opt);
    } catch (const reach::MissingContract& e) {
        throw Exit{exit_code::store_or_oracle, std::string("plan: ") + e.what()};
    }

    fs::path name = fs::path(t.dir).lexically_normal();
    if (name.filename().empty()) name = name.parent_path();
    const fs::path dir = fs::path(a.out) / (name.filename().empty() ? fs::path("project") : name.filename());
    t.report = pipeline::to_json(o);
    t.report["project"] = t.dir;
    t.report["outcome_file"] = (dir / "outcome.json").string();
    if (const auto* s = std::get_if<pipeline::SynthesisSuccess>(&o)) {
        t.report["poc_file"] = (dir / "Exploit.t.sol").string();
        write_file(dir / "Exploit.t.sol", s->poc);
        t.code = exit_code::ok;
    } else {
        switch (std::get<pipeline::SynthesisFailure>(o).reason) {
        case pipeline::SynthesisFailure::Reason::PathInfeasible: t.code = exit_code::path_infeasible; break;
        case pipeline::SynthesisFailure::Reason::NotProfitable: t.code = exit_code::not_profitable; break;
        case pipeline::SynthesisFailure::Reason::IterationBudgetExhausted: t.code = exit_code::budget_exhausted; break;
        }
    }
    t.report["exit_code"] = t.code;
    write_file(dir / "outcome.json", t.report.dump(2) + "\n");
}

std::string analyze_line(const json& r) {
    if (r.contains("error")) return fmt::format("{}: error: {}", r["project"].get<std::string>(), r["error"].get<std::string>());
    if (r["outcome"] == "Success")
        return fmt::format("{}: Success after {} iteration(s), delta_w {}, PoC {}", r["project"].get<std::string>(),
                           r["iterations"].get<int>(), r["delta_w"].get<std::string>(), r["poc_file"].get<std::string>());
    return fmt::format("{}: Failure ({}) after {} iteration(s): {}", r["project"].get<std::string>(),
                       r["reason"].get<std::string>(), r["iterations"].get<int>(), r["note"].get<std::string>());
}

// ---- validate ----

int validate(const std::string& plan_path, const std::string& env_path, const std::string& project, const Config& c,
             bool human, std::ostream& out) {
    std::ifstream in(plan_path);
    if (!in) throw Exit{exit_code::input, "cannot read plan " + plan_path};
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Exit{exit_code::input, plan_path + " is not JSON"};
    auto model = project_from(project);
    auto env = env_from(env_path, c);
    pipeline::ExploitPlan plan;
    pipeline::ExploitScript script;
    try {
        plan = pipeline::plan_from_json(j);
        script = pipeline::script_from_json({{"projection", j.value("projection", json::array())}});
        pipeline::validate_projection(script.projection, env);
    } catch (const pipeline::PlanSchemaViolation& e) {
        throw Exit{exit_code::input, std::string("plan: ") + e.what()};
    } catch (const pipeline::ProjectionSchemaViolation& e) {
        throw Exit{exit_code::input, std::string("projection: ") + e.what()};
    }

    reach::PathVerdict v;
    try {
        v = reach::check_path_reachability(plan, env, model, c.path);
    } catch (const reach::MissingContract& e) {
        throw Exit{exit_code::input, e.what()};
    }
    json report = {{"reachability", reach::to_json(v)}};
    int code = exit_code::ok;
    if (!v.reachable) {
        report["verdict"] = "PathInfeasible";
        report["failed_step"] = *v.failed_step;
        code = exit_code::path_infeasible;
    } else {
        auto sim = profit::simulate(script.projection, env.initial, env.numeraire, env.attackers, env.sim);
        report["delta_w"] = profit::to_string(sim.delta_w);
        report["simulation"] = profit::to_json(sim);
        report["verdict"] = sim.profitable() ? "Profitable" : "NotProfitable";
        code = sim.profitable() ? exit_code::ok : exit_code::not_profitable;
    }
    if (!human) {
        out << report.dump(2) << "\n";
        return code;
    }
    for (const auto& s : v.steps) {
        const auto& st = plan.steps[s.step];
        out << fmt::format("step {} {}.{}: {}", s.step, st.contract, st.function, reach::to_string(s.status));
        if (!s.note.empty()) out << " (" << s.note << ")";
        out << "\n";
    }
    if (!v.reachable) {
        std::string w;
        for (const auto& p : v.witness) w += (w.empty() ? "" : "; ") + p;
        out << fmt::format("unreachable at step {}{}\n", *v.failed_step, w.empty() ? "" : ", witness: " + w);
    } else {
        out << fmt::format("delta_w: {} ({})\n", report["delta_w"].get<std::string>(),
                           report["verdict"].get<std::string>());
    }
    return code;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exploit synthesis over a hierarchical knowledge graph", "evopoc"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand
    std::string config_path;
    bool human = false;
    app.add_option("--config", config_path, "key/value configuration file")->check(CLI::ExistingFile);
    app.add_flag("--human", human, "tabular output instead of JSON");

    auto* hkg = app.add_subcommand("hkg", "graph store maintenance");
    hkg->require_subcommand(1);
    std::string store;
    std::vector<std::string> cases;
    std::string export_out;
    auto* ingest = hkg->add_subcommand("ingest", "fuse case files into the store");
    ingest->add_option("cases", cases, "case files")->required();
    ingest->add_option("--store", store, "graph store file");
    auto* fuse_report = hkg->add_subcommand("fuse-report", "report what ingesting would do, without saving");
    fuse_report->add_option("cases", cases, "case files")->required();
    fuse_report->add_option("--store", store, "graph store file");
    auto* stats_cmd = hkg->add_subcommand("stats", "per-layer node and edge counts");
    stats_cmd->add_option("--store", store, "graph store file");
    auto* export_cmd = hkg->add_subcommand("export", "write the store in the serialization format");
    export_cmd->add_option("--store", store, "graph store file");
    export_cmd->add_option("--out", export_out, "output file (stdout when omitted)");

    AnalyzeArgs aa;
    std::vector<std::string> projects;
    unsigned jobs = 1;
    auto* analyze = app.add_subcommand("analyze", "synthesize and validate an exploit for each project");
    analyze->add_option("projects", projects, "project directories")->required();
    analyze->add_option("--env", aa.env, "execution environment JSON")->required();
    analyze->add_option("--backend", aa.backend, "scripted:<transcript> or live")->required();
    analyze->add_option("--store", aa.store, "graph store file");
    analyze->add_option("--out", aa.out, "output directory")->capture_default_str();
    analyze->add_option("--jobs", jobs, "projects analyzed concurrently")->check(CLI::Range(1u, 64u));

    std::string plan_path, venv, vproject;
    auto* validate_cmd = app.add_subcommand("validate", "run both validation stages on a plan file");
    validate_cmd->add_option("plan", plan_path, "plan JSON with a projection")->required();
    validate_cmd->add_option("--env", venv, "execution environment JSON")->required();
    validate_cmd->add_option("--project", vproject, "project directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? exit_code::ok : exit_code::input;
    }

    try {
        Config c = config_from(config_path);

        if (hkg->parsed()) {
            const fs::path sp = store_path(c, store);
            hkg::Graph g = open_store(sp);
            if (ingest->parsed() || fuse_report->parsed()) {
                json reports = ingest_all(g, cases, c);
                if (ingest->parsed()) {
                    try {
                        hkg::save_graph(g, sp);
                    } catch (const std::exception& e) {
                        throw Exit{exit_code::store_or_oracle, std::string("store: ") + e.what()};
                    }
                }
                if (human)
                    for (const auto& r : reports) out << report_line(r) << "\n";
                else
                    out << reports.dump(2) << "\n";
            } else if (stats_cmd->parsed()) {
                json s = stats(g);
                if (!human) {
                    out << s.dump(2) << "\n";
                } else {
                    out << fmt::format("nodes {}  edges {}\n", s["nodes"].get<std::size_t>(), s["edges"].get<std::size_t>());
                    for (const auto& [l, n] : s["layers"].items()) out << fmt::format("  {:<18} {}\n", l, n.get<std::size_t>());
                }
            } else {
                std::string text = hkg::graph_to_json(g).dump(2) + "\n";
                if (export_out.empty())
                    out << text;
                else
                    write_file(export_out, text);
            }
            return exit_code::ok;
        }

        if (analyze->parsed()) {
            hkg::Graph g;
            if (!aa.store.empty() || !c.store.empty()) g = open_store(store_path(c, aa.store));
            fusion::HashedEmbedding provider(c.embedding_dim);
            const fusion::VectorIndex index = fusion::VectorIndex::build(g, provider);

            std::vector<Target> targets;
            for (const auto& p : projects) targets.push_back(Target{p, exit_code::ok, json::object()});
            std::atomic<std::size_t> next = 0;
            auto worker = [&] {
                for (std::size_t i; (i = next++) < targets.size();) {
                    Target& t = targets[i];
                    try {
                        analyze_one(t, aa, c, g, index, provider);
                    } catch (const Exit& e) {
                        t.code = e.code;
                        t.report = {{"project", t.dir}, {"error", e.message}, {"exit_code", e.code}};
                    } catch (const OracleFailure& e) {
                        t.code = exit_code::store_or_oracle;
                        t.report = {{"project", t.dir},
                                    {"error", fmt::format("oracle ({}): {}", to_string(e.cause()), e.what())},
                                    {"exit_code", t.code}};
                    } catch (const std::exception& e) {
                        // Schema violations in oracle output and other runtime failures.
                        t.code = exit_code::store_or_oracle;
                        t.report = {{"project", t.dir}, {"error", e.what()}, {"exit_code", t.code}};
                    }
                }
            };
            std::vector<std::thread> pool;
            for (unsigned k = 1; k < std::min<std::size_t>(jobs, targets.size()); ++k) pool.emplace_back(worker);
            worker();
            for (auto& th : pool) th.join();

            int code = exit_code::ok;
            json all = json::array();
            for (const auto& t : targets) {
                if (code == exit_code::ok) code = t.code;
                if (t.report.contains("error")) err << t.dir << ": " << t.report["error"].get<std::string>() << "\n";
                if (human)
                    out << analyze_line(t.report) << "\n";
                else
                    all.push_back(t.report);
            }
            if (!human) out << (all.size() == 1 ? all[0] : all).dump(2) << "\n";
            return code;
        }

        return validate(plan_path, venv, vproject, c, human, out);
    } catch (const Exit& e) {
        err << "evopoc: " << e.message << "\n";
        return e.code;
    } catch (const OracleFailure& e) {
        err << "evopoc: oracle (" << to_string(e.cause()) << "): " << e.what() << "\n";
        return exit_code::store_or_oracle;
    }
}

}  // namespace evopoc::cli
