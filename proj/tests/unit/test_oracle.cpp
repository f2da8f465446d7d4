#include "evopoc/oracle/reasoner.hpp"
#include "support/paths.hpp"

#include <doctest.h>

#include <deque>
#include <variant>

using namespace evopoc;
using namespace evopoc::oracle;
using nlohmann::json;

namespace {

// Replays canned HTTP outcomes; a bool entry is a transport failure (true = timeout).
class StubTransport final : public Transport {
public:
    std::deque<std::variant<HttpReply, bool>> queue;
    std::vector<json> bodies;

    HttpReply post(const std::string&, const std::string& body, const std::string&,
                   std::chrono::milliseconds) override {
        bodies.push_back(json::parse(body));
        REQUIRE(!queue.empty());
        auto next = queue.front();
        queue.pop_front();
        if (auto* timeout = std::get_if<bool>(&next)) throw TransportError(*timeout, "stub failure");
        return std::get<HttpReply>(next);
    }
};

HttpReply completion(const std::string& content) {
    json j = {{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})}};
    return {200, j.dump()};
}

LiveConfig config() {
    LiveConfig c;
    c.url = "http://localhost:1/v1/chat/completions";
    c.model = "test";
    c.retries = 2;
    return c;
}

json bego_plan() {
    json p = testing::read_json(testing::fixture("bego/plan.json"));
    p.erase("projection");
    return p;
}

json bego_script() {
    return {{"projection", testing::read_json(testing::fixture("bego/plan.json"))["projection"]}};
}

pipeline::ExecutionEnv env() { return pipeline::load_env(testing::fixture("bego/env.json")); }

BackendRequest relevance_request() { return {{{"user", "Task: relevance"}}, Schema::Relevance}; }

}  // namespace

TEST_CASE("scripted backend replays in order and then runs out") {
    auto backend = std::make_shared<ScriptedBackend>(
        std::vector<ScriptedEntry>{{Schema::Relevance, std::nullopt, {{"keep", true}, {"confidence", 0.9}}}});
    auto r = backend->chat(relevance_request());
    REQUIRE(r.payload);
    CHECK((*r.payload)["keep"] == true);
    CHECK(backend->remaining() == 0);
    try {
        backend->chat(relevance_request());
        FAIL("expected exhaustion");
    } catch (const OracleFailure& e) {
        CHECK(e.cause() == OracleFailure::Cause::Exhausted);
    }
}

TEST_CASE("scripted backend rejects a schema or text mismatch") {
    ScriptedBackend wrong_schema({{Schema::Plan, std::nullopt, bego_plan()}});
    CHECK_THROWS_AS(wrong_schema.chat(relevance_request()), OracleFailure);

    ScriptedBackend wrong_text({{Schema::Relevance, std::string("BEGO"), {{"keep", false}}}});
    try {
        wrong_text.chat(relevance_request());
        FAIL("expected mismatch");
    } catch (const OracleFailure& e) {
        CHECK(e.cause() == OracleFailure::Cause::Mismatch);
    }
    CHECK(wrong_text.consumed() == 0);
}

TEST_CASE("relevance payloads are checked against their schema") {
    CHECK_FALSE(schema_error(Schema::Relevance, {{"keep", true}, {"confidence", 0.5}}));
    CHECK_FALSE(schema_error(Schema::Relevance, {{"keep", false}}));
    CHECK(schema_error(Schema::Relevance, {{"keep", true}}));
    CHECK(schema_error(Schema::Relevance, {{"keep", true}, {"confidence", 1.5}}));
    CHECK(schema_error(Schema::Relevance, {{"keep", "yes"}}));
    CHECK(schema_error(Schema::Selection, json::object()));
    CHECK_FALSE(schema_error(Schema::Selection, {{"choice", nullptr}}));
    CHECK(schema_error(Schema::Equivalence, {{"verdict", "Same"}}));
    CHECK(schema_error(Schema::Plan, {{"steps", 3}}));
}

TEST_CASE("json blocks are pulled out of fenced or bare replies") {
    auto fenced = extract_json_block("Here it is:\n```json\n{\"keep\": false}\n```\nDone.");
    REQUIRE(fenced);
    CHECK((*fenced)["keep"] == false);
    auto bare = extract_json_block("{\"choice\": null}");
    REQUIRE(bare);
    CHECK(bare->contains("choice"));
    CHECK_FALSE(extract_json_block("no structure here"));
}

TEST_CASE("relevance verdicts pass through the backend unchanged") {
    auto backend = std::make_shared<ScriptedBackend>(std::vector<ScriptedEntry>{
        {Schema::Relevance, std::string("Candidate"), {{"keep", true}, {"confidence", 0.9}, {"rationale", "mint path"}}},
        {Schema::Selection, std::nullopt, {{"choice", "fm:unchecked-mint"}}},
        {Schema::Selection, std::nullopt, {{"choice", "fm:elsewhere"}}},
        {Schema::Equivalence, std::nullopt, {{"verdict", "Variant"}}}});
    BackendRelevance rel(backend);
    memory::ContractContext ctx;
    ctx.summary = "token with signature-gated mint";
    memory::WorkingMemory wm;
    hkg::Node n;
    n.id = "cs:mint";
    n.description = "mint guarded by signature check";
    auto v = rel.judge(ctx, wm, n, 0);
    CHECK(v.keep);
    REQUIRE(v.confidence);
    CHECK(*v.confidence == doctest::Approx(0.9));
    CHECK(v.rationale == "mint path");

    std::vector<fusion::Scored> cands{{"fm:unchecked-mint", 0.8}, {"fm:reentrancy", 0.4}};
    CHECK(rel.select(ctx, wm, hkg::Layer::FailureMode, cands) == std::optional<std::string>("fm:unchecked-mint"));
    CHECK_THROWS_AS(rel.select(ctx, wm, hkg::Layer::FailureMode, cands), OracleFailure);

    BackendJudge judge(backend);
    CHECK(judge.judge(n, n, 0.95) == fusion::Verdict::Variant);
}

TEST_CASE("live backend reads chat completions and retries transport failures") {
    auto t = std::make_shared<StubTransport>();
    t->queue.push_back(true);
    t->queue.push_back(HttpReply{503, "busy"});
    t->queue.push_back(completion("```json\n{\"keep\": true, \"confidence\": 0.7}\n```"));
    LiveBackend b(config(), t);
    auto r = b.chat(relevance_request());
    REQUIRE(r.payload);
    CHECK((*r.payload)["confidence"] == 0.7);
    CHECK(b.requests_sent() == 3);
    CHECK(t->bodies.front()["model"] == "test");
    CHECK(t->bodies.front()["messages"].back()["content"] == "Task: relevance");
}

TEST_CASE("live backend gives up after its retry budget") {
    auto t = std::make_shared<StubTransport>();
    for (int i = 0; i < 3; ++i) t->queue.push_back(true);
    LiveBackend b(config(), t);
    try {
        b.chat(relevance_request());
        FAIL("expected timeout");
    } catch (const OracleFailure& e) {
        CHECK(e.cause() == OracleFailure::Cause::Timeout);
    }
    CHECK(t->queue.empty());
}

TEST_CASE("malformed payload is re-asked once and then fails with Schema") {
    auto t = std::make_shared<StubTransport>();
    t->queue.push_back(completion("I think we should keep it."));
    t->queue.push_back(completion("```json\n{\"keep\": true}\n```"));
    LiveBackend b(config(), t);
    try {
        b.chat(relevance_request());
        FAIL("expected schema failure");
    } catch (const OracleFailure& e) {
        CHECK(e.cause() == OracleFailure::Cause::Schema);
    }
    REQUIRE(t->bodies.size() == 2);
    CHECK(t->bodies[1]["messages"].size() == 3);
    CHECK(t->bodies[1]["messages"][1]["role"] == "assistant");
}

TEST_CASE("malformed then valid payload succeeds on the re-ask") {
    auto t = std::make_shared<StubTransport>();
    t->queue.push_back(completion("not json"));
    t->queue.push_back(completion("{\"keep\": false}"));
    LiveBackend b(config(), t);
    auto r = b.chat(relevance_request());
    REQUIRE(r.payload);
    CHECK((*r.payload)["keep"] == false);
}

TEST_CASE("plans must be grounded in a non-empty working memory") {
    json plan = bego_plan();
    plan["steps"][0]["nodes"] = {"prim:mint-empty-sig"};
    memory::WorkingMemory wm;
    wm.accepted[hkg::Layer::ContractSemantics] = {"cs:mint"};

    Reasoner absent(std::make_shared<ScriptedBackend>(std::vector<ScriptedEntry>{{Schema::Plan, std::nullopt, plan}}));
    CHECK_THROWS_AS(absent.generate_plan(wm, {}), pipeline::PlanSchemaViolation);

    wm.accepted[hkg::Layer::ExploitPrimitive] = {"prim:mint-empty-sig"};
    Reasoner present(std::make_shared<ScriptedBackend>(std::vector<ScriptedEntry>{{Schema::Plan, std::nullopt, plan}}));
    auto p = present.generate_plan(wm, {});
    CHECK(p.steps.size() == 3);
}

TEST_CASE("scripted plans skip grounding when the working memory is empty") {
    json plan = bego_plan();
    plan["steps"][0]["nodes"] = {"prim:anything"};
    Reasoner r(std::make_shared<ScriptedBackend>(std::vector<ScriptedEntry>{{Schema::Plan, std::nullopt, plan}}));
    CHECK(r.generate_plan(memory::WorkingMemory{}, {}).steps.size() == 3);
}

TEST_CASE("plans out of phase order are rejected") {
    json plan = bego_plan();
    plan["steps"][0]["phase"] = "Extraction";
    plan["steps"][1]["phase"] = "Preparation";
    Reasoner r(std::make_shared<ScriptedBackend>(std::vector<ScriptedEntry>{{Schema::Plan, std::nullopt, plan}}));
    CHECK_THROWS_AS(r.generate_plan(memory::WorkingMemory{}, {}), pipeline::PlanSchemaViolation);
}

TEST_CASE("diagnostics are forwarded in the plan request") {
    pipeline::Diagnostic d;
    d.iteration = 1;
    d.kind = pipeline::Diagnostic::Kind::PathInfeasible;
    d.step = 0;
    d.witness = {"false"};
    Reasoner r(std::make_shared<ScriptedBackend>(
        std::vector<ScriptedEntry>{{Schema::Plan, std::string("PathInfeasible"), bego_plan()}}));
    CHECK_NOTHROW(r.generate_plan(memory::WorkingMemory{}, {d}));
}

TEST_CASE("scripts naming unknown pools are rejected") {
    auto e = env();
    auto plan = pipeline::plan_from_json(bego_plan());
    Reasoner ok(std::make_shared<ScriptedBackend>(std::vector<ScriptedEntry>{{Schema::Script, std::nullopt, bego_script()}}));
    CHECK(ok.generate_script(plan, e).projection.size() == 3);

    json bad = bego_script();
    bad["projection"][2]["pool"] = "ghost";
    Reasoner r(std::make_shared<ScriptedBackend>(std::vector<ScriptedEntry>{{Schema::Script, std::nullopt, bad}}));
    CHECK_THROWS_AS(r.generate_script(plan, e), pipeline::ProjectionSchemaViolation);

    json extra = bego_script();
    extra["calls"] = {{"7", "BEGO.burn();"}};
    Reasoner r2(std::make_shared<ScriptedBackend>(std::vector<ScriptedEntry>{{Schema::Script, std::nullopt, extra}}));
    CHECK_THROWS_AS(r2.generate_script(plan, e), pipeline::ProjectionSchemaViolation);
}

TEST_CASE("transcripts load from json") {
    json j = json::array({{{"schema", "plan"}, {"response", bego_plan()}},
                          {{"schema", "script"}, {"expect", "Plan"}, {"response", bego_script()}}});
    auto entries = scripted_entries_from_json(j);
    REQUIRE(entries.size() == 2);
    CHECK(entries[1].schema == Schema::Script);
    CHECK(entries[1].expect == std::optional<std::string>("Plan"));
    CHECK_THROWS_AS(scripted_entries_from_json(json::array({{{"schema", "poem"}, {"response", 1}}})), OracleFailure);
}
