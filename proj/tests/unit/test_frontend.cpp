#include "evopoc/frontend/parser.hpp"
#include "evopoc/frontend/project.hpp"
#include "evopoc/frontend/symbolic.hpp"
#include "evopoc/reachability/solver.hpp"
#include "support/paths.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace evopoc;
using namespace evopoc::sol;

namespace {

ProjectModel bego_model() { return filter_candidates(parse_project(load_sources(testing::fixture("bego")))); }

Sigma bego_sigma() {
    return {{"M_raw", pow10(30), std::nullopt},
            {"h", std::nullopt, std::nullopt},
            {"attacker", std::nullopt, std::nullopt},
            {"R", std::nullopt, BigInt(0)},
            {"S", std::nullopt, BigInt(0)},
            {"V", std::nullopt, BigInt(0)}};
}

std::vector<std::string> rendered(const std::vector<reach::ExprPtr>& ps) {
    std::vector<std::string> out;
    for (const auto& p : ps) out.push_back(reach::to_string(p));
    return out;
}

const FunctionDef& function(const ProjectModel& m, const std::string& c, const std::string& f) {
    const FunctionDef* fn = m.find(c)->find_function(f);
    REQUIRE(fn != nullptr);
    return *fn;
}

const char* kKitchenSink = R"(
pragma solidity ^0.8.0;
import "./Other.sol";

library MathLib {
    function twice(uint256 x) internal pure returns (uint256) { return x * 2; }
}

abstract contract Base {
    uint256 internal counter = 1;
    modifier onlyPositive(uint256 v) virtual { require(v > 0, "zero"); _; }
    function hook() internal virtual;
}

contract Kitchen is Base {
    using MathLib for uint256;
    event Done(uint256 indexed a, address b);
    struct Pair { uint256 a; uint256 b; }
    enum Mode { Off, On }

    mapping(address => mapping(uint256 => bool)) public seen;
    uint256[] public values;
    address payable public owner;
    uint256 public constant LIMIT = 10 ** 18;
    Mode public mode;

    constructor(address payable o) { owner = o; }

    receive() external payable {}

    function hook() internal override { counter += 1; }

    function run(uint256 a, uint256[] calldata xs, bool flag) external onlyPositive(a) returns (uint256 total, bool ok) {
        (uint256 p, , bool q) = (a, 2, flag);
        uint256 i;
        for (i = 0; i < xs.length; ++i) {
            if (xs[i] % 2 == 0) continue;
            else if (xs[i] > LIMIT) { break; }
            total += xs[i].twice();
        }
        while (total > 100 && !q) { total -= 1; }
        do { p--; } while (p > 5);
        unchecked { counter = counter - 1; }
        seen[msg.sender][a] = !seen[msg.sender][a] ? true : false;
        values.push(total);
        ok = flag || a >= 3 ? true : false;
        owner.transfer(1 ether);
        (bool sent, ) = owner.call{value: 1 wei}("");
        require(sent);
        emit Done(total, address(this));
        delete values;
        mode = Mode.On;
        hook();
        assembly { let x := 1 }
        return (total + uint256(uint8(p)) * -1 ** 2, ok);
    }

    function noBody(uint256) external virtual returns (uint256);
}
)";

}  // namespace

TEST_CASE("frontend: BEGO source exposes mint with six parameters and isSigned") {
    auto model = parse_project(load_sources(testing::fixture("bego")));
    const FunctionDef& mint = function(model, "BEGO", "mint");
    CHECK(mint.params.size() == 6);
    REQUIRE(mint.modifiers.size() == 1);
    CHECK(mint.modifiers[0].name == "isSigned");
    CHECK(mint.modifiers[0].args.size() == 5);
    CHECK(mint.visibility == "external");
    CHECK(model.resolve_modifier("BEGO", "isSigned") != nullptr);
    CHECK(model.resolve_function("BEGO", "_mint").owner->name == "ERC20");
    const StateVar* tx = model.find("BEGO")->find_state_var("txHashes");
    REQUIRE(tx != nullptr);
    CHECK(tx->type.is_mapping());
    CHECK(tx->type.args[0].name == "string");
    CHECK(tx->type.args[1].name == "bool");
}

TEST_CASE("frontend: empty source set and contract-free sources raise NoContracts") {
    CHECK_THROWS_AS(parse_project({}), NoContracts);
    CHECK_THROWS_AS(parse_project({{"a.sol", "pragma solidity ^0.8.0;\n"}}), NoContracts);
}

TEST_CASE("frontend: syntax errors carry a location") {
    try {
        parse_project({{"bad.sol", "contract A {\n  function f( {\n}\n"}});
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.loc().file == "bad.sol");
        CHECK(e.loc().line == 2);
    }
}

TEST_CASE("frontend: assembly blocks are kept as opaque statements") {
    auto model = parse_project(load_sources(testing::fixture("bego")));
    const FunctionDef& f = function(model, "PausedVault", "compute");
    REQUIRE(f.body);
    REQUIRE(f.body->size() == 1);
    CHECK(f.body->front()->kind == Stmt::Kind::Opaque);
    CHECK(f.body->front()->text.find("assembly") == 0);
}

TEST_CASE("frontend: unparse output re-parses to a structurally equal unit") {
    std::vector<SourceFile> sources = load_sources(testing::fixture("bego"));
    sources.push_back({"kitchen.sol", kKitchenSink});
    for (const auto& src : sources) {
        CAPTURE(src.path);
        SourceUnit first = parse_source(src.text, src.path);
        std::string text = unparse(first);
        SourceUnit second = parse_source(text, src.path);
        REQUIRE(first.contracts.size() == second.contracts.size());
        CHECK(first.directives == second.directives);
        for (std::size_t i = 0; i < first.contracts.size(); ++i)
            CHECK_MESSAGE(structurally_equal(first.contracts[i], second.contracts[i]), text);
        CHECK(unparse(second) == text);
    }
}

TEST_CASE("frontend: expression printing keeps precedence and associativity") {
    auto unit = parse_source(R"(contract C { function f(uint a, uint b, uint c) external {
        a = (a - b) - c; a = a - (b - c); a = (a + b) * c; a = a ** b ** c; a = (a ** b) ** c;
        a = b = c; a = !(a > b) ? 1 : 2; } })",
                             "e.sol");
    auto text = unparse(unit);
    CHECK(text.find("a = a - b - c;") != std::string::npos);
    CHECK(text.find("a = a - (b - c);") != std::string::npos);
    CHECK(text.find("a = (a + b) * c;") != std::string::npos);
    CHECK(text.find("a = a ** b ** c;") != std::string::npos);
    CHECK(text.find("a = (a ** b) ** c;") != std::string::npos);
    CHECK(text.find("a = b = c;") != std::string::npos);
    CHECK(text.find("a = !(a > b) ? 1 : 2;") != std::string::npos);
}

TEST_CASE("frontend: filtering drops test code and trusted libraries") {
    auto all = parse_project(load_sources(testing::fixture("bego")));
    CHECK(all.find("BEGOTest") != nullptr);
    CHECK(all.find("SafeMath") != nullptr);
    auto kept = filter_candidates(all);
    std::set<std::string> names;
    for (const auto& c : kept.contracts()) names.insert(c.name);
    CHECK(names == std::set<std::string>{"BEGO", "ERC20", "IERC20", "PausedVault"});
    CHECK(is_test_path("test/BEGO.t.sol"));
    CHECK(is_test_path("src/Foo.t.sol"));
    CHECK(is_test_path("pkg/test/Helper.sol"));
    CHECK_FALSE(is_test_path("src/attest/Foo.sol"));
}

TEST_CASE("frontend: only trusted libraries leaves an empty model") {
    auto all = parse_project(load_sources(testing::fixture("bego")));
    FilterOptions everything;
    everything.trusted = {"*"};
    CHECK(filter_candidates(all, everything).empty());
}

TEST_CASE("frontend: call-graph pruning matches brute-force reachability") {
    // Reference edges, read off the sources below by hand.
    const std::vector<std::string> names = {"Core", "Helper", "Used", "Orphan", "Parent", "IToken", "Dead"};
    const std::set<std::pair<std::string, std::string>> edges = {
        {"Core", "Parent"}, {"Core", "Used"}, {"Core", "IToken"}, {"Used", "Helper"}, {"Dead", "Orphan"}};
    std::vector<SourceFile> sources = {
        {"src/Core.sol", R"(
            contract Parent { function p() internal {} }
            contract Core is Parent {
                function go(address t, uint x) external returns (uint) { IToken(t).pull(); return Used.f(x); }
            })"},
        {"src/Libs.sol", R"(
            library Helper { function g(uint x) internal pure returns (uint) { return x + 1; } }
            library Used { function f(uint x) internal pure returns (uint) { return Helper.g(x); } }
            library Orphan { function h() internal pure {} }
            library Dead { function d() external pure { Orphan.h(); } }
            interface IToken { function pull() external; })"},
    };
    auto kept = filter_candidates(parse_project(sources));

    // Roots: non-library, non-interface contracts with external entry points.
    std::set<std::string> roots = {"Core"};
    std::size_t n = names.size();
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) reach[i][i] = true;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (edges.count({names[i], names[j]})) reach[i][j] = true;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (reach[i][k] && reach[k][j]) reach[i][j] = true;
    std::set<std::string> expected;
    for (std::size_t i = 0; i < n; ++i)
        if (roots.count(names[i]))
            for (std::size_t j = 0; j < n; ++j)
                if (reach[i][j]) expected.insert(names[j]);

    std::set<std::string> got;
    for (const auto& c : kept.contracts()) got.insert(c.name);
    CHECK(got == expected);
    CHECK(got.count("Helper") == 1);
    CHECK(got.count("Orphan") == 0);
}

TEST_CASE("frontend: BEGO mint traversal reaches _mint through the modifier chain") {
    auto model = bego_model();
    auto path = traverse(model, "BEGO", "mint", {TargetCategory::StateModification, "_mint"});
    CHECK(path.functions() == std::vector<std::string>{"mint", "isSigned", "checkSignParams", "isSigners", "_mint"});
    REQUIRE(!path.hops.empty());
    CHECK(path.hops.back().kind == PathHop::Kind::Sink);
    CHECK(path.hops.back().contract == "ERC20");
    std::size_t skips = std::count_if(path.hops.begin(), path.hops.end(),
                                      [](const PathHop& h) { return h.kind == PathHop::Kind::LoopSkip; });
    CHECK(skips == 2);
    for (const auto& h : path.hops) {
        if (h.name.empty()) continue;
        bool known = model.resolve_function(path.contract, h.name).function ||
                     model.resolve_modifier(path.contract, h.name);
        CHECK_MESSAGE(known, h.name);
    }
}

TEST_CASE("frontend: BEGO predicates under the empty-array sigma") {
    auto model = bego_model();
    auto path = traverse(model, "BEGO", "mint", {TargetCategory::StateModification, "_mint"});
    auto pp = collect_predicates(model, path, bego_sigma());
    CHECK(rendered(pp.predicates()) ==
          std::vector<std::string>{"len(R) == len(S)", "len(S) == len(V)", "!txHashes[h]"});
    // One guard per require on the path: checkSignParams, isSigners, txHashes.
    CHECK(pp.guards.size() == 3);
    for (const auto& g : pp.guards) CHECK(g.origin == Guard::Origin::Require);
    CHECK(pp.sigma_constraints.size() == 4);
    CHECK(pp.entry_symbols == std::vector<std::string>{"M_raw", "h", "attacker", "R", "S", "V"});
    CHECK(pp.symbols.find("len(R)")->control == reach::Control::Attacker);
    CHECK(pp.symbols.find("h")->control == reach::Control::Attacker);
    for (const auto& g : pp.guards) CHECK_FALSE(g.conservative);
    // Path binding for the sink call.
    CHECK(path.hops.back().bindings.at("to") == "_receiver");
}

TEST_CASE("frontend: zero-length loop bounds are satisfiable") {
    auto model = bego_model();
    auto path = traverse(model, "BEGO", "mint", {TargetCategory::StateModification, "_mint"});
    auto pp = collect_predicates(model, path, bego_sigma());
    REQUIRE(pp.bounds.size() == 2);
    std::vector<reach::ExprPtr> all = pp.sigma_constraints;
    for (const auto& b : pp.bounds) {
        CHECK_FALSE(b.entered);
        all.push_back(b.condition);
    }
    auto r = reach::check_sat(all, pp.symbols);
    REQUIRE(r.is_sat());
    CHECK(std::get<BigInt>(r.model.at("len(R)")) == 0);
}

TEST_CASE("frontend: entry with empty body has no path to a fund transfer") {
    auto model = bego_model();
    CHECK_THROWS_AS(traverse(model, "PausedVault", "noop", {TargetCategory::FundTransfer, std::nullopt}), NoPath);
    CHECK(enumerate_paths(model, "PausedVault", "noop", {TargetCategory::FundTransfer, std::nullopt}, 16).empty());
}

TEST_CASE("frontend: unbounded recursion raises DepthExceeded") {
    auto model = parse_project({{"r.sol", R"(
        contract R {
            uint256 total;
            function go(uint256 x) external { spin(x); }
            function spin(uint256 x) internal { spin(x + 1); }
            function _burn(uint256 x) internal { total = x; }
        })"}});
    CHECK_THROWS_AS(traverse(model, "R", "go", {TargetCategory::StateModification, "_burn"}), DepthExceeded);
    TraversalOptions shallow;
    shallow.depth_limit = 3;
    CHECK_THROWS_AS(traverse(model, "R", "go", {TargetCategory::StateModification, "_burn"}, shallow), DepthExceeded);
}

TEST_CASE("frontend: guards over external returns use fresh conservative symbols") {
    auto model = bego_model();
    auto path = traverse(model, "PausedVault", "sweep", {TargetCategory::FundTransfer, "transfer"});
    CHECK(path.functions() == std::vector<std::string>{"sweep", "transfer"});
    auto pp = collect_predicates(model, path, {});
    REQUIRE(pp.guards.size() == 1);
    CHECK(pp.guards[0].conservative);
    auto preds = pp.predicates();
    REQUIRE(preds.size() == 1);
    std::map<std::string, reach::Sort> used;
    reach::collect_symbols(preds[0], used);
    REQUIRE(used.size() == 1);
    CHECK(pp.symbols.find(used.begin()->first)->control == reach::Control::ExternalDefault);
}

TEST_CASE("frontend: external call target category") {
    auto model = bego_model();
    auto path = traverse(model, "PausedVault", "sweep", {TargetCategory::ExternalCall, std::nullopt});
    CHECK(path.hops.back().name == "balanceOf");
    CHECK(path.hops.back().contract == "IERC20");
}

TEST_CASE("frontend: require(false) yields a literal false guard") {
    auto model = bego_model();
    auto path = traverse(model, "PausedVault", "emergencyMint", {TargetCategory::StateModification, "_mint"});
    auto pp = collect_predicates(model, path, {});
    REQUIRE(pp.predicates().size() == 1);
    CHECK(reach::to_string(pp.predicates()[0]) == "false");
    CHECK(reach::check_sat(pp.predicates(), pp.symbols).is_unsat());
}

TEST_CASE("frontend: guard-free path yields no predicates") {
    auto model = bego_model();
    auto path = traverse(model, "BEGO", "approve", {TargetCategory::StateModification, "allowance"});
    CHECK(path.functions() == std::vector<std::string>{"approve", "allowance"});
    auto pp = collect_predicates(model, path, {});
    CHECK(pp.guards.empty());
    CHECK(pp.predicates().empty());
}

TEST_CASE("frontend: branches are enumerated then-first and alternates are distinct") {
    auto model = parse_project({{"b.sol", R"(
        contract B {
            uint256 total;
            function f(uint256 x) external {
                if (x > 10) { _mint(x); } else { require(x == 3); _mint(x + 1); }
            }
            function _mint(uint256 x) internal { total = x; }
        })"}});
    auto paths = enumerate_paths(model, "B", "f", {TargetCategory::StateModification, "_mint"}, 16);
    REQUIRE(paths.size() == 2);
    CHECK(paths[0].decisions == std::vector<int>{0});
    CHECK(paths[1].decisions == std::vector<int>{1});
    auto first = collect_predicates(model, paths[0], {});
    CHECK(rendered(first.predicates()) == std::vector<std::string>{"x > 10"});
    auto second = collect_predicates(model, paths[1], {});
    CHECK(rendered(second.predicates()) == std::vector<std::string>{"!(x > 10)", "x == 3"});
    CHECK(second.guards[0].origin == Guard::Origin::Branch);
}

TEST_CASE("frontend: mapping writes are visible to later reads and casts coerce") {
    auto model = parse_project({{"m.sol", R"(
        contract M {
            mapping(address => uint256) bal;
            function f(address who, uint256 amt) external {
                bal[who] = amt;
                require(bal[who] >= 5);
                require(uint256(uint160(who)) != 0);
                require(amt.add(1) > 2 && amt % 4 == 1);
                _burn(who);
            }
            function _burn(address who) internal { delete bal[who]; }
        })"}});
    auto path = traverse(model, "M", "f", {TargetCategory::StateModification, "_burn"});
    auto pp = collect_predicates(model, path, {});
    CHECK(rendered(pp.predicates()) ==
          std::vector<std::string>{"amt >= 5", "who != 0", "amt + 1 > 2", "amt - 4 * (amt / 4) == 1"});
}

TEST_CASE("frontend: bitwise guards raise UnsupportedExpression") {
    auto model = parse_project({{"u.sol", R"(
        contract U {
            uint256 total;
            function f(uint256 x) external { uint256 y = x + 1; require(x & 1 == 0); _mint(y); }
            function _mint(uint256 y) internal { total = y; }
        })"}});
    auto path = traverse(model, "U", "f", {TargetCategory::StateModification, "_mint"});
    CHECK_THROWS_AS(collect_predicates(model, path, {}), UnsupportedExpression);
}
