#include "evopoc/reachability/smtlib.hpp"
#include "evopoc/reachability/solver.hpp"
#include "support/random_constraints.hpp"

#include <doctest.h>

using namespace evopoc;
using namespace evopoc::reach;

namespace {

SymbolTable ints(std::initializer_list<std::string> names, std::optional<BigInt> upper = std::nullopt) {
    SymbolTable t;
    for (const auto& n : names) t.declare(n, {Sort::Int, Control::Attacker, upper});
    return t;
}

}  // namespace

TEST_CASE("empty conjunction is satisfiable with an empty model") {
    auto r = check_sat({}, SymbolTable{});
    REQUIRE(r.is_sat());
    CHECK(r.model.empty());
}

TEST_CASE("contradictory bounds are unsat") {
    auto x = symbol("x", Sort::Int);
    auto r = check_sat({gt(x, int_const(5)), lt(x, int_const(3))}, ints({"x"}));
    CHECK(r.is_unsat());
}

TEST_CASE("signature-array guards admit empty arrays") {
    SymbolTable t;
    for (auto n : {"len(R)", "len(S)", "len(V)"}) t.declare(n, {Sort::Len, Control::Attacker, std::nullopt});
    t.declare("h", {Sort::Int, Control::Attacker, std::nullopt});
    auto used = map_read("txHashes", {symbol("h", Sort::Int)}, Sort::Bool);
    std::vector<ExprPtr> phi = {eq(length_of("R"), length_of("S")), eq(length_of("S"), length_of("V")), lnot(used),
                                eq(length_of("R"), int_const(0)), eq(length_of("S"), int_const(0)),
                                eq(length_of("V"), int_const(0))};
    auto r = check_sat(phi, t);
    REQUIRE(r.is_sat());
    CHECK(std::get<BigInt>(r.model.at("len(R)")) == 0);
    CHECK(std::get<BigInt>(r.model.at("len(S)")) == 0);
    CHECK(std::get<BigInt>(r.model.at("len(V)")) == 0);
    CHECK(std::get<bool>(r.model.at("txHashes[h]")) == false);
}

TEST_CASE("integrality is enforced") {
    auto x = symbol("x", Sort::Int);
    auto y = symbol("y", Sort::Int);
    auto t = ints({"x", "y"});
    // 2x == 2y + 1 has rational but no integer solutions.
    CHECK(check_sat({eq(mul(int_const(2), x), add(mul(int_const(2), y), int_const(1)))}, t).is_unsat());
    // 3 <= 2x <= 3
    CHECK(check_sat({le(int_const(3), mul(int_const(2), x)), le(mul(int_const(2), x), int_const(3))}, t).is_unsat());
    auto r = check_sat({eq(add(mul(int_const(3), x), mul(int_const(5), y)), int_const(7))}, t);
    CHECK(r.is_unsat());  // 3x + 5y = 7 has no non-negative solution
    r = check_sat({eq(add(mul(int_const(3), x), mul(int_const(5), y)), int_const(8))}, t);
    REQUIRE(r.is_sat());
    CHECK(std::get<BigInt>(r.model.at("x")) == 1);
    CHECK(std::get<BigInt>(r.model.at("y")) == 1);
}

TEST_CASE("unbounded cycles are refuted") {
    auto x = symbol("x", Sort::Int);
    auto y = symbol("y", Sort::Int);
    CHECK(check_sat({gt(x, y), gt(y, x)}, ints({"x", "y"})).is_unsat());
    auto r = check_sat({gt(x, add(y, int_const(1000000))), gt(y, int_const(5))}, ints({"x", "y"}));
    REQUIRE(r.is_sat());
    CHECK(std::get<BigInt>(r.model.at("x")) == 1000007);
}

TEST_CASE("large constants stay exact") {
    auto m = symbol("M_raw", Sort::Int);
    BigInt big = pow10(30);
    auto r = check_sat({eq(m, int_const(big))}, ints({"M_raw"}));
    REQUIRE(r.is_sat());
    CHECK(std::get<BigInt>(r.model.at("M_raw")) == big);
}

TEST_CASE("division by a constant is linearized with floor semantics") {
    auto x = symbol("x", Sort::Int);
    auto t = ints({"x"});
    auto r = check_sat({eq(div(x, int_const(4)), int_const(3)), ne(x, int_const(12))}, t);
    REQUIRE(r.is_sat());
    auto v = std::get<BigInt>(r.model.at("x"));
    CHECK(v >= 13);
    CHECK(v <= 15);
    CHECK(check_sat({eq(div(x, int_const(0)), int_const(0))}, t).is_unsat());
}

TEST_CASE("boolean structure and disequality") {
    auto x = symbol("x", Sort::Int);
    auto b = symbol("b", Sort::Bool);
    SymbolTable t = ints({"x"}, BigInt(3));
    t.declare("b", {Sort::Bool, Control::Attacker, std::nullopt});
    std::vector<ExprPtr> p = {ne(x, int_const(0)), ne(x, int_const(1)), ne(x, int_const(2)),
                              lor(eq(b, bool_const(true)), eq(x, int_const(0)))};
    auto r = check_sat(p, t);
    REQUIRE(r.is_sat());
    CHECK(std::get<BigInt>(r.model.at("x")) == 3);
    CHECK(std::get<bool>(r.model.at("b")) == true);
    p.push_back(lnot(b));
    CHECK(check_sat(p, t).is_unsat());
}

TEST_CASE("nonlinear terms: bounded enumeration or Unknown") {
    auto x = symbol("x", Sort::Int);
    auto y = symbol("y", Sort::Int);
    auto r = check_sat({eq(mul(x, y), int_const(12)), gt(x, y), gt(y, int_const(1))}, ints({"x", "y"}, BigInt(15)));
    REQUIRE(r.is_sat());
    CHECK(std::get<BigInt>(r.model.at("x")) * std::get<BigInt>(r.model.at("y")) == 12);
    CHECK(check_sat({eq(mul(x, y), int_const(13)), gt(x, int_const(1)), gt(y, int_const(1))},
                    ints({"x", "y"}, BigInt(15)))
              .is_unsat());
    auto unbounded = check_sat({eq(mul(x, y), int_const(12))}, ints({"x", "y"}));
    CHECK(unbounded.is_unknown());
}

TEST_CASE("undeclared symbols are ill-sorted") {
    auto x = symbol("x", Sort::Int);
    CHECK_THROWS_AS(check_sat({gt(x, int_const(1))}, SymbolTable{}), IllSorted);
    SymbolTable t;
    t.declare("x", {Sort::Bool, Control::Attacker, std::nullopt});
    CHECK_THROWS_AS(check_sat({gt(x, int_const(1))}, t), IllSorted);
}

TEST_CASE("minimal unsat subset isolates the conflict") {
    auto x = symbol("x", Sort::Int);
    auto y = symbol("y", Sort::Int);
    BuiltinSolver solver;
    std::vector<ExprPtr> p = {gt(y, int_const(2)), gt(x, int_const(5)), lt(y, int_const(100)), lt(x, int_const(3))};
    auto core = minimal_unsat_subset(p, ints({"x", "y"}), solver);
    REQUIRE(core.size() == 2);
    CHECK(to_string(core[0]) == "x > 5");
    CHECK(to_string(core[1]) == "x < 3");
}

TEST_CASE("randomized agreement with exhaustive enumeration") {
    testing::ConstraintGenerator gen(7);
    for (int i = 0; i < 300; ++i) {
        auto inst = gen.next();
        bool expected = testing::brute_force_sat(inst);
        auto r = check_sat(inst.predicates, inst.symbols);
        INFO("instance " << i);
        REQUIRE_FALSE(r.is_unknown());
        CHECK(r.is_sat() == expected);
        if (r.is_sat()) CHECK(satisfies(inst.predicates, r.model));
    }
}

TEST_CASE("monotonicity: adding a predicate never revives an unsat set") {
    testing::ConstraintGenerator gen(11);
    int checked = 0;
    for (int i = 0; i < 200 && checked < 50; ++i) {
        auto inst = gen.next();
        if (!check_sat(inst.predicates, inst.symbols).is_unsat()) continue;
        auto extra = gen.next();
        auto more = inst.predicates;
        for (const auto& p : extra.predicates) {
            std::map<std::string, Sort> syms;
            collect_symbols(p, syms);
            bool ok = true;
            for (auto& [n, s] : syms) ok = ok && inst.symbols.find(n) && inst.symbols.find(n)->sort == s;
            if (ok) more.push_back(p);
        }
        CHECK(check_sat(more, inst.symbols).is_unsat());
        ++checked;
    }
    CHECK(checked > 10);
}

TEST_CASE("SMT-LIB export and model parsing") {
    SymbolTable t;
    t.declare("len(R)", {Sort::Len, Control::Attacker, std::nullopt});
    t.declare("x", {Sort::Int, Control::Attacker, BigInt(15)});
    auto used = map_read("txHashes", {symbol("x", Sort::Int)}, Sort::Bool);
    auto text = to_smtlib({eq(length_of("R"), int_const(0)), lnot(used), gt(div(symbol("x", Sort::Int), int_const(2)), int_const(1))}, t);
    CHECK(text.find("(set-logic QF_LIA)") != std::string::npos);
    CHECK(text.find("(declare-const |len(R)| Int)") != std::string::npos);
    CHECK(text.find("(declare-const |txHashes[x]| Bool)") != std::string::npos);
    CHECK(text.find("(assert (<= x 15))") != std::string::npos);
    CHECK(text.find("(assert (not |txHashes[x]|))") != std::string::npos);
    CHECK(text.find("(assert (not (= 2 0)))") != std::string::npos);

    auto r = parse_smtlib_response("sat\n(model\n  (define-fun |len(R)| () Int 0)\n  (define-fun x () Int (- 3))\n"
                                   "  (define-fun |txHashes[x]| () Bool false)\n)\n");
    REQUIRE(r.is_sat());
    CHECK(std::get<BigInt>(r.model.at("len(R)")) == 0);
    CHECK(std::get<BigInt>(r.model.at("x")) == -3);
    CHECK(std::get<bool>(r.model.at("txHashes[x]")) == false);
    CHECK(parse_smtlib_response("unsat\n").is_unsat());
    CHECK(parse_smtlib_response("(error \"boom\")").is_unknown());
}
