#pragma once

#include "evopoc/common/bigint.hpp"

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace evopoc::reach {

// Addr and Len are integer-valued; they are separate sorts so that models and
// diagnostics can say what a value stands for.
enum class Sort { Int, Bool, Addr, Len };

const char* to_string(Sort s);
inline bool is_numeric(Sort s) { return s != Sort::Bool; }

enum class Op {
    IntConst,
    BoolConst,
    Symbol,
    MapRead,
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Not,
    And,
    Or,
};

class IllSorted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Immutable, well-sorted expression node. Build through the factory
/// functions below; they check sorts and throw IllSorted.
class Expr {
public:
    Op op() const { return op_; }
    Sort sort() const { return sort_; }
    const BigInt& int_value() const { return int_value_; }
    bool bool_value() const { return bool_value_; }
    // Symbol name, or the map name of a MapRead.
    const std::string& name() const { return name_; }
    // Operands, or the key list of a MapRead.
    const std::vector<ExprPtr>& args() const { return args_; }

    friend ExprPtr int_const(BigInt v);
    friend ExprPtr bool_const(bool v);
    friend ExprPtr symbol(std::string name, Sort sort);
    friend ExprPtr map_read(std::string map, std::vector<ExprPtr> keys, Sort value_sort);
    friend ExprPtr make_node(Op op, Sort sort, std::vector<ExprPtr> args);

private:
    Expr() = default;
    Op op_ = Op::IntConst;
    Sort sort_ = Sort::Int;
    BigInt int_value_ = 0;
    bool bool_value_ = false;
    std::string name_;
    std::vector<ExprPtr> args_;
};

ExprPtr int_const(BigInt v);
ExprPtr bool_const(bool v);
ExprPtr symbol(std::string name, Sort sort);
ExprPtr map_read(std::string map, std::vector<ExprPtr> keys, Sort value_sort);

ExprPtr add(ExprPtr a, ExprPtr b);
ExprPtr sub(ExprPtr a, ExprPtr b);
ExprPtr mul(ExprPtr a, ExprPtr b);
ExprPtr div(ExprPtr a, ExprPtr b);
ExprPtr eq(ExprPtr a, ExprPtr b);
ExprPtr ne(ExprPtr a, ExprPtr b);
ExprPtr lt(ExprPtr a, ExprPtr b);
ExprPtr le(ExprPtr a, ExprPtr b);
ExprPtr gt(ExprPtr a, ExprPtr b);
ExprPtr ge(ExprPtr a, ExprPtr b);
ExprPtr lnot(ExprPtr a);
ExprPtr land(std::vector<ExprPtr> args);
ExprPtr lor(std::vector<ExprPtr> args);
inline ExprPtr land(ExprPtr a, ExprPtr b) { return land(std::vector<ExprPtr>{std::move(a), std::move(b)}); }
inline ExprPtr lor(ExprPtr a, ExprPtr b) { return lor(std::vector<ExprPtr>{std::move(a), std::move(b)}); }

/// Name of the Len-sorted symbol standing for the length of array `array`.
std::string length_symbol_name(const std::string& array);
inline ExprPtr length_of(const std::string& array) { return symbol(length_symbol_name(array), Sort::Len); }

/// Solidity-flavoured ASCII rendering, e.g. `len(R) == len(S)`, `!txHashes[h]`.
std::string to_string(const ExprPtr& e);

bool structurally_equal(const ExprPtr& a, const ExprPtr& b);

/// Every symbol (and every MapRead, keyed by its rendering) in `e`.
void collect_symbols(const ExprPtr& e, std::map<std::string, Sort>& out);
/// Top-level conjuncts of `e` (nested And flattened).
std::vector<ExprPtr> conjuncts(const ExprPtr& e);

using Value = std::variant<BigInt, bool>;
std::string to_string(const Value& v);

/// Assignment from symbol name (or MapRead rendering) to value.
using Model = std::map<std::string, Value>;

/// Direct evaluation. Integer terms are evaluated over Z with floor
/// division; a division by zero anywhere makes the result undefined
/// (nullopt), and an undefined predicate counts as violated. Unassigned
/// symbols are undefined as well.
std::optional<Value> evaluate(const ExprPtr& e, const Model& model);
bool satisfies(const std::vector<ExprPtr>& predicates, const Model& model);

/// Replaces symbols by expressions (keyed by symbol name).
ExprPtr substitute(const ExprPtr& e, const std::map<std::string, ExprPtr>& bindings);

}  // namespace evopoc::reach
