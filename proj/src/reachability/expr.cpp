#include "evopoc/reachability/expr.hpp"

#include <fmt/format.h>

#include <functional>

namespace evopoc::reach {

const char* to_string(Sort s) {
    switch (s) {
    case Sort::Int: return "Int";
    case Sort::Bool: return "Bool";
    case Sort::Addr: return "Addr";
    case Sort::Len: return "Len";
    }
    return "?";
}

ExprPtr make_node(Op op, Sort sort, std::vector<ExprPtr> args) {
    auto* raw = new Expr();
    raw->op_ = op;
    raw->sort_ = sort;
    raw->args_ = std::move(args);
    return ExprPtr(raw);
}

ExprPtr int_const(BigInt v) {
    auto* raw = new Expr();
    raw->op_ = Op::IntConst;
    raw->sort_ = Sort::Int;
    raw->int_value_ = std::move(v);
    return ExprPtr(raw);
}

ExprPtr bool_const(bool v) {
    auto* raw = new Expr();
    raw->op_ = Op::BoolConst;
    raw->sort_ = Sort::Bool;
    raw->bool_value_ = v;
    return ExprPtr(raw);
}

ExprPtr symbol(std::string name, Sort sort) {
    if (name.empty()) throw IllSorted("symbol with empty name");
    auto* raw = new Expr();
    raw->op_ = Op::Symbol;
    raw->sort_ = sort;
    raw->name_ = std::move(name);
    return ExprPtr(raw);
}

ExprPtr map_read(std::string map, std::vector<ExprPtr> keys, Sort value_sort) {
    if (map.empty() || keys.empty()) throw IllSorted("map read needs a map name and at least one key");
    for (const auto& k : keys) {
        if (!k) throw IllSorted("null map key");
    }
    auto* raw = new Expr();
    raw->op_ = Op::MapRead;
    raw->sort_ = value_sort;
    raw->name_ = std::move(map);
    raw->args_ = std::move(keys);
    return ExprPtr(raw);
}

std::string length_symbol_name(const std::string& array) { return "len(" + array + ")"; }

namespace {

bool contains_div(const ExprPtr& e) {
    if (e->op() == Op::Div) return true;
    for (const auto& a : e->args()) {
        if (contains_div(a)) return true;
    }
    return false;
}

void require_numeric(const ExprPtr& e, const char* what) {
    if (!e) throw IllSorted(fmt::format("null operand to {}", what));
    if (!is_numeric(e->sort()))
        throw IllSorted(fmt::format("{} expects numeric operands, got {}", what, to_string(e->sort())));
}

void require_bool(const ExprPtr& e, const char* what) {
    if (!e) throw IllSorted(fmt::format("null operand to {}", what));
    if (e->sort() != Sort::Bool)
        throw IllSorted(fmt::format("{} expects Bool operands, got {}", what, to_string(e->sort())));
}

bool is_int_const(const ExprPtr& e) { return e->op() == Op::IntConst; }
bool is_bool_const(const ExprPtr& e) { return e->op() == Op::BoolConst; }

// The result of mixing numeric sorts: identical sorts are preserved,
// anything else degrades to Int.
Sort arith_sort(const ExprPtr& a, const ExprPtr& b) {
    if (is_int_const(a)) return b->sort();
    if (is_int_const(b)) return a->sort();
    return a->sort() == b->sort() ? a->sort() : Sort::Int;
}

ExprPtr arith(Op op, ExprPtr a, ExprPtr b, const char* what) {
    require_numeric(a, what);
    require_numeric(b, what);
    if (is_int_const(a) && is_int_const(b)) {
        const BigInt& x = a->int_value();
        const BigInt& y = b->int_value();
        switch (op) {
        case Op::Add: return int_const(x + y);
        case Op::Sub: return int_const(x - y);
        case Op::Mul: return int_const(x * y);
        case Op::Div:
            if (y != 0) return int_const(floor_div(x, y));
            break;
        default: break;
        }
    }
    Sort s = arith_sort(a, b);
    return make_node(op, s, {std::move(a), std::move(b)});
}

ExprPtr compare(Op op, ExprPtr a, ExprPtr b, const char* what) {
    if (!a || !b) throw IllSorted(fmt::format("null operand to {}", what));
    bool eq_like = op == Op::Eq || op == Op::Ne;
    if (eq_like && a->sort() == Sort::Bool && b->sort() == Sort::Bool) {
        if (is_bool_const(a) && is_bool_const(b)) {
            bool r = a->bool_value() == b->bool_value();
            return bool_const(op == Op::Eq ? r : !r);
        }
        return make_node(op, Sort::Bool, {std::move(a), std::move(b)});
    }
    require_numeric(a, what);
    require_numeric(b, what);
    if (is_int_const(a) && is_int_const(b)) {
        const BigInt& x = a->int_value();
        const BigInt& y = b->int_value();
        bool r = false;
        switch (op) {
        case Op::Eq: r = x == y; break;
        case Op::Ne: r = x != y; break;
        case Op::Lt: r = x < y; break;
        case Op::Le: r = x <= y; break;
        case Op::Gt: r = x > y; break;
        case Op::Ge: r = x >= y; break;
        default: break;
        }
        return bool_const(r);
    }
    return make_node(op, Sort::Bool, {std::move(a), std::move(b)});
}

}  // namespace

ExprPtr add(ExprPtr a, ExprPtr b) { return arith(Op::Add, std::move(a), std::move(b), "+"); }
ExprPtr sub(ExprPtr a, ExprPtr b) { return arith(Op::Sub, std::move(a), std::move(b), "-"); }
ExprPtr mul(ExprPtr a, ExprPtr b) { return arith(Op::Mul, std::move(a), std::move(b), "*"); }
ExprPtr div(ExprPtr a, ExprPtr b) { return arith(Op::Div, std::move(a), std::move(b), "/"); }
ExprPtr eq(ExprPtr a, ExprPtr b) { return compare(Op::Eq, std::move(a), std::move(b), "=="); }
ExprPtr ne(ExprPtr a, ExprPtr b) { return compare(Op::Ne, std::move(a), std::move(b), "!="); }
ExprPtr lt(ExprPtr a, ExprPtr b) { return compare(Op::Lt, std::move(a), std::move(b), "<"); }
ExprPtr le(ExprPtr a, ExprPtr b) { return compare(Op::Le, std::move(a), std::move(b), "<="); }
ExprPtr gt(ExprPtr a, ExprPtr b) { return compare(Op::Gt, std::move(a), std::move(b), ">"); }
ExprPtr ge(ExprPtr a, ExprPtr b) { return compare(Op::Ge, std::move(a), std::move(b), ">="); }

ExprPtr lnot(ExprPtr a) {
    require_bool(a, "!");
    if (is_bool_const(a)) return bool_const(!a->bool_value());
    if (a->op() == Op::Not) return a->args()[0];
    return make_node(Op::Not, Sort::Bool, {std::move(a)});
}

namespace {

ExprPtr junction(Op op, std::vector<ExprPtr> args, const char* what) {
    const bool neutral = op == Op::And;  // true for And, false for Or
    std::vector<ExprPtr> kept;
    bool absorbed = false;
    bool any_div = false;
    for (auto& a : args) {
        require_bool(a, what);
        if (is_bool_const(a)) {
            if (a->bool_value() == neutral) continue;
            absorbed = true;
            continue;
        }
        any_div = any_div || contains_div(a);
        if (a->op() == op) {
            for (const auto& inner : a->args()) kept.push_back(inner);
        } else {
            kept.push_back(std::move(a));
        }
    }
    // An absorbing constant only wins if nothing it would hide can be
    // undefined; otherwise keep it so evaluation stays strict.
    if (absorbed) {
        if (!any_div) return bool_const(!neutral);
        kept.push_back(bool_const(!neutral));
    }
    if (kept.empty()) return bool_const(neutral);
    if (kept.size() == 1) return kept.front();
    return make_node(op, Sort::Bool, std::move(kept));
}

}  // namespace

ExprPtr land(std::vector<ExprPtr> args) { return junction(Op::And, std::move(args), "&&"); }
ExprPtr lor(std::vector<ExprPtr> args) { return junction(Op::Or, std::move(args), "||"); }

namespace {

int precedence(Op op) {
    switch (op) {
    case Op::Or: return 1;
    case Op::And: return 2;
    case Op::Eq:
    case Op::Ne: return 3;
    case Op::Lt:
    case Op::Le:
    case Op::Gt:
    case Op::Ge: return 4;
    case Op::Add:
    case Op::Sub: return 5;
    case Op::Mul:
    case Op::Div: return 6;
    case Op::Not: return 7;
    default: return 8;
    }
}

const char* op_text(Op op) {
    switch (op) {
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Eq: return "==";
    case Op::Ne: return "!=";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::Gt: return ">";
    case Op::Ge: return ">=";
    case Op::And: return "&&";
    case Op::Or: return "||";
    default: return "?";
    }
}

void render(const ExprPtr& e, std::string& out, int parent_prec) {
    switch (e->op()) {
    case Op::IntConst: out += e->int_value().str(); return;
    case Op::BoolConst: out += e->bool_value() ? "true" : "false"; return;
    case Op::Symbol: out += e->name(); return;
    case Op::MapRead:
        out += e->name();
        for (const auto& k : e->args()) {
            out += '[';
            render(k, out, 0);
            out += ']';
        }
        return;
    case Op::Not:
        out += '!';
        render(e->args()[0], out, precedence(Op::Not));
        return;
    default: break;
    }
    int prec = precedence(e->op());
    bool paren = prec <= parent_prec;
    if (paren) out += '(';
    for (std::size_t i = 0; i < e->args().size(); ++i) {
        if (i > 0) {
            out += ' ';
            out += op_text(e->op());
            out += ' ';
        }
        render(e->args()[i], out, prec);
    }
    if (paren) out += ')';
}

}  // namespace

std::string to_string(const ExprPtr& e) {
    std::string out;
    render(e, out, 0);
    return out;
}

bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->op() != b->op() || a->sort() != b->sort()) return false;
    if (a->int_value() != b->int_value() || a->bool_value() != b->bool_value() || a->name() != b->name())
        return false;
    if (a->args().size() != b->args().size()) return false;
    for (std::size_t i = 0; i < a->args().size(); ++i) {
        if (!structurally_equal(a->args()[i], b->args()[i])) return false;
    }
    return true;
}

void collect_symbols(const ExprPtr& e, std::map<std::string, Sort>& out) {
    if (e->op() == Op::Symbol) {
        out.emplace(e->name(), e->sort());
        return;
    }
    if (e->op() == Op::MapRead) out.emplace(to_string(e), e->sort());
    for (const auto& a : e->args()) collect_symbols(a, out);
}

std::vector<ExprPtr> conjuncts(const ExprPtr& e) {
    std::vector<ExprPtr> out;
    std::function<void(const ExprPtr&)> walk = [&](const ExprPtr& x) {
        if (x->op() == Op::And) {
            for (const auto& a : x->args()) walk(a);
        } else {
            out.push_back(x);
        }
    };
    walk(e);
    return out;
}

std::string to_string(const Value& v) {
    if (const auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
    return std::get<BigInt>(v).str();
}

std::optional<Value> evaluate(const ExprPtr& e, const Model& model) {
    switch (e->op()) {
    case Op::IntConst: return Value(e->int_value());
    case Op::BoolConst: return Value(e->bool_value());
    case Op::Symbol: {
        auto it = model.find(e->name());
        if (it == model.end()) return std::nullopt;
        return it->second;
    }
    case Op::MapRead: {
        // Keys must themselves be defined even though the read is looked up
        // by its rendering.
        for (const auto& k : e->args()) {
            if (!evaluate(k, model)) return std::nullopt;
        }
        auto it = model.find(to_string(e));
        if (it == model.end()) return std::nullopt;
        return it->second;
    }
    default: break;
    }

    std::vector<Value> vals;
    vals.reserve(e->args().size());
    for (const auto& a : e->args()) {
        auto v = evaluate(a, model);
        if (!v) return std::nullopt;
        vals.push_back(std::move(*v));
    }
    auto num = [&](std::size_t i) -> const BigInt& { return std::get<BigInt>(vals[i]); };
    auto boolean = [&](std::size_t i) { return std::get<bool>(vals[i]); };

    switch (e->op()) {
    case Op::Add: return Value(BigInt(num(0) + num(1)));
    case Op::Sub: return Value(BigInt(num(0) - num(1)));
    case Op::Mul: return Value(BigInt(num(0) * num(1)));
    case Op::Div:
        if (num(1) == 0) return std::nullopt;
        return Value(floor_div(num(0), num(1)));
    case Op::Eq:
    case Op::Ne: {
        bool same = vals[0] == vals[1];
        return Value(e->op() == Op::Eq ? same : !same);
    }
    case Op::Lt: return Value(num(0) < num(1));
    case Op::Le: return Value(num(0) <= num(1));
    case Op::Gt: return Value(num(0) > num(1));
    case Op::Ge: return Value(num(0) >= num(1));
    case Op::Not: return Value(!boolean(0));
    case Op::And: {
        bool r = true;
        for (std::size_t i = 0; i < vals.size(); ++i) r = r && boolean(i);
        return Value(r);
    }
    case Op::Or: {
        bool r = false;
        for (std::size_t i = 0; i < vals.size(); ++i) r = r || boolean(i);
        return Value(r);
    }
    default: return std::nullopt;
    }
}

bool satisfies(const std::vector<ExprPtr>& predicates, const Model& model) {
    for (const auto& p : predicates) {
        auto v = evaluate(p, model);
        if (!v) return false;
        const bool* b = std::get_if<bool>(&*v);
        if (!b || !*b) return false;
    }
    return true;
}

ExprPtr substitute(const ExprPtr& e, const std::map<std::string, ExprPtr>& bindings) {
    switch (e->op()) {
    case Op::IntConst:
    case Op::BoolConst: return e;
    case Op::Symbol: {
        auto it = bindings.find(e->name());
        return it == bindings.end() ? e : it->second;
    }
    case Op::MapRead: {
        std::vector<ExprPtr> keys;
        for (const auto& k : e->args()) keys.push_back(substitute(k, bindings));
        return map_read(e->name(), std::move(keys), e->sort());
    }
    default: break;
    }
    std::vector<ExprPtr> args;
    for (const auto& a : e->args()) args.push_back(substitute(a, bindings));
    switch (e->op()) {
    case Op::Add: return add(args[0], args[1]);
    case Op::Sub: return sub(args[0], args[1]);
    case Op::Mul: return mul(args[0], args[1]);
    case Op::Div: return div(args[0], args[1]);
    case Op::Eq: return eq(args[0], args[1]);
    case Op::Ne: return ne(args[0], args[1]);
    case Op::Lt: return lt(args[0], args[1]);
    case Op::Le: return le(args[0], args[1]);
    case Op::Gt: return gt(args[0], args[1]);
    case Op::Ge: return ge(args[0], args[1]);
    case Op::Not: return lnot(args[0]);
    case Op::And: return land(std::move(args));
    case Op::Or: return lor(std::move(args));
    default: return e;
    }
}

}  // namespace evopoc::reach
