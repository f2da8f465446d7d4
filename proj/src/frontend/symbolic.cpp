#include "evopoc/frontend/symbolic.hpp"

#include "evopoc/frontend/parser.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <functional>
#include <set>

namespace evopoc::sol {

namespace rx = evopoc::reach;
using rx::ExprPtr;
using rx::Sort;

const char* to_string(TargetCategory c) {
    switch (c) {
        case TargetCategory::StateModification: return "StateModification";
        case TargetCategory::ExternalCall: return "ExternalCall";
        case TargetCategory::FundTransfer: return "FundTransfer";
    }
    return "?";
}

TargetCategory parse_target_category(const std::string& s) {
    if (s == "StateModification") return TargetCategory::StateModification;
    if (s == "ExternalCall") return TargetCategory::ExternalCall;
    if (s == "FundTransfer") return TargetCategory::FundTransfer;
    throw FrontendError("unknown target category '" + s + "'");
}

const char* to_string(PathHop::Kind k) {
    switch (k) {
        case PathHop::Kind::Entry: return "entry";
        case PathHop::Kind::Modifier: return "modifier";
        case PathHop::Kind::Call: return "call";
        case PathHop::Kind::LoopSkip: return "loop-skip";
        case PathHop::Kind::LoopEnter: return "loop-enter";
        case PathHop::Kind::Sink: return "sink";
    }
    return "?";
}

const char* to_string(Guard::Origin o) {
    switch (o) {
        case Guard::Origin::Require: return "require";
        case Guard::Origin::Assert: return "assert";
        case Guard::Origin::Branch: return "branch";
    }
    return "?";
}

std::vector<std::string> CallPath::functions() const {
    std::vector<std::string> out;
    for (const auto& h : hops)
        if (h.kind != PathHop::Kind::LoopSkip && h.kind != PathHop::Kind::LoopEnter) out.push_back(h.name);
    return out;
}

std::vector<ExprPtr> PathPredicates::predicates() const {
    std::vector<ExprPtr> out;
    for (const auto& g : guards)
        for (auto& c : rx::conjuncts(g.condition))
            if (!(c->op() == rx::Op::BoolConst && c->bool_value())) out.push_back(c);
    return out;
}

UnsupportedExpression::UnsupportedExpression(SourceLoc loc, const std::string& what)
    : FrontendError(to_string(loc) + ": unsupported expression: " + what), loc_(std::move(loc)) {}

namespace {

struct Value {
    enum class Kind { None, Scalar, Array, Contract, Tuple, Fresh };
    Kind kind = Kind::None;
    ExprPtr expr;            // Scalar value, Contract address
    std::string name;        // Array map name, Fresh symbol name
    ExprPtr length;          // Array
    Sort elem = Sort::Int;   // Array element sort
    std::string contract;    // Contract type
    std::vector<Value> items;
    rx::Control control = rx::Control::ExternalDefault;  // Fresh
    std::optional<SourceLoc> unsupported;

    static Value scalar(ExprPtr e) {
        Value v;
        v.kind = Kind::Scalar;
        v.expr = std::move(e);
        return v;
    }
};

struct SinkHit {};
struct Aborted {};
struct DepthHit {};

enum class Flow { Normal, Return, Break, Continue };

struct Frame {
    std::string scope;  // contract used to resolve names
    std::map<std::string, Value> locals;
    std::vector<std::string> return_names;
    std::optional<Value> ret;
    std::function<Flow()> placeholder;
};

const std::set<std::string> kOpaqueBuiltins = {"keccak256", "sha256",    "ripemd160", "ecrecover",
                                                "blockhash", "gasleft",   "addmod",    "mulmod",
                                                "selfdestruct", "sha3"};
const std::set<std::string> kTransferNames = {"transfer", "transferFrom", "send", "safeTransfer",
                                               "safeTransferFrom", "sendValue"};

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

BigInt unit_factor(const std::string& unit) {
    if (unit.empty() || unit == "wei" || unit == "seconds") return 1;
    if (unit == "gwei") return pow10(9);
    if (unit == "ether") return pow10(18);
    if (unit == "minutes") return 60;
    if (unit == "hours") return 3600;
    if (unit == "days") return 86400;
    if (unit == "weeks") return 604800;
    if (unit == "years") return 31536000;
    return 1;
}

std::optional<BigInt> parse_number(std::string text, const std::string& unit) {
    text.erase(std::remove(text.begin(), text.end(), '_'), text.end());
    if (text.rfind("0x", 0) == 0 || text.rfind("0X", 0) == 0) {
        BigInt v = 0;
        for (std::size_t i = 2; i < text.size(); ++i) {
            char c = static_cast<char>(std::tolower(static_cast<unsigned char>(text[i])));
            int d = std::isdigit(static_cast<unsigned char>(c)) ? c - '0' : c - 'a' + 10;
            v = v * 16 + d;
        }
        return v * unit_factor(unit);
    }
    auto epos = text.find_first_of("eE");
    std::string mant = text.substr(0, epos);
    long exp = epos == std::string::npos ? 0 : std::stol(text.substr(epos + 1));
    auto dot = mant.find('.');
    if (dot != std::string::npos) {
        exp -= static_cast<long>(mant.size() - dot - 1);
        mant.erase(dot, 1);
    }
    Rational r(parse_bigint(mant.empty() ? "0" : mant));
    if (exp >= 0)
        r *= Rational(pow10(static_cast<unsigned>(exp)));
    else
        r /= Rational(pow10(static_cast<unsigned>(-exp)));
    r *= Rational(unit_factor(unit));
    if (denominator(r) != 1) return std::nullopt;
    return numerator(r);
}

// FNV-1a, used to give string literals and enum members stable values.
BigInt stable_hash(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return BigInt(h);
}

class Walker {
public:
    Walker(const ProjectModel& model, const TargetOp& target, const TraversalOptions& options, bool collect,
           std::vector<int> tape)
        : model_(model), target_(target), options_(options), collect_(collect), tape_(std::move(tape)) {}

    // True when the run reached the sink.
    bool run(const std::string& contract, const std::string& entry, const Sigma* sigma) {
        this_ = contract;
        const ContractDef* c = model_.find(contract);
        if (!c) throw NoPath("contract '" + contract + "' not in the model");
        auto ref = model_.resolve_function(contract, entry);
        if (!ref.function || !ref.function->externally_callable())
            throw NoPath("no externally callable function '" + entry + "' in " + contract);
        const FunctionDef& f = *ref.function;
        if (sigma && sigma->size() > f.params.size())
            throw FrontendError(fmt::format("sigma has {} entries but {}.{} takes {} parameters", sigma->size(),
                                            contract, entry, f.params.size()));
        std::vector<Value> args;
        for (std::size_t i = 0; i < f.params.size(); ++i) {
            const Param& p = f.params[i];
            const Binding* b = sigma && i < sigma->size() ? &(*sigma)[i] : nullptr;
            std::string name = b && !b->symbol.empty() ? b->symbol : (p.name.empty() ? fmt::format("arg{}", i) : p.name);
            Value v = param_value(p.type, name);
            if (b) pin(v, *b);
            entry_symbols_.push_back(name);
            args.push_back(std::move(v));
        }
        try {
            invoke(ref.owner, f, std::move(args), PathHop::Kind::Entry);
        } catch (const SinkHit&) {
            return true;
        } catch (const Aborted&) {
            return false;
        }
        return false;
    }

    std::vector<int> taken() const {
        std::vector<int> out;
        for (const auto& [t, a] : choices_) out.push_back(t);
        return out;
    }
    // Tape for the next run in depth-first order, or nullopt when exhausted.
    std::optional<std::vector<int>> next_tape() const {
        for (std::size_t i = choices_.size(); i-- > 0;) {
            if (choices_[i].first + 1 < choices_[i].second) {
                std::vector<int> t;
                for (std::size_t j = 0; j < i; ++j) t.push_back(choices_[j].first);
                t.push_back(choices_[i].first + 1);
                return t;
            }
        }
        return std::nullopt;
    }

    std::vector<PathHop> hops;
    std::vector<Guard> guards;
    std::vector<LoopBound> bounds;
    rx::SymbolTable symbols;
    std::vector<ExprPtr> sigma_constraints;
    std::vector<std::string> entry_symbols_;

private:
    const ProjectModel& model_;
    const TargetOp& target_;
    const TraversalOptions& options_;
    bool collect_;
    std::vector<int> tape_;
    std::size_t tape_pos_ = 0;
    std::vector<std::pair<int, int>> choices_;
    std::string this_;
    std::map<std::string, ExprPtr> storage_;
    int depth_ = 0;
    int fresh_ = 0;

    // ---- symbols ----
    ExprPtr sym(const std::string& name, Sort sort, rx::Control control) {
        if (const rx::SymbolInfo* info = symbols.find(name)) {
            if (info->sort == sort || (rx::is_numeric(info->sort) && rx::is_numeric(sort)))
                return rx::symbol(name, info->sort);
            throw FrontendError("symbol '" + name + "' used with conflicting sorts");
        }
        symbols.declare(name, {sort, control, std::nullopt});
        return rx::symbol(name, sort);
    }

    Value fresh(const std::string& what, rx::Control control = rx::Control::ExternalDefault) {
        Value v;
        v.kind = Value::Kind::Fresh;
        v.name = fmt::format("{}#{}", what, ++fresh_);
        v.control = control;
        return v;
    }

    Value unsupported(const SourceLoc& loc, const std::string& what) {
        Value v = fresh("opaque");
        v.unsupported = loc;
        v.name += ":" + what;
        return v;
    }

    Sort sort_of(const TypeName& t) const {
        if (t.kind == TypeName::Kind::Elementary) {
            if (t.name == "bool") return Sort::Bool;
            if (t.name.rfind("address", 0) == 0 || t.name == "payable") return Sort::Addr;
            return Sort::Int;
        }
        if (t.kind == TypeName::Kind::UserDefined && model_.find(t.name)) return Sort::Addr;
        return Sort::Int;
    }

    Value param_value(const TypeName& t, const std::string& name) {
        if (t.is_array()) {
            Value v;
            v.kind = Value::Kind::Array;
            v.name = name;
            v.length = sym(rx::length_symbol_name(name), Sort::Len, rx::Control::Attacker);
            v.elem = sort_of(t.args[0]);
            return v;
        }
        if (t.is_mapping()) return fresh(name);
        Value v = Value::scalar(sym(name, sort_of(t), rx::Control::Attacker));
        if (t.kind == TypeName::Kind::UserDefined && model_.find(t.name)) {
            v.kind = Value::Kind::Contract;
            v.contract = t.name;
        }
        return v;
    }

    void pin(const Value& v, const Binding& b) {
        if (b.length) {
            if (v.kind != Value::Kind::Array) throw FrontendError("length pinned on non-array parameter '" + b.symbol + "'");
            sigma_constraints.push_back(rx::eq(v.length, rx::int_const(*b.length)));
        }
        if (b.value) {
            if (v.kind != Value::Kind::Scalar && v.kind != Value::Kind::Contract)
                throw FrontendError("value pinned on non-scalar parameter '" + b.symbol + "'");
            if (v.expr->sort() == Sort::Bool)
                sigma_constraints.push_back(rx::eq(v.expr, rx::bool_const(*b.value != 0)));
            else
                sigma_constraints.push_back(rx::eq(v.expr, rx::int_const(*b.value)));
        }
    }

    Value default_value(const TypeName& t) {
        if (t.is_array()) {
            Value v;
            v.kind = Value::Kind::Array;
            v.name = fmt::format("arr#{}", ++fresh_);
            v.length = rx::int_const(t.length.empty() ? BigInt(0) : *parse_number(t.length, ""));
            v.elem = sort_of(t.args[0]);
            return v;
        }
        Sort s = sort_of(t);
        if (s == Sort::Bool) return Value::scalar(rx::bool_const(false));
        return Value::scalar(rx::int_const(0));
    }

    // ---- conversions ----
    ExprPtr as_int(const Value& v) {
        switch (v.kind) {
            case Value::Kind::Scalar:
            case Value::Kind::Contract:
                if (v.expr && rx::is_numeric(v.expr->sort())) return v.expr;
                break;
            case Value::Kind::Fresh: return sym(v.name, Sort::Int, v.control);
            default: break;
        }
        return sym(fmt::format("opaque#{}", ++fresh_), Sort::Int, rx::Control::ExternalDefault);
    }

    ExprPtr as_bool(const Value& v) {
        if (v.kind == Value::Kind::Scalar && v.expr->sort() == Sort::Bool) return v.expr;
        if (v.kind == Value::Kind::Fresh) return sym(v.name, Sort::Bool, v.control);
        if (v.kind == Value::Kind::Scalar) return rx::ne(v.expr, rx::int_const(0));
        return sym(fmt::format("opaque#{}", ++fresh_), Sort::Bool, rx::Control::ExternalDefault);
    }

    std::string render(const Value& v) {
        switch (v.kind) {
            case Value::Kind::Scalar:
            case Value::Kind::Contract: return v.expr ? rx::to_string(v.expr) : v.contract;
            case Value::Kind::Array: return v.name;
            case Value::Kind::Fresh: return v.name;
            case Value::Kind::Tuple: {
                std::string s = "(";
                for (std::size_t i = 0; i < v.items.size(); ++i) s += (i ? ", " : "") + render(v.items[i]);
                return s + ")";
            }
            case Value::Kind::None: return "_";
        }
        return "?";
    }

    std::optional<SourceLoc> taint(std::initializer_list<const Value*> vs) {
        for (const Value* v : vs)
            if (v->unsupported) return v->unsupported;
        return std::nullopt;
    }

    // ---- choices and records ----
    int choose(int arity) {
        int t = tape_pos_ < tape_.size() ? tape_[tape_pos_] : 0;
        if (t < 0 || t >= arity) throw FrontendError("decision tape does not match the model");
        ++tape_pos_;
        choices_.emplace_back(t, arity);
        return t;
    }

    ExprPtr checked_bool(const Value& v, const SourceLoc& loc) {
        if (v.unsupported && collect_) throw UnsupportedExpression(*v.unsupported, v.name.substr(v.name.find(':') + 1));
        (void)loc;
        return as_bool(v);
    }

    void add_guard(const Value& cond, Guard::Origin origin, const SourceLoc& loc) {
        Guard g;
        g.condition = checked_bool(cond, loc);
        g.origin = origin;
        g.loc = loc;
        std::map<std::string, Sort> used;
        rx::collect_symbols(g.condition, used);
        for (const auto& [name, s] : used) {
            const rx::SymbolInfo* info = symbols.find(name);
            if (info && info->control == rx::Control::ExternalDefault) g.conservative = true;
        }
        guards.push_back(std::move(g));
    }

    void add_bound(ExprPtr cond, bool entered, const SourceLoc& loc) {
        bounds.push_back({std::move(cond), loc, entered});
    }

    void hop(PathHop::Kind kind, const std::string& contract, const std::string& name,
             std::map<std::string, std::string> bindings, const SourceLoc& loc) {
        hops.push_back({kind, contract, name, std::move(bindings), loc});
    }

    [[noreturn]] void sink(const std::string& contract, const std::string& name,
                           std::map<std::string, std::string> bindings, const SourceLoc& loc) {
        hop(PathHop::Kind::Sink, contract, name, std::move(bindings), loc);
        throw SinkHit{};
    }

    bool sink_name_matches(const std::string& name) const { return !target_.sink || *target_.sink == name; }

    // ---- invocation ----
    Value invoke(const ContractDef* owner, const FunctionDef& f, std::vector<Value> args, PathHop::Kind kind) {
        if (depth_ >= options_.depth_limit) throw DepthHit{};
        ++depth_;
        Frame fr;
        fr.scope = owner->kind == ContractDef::Kind::Library ? owner->name : this_;
        std::map<std::string, std::string> bindings;
        for (std::size_t i = 0; i < f.params.size(); ++i) {
            Value v = i < args.size() ? args[i] : fresh("arg");
            if (!f.params[i].name.empty()) {
                bindings[f.params[i].name] = render(v);
                fr.locals[f.params[i].name] = std::move(v);
            }
        }
        for (const auto& r : f.returns) {
            if (r.name.empty()) continue;
            fr.return_names.push_back(r.name);
            fr.locals[r.name] = default_value(r.type);
        }
        hop(kind, owner->name, f.name, std::move(bindings), f.loc);
        run_modifiers(fr, f, 0);
        --depth_;
        if (fr.ret) return *fr.ret;
        if (fr.return_names.size() == 1) return fr.locals[fr.return_names[0]];
        if (!fr.return_names.empty()) {
            Value t;
            t.kind = Value::Kind::Tuple;
            for (const auto& n : fr.return_names) t.items.push_back(fr.locals[n]);
            return t;
        }
        return {};
    }

    Flow run_modifiers(Frame& fr, const FunctionDef& f, std::size_t i) {
        if (i == f.modifiers.size()) {
            if (!f.body) return Flow::Normal;
            return exec_list(fr, *f.body);
        }
        const ModifierInvocation& inv = f.modifiers[i];
        const ModifierDef* m = model_.resolve_modifier(fr.scope, inv.name);
        if (!m || !m->body) return run_modifiers(fr, f, i + 1);
        std::vector<Value> args;
        for (const auto& a : inv.args) args.push_back(eval(fr, a));
        Frame mf;
        mf.scope = fr.scope;
        std::map<std::string, std::string> bindings;
        for (std::size_t k = 0; k < m->params.size(); ++k) {
            Value v = k < args.size() ? args[k] : fresh("arg");
            bindings[m->params[k].name] = render(v);
            mf.locals[m->params[k].name] = std::move(v);
        }
        mf.placeholder = [this, &fr, &f, i]() { return run_modifiers(fr, f, i + 1); };
        hop(PathHop::Kind::Modifier, fr.scope, m->name, std::move(bindings), m->loc);
        exec_list(mf, *m->body);
        return Flow::Normal;
    }

    // ---- statements ----
    Flow exec_list(Frame& fr, const std::vector<StmtP>& body) {
        for (const auto& s : body) {
            Flow f = exec(fr, s);
            if (f != Flow::Normal) return f;
        }
        return Flow::Normal;
    }

    Flow exec(Frame& fr, const StmtP& s) {
        using K = Stmt::Kind;
        switch (s->kind) {
            case K::Block:
            case K::Unchecked: return exec_list(fr, s->stmts);
            case K::VarDecl: declare(fr, *s); return Flow::Normal;
            case K::Expr: eval(fr, s->expr); return Flow::Normal;
            case K::If: {
                Value c = eval(fr, s->expr);
                if (choose(2) == 0) {
                    add_guard(c, Guard::Origin::Branch, s->loc);
                    return exec(fr, s->body);
                }
                Value neg = c;
                if (!c.unsupported) neg = Value::scalar(rx::lnot(as_bool(c)));
                add_guard(neg, Guard::Origin::Branch, s->loc);
                return s->else_branch ? exec(fr, s->else_branch) : Flow::Normal;
            }
            case K::For:
            case K::While: {
                if (s->init) exec(fr, s->init);
                ExprPtr c0 = s->expr ? checked_bool(eval(fr, s->expr), s->loc) : rx::bool_const(true);
                if (choose(2) == 0) {
                    add_bound(rx::lnot(c0), false, s->loc);
                    hop(PathHop::Kind::LoopSkip, fr.scope, "", {}, s->loc);
                    return Flow::Normal;
                }
                add_bound(c0, true, s->loc);
                hop(PathHop::Kind::LoopEnter, fr.scope, "", {}, s->loc);
                Flow f = exec(fr, s->body);
                if (f == Flow::Return) return f;
                if (f == Flow::Break) return Flow::Normal;
                if (s->post) eval(fr, s->post);
                ExprPtr c1 = s->expr ? checked_bool(eval(fr, s->expr), s->loc) : rx::bool_const(true);
                add_bound(rx::lnot(c1), true, s->loc);
                return Flow::Normal;
            }
            case K::DoWhile: {
                Flow f = exec(fr, s->body);
                if (f == Flow::Return) return f;
                if (f == Flow::Break) return Flow::Normal;
                ExprPtr c = checked_bool(eval(fr, s->expr), s->loc);
                add_bound(rx::lnot(c), true, s->loc);
                return Flow::Normal;
            }
            case K::Return:
                fr.ret = s->expr ? eval(fr, s->expr) : Value{};
                return Flow::Return;
            case K::Emit: return Flow::Normal;
            case K::Revert: throw Aborted{};
            case K::Placeholder:
                if (fr.placeholder) fr.placeholder();
                return Flow::Normal;
            case K::Break: return Flow::Break;
            case K::Continue: return Flow::Continue;
            case K::Opaque: return Flow::Normal;
        }
        return Flow::Normal;
    }

    void declare(Frame& fr, const Stmt& s) {
        Value init = s.expr ? eval(fr, s.expr) : Value{};
        if (!s.tuple) {
            const VarDecl& d = *s.vars[0];
            fr.locals[d.name] = s.expr ? coerce(init, d.type) : default_value(d.type);
            return;
        }
        for (std::size_t i = 0; i < s.vars.size(); ++i) {
            if (!s.vars[i]) continue;
            Value item = init.kind == Value::Kind::Tuple && i < init.items.size() ? init.items[i] : fresh("item");
            fr.locals[s.vars[i]->name] = coerce(item, s.vars[i]->type);
        }
    }

    Value coerce(const Value& v, const TypeName& t) {
        if (v.kind == Value::Kind::Scalar && t.kind == TypeName::Kind::UserDefined && model_.find(t.name)) {
            Value c = v;
            c.kind = Value::Kind::Contract;
            c.contract = t.name;
            return c;
        }
        return v;
    }

    // ---- storage ----
    const StateVar* state_var(const Frame& fr, const std::string& name) const {
        if (fr.locals.count(name)) return nullptr;
        return model_.resolve_state_var(fr.scope, name);
    }

    Value read_state(Frame& fr, const StateVar& v) {
        bool constant = std::find_if(v.qualifiers.begin(), v.qualifiers.end(), [](const std::string& q) {
                            return q == "constant" || q == "immutable";
                        }) != v.qualifiers.end();
        if (constant && v.init) return eval(fr, v.init);
        if (v.type.is_array()) {
            Value a;
            a.kind = Value::Kind::Array;
            a.name = v.name;
            auto it = storage_.find(rx::length_symbol_name(v.name));
            a.length = it != storage_.end() ? it->second
                                            : sym(rx::length_symbol_name(v.name), Sort::Len, rx::Control::ProtocolState);
            a.elem = sort_of(v.type.args[0]);
            return a;
        }
        if (v.type.is_mapping()) return fresh(v.name, rx::Control::ProtocolState);
        auto it = storage_.find(v.name);
        Value out = Value::scalar(it != storage_.end() ? it->second : sym(v.name, sort_of(v.type), rx::Control::ProtocolState));
        return coerce(out, v.type);
    }

    struct Location {
        std::string root;           // identifier at the base of the access
        bool state = false;
        std::string map;            // map name for reads/writes, empty when scalar
        std::vector<ExprPtr> keys;
        Sort sort = Sort::Int;
        bool opaque = false;
    };

    // Resolves an lvalue-shaped expression (identifier, index chain, member).
    Location locate(Frame& fr, const AstExprP& e) {
        Location loc;
        std::vector<AstExprP> idx;
        AstExprP base = e;
        while (base->kind == AstExpr::Kind::Index || base->kind == AstExpr::Kind::Member) {
            if (base->kind == AstExpr::Kind::Member) loc.opaque = true;
            if (base->kind == AstExpr::Kind::Index) idx.push_back(base->args.size() > 1 ? base->args[1] : nullptr);
            base = base->args[0];
        }
        std::reverse(idx.begin(), idx.end());
        if (base->kind != AstExpr::Kind::Ident) {
            loc.opaque = true;
            return loc;
        }
        loc.root = base->text;
        if (idx.empty()) return loc;
        for (const auto& i : idx) loc.keys.push_back(i ? as_int(eval(fr, i)) : rx::int_const(0));
        if (const StateVar* sv = state_var(fr, loc.root)) {
            loc.state = true;
            loc.map = loc.root;
            const TypeName* t = &sv->type;
            for (std::size_t k = 0; k < idx.size() && t; ++k)
                t = (t->is_mapping() ? &t->args[1] : (t->is_array() ? &t->args[0] : nullptr));
            if (!t || t->is_mapping() || t->is_array()) loc.opaque = true;
            else loc.sort = sort_of(*t);
        } else if (auto it = fr.locals.find(loc.root); it != fr.locals.end() && it->second.kind == Value::Kind::Array) {
            loc.map = it->second.name;
            loc.sort = it->second.elem;
            if (idx.size() != 1) loc.opaque = true;
        } else {
            loc.opaque = true;
        }
        return loc;
    }

    Value read_indexed(Frame& fr, const AstExprP& e) {
        Location l = locate(fr, e);
        if (l.opaque || l.map.empty()) return fresh("read");
        ExprPtr read = rx::map_read(l.map, l.keys, l.sort);
        auto it = storage_.find(rx::to_string(read));
        return Value::scalar(it != storage_.end() ? it->second : read);
    }

    void assign(Frame& fr, const AstExprP& lhs, const Value& v, const SourceLoc& loc) {
        if (lhs->kind == AstExpr::Kind::Tuple) {
            for (std::size_t i = 0; i < lhs->args.size(); ++i) {
                if (!lhs->args[i]) continue;
                assign(fr, lhs->args[i], v.kind == Value::Kind::Tuple && i < v.items.size() ? v.items[i] : fresh("item"),
                       loc);
            }
            return;
        }
        Location l = locate(fr, lhs);
        if (l.root.empty()) return;
        bool is_state = l.state || (l.keys.empty() && state_var(fr, l.root));
        if (is_state && target_.category == TargetCategory::StateModification && sink_name_matches(l.root))
            sink(fr.scope, l.root, {{"value", render(v)}}, loc);
        if (l.opaque) return;
        if (l.keys.empty()) {
            if (fr.locals.count(l.root))
                fr.locals[l.root] = v;
            else if (is_state && v.kind != Value::Kind::Array)
                storage_[l.root] = v.kind == Value::Kind::Scalar && v.expr ? v.expr : as_int(v);
            return;
        }
        ExprPtr read = rx::map_read(l.map, l.keys, l.sort);
        storage_[rx::to_string(read)] = l.sort == Sort::Bool ? as_bool(v) : as_int(v);
    }

    // ---- expressions ----
    Value eval(Frame& fr, const AstExprP& e) {
        using K = AstExpr::Kind;
        switch (e->kind) {
            case K::Number: {
                auto n = parse_number(e->text, e->unit);
                if (!n) return unsupported(e->loc, "fractional literal " + e->text);
                return Value::scalar(rx::int_const(*n));
            }
            case K::Bool: return Value::scalar(rx::bool_const(e->text == "true"));
            case K::String: return Value::scalar(rx::int_const(stable_hash(e->text)));
            case K::Ident: return ident(fr, e);
            case K::Member: return member(fr, e);
            case K::Index: return read_indexed(fr, e);
            case K::Call: return call(fr, e);
            case K::CallOptions: return fresh("callopts");
            case K::Unary: return unary(fr, e);
            case K::Postfix: {
                Value old = eval(fr, e->args[0]);
                ExprPtr one = rx::int_const(1);
                ExprPtr x = as_int(old);
                assign(fr, e->args[0], Value::scalar(e->text == "++" ? rx::add(x, one) : rx::sub(x, one)), e->loc);
                return old;
            }
            case K::Binary: return binary(fr, e);
            case K::Ternary: {
                Value c = eval(fr, e->args[0]);
                if (choose(2) == 0) {
                    add_guard(c, Guard::Origin::Branch, e->loc);
                    return eval(fr, e->args[1]);
                }
                Value neg = c.unsupported ? c : Value::scalar(rx::lnot(as_bool(c)));
                add_guard(neg, Guard::Origin::Branch, e->loc);
                return eval(fr, e->args[2]);
            }
            case K::New: return fresh("new");
            case K::Tuple: {
                if (e->args.size() == 1 && e->args[0]) return eval(fr, e->args[0]);
                Value t;
                t.kind = Value::Kind::Tuple;
                for (const auto& a : e->args) t.items.push_back(a ? eval(fr, a) : Value{});
                return t;
            }
            case K::ArrayLit: {
                Value a;
                a.kind = Value::Kind::Array;
                a.name = fmt::format("lit#{}", ++fresh_);
                a.length = rx::int_const(static_cast<long>(e->args.size()));
                for (std::size_t i = 0; i < e->args.size(); ++i) {
                    Value item = eval(fr, e->args[i]);
                    if (item.kind == Value::Kind::Scalar) {
                        a.elem = item.expr->sort() == Sort::Bool ? Sort::Bool : Sort::Int;
                        storage_[rx::to_string(rx::map_read(a.name, {rx::int_const(static_cast<long>(i))}, a.elem))] =
                            item.expr;
                    }
                }
                return a;
            }
            case K::Type: return fresh("type");
        }
        return fresh("expr");
    }

    Value ident(Frame& fr, const AstExprP& e) {
        const std::string& n = e->text;
        if (auto it = fr.locals.find(n); it != fr.locals.end()) return it->second;
        if (const StateVar* sv = state_var(fr, n)) return read_state(fr, *sv);
        if (n == "this") {
            Value v = Value::scalar(sym("this", Sort::Addr, rx::Control::ProtocolState));
            v.kind = Value::Kind::Contract;
            v.contract = this_;
            return v;
        }
        if (n == "now") return Value::scalar(sym("block.timestamp", Sort::Int, rx::Control::ProtocolState));
        return fresh(n);
    }

    Value member(Frame& fr, const AstExprP& e) {
        const AstExprP& base = e->args[0];
        const std::string& m = e->text;
        if (base->kind == AstExpr::Kind::Ident && !fr.locals.count(base->text) && !state_var(fr, base->text)) {
            const std::string& b = base->text;
            if (b == "msg" || b == "tx") {
                Sort s = (m == "sender" || m == "origin") ? Sort::Addr : Sort::Int;
                return Value::scalar(sym(b + "." + m, s, rx::Control::Attacker));
            }
            if (b == "block") return Value::scalar(sym("block." + m, Sort::Int, rx::Control::ProtocolState));
            if (b != "this" && !model_.find(b))
                return Value::scalar(rx::int_const(stable_hash(b + "." + m)));  // enum member
        }
        Value v = eval(fr, base);
        if (m == "length" && v.kind == Value::Kind::Array) return Value::scalar(v.length);
        if (m == "length" && v.kind == Value::Kind::Fresh) return Value::scalar(sym("len(" + v.name + ")", Sort::Len, v.control));
        return fresh(m);
    }

    Value unary(Frame& fr, const AstExprP& e) {
        const std::string& op = e->text;
        if (op == "++" || op == "--") {
            ExprPtr x = as_int(eval(fr, e->args[0]));
            Value nv = Value::scalar(op == "++" ? rx::add(x, rx::int_const(1)) : rx::sub(x, rx::int_const(1)));
            assign(fr, e->args[0], nv, e->loc);
            return nv;
        }
        if (op == "delete") {
            assign(fr, e->args[0], Value::scalar(rx::int_const(0)), e->loc);
            return {};
        }
        Value v = eval(fr, e->args[0]);
        if (v.unsupported) return v;
        if (op == "!") return Value::scalar(rx::lnot(as_bool(v)));
        if (op == "-" && v.kind == Value::Kind::Scalar && v.expr->op() == rx::Op::IntConst && v.expr->int_value() == 0)
            return v;
        return unsupported(e->loc, "unary " + op);
    }

    Value binary(Frame& fr, const AstExprP& e) {
        const std::string& op = e->text;
        static const std::set<std::string> assign_ops = {"=", "+=", "-=", "*=", "/=", "%=", "|=", "&=", "^=", "<<=", ">>="};
        if (assign_ops.count(op)) {
            Value rhs = eval(fr, e->args[1]);
            if (op != "=") {
                Value lhs = eval(fr, e->args[0]);
                rhs = arith(op.substr(0, op.size() - 1), lhs, rhs, e->loc);
            }
            assign(fr, e->args[0], rhs, e->loc);
            return rhs;
        }
        Value a = eval(fr, e->args[0]);
        Value b = eval(fr, e->args[1]);
        if (op == "&&" || op == "||") {
            if (auto t = taint({&a, &b})) return unsupported(*t, op);
            ExprPtr x = as_bool(a), y = as_bool(b);
            return Value::scalar(op == "&&" ? rx::land(x, y) : rx::lor(x, y));
        }
        if (op == "==" || op == "!=") {
            if (auto t = taint({&a, &b})) return unsupported(*t, op);
            bool boolish = (a.kind == Value::Kind::Scalar && a.expr->sort() == Sort::Bool) ||
                           (b.kind == Value::Kind::Scalar && b.expr->sort() == Sort::Bool);
            ExprPtr x = boolish ? as_bool(a) : as_int(a);
            ExprPtr y = boolish ? as_bool(b) : as_int(b);
            return Value::scalar(op == "==" ? rx::eq(x, y) : rx::ne(x, y));
        }
        if (op == "<" || op == "<=" || op == ">" || op == ">=") {
            if (auto t = taint({&a, &b})) return unsupported(*t, op);
            ExprPtr x = as_int(a), y = as_int(b);
            if (op == "<") return Value::scalar(rx::lt(x, y));
            if (op == "<=") return Value::scalar(rx::le(x, y));
            if (op == ">") return Value::scalar(rx::gt(x, y));
            return Value::scalar(rx::ge(x, y));
        }
        return arith(op, a, b, e->loc);
    }

    Value arith(const std::string& op, const Value& a, const Value& b, const SourceLoc& loc) {
        if (auto t = taint({&a, &b})) return unsupported(*t, op);
        ExprPtr x = as_int(a), y = as_int(b);
        if (op == "+") return Value::scalar(rx::add(x, y));
        if (op == "-") return Value::scalar(rx::sub(x, y));
        if (op == "*") return Value::scalar(rx::mul(x, y));
        if (op == "/") return Value::scalar(rx::div(x, y));
        if (op == "%") return Value::scalar(rx::sub(x, rx::mul(y, rx::div(x, y))));
        if (op == "**" && x->op() == rx::Op::IntConst && y->op() == rx::Op::IntConst && y->int_value() <= 1024) {
            BigInt r = boost::multiprecision::pow(x->int_value(), static_cast<unsigned>(y->int_value()));
            return Value::scalar(rx::int_const(r));
        }
        return unsupported(loc, "operator " + op);
    }

    std::vector<Value> eval_args(Frame& fr, const AstExprP& call, std::size_t from = 1) {
        std::vector<Value> out;
        for (std::size_t i = from; i < call->args.size(); ++i) out.push_back(eval(fr, call->args[i]));
        return out;
    }

    std::map<std::string, std::string> bind_names(const FunctionDef* f, const std::vector<Value>& args) {
        std::map<std::string, std::string> out;
        for (std::size_t i = 0; i < args.size(); ++i) {
            std::string key = f && i < f->params.size() && !f->params[i].name.empty() ? f->params[i].name
                                                                                      : fmt::format("arg{}", i);
            out[key] = render(args[i]);
        }
        return out;
    }

    Value call(Frame& fr, const AstExprP& e) {
        AstExprP callee = e->args[0];
        bool with_value = false;
        if (callee->kind == AstExpr::Kind::CallOptions) {
            for (std::size_t i = 1; i < callee->args.size(); ++i) eval(fr, callee->args[i]);
            with_value = std::find(callee->names.begin(), callee->names.end(), "value") != callee->names.end();
            callee = callee->args[0];
        }
        switch (callee->kind) {
            case AstExpr::Kind::Ident: return call_ident(fr, e, callee->text);
            case AstExpr::Kind::Member: return call_member(fr, e, callee, with_value);
            case AstExpr::Kind::Type: {
                std::vector<Value> args = eval_args(fr, e);
                if (args.size() != 1) return fresh("cast");
                Value v = args[0];
                if (v.kind == Value::Kind::Contract) v.kind = Value::Kind::Scalar;
                if (callee->type && callee->type->name == "bool" && v.kind == Value::Kind::Scalar)
                    return Value::scalar(as_bool(v));
                return v;
            }
            case AstExpr::Kind::New: {
                std::vector<Value> args = eval_args(fr, e);
                const TypeName& t = *callee->type;
                if (t.is_array()) {
                    Value a;
                    a.kind = Value::Kind::Array;
                    a.name = fmt::format("new#{}", ++fresh_);
                    a.length = args.empty() ? rx::int_const(0) : as_int(args[0]);
                    a.elem = sort_of(t.args[0]);
                    return a;
                }
                Value c = Value::scalar(sym(fmt::format("new#{}", ++fresh_), Sort::Addr, rx::Control::ExternalDefault));
                c.kind = Value::Kind::Contract;
                c.contract = t.name;
                return c;
            }
            default: eval_args(fr, e); return fresh("call");
        }
    }

    Value call_ident(Frame& fr, const AstExprP& e, const std::string& name) {
        if (name == "require" || name == "assert") {
            std::vector<Value> args = eval_args(fr, e);
            if (args.empty()) return {};
            add_guard(args[0], name == "require" ? Guard::Origin::Require : Guard::Origin::Assert, e->loc);
            return {};
        }
        if (name == "revert") throw Aborted{};
        if (kOpaqueBuiltins.count(name)) {
            eval_args(fr, e);
            return fresh(name);
        }
        if (!fr.locals.count(name)) {
            auto ref = model_.resolve_function(fr.scope, name);
            if (ref.function) {
                std::vector<Value> args = eval_args(fr, e);
                if (target_.category == TargetCategory::StateModification && sink_matches_call(name))
                    sink(ref.owner->name, name, bind_names(ref.function, args), e->loc);
                if (!ref.function->body) return fresh(name);
                return invoke(ref.owner, *ref.function, std::move(args), PathHop::Kind::Call);
            }
            if (const ContractDef* c = model_.find(name)) {
                std::vector<Value> args = eval_args(fr, e);
                Value v = args.size() == 1 ? args[0] : fresh(name);
                Value out = Value::scalar(args.size() == 1 ? as_int(v) : sym(v.name, Sort::Addr, v.control));
                out.kind = Value::Kind::Contract;
                out.contract = c->name;
                return out;
            }
        }
        std::vector<Value> args = eval_args(fr, e);
        if (target_.category == TargetCategory::StateModification && sink_matches_call(name))
            sink(fr.scope, name, bind_names(nullptr, args), e->loc);
        if (args.size() == 1 && !name.empty() && std::isupper(static_cast<unsigned char>(name[0])) &&
            args[0].kind == Value::Kind::Scalar && rx::is_numeric(args[0].expr->sort())) {
            Value out = args[0];
            out.kind = Value::Kind::Contract;
            out.contract = name;
            return out;
        }
        return fresh(name);
    }

    bool sink_matches_call(const std::string& name) const {
        if (target_.sink) return *target_.sink == name;
        std::string l = lower(name);
        return l.find("mint") != std::string::npos || l.find("burn") != std::string::npos;
    }

    Value call_member(Frame& fr, const AstExprP& e, const AstExprP& callee, bool with_value) {
        const std::string& m = callee->text;
        const AstExprP& base = callee->args[0];
        if (base->kind == AstExpr::Kind::Ident && !fr.locals.count(base->text) && !state_var(fr, base->text)) {
            const std::string& b = base->text;
            if (b == "abi" || b == "string" || b == "bytes") {
                eval_args(fr, e);
                return fresh(b + "." + m);
            }
            const ContractDef* lib = model_.find(b);
            if (b == "super") lib = nullptr;
            if (lib && lib->kind == ContractDef::Kind::Library) {
                auto ref = model_.resolve_function(b, m);
                std::vector<Value> args = eval_args(fr, e);
                if (target_.category == TargetCategory::StateModification && sink_matches_call(m))
                    sink(b, m, bind_names(ref.function, args), e->loc);
                if (!ref.function || !ref.function->body) return fresh(b + "." + m);
                return invoke(ref.owner, *ref.function, std::move(args), PathHop::Kind::Call);
            }
            if (b == "super" || (lib && lib->kind != ContractDef::Kind::Interface && is_ancestor(b))) {
                std::vector<Value> args = eval_args(fr, e);
                auto ref = resolve_in_bases(b == "super" ? std::string{} : b, m);
                if (target_.category == TargetCategory::StateModification && sink_matches_call(m))
                    sink(ref.owner ? ref.owner->name : b, m, bind_names(ref.function, args), e->loc);
                if (!ref.function || !ref.function->body) return fresh(m);
                return invoke(ref.owner, *ref.function, std::move(args), PathHop::Kind::Call);
            }
        }
        Value recv = eval(fr, base);
        std::vector<Value> args = eval_args(fr, e);
        static const std::set<std::string> safe_math = {"add", "sub", "mul", "div", "mod"};
        if (recv.kind == Value::Kind::Scalar && recv.expr && rx::is_numeric(recv.expr->sort()) &&
            safe_math.count(m) && args.size() == 1 && recv.expr->sort() != Sort::Addr) {
            static const std::map<std::string, std::string> ops = {
                {"add", "+"}, {"sub", "-"}, {"mul", "*"}, {"div", "/"}, {"mod", "%"}};
            return arith(ops.at(m), recv, args[0], e->loc);
        }
        if (recv.kind == Value::Kind::Array && (m == "push" || m == "pop")) {
            if (target_.category == TargetCategory::StateModification && base->kind == AstExpr::Kind::Ident &&
                state_var(fr, base->text) && sink_name_matches(base->text))
                sink(fr.scope, base->text, bind_names(nullptr, args), e->loc);
            return fresh(m);
        }
        bool external = recv.kind == Value::Kind::Contract ||
                        (recv.kind == Value::Kind::Scalar && recv.expr && recv.expr->sort() == Sort::Addr);
        if (external) {
            std::string target_contract = recv.kind == Value::Kind::Contract ? recv.contract : "address";
            bool transfer_shaped = kTransferNames.count(m) || (m == "call" && with_value);
            if (target_.category == TargetCategory::FundTransfer && transfer_shaped && sink_name_matches(m))
                sink(target_contract, m, bind_names(nullptr, args), e->loc);
            if (target_.category == TargetCategory::ExternalCall && sink_name_matches(m))
                sink(target_contract, m, bind_names(nullptr, args), e->loc);
            return fresh("ext." + m);
        }
        return fresh(m);
    }

    bool is_ancestor(const std::string& name) const {
        for (const ContractDef* c : model_.lineage(this_))
            if (c->name == name) return true;
        return false;
    }

    ProjectModel::FunctionRef resolve_in_bases(const std::string& start, const std::string& m) const {
        auto line = model_.lineage(this_);
        bool skipping = true;
        for (const ContractDef* c : line) {
            if (skipping) {
                if (start.empty() ? c->name == this_ : c->name == start) {
                    skipping = false;
                    if (start.empty()) continue;
                } else {
                    continue;
                }
            }
            for (const auto& f : c->functions)
                if (f.name == m && f.body) return {c, &f};
        }
        return {};
    }
};

std::vector<CallPath> search(const ProjectModel& model, const std::string& contract, const std::string& entry,
                             const TargetOp& target, std::size_t limit, const TraversalOptions& options) {
    std::vector<CallPath> out;
    std::vector<int> tape;
    bool depth_hit = false;
    for (std::size_t runs = 0; runs < options.run_budget && out.size() < limit; ++runs) {
        Walker w(model, target, options, false, tape);
        try {
            if (w.run(contract, entry, nullptr)) {
                CallPath p;
                p.contract = contract;
                p.entry = entry;
                p.target = target;
                p.hops = w.hops;
                p.decisions = w.taken();
                out.push_back(std::move(p));
            }
        } catch (const DepthHit&) {
            depth_hit = true;
        }
        auto next = w.next_tape();
        if (!next) break;
        tape = std::move(*next);
    }
    if (out.empty() && depth_hit)
        throw DepthExceeded(fmt::format("{}.{}: call depth limit {} exceeded", contract, entry, options.depth_limit));
    return out;
}

}  // namespace

CallPath traverse(const ProjectModel& model, const std::string& contract, const std::string& entry,
                  const TargetOp& target, const TraversalOptions& options) {
    auto paths = search(model, contract, entry, target, 1, options);
    if (paths.empty()) throw NoPath(fmt::format("no path from {}.{} to a {} target{}", contract, entry,
                                                to_string(target.category), target.sink ? " '" + *target.sink + "'" : ""));
    return std::move(paths.front());
}

std::vector<CallPath> enumerate_paths(const ProjectModel& model, const std::string& contract,
                                      const std::string& entry, const TargetOp& target, std::size_t limit,
                                      const TraversalOptions& options) {
    return search(model, contract, entry, target, limit, options);
}

PathPredicates collect_predicates(const ProjectModel& model, const CallPath& path, const Sigma& sigma,
                                  const TraversalOptions& options) {
    Walker w(model, path.target, options, true, path.decisions);
    bool reached = false;
    try {
        reached = w.run(path.contract, path.entry, &sigma);
    } catch (const DepthHit&) {
        throw DepthExceeded(fmt::format("{}.{}: call depth limit {} exceeded", path.contract, path.entry,
                                        options.depth_limit));
    }
    CallPath replay;
    replay.hops = w.hops;
    if (!reached || replay.functions() != path.functions())
        throw FrontendError(fmt::format("path from {}.{} does not replay against the model", path.contract, path.entry));
    PathPredicates out;
    out.guards = std::move(w.guards);
    out.bounds = std::move(w.bounds);
    out.symbols = std::move(w.symbols);
    out.entry_symbols = std::move(w.entry_symbols_);
    out.sigma_constraints = std::move(w.sigma_constraints);
    return out;
}

}  // namespace evopoc::sol
