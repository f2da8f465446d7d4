#include "evopoc/reachability/solver.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <functional>
#include <set>

namespace evopoc::reach {

const char* to_string(Control c) {
    switch (c) {
    case Control::Attacker: return "attacker";
    case Control::ProtocolState: return "protocol-state";
    case Control::ExternalDefault: return "external-default";
    }
    return "?";
}

const char* to_string(SatResult::Kind k) {
    switch (k) {
    case SatResult::Kind::Sat: return "sat";
    case SatResult::Kind::Unsat: return "unsat";
    case SatResult::Kind::Unknown: return "unknown";
    }
    return "?";
}

void SymbolTable::declare(const std::string& name, SymbolInfo info) { entries_[name] = std::move(info); }

void SymbolTable::ensure(const std::string& name, Sort sort, Control control) {
    auto it = entries_.find(name);
    if (it == entries_.end()) {
        entries_.emplace(name, SymbolInfo{sort, control, std::nullopt});
        return;
    }
    bool both_numeric = is_numeric(it->second.sort) && is_numeric(sort);
    if (it->second.sort != sort && !both_numeric)
        throw IllSorted(fmt::format("symbol '{}' redeclared as {} (was {})", name, to_string(sort),
                                    to_string(it->second.sort)));
}

const SymbolInfo* SymbolTable::find(const std::string& name) const {
    auto it = entries_.find(name);
    return it == entries_.end() ? nullptr : &it->second;
}

void SymbolTable::merge(const SymbolTable& other) {
    for (const auto& [name, info] : other.entries_) {
        if (!contains(name)) entries_.emplace(name, info);
    }
}

namespace {

// ---------------------------------------------------------------------------
// Linear integer arithmetic over dense rows: sum(a[i] * x[i]) <= b.

struct Row {
    std::vector<BigInt> a;
    BigInt b;
};

BigInt gcd_big(BigInt x, BigInt y) {
    if (x < 0) x = -x;
    if (y < 0) y = -y;
    while (y != 0) {
        BigInt t = x % y;
        x = std::move(y);
        y = std::move(t);
    }
    return x;
}

// Divides by the coefficient gcd and rounds the bound down. Valid for
// integer points only, which is all we care about.
// Returns false when the row is a constant contradiction.
bool normalize(Row& r) {
    BigInt g = 0;
    for (const auto& c : r.a) {
        if (c != 0) g = gcd_big(g, c);
    }
    if (g == 0) return r.b >= 0;
    if (g != 1) {
        for (auto& c : r.a) c /= g;
        r.b = floor_div(r.b, g);
    }
    return true;
}

bool is_trivial(const Row& r) {
    return std::all_of(r.a.begin(), r.a.end(), [](const BigInt& c) { return c == 0; });
}

struct Budget {
    std::size_t nodes_left;
    bool exhausted = false;
    bool spend() {
        if (nodes_left == 0) {
            exhausted = true;
            return false;
        }
        --nodes_left;
        return true;
    }
};

enum class FmStatus { Feasible, Infeasible, TooLarge };

// Fourier-Motzkin elimination. On Feasible, `point` receives a rational
// solution that prefers the smallest integer inside each variable's
// projected interval.
FmStatus fourier_motzkin(std::vector<Row> rows, std::size_t n, std::size_t max_rows, std::vector<Rational>& point) {
    std::vector<std::size_t> order;
    std::vector<std::vector<Row>> recorded;
    std::vector<bool> eliminated(n, false);

    auto dedupe = [](std::vector<Row>& rs) {
        // Keep the tightest bound per coefficient vector.
        std::map<std::vector<BigInt>, BigInt> best;
        for (auto& r : rs) {
            auto it = best.find(r.a);
            if (it == best.end() || r.b < it->second) best[r.a] = r.b;
        }
        rs.clear();
        for (auto& [a, b] : best) rs.push_back(Row{a, b});
    };

    for (auto& r : rows) {
        if (!normalize(r)) return FmStatus::Infeasible;
    }
    rows.erase(std::remove_if(rows.begin(), rows.end(), is_trivial), rows.end());
    dedupe(rows);

    for (std::size_t step = 0; step < n; ++step) {
        // Pick the variable with the fewest generated pairs.
        std::size_t best_var = n;
        std::size_t best_cost = 0;
        for (std::size_t v = 0; v < n; ++v) {
            if (eliminated[v]) continue;
            std::size_t pos = 0, neg = 0;
            for (const auto& r : rows) {
                if (r.a[v] > 0) ++pos;
                else if (r.a[v] < 0) ++neg;
            }
            std::size_t cost = pos * neg;
            if (best_var == n || cost < best_cost) {
                best_var = v;
                best_cost = cost;
            }
        }
        const std::size_t v = best_var;
        eliminated[v] = true;
        order.push_back(v);

        std::vector<Row> with_v, pos, neg, rest;
        for (auto& r : rows) {
            if (r.a[v] > 0) pos.push_back(r);
            else if (r.a[v] < 0) neg.push_back(r);
            else rest.push_back(std::move(r));
        }
        with_v = pos;
        with_v.insert(with_v.end(), neg.begin(), neg.end());
        recorded.push_back(with_v);

        for (const auto& p : pos) {
            for (const auto& q : neg) {
                // p.a[v] > 0, q.a[v] < 0: combine to cancel v.
                BigInt mp = -q.a[v];
                BigInt mq = p.a[v];
                Row r;
                r.a.resize(n);
                for (std::size_t i = 0; i < n; ++i) r.a[i] = p.a[i] * mp + q.a[i] * mq;
                r.b = p.b * mp + q.b * mq;
                if (!normalize(r)) return FmStatus::Infeasible;
                if (!is_trivial(r)) rest.push_back(std::move(r));
            }
        }
        dedupe(rest);
        if (rest.size() > max_rows) return FmStatus::TooLarge;
        rows = std::move(rest);
    }
    for (const auto& r : rows) {
        if (r.b < 0) return FmStatus::Infeasible;
    }

    point.assign(n, Rational(0));
    for (std::size_t idx = order.size(); idx-- > 0;) {
        const std::size_t v = order[idx];
        std::optional<Rational> lo, hi;
        for (const auto& r : recorded[idx]) {
            Rational rest = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (i != v && r.a[i] != 0) rest += Rational(r.a[i]) * point[i];
            }
            Rational bound = (Rational(r.b) - rest) / Rational(r.a[v]);
            if (r.a[v] > 0) {
                if (!hi || bound < *hi) hi = bound;
            } else {
                if (!lo || bound > *lo) lo = bound;
            }
        }
        Rational value = 0;
        if (lo) {
            Rational c(ceil(*lo));
            value = (!hi || c <= *hi) ? c : *lo;
        } else if (hi) {
            value = Rational(floor(*hi));
        }
        if (lo && hi && *lo > *hi) return FmStatus::Infeasible;  // cannot happen for exact FM
        point[v] = value;
    }
    return FmStatus::Feasible;
}

enum class LiaStatus { Sat, Unsat, Unknown };

// Branch and bound over Fourier-Motzkin feasibility.
LiaStatus solve_lia(const std::vector<Row>& base, std::size_t n, const SolverOptions& opts, Budget& budget,
                    std::vector<BigInt>& solution) {
    std::vector<std::vector<Row>> stack;
    stack.push_back({});
    bool unknown = false;
    while (!stack.empty()) {
        if (!budget.spend()) return LiaStatus::Unknown;
        std::vector<Row> extra = std::move(stack.back());
        stack.pop_back();
        std::vector<Row> rows = base;
        rows.insert(rows.end(), extra.begin(), extra.end());
        std::vector<Rational> point;
        FmStatus st = fourier_motzkin(std::move(rows), n, opts.max_constraints, point);
        if (st == FmStatus::Infeasible) continue;
        if (st == FmStatus::TooLarge) {
            unknown = true;
            continue;
        }
        std::size_t frac = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (boost::multiprecision::denominator(point[i]) != 1) {
                frac = i;
                break;
            }
        }
        if (frac == n) {
            solution.resize(n);
            for (std::size_t i = 0; i < n; ++i) solution[i] = boost::multiprecision::numerator(point[i]);
            return LiaStatus::Sat;
        }
        // x <= floor(v)  |  x >= ceil(v). Push the upper branch first so the
        // lower one is explored first.
        Row up;
        up.a.assign(n, 0);
        up.a[frac] = -1;
        up.b = -ceil(point[frac]);
        Row down;
        down.a.assign(n, 0);
        down.a[frac] = 1;
        down.b = floor(point[frac]);
        auto e1 = extra;
        e1.push_back(up);
        auto e2 = std::move(extra);
        e2.push_back(down);
        stack.push_back(std::move(e1));
        stack.push_back(std::move(e2));
    }
    return unknown ? LiaStatus::Unknown : LiaStatus::Unsat;
}

// ---------------------------------------------------------------------------
// Normalization of predicates into a boolean skeleton over linear atoms.

struct Lin {
    std::map<std::string, BigInt> coeff;
    BigInt constant = 0;

    Lin& operator+=(const Lin& o) {
        for (const auto& [k, v] : o.coeff) coeff[k] += v;
        constant += o.constant;
        prune();
        return *this;
    }
    Lin scaled(const BigInt& f) const {
        Lin r;
        if (f == 0) return r;
        for (const auto& [k, v] : coeff) r.coeff[k] = v * f;
        r.constant = constant * f;
        return r;
    }
    bool is_constant() const { return coeff.empty(); }
    void prune() {
        for (auto it = coeff.begin(); it != coeff.end();) {
            if (it->second == 0) it = coeff.erase(it);
            else ++it;
        }
    }
};

struct Formula {
    enum class Kind { True, False, Atom, Lit, And, Or };
    Kind kind = Kind::True;
    std::size_t atom = 0;  // index into atoms: atom means lin <= 0
    std::string lit;
    bool positive = true;
    std::vector<Formula> kids;
};

class NotLinear : public std::exception {};

class Normalizer {
public:
    std::vector<Lin> atoms;
    std::vector<Lin> side_rows;  // lin <= 0, always asserted
    std::set<std::string> aux_vars;

    Lin linearize(const ExprPtr& e) {
        switch (e->op()) {
        case Op::IntConst: {
            Lin l;
            l.constant = e->int_value();
            return l;
        }
        case Op::Symbol: {
            Lin l;
            l.coeff[e->name()] = 1;
            return l;
        }
        case Op::Add: {
            Lin l = linearize(e->args()[0]);
            l += linearize(e->args()[1]);
            return l;
        }
        case Op::Sub: {
            Lin l = linearize(e->args()[0]);
            l += linearize(e->args()[1]).scaled(-1);
            return l;
        }
        case Op::Mul: {
            Lin a = linearize(e->args()[0]);
            Lin b = linearize(e->args()[1]);
            if (a.is_constant()) return b.scaled(a.constant);
            if (b.is_constant()) return a.scaled(b.constant);
            throw NotLinear();
        }
        case Op::Div: {
            Lin t = linearize(e->args()[0]);
            Lin d = linearize(e->args()[1]);
            if (!d.is_constant()) throw NotLinear();
            BigInt c = d.constant;
            if (c == 0) {
                // Undefined; the divisor side constraint already fails.
                Lin zero;
                return zero;
            }
            if (t.is_constant()) {
                Lin l;
                l.constant = floor_div(t.constant, c);
                return l;
            }
            if (c < 0) {
                t = t.scaled(-1);
                c = -c;
            }
            std::string key = to_string(e);
            auto it = quotients_.find(key);
            std::string q;
            if (it != quotients_.end()) {
                q = it->second;
            } else {
                q = fmt::format("$q{}", quotients_.size());
                quotients_.emplace(key, q);
                aux_vars.insert(q);
                // c*q <= t <= c*q + c - 1
                Lin lower = Lin{{{q, c}}, 0};
                lower += t.scaled(-1);
                side_rows.push_back(lower);
                Lin upper = t;
                upper += Lin{{{q, -c}}, BigInt(-(c - 1))};
                side_rows.push_back(upper);
            }
            Lin l;
            l.coeff[q] = 1;
            return l;
        }
        default: throw NotLinear();
        }
    }

    Formula atom(Lin l) {
        l.prune();
        if (l.is_constant()) {
            Formula f;
            f.kind = l.constant <= 0 ? Formula::Kind::True : Formula::Kind::False;
            return f;
        }
        Formula f;
        f.kind = Formula::Kind::Atom;
        f.atom = atoms.size();
        atoms.push_back(std::move(l));
        return f;
    }

    static Formula junction(Formula::Kind k, std::vector<Formula> kids) {
        Formula f;
        f.kind = k;
        f.kids = std::move(kids);
        return f;
    }

    Formula nnf(const ExprPtr& e, bool positive) {
        switch (e->op()) {
        case Op::BoolConst: {
            Formula f;
            f.kind = (e->bool_value() == positive) ? Formula::Kind::True : Formula::Kind::False;
            return f;
        }
        case Op::Symbol: {
            Formula f;
            f.kind = Formula::Kind::Lit;
            f.lit = e->name();
            f.positive = positive;
            return f;
        }
        case Op::Not: return nnf(e->args()[0], !positive);
        case Op::And:
        case Op::Or: {
            bool conj = (e->op() == Op::And) == positive;
            std::vector<Formula> kids;
            for (const auto& a : e->args()) kids.push_back(nnf(a, positive));
            return junction(conj ? Formula::Kind::And : Formula::Kind::Or, std::move(kids));
        }
        default: break;
        }

        const ExprPtr& a = e->args()[0];
        const ExprPtr& b = e->args()[1];
        if ((e->op() == Op::Eq || e->op() == Op::Ne) && a->sort() == Sort::Bool) {
            bool same = (e->op() == Op::Eq) == positive;
            if (same) {
                return junction(Formula::Kind::Or,
                                {junction(Formula::Kind::And, {nnf(a, true), nnf(b, true)}),
                                 junction(Formula::Kind::And, {nnf(a, false), nnf(b, false)})});
            }
            return junction(Formula::Kind::Or, {junction(Formula::Kind::And, {nnf(a, true), nnf(b, false)}),
                                                 junction(Formula::Kind::And, {nnf(a, false), nnf(b, true)})});
        }

        Lin l = linearize(a);
        l += linearize(b).scaled(-1);
        Lin neg = l.scaled(-1);
        auto plus_one = [](Lin x) {
            x.constant += 1;
            return x;
        };
        Op op = e->op();
        if (!positive) {
            switch (op) {
            case Op::Eq: op = Op::Ne; break;
            case Op::Ne: op = Op::Eq; break;
            case Op::Lt: op = Op::Ge; break;
            case Op::Le: op = Op::Gt; break;
            case Op::Gt: op = Op::Le; break;
            case Op::Ge: op = Op::Lt; break;
            default: break;
            }
        }
        switch (op) {
        case Op::Le: return atom(l);
        case Op::Lt: return atom(plus_one(l));
        case Op::Ge: return atom(neg);
        case Op::Gt: return atom(plus_one(neg));
        case Op::Eq: return junction(Formula::Kind::And, {atom(l), atom(neg)});
        case Op::Ne: return junction(Formula::Kind::Or, {atom(plus_one(l)), atom(plus_one(neg))});
        default: throw NotLinear();
        }
    }

private:
    std::map<std::string, std::string> quotients_;
};

// Replaces each map read by a symbol named after its rendering, and
// collects divisor side constraints.
ExprPtr lower_map_reads(const ExprPtr& e) {
    switch (e->op()) {
    case Op::IntConst:
    case Op::BoolConst:
    case Op::Symbol: return e;
    case Op::MapRead: return symbol(to_string(e), e->sort());
    default: break;
    }
    std::map<std::string, ExprPtr> none;
    std::vector<ExprPtr> args;
    for (const auto& a : e->args()) args.push_back(lower_map_reads(a));
    // Rebuild through substitute's factory dispatch.
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

void collect_divisors(const ExprPtr& e, std::vector<ExprPtr>& out) {
    if (e->op() == Op::Div) out.push_back(ne(e->args()[1], int_const(0)));
    for (const auto& a : e->args()) collect_divisors(a, out);
}

bool is_linear_term(const ExprPtr& e) {
    // A product or quotient is linear when one side (the divisor, for
    // division) folds to a constant. Constant folding happens at
    // construction, so a non-constant operand here means a symbol occurs.
    auto has_symbol = [](const ExprPtr& x) {
        std::map<std::string, Sort> s;
        collect_symbols(x, s);
        return !s.empty();
    };
    if (e->op() == Op::Mul) {
        if (has_symbol(e->args()[0]) && has_symbol(e->args()[1])) return false;
    }
    if (e->op() == Op::Div) {
        if (has_symbol(e->args()[1])) return false;
    }
    return std::all_of(e->args().begin(), e->args().end(), is_linear_term);
}

void nonlinear_symbols(const ExprPtr& e, std::set<std::string>& out) {
    if ((e->op() == Op::Mul || e->op() == Op::Div) && !is_linear_term(e)) {
        std::map<std::string, Sort> s;
        collect_symbols(e, s);
        for (const auto& [n, _] : s) out.insert(n);
        return;
    }
    for (const auto& a : e->args()) nonlinear_symbols(a, out);
}

// ---------------------------------------------------------------------------

struct Problem {
    std::vector<ExprPtr> predicates;  // lowered (no map reads), with side constraints
    std::map<std::string, Sort> symbols;
    std::map<std::string, std::optional<BigInt>> upper;
};

class Search {
public:
    Search(const Problem& p, const SolverOptions& opts, Budget& budget) : p_(p), opts_(opts), budget_(budget) {}

    LiaStatus run(Model& model) {
        Normalizer norm;
        std::vector<Formula> roots;
        try {
            for (const auto& pred : p_.predicates) roots.push_back(norm.nnf(pred, true));
        } catch (const NotLinear&) {
            reason_ = "nonlinear term";
            return LiaStatus::Unknown;
        }

        for (const auto& [name, sort] : p_.symbols) {
            if (is_numeric(sort)) int_vars_.push_back(name);
        }
        for (const auto& q : norm.aux_vars) int_vars_.push_back(q);
        for (std::size_t i = 0; i < int_vars_.size(); ++i) index_[int_vars_[i]] = i;

        const std::size_t n = int_vars_.size();
        auto to_row = [&](const Lin& l) {
            Row r;
            r.a.assign(n, 0);
            for (const auto& [k, v] : l.coeff) r.a[index_.at(k)] = v;
            r.b = -l.constant;
            return r;
        };
        for (const auto& [name, sort] : p_.symbols) {
            if (!is_numeric(sort)) continue;
            Row lo;
            lo.a.assign(n, 0);
            lo.a[index_.at(name)] = -1;
            lo.b = 0;
            base_.push_back(lo);
            auto up = p_.upper.find(name);
            if (up != p_.upper.end() && up->second) {
                Row hi;
                hi.a.assign(n, 0);
                hi.a[index_.at(name)] = 1;
                hi.b = *up->second;
                base_.push_back(hi);
            }
        }
        for (const auto& s : norm.side_rows) base_.push_back(to_row(s));
        for (const auto& a : norm.atoms) atom_rows_.push_back(to_row(a));

        std::vector<const Formula*> pending;
        for (const auto& r : roots) pending.push_back(&r);
        std::vector<std::size_t> active;
        std::map<std::string, bool> lits;
        LiaStatus st = dpll(pending, active, lits, model);
        if (st == LiaStatus::Unknown && reason_.empty()) reason_ = "search budget exhausted";
        return st;
    }

    const std::string& reason() const { return reason_; }

private:
    LiaStatus dpll(std::vector<const Formula*> pending, std::vector<std::size_t> active,
                   std::map<std::string, bool> lits, Model& model) {
        if (!budget_.spend()) return LiaStatus::Unknown;
        while (!pending.empty()) {
            const Formula* f = pending.back();
            pending.pop_back();
            switch (f->kind) {
            case Formula::Kind::True: break;
            case Formula::Kind::False: return LiaStatus::Unsat;
            case Formula::Kind::Atom: active.push_back(f->atom); break;
            case Formula::Kind::Lit: {
                auto [it, inserted] = lits.emplace(f->lit, f->positive);
                if (!inserted && it->second != f->positive) return LiaStatus::Unsat;
                break;
            }
            case Formula::Kind::And:
                for (const auto& k : f->kids) pending.push_back(&k);
                break;
            case Formula::Kind::Or: {
                bool unknown = false;
                for (const auto& k : f->kids) {
                    auto next = pending;
                    next.push_back(&k);
                    LiaStatus st = dpll(std::move(next), active, lits, model);
                    if (st == LiaStatus::Sat) return st;
                    if (st == LiaStatus::Unknown) {
                        unknown = true;
                        if (budget_.exhausted) return st;
                    }
                }
                return unknown ? LiaStatus::Unknown : LiaStatus::Unsat;
            }
            }
        }
        return theory(active, lits, model);
    }

    LiaStatus theory(const std::vector<std::size_t>& active, const std::map<std::string, bool>& lits,
                     Model& model) {
        std::vector<Row> rows = base_;
        for (auto idx : active) rows.push_back(atom_rows_[idx]);
        std::vector<BigInt> sol;
        LiaStatus st = solve_lia(rows, int_vars_.size(), opts_, budget_, sol);
        if (st != LiaStatus::Sat) return st;
        model.clear();
        for (std::size_t i = 0; i < int_vars_.size(); ++i) {
            if (int_vars_[i].rfind("$q", 0) == 0) continue;
            model[int_vars_[i]] = sol[i];
        }
        for (const auto& [name, sort] : p_.symbols) {
            if (sort != Sort::Bool) continue;
            auto it = lits.find(name);
            model[name] = it != lits.end() ? it->second : false;
        }
        return LiaStatus::Sat;
    }

    const Problem& p_;
    const SolverOptions& opts_;
    Budget& budget_;
    std::string reason_;
    std::vector<std::string> int_vars_;
    std::map<std::string, std::size_t> index_;
    std::vector<Row> base_;
    std::vector<Row> atom_rows_;
};

void check_sorts(const ExprPtr& e, const SymbolTable& table) {
    if (!e) throw IllSorted("null predicate");
    if (e->op() == Op::Symbol) {
        const SymbolInfo* info = table.find(e->name());
        if (!info) throw IllSorted(fmt::format("undeclared symbol '{}'", e->name()));
        bool ok = info->sort == e->sort() || (is_numeric(info->sort) && is_numeric(e->sort()));
        if (!ok)
            throw IllSorted(fmt::format("symbol '{}' used as {} but declared {}", e->name(), to_string(e->sort()),
                                        to_string(info->sort)));
        return;
    }
    for (const auto& a : e->args()) check_sorts(a, table);
}

}  // namespace

SatResult check_sat(const std::vector<ExprPtr>& predicates, const SymbolTable& symbols,
                    const SolverOptions& options) {
    for (const auto& p : predicates) {
        check_sorts(p, symbols);
        if (p->sort() != Sort::Bool) throw IllSorted("predicate '" + to_string(p) + "' is not Bool");
    }
    if (predicates.empty()) return SatResult::sat({});

    Problem prob;
    for (const auto& p : predicates) {
        std::vector<ExprPtr> divisors;
        collect_divisors(p, divisors);
        for (auto& d : divisors) prob.predicates.push_back(lower_map_reads(d));
        prob.predicates.push_back(lower_map_reads(p));
        collect_symbols(p, prob.symbols);
    }
    for (const auto& [name, sort] : prob.symbols) {
        const SymbolInfo* info = symbols.find(name);
        prob.upper[name] = info ? info->upper : std::nullopt;
    }

    std::set<std::string> nl;
    for (const auto& p : prob.predicates) nonlinear_symbols(p, nl);

    Budget budget{options.node_budget};
    auto finish = [&](Model model) {
        // Map reads and symbols share the rendering namespace, so the model
        // can be checked against the original predicates directly.
        if (!satisfies(predicates, model)) return SatResult::unknown("model failed verification");
        return SatResult::sat(std::move(model));
    };

    if (nl.empty()) {
        Search s(prob, options, budget);
        Model model;
        LiaStatus st = s.run(model);
        if (st == LiaStatus::Sat) return finish(std::move(model));
        if (st == LiaStatus::Unsat) return SatResult::unsat();
        return SatResult::unknown(s.reason());
    }

    // Bounded enumeration over the symbols occurring in nonlinear terms.
    if (nl.size() > options.nonlinear_max_symbols)
        return SatResult::unknown(fmt::format("nonlinear terms over {} symbols", nl.size()));
    std::vector<std::string> names(nl.begin(), nl.end());
    std::vector<BigInt> sizes;
    BigInt product = 1;
    for (const auto& n : names) {
        Sort s = prob.symbols.at(n);
        BigInt size;
        if (s == Sort::Bool) {
            size = 2;
        } else {
            const auto& up = prob.upper.at(n);
            if (!up) return SatResult::unknown("nonlinear term over unbounded symbol '" + n + "'");
            size = *up + 1;
            if (size <= 0) return SatResult::unsat();
        }
        sizes.push_back(size);
        product *= size;
    }
    if (product > options.nonlinear_max_domain)
        return SatResult::unknown("nonlinear enumeration domain too large");

    bool unknown = false;
    std::string why;
    std::vector<BigInt> counter(names.size(), 0);
    for (BigInt iter = 0; iter < product; ++iter) {
        std::map<std::string, ExprPtr> bind;
        Model fixed;
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (prob.symbols.at(names[i]) == Sort::Bool) {
                bind[names[i]] = bool_const(counter[i] != 0);
                fixed[names[i]] = counter[i] != 0;
            } else {
                bind[names[i]] = int_const(counter[i]);
                fixed[names[i]] = counter[i];
            }
        }
        Problem sub = prob;
        sub.predicates.clear();
        for (const auto& p : prob.predicates) sub.predicates.push_back(substitute(p, bind));
        for (const auto& n : names) sub.symbols.erase(n);

        Search s(sub, options, budget);
        Model model;
        LiaStatus st = s.run(model);
        if (st == LiaStatus::Sat) {
            for (auto& [k, v] : fixed) model[k] = v;
            return finish(std::move(model));
        }
        if (st == LiaStatus::Unknown) {
            unknown = true;
            why = s.reason();
            if (budget.exhausted) break;
        }
        for (std::size_t i = 0; i < counter.size(); ++i) {
            counter[i] += 1;
            if (counter[i] < sizes[i]) break;
            counter[i] = 0;
        }
    }
    if (unknown) return SatResult::unknown(why.empty() ? "search budget exhausted" : why);
    return SatResult::unsat();
}

std::vector<ExprPtr> minimal_unsat_subset(const std::vector<ExprPtr>& predicates, const SymbolTable& symbols,
                                          SolverBackend& solver) {
    std::vector<ExprPtr> core = predicates;
    for (std::size_t i = 0; i < core.size();) {
        std::vector<ExprPtr> trial;
        for (std::size_t j = 0; j < core.size(); ++j) {
            if (j != i) trial.push_back(core[j]);
        }
        if (solver.check(trial, symbols).is_unsat()) {
            core = std::move(trial);
        } else {
            ++i;
        }
    }
    return core;
}

}  // namespace evopoc::reach
