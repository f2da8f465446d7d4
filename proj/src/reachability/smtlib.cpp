#include "evopoc/reachability/smtlib.hpp"

#include <fmt/format.h>

#include <array>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

namespace evopoc::reach {

namespace {

std::string quote(const std::string& name) {
    bool simple = !name.empty() && !std::isdigit(static_cast<unsigned char>(name[0]));
    for (char c : name) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '$'))
            simple = false;
    }
    return simple ? name : "|" + name + "|";
}

std::string smt_int(const BigInt& v) { return v < 0 ? "(- " + BigInt(-v).str() + ")" : v.str(); }

std::string emit(const ExprPtr& e) {
    switch (e->op()) {
    case Op::IntConst: return smt_int(e->int_value());
    case Op::BoolConst: return e->bool_value() ? "true" : "false";
    case Op::Symbol: return quote(e->name());
    case Op::MapRead: return quote(to_string(e));
    case Op::Not: return "(not " + emit(e->args()[0]) + ")";
    case Op::Ne: return "(not (= " + emit(e->args()[0]) + " " + emit(e->args()[1]) + "))";
    default: break;
    }
    const char* head = "";
    switch (e->op()) {
    case Op::Add: head = "+"; break;
    case Op::Sub: head = "-"; break;
    case Op::Mul: head = "*"; break;
    case Op::Div: head = "div"; break;  // floor for positive divisors, as in Expr
    case Op::Eq: head = "="; break;
    case Op::Lt: head = "<"; break;
    case Op::Le: head = "<="; break;
    case Op::Gt: head = ">"; break;
    case Op::Ge: head = ">="; break;
    case Op::And: head = "and"; break;
    case Op::Or: head = "or"; break;
    default: break;
    }
    std::string out = "(";
    out += head;
    for (const auto& a : e->args()) {
        out += ' ';
        out += emit(a);
    }
    out += ')';
    return out;
}

void divisor_guards(const ExprPtr& e, std::vector<std::string>& out) {
    if (e->op() == Op::Div) out.push_back("(not (= " + emit(e->args()[1]) + " 0))");
    for (const auto& a : e->args()) divisor_guards(a, out);
}

// Minimal s-expression reader for model responses.
struct SExpr {
    std::string atom;
    std::vector<SExpr> list;
    bool is_list = false;
};

class Reader {
public:
    explicit Reader(const std::string& s) : s_(s) {}

    bool next(SExpr& out) {
        skip();
        if (pos_ >= s_.size()) return false;
        out = read();
        return true;
    }

private:
    void skip() {
        while (pos_ < s_.size()) {
            if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
                ++pos_;
            } else if (s_[pos_] == ';') {
                while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    SExpr read() {
        skip();
        SExpr e;
        if (pos_ >= s_.size()) throw std::runtime_error("unexpected end of s-expression");
        if (s_[pos_] == '(') {
            ++pos_;
            e.is_list = true;
            for (;;) {
                skip();
                if (pos_ >= s_.size()) throw std::runtime_error("unbalanced parentheses");
                if (s_[pos_] == ')') {
                    ++pos_;
                    break;
                }
                e.list.push_back(read());
            }
            return e;
        }
        if (s_[pos_] == ')') throw std::runtime_error("unexpected ')'");
        if (s_[pos_] == '|') {
            auto end = s_.find('|', pos_ + 1);
            if (end == std::string::npos) throw std::runtime_error("unterminated quoted symbol");
            e.atom = s_.substr(pos_ + 1, end - pos_ - 1);
            pos_ = end + 1;
            return e;
        }
        std::size_t start = pos_;
        while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != '(' &&
               s_[pos_] != ')')
            ++pos_;
        e.atom = s_.substr(start, pos_ - start);
        return e;
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

Value value_of(const SExpr& e) {
    if (!e.is_list) {
        if (e.atom == "true") return true;
        if (e.atom == "false") return false;
        return parse_bigint(e.atom);
    }
    if (e.list.size() == 2 && !e.list[0].is_list && e.list[0].atom == "-") {
        auto inner = value_of(e.list[1]);
        return BigInt(-std::get<BigInt>(inner));
    }
    throw std::runtime_error("unsupported model value");
}

}  // namespace

std::string to_smtlib(const std::vector<ExprPtr>& predicates, const SymbolTable& symbols) {
    std::map<std::string, Sort> used;
    for (const auto& p : predicates) collect_symbols(p, used);

    std::ostringstream out;
    out << "(set-logic QF_LIA)\n";
    for (const auto& [name, sort] : used) {
        out << "(declare-const " << quote(name) << (sort == Sort::Bool ? " Bool" : " Int") << ")\n";
    }
    for (const auto& [name, sort] : used) {
        if (sort == Sort::Bool) continue;
        out << "(assert (>= " << quote(name) << " 0))\n";
        if (const SymbolInfo* info = symbols.find(name); info && info->upper)
            out << "(assert (<= " << quote(name) << " " << info->upper->str() << "))\n";
    }
    for (const auto& p : predicates) {
        std::vector<std::string> guards;
        divisor_guards(p, guards);
        for (const auto& g : guards) out << "(assert " << g << ")\n";
        out << "(assert " << emit(p) << ")\n";
    }
    out << "(check-sat)\n(get-model)\n";
    return out.str();
}

SatResult parse_smtlib_response(const std::string& response) {
    try {
        Reader reader(response);
        SExpr first;
        if (!reader.next(first) || first.is_list) return SatResult::unknown("empty solver response");
        if (first.atom == "unsat") return SatResult::unsat();
        if (first.atom != "sat") return SatResult::unknown("solver said: " + first.atom);
        Model model;
        SExpr body;
        if (!reader.next(body) || !body.is_list) return SatResult::sat(model);
        std::size_t i = 0;
        if (!body.list.empty() && !body.list[0].is_list && body.list[0].atom == "model") i = 1;
        for (; i < body.list.size(); ++i) {
            const SExpr& def = body.list[i];
            // (define-fun name () Sort value)
            if (!def.is_list || def.list.size() != 5 || def.list[0].atom != "define-fun") continue;
            model[def.list[1].atom] = value_of(def.list[4]);
        }
        return SatResult::sat(std::move(model));
    } catch (const std::exception& ex) {
        return SatResult::unknown(std::string("unparseable solver response: ") + ex.what());
    }
}

SatResult ExternalSmtSolver::check(const std::vector<ExprPtr>& predicates, const SymbolTable& symbols) {
    namespace fs = std::filesystem;
    fs::path script = fs::temp_directory_path() / fmt::format("evopoc-{}.smt2", static_cast<const void*>(this));
    {
        std::ofstream f(script);
        f << to_smtlib(predicates, symbols);
    }
    std::string cmd = command_ + " " + script.string() + " 2>&1";
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
    if (!pipe) return SatResult::unknown("could not start external solver");
    std::string output;
    std::array<char, 4096> buf{};
    while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe.get())) output.append(buf.data(), n);
    pipe.reset();
    std::error_code ec;
    fs::remove(script, ec);

    SatResult r = parse_smtlib_response(output);
    if (r.is_sat() && !satisfies(predicates, r.model)) return SatResult::unknown("external model failed verification");
    return r;
}

}  // namespace evopoc::reach
