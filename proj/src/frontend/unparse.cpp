#include "evopoc/frontend/parser.hpp"

#include <fmt/format.h>

namespace evopoc::sol {

namespace {

int precedence(const AstExprP& e) {
    switch (e->kind) {
        case AstExpr::Kind::Binary: {
            const auto& op = e->text;
            if (op.back() == '=' && op != "==" && op != "!=" && op != "<=" && op != ">=") return 1;
            if (op == "||") return 3;
            if (op == "&&") return 4;
            if (op == "==" || op == "!=") return 5;
            if (op == "<" || op == ">" || op == "<=" || op == ">=") return 6;
            if (op == "|") return 7;
            if (op == "^") return 8;
            if (op == "&") return 9;
            if (op == "<<" || op == ">>") return 10;
            if (op == "+" || op == "-") return 11;
            if (op == "*" || op == "/" || op == "%") return 12;
            return 13;  // **
        }
        case AstExpr::Kind::Ternary: return 2;
        case AstExpr::Kind::Unary: return 14;
        default: return 15;
    }
}

std::string expr(const AstExprP& e, int min_prec);

std::string list(const std::vector<AstExprP>& xs, std::size_t from = 0) {
    std::string out;
    for (std::size_t i = from; i < xs.size(); ++i) {
        if (i > from) out += ", ";
        if (xs[i]) out += expr(xs[i], 1);
    }
    return out;
}

std::string named(const AstExpr& e, std::size_t from) {
    std::string out = "{";
    for (std::size_t i = 0; i < e.names.size(); ++i) {
        if (i) out += ", ";
        out += e.names[i] + ": " + expr(e.args[from + i], 1);
    }
    return out + "}";
}

std::string expr_body(const AstExprP& e) {
    using K = AstExpr::Kind;
    switch (e->kind) {
        case K::Number: return e->unit.empty() ? e->text : e->text + " " + e->unit;
        case K::Bool:
        case K::String:
        case K::Ident: return e->text;
        case K::Type: return e->type->name;
        case K::Member: return expr(e->args[0], 15) + "." + e->text;
        case K::Index: return expr(e->args[0], 15) + "[" + expr(e->args[1], 1) + "]";
        case K::Call:
            if (!e->names.empty()) return expr(e->args[0], 15) + "(" + named(*e, 1) + ")";
            return expr(e->args[0], 15) + "(" + list(e->args, 1) + ")";
        case K::CallOptions: return expr(e->args[0], 15) + named(*e, 1);
        case K::Unary: {
            auto sep = e->text == "delete" ? " " : "";
            return e->text + sep + expr(e->args[0], 14);
        }
        case K::Postfix: return expr(e->args[0], 15) + e->text;
        case K::Binary: {
            int p = precedence(e);
            bool right_assoc = p == 1 || p == 13;
            return expr(e->args[0], right_assoc ? p + 1 : p) + " " + e->text + " " +
                   expr(e->args[1], right_assoc ? p : p + 1);
        }
        case K::Ternary: return expr(e->args[0], 3) + " ? " + expr(e->args[1], 1) + " : " + expr(e->args[2], 2);
        case K::New: return "new " + unparse(*e->type);
        case K::Tuple: return "(" + list(e->args) + (e->args.size() == 1 ? ",)" : ")");
        case K::ArrayLit: return "[" + list(e->args) + "]";
    }
    return "?";
}

std::string expr(const AstExprP& e, int min_prec) {
    auto s = expr_body(e);
    return precedence(e) < min_prec ? "(" + s + ")" : s;
}

std::string params(const std::vector<Param>& ps) {
    std::string out = "(";
    for (std::size_t i = 0; i < ps.size(); ++i) {
        if (i) out += ", ";
        out += unparse(ps[i].type);
        if (!ps[i].location.empty()) out += " " + ps[i].location;
        if (!ps[i].name.empty()) out += " " + ps[i].name;
    }
    return out + ")";
}

std::string decl(const VarDecl& d) {
    auto s = unparse(d.type);
    if (!d.location.empty()) s += " " + d.location;
    return s + " " + d.name;
}

class Writer {
public:
    void line(int indent, const std::string& text) { out_ += std::string(indent * 4, ' ') + text + "\n"; }
    std::string take() { return std::move(out_); }

    void block(int indent, const std::vector<StmtP>& body) {
        for (const auto& s : body) stmt(indent, s);
    }

    // Statement text without trailing newline for single-line forms.
    std::string simple(const StmtP& s) {
        using K = Stmt::Kind;
        switch (s->kind) {
            case K::VarDecl: {
                std::string lhs;
                if (s->tuple) {
                    lhs = "(";
                    for (std::size_t i = 0; i < s->vars.size(); ++i) {
                        if (i) lhs += ", ";
                        if (s->vars[i]) lhs += decl(*s->vars[i]);
                    }
                    lhs += ")";
                } else {
                    lhs = decl(*s->vars[0]);
                }
                return s->expr ? lhs + " = " + expr(s->expr, 1) + ";" : lhs + ";";
            }
            case K::Expr: return expr(s->expr, 1) + ";";
            case K::Return: return s->expr ? "return " + expr(s->expr, 1) + ";" : "return;";
            case K::Emit: return "emit " + expr(s->expr, 1) + ";";
            case K::Revert: return "revert " + expr(s->expr, 1) + ";";
            case K::Placeholder: return "_;";
            case K::Break: return "break;";
            case K::Continue: return "continue;";
            case K::Opaque: return s->text;
            default: return {};
        }
    }

    void stmt(int indent, const StmtP& s) {
        using K = Stmt::Kind;
        switch (s->kind) {
            case K::Block:
                line(indent, "{");
                block(indent + 1, s->stmts);
                line(indent, "}");
                return;
            case K::Unchecked:
                line(indent, "unchecked {");
                block(indent + 1, s->stmts);
                line(indent, "}");
                return;
            case K::If:
                line(indent, "if (" + expr(s->expr, 1) + ")");
                nested(indent, s->body);
                if (s->else_branch) {
                    line(indent, "else");
                    nested(indent, s->else_branch);
                }
                return;
            case K::For: {
                std::string init = s->init ? simple(s->init) : ";";
                std::string cond = s->expr ? " " + expr(s->expr, 1) : "";
                std::string post = s->post ? " " + expr(s->post, 1) : "";
                line(indent, "for (" + init + cond + ";" + post + ")");
                nested(indent, s->body);
                return;
            }
            case K::While:
                line(indent, "while (" + expr(s->expr, 1) + ")");
                nested(indent, s->body);
                return;
            case K::DoWhile:
                line(indent, "do");
                nested(indent, s->body);
                line(indent, "while (" + expr(s->expr, 1) + ");");
                return;
            default: line(indent, simple(s));
        }
    }

    // Bodies of if/for/while: blocks stay at the same indent.
    void nested(int indent, const StmtP& s) {
        if (s->kind == Stmt::Kind::Block)
            stmt(indent, s);
        else
            stmt(indent + 1, s);
    }

private:
    std::string out_;
};

const char* contract_keyword(ContractDef::Kind k) {
    switch (k) {
        case ContractDef::Kind::Contract: return "contract";
        case ContractDef::Kind::AbstractContract: return "abstract contract";
        case ContractDef::Kind::Library: return "library";
        case ContractDef::Kind::Interface: return "interface";
    }
    return "contract";
}

}  // namespace

std::string unparse(const AstExprP& e) { return expr(e, 1); }

std::string unparse(const TypeName& t) {
    switch (t.kind) {
        case TypeName::Kind::Elementary:
        case TypeName::Kind::UserDefined: return t.name;
        case TypeName::Kind::Array: return unparse(t.args[0]) + "[" + t.length + "]";
        case TypeName::Kind::Mapping: return "mapping(" + unparse(t.args[0]) + " => " + unparse(t.args[1]) + ")";
    }
    return "?";
}

std::string unparse(const SourceUnit& unit) {
    Writer w;
    for (const auto& d : unit.directives) w.line(0, d);
    for (const auto& c : unit.contracts) {
        w.line(0, "");
        std::string head = std::string(contract_keyword(c.kind)) + " " + c.name;
        if (!c.bases.empty()) {
            head += " is ";
            for (std::size_t i = 0; i < c.bases.size(); ++i) {
                if (i) head += ", ";
                head += c.bases[i].name;
                if (c.bases[i].has_parens) head += "(" + list(c.bases[i].args) + ")";
            }
        }
        w.line(0, head + " {");
        for (const auto& u : c.usings) w.line(1, "using " + u + ";");
        for (const auto& m : c.opaque_members) w.line(1, m);
        for (const auto& v : c.state_vars) {
            std::string s = unparse(v.type);
            for (const auto& q : v.qualifiers) s += " " + q;
            s += " " + v.name;
            if (v.init) s += " = " + expr(v.init, 1);
            w.line(1, s + ";");
        }
        for (const auto& m : c.modifiers) {
            std::string s = "modifier " + m.name + params(m.params);
            if (m.is_virtual) s += " virtual";
            if (m.is_override) s += " override";
            if (!m.body) {
                w.line(1, s + ";");
                continue;
            }
            w.line(1, s + " {");
            w.block(2, *m.body);
            w.line(1, "}");
        }
        for (const auto& f : c.functions) {
            std::string s;
            switch (f.kind) {
                case FunctionDef::Kind::Function: s = "function " + f.name; break;
                default: s = f.name;
            }
            s += params(f.params);
            if (!f.visibility.empty()) s += " " + f.visibility;
            if (!f.mutability.empty()) s += " " + f.mutability;
            if (f.is_virtual) s += " virtual";
            if (f.is_override) s += " override";
            for (const auto& m : f.modifiers) {
                s += " " + m.name;
                if (m.has_parens) s += "(" + list(m.args) + ")";
            }
            if (!f.returns.empty()) s += " returns " + params(f.returns);
            if (!f.body) {
                w.line(1, s + ";");
                continue;
            }
            w.line(1, s + " {");
            w.block(2, *f.body);
            w.line(1, "}");
        }
        w.line(0, "}");
    }
    return w.take();
}

}  // namespace evopoc::sol
