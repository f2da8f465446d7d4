#include "evopoc/frontend/parser.hpp"

#include "lexer.hpp"

#include <fmt/format.h>

#include <set>

namespace evopoc::sol {

using detail::Tok;
using detail::Token;

namespace {

const std::set<std::string> kUnits = {"wei", "gwei", "ether", "seconds", "minutes", "hours", "days", "weeks", "years"};
const std::set<std::string> kLocations = {"memory", "storage", "calldata"};
const std::set<std::string> kAssignOps = {"=", "+=", "-=", "*=", "/=", "%=", "|=", "&=", "^=", "<<=", ">>="};

bool is_elementary(const std::string& s) {
    static const std::set<std::string> fixed = {"address", "bool", "string", "bytes", "byte", "int", "uint"};
    if (fixed.count(s)) return true;
    auto digits_after = [&](std::size_t n) {
        if (s.size() <= n) return false;
        for (std::size_t i = n; i < s.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        return true;
    };
    if (s.rfind("uint", 0) == 0) return digits_after(4);
    if (s.rfind("int", 0) == 0) return digits_after(3);
    if (s.rfind("bytes", 0) == 0) return digits_after(5);
    return false;
}

int binary_precedence(const std::string& op) {
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
    if (op == "**") return 13;
    return -1;
}

class Parser {
public:
    Parser(std::string_view src, std::string path) : src_(src), path_(std::move(path)), toks_(detail::lex(src, path_)) {}

    SourceUnit unit() {
        SourceUnit u;
        u.path = path_;
        while (!at_end()) {
            if (peek_is("pragma") || peek_is("import")) {
                u.directives.push_back(raw_until_semicolon());
            } else if (peek_is("contract") || peek_is("library") || peek_is("interface") ||
                       (peek_is("abstract") && peek_is("contract", 1))) {
                u.contracts.push_back(contract());
            } else if (peek_is("struct") || peek_is("enum") || peek_is("error") || peek_is("event") ||
                       peek_is("function") || peek_is("using") || peek_is("type") || peek().kind == Tok::Ident) {
                // File-level declarations are kept verbatim.
                u.directives.push_back(raw_member());
            } else {
                fail("unexpected token '" + peek().text + "' at file level");
            }
        }
        return u;
    }

private:
    // ---- token helpers ----
    const Token& peek(std::size_t ahead = 0) const {
        return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
    }
    bool at_end() const { return peek().kind == Tok::End; }
    bool peek_is(std::string_view text, std::size_t ahead = 0) const {
        const auto& t = peek(ahead);
        return t.kind != Tok::End && t.kind != Tok::String && t.text == text;
    }
    SourceLoc loc() const { return {path_, peek().line, peek().column}; }
    [[noreturn]] void fail(const std::string& what) const { throw ParseError(loc(), what); }
    const Token& next() {
        if (at_end()) fail("unexpected end of input");
        return toks_[pos_++];
    }
    bool accept(std::string_view text) {
        if (peek_is(text)) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(std::string_view text) {
        if (!accept(text)) fail(fmt::format("expected '{}' but found '{}'", text, at_end() ? "<eof>" : peek().text));
    }
    std::string ident() {
        if (peek().kind != Tok::Ident) fail("expected identifier but found '" + peek().text + "'");
        return next().text;
    }

    std::string raw(std::size_t from_tok, std::size_t to_tok) const {
        auto b = toks_[from_tok].begin;
        auto e = toks_[to_tok - 1].end;
        return std::string(src_.substr(b, e - b));
    }

    // Skips to the end of a balanced group starting at the current '{', '(' or '['.
    void skip_balanced() {
        int depth = 0;
        do {
            const auto& t = next();
            if (t.kind == Tok::Punct) {
                if (t.text == "{" || t.text == "(" || t.text == "[") ++depth;
                if (t.text == "}" || t.text == ")" || t.text == "]") --depth;
            }
        } while (depth > 0);
    }

    std::string raw_until_semicolon() {
        auto start = pos_;
        while (!peek_is(";")) {
            if (peek_is("{") || peek_is("(") || peek_is("["))
                skip_balanced();
            else
                next();
        }
        next();
        return raw(start, pos_);
    }

    // A declaration ending either in ';' or in a balanced '{...}' block.
    std::string raw_member() {
        auto start = pos_;
        while (true) {
            if (peek_is(";")) {
                next();
                break;
            }
            if (peek_is("{")) {
                skip_balanced();
                break;
            }
            if (peek_is("(") || peek_is("["))
                skip_balanced();
            else
                next();
        }
        return raw(start, pos_);
    }

    // ---- contracts ----
    ContractDef contract() {
        ContractDef c;
        c.loc = loc();
        if (accept("abstract")) {
            expect("contract");
            c.kind = ContractDef::Kind::AbstractContract;
        } else if (accept("contract")) {
            c.kind = ContractDef::Kind::Contract;
        } else if (accept("library")) {
            c.kind = ContractDef::Kind::Library;
        } else {
            expect("interface");
            c.kind = ContractDef::Kind::Interface;
        }
        c.name = ident();
        if (accept("is")) {
            do {
                BaseSpec b;
                b.name = ident();
                while (accept(".")) b.name += "." + ident();
                if (accept("(")) {
                    b.has_parens = true;
                    b.args = call_args(")");
                }
                c.bases.push_back(std::move(b));
            } while (accept(","));
        }
        expect("{");
        while (!accept("}")) member(c);
        return c;
    }

    void member(ContractDef& c) {
        if (peek_is("using")) {
            auto text = raw_until_semicolon();
            // drop the leading "using " and trailing ";"
            c.usings.push_back(trim(text.substr(5, text.size() - 6)));
        } else if (peek_is("event") || peek_is("error") || peek_is("struct") || peek_is("enum")) {
            c.opaque_members.push_back(raw_member());
        } else if (peek_is("modifier")) {
            c.modifiers.push_back(modifier_def());
        } else if (peek_is("function") || peek_is("constructor") || peek_is("fallback") || peek_is("receive")) {
            c.functions.push_back(function_def());
        } else {
            c.state_vars.push_back(state_var());
        }
    }

    static std::string trim(std::string s) {
        auto b = s.find_first_not_of(" \t\r\n");
        auto e = s.find_last_not_of(" \t\r\n");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    }

    StateVar state_var() {
        StateVar v;
        v.loc = loc();
        v.type = type_name();
        static const std::set<std::string> quals = {"public", "private", "internal", "constant", "immutable", "override"};
        while (peek().kind == Tok::Ident && quals.count(peek().text)) v.qualifiers.push_back(next().text);
        v.name = ident();
        if (accept("=")) v.init = expression();
        expect(";");
        return v;
    }

    std::vector<Param> param_list() {
        std::vector<Param> out;
        expect("(");
        if (accept(")")) return out;
        do {
            Param p;
            p.type = type_name();
            if (peek().kind == Tok::Ident && kLocations.count(peek().text)) p.location = next().text;
            if (peek_is("indexed")) next();
            if (peek().kind == Tok::Ident) p.name = next().text;
            out.push_back(std::move(p));
        } while (accept(","));
        expect(")");
        return out;
    }

    ModifierDef modifier_def() {
        ModifierDef m;
        m.loc = loc();
        expect("modifier");
        m.name = ident();
        if (peek_is("(")) m.params = param_list();
        while (true) {
            if (accept("virtual")) {
                m.is_virtual = true;
            } else if (accept("override")) {
                m.is_override = true;
                if (peek_is("(")) skip_balanced();
            } else {
                break;
            }
        }
        if (accept(";")) return m;
        m.body = block_body();
        return m;
    }

    FunctionDef function_def() {
        FunctionDef f;
        f.loc = loc();
        if (accept("constructor")) {
            f.kind = FunctionDef::Kind::Constructor;
            f.name = "constructor";
        } else if (accept("fallback")) {
            f.kind = FunctionDef::Kind::Fallback;
            f.name = "fallback";
        } else if (accept("receive")) {
            f.kind = FunctionDef::Kind::Receive;
            f.name = "receive";
        } else {
            expect("function");
            f.name = ident();
        }
        f.params = param_list();
        static const std::set<std::string> vis = {"external", "public", "internal", "private"};
        static const std::set<std::string> mut = {"pure", "view", "payable", "nonpayable"};
        while (true) {
            if (peek().kind != Tok::Ident) break;
            const auto& w = peek().text;
            if (vis.count(w)) {
                f.visibility = next().text;
            } else if (mut.count(w)) {
                f.mutability = next().text;
            } else if (w == "virtual") {
                next();
                f.is_virtual = true;
            } else if (w == "override") {
                next();
                f.is_override = true;
                if (peek_is("(")) skip_balanced();
            } else if (w == "returns") {
                next();
                f.returns = param_list();
            } else {
                ModifierInvocation m;
                m.name = ident();
                if (accept("(")) {
                    m.has_parens = true;
                    m.args = call_args(")");
                }
                f.modifiers.push_back(std::move(m));
            }
        }
        if (accept(";")) return f;
        f.body = block_body();
        return f;
    }

    // ---- types ----
    TypeName type_name() {
        TypeName t;
        if (accept("mapping")) {
            t.kind = TypeName::Kind::Mapping;
            expect("(");
            t.args.push_back(type_name());
            if (peek().kind == Tok::Ident) next();  // named key
            expect("=>");
            t.args.push_back(type_name());
            if (peek().kind == Tok::Ident) next();  // named value
            expect(")");
        } else if (peek().kind == Tok::Ident && is_elementary(peek().text)) {
            t.kind = TypeName::Kind::Elementary;
            t.name = next().text;
            if (t.name == "address" && accept("payable")) t.name = "address payable";
        } else if (peek().kind == Tok::Ident && !peek_is("function")) {
            t.kind = TypeName::Kind::UserDefined;
            t.name = ident();
            while (peek_is(".") && peek(1).kind == Tok::Ident) {
                next();
                t.name += "." + ident();
            }
        } else {
            fail("expected type name but found '" + peek().text + "'");
        }
        while (peek_is("[")) {
            if (peek_is("]", 1)) {
                next();
                next();
                t = array_of(std::move(t), "");
            } else if (peek(1).kind == Tok::Number && peek_is("]", 2)) {
                next();
                auto len = next().text;
                next();
                t = array_of(std::move(t), len);
            } else {
                break;
            }
        }
        return t;
    }

    static TypeName array_of(TypeName elem, std::string len) {
        TypeName a;
        a.kind = TypeName::Kind::Array;
        a.length = std::move(len);
        a.args.push_back(std::move(elem));
        return a;
    }

    // ---- statements ----
    std::vector<StmtP> block_body() {
        expect("{");
        std::vector<StmtP> out;
        while (!accept("}")) out.push_back(statement());
        return out;
    }

    StmtP make(Stmt s) { return std::make_shared<const Stmt>(std::move(s)); }

    StmtP statement() {
        Stmt s;
        s.loc = loc();
        if (peek_is("{")) {
            s.kind = Stmt::Kind::Block;
            s.stmts = block_body();
            return make(std::move(s));
        }
        if (peek_is("unchecked") && peek_is("{", 1)) {
            next();
            s.kind = Stmt::Kind::Unchecked;
            s.stmts = block_body();
            return make(std::move(s));
        }
        if (peek_is("assembly") || peek_is("try")) return opaque_compound();
        if (accept("if")) {
            s.kind = Stmt::Kind::If;
            expect("(");
            s.expr = expression();
            expect(")");
            s.body = statement();
            if (accept("else")) s.else_branch = statement();
            return make(std::move(s));
        }
        if (accept("for")) {
            s.kind = Stmt::Kind::For;
            expect("(");
            if (!accept(";")) s.init = simple_statement();
            if (!peek_is(";")) s.expr = expression();
            expect(";");
            if (!peek_is(")")) s.post = expression();
            expect(")");
            s.body = statement();
            return make(std::move(s));
        }
        if (accept("while")) {
            s.kind = Stmt::Kind::While;
            expect("(");
            s.expr = expression();
            expect(")");
            s.body = statement();
            return make(std::move(s));
        }
        if (accept("do")) {
            s.kind = Stmt::Kind::DoWhile;
            s.body = statement();
            expect("while");
            expect("(");
            s.expr = expression();
            expect(")");
            expect(";");
            return make(std::move(s));
        }
        // Simple statements degrade to opaque text when they do not parse.
        auto start = pos_;
        try {
            return simple_statement();
        } catch (const ParseError&) {
            pos_ = start;
            Stmt o;
            o.kind = Stmt::Kind::Opaque;
            o.loc = s.loc;
            o.text = raw_until_semicolon();
            return make(std::move(o));
        }
    }

    StmtP opaque_compound() {
        Stmt s;
        s.kind = Stmt::Kind::Opaque;
        s.loc = loc();
        auto start = pos_;
        if (accept("assembly")) {
            if (peek().kind == Tok::String) next();
            if (peek_is("(")) skip_balanced();
            skip_balanced();
        } else {
            expect("try");
            while (!peek_is("{")) {
                if (peek_is("(") || peek_is("["))
                    skip_balanced();
                else
                    next();
            }
            skip_balanced();
            while (accept("catch")) {
                while (!peek_is("{")) {
                    if (peek_is("("))
                        skip_balanced();
                    else
                        next();
                }
                skip_balanced();
            }
        }
        s.text = raw(start, pos_);
        return make(std::move(s));
    }

    // Statement that ends with ';' (also used for a for-loop initializer).
    StmtP simple_statement() {
        Stmt s;
        s.loc = loc();
        if (accept("_")) {
            expect(";");
            s.kind = Stmt::Kind::Placeholder;
            return make(std::move(s));
        }
        if (accept("return")) {
            s.kind = Stmt::Kind::Return;
            if (!peek_is(";")) s.expr = expression();
            expect(";");
            return make(std::move(s));
        }
        if (accept("emit")) {
            s.kind = Stmt::Kind::Emit;
            s.expr = expression();
            expect(";");
            return make(std::move(s));
        }
        if (peek_is("revert") && !peek_is("(", 1)) {
            // revert CustomError(...)
            next();
            s.kind = Stmt::Kind::Revert;
            s.expr = expression();
            expect(";");
            return make(std::move(s));
        }
        if (accept("break")) {
            expect(";");
            s.kind = Stmt::Kind::Break;
            return make(std::move(s));
        }
        if (accept("continue")) {
            expect(";");
            s.kind = Stmt::Kind::Continue;
            return make(std::move(s));
        }
        if (auto decl = try_var_decl()) return decl;
        s.kind = Stmt::Kind::Expr;
        s.expr = expression();
        expect(";");
        return make(std::move(s));
    }

    StmtP try_var_decl() {
        auto start = pos_;
        Stmt s;
        s.loc = loc();
        s.kind = Stmt::Kind::VarDecl;
        try {
            if (peek_is("(")) {
                next();
                s.tuple = true;
                while (!peek_is(")")) {
                    if (accept(",")) {
                        s.vars.push_back(std::nullopt);
                        if (peek_is(")")) s.vars.push_back(std::nullopt);
                        continue;
                    }
                    s.vars.push_back(one_decl());
                    if (!accept(",")) break;
                    if (peek_is(")")) s.vars.push_back(std::nullopt);
                }
                expect(")");
                bool any = false;
                for (const auto& v : s.vars) any = any || v.has_value();
                if (!any) throw ParseError(s.loc, "not a declaration");
                expect("=");
                s.expr = expression();
                expect(";");
                return make(std::move(s));
            }
            s.vars.push_back(one_decl());
            if (accept("=")) s.expr = expression();
            expect(";");
            return make(std::move(s));
        } catch (const ParseError&) {
            pos_ = start;
            return nullptr;
        }
    }

    VarDecl one_decl() {
        VarDecl d;
        d.type = type_name();
        if (peek().kind == Tok::Ident && kLocations.count(peek().text)) d.location = next().text;
        d.name = ident();
        if (!peek_is("=") && !peek_is(";") && !peek_is(",") && !peek_is(")")) fail("not a declaration");
        return d;
    }

    // ---- expressions ----
    AstExprP node(AstExpr e) { return std::make_shared<const AstExpr>(std::move(e)); }

    std::vector<AstExprP> call_args(std::string_view close) {
        std::vector<AstExprP> out;
        if (accept(close)) return out;
        do out.push_back(expression());
        while (accept(","));
        expect(close);
        return out;
    }

    AstExprP expression() { return assignment(); }

    AstExprP assignment() {
        auto l = loc();
        auto lhs = ternary();
        if (peek().kind == Tok::Punct && kAssignOps.count(peek().text)) {
            AstExpr e;
            e.kind = AstExpr::Kind::Binary;
            e.loc = l;
            e.text = next().text;
            e.args = {lhs, assignment()};
            return node(std::move(e));
        }
        return lhs;
    }

    AstExprP ternary() {
        auto l = loc();
        auto cond = binary(3);
        if (accept("?")) {
            AstExpr e;
            e.kind = AstExpr::Kind::Ternary;
            e.loc = l;
            auto a = assignment();
            expect(":");
            auto b = ternary();
            e.args = {cond, a, b};
            return node(std::move(e));
        }
        return cond;
    }

    AstExprP binary(int min_prec) {
        auto l = loc();
        auto lhs = unary();
        while (true) {
            if (peek().kind != Tok::Punct) break;
            int p = binary_precedence(peek().text);
            if (p < min_prec) break;
            AstExpr e;
            e.kind = AstExpr::Kind::Binary;
            e.loc = l;
            e.text = next().text;
            // ** is right-associative
            auto rhs = binary(e.text == "**" ? p : p + 1);
            e.args = {lhs, rhs};
            lhs = node(std::move(e));
        }
        return lhs;
    }

    AstExprP unary() {
        static const std::set<std::string> ops = {"!", "-", "~", "++", "--", "delete"};
        if ((peek().kind == Tok::Punct || peek_is("delete")) && ops.count(peek().text)) {
            AstExpr e;
            e.kind = AstExpr::Kind::Unary;
            e.loc = loc();
            e.text = next().text;
            e.args = {unary()};
            return node(std::move(e));
        }
        return postfix(primary());
    }

    AstExprP postfix(AstExprP base) {
        while (true) {
            auto l = loc();
            if (accept(".")) {
                AstExpr e;
                e.kind = AstExpr::Kind::Member;
                e.loc = l;
                e.text = peek().kind == Tok::Ident ? next().text : (fail("expected member name"), "");
                e.args = {base};
                base = node(std::move(e));
            } else if (accept("[")) {
                AstExpr e;
                e.kind = AstExpr::Kind::Index;
                e.loc = l;
                if (peek_is("]")) fail("empty index");
                auto idx = expression();
                if (peek_is(":")) fail("array slices are not supported");
                expect("]");
                e.args = {base, idx};
                base = node(std::move(e));
            } else if (peek_is("(")) {
                next();
                AstExpr e;
                e.kind = AstExpr::Kind::Call;
                e.loc = l;
                e.args = {base};
                if (peek_is("{")) {
                    next();
                    named_list(e);
                    expect(")");
                } else {
                    auto args = call_args(")");
                    e.args.insert(e.args.end(), args.begin(), args.end());
                }
                base = node(std::move(e));
            } else if (peek_is("{") && (base->kind == AstExpr::Kind::Member || base->kind == AstExpr::Kind::Ident) &&
                       peek(1).kind == Tok::Ident && peek_is(":", 2)) {
                next();
                AstExpr e;
                e.kind = AstExpr::Kind::CallOptions;
                e.loc = l;
                e.args = {base};
                named_list(e);
                base = node(std::move(e));
            } else if (peek_is("++") || peek_is("--")) {
                AstExpr e;
                e.kind = AstExpr::Kind::Postfix;
                e.loc = l;
                e.text = next().text;
                e.args = {base};
                base = node(std::move(e));
            } else {
                return base;
            }
        }
    }

    // Parses "name: expr, ..." up to and including the closing '}'.
    void named_list(AstExpr& e) {
        if (accept("}")) return;
        do {
            e.names.push_back(ident());
            expect(":");
            e.args.push_back(expression());
        } while (accept(","));
        expect("}");
    }

    AstExprP primary() {
        AstExpr e;
        e.loc = loc();
        const auto& t = peek();
        if (t.kind == Tok::Number) {
            e.kind = AstExpr::Kind::Number;
            e.text = next().text;
            if (peek().kind == Tok::Ident && kUnits.count(peek().text)) e.unit = next().text;
            return node(std::move(e));
        }
        if (t.kind == Tok::String) {
            e.kind = AstExpr::Kind::String;
            e.text = next().text;
            return node(std::move(e));
        }
        if (peek_is("true") || peek_is("false")) {
            e.kind = AstExpr::Kind::Bool;
            e.text = next().text;
            return node(std::move(e));
        }
        if (peek_is("new")) {
            next();
            e.kind = AstExpr::Kind::New;
            e.type = type_name();
            return node(std::move(e));
        }
        if (peek_is("payable") && peek_is("(", 1)) {
            e.kind = AstExpr::Kind::Type;
            next();
            TypeName pt;
            pt.name = "payable";
            e.type = pt;
            return node(std::move(e));
        }
        if (t.kind == Tok::Ident && is_elementary(t.text)) {
            e.kind = AstExpr::Kind::Type;
            TypeName et;
            et.name = next().text;
            if (et.name == "address" && accept("payable")) et.name = "address payable";
            // array types in expression position, e.g. new-less "uint[]"
            e.type = et;
            return node(std::move(e));
        }
        if (t.kind == Tok::Ident) {
            e.kind = AstExpr::Kind::Ident;
            e.text = next().text;
            return node(std::move(e));
        }
        if (accept("(")) {
            std::vector<AstExprP> items;
            bool comma = false;
            while (!peek_is(")")) {
                if (peek_is(",")) {
                    items.push_back(nullptr);
                } else {
                    items.push_back(expression());
                }
                if (!accept(",")) break;
                comma = true;
                if (peek_is(")")) items.push_back(nullptr);
            }
            expect(")");
            if (!comma && items.size() == 1) return items[0];
            e.kind = AstExpr::Kind::Tuple;
            e.args = std::move(items);
            return node(std::move(e));
        }
        if (accept("[")) {
            e.kind = AstExpr::Kind::ArrayLit;
            e.args = call_args("]");
            return node(std::move(e));
        }
        fail("unexpected token '" + (at_end() ? std::string("<eof>") : t.text) + "' in expression");
    }

    std::string_view src_;
    std::string path_;
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

}  // namespace

SourceUnit parse_source(std::string_view text, const std::string& path) { return Parser(text, path).unit(); }

}  // namespace evopoc::sol
