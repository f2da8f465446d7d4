#include "evopoc/frontend/ast.hpp"

#include <fmt/format.h>

namespace evopoc::sol {

std::string to_string(const SourceLoc& loc) { return fmt::format("{}:{}:{}", loc.file, loc.line, loc.column); }

ParseError::ParseError(SourceLoc loc, const std::string& what)
    : std::runtime_error(to_string(loc) + ": " + what), loc_(std::move(loc)) {}

bool FunctionDef::externally_callable() const {
    if (kind == Kind::Constructor) return false;
    auto v = effective_visibility();
    return v == "external" || v == "public";
}

std::string FunctionDef::effective_visibility() const { return visibility.empty() ? "public" : visibility; }

const FunctionDef* ContractDef::find_function(const std::string& n) const {
    for (const auto& f : functions)
        if (f.name == n && f.body) return &f;
    for (const auto& f : functions)
        if (f.name == n) return &f;
    return nullptr;
}

const ModifierDef* ContractDef::find_modifier(const std::string& n) const {
    for (const auto& m : modifiers)
        if (m.name == n) return &m;
    return nullptr;
}

const StateVar* ContractDef::find_state_var(const std::string& n) const {
    for (const auto& v : state_vars)
        if (v.name == n) return &v;
    return nullptr;
}

namespace {

template <typename T, typename Eq>
bool all_equal(const std::vector<T>& a, const std::vector<T>& b, Eq eq) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!eq(a[i], b[i])) return false;
    return true;
}

bool params_equal(const std::vector<Param>& a, const std::vector<Param>& b) {
    return all_equal(a, b, [](const Param& x, const Param& y) {
        return x.name == y.name && x.location == y.location && structurally_equal(x.type, y.type);
    });
}

bool exprs_equal(const std::vector<AstExprP>& a, const std::vector<AstExprP>& b) {
    return all_equal(a, b, [](const AstExprP& x, const AstExprP& y) { return structurally_equal(x, y); });
}

bool body_equal(const std::optional<std::vector<StmtP>>& a, const std::optional<std::vector<StmtP>>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || all_equal(*a, *b, [](const StmtP& x, const StmtP& y) { return structurally_equal(x, y); });
}

}  // namespace

bool structurally_equal(const TypeName& a, const TypeName& b) {
    return a.kind == b.kind && a.name == b.name && a.length == b.length &&
           all_equal(a.args, b.args, [](const TypeName& x, const TypeName& y) { return structurally_equal(x, y); });
}

bool structurally_equal(const AstExprP& a, const AstExprP& b) {
    if (!a || !b) return !a && !b;
    if (a->kind != b->kind || a->text != b->text || a->unit != b->unit || a->names != b->names) return false;
    if (a->type.has_value() != b->type.has_value()) return false;
    if (a->type && !structurally_equal(*a->type, *b->type)) return false;
    return exprs_equal(a->args, b->args);
}

bool structurally_equal(const StmtP& a, const StmtP& b) {
    if (!a || !b) return !a && !b;
    if (a->kind != b->kind || a->text != b->text || a->tuple != b->tuple) return false;
    if (!all_equal(a->stmts, b->stmts, [](const StmtP& x, const StmtP& y) { return structurally_equal(x, y); }))
        return false;
    if (!all_equal(a->vars, b->vars, [](const std::optional<VarDecl>& x, const std::optional<VarDecl>& y) {
            if (x.has_value() != y.has_value()) return false;
            return !x || (x->name == y->name && x->location == y->location && structurally_equal(x->type, y->type));
        }))
        return false;
    return structurally_equal(a->expr, b->expr) && structurally_equal(a->init, b->init) &&
           structurally_equal(a->post, b->post) && structurally_equal(a->body, b->body) &&
           structurally_equal(a->else_branch, b->else_branch);
}

bool structurally_equal(const ContractDef& a, const ContractDef& b) {
    if (a.kind != b.kind || a.name != b.name || a.usings != b.usings || a.opaque_members != b.opaque_members)
        return false;
    if (!all_equal(a.bases, b.bases, [](const BaseSpec& x, const BaseSpec& y) {
            return x.name == y.name && x.has_parens == y.has_parens && exprs_equal(x.args, y.args);
        }))
        return false;
    if (!all_equal(a.state_vars, b.state_vars, [](const StateVar& x, const StateVar& y) {
            return x.name == y.name && x.qualifiers == y.qualifiers && structurally_equal(x.type, y.type) &&
                   structurally_equal(x.init, y.init);
        }))
        return false;
    if (!all_equal(a.modifiers, b.modifiers, [](const ModifierDef& x, const ModifierDef& y) {
            return x.name == y.name && x.is_virtual == y.is_virtual && x.is_override == y.is_override &&
                   params_equal(x.params, y.params) && body_equal(x.body, y.body);
        }))
        return false;
    return all_equal(a.functions, b.functions, [](const FunctionDef& x, const FunctionDef& y) {
        return x.kind == y.kind && x.name == y.name && x.visibility == y.visibility && x.mutability == y.mutability &&
               x.is_virtual == y.is_virtual && x.is_override == y.is_override && params_equal(x.params, y.params) &&
               params_equal(x.returns, y.returns) &&
               all_equal(x.modifiers, y.modifiers,
                         [](const ModifierInvocation& m, const ModifierInvocation& n) {
                             return m.name == n.name && m.has_parens == n.has_parens && exprs_equal(m.args, n.args);
                         }) &&
               body_equal(x.body, y.body);
    });
}

}  // namespace evopoc::sol
