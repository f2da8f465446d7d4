#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace evopoc::sol {

struct SourceLoc {
    std::string file;
    int line = 0;
    int column = 0;
};
std::string to_string(const SourceLoc& loc);

class ParseError : public std::runtime_error {
public:
    ParseError(SourceLoc loc, const std::string& what);
    const SourceLoc& loc() const { return loc_; }

private:
    SourceLoc loc_;
};

struct TypeName {
    enum class Kind { Elementary, Array, Mapping, UserDefined };
    Kind kind = Kind::Elementary;
    std::string name;            // elementary or user-defined name
    std::vector<TypeName> args;  // Array: element; Mapping: key, value
    std::string length;          // fixed array length text, empty for dynamic

    bool is_array() const { return kind == Kind::Array; }
    bool is_mapping() const { return kind == Kind::Mapping; }
};

struct AstExpr;
using AstExprP = std::shared_ptr<const AstExpr>;

struct AstExpr {
    enum class Kind {
        Number,   // text holds the literal, unit holds an optional denomination
        Bool,
        String,
        Ident,
        Member,   // args[0].text
        Index,    // args[0][args[1]]
        Call,     // args[0](args[1..]); names holds named-argument keys when present
        Unary,    // text = operator
        Postfix,  // args[0] text
        Binary,   // args[0] text args[1]; includes assignments
        Ternary,
        New,      // new type
        Tuple,    // (a, b); empty slots are null
        ArrayLit, // [a, b]
        Type,     // elementary type in expression position, e.g. address(x)
        CallOptions,  // args[0]{names[i]: args[i+1]}
    };
    Kind kind = Kind::Ident;
    std::string text;
    std::string unit;
    std::vector<AstExprP> args;
    std::vector<std::string> names;
    std::optional<TypeName> type;  // New and Type
    SourceLoc loc;
};

struct VarDecl {
    TypeName type;
    std::string location;  // memory, storage, calldata or empty
    std::string name;
};

struct Stmt;
using StmtP = std::shared_ptr<const Stmt>;

struct Stmt {
    enum class Kind {
        Block,
        Unchecked,
        VarDecl,
        Expr,
        If,
        For,
        While,
        DoWhile,
        Return,
        Emit,
        Revert,
        Placeholder,
        Break,
        Continue,
        Opaque,
    };
    Kind kind = Kind::Expr;
    SourceLoc loc;
    std::vector<StmtP> stmts;   // Block / Unchecked
    std::vector<std::optional<VarDecl>> vars;  // VarDecl; tuple slots may be empty
    bool tuple = false;         // VarDecl written as (a, b) = ...
    AstExprP expr;              // Expr, Return value, Emit/Revert call, If/While condition, VarDecl init
    StmtP init;                 // For
    AstExprP post;              // For
    StmtP body;                 // For / While / DoWhile / If then-branch
    StmtP else_branch;          // If
    std::string text;           // Opaque source text
};

struct Param {
    TypeName type;
    std::string location;
    std::string name;
};

struct ModifierInvocation {
    std::string name;
    std::vector<AstExprP> args;
    bool has_parens = false;
};

struct FunctionDef {
    enum class Kind { Function, Constructor, Fallback, Receive };
    Kind kind = Kind::Function;
    std::string name;
    std::vector<Param> params;
    std::vector<Param> returns;
    std::string visibility;  // external, public, internal, private or empty
    std::string mutability;  // pure, view, payable or empty
    bool is_virtual = false;
    bool is_override = false;
    std::vector<ModifierInvocation> modifiers;
    std::optional<std::vector<StmtP>> body;
    SourceLoc loc;

    bool externally_callable() const;
    /// Visibility with Solidity's default applied (public for functions).
    std::string effective_visibility() const;
};

struct ModifierDef {
    std::string name;
    std::vector<Param> params;
    bool is_virtual = false;
    bool is_override = false;
    std::optional<std::vector<StmtP>> body;
    SourceLoc loc;
};

struct StateVar {
    TypeName type;
    std::string name;
    std::vector<std::string> qualifiers;  // visibility, constant, immutable, override
    AstExprP init;
    SourceLoc loc;
};

struct BaseSpec {
    std::string name;
    std::vector<AstExprP> args;
    bool has_parens = false;
};

struct ContractDef {
    enum class Kind { Contract, AbstractContract, Library, Interface };
    Kind kind = Kind::Contract;
    std::string name;
    std::vector<BaseSpec> bases;
    std::vector<std::string> usings;        // "L for T" text
    std::vector<std::string> opaque_members;  // events, errors, structs, enums
    std::vector<StateVar> state_vars;
    std::vector<ModifierDef> modifiers;
    std::vector<FunctionDef> functions;
    SourceLoc loc;

    const FunctionDef* find_function(const std::string& name) const;
    const ModifierDef* find_modifier(const std::string& name) const;
    const StateVar* find_state_var(const std::string& name) const;
};

struct SourceUnit {
    std::string path;
    std::vector<std::string> directives;  // pragma and import lines, verbatim
    std::vector<ContractDef> contracts;
};

bool structurally_equal(const AstExprP& a, const AstExprP& b);
bool structurally_equal(const StmtP& a, const StmtP& b);
bool structurally_equal(const TypeName& a, const TypeName& b);
bool structurally_equal(const ContractDef& a, const ContractDef& b);

}  // namespace evopoc::sol
