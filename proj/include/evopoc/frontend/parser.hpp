#pragma once

#include "evopoc/frontend/ast.hpp"

#include <string>
#include <string_view>

namespace evopoc::sol {

/// Parses one source file of the supported Solidity subset. Constructs
/// outside the subset (inline assembly, try/catch, statements that do not
/// parse) are kept as opaque statements carrying their source text.
SourceUnit parse_source(std::string_view text, const std::string& path);

/// Source text for a unit. Re-parsing the output yields a structurally equal
/// unit.
std::string unparse(const SourceUnit& unit);
std::string unparse(const AstExprP& e);
std::string unparse(const TypeName& t);

}  // namespace evopoc::sol
