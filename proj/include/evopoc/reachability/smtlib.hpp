#pragma once

#include "evopoc/reachability/solver.hpp"

#include <string>
#include <vector>

namespace evopoc::reach {

/// Renders the conjunction as an SMT-LIB 2 QF_LIA script. Map reads are
/// lowered to fresh constants named after their rendering (quoted with
/// |...|); integer symbols get their >= 0 and upper-bound assertions.
std::string to_smtlib(const std::vector<ExprPtr>& predicates, const SymbolTable& symbols);

/// Parses a solver response of the form "sat (model (define-fun x () Int 3) ...)"
/// (the leading "model" keyword is optional). Returns Unknown with the
/// response text as reason on anything else.
SatResult parse_smtlib_response(const std::string& response);

/// Runs an external SMT solver process. `command` is a shell command that
/// receives the script path as its last argument (e.g. "z3 -smt2").
class ExternalSmtSolver final : public SolverBackend {
public:
    explicit ExternalSmtSolver(std::string command) : command_(std::move(command)) {}
    SatResult check(const std::vector<ExprPtr>& predicates, const SymbolTable& symbols) override;

private:
    std::string command_;
};

}  // namespace evopoc::reach
