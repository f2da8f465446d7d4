#pragma once

#include "evopoc/reachability/expr.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace evopoc::reach {

enum class Control { Attacker, ProtocolState, ExternalDefault };
const char* to_string(Control c);

struct SymbolInfo {
    Sort sort = Sort::Int;
    Control control = Control::Attacker;
    // Inclusive upper bound on an integer symbol. Integer symbols are
    // always >= 0; without an upper bound they range over all naturals.
    std::optional<BigInt> upper;
};

class SymbolTable {
public:
    void declare(const std::string& name, SymbolInfo info);
    // Declares unless already present; an existing entry with another sort
    // is an IllSorted error.
    void ensure(const std::string& name, Sort sort, Control control);
    const SymbolInfo* find(const std::string& name) const;
    bool contains(const std::string& name) const { return find(name) != nullptr; }
    const std::map<std::string, SymbolInfo>& entries() const { return entries_; }
    void merge(const SymbolTable& other);

private:
    std::map<std::string, SymbolInfo> entries_;
};

struct SatResult {
    enum class Kind { Sat, Unsat, Unknown };
    Kind kind = Kind::Unknown;
    Model model;          // Sat only
    std::string reason;   // Unknown only

    static SatResult sat(Model m) { return {Kind::Sat, std::move(m), {}}; }
    static SatResult unsat() { return {Kind::Unsat, {}, {}}; }
    static SatResult unknown(std::string why) { return {Kind::Unknown, {}, std::move(why)}; }

    bool is_sat() const { return kind == Kind::Sat; }
    bool is_unsat() const { return kind == Kind::Unsat; }
    bool is_unknown() const { return kind == Kind::Unknown; }
};

const char* to_string(SatResult::Kind k);

struct SolverOptions {
    // Search nodes (boolean case splits plus branch-and-bound nodes) before
    // giving up with Unknown.
    std::size_t node_budget = 200000;
    // Fourier-Motzkin is abandoned (Unknown) past this many constraints.
    std::size_t max_constraints = 20000;
    // Nonlinear terms: enumerate when at most this many symbols occur in
    // them and the product of their domain sizes stays within the limit.
    std::size_t nonlinear_max_symbols = 2;
    BigInt nonlinear_max_domain = BigInt(1) << 16;
};

/// Decides the conjunction of `predicates`. Complete for quantifier-free
/// linear integer arithmetic with boolean structure and map reads; returns
/// Unknown (never Unsat) outside that fragment or when the budget runs out.
/// Sat models are checked against every predicate before being returned.
SatResult check_sat(const std::vector<ExprPtr>& predicates, const SymbolTable& symbols,
                    const SolverOptions& options = {});

/// Pluggable decision procedure behind the same contract as check_sat.
class SolverBackend {
public:
    virtual ~SolverBackend() = default;
    virtual SatResult check(const std::vector<ExprPtr>& predicates, const SymbolTable& symbols) = 0;
};

class BuiltinSolver final : public SolverBackend {
public:
    explicit BuiltinSolver(SolverOptions options = {}) : options_(std::move(options)) {}
    SatResult check(const std::vector<ExprPtr>& predicates, const SymbolTable& symbols) override {
        return check_sat(predicates, symbols, options_);
    }

private:
    SolverOptions options_;
};

/// Deletion-based minimal unsatisfiable subset of `predicates`, which must
/// be Unsat as a whole. Predicates whose removal yields Unknown are kept.
std::vector<ExprPtr> minimal_unsat_subset(const std::vector<ExprPtr>& predicates, const SymbolTable& symbols,
                                          SolverBackend& solver);

}  // namespace evopoc::reach
