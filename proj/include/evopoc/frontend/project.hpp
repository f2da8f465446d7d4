#pragma once

#include "evopoc/frontend/ast.hpp"

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace evopoc::sol {

class FrontendError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NoContracts : public FrontendError {
public:
    NoContracts() : FrontendError("no contracts in the source set") {}
};

struct SourceFile {
    std::string path;  // relative to the project root, '/'-separated
    std::string text;
};

/// Parsed contracts of a project. Immutable once built.
class ProjectModel {
public:
    /// Throws ParseError when a contract name is already taken.
    void add(ContractDef contract, const std::string& path);

    const std::vector<ContractDef>& contracts() const { return contracts_; }
    const std::map<std::string, std::string>& origins() const { return origin_; }
    const ContractDef* find(const std::string& name) const;
    std::string origin(const std::string& contract) const;
    std::vector<std::string> directives(const std::string& path) const;
    bool empty() const { return contracts_.empty(); }

    /// The contract followed by its parsed ancestors, depth-first in
    /// declaration order, each listed once.
    std::vector<const ContractDef*> lineage(const std::string& name) const;

    struct FunctionRef {
        const ContractDef* owner = nullptr;
        const FunctionDef* function = nullptr;
    };
    /// First definition with a body along the lineage, else the first
    /// declaration.
    FunctionRef resolve_function(const std::string& contract, const std::string& name) const;
    const ModifierDef* resolve_modifier(const std::string& contract, const std::string& name) const;
    const StateVar* resolve_state_var(const std::string& contract, const std::string& name) const;

    void set_directives(const std::string& path, std::vector<std::string> d) { directives_[path] = std::move(d); }

private:
    std::vector<ContractDef> contracts_;
    std::map<std::string, std::size_t> index_;
    std::map<std::string, std::string> origin_;
    std::map<std::string, std::vector<std::string>> directives_;
};

/// Parses every source. Throws ParseError on syntax errors and NoContracts
/// when the set is empty or defines no contract.
ProjectModel parse_project(const std::vector<SourceFile>& sources);

/// All `.sol` files below `root`, sorted by relative path.
std::vector<SourceFile> load_sources(const std::filesystem::path& root);

struct FilterOptions {
    std::vector<std::string> trusted = {"lib/*", "node_modules/*"};
};

bool is_test_path(const std::string& path);

/// Drops test code and trusted libraries, then keeps only contracts
/// reachable from non-library contracts with externally callable functions.
/// Edges: inheritance, using-for, type and identifier references.
ProjectModel filter_candidates(const ProjectModel& model, const FilterOptions& options = {});

/// Contract names referenced from `contract` (bases, types, identifiers),
/// restricted to contracts in the model.
std::vector<std::string> referenced_contracts(const ProjectModel& model, const ContractDef& contract);

}  // namespace evopoc::sol
