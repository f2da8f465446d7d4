#include "evopoc/frontend/project.hpp"

#include "evopoc/frontend/parser.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <deque>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace evopoc::sol {

void ProjectModel::add(ContractDef contract, const std::string& path) {
    if (index_.count(contract.name))
        throw ParseError(contract.loc, "contract '" + contract.name + "' already defined in " + origin_[contract.name]);
    index_[contract.name] = contracts_.size();
    origin_[contract.name] = path;
    contracts_.push_back(std::move(contract));
}

const ContractDef* ProjectModel::find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &contracts_[it->second];
}

std::string ProjectModel::origin(const std::string& contract) const {
    auto it = origin_.find(contract);
    return it == origin_.end() ? std::string{} : it->second;
}

std::vector<std::string> ProjectModel::directives(const std::string& path) const {
    auto it = directives_.find(path);
    return it == directives_.end() ? std::vector<std::string>{} : it->second;
}

std::vector<const ContractDef*> ProjectModel::lineage(const std::string& name) const {
    std::vector<const ContractDef*> out;
    std::set<std::string> seen;
    auto visit = [&](auto&& self, const std::string& n) -> void {
        const ContractDef* c = find(n);
        if (!c || !seen.insert(n).second) return;
        out.push_back(c);
        for (const auto& b : c->bases) self(self, b.name);
    };
    visit(visit, name);
    return out;
}

ProjectModel::FunctionRef ProjectModel::resolve_function(const std::string& contract, const std::string& name) const {
    FunctionRef declared;
    for (const ContractDef* c : lineage(contract)) {
        for (const auto& f : c->functions) {
            if (f.name != name || f.kind != FunctionDef::Kind::Function) continue;
            if (f.body) return {c, &f};
            if (!declared.function) declared = {c, &f};
        }
    }
    return declared;
}

const ModifierDef* ProjectModel::resolve_modifier(const std::string& contract, const std::string& name) const {
    for (const ContractDef* c : lineage(contract))
        if (const ModifierDef* m = c->find_modifier(name)) return m;
    return nullptr;
}

const StateVar* ProjectModel::resolve_state_var(const std::string& contract, const std::string& name) const {
    for (const ContractDef* c : lineage(contract))
        if (const StateVar* v = c->find_state_var(name)) return v;
    return nullptr;
}

ProjectModel parse_project(const std::vector<SourceFile>& sources) {
    ProjectModel model;
    for (const auto& src : sources) {
        SourceUnit unit = parse_source(src.text, src.path);
        model.set_directives(src.path, unit.directives);
        for (auto& c : unit.contracts) model.add(std::move(c), src.path);
    }
    if (model.empty()) throw NoContracts();
    return model;
}

std::vector<SourceFile> load_sources(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root)) throw FrontendError("not a directory: " + root.string());
    std::vector<SourceFile> out;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".sol") continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream text;
        text << in.rdbuf();
        out.push_back({fs::relative(entry.path(), root).generic_string(), text.str()});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    return out;
}

bool is_test_path(const std::string& path) {
    if (path.size() >= 6 && path.compare(path.size() - 6, 6, ".t.sol") == 0) return true;
    return path.rfind("test/", 0) == 0 || path.find("/test/") != std::string::npos;
}

namespace {

class NameCollector {
public:
    std::set<std::string> names;

    void type(const TypeName& t) {
        if (t.kind == TypeName::Kind::UserDefined) names.insert(t.name.substr(0, t.name.find('.')));
        for (const auto& a : t.args) type(a);
    }
    void expr(const AstExprP& e) {
        if (!e) return;
        if (e->kind == AstExpr::Kind::Ident) names.insert(e->text);
        if (e->type) type(*e->type);
        for (const auto& a : e->args) expr(a);
    }
    void stmt(const StmtP& s) {
        if (!s) return;
        for (const auto& c : s->stmts) stmt(c);
        for (const auto& v : s->vars)
            if (v) type(v->type);
        expr(s->expr);
        stmt(s->init);
        expr(s->post);
        stmt(s->body);
        stmt(s->else_branch);
        if (!s->text.empty()) text(s->text);
    }
    void text(const std::string& raw) {
        static const std::regex word(R"([A-Za-z_$][A-Za-z0-9_$]*)");
        for (auto it = std::sregex_iterator(raw.begin(), raw.end(), word); it != std::sregex_iterator(); ++it)
            names.insert(it->str());
    }
    void params(const std::vector<Param>& ps) {
        for (const auto& p : ps) type(p.type);
    }
    void body(const std::optional<std::vector<StmtP>>& b) {
        if (b)
            for (const auto& s : *b) stmt(s);
    }
};

}  // namespace

std::vector<std::string> referenced_contracts(const ProjectModel& model, const ContractDef& c) {
    NameCollector col;
    for (const auto& b : c.bases) {
        col.names.insert(b.name);
        for (const auto& a : b.args) col.expr(a);
    }
    for (const auto& u : c.usings) col.text(u);
    for (const auto& m : c.opaque_members) col.text(m);
    for (const auto& v : c.state_vars) {
        col.type(v.type);
        col.expr(v.init);
    }
    for (const auto& m : c.modifiers) {
        col.params(m.params);
        col.body(m.body);
    }
    for (const auto& f : c.functions) {
        col.params(f.params);
        col.params(f.returns);
        for (const auto& m : f.modifiers) {
            col.names.insert(m.name);
            for (const auto& a : m.args) col.expr(a);
        }
        col.body(f.body);
    }
    std::vector<std::string> out;
    for (const auto& n : col.names)
        if (n != c.name && model.find(n)) out.push_back(n);
    return out;
}

ProjectModel filter_candidates(const ProjectModel& model, const FilterOptions& options) {
    auto trusted = [&](const std::string& path) {
        return std::any_of(options.trusted.begin(), options.trusted.end(),
                           [&](const std::string& g) { return fnmatch(g.c_str(), path.c_str(), 0) == 0; });
    };

    ProjectModel kept;
    for (const auto& c : model.contracts()) {
        const std::string path = model.origin(c.name);
        if (is_test_path(path) || trusted(path)) continue;
        kept.add(c, path);
        kept.set_directives(path, model.directives(path));
    }

    std::deque<std::string> work;
    std::set<std::string> live;
    for (const auto& c : kept.contracts()) {
        if (c.kind == ContractDef::Kind::Library || c.kind == ContractDef::Kind::Interface) continue;
        bool entry = std::any_of(c.functions.begin(), c.functions.end(),
                                 [](const FunctionDef& f) { return f.externally_callable() && f.body; });
        if (entry && live.insert(c.name).second) work.push_back(c.name);
    }
    while (!work.empty()) {
        const ContractDef* c = kept.find(work.front());
        work.pop_front();
        for (const auto& n : referenced_contracts(kept, *c))
            if (live.insert(n).second) work.push_back(n);
    }

    ProjectModel out;
    for (const auto& c : kept.contracts()) {
        if (!live.count(c.name)) continue;
        const std::string path = kept.origin(c.name);
        out.add(c, path);
        out.set_directives(path, kept.directives(path));
    }
    return out;
}

}  // namespace evopoc::sol
