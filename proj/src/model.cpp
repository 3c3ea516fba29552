#include "cbnlearn/model.hpp"

#include "cbnlearn/error.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <sstream>
#include <unordered_set>

namespace cbnlearn {

CausalDiagram::CausalDiagram(std::vector<Variable> variables, std::set<Arrow> arrows)
    : variables_(std::move(variables)) {
    std::unordered_set<std::string> seen;
    for (const auto& v : variables_) {
        if (v.name.empty()) throw StructuralError("variable with empty name");
        if (!seen.insert(v.name).second) throw StructuralError("duplicate variable '" + v.name + "'");
    }
    for (const auto& a : arrows) add_arrow(a.from, a.to);
}

const Variable& CausalDiagram::variable(VarId v) const {
    if (v.index >= variables_.size())
        throw StructuralError("variable index " + std::to_string(v.index) + " out of range");
    return variables_[v.index];
}

std::vector<VarId> CausalDiagram::ids() const {
    std::vector<VarId> out;
    out.reserve(variables_.size());
    for (std::size_t i = 0; i < variables_.size(); ++i) out.push_back(VarId{i});
    return out;
}

std::optional<VarId> CausalDiagram::find(std::string_view name) const {
    for (std::size_t i = 0; i < variables_.size(); ++i)
        if (variables_[i].name == name) return VarId{i};
    return std::nullopt;
}

VarId CausalDiagram::id(std::string_view name) const {
    if (auto v = find(name)) return *v;
    throw StructuralError("unknown variable '" + std::string(name) + "'");
}

void CausalDiagram::add_arrow(VarId from, VarId to) {
    if (from.index >= variables_.size() || to.index >= variables_.size())
        throw StructuralError("arrow endpoint references an undeclared variable");
    if (from == to) throw StructuralError("self-loop on '" + variables_[from.index].name + "'");
    arrows_.insert(Arrow{from, to});
}

std::vector<VarId> CausalDiagram::parents(VarId v) const {
    std::vector<VarId> out;
    for (const auto& a : arrows_)
        if (a.to == v) out.push_back(a.from);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<VarId> CausalDiagram::children(VarId v) const {
    std::vector<VarId> out;
    for (const auto& a : arrows_)
        if (a.from == v) out.push_back(a.to);
    return out;
}

std::string CausalDiagram::describe(Arrow a) const {
    return name(a.from) + "->" + name(a.to);
}

AcyclicityReport check_acyclic(const CausalDiagram& diagram) {
    const std::size_t n = diagram.size();
    std::vector<std::vector<VarId>> out(n);
    for (const auto& a : diagram.arrows()) {
        if (a.from.index >= n || a.to.index >= n)
            throw StructuralError("arrow endpoint references an undeclared variable");
        out[a.from.index].push_back(a.to);
    }

    enum class Mark { White, Grey, Black };
    std::vector<Mark> mark(n, Mark::White);
    std::vector<VarId> stack;
    AcyclicityReport report;

    std::function<bool(VarId)> visit = [&](VarId v) {
        mark[v.index] = Mark::Grey;
        stack.push_back(v);
        for (VarId w : out[v.index]) {
            if (mark[w.index] == Mark::Grey) {
                auto it = std::find(stack.begin(), stack.end(), w);
                report.cycle.assign(it, stack.end());
                report.cycle.push_back(w);
                return true;
            }
            if (mark[w.index] == Mark::White && visit(w)) return true;
        }
        stack.pop_back();
        mark[v.index] = Mark::Black;
        return false;
    };

    for (std::size_t i = 0; i < n; ++i) {
        if (mark[i] == Mark::White && visit(VarId{i})) {
            report.acyclic = false;
            return report;
        }
    }
    return report;
}

std::vector<VarId> topological_order(const CausalDiagram& diagram) {
    const std::size_t n = diagram.size();
    std::vector<std::size_t> indegree(n, 0);
    std::vector<std::vector<VarId>> out(n);
    for (const auto& a : diagram.arrows()) {
        ++indegree[a.to.index];
        out[a.from.index].push_back(a.to);
    }
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t i = 0; i < n; ++i)
        if (indegree[i] == 0) ready.push(i);

    std::vector<VarId> order;
    order.reserve(n);
    while (!ready.empty()) {
        const std::size_t v = ready.top();
        ready.pop();
        order.push_back(VarId{v});
        for (VarId w : out[v])
            if (--indegree[w.index] == 0) ready.push(w.index);
    }
    if (order.size() != n) throw StructuralError("diagram contains a directed cycle");
    return order;
}

std::size_t row_index(std::span<const VarId> parents, const WorldState& state) {
    std::size_t row = 0;
    for (VarId p : parents) row = (row << 1) | (state[p] ? 1u : 0u);
    return row;
}

Scm::Scm(CausalDiagram diagram, std::vector<std::vector<double>> mechanisms)
    : diagram_(std::move(diagram)), mechanisms_(std::move(mechanisms)) {
    if (mechanisms_.size() != diagram_.size())
        throw StructuralError("one mechanism per variable required");
    for (VarId v : diagram_.ids()) {
        const auto expected = std::size_t{1} << diagram_.parents(v).size();
        const auto& rows = mechanisms_[v.index];
        if (rows.size() != expected)
            throw StructuralError("mechanism of '" + diagram_.name(v) + "' has " +
                                  std::to_string(rows.size()) + " rows, expected " +
                                  std::to_string(expected));
        for (double p : rows)
            if (!(p >= 0.0 && p <= 1.0))
                throw StructuralError("probability outside [0,1] in mechanism of '" +
                                      diagram_.name(v) + "'");
    }
    if (!check_acyclic(diagram_).acyclic) throw StructuralError("structural causal model must be acyclic");
}

double Scm::p_true(VarId v, const WorldState& state) const {
    const auto parents = diagram_.parents(v);
    return mechanisms_.at(v.index)[row_index(parents, state)];
}

Scm mutilate(const Scm& scm, const Intervention& intervention) {
    if (intervention.empty()) return scm;
    CausalDiagram diagram = scm.diagram();
    auto mechanisms = scm.mechanisms();
    for (const auto& [v, value] : intervention) {
        if (v.index >= diagram.size())
            throw StructuralError("intervention on unknown variable index " + std::to_string(v.index));
        for (VarId p : diagram.parents(v)) diagram.remove_arrow(p, v);
        mechanisms[v.index] = {value ? 1.0 : 0.0};
    }
    return Scm(std::move(diagram), std::move(mechanisms));
}

std::string format_intervention(const std::vector<std::string>& names,
                                const Intervention& intervention) {
    std::ostringstream os;
    os << "do(";
    bool first = true;
    for (const auto& [v, value] : intervention) {
        if (!first) os << ';';
        first = false;
        os << names.at(v.index) << '=' << (value ? 1 : 0);
    }
    os << ')';
    return os.str();
}

std::vector<std::string> variable_names(const CausalDiagram& diagram) {
    std::vector<std::string> out;
    for (const auto& v : diagram.variables()) out.push_back(v.name);
    return out;
}

} // namespace cbnlearn
