#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cbnlearn {

/// Position of a variable inside a diagram, dataset or network.
/// Ties are always broken by ascending index.
struct VarId {
    std::size_t index = 0;

    friend constexpr auto operator<=>(VarId, VarId) = default;
};

struct Variable {
    std::string name;
    bool doable = true;

    friend bool operator==(const Variable&, const Variable&) = default;
};

/// Directed edge cause -> effect.
struct Arrow {
    VarId from;
    VarId to;

    friend constexpr auto operator<=>(const Arrow&, const Arrow&) = default;
};

/// do(X = x, ...): every key is forced to its value.
using Intervention = std::map<VarId, bool>;

/// One Boolean value per declared variable.
class WorldState {
public:
    WorldState() = default;
    explicit WorldState(std::size_t size) : values_(size, 0) {}
    explicit WorldState(std::vector<std::uint8_t> values) : values_(std::move(values)) {}

    std::size_t size() const { return values_.size(); }
    bool operator[](VarId v) const { return values_.at(v.index) != 0; }
    void set(VarId v, bool value) { values_.at(v.index) = value ? 1 : 0; }
    const std::vector<std::uint8_t>& values() const { return values_; }

    friend bool operator==(const WorldState&, const WorldState&) = default;

private:
    std::vector<std::uint8_t> values_;
};

/// Variables plus a set of arrows between them. Endpoints and names are
/// validated on construction; acyclicity is checked separately by
/// check_acyclic so that candidate graphs can share the type.
class CausalDiagram {
public:
    CausalDiagram() = default;
    explicit CausalDiagram(std::vector<Variable> variables, std::set<Arrow> arrows = {});

    std::size_t size() const { return variables_.size(); }
    const std::vector<Variable>& variables() const { return variables_; }
    const Variable& variable(VarId v) const;
    const std::string& name(VarId v) const { return variable(v).name; }
    bool doable(VarId v) const { return variable(v).doable; }
    std::vector<VarId> ids() const;

    std::optional<VarId> find(std::string_view name) const;
    /// Like find, but throws StructuralError for unknown names.
    VarId id(std::string_view name) const;

    const std::set<Arrow>& arrows() const { return arrows_; }
    bool has_arrow(VarId from, VarId to) const { return arrows_.contains(Arrow{from, to}); }
    void add_arrow(VarId from, VarId to);
    void remove_arrow(VarId from, VarId to) { arrows_.erase(Arrow{from, to}); }

    /// Ascending by index.
    std::vector<VarId> parents(VarId v) const;
    std::vector<VarId> children(VarId v) const;

    std::string describe(Arrow a) const;

    friend bool operator==(const CausalDiagram&, const CausalDiagram&) = default;

private:
    std::vector<Variable> variables_;
    std::set<Arrow> arrows_;
};

struct AcyclicityReport {
    bool acyclic = true;
    /// Closed walk v0 -> v1 -> ... -> v0 when a cycle exists.
    std::vector<VarId> cycle;
};

AcyclicityReport check_acyclic(const CausalDiagram& diagram);

/// Kahn's algorithm with the smallest ready index first.
std::vector<VarId> topological_order(const CausalDiagram& diagram);

/// Row of a CPT selected by the parents' values. The first parent is the
/// most significant bit, so parent bits "01" select row 1.
std::size_t row_index(std::span<const VarId> parents, const WorldState& state);

/// Structural causal model over Boolean variables. Each mechanism stores
/// P(v = 1 | parents) for the 2^|parents| parent assignments, parents in
/// ascending index order.
class Scm {
public:
    Scm() = default;
    Scm(CausalDiagram diagram, std::vector<std::vector<double>> mechanisms);

    const CausalDiagram& diagram() const { return diagram_; }
    std::size_t size() const { return diagram_.size(); }
    const std::vector<double>& mechanism(VarId v) const { return mechanisms_.at(v.index); }
    const std::vector<std::vector<double>>& mechanisms() const { return mechanisms_; }

    /// P(v = 1) given the parent values recorded in state.
    double p_true(VarId v, const WorldState& state) const;

    friend bool operator==(const Scm&, const Scm&) = default;

private:
    CausalDiagram diagram_;
    std::vector<std::vector<double>> mechanisms_;
};

/// Graph surgery for do(): assigned variables lose their in-arrows and
/// become constants.
Scm mutilate(const Scm& scm, const Intervention& intervention);

/// "do(H=1;L=0)" style text used by dataset files and diagnostics.
std::string format_intervention(const std::vector<std::string>& names,
                                const Intervention& intervention);

std::vector<std::string> variable_names(const CausalDiagram& diagram);

} // namespace cbnlearn
