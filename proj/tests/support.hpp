#pragma once

#include "cbnlearn/cbn.hpp"
#include "cbnlearn/discovery.hpp"
#include "cbnlearn/inference.hpp"
#include "cbnlearn/random.hpp"
#include "cbnlearn/simulator.hpp"

#include <string>
#include <utility>
#include <vector>

namespace testing {

using namespace cbnlearn;

inline std::vector<Variable> make_vars(std::initializer_list<const char*> names) {
    std::vector<Variable> out;
    for (const char* n : names) out.push_back({n, true});
    return out;
}

inline std::vector<Variable> numbered_vars(std::size_t n) {
    std::vector<Variable> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back({"X" + std::to_string(i), true});
    return out;
}

inline Arrow arrow(std::size_t a, std::size_t b) { return Arrow{VarId{a}, VarId{b}}; }

/// Arrow by names in a diagram.
inline Arrow arrow(const CausalDiagram& d, const char* a, const char* b) { return Arrow{d.id(a), d.id(b)}; }

inline std::set<Arrow> named_arrows(const CausalDiagram& d,
                                    std::initializer_list<std::pair<const char*, const char*>> edges) {
    std::set<Arrow> out;
    for (const auto& [a, b] : edges) out.insert(arrow(d, a, b));
    return out;
}

inline std::set<Arrow> living_room_truth(const CausalDiagram& d) {
    return named_arrows(d, {{"P", "Pr"}, {"Pr", "L"}, {"L", "Pow"}, {"H", "Pow"}, {"O", "T"}, {"H", "T"}, {"W", "T"}});
}

/// Random CPT rows in [0.05, 0.95] for the given structure.
inline Scm random_scm(const CausalDiagram& d, Rng& rng) {
    std::vector<std::vector<double>> mech;
    for (VarId v : d.ids()) {
        std::vector<double> rows(std::size_t{1} << d.parents(v).size());
        for (double& r : rows) r = 0.05 + 0.9 * rng.uniform();
        mech.push_back(std::move(rows));
    }
    return Scm(d, std::move(mech));
}

/// Random polytree: each node after the first attaches to one earlier node,
/// the direction of the attaching edge chosen at random.
inline CausalDiagram random_polytree(std::size_t n, Rng& rng) {
    CausalDiagram d(numbered_vars(n));
    for (std::size_t i = 1; i < n; ++i) {
        const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
        if (rng.bernoulli(0.5))
            d.add_arrow(VarId{j}, VarId{i});
        else
            d.add_arrow(VarId{i}, VarId{j});
    }
    return d;
}

} // namespace testing
