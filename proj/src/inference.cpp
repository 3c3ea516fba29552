#include "cbnlearn/inference.hpp"

#include "cbnlearn/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace cbnlearn {

namespace {

void require_valid(const CausalBayesianNetwork& cbn, const Evidence& evidence) {
    const auto report = validate_cbn(cbn);
    if (!report.ok()) throw StructuralError("invalid network: " + report.violations.front());
    for (const auto& [v, value] : evidence)
        if (v.index >= cbn.size()) throw StructuralError("evidence on unknown variable");
}

double cpt_value(const Cpt& cpt, std::size_t row, bool value) {
    const double p1 = cpt.rows[row];
    return value ? p1 : 1.0 - p1;
}

} // namespace

BeliefMap enumerate_posterior(const CausalBayesianNetwork& cbn, const Evidence& evidence) {
    require_valid(cbn, evidence);
    const std::size_t n = cbn.size();
    if (n > kMaxEnumerationVariables)
        throw CapacityError("enumeration supports at most " + std::to_string(kMaxEnumerationVariables) +
                            " variables, network has " + std::to_string(n));

    std::vector<std::array<double, 2>> mass(n, {0.0, 0.0});
    double total = 0.0;
    WorldState state(n);
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
        bool consistent = true;
        for (std::size_t i = 0; i < n; ++i) {
            const bool value = ((bits >> i) & 1u) != 0;
            state.set(VarId{i}, value);
            auto it = evidence.find(VarId{i});
            if (it != evidence.end() && it->second != value) consistent = false;
        }
        if (!consistent) continue;
        double joint = 1.0;
        for (const auto& cpt : cbn.cpts) {
            joint *= cpt_value(cpt, row_index(cpt.parents, state), state[cpt.owner]);
            if (joint == 0.0) break;
        }
        if (joint == 0.0) continue;
        total += joint;
        for (std::size_t i = 0; i < n; ++i) mass[i][state[VarId{i}] ? 1 : 0] += joint;
    }
    if (total <= 0.0) throw ZeroProbabilityEvidence("evidence has zero probability under the network");

    BeliefMap beliefs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = mass[i][0] + mass[i][1];
        beliefs[i] = Belief{mass[i][0] / s, mass[i][1] / s};
    }
    return beliefs;
}

bool is_polytree(const CausalDiagram& structure) {
    const std::size_t n = structure.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    std::function<std::size_t(std::size_t)> root = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& a : structure.arrows()) {
        const std::size_t ra = root(a.from.index);
        const std::size_t rb = root(a.to.index);
        if (ra == rb) return false;
        parent[ra] = rb;
    }
    return true;
}

namespace {

using Vec2 = std::array<double, 2>;

Vec2 normalized(Vec2 v) {
    const double s = v[0] + v[1];
    if (!(s > 0.0)) throw ZeroProbabilityEvidence("evidence has zero probability under the network");
    return {v[0] / s, v[1] / s};
}

/// sum over parent assignments of P(x | u) * prod_k pi_k(u_k), skipping
/// parent `skip` whose value is fixed to `fixed`.
double mixed_cpt(const Cpt& cpt, const std::vector<Vec2>& parent_pi, bool x, std::size_t skip, bool fixed) {
    const std::size_t k = cpt.parents.size();
    double total = 0.0;
    for (std::size_t row = 0; row < cpt.rows.size(); ++row) {
        double w = cpt_value(cpt, row, x);
        for (std::size_t j = 0; j < k && w != 0.0; ++j) {
            const bool u = ((row >> (k - 1 - j)) & 1u) != 0;
            if (j == skip)
                w *= (u == fixed) ? 1.0 : 0.0;
            else
                w *= parent_pi[j][u ? 1 : 0];
        }
        total += w;
    }
    return total;
}

} // namespace

PropagationResult propagate(const CausalBayesianNetwork& cbn, const Evidence& evidence) {
    require_valid(cbn, evidence);
    const auto& s = cbn.structure;
    if (!is_polytree(s)) throw NotPolytreeError("structure is not a polytree; use enumerate_posterior");
    const std::size_t n = s.size();

    std::vector<Vec2> indicator(n, Vec2{1.0, 1.0});
    for (const auto& [v, value] : evidence) indicator[v.index] = value ? Vec2{0.0, 1.0} : Vec2{1.0, 0.0};

    std::vector<std::vector<VarId>> children(n);
    for (const auto& a : s.arrows()) children[a.from.index].push_back(a.to);

    MessageStore store;
    for (const auto& a : s.arrows()) {
        store.pi[a] = {0.5, 0.5};
        store.lambda[a] = {0.5, 0.5};
    }

    auto parent_pis = [&](const MessageStore& m, VarId x) {
        std::vector<Vec2> out;
        for (VarId p : cbn.cpt(x).parents) out.push_back(m.pi.at(Arrow{p, x}));
        return out;
    };
    auto pi_of = [&](const MessageStore& m, VarId x) {
        const auto pis = parent_pis(m, x);
        const auto& cpt = cbn.cpt(x);
        return Vec2{mixed_cpt(cpt, pis, false, cpt.parents.size(), false),
                    mixed_cpt(cpt, pis, true, cpt.parents.size(), false)};
    };
    // Evidence indicator times lambda messages from children, optionally skipping one.
    auto lambda_of = [&](const MessageStore& m, VarId x, const VarId* skip) {
        Vec2 l = indicator[x.index];
        for (VarId c : children[x.index]) {
            if (skip && c == *skip) continue;
            const auto& msg = m.lambda.at(Arrow{x, c});
            l[0] *= msg[0];
            l[1] *= msg[1];
        }
        return l;
    };

    // A polytree's messages settle after at most (longest path + 1) synchronous sweeps.
    const std::size_t max_sweeps = 2 * n + 4;
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        MessageStore next = store;
        double delta = 0.0;
        for (const auto& a : s.arrows()) {
            const VarId parent = a.from;
            const VarId child = a.to;

            const Vec2 pi_parent = pi_of(store, parent);
            const Vec2 lam_rest = lambda_of(store, parent, &child);
            const Vec2 pi_msg = normalized({pi_parent[0] * lam_rest[0], pi_parent[1] * lam_rest[1]});

            const auto& cpt = cbn.cpt(child);
            const auto pis = parent_pis(store, child);
            const std::size_t j = static_cast<std::size_t>(
                std::find(cpt.parents.begin(), cpt.parents.end(), parent) - cpt.parents.begin());
            const Vec2 lam_child = lambda_of(store, child, nullptr);
            Vec2 lam_msg{};
            for (int u = 0; u < 2; ++u)
                lam_msg[u] = lam_child[0] * mixed_cpt(cpt, pis, false, j, u != 0) +
                             lam_child[1] * mixed_cpt(cpt, pis, true, j, u != 0);
            lam_msg = normalized(lam_msg);

            for (int i = 0; i < 2; ++i) {
                delta = std::max(delta, std::abs(pi_msg[i] - store.pi.at(a)[i]));
                delta = std::max(delta, std::abs(lam_msg[i] - store.lambda.at(a)[i]));
            }
            next.pi[a] = pi_msg;
            next.lambda[a] = lam_msg;
        }
        next.sweeps = store.sweeps;
        store = std::move(next);
        if (delta < kMessageTolerance) break;
        ++store.sweeps;
    }

    PropagationResult result;
    result.beliefs.resize(n);
    for (VarId x : s.ids()) {
        const Vec2 pi = pi_of(store, x);
        const Vec2 lam = lambda_of(store, x, nullptr);
        const Vec2 bel = normalized({pi[0] * lam[0], pi[1] * lam[1]});
        result.beliefs[x.index] = Belief{bel[0], bel[1]};
    }
    result.messages = std::move(store);
    return result;
}

BeliefMap query(const CausalBayesianNetwork& cbn, const Evidence& evidence, InferenceMethod method) {
    if (method == InferenceMethod::BeliefPropagation && is_polytree(cbn.structure))
        return propagate(cbn, evidence).beliefs;
    return enumerate_posterior(cbn, evidence);
}

} // namespace cbnlearn
