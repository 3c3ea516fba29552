#include "cbnlearn/cbn.hpp"

#include "cbnlearn/error.hpp"
#include "cbnlearn/random.hpp"

#include <algorithm>

namespace cbnlearn {

const char* to_string(RowProvenance::Kind kind) {
    switch (kind) {
    case RowProvenance::Kind::Estimated: return "estimated";
    case RowProvenance::Kind::Smoothed: return "smoothed";
    case RowProvenance::Kind::InterventionAugmented: return "intervention_augmented";
    case RowProvenance::Kind::Specified: return "specified";
    }
    return "?";
}

CausalBayesianNetwork CausalBayesianNetwork::from_scm(const Scm& scm) {
    CausalBayesianNetwork cbn{scm.diagram(), {}};
    for (VarId v : scm.diagram().ids()) {
        const auto& rows = scm.mechanism(v);
        cbn.cpts.push_back(Cpt{v, scm.diagram().parents(v), rows,
                               std::vector<RowProvenance>(rows.size(), RowProvenance{})});
    }
    return cbn;
}

Scm CausalBayesianNetwork::to_scm() const {
    const auto report = validate_cbn(*this);
    if (!report.ok()) throw StructuralError("invalid network: " + report.violations.front());
    std::vector<std::vector<double>> mechanisms;
    for (const auto& c : cpts) mechanisms.push_back(c.rows);
    return Scm(structure, std::move(mechanisms));
}

CausalBayesianNetwork fit_mle(const CausalDiagram& structure, const Dataset& dataset, double pseudo_count) {
    if (!(pseudo_count >= 0.0)) throw std::invalid_argument("pseudo_count must be non-negative");
    std::vector<VarId> column(structure.size());
    for (VarId v : structure.ids()) {
        auto c = dataset.find(structure.name(v));
        if (!c) throw StructuralError("dataset has no column for '" + structure.name(v) + "'");
        column[v.index] = *c;
    }

    CausalBayesianNetwork cbn{structure, {}};
    for (VarId v : structure.ids()) {
        const auto parents = structure.parents(v);
        const std::size_t rows = std::size_t{1} << parents.size();
        std::vector<std::array<std::size_t, 2>> counts(rows, {0, 0});
        for (const auto& r : dataset.records) {
            if (!r.observational()) continue;
            std::size_t row = 0;
            for (VarId p : parents) row = (row << 1) | (r.state[column[p.index]] ? 1u : 0u);
            ++counts[row][r.state[column[v.index]] ? 1 : 0];
        }
        Cpt cpt{v, parents, std::vector<double>(rows), std::vector<RowProvenance>(rows)};
        for (std::size_t row = 0; row < rows; ++row) {
            const std::size_t seen = counts[row][0] + counts[row][1];
            if (seen == 0) {
                cpt.rows[row] = 0.5;
                cpt.provenance[row] = {RowProvenance::Kind::Smoothed, 0};
            } else {
                cpt.rows[row] = (static_cast<double>(counts[row][1]) + pseudo_count) /
                                (static_cast<double>(seen) + 2.0 * pseudo_count);
                cpt.provenance[row] = {RowProvenance::Kind::Estimated, seen};
            }
        }
        cbn.cpts.push_back(std::move(cpt));
    }
    return cbn;
}

CausalBayesianNetwork augment_with_interventions(const CausalBayesianNetwork& cbn, Environment& env,
                                                 const AugmentOptions& options) {
    if (options.min_count == 0) throw std::invalid_argument("min_count must be at least 1");
    if (options.samples == 0) throw std::invalid_argument("augmentation needs at least one sample");
    const auto& env_vars = env.variables();
    auto env_id = [&](VarId v) {
        const auto& name = cbn.structure.name(v);
        for (std::size_t i = 0; i < env_vars.size(); ++i)
            if (env_vars[i].name == name) return VarId{i};
        throw StructuralError("environment has no variable '" + name + "'");
    };

    CausalBayesianNetwork out = cbn;
    for (auto& cpt : out.cpts) {
        const bool all_doable = std::all_of(cpt.parents.begin(), cpt.parents.end(),
                                            [&](VarId p) { return env_vars[env_id(p).index].doable; });
        if (!all_doable) continue;
        const VarId owner = env_id(cpt.owner);
        for (std::size_t row = 0; row < cpt.rows.size(); ++row) {
            const auto& prov = cpt.provenance[row];
            const std::size_t count = prov.kind == RowProvenance::Kind::Smoothed ? 0 : prov.count;
            if (prov.kind == RowProvenance::Kind::Specified || count >= options.min_count) continue;

            Intervention intervention;
            const std::size_t k = cpt.parents.size();
            for (std::size_t j = 0; j < k; ++j)
                intervention[env_id(cpt.parents[j])] = ((row >> (k - 1 - j)) & 1u) != 0;
            const auto seed = derive_seed(options.seed, {cpt.owner.index, row});
            Dataset sample;
            try {
                sample = intervention.empty() ? env.observe(options.samples, seed)
                                              : env.intervene(intervention, options.samples, seed);
            } catch (const Error&) {
                throw;
            } catch (const std::exception& e) {
                throw EnvironmentError(std::string("environment failed during augmentation: ") + e.what());
            }
            if (sample.records.size() != options.samples)
                throw EnvironmentError("environment returned a short sample during augmentation");
            std::size_t ones = 0;
            for (const auto& r : sample.records) ones += r.state[owner] ? 1 : 0;
            cpt.rows[row] = static_cast<double>(ones) / static_cast<double>(options.samples);
            cpt.provenance[row] = {RowProvenance::Kind::InterventionAugmented, options.samples};
        }
    }
    return out;
}

ValidationReport validate_cbn(const CausalBayesianNetwork& cbn) {
    ValidationReport report;
    const auto& s = cbn.structure;
    if (!check_acyclic(s).acyclic) report.violations.push_back("structure has a directed cycle");
    if (cbn.cpts.size() != s.size())
        report.violations.push_back("expected " + std::to_string(s.size()) + " CPTs, found " +
                                    std::to_string(cbn.cpts.size()));
    for (std::size_t i = 0; i < cbn.cpts.size(); ++i) {
        const auto& cpt = cbn.cpts[i];
        const std::string who = cpt.owner.index < s.size() ? s.name(cpt.owner) : std::to_string(cpt.owner.index);
        if (cpt.owner.index != i) report.violations.push_back("CPT " + std::to_string(i) + " belongs to " + who);
        if (cpt.owner.index < s.size() && cpt.parents != s.parents(cpt.owner))
            report.violations.push_back("CPT parents of '" + who + "' differ from the structure");
        const std::size_t expected = std::size_t{1} << cpt.parents.size();
        if (cpt.rows.size() != expected)
            report.violations.push_back("CPT of '" + who + "' has " + std::to_string(cpt.rows.size()) +
                                        " rows, expected " + std::to_string(expected));
        if (cpt.provenance.size() != cpt.rows.size())
            report.violations.push_back("CPT of '" + who + "' has mismatched provenance");
        for (std::size_t r = 0; r < cpt.rows.size(); ++r) {
            if (!(cpt.rows[r] >= 0.0 && cpt.rows[r] <= 1.0))
                report.violations.push_back("CPT of '" + who + "' row " + std::to_string(r) +
                                            " has probability " + std::to_string(cpt.rows[r]));
            if (r < cpt.provenance.size() && cpt.provenance[r].kind == RowProvenance::Kind::Smoothed)
                report.smoothed_rows.emplace_back(cpt.owner, r);
        }
    }
    return report;
}

} // namespace cbnlearn
