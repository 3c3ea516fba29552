#pragma once

#include "cbnlearn/model.hpp"
#include "cbnlearn/simulator.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace cbnlearn {

struct RowProvenance {
    enum class Kind {
        Estimated,              ///< counted from observational records
        Smoothed,               ///< no records; pseudo-count prior only
        InterventionAugmented,  ///< re-estimated from do(parents = row) samples
        Specified,              ///< given directly (loaded file, ground truth)
    };
    Kind kind = Kind::Specified;
    /// Records the row was estimated from.
    std::size_t count = 0;

    friend bool operator==(const RowProvenance&, const RowProvenance&) = default;
};

const char* to_string(RowProvenance::Kind kind);

/// P(owner = 1 | parents = row); row bits follow `parents`, first parent most
/// significant.
struct Cpt {
    VarId owner;
    std::vector<VarId> parents;
    std::vector<double> rows;
    std::vector<RowProvenance> provenance;

    friend bool operator==(const Cpt&, const Cpt&) = default;
};

/// Learned structure plus one Cpt per variable. Deliberately a plain
/// aggregate: validate_cbn reports malformed instances instead of the
/// constructor rejecting them.
struct CausalBayesianNetwork {
    CausalDiagram structure;
    std::vector<Cpt> cpts;

    std::size_t size() const { return structure.size(); }
    const Cpt& cpt(VarId v) const { return cpts.at(v.index); }

    static CausalBayesianNetwork from_scm(const Scm& scm);
    /// Throws StructuralError if validate_cbn reports violations.
    Scm to_scm() const;

    friend bool operator==(const CausalBayesianNetwork&, const CausalBayesianNetwork&) = default;
};

inline constexpr double kDefaultPseudoCount = 1.0;

/// Row = (N1 + c) / (N0 + N1 + 2c) over observational records; rows without
/// records are 0.5 and marked Smoothed. Dataset columns are matched by name.
CausalBayesianNetwork fit_mle(const CausalDiagram& structure, const Dataset& dataset,
                              double pseudo_count = kDefaultPseudoCount);

struct AugmentOptions {
    std::size_t min_count = 5;
    std::size_t samples = 20;
    std::uint64_t seed = 0;
};

/// Re-estimates sparse rows (count < min_count) whose parents are all doable
/// from samples drawn under do(parents = row). Other rows are untouched.
/// Environment failures surface as EnvironmentError with no partial result.
CausalBayesianNetwork augment_with_interventions(const CausalBayesianNetwork& cbn, Environment& env,
                                                 const AugmentOptions& options = {});

struct ValidationReport {
    std::vector<std::string> violations;
    /// (variable, row) of every Smoothed row.
    std::vector<std::pair<VarId, std::size_t>> smoothed_rows;

    bool ok() const { return violations.empty(); }
};

ValidationReport validate_cbn(const CausalBayesianNetwork& cbn);

} // namespace cbnlearn
