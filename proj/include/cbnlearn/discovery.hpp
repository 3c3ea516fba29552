#pragma once

#include "cbnlearn/model.hpp"
#include "cbnlearn/simulator.hpp"
#include "cbnlearn/stats.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

namespace cbnlearn {

enum class EvidenceKind {
    DoConfirmed,  ///< survived every intervention test
    NdCandidate,  ///< out of a non-doable node, supported by correlation only
    Flagged,      ///< kept in the final DAG but potentially spurious
};

const char* to_string(EvidenceKind kind);

/// Values of the conditioning variables under which an arrow stopped
/// showing influence (locked by do() or observed).
using Conditioning = std::map<VarId, bool>;

struct EdgeEvidence {
    EvidenceKind kind = EvidenceKind::DoConfirmed;
    /// Weakest chi-squared score among the tests the arrow survived; the
    /// significance used when cycles must be broken. Surviving a test only
    /// because it was inconclusive counts as 0.
    double best_statistic = 0.0;
    std::optional<Conditioning> removal_witness;

    friend bool operator==(const EdgeEvidence&, const EdgeEvidence&) = default;
};

struct DiscoveryConfig {
    double alpha = kDefaultAlpha;
    /// Samples per arm (do(a=0) and do(a=1)) for every lock assignment.
    std::size_t interventions_per_assignment = 20;
    std::size_t observational_samples = 500;
    std::size_t max_conditioning_order = std::numeric_limits<std::size_t>::max();
    std::uint64_t seed = 0;
    /// When a test is inconclusive (small expected counts) the arms are
    /// redrawn with twice the samples, up to this many per arm.
    std::size_t max_samples_per_arm = 1280;
};

struct RemovedArrow {
    Arrow arrow;
    /// Conditioning order k at which the arrow died.
    std::size_t order = 0;
    /// True when a do-test removed it, false for an observational test.
    bool by_intervention = false;
    std::set<VarId> separating_set;
    /// removal_witness holds the blocking assignment for do-tests; for
    /// observational tests every stratum agreed, so it is empty.
    EdgeEvidence evidence;

    friend bool operator==(const RemovedArrow&, const RemovedArrow&) = default;
};

/// Working graph of the discovery loop.
struct CandidateGraph {
    std::vector<Variable> variables;
    std::map<Arrow, EdgeEvidence> arrows;
    std::vector<RemovedArrow> removed;
    /// Arrow count after initialisation and after each conditioning order.
    std::vector<std::size_t> arrow_count_history;
    /// Observational records the non-doable tests used; consulted when
    /// resolving confounded pairs.
    std::shared_ptr<const Dataset> observational;
    double alpha = kDefaultAlpha;

    bool has_arrow(VarId from, VarId to) const { return arrows.contains(Arrow{from, to}); }
    /// Variables joined to v by an arrow in either direction, ascending.
    std::vector<VarId> neighbors(VarId v) const;
    /// Pairs {a < b} present in both directions as ND candidates.
    std::vector<std::pair<VarId, VarId>> undirected_pairs() const;

    friend bool operator==(const CandidateGraph& a, const CandidateGraph& b) {
        return a.variables == b.variables && a.arrows == b.arrows && a.removed == b.removed &&
               a.arrow_count_history == b.arrow_count_history;
    }
};

struct AssignmentOutcome {
    /// Values forced on the lock set.
    Intervention lock;
    /// Values of the observed (non-doable) conditioning variables.
    Conditioning observed;
    TestOutcome outcome;
    std::size_t samples_per_arm = 0;
};

struct InfluenceSummary {
    std::vector<AssignmentOutcome> outcomes;

    /// Some conclusive assignment showed no influence: the path is blocked.
    bool blocked() const;
    /// Every assignment was conclusive and rejected equality.
    bool confirmed() const;
    /// Smallest conclusive statistic (0 when none is conclusive).
    double min_statistic() const;
};

/// do(a) ~> b | do(lock): for each assignment of lock, compares b under
/// do(a=0, lock=u) and do(a=1, lock=u). a and every lock member must be
/// doable (PolicyError otherwise).
InfluenceSummary influence_test(Environment& env, VarId a, VarId b, const std::set<VarId>& lock,
                                const DiscoveryConfig& config);

/// Variant used when the conditioning set contains non-doable variables:
/// doable members are locked by intervention, the others are stratified on
/// their observed values inside the interventional samples.
InfluenceSummary conditioned_influence_test(Environment& env, VarId a, VarId b, const std::set<VarId>& lock,
                                            const std::set<VarId>& observed, const DiscoveryConfig& config,
                                            bool stop_when_blocked = false);

/// The extended-do learning loop over a shrinking, initially complete graph.
/// Uses `observational` when given, otherwise draws
/// config.observational_samples records from the environment.
CandidateGraph run_discovery(Environment& env, const DiscoveryConfig& config,
                             std::optional<Dataset> observational = std::nullopt);

/// A DAG plus the evidence behind each arrow.
struct LearnedGraph {
    CausalDiagram diagram;
    std::map<Arrow, EdgeEvidence> evidence;

    friend bool operator==(const LearnedGraph&, const LearnedGraph&) = default;
};

/// Turns a candidate graph into a DAG: drops confounded ND pairs, keeps
/// lone survivors, orients undirected ND pairs low->high index (Flagged),
/// and breaks cycles by dropping the least significant arrows, ND arrows
/// before do-confirmed ones.
LearnedGraph resolve_to_dag(const CandidateGraph& candidate);

struct EdgeDiff {
    std::set<Arrow> correct;
    std::set<Arrow> missed;
    std::set<Arrow> added;
    /// Added arrows that were Flagged.
    std::set<Arrow> flagged_spurious;
    /// Learned arrows whose reverse is also learned.
    std::set<Arrow> bidirectional;
    double precision = 1.0;
    double recall = 1.0;
};

EdgeDiff diff_graphs(const LearnedGraph& learned, const CausalDiagram& truth);

} // namespace cbnlearn
