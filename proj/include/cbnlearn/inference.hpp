#pragma once

#include "cbnlearn/cbn.hpp"

#include <array>
#include <map>
#include <vector>

namespace cbnlearn {

using Evidence = std::map<VarId, bool>;

struct Belief {
    double p0 = 0.5;
    double p1 = 0.5;
};

/// Indexed by VarId::index.
using BeliefMap = std::vector<Belief>;

/// Pearl's messages, one length-2 vector per structure arrow.
struct MessageStore {
    /// pi message parent -> child, keyed by the arrow.
    std::map<Arrow, std::array<double, 2>> pi;
    /// lambda message child -> parent, keyed by the arrow parent -> child.
    std::map<Arrow, std::array<double, 2>> lambda;
    /// Sweeps that changed at least one message.
    std::size_t sweeps = 0;
};

struct PropagationResult {
    BeliefMap beliefs;
    MessageStore messages;
};

inline constexpr std::size_t kMaxEnumerationVariables = 25;
inline constexpr double kMessageTolerance = 1e-12;

/// Exact marginals by summing the full joint. Throws CapacityError above
/// kMaxEnumerationVariables and ZeroProbabilityEvidence.
BeliefMap enumerate_posterior(const CausalBayesianNetwork& cbn, const Evidence& evidence);

/// True iff the undirected skeleton is a forest.
bool is_polytree(const CausalDiagram& structure);

/// Iterative lambda/pi propagation; Bel(X) = alpha lambda(X) pi(X). Exact on
/// polytrees and refused (NotPolytreeError) elsewhere.
PropagationResult propagate(const CausalBayesianNetwork& cbn, const Evidence& evidence);

enum class InferenceMethod { BeliefPropagation, Enumeration };

/// Propagation when the structure allows it, enumeration otherwise.
BeliefMap query(const CausalBayesianNetwork& cbn, const Evidence& evidence,
                InferenceMethod method = InferenceMethod::BeliefPropagation);

} // namespace cbnlearn
