#include "cbnlearn/discovery.hpp"

#include "cbnlearn/error.hpp"
#include "cbnlearn/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>

namespace cbnlearn {

const char* to_string(EvidenceKind kind) {
    switch (kind) {
    case EvidenceKind::DoConfirmed: return "do_confirmed";
    case EvidenceKind::NdCandidate: return "nd_candidate";
    case EvidenceKind::Flagged: return "flagged";
    }
    return "?";
}

std::vector<VarId> CandidateGraph::neighbors(VarId v) const {
    std::set<VarId> out;
    for (const auto& [a, e] : arrows) {
        if (a.from == v) out.insert(a.to);
        if (a.to == v) out.insert(a.from);
    }
    return {out.begin(), out.end()};
}

std::vector<std::pair<VarId, VarId>> CandidateGraph::undirected_pairs() const {
    std::vector<std::pair<VarId, VarId>> out;
    for (const auto& [a, e] : arrows) {
        if (a.from < a.to && e.kind != EvidenceKind::DoConfirmed) {
            auto rev = arrows.find(Arrow{a.to, a.from});
            if (rev != arrows.end() && rev->second.kind != EvidenceKind::DoConfirmed) out.emplace_back(a.from, a.to);
        }
    }
    return out;
}

bool InfluenceSummary::blocked() const {
    return std::any_of(outcomes.begin(), outcomes.end(), [](const AssignmentOutcome& o) {
        return !o.outcome.inconclusive && !o.outcome.reject_independence;
    });
}

bool InfluenceSummary::confirmed() const {
    return !outcomes.empty() && std::all_of(outcomes.begin(), outcomes.end(), [](const AssignmentOutcome& o) {
        return o.outcome.reject_independence;
    });
}

double InfluenceSummary::min_statistic() const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& o : outcomes)
        if (!o.outcome.inconclusive) best = std::min(best, o.outcome.statistic);
    return std::isinf(best) ? 0.0 : best;
}

namespace {

/// Assignment number `bits` over vars, first variable most significant.
std::map<VarId, bool> assignment(const std::vector<VarId>& vars, std::size_t bits) {
    std::map<VarId, bool> out;
    for (std::size_t j = 0; j < vars.size(); ++j) out[vars[j]] = ((bits >> (vars.size() - 1 - j)) & 1u) != 0;
    return out;
}

std::uint64_t code_of(const std::map<VarId, bool>& values) {
    std::uint64_t h = 0x1F0C;
    for (const auto& [v, value] : values) h = mix64(h ^ (2 * v.index + (value ? 1 : 0) + 1));
    return h;
}

std::uint64_t code_of(const std::set<VarId>& vars) {
    std::uint64_t h = 0x0B5E;
    for (VarId v : vars) h = mix64(h ^ (v.index + 1));
    return h;
}

bool matches(const WorldState& state, const Conditioning& values) {
    return std::all_of(values.begin(), values.end(), [&](const auto& kv) { return state[kv.first] == kv.second; });
}

ContingencyTable table_of(const std::array<Dataset, 2>& arms, const Conditioning& values, VarId b) {
    ContingencyTable table;
    for (int value = 0; value < 2; ++value)
        for (const auto& r : arms[value].records)
            if (matches(r.state, values)) ++table.counts[value][r.state[b] ? 1 : 0];
    return table;
}

/// With the sample budget spent, a target that never varied in either arm
/// shows no influence even though the expected-count floor is not met.
bool constant_target(const ContingencyTable& table, const DiscoveryConfig& config) {
    const bool constant = table.col_total(0) == 0 || table.col_total(1) == 0;
    return constant && table.row_total(0) >= config.interventions_per_assignment &&
           table.row_total(1) >= config.interventions_per_assignment;
}

} // namespace

InfluenceSummary conditioned_influence_test(Environment& env, VarId a, VarId b, const std::set<VarId>& lock,
                                            const std::set<VarId>& observed, const DiscoveryConfig& config,
                                            bool stop_when_blocked) {
    const auto& vars = env.variables();
    auto check = [&](VarId v) {
        if (v.index >= vars.size()) throw StructuralError("influence test on unknown variable");
    };
    check(a);
    check(b);
    if (a == b) throw StructuralError("influence test needs two distinct variables");
    if (!vars[a.index].doable) throw PolicyError("cannot intervene on non-doable '" + vars[a.index].name + "'");
    for (VarId v : lock) {
        check(v);
        if (!vars[v.index].doable) throw PolicyError("cannot lock non-doable '" + vars[v.index].name + "'");
        if (v == a || v == b) throw StructuralError("lock set must exclude the tested variables");
    }
    for (VarId v : observed) {
        check(v);
        if (v == a || v == b || lock.contains(v))
            throw StructuralError("observed set must exclude the tested and locked variables");
    }
    if (config.interventions_per_assignment == 0) throw std::invalid_argument("interventions_per_assignment must be positive");

    const std::vector<VarId> lock_vars(lock.begin(), lock.end());
    const std::vector<VarId> observed_vars(observed.begin(), observed.end());
    const std::uint64_t observed_code = code_of(observed);

    InfluenceSummary summary;
    for (std::size_t u = 0; u < (std::size_t{1} << lock_vars.size()); ++u) {
        const Intervention locked = assignment(lock_vars, u);
        const std::uint64_t lock_code = code_of(locked);
        std::array<Dataset, 2> arms;
        std::size_t per_arm = 0;
        std::vector<AssignmentOutcome> strata;

        for (std::uint64_t round = 0;; ++round) {
            const std::size_t draw = per_arm == 0 ? config.interventions_per_assignment : per_arm;
            for (int value = 0; value < 2; ++value) {
                Intervention intervention = locked;
                intervention[a] = value != 0;
                const auto seed = derive_seed(config.seed, {a.index, b.index, lock_code, observed_code,
                                                            static_cast<std::uint64_t>(value), round});
                Dataset fresh = env.intervene(intervention, draw, seed);
                if (fresh.records.size() != draw) throw EnvironmentError("environment returned a short sample");
                if (arms[value].variables.empty())
                    arms[value] = std::move(fresh);
                else
                    arms[value].append(fresh);
            }
            per_arm += draw;

            strata.clear();
            bool any_blocked = false;
            bool all_conclusive = true;
            for (std::size_t s = 0; s < (std::size_t{1} << observed_vars.size()); ++s) {
                const Conditioning values = assignment(observed_vars, s);
                const ContingencyTable table = table_of(arms, values, b);
                const TestOutcome outcome = chi_squared(table, config.alpha);
                if (outcome.inconclusive)
                    all_conclusive = false;
                else if (!outcome.reject_independence)
                    any_blocked = true;
                strata.push_back(AssignmentOutcome{locked, values, outcome, per_arm});
            }
            if (any_blocked || all_conclusive) break;
            if (2 * per_arm > config.max_samples_per_arm) {
                for (auto& o : strata)
                    if (o.outcome.inconclusive && constant_target(table_of(arms, o.observed, b), config))
                        o.outcome = TestOutcome{0.0, 1, o.outcome.critical_value, false, false};
                break;
            }
        }

        summary.outcomes.insert(summary.outcomes.end(), strata.begin(), strata.end());
        if (stop_when_blocked && summary.blocked()) break;
    }
    return summary;
}

InfluenceSummary influence_test(Environment& env, VarId a, VarId b, const std::set<VarId>& lock,
                                const DiscoveryConfig& config) {
    return conditioned_influence_test(env, a, b, lock, {}, config, false);
}

namespace {

/// Calls fn on every size-k subset of items in lexicographic order until fn
/// returns true.
bool for_each_subset(const std::vector<VarId>& items, std::size_t k,
                     const std::function<bool(const std::set<VarId>&)>& fn) {
    if (k > items.size()) return false;
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    while (true) {
        std::set<VarId> subset;
        for (std::size_t i : idx) subset.insert(items[i]);
        if (fn(subset)) return true;
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == items.size() - k + (i - 1)) --i;
        if (i == 0) return false;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

} // namespace

CandidateGraph run_discovery(Environment& env, const DiscoveryConfig& config, std::optional<Dataset> observational) {
    CandidateGraph graph;
    graph.variables = env.variables();
    graph.alpha = config.alpha;
    const std::size_t n = graph.variables.size();
    if (n == 0) throw StructuralError("discovery needs at least one variable");

    if (!observational) {
        observational = env.observe(config.observational_samples, derive_seed(config.seed, {0x0B5E7ull}));
    }
    std::vector<std::string> names;
    for (const auto& v : graph.variables) names.push_back(v.name);
    if (observational->variables != names)
        throw StructuralError("observational dataset columns do not match the environment variables");
    graph.observational = std::make_shared<const Dataset>(std::move(*observational));

    constexpr double kUntested = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j)
                graph.arrows[Arrow{VarId{i}, VarId{j}}] = EdgeEvidence{
                    graph.variables[i].doable ? EvidenceKind::DoConfirmed : EvidenceKind::NdCandidate, kUntested, {}};
    graph.arrow_count_history.push_back(graph.arrows.size());

    for (std::size_t k = 0; k <= config.max_conditioning_order; ++k) {
        bool any = false;
        for (std::size_t i = 0; i < n; ++i)
            if (graph.neighbors(VarId{i}).size() > k) any = true;
        if (!any) break;

        for (std::size_t i = 0; i < n; ++i) {
            const VarId a{i};
            const bool doable = graph.variables[i].doable;
            for (VarId b : graph.neighbors(a)) {
                auto it = graph.arrows.find(Arrow{a, b});
                if (it == graph.arrows.end()) continue;
                std::vector<VarId> others;
                for (VarId c : graph.neighbors(a))
                    if (c != b) others.push_back(c);

                for_each_subset(others, k, [&](const std::set<VarId>& subset) {
                    RemovedArrow removal{Arrow{a, b}, k, doable, subset, it->second};
                    if (doable) {
                        std::set<VarId> lock;
                        std::set<VarId> observed;
                        for (VarId c : subset) (graph.variables[c.index].doable ? lock : observed).insert(c);
                        const auto summary = conditioned_influence_test(env, a, b, lock, observed, config, true);
                        if (!summary.blocked()) {
                            it->second.best_statistic = std::min(it->second.best_statistic, summary.min_statistic());
                            return false;
                        }
                        for (const auto& o : summary.outcomes) {
                            if (!o.outcome.inconclusive && !o.outcome.reject_independence) {
                                Conditioning witness = o.observed;
                                witness.insert(o.lock.begin(), o.lock.end());
                                removal.evidence.removal_witness = witness;
                                removal.evidence.best_statistic = o.outcome.statistic;
                                break;
                            }
                        }
                    } else {
                        const auto result = cond_independent(*graph.observational, a, b, subset, config.alpha);
                        if (!result.independent()) {
                            it->second.best_statistic = std::min(it->second.best_statistic, result.summary.statistic);
                            return false;
                        }
                        removal.evidence.removal_witness = Conditioning{};
                        removal.evidence.best_statistic = result.summary.statistic;
                    }
                    graph.removed.push_back(std::move(removal));
                    graph.arrows.erase(it);
                    return true;
                });
            }
        }
        graph.arrow_count_history.push_back(graph.arrows.size());
    }

    for (auto& [arrow, evidence] : graph.arrows)
        if (std::isinf(evidence.best_statistic)) evidence.best_statistic = 0.0;
    return graph;
}

// ---------------------------------------------------------------------------

namespace {

class ArrowSet {
public:
    explicit ArrowSet(std::size_t n) : out_(n) {}

    bool reaches(VarId from, VarId to) const {
        std::vector<char> seen(out_.size(), 0);
        std::vector<VarId> stack{from};
        while (!stack.empty()) {
            VarId v = stack.back();
            stack.pop_back();
            if (v == to) return true;
            if (seen[v.index]) continue;
            seen[v.index] = 1;
            for (VarId w : out_[v.index]) stack.push_back(w);
        }
        return false;
    }
    bool creates_cycle(Arrow a) const { return reaches(a.to, a.from); }
    void add(Arrow a) { out_[a.from.index].insert(a.to); }
    void remove(Arrow a) { out_[a.from.index].erase(a.to); }

private:
    std::vector<std::set<VarId>> out_;
};

bool more_significant(const std::pair<Arrow, double>& x, const std::pair<Arrow, double>& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
}

} // namespace

LearnedGraph resolve_to_dag(const CandidateGraph& candidate) {
    const std::size_t n = candidate.variables.size();
    std::map<Arrow, EdgeEvidence> arrows = candidate.arrows;
    auto is_confirmed = [&](VarId from, VarId to) {
        auto it = arrows.find(Arrow{from, to});
        return it != arrows.end() && it->second.kind == EvidenceKind::DoConfirmed;
    };
    auto is_nd = [&](VarId from, VarId to) {
        auto it = arrows.find(Arrow{from, to});
        return it != arrows.end() && it->second.kind != EvidenceKind::DoConfirmed;
    };

    // An ND pair explained by an established common cause is dropped.
    if (candidate.observational) {
        for (std::size_t x = 0; x < n; ++x) {
            for (std::size_t y = x + 1; y < n; ++y) {
                const VarId vx{x}, vy{y};
                if (!(is_nd(vx, vy) || is_nd(vy, vx)) || is_confirmed(vx, vy) || is_confirmed(vy, vx)) continue;
                for (std::size_t c = 0; c < n; ++c) {
                    const VarId vc{c};
                    if (c == x || c == y || !is_confirmed(vc, vx) || !is_confirmed(vc, vy)) continue;
                    if (cond_independent(*candidate.observational, vx, vy, {vc}, candidate.alpha).independent()) {
                        arrows.erase(Arrow{vx, vy});
                        arrows.erase(Arrow{vy, vx});
                        break;
                    }
                }
            }
        }
    }

    ArrowSet kept(n);
    std::map<Arrow, EdgeEvidence> evidence;

    // Do-confirmed arrows first; a cycle among them loses its weakest member.
    std::vector<std::pair<Arrow, double>> confirmed;
    for (const auto& [a, e] : arrows)
        if (e.kind == EvidenceKind::DoConfirmed) {
            kept.add(a);
            evidence[a] = e;
            confirmed.emplace_back(a, e.best_statistic);
        }
    std::sort(confirmed.begin(), confirmed.end(), more_significant);
    while (true) {
        std::optional<Arrow> weakest;
        for (auto it = confirmed.rbegin(); it != confirmed.rend(); ++it) {
            if (evidence.contains(it->first) && kept.reaches(it->first.to, it->first.from)) {
                weakest = it->first;
                break;
            }
        }
        if (!weakest) break;
        kept.remove(*weakest);
        evidence.erase(*weakest);
    }

    // ND material, most significant first. Undirected pairs are one item.
    struct Item {
        Arrow arrow;
        double statistic;
        bool undirected;
    };
    std::vector<Item> items;
    for (const auto& [a, e] : arrows) {
        if (e.kind == EvidenceKind::DoConfirmed) continue;
        const bool reverse_nd = is_nd(a.to, a.from);
        if (reverse_nd && a.from > a.to) continue;
        double stat = e.best_statistic;
        if (reverse_nd) stat = std::max(stat, arrows.at(Arrow{a.to, a.from}).best_statistic);
        items.push_back(Item{a, stat, reverse_nd});
    }
    std::sort(items.begin(), items.end(), [](const Item& x, const Item& y) {
        return more_significant({x.arrow, x.statistic}, {y.arrow, y.statistic});
    });
    for (const auto& item : items) {
        std::vector<Arrow> options{item.arrow};
        if (item.undirected) options.push_back(Arrow{item.arrow.to, item.arrow.from});
        for (const Arrow& option : options) {
            if (kept.creates_cycle(option)) continue;
            kept.add(option);
            EdgeEvidence e = arrows.at(option);
            e.kind = EvidenceKind::Flagged;
            e.best_statistic = item.statistic;
            evidence[option] = e;
            break;
        }
    }

    std::set<Arrow> final_arrows;
    for (const auto& [a, e] : evidence) final_arrows.insert(a);
    return LearnedGraph{CausalDiagram(candidate.variables, final_arrows), evidence};
}

EdgeDiff diff_graphs(const LearnedGraph& learned, const CausalDiagram& truth) {
    const auto& lv = learned.diagram.variables();
    const auto& tv = truth.variables();
    std::set<std::string> ln, tn;
    for (const auto& v : lv) ln.insert(v.name);
    for (const auto& v : tv) tn.insert(v.name);
    if (ln != tn) throw StructuralError("learned and true graphs range over different variables");

    std::set<Arrow> learned_arrows;
    for (const auto& a : learned.diagram.arrows())
        learned_arrows.insert(Arrow{truth.id(learned.diagram.name(a.from)), truth.id(learned.diagram.name(a.to))});

    EdgeDiff diff;
    for (const auto& a : learned_arrows) {
        if (truth.arrows().contains(a))
            diff.correct.insert(a);
        else
            diff.added.insert(a);
        if (learned_arrows.contains(Arrow{a.to, a.from})) diff.bidirectional.insert(a);
    }
    for (const auto& a : truth.arrows())
        if (!learned_arrows.contains(a)) diff.missed.insert(a);
    for (const auto& [a, e] : learned.evidence) {
        if (e.kind != EvidenceKind::Flagged) continue;
        const Arrow t{truth.id(learned.diagram.name(a.from)), truth.id(learned.diagram.name(a.to))};
        if (diff.added.contains(t)) diff.flagged_spurious.insert(t);
    }
    const double c = static_cast<double>(diff.correct.size());
    const double p_den = c + static_cast<double>(diff.added.size());
    const double r_den = c + static_cast<double>(diff.missed.size());
    diff.precision = p_den == 0.0 ? 1.0 : c / p_den;
    diff.recall = r_den == 0.0 ? 1.0 : c / r_den;
    return diff;
}

} // namespace cbnlearn
