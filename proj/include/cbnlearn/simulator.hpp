#pragma once

#include "cbnlearn/model.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace cbnlearn {

/// One record of a dataset. An empty regime means purely observational.
struct Record {
    std::optional<Intervention> regime;
    WorldState state;

    bool observational() const { return !regime.has_value(); }

    friend bool operator==(const Record&, const Record&) = default;
};

/// Boolean world states tagged with the regime that produced them. Column i
/// corresponds to VarId{i}.
struct Dataset {
    std::vector<std::string> variables;
    std::vector<Record> records;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
    std::optional<VarId> find(std::string_view name) const;

    /// Only the observational records.
    Dataset observational() const;
    void append(const Dataset& other);

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

WorldState sample_state(const Scm& scm, std::uint64_t seed);
Dataset sample_dataset(const Scm& scm, std::size_t n, std::uint64_t seed);
/// Equal to sample_dataset(mutilate(scm, intervention), n, seed) with the
/// regime recorded on every row.
Dataset sample_under_do(const Scm& scm, const Intervention& intervention, std::size_t n,
                        std::uint64_t seed);

/// What the learner can do with the world: look at it or act on it.
class Environment {
public:
    virtual ~Environment() = default;

    virtual const std::vector<Variable>& variables() const = 0;
    virtual Dataset observe(std::size_t n, std::uint64_t seed) = 0;
    virtual Dataset intervene(const Intervention& intervention, std::size_t n, std::uint64_t seed) = 0;
};

/// Environment backed by a ground-truth Scm. With enforce_policy set, an
/// intervention on a non-doable variable raises PolicyError; otherwise any
/// intervention is executed, as a simulator allows.
class ScmEnvironment final : public Environment {
public:
    explicit ScmEnvironment(Scm scm, bool enforce_policy = false);

    const std::vector<Variable>& variables() const override { return scm_.diagram().variables(); }
    Dataset observe(std::size_t n, std::uint64_t seed) override;
    Dataset intervene(const Intervention& intervention, std::size_t n, std::uint64_t seed) override;

    const Scm& scm() const { return scm_; }

private:
    Scm scm_;
    bool enforce_policy_;
};

/// Forwards to another environment and keeps a log of every do-operation.
class AuditingEnvironment final : public Environment {
public:
    explicit AuditingEnvironment(Environment& inner) : inner_(inner) {}

    const std::vector<Variable>& variables() const override { return inner_.variables(); }
    Dataset observe(std::size_t n, std::uint64_t seed) override;
    Dataset intervene(const Intervention& intervention, std::size_t n, std::uint64_t seed) override;

    std::size_t observe_calls() const { return observe_calls_; }
    const std::vector<Intervention>& interventions() const { return interventions_; }
    /// Number of logged do-operations touching a non-doable variable.
    std::size_t policy_violations() const;
    std::size_t samples_drawn() const { return samples_drawn_; }

private:
    Environment& inner_;
    std::size_t observe_calls_ = 0;
    std::size_t samples_drawn_ = 0;
    std::vector<Intervention> interventions_;
};

// ---------------------------------------------------------------------------
// Scenarios

struct VariableSpec {
    std::string name;
    bool doable = true;
    /// Order of this list defines the bit order of cpt: first parent is the
    /// most significant bit.
    std::vector<std::string> parents;
    std::vector<double> cpt;

    friend bool operator==(const VariableSpec&, const VariableSpec&) = default;
};

struct ScenarioOptions {
    /// Name of a built-in generator ("living_room"), empty for explicit scenarios.
    std::string base;
    std::set<std::string> nd_set;
    /// Light close enough to the thermometer to heat it (bathroom).
    bool proximity_edge = false;
    /// Named strengths, e.g. light_power_effect. Only built-in generators read them.
    std::map<std::string, double> effect_strengths;

    friend bool operator==(const ScenarioOptions&, const ScenarioOptions&) = default;
};

struct ScenarioConfig {
    std::vector<VariableSpec> variables;
    ScenarioOptions options;

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Default strengths of the living-room generator.
inline constexpr double kDefaultLightPowerEffect = 0.9;
inline constexpr double kDefaultLightTemperatureEffect = 0.95;

/// The living-room ground truth over P, Pr, L, Pow, H, W, O, T with explicit
/// CPTs. Options select the light->thermometer proximity edge and effect
/// strengths; nd_set is carried through unchanged.
ScenarioConfig living_room_config(const ScenarioOptions& options = {});

/// Four independent rooms; only the bathroom has the proximity edge.
std::vector<std::pair<std::string, ScenarioConfig>> four_room_house();

/// Resolves a configuration into a ground-truth Scm. Doable flags come from
/// the variable declarations with nd_set applied on top. Throws ConfigError.
Scm build_scenario(const ScenarioConfig& config);

/// Explicit configuration describing an Scm (parents in ascending index
/// order). build_scenario(scenario_from_scm(s)) == s.
ScenarioConfig scenario_from_scm(const Scm& scm);

} // namespace cbnlearn
