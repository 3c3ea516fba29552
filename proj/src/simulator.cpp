#include "cbnlearn/simulator.hpp"

#include "cbnlearn/error.hpp"
#include "cbnlearn/random.hpp"

#include <algorithm>
#include <cmath>

namespace cbnlearn {

std::optional<VarId> Dataset::find(std::string_view name) const {
    for (std::size_t i = 0; i < variables.size(); ++i)
        if (variables[i] == name) return VarId{i};
    return std::nullopt;
}

Dataset Dataset::observational() const {
    Dataset out{variables, {}};
    for (const auto& r : records)
        if (r.observational()) out.records.push_back(r);
    return out;
}

void Dataset::append(const Dataset& other) {
    if (other.variables != variables) throw StructuralError("cannot append datasets over different variables");
    records.insert(records.end(), other.records.begin(), other.records.end());
}

namespace {

struct Sampler {
    explicit Sampler(const Scm& scm) : scm(scm), order(topological_order(scm.diagram())) {
        for (VarId v : scm.diagram().ids()) parents.push_back(scm.diagram().parents(v));
    }

    WorldState draw(Rng& rng) const {
        WorldState state(scm.size());
        for (VarId v : order) {
            const double p = scm.mechanism(v)[row_index(parents[v.index], state)];
            state.set(v, rng.bernoulli(p));
        }
        return state;
    }

    const Scm& scm;
    std::vector<VarId> order;
    std::vector<std::vector<VarId>> parents;
};

Dataset sample_records(const Scm& scm, std::size_t n, std::uint64_t seed,
                       const std::optional<Intervention>& regime) {
    Sampler sampler(scm);
    Rng rng(seed);
    Dataset out{variable_names(scm.diagram()), {}};
    out.records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.records.push_back(Record{regime, sampler.draw(rng)});
    return out;
}

} // namespace

WorldState sample_state(const Scm& scm, std::uint64_t seed) {
    Sampler sampler(scm);
    Rng rng(seed);
    return sampler.draw(rng);
}

Dataset sample_dataset(const Scm& scm, std::size_t n, std::uint64_t seed) {
    return sample_records(scm, n, seed, std::nullopt);
}

Dataset sample_under_do(const Scm& scm, const Intervention& intervention, std::size_t n,
                        std::uint64_t seed) {
    return sample_records(mutilate(scm, intervention), n, seed, intervention);
}

ScmEnvironment::ScmEnvironment(Scm scm, bool enforce_policy)
    : scm_(std::move(scm)), enforce_policy_(enforce_policy) {}

Dataset ScmEnvironment::observe(std::size_t n, std::uint64_t seed) {
    return sample_dataset(scm_, n, seed);
}

Dataset ScmEnvironment::intervene(const Intervention& intervention, std::size_t n, std::uint64_t seed) {
    if (enforce_policy_) {
        for (const auto& [v, value] : intervention)
            if (!scm_.diagram().doable(v))
                throw PolicyError("do() on non-doable variable '" + scm_.diagram().name(v) + "'");
    }
    return sample_under_do(scm_, intervention, n, seed);
}

Dataset AuditingEnvironment::observe(std::size_t n, std::uint64_t seed) {
    ++observe_calls_;
    samples_drawn_ += n;
    return inner_.observe(n, seed);
}

Dataset AuditingEnvironment::intervene(const Intervention& intervention, std::size_t n,
                                       std::uint64_t seed) {
    interventions_.push_back(intervention);
    samples_drawn_ += n;
    return inner_.intervene(intervention, n, seed);
}

std::size_t AuditingEnvironment::policy_violations() const {
    const auto& vars = inner_.variables();
    return static_cast<std::size_t>(
        std::count_if(interventions_.begin(), interventions_.end(), [&](const Intervention& i) {
            return std::any_of(i.begin(), i.end(),
                               [&](const auto& kv) { return !vars.at(kv.first.index).doable; });
        }));
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kLeak = 0.05;
constexpr double kStrong = 0.95;

/// Noisy-OR rows: P(1 | u) = 1 - (1 - leak) * prod_{i: u_i = 1} (1 - strength_i).
std::vector<double> noisy_or(double leak, const std::vector<double>& strengths) {
    const std::size_t k = strengths.size();
    std::vector<double> rows(std::size_t{1} << k);
    for (std::size_t row = 0; row < rows.size(); ++row) {
        double off = 1.0 - leak;
        for (std::size_t i = 0; i < k; ++i)
            if ((row >> (k - 1 - i)) & 1u) off *= 1.0 - strengths[i];
        // Rounded so that the rows print as short decimals in scenario files.
        rows[row] = std::round((1.0 - off) * 1e8) / 1e8;
    }
    return rows;
}

double strength(const ScenarioOptions& options, const std::string& key, double fallback) {
    auto it = options.effect_strengths.find(key);
    return it == options.effect_strengths.end() ? fallback : it->second;
}

const std::set<std::string> kLivingRoomEffects = {"light_power_effect", "light_temperature_effect"};

} // namespace

ScenarioConfig living_room_config(const ScenarioOptions& options) {
    for (const auto& [key, value] : options.effect_strengths) {
        if (!kLivingRoomEffects.contains(key)) throw ConfigError("unknown effect strength '" + key + "'");
        if (!(value >= 0.0 && value <= 1.0)) throw ConfigError("effect strength '" + key + "' outside [0,1]");
    }
    const double light_power = strength(options, "light_power_effect", kDefaultLightPowerEffect);
    const double light_temp = strength(options, "light_temperature_effect", kDefaultLightTemperatureEffect);

    ScenarioConfig config;
    config.options.nd_set = options.nd_set;
    auto& vars = config.variables;
    vars.push_back({"P", true, {}, {0.3}});
    vars.push_back({"Pr", true, {"P"}, {0.1, 0.9}});
    vars.push_back({"L", true, {"Pr"}, {0.1, 0.9}});
    vars.push_back({"Pow", true, {"L", "H"}, noisy_or(kLeak, {light_power, kStrong})});
    vars.push_back({"H", true, {}, {0.15}});
    vars.push_back({"W", true, {}, {0.1}});
    vars.push_back({"O", true, {}, {0.1}});
    if (options.proximity_edge)
        vars.push_back({"T", true, {"L", "H", "W", "O"}, noisy_or(kLeak, {light_temp, kStrong, kStrong, kStrong})});
    else
        vars.push_back({"T", true, {"H", "W", "O"}, noisy_or(kLeak, {kStrong, kStrong, kStrong})});
    return config;
}

std::vector<std::pair<std::string, ScenarioConfig>> four_room_house() {
    ScenarioOptions bathroom;
    bathroom.proximity_edge = true;
    return {
        {"living_room", living_room_config()},
        {"kitchen", living_room_config()},
        {"bedroom", living_room_config()},
        {"bathroom", living_room_config(bathroom)},
    };
}

Scm build_scenario(const ScenarioConfig& config) {
    if (!config.options.base.empty()) {
        if (!config.variables.empty())
            throw ConfigError("scenario declares variables and also a built-in base '" + config.options.base + "'");
        if (config.options.base != "living_room")
            throw ConfigError("unknown scenario base '" + config.options.base + "'");
        return build_scenario(living_room_config(config.options));
    }
    if (config.options.proximity_edge || !config.options.effect_strengths.empty())
        throw ConfigError("proximity_edge and effect strengths require a built-in scenario base");

    std::vector<Variable> variables;
    for (const auto& spec : config.variables) variables.push_back({spec.name, spec.doable});
    CausalDiagram diagram;
    try {
        diagram = CausalDiagram(std::move(variables));
    } catch (const StructuralError& e) {
        throw ConfigError(e.what());
    }
    for (const auto& name : config.options.nd_set)
        if (!diagram.find(name)) throw ConfigError("nd option names unknown variable '" + name + "'");

    for (std::size_t i = 0; i < config.variables.size(); ++i) {
        for (const auto& p : config.variables[i].parents) {
            auto pid = diagram.find(p);
            if (!pid) throw ConfigError("'" + config.variables[i].name + "' lists unknown parent '" + p + "'");
            if (diagram.has_arrow(*pid, VarId{i}))
                throw ConfigError("'" + config.variables[i].name + "' lists parent '" + p + "' twice");
            if (pid->index == i) throw ConfigError("'" + p + "' lists itself as parent");
            diagram.add_arrow(*pid, VarId{i});
        }
    }
    const auto cycle = check_acyclic(diagram);
    if (!cycle.acyclic) throw ConfigError("scenario graph has a directed cycle");

    std::vector<std::vector<double>> mechanisms;
    for (std::size_t i = 0; i < config.variables.size(); ++i) {
        const auto& spec = config.variables[i];
        const std::size_t k = spec.parents.size();
        if (spec.cpt.size() != (std::size_t{1} << k))
            throw ConfigError("'" + spec.name + "' has " + std::to_string(spec.cpt.size()) +
                              " cpt rows, expected " + std::to_string(std::size_t{1} << k));
        for (double p : spec.cpt)
            if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("cpt of '" + spec.name + "' has probability outside [0,1]");

        // Re-key the rows from declaration order to ascending parent index.
        const auto sorted = diagram.parents(VarId{i});
        std::vector<std::size_t> position(k);  // position of sorted[j] in spec.parents
        for (std::size_t j = 0; j < k; ++j) {
            const auto& name = diagram.name(sorted[j]);
            position[j] = static_cast<std::size_t>(
                std::find(spec.parents.begin(), spec.parents.end(), name) - spec.parents.begin());
        }
        std::vector<double> rows(spec.cpt.size());
        for (std::size_t row = 0; row < rows.size(); ++row) {
            std::size_t declared = 0;
            for (std::size_t j = 0; j < k; ++j)
                if ((row >> (k - 1 - j)) & 1u) declared |= std::size_t{1} << (k - 1 - position[j]);
            rows[row] = spec.cpt[declared];
        }
        mechanisms.push_back(std::move(rows));
    }

    std::vector<Variable> flagged = diagram.variables();
    for (auto& v : flagged)
        if (config.options.nd_set.contains(v.name)) v.doable = false;
    return Scm(CausalDiagram(std::move(flagged), diagram.arrows()), std::move(mechanisms));
}

ScenarioConfig scenario_from_scm(const Scm& scm) {
    ScenarioConfig config;
    const auto& d = scm.diagram();
    for (VarId v : d.ids()) {
        VariableSpec spec{d.name(v), d.doable(v), {}, scm.mechanism(v)};
        for (VarId p : d.parents(v)) spec.parents.push_back(d.name(p));
        config.variables.push_back(std::move(spec));
    }
    return config;
}

} // namespace cbnlearn
