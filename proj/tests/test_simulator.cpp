#include "support.hpp"

#include "cbnlearn/error.hpp"
#include "cbnlearn/simulator.hpp"

#include <doctest.h>

#include <cmath>

using namespace cbnlearn;
using namespace testing;

namespace {

/// Exact P(v = 1) by summing the joint of the ground truth.
std::vector<double> exact_marginals(const Scm& s) {
    const std::size_t n = s.size();
    std::vector<double> out(n, 0.0);
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << n); ++code) {
        WorldState w(n);
        for (std::size_t i = 0; i < n; ++i) w.set(VarId{i}, (code >> i) & 1u);
        double p = 1.0;
        for (VarId v : s.diagram().ids()) {
            const double p1 = s.mechanism(v)[row_index(s.diagram().parents(v), w)];
            p *= w[v] ? p1 : 1.0 - p1;
        }
        for (std::size_t i = 0; i < n; ++i)
            if ((code >> i) & 1u) out[i] += p;
    }
    return out;
}

double frequency(const Dataset& d, VarId v) {
    double ones = 0;
    for (const auto& r : d.records) ones += r.state[v];
    return ones / static_cast<double>(d.size());
}

Scm single(double p) { return Scm(CausalDiagram(make_vars({"X"})), {{p}}); }

} // namespace

TEST_CASE("living-room generator") {
    const Scm s = build_scenario(living_room_config());
    const auto& d = s.diagram();
    CHECK(d.size() == 8);
    CHECK(d.arrows() == living_room_truth(d));
    for (const auto& v : d.variables()) CHECK(v.doable);

    SUBCASE("strong effects shift children by at least 0.5") {
        const auto& pow = s.mechanism(d.id("Pow"));  // parents L, H
        CHECK(pow[0b10] - pow[0b00] >= 0.5);
        CHECK(pow[0b01] - pow[0b00] >= 0.5);
        const auto& pr = s.mechanism(d.id("Pr"));
        CHECK(pr[1] - pr[0] >= 0.5);
    }

    SUBCASE("proximity edge adds L->T") {
        ScenarioOptions o;
        o.proximity_edge = true;
        const Scm b = build_scenario(living_room_config(o));
        auto expected = living_room_truth(b.diagram());
        expected.insert(arrow(b.diagram(), "L", "T"));
        CHECK(b.diagram().arrows() == expected);
    }

    SUBCASE("nd set") {
        ScenarioConfig c = living_room_config();
        c.options.nd_set = {"Pr", "Pow", "T"};
        const Scm nd = build_scenario(c);
        for (const auto& v : nd.diagram().variables())
            CHECK(v.doable == !(v.name == "Pr" || v.name == "Pow" || v.name == "T"));
    }

    SUBCASE("weak light effect") {
        ScenarioOptions o;
        o.effect_strengths["light_power_effect"] = 0.05;
        const Scm w = build_scenario(living_room_config(o));
        const auto& pow = w.mechanism(w.diagram().id("Pow"));
        CHECK(pow[0b10] - pow[0b00] <= 0.05);
        CHECK(pow[0b11] - pow[0b01] <= 0.05);
    }

    SUBCASE("bad options") {
        ScenarioOptions o;
        o.effect_strengths["oven_effect"] = 0.5;
        CHECK_THROWS_AS(living_room_config(o), ConfigError);
        ScenarioConfig c = living_room_config();
        c.options.proximity_edge = true;
        CHECK_THROWS_AS(build_scenario(c), ConfigError);
        ScenarioConfig unknown;
        unknown.options.base = "garage";
        CHECK_THROWS_AS(build_scenario(unknown), ConfigError);
        ScenarioConfig bad_nd = living_room_config();
        bad_nd.options.nd_set = {"Q"};
        CHECK_THROWS_AS(build_scenario(bad_nd), ConfigError);
    }
}

TEST_CASE("four-room house: only the bathroom has the proximity edge") {
    const auto rooms = four_room_house();
    REQUIRE(rooms.size() == 4);
    for (const auto& [name, config] : rooms) {
        const Scm s = build_scenario(config);
        CHECK(s.diagram().has_arrow(s.diagram().id("L"), s.diagram().id("T")) == (name == "bathroom"));
    }
}

TEST_CASE("explicit scenarios rekey CPT rows to ascending parent order") {
    ScenarioConfig c;
    c.variables = {{"A", true, {}, {0.5}}, {"B", true, {}, {0.5}}, {"C", true, {"B", "A"}, {0.0, 0.1, 0.2, 0.3}}};
    const Scm s = build_scenario(c);
    // declared bits (B,A) = (1,0) -> 0.2; ascending order (A,B) = (0,1) is row 1
    CHECK(s.mechanism(VarId{2}) == std::vector<double>{0.0, 0.2, 0.1, 0.3});
    CHECK(build_scenario(scenario_from_scm(s)) == s);
}

TEST_CASE("sample_state on degenerate models") {
    CHECK(sample_state(single(1.0), 3)[VarId{0}]);
    CHECK_FALSE(sample_state(single(0.0), 3)[VarId{0}]);
    const Scm chain(CausalDiagram(make_vars({"A", "B"}), {arrow(0, 1)}), {{1.0}, {0.0, 1.0}});
    const WorldState w = sample_state(chain, 11);
    CHECK(w[VarId{0}]);
    CHECK(w[VarId{1}]);
}

TEST_CASE("sample_dataset") {
    const Scm s = build_scenario(living_room_config());
    CHECK(sample_dataset(s, 0, 1).empty());

    const Dataset d = sample_dataset(s, 500, 42);
    CHECK(d.size() == 500);
    CHECK(d.variables == variable_names(s.diagram()));
    for (const auto& r : d.records) CHECK(r.observational());
    CHECK(d == sample_dataset(s, 500, 42));
    CHECK_FALSE(d == sample_dataset(s, 500, 43));

    const Dataset root = sample_dataset(single(0.3), 10000, 5);
    CHECK(std::abs(frequency(root, VarId{0}) - 0.3) <= 0.02);
}

TEST_CASE("empirical marginals match exact priors within three standard errors") {
    const Scm s = build_scenario(living_room_config());
    const auto exact = exact_marginals(s);
    const Dataset d = sample_dataset(s, 10000, 2024);
    for (VarId v : s.diagram().ids()) {
        const double p = exact[v.index];
        const double se = std::sqrt(p * (1 - p) / 10000.0);
        CHECK_MESSAGE(std::abs(frequency(d, v) - p) <= 3 * se, s.diagram().name(v));
    }
}

TEST_CASE("sample_under_do") {
    const Scm s = build_scenario(living_room_config());
    const auto& d = s.diagram();
    const Intervention do_h{{d.id("H"), true}};

    const Dataset data = sample_under_do(s, do_h, 20, 9);
    CHECK(data.size() == 20);
    for (const auto& r : data.records) {
        CHECK(r.state[d.id("H")]);
        REQUIRE(r.regime.has_value());
        CHECK(*r.regime == do_h);
    }

    const Dataset plain = sample_dataset(mutilate(s, do_h), 20, 9);
    for (std::size_t i = 0; i < 20; ++i) CHECK(data.records[i].state == plain.records[i].state);
}

TEST_CASE("interventions on the lamp leave presence alone; on presence they move the lamp") {
    const Scm s = build_scenario(living_room_config());
    const auto& d = s.diagram();
    const VarId p = d.id("P"), l = d.id("L");
    const double base = frequency(sample_dataset(s, 4000, 1), p);
    const double under_lamp = frequency(sample_under_do(s, {{l, true}}, 4000, 2), p);
    CHECK(std::abs(base - under_lamp) < 0.04);

    const double l_p0 = frequency(sample_under_do(s, {{p, false}}, 4000, 3), l);
    const double l_p1 = frequency(sample_under_do(s, {{p, true}}, 4000, 4), l);
    CHECK(l_p1 - l_p0 > 0.5);
}

TEST_CASE("environments") {
    ScenarioConfig c = living_room_config();
    c.options.nd_set = {"T"};
    const Scm s = build_scenario(c);
    const VarId t = s.diagram().id("T"), h = s.diagram().id("H");

    ScmEnvironment strict(s, true);
    CHECK_THROWS_AS(strict.intervene({{t, true}}, 5, 1), PolicyError);
    CHECK(strict.intervene({{h, true}}, 5, 1).size() == 5);

    ScmEnvironment lax(s);
    AuditingEnvironment audit(lax);
    audit.observe(10, 1);
    audit.intervene({{h, false}}, 4, 2);
    CHECK(audit.policy_violations() == 0);
    audit.intervene({{t, true}, {h, true}}, 3, 3);
    CHECK(audit.policy_violations() == 1);
    CHECK(audit.observe_calls() == 1);
    CHECK(audit.interventions().size() == 2);
    CHECK(audit.samples_drawn() == 17);
}

TEST_CASE("Dataset helpers") {
    const Scm s = build_scenario(living_room_config());
    Dataset d = sample_dataset(s, 5, 1);
    d.append(sample_under_do(s, {{VarId{0}, true}}, 3, 2));
    CHECK(d.size() == 8);
    CHECK(d.observational().size() == 5);
    CHECK(d.find("W") == VarId{5});
    CHECK_FALSE(d.find("Z").has_value());
}
