#include "support.hpp"

#include "cbnlearn/cbn.hpp"
#include "cbnlearn/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace cbnlearn;
using namespace testing;

namespace {

Record obs(std::vector<std::uint8_t> values) { return Record{std::nullopt, WorldState(std::move(values))}; }

/// T with parents W, H; three records (T=0,W=0,H=0) and one (T=1,W=0,H=0).
Dataset eq1_fixture() {
    Dataset d{{"T", "W", "H"}, {}};
    for (int i = 0; i < 3; ++i) d.records.push_back(obs({0, 0, 0}));
    d.records.push_back(obs({1, 0, 0}));
    return d;
}

CausalDiagram thw() {
    return CausalDiagram(make_vars({"T", "W", "H"}), {arrow(1, 0), arrow(2, 0)});
}

/// Environment that fails on every request.
class BrokenEnvironment final : public Environment {
public:
    explicit BrokenEnvironment(std::vector<Variable> vars) : vars_(std::move(vars)) {}
    const std::vector<Variable>& variables() const override { return vars_; }
    Dataset observe(std::size_t, std::uint64_t) override { throw std::runtime_error("sensor offline"); }
    Dataset intervene(const Intervention&, std::size_t, std::uint64_t) override {
        throw std::runtime_error("actuator offline");
    }

private:
    std::vector<Variable> vars_;
};

} // namespace

TEST_CASE("Laplace estimate on the four-record fixture") {
    const auto cbn = fit_mle(thw(), eq1_fixture(), 0.0);
    const auto& t = cbn.cpt(VarId{0});
    REQUIRE(t.parents == std::vector<VarId>{VarId{1}, VarId{2}});
    CHECK(1.0 - t.rows[0] == 0.75);
    CHECK(t.provenance[0] == RowProvenance{RowProvenance::Kind::Estimated, 4});
    for (std::size_t row = 1; row < 4; ++row) CHECK(t.provenance[row].kind == RowProvenance::Kind::Smoothed);

    const auto smoothed = fit_mle(thw(), eq1_fixture(), 1.0);
    CHECK(smoothed.cpt(VarId{0}).rows[0] == doctest::Approx(2.0 / 6.0));
}

TEST_CASE("empty dataset gives uniform smoothed rows") {
    const auto cbn = fit_mle(thw(), Dataset{{"T", "W", "H"}, {}}, 1.0);
    for (const auto& cpt : cbn.cpts)
        for (std::size_t r = 0; r < cpt.rows.size(); ++r) {
            CHECK(cpt.rows[r] == 0.5);
            CHECK(cpt.provenance[r].kind == RowProvenance::Kind::Smoothed);
        }
    CHECK(validate_cbn(cbn).smoothed_rows.size() == 4 + 1 + 1);
}

TEST_CASE("fitting recovers the generating CPTs") {
    const Scm truth = build_scenario(living_room_config());
    const auto data = sample_dataset(truth, 10000, 12);
    const auto cbn = fit_mle(truth.diagram(), data, 0.0);
    for (VarId v : truth.diagram().ids()) {
        const auto& cpt = cbn.cpt(v);
        for (std::size_t r = 0; r < cpt.rows.size(); ++r)
            if (cpt.provenance[r].count >= 100)
                CHECK_MESSAGE(std::abs(cpt.rows[r] - truth.mechanism(v)[r]) <= 0.03, truth.diagram().name(v));
    }
}

TEST_CASE("deterministic CPTs are recovered exactly for observed rows") {
    const CausalDiagram chain(make_vars({"A", "B", "C"}), {arrow(0, 1), arrow(1, 2)});
    const Scm s(chain, {{0.5}, {0.0, 1.0}, {1.0, 0.0}});
    const auto cbn = fit_mle(chain, sample_dataset(s, 200, 4), 0.0);
    for (VarId v : chain.ids())
        for (std::size_t r = 0; r < cbn.cpt(v).rows.size(); ++r)
            if (cbn.cpt(v).provenance[r].count > 0 && v.index > 0) CHECK(cbn.cpt(v).rows[r] == s.mechanism(v)[r]);
}

TEST_CASE("fitting ignores interventional records, record order and column order") {
    const Scm truth = build_scenario(living_room_config());
    Dataset data = sample_dataset(truth, 300, 1);
    const auto base = fit_mle(truth.diagram(), data);

    Dataset with_do = data;
    with_do.append(sample_under_do(truth, {{VarId{0}, true}}, 100, 2));
    CHECK(fit_mle(truth.diagram(), with_do) == base);

    Dataset shuffled = data;
    std::reverse(shuffled.records.begin(), shuffled.records.end());
    std::rotate(shuffled.records.begin(), shuffled.records.begin() + 37, shuffled.records.end());
    CHECK(fit_mle(truth.diagram(), shuffled) == base);

    Dataset permuted{{}, {}};
    const std::vector<std::size_t> perm{7, 6, 5, 4, 3, 2, 1, 0};
    for (std::size_t i : perm) permuted.variables.push_back(data.variables[i]);
    for (const auto& r : data.records) {
        std::vector<std::uint8_t> values;
        for (std::size_t i : perm) values.push_back(r.state.values()[i]);
        permuted.records.push_back(obs(values));
    }
    CHECK(fit_mle(truth.diagram(), permuted) == base);

    CHECK_THROWS_AS(fit_mle(truth.diagram(), Dataset{{"P"}, {}}), StructuralError);
}

TEST_CASE("augmentation") {
    const Scm truth = build_scenario(living_room_config());
    const auto& d = truth.diagram();

    SUBCASE("well-populated rows are left alone") {
        ScmEnvironment env(truth);
        const auto cbn = fit_mle(d, sample_dataset(truth, 50000, 3));
        bool all_full = true;
        for (const auto& cpt : cbn.cpts)
            for (const auto& p : cpt.provenance) all_full = all_full && p.count >= 5;
        REQUIRE(all_full);
        CHECK(augment_with_interventions(cbn, env) == cbn);
    }

    SUBCASE("an unseen row of doable parents is estimated from do samples") {
        const CausalDiagram structure = thw();
        const Scm gen(structure, {{0.1, 0.6, 0.7, 0.95}, {0.5}, {0.5}});
        ScmEnvironment env(gen);
        Dataset data{{"T", "W", "H"}, {}};
        data.records = {obs({0, 0, 0}), obs({1, 1, 1}), obs({1, 1, 0})};  // row (W,H)=(0,1) never seen
        const auto cbn = fit_mle(structure, data);
        REQUIRE(cbn.cpt(VarId{0}).provenance[1].kind == RowProvenance::Kind::Smoothed);

        AugmentOptions options;
        options.seed = 4;
        const auto out = augment_with_interventions(cbn, env, options);
        const auto& row = out.cpt(VarId{0});
        CHECK(row.provenance[1] == RowProvenance{RowProvenance::Kind::InterventionAugmented, 20});

        // oracle: the same 20 samples drawn directly
        const auto seed = derive_seed(options.seed, {0, 1});
        const auto sample = sample_under_do(gen, {{VarId{1}, false}, {VarId{2}, true}}, 20, seed);
        double ones = 0;
        for (const auto& r : sample.records) ones += r.state[VarId{0}];
        CHECK(row.rows[1] == ones / 20.0);
    }

    SUBCASE("rows with a non-doable parent stay smoothed") {
        auto vars = make_vars({"T", "W", "H"});
        vars[1].doable = false;
        const CausalDiagram structure(vars, {arrow(1, 0), arrow(2, 0)});
        ScmEnvironment env(Scm(structure, {{0.1, 0.6, 0.7, 0.95}, {0.5}, {0.5}}));
        AuditingEnvironment audit(env);
        const auto cbn = fit_mle(structure, Dataset{{"T", "W", "H"}, {}});
        const auto out = augment_with_interventions(cbn, audit);
        CHECK(out.cpt(VarId{0}) == cbn.cpt(VarId{0}));
        CHECK(audit.policy_violations() == 0);
    }

    SUBCASE("environment failures surface as EnvironmentError") {
        BrokenEnvironment env(thw().variables());
        const auto cbn = fit_mle(thw(), Dataset{{"T", "W", "H"}, {}});
        CHECK_THROWS_AS(augment_with_interventions(cbn, env), EnvironmentError);
    }
}

TEST_CASE("validate_cbn") {
    const Scm truth = build_scenario(living_room_config());
    const auto good = CausalBayesianNetwork::from_scm(truth);
    CHECK(validate_cbn(good).ok());
    CHECK(good.to_scm() == truth);

    auto short_rows = good;
    short_rows.cpts[truth.diagram().id("Pow").index].rows.pop_back();
    short_rows.cpts[truth.diagram().id("Pow").index].provenance.pop_back();
    CHECK_FALSE(validate_cbn(short_rows).ok());
    CHECK_THROWS_AS(short_rows.to_scm(), StructuralError);

    auto out_of_range = good;
    out_of_range.cpts[0].rows[0] = 1.2;
    CHECK_FALSE(validate_cbn(out_of_range).ok());

    auto wrong_parents = good;
    wrong_parents.cpts[truth.diagram().id("L").index].parents = {VarId{0}};
    CHECK_FALSE(validate_cbn(wrong_parents).ok());
}
