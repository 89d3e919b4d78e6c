#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "core/mar.hpp"
#include "core/mechanisms.hpp"

#include <functional>
#include <optional>
#include <set>
#include <vector>

using namespace marlab;

namespace {

DataSpace two_binary() {
    return DataSpace({Variable{"y1", {0, 1}}, Variable{"y2", {0, 1}}});
}

PatternSet complete_and_first() {
    return PatternSet({MissingnessPattern::parse("11"), MissingnessPattern::parse("10")});
}

/// Builds a total mechanism from a row function y -> probabilities over
/// the pattern set.
Mechanism mechanism_from(const DataSpace& space, const PatternSet& patterns,
                         const std::function<std::vector<Rational>(const std::vector<int>&)>& row) {
    std::vector<Rational> table;
    table.reserve(space.value_count() * patterns.size());
    for (std::size_t yi = 0; yi < space.value_count(); ++yi) {
        for (const Rational& v : row(space.value_at(yi))) table.push_back(v);
    }
    return Mechanism::total(space, patterns, table);
}

/// g(10|y) = (1 + 2 y2) / 10: varies with the coordinate that pattern 10
/// does not observe, so the y1=0 event is not MAR.
Mechanism mechanism_varying_in_missing() {
    return mechanism_from(two_binary(), complete_and_first(), [](const std::vector<int>& y) {
        Rational p(1 + 2 * y[1], 10);
        return std::vector<Rational>{Rational(1) - p, p};
    });
}

/// g(10|y) = (1 + 2 y1) / 10: depends only on the coordinate pattern 10
/// observes, so the mechanism is everywhere MAR.
Mechanism mechanism_varying_in_observed() {
    return mechanism_from(two_binary(), complete_and_first(), [](const std::vector<int>& y) {
        Rational p(1 + 2 * y[0], 10);
        return std::vector<Rational>{Rational(1) - p, p};
    });
}

ObservableDataEvent event_of(const Mechanism& g, const Point& p) {
    return observable_event(g.space(), g.patterns(), p);
}

}  // namespace

TEST_CASE("restriction range of a constant mechanism is a singleton") {
    DataSpace space = two_binary();
    PatternSet patterns({MissingnessPattern::parse("11"), MissingnessPattern::parse("00")});
    Mechanism g = make_constant(space, patterns, {Rational(3, 4), Rational(1, 4)});
    ObservableDataEvent e = event_of(g, Point{{0, 0}, MissingnessPattern::parse("00")});
    CHECK(e.members.size() == 4);
    RestrictionRange range = restriction_range(g, e);
    CHECK(range.values == std::set<Rational>{Rational(1, 4)});
    CHECK(range.undefined_members == 0);
}

TEST_CASE("restriction range of the two-member textbook event") {
    Mechanism g = mechanism_varying_in_missing();
    ObservableDataEvent e = event_of(g, Point{{0, 0}, MissingnessPattern::parse("10")});
    RestrictionRange range = restriction_range(g, e);
    CHECK(range.values == std::set<Rational>{Rational(1, 10), Rational(3, 10)});
    REQUIRE(range.per_point.size() == 2);
    CHECK(*range.per_point[0].second == Rational(1, 10));
    CHECK(*range.per_point[1].second == Rational(3, 10));
}

TEST_CASE("complete-case events have singleton ranges") {
    Mechanism g = mechanism_varying_in_missing();
    ObservableDataEvent e = event_of(g, Point{{1, 1}, MissingnessPattern::parse("11")});
    CHECK(e.members.size() == 1);
    CHECK(restriction_range(g, e).values.size() == 1);
}

TEST_CASE("sup and inf of the restricted range") {
    Mechanism g = mechanism_varying_in_missing();
    ObservableDataEvent e = event_of(g, Point{{0, 0}, MissingnessPattern::parse("10")});
    CHECK(p_r_given_yobs(g, e, RangeMode::Sup) == Rational(3, 10));
    CHECK(p_r_given_yobs(g, e, RangeMode::Inf) == Rational(1, 10));

    DataSpace space = two_binary();
    PatternSet patterns({MissingnessPattern::parse("11"), MissingnessPattern::parse("00")});
    Mechanism constant = make_constant(space, patterns, {Rational(3, 4), Rational(1, 4)});
    ObservableDataEvent all = event_of(constant, Point{{0, 0}, MissingnessPattern::parse("00")});
    CHECK(p_r_given_yobs(constant, all, RangeMode::Sup) ==
          p_r_given_yobs(constant, all, RangeMode::Inf));
}

TEST_CASE("realized MAR verdicts carry checkable witnesses") {
    Mechanism g = mechanism_varying_in_missing();
    ObservableDataEvent bad = event_of(g, Point{{0, 0}, MissingnessPattern::parse("10")});
    MarVerdict verdict = is_realized_mar(g, bad);
    CHECK(verdict.kind == MarVerdict::Kind::NotMar);
    CHECK(!verdict.mar());
    REQUIRE(verdict.witness);
    CHECK(ob_equivalent(verdict.witness->first, verdict.witness->second));
    CHECK(g.at(verdict.witness->first) != g.at(verdict.witness->second));
    REQUIRE(verdict.witness_values);
    CHECK(verdict.witness_values->first == Rational(1, 10));
    CHECK(verdict.witness_values->second == Rational(3, 10));

    ObservableDataEvent single = event_of(g, Point{{0, 1}, MissingnessPattern::parse("11")});
    CHECK(is_realized_mar(g, single).mar());
}

TEST_CASE("realized MAR agrees with a brute-force pair scan") {
    for (Mechanism g : {mechanism_varying_in_missing(), mechanism_varying_in_observed()}) {
        for (const auto& e : enumerate_events(g.space(), g.patterns())) {
            bool constant = true;
            for (std::size_t i = 0; i < e.members.size(); ++i)
                for (std::size_t j = i + 1; j < e.members.size(); ++j)
                    if (g.at(e.members[i]) != g.at(e.members[j])) constant = false;
            CHECK(is_realized_mar(g, e).mar() == constant);
        }
    }
}

TEST_CASE("witness is the lexicographically smallest differing pair") {
    DataSpace space({Variable{"y1", {0, 1, 2}}});
    PatternSet patterns({MissingnessPattern::parse("1"), MissingnessPattern::parse("0")});
    // On the all-missing event the first two members agree; the third differs.
    Mechanism g = mechanism_from(space, patterns, [](const std::vector<int>& y) {
        Rational p = y[0] == 2 ? Rational(1, 2) : Rational(1, 4);
        return std::vector<Rational>{Rational(1) - p, p};
    });
    ObservableDataEvent e = event_of(g, Point{{0}, MissingnessPattern::parse("0")});
    EventClassification c = classify_event(g, e);
    CHECK(c.status == EventMarStatus::NotMar);
    REQUIRE(c.witness);
    CHECK(c.witness->first.y == std::vector<int>{0});
    CHECK(c.witness->second.y == std::vector<int>{2});
}

TEST_CASE("everywhere MAR for constant and observed-dependent mechanisms") {
    DataSpace space = two_binary();
    PatternSet patterns = complete_and_first();
    Mechanism mcar = make_constant(space, patterns, {Rational(4, 5), Rational(1, 5)});
    CHECK(is_everywhere_mar(mcar).kind == MarVerdict::Kind::EverywhereMar);
    CHECK(is_everywhere_mar(mechanism_varying_in_observed()).kind ==
          MarVerdict::Kind::EverywhereMar);

    MarVerdict verdict = is_everywhere_mar(mechanism_varying_in_missing());
    CHECK(verdict.kind == MarVerdict::Kind::NotMar);
    REQUIRE(verdict.event);
    CHECK(verdict.event->pattern == MissingnessPattern::parse("10"));
    CHECK(verdict.event->observed_values == std::map<std::size_t, int>{{0, 0}});
}

TEST_CASE("zero-mass events are excluded and reported, not guessed") {
    DataSpace space({Variable{"y1", {0, 1}}});
    PatternSet patterns({MissingnessPattern::parse("1"), MissingnessPattern::parse("0")});
    // All mass on y1 = 1, so the factorized mechanism is undefined at y1 = 0.
    FullDensity h = FullDensity::from_table(
        space, patterns, {Rational(0), Rational(0), Rational(1, 2), Rational(1, 2)});
    Mechanism g = selection_factorize(h).mechanism;

    ObservableDataEvent dead = event_of(g, Point{{0}, MissingnessPattern::parse("1")});
    CHECK(classify_event(g, dead).status == EventMarStatus::ZeroMassExcluded);
    CHECK(restriction_range_defined(g, dead).values.empty());
    CHECK_THROWS_AS(restriction_range(g, dead), Error);
    CHECK_THROWS_AS(is_realized_mar(g, dead), Error);

    // The all-missing event has one defined and one undefined member.
    ObservableDataEvent partial = event_of(g, Point{{0}, MissingnessPattern::parse("0")});
    EventClassification c = classify_event(g, partial);
    CHECK(c.status == EventMarStatus::Mar);
    CHECK(c.excluded_members == 1);

    MarVerdict verdict = is_everywhere_mar(g);
    CHECK(verdict.kind == MarVerdict::Kind::EverywhereMar);
    CHECK(verdict.excluded_events.size() == 1);
    CHECK(verdict.excluded_events[0].pattern == MissingnessPattern::parse("1"));
}

TEST_CASE("observed mechanism collapses a MAR mechanism without loss") {
    Mechanism g = mechanism_varying_in_observed();
    ObservedMechanism om = observed_mechanism(g, RangeMode::Sup);
    REQUIRE(om.events.size() == om.values.size());
    for (std::size_t i = 0; i < om.events.size(); ++i) {
        REQUIRE(om.values[i].has_value());
        for (const Point& p : om.events[i].members) CHECK(g.at(p) == *om.values[i]);
    }
}

TEST_CASE("sup and inf tables differ exactly on the non-MAR events") {
    Mechanism g = mechanism_varying_in_missing();
    ObservedMechanism sup = observed_mechanism(g, RangeMode::Sup);
    ObservedMechanism inf = observed_mechanism(g, RangeMode::Inf);
    REQUIRE(sup.events.size() == inf.events.size());
    for (std::size_t i = 0; i < sup.events.size(); ++i) {
        const bool mar = classify_event(g, sup.events[i]).status == EventMarStatus::Mar;
        CHECK((*sup.values[i] == *inf.values[i]) == mar);
    }
}

TEST_CASE("MCAR observed mechanism is constant in the observed assignment") {
    DataSpace space = two_binary();
    PatternSet patterns = complete_and_first();
    Mechanism g = make_constant(space, patterns, {Rational(2, 3), Rational(1, 3)});
    ObservedMechanism om = observed_mechanism(g, RangeMode::Sup);
    for (std::size_t i = 0; i < om.events.size(); ++i) {
        const Rational expected =
            om.events[i].pattern == MissingnessPattern::parse("11") ? Rational(2, 3)
                                                                    : Rational(1, 3);
        CHECK(*om.values[i] == expected);
    }
}

TEST_CASE("observed mechanism lookup by pattern and assignment") {
    Mechanism g = mechanism_varying_in_missing();
    ObservedMechanism om = observed_mechanism(g, RangeMode::Sup);
    auto v = om.value_for(MissingnessPattern::parse("10"), {{0, 0}});
    REQUIRE(v);
    CHECK(*v == Rational(3, 10));
    CHECK(!om.value_for(MissingnessPattern::parse("01"), {{1, 0}}));
}

TEST_CASE("standard equation coincides with realized MAR in both modes") {
    for (Mechanism g : {mechanism_varying_in_missing(), mechanism_varying_in_observed()}) {
        for (const auto& e : enumerate_events(g.space(), g.patterns())) {
            const bool mar = is_realized_mar(g, e).mar();
            CHECK(standard_equation_holds(g, e, RangeMode::Sup) == mar);
            CHECK(standard_equation_holds(g, e, RangeMode::Inf) == mar);
            CHECK((restriction_range(g, e).values.size() == 1) == mar);
        }
    }
}

TEST_CASE("drawn-at-random and shape hold on every positive event of a MAR model") {
    Mechanism g = mechanism_varying_in_observed();
    SelectionModel sm{{Rational(1, 8), Rational(3, 8), Rational(1, 4), Rational(1, 4)}, g};
    FullDensity h = recompose(sm);
    for (const auto& e : enumerate_events(h.space(), h.patterns())) {
        CHECK(drawn_at_random_check(h, e));
        CHECK(shape_proportionality_check(h, e));
        CHECK(!shape_witness_indices(h, e));
    }
}

TEST_CASE("drawn-at-random and shape fail on the perturbed event of an MNAR model") {
    Mechanism g = mechanism_varying_in_missing();
    SelectionModel sm{{Rational(1, 4), Rational(1, 4), Rational(1, 4), Rational(1, 4)}, g};
    FullDensity h = recompose(sm);
    ObservableDataEvent bad =
        observable_event(h.space(), h.patterns(), Point{{0, 0}, MissingnessPattern::parse("10")});
    CHECK(!drawn_at_random_check(h, bad));
    CHECK(!shape_proportionality_check(h, bad));
    auto witness = shape_witness_indices(h, bad);
    REQUIRE(witness);
    CHECK(witness->first == 0);
    CHECK(witness->second == 1);
}

TEST_CASE("the two implementations agree event by event") {
    DataSpace space = two_binary();
    PatternSet patterns = complete_and_first();
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        GeneratorOptions opts{seed, 16};
        FullDensity h = random_density(space, patterns, opts, true);
        for (const auto& e : enumerate_events(space, patterns)) {
            CHECK(drawn_at_random_check(h, e) == shape_proportionality_check(h, e));
        }
    }
}

TEST_CASE("realized MAR implies drawn-at-random for any positive marginal") {
    Mechanism g = mechanism_varying_in_observed();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SplitMix64 rng(seed);
        SelectionModel sm{random_positive_marginal(g.space(), rng, 32), g};
        FullDensity h = recompose(sm);
        for (const auto& e : enumerate_events(g.space(), g.patterns())) {
            if (is_realized_mar(g, e).mar()) CHECK(drawn_at_random_check(h, e));
        }
    }
}

TEST_CASE("zero-probability events are rejected by the conditional checks") {
    DataSpace space({Variable{"y1", {0, 1}}});
    PatternSet patterns({MissingnessPattern::parse("1"), MissingnessPattern::parse("0")});
    FullDensity h = FullDensity::from_table(
        space, patterns, {Rational(1, 2), Rational(0), Rational(1, 2), Rational(0)});
    ObservableDataEvent dead =
        observable_event(space, patterns, Point{{0}, MissingnessPattern::parse("0")});
    CHECK_THROWS_AS(drawn_at_random_check(h, dead), Error);
    CHECK_THROWS_AS(shape_proportionality_check(h, dead), Error);
}

TEST_CASE("members with zero marginal mass satisfy the identity vacuously") {
    DataSpace space({Variable{"y1", {0, 1, 2}}});
    PatternSet patterns({MissingnessPattern::parse("1"), MissingnessPattern::parse("0")});
    // y1 = 2 carries no mass; the all-missing event still passes because
    // both sides of the identity vanish there.
    FullDensity h = FullDensity::from_table(
        space, patterns,
        {Rational(1, 4), Rational(1, 4), Rational(1, 4), Rational(1, 4), Rational(0),
         Rational(0)});
    ObservableDataEvent e =
        observable_event(space, patterns, Point{{0}, MissingnessPattern::parse("0")});
    CHECK(drawn_at_random_check(h, e));
    CHECK(shape_proportionality_check(h, e));
}

TEST_CASE("shape constant is one for the uniform density") {
    DataSpace space = two_binary();
    PatternSet patterns = complete_and_first();
    const std::size_t slots = space.value_count() * patterns.size();
    FullDensity h = FullDensity::from_table(
        space, patterns, std::vector<Rational>(slots, Rational(1, static_cast<long>(slots))));
    for (const auto& e : enumerate_events(space, patterns)) {
        auto c = shape_constant(h, e);
        REQUIRE(c);
        CHECK(*c == Rational(1));
    }
}

TEST_CASE("reconstruction is exact exactly for MAR inputs") {
    SUBCASE("everywhere MAR round trip") {
        Mechanism g = mechanism_varying_in_observed();
        SelectionModel sm{{Rational(1, 8), Rational(1, 8), Rational(3, 8), Rational(3, 8)}, g};
        FullDensity h = recompose(sm);
        ObservedMechanism om = observed_mechanism(g, RangeMode::Sup);
        CHECK(reconstruct_full(marginal_y(h), om) == h);
        ObservedMechanism om_inf = observed_mechanism(g, RangeMode::Inf);
        CHECK(reconstruct_full(marginal_y(h), om_inf) == h);
    }
    SUBCASE("MCAR round trip with a per-pattern-constant table") {
        DataSpace space = two_binary();
        PatternSet patterns = complete_and_first();
        Mechanism g = make_constant(space, patterns, {Rational(5, 6), Rational(1, 6)});
        SelectionModel sm{{Rational(1, 4), Rational(1, 4), Rational(1, 4), Rational(1, 4)}, g};
        FullDensity h = recompose(sm);
        CHECK(reconstruct_full(marginal_y(h), observed_mechanism(g, RangeMode::Sup)) == h);
    }
    SUBCASE("MNAR mismatch is detected") {
        Mechanism g = mechanism_varying_in_missing();
        SelectionModel sm{{Rational(1, 4), Rational(1, 4), Rational(1, 4), Rational(1, 4)}, g};
        FullDensity h = recompose(sm);
        FullDensity rebuilt =
            reconstruct_full(marginal_y(h), observed_mechanism(g, RangeMode::Sup));
        CHECK(rebuilt != h);
        // The sup collapse inflates the non-constant row, so mass exceeds 1.
        CHECK(!validate(rebuilt).valid());
    }
}

TEST_CASE("dependence support finds exactly the toggling coordinates") {
    DataSpace space = two_binary();
    PatternSet patterns = complete_and_first();
    Mechanism mcar = make_constant(space, patterns, {Rational(1, 2), Rational(1, 2)});
    CHECK(dependence_support(mcar, MissingnessPattern::parse("11")).empty());
    CHECK(dependence_support(mcar, MissingnessPattern::parse("10")).empty());

    Mechanism mar = mechanism_varying_in_observed();
    CHECK(dependence_support(mar, MissingnessPattern::parse("10")) ==
          std::set<std::size_t>{0});

    Mechanism mnar = mechanism_varying_in_missing();
    std::set<std::size_t> support = dependence_support(mnar, MissingnessPattern::parse("10"));
    CHECK(support.count(1) == 1);
}

TEST_CASE("everywhere MAR iff dependence support stays observed") {
    for (Mechanism g : {mechanism_varying_in_missing(), mechanism_varying_in_observed(),
                        make_constant(two_binary(), complete_and_first(),
                                      {Rational(1, 3), Rational(2, 3)})}) {
        bool contained = true;
        for (const auto& r : g.patterns().patterns()) {
            for (std::size_t i : dependence_support(g, r)) {
                if (!r.observed(i)) contained = false;
            }
        }
        CHECK(contained == is_everywhere_mar(g).mar());
    }
}

TEST_CASE("normalization coupling: rows re-sum to one wherever g varies") {
    Mechanism g = mechanism_varying_in_observed();
    const DataSpace& space = g.space();
    for (std::size_t a = 0; a < space.value_count(); ++a) {
        for (std::size_t b = a + 1; b < space.value_count(); ++b) {
            Rational sum_a, sum_b;
            for (std::size_t ri = 0; ri < g.patterns().size(); ++ri) {
                sum_a += g.at(a, ri);
                sum_b += g.at(b, ri);
            }
            CHECK(sum_a == Rational(1));
            CHECK(sum_b == Rational(1));
            // Any change in one pattern's probability is offset exactly
            // by the remaining patterns.
            Rational delta0 = g.at(a, 0) - g.at(b, 0);
            Rational delta1 = g.at(a, 1) - g.at(b, 1);
            CHECK(delta0 + delta1 == Rational(0));
        }
    }
}

TEST_CASE("family MAR requires every member to be MAR on the event") {
    DataSpace space = two_binary();
    PatternSet patterns = complete_and_first();
    auto density_for = [&](const Mechanism& g) {
        SelectionModel sm{{Rational(1, 4), Rational(1, 4), Rational(1, 4), Rational(1, 4)}, g};
        return recompose(sm);
    };
    FullDensity mcar_a = density_for(make_constant(space, patterns, {Rational(1, 2), Rational(1, 2)}));
    FullDensity mcar_b = density_for(make_constant(space, patterns, {Rational(2, 3), Rational(1, 3)}));
    FullDensity mnar = density_for(mechanism_varying_in_missing());

    ObservableDataEvent e =
        observable_event(space, patterns, Point{{0, 0}, MissingnessPattern::parse("10")});

    DensityFamily all_mcar("mcar pair", {{"a", mcar_a}, {"b", mcar_b}});
    FamilyMarResult good = family_mar(all_mcar, e);
    CHECK(good.all_mar);
    CHECK(!good.offending_member);

    DensityFamily mixed("mixed", {{"mar", mcar_a}, {"mnar", mnar}});
    FamilyMarResult bad = family_mar(mixed, e);
    CHECK(!bad.all_mar);
    REQUIRE(bad.offending_member);
    CHECK(*bad.offending_member == "mnar");
    REQUIRE(bad.witness);
    CHECK(ob_equivalent(bad.witness->first, bad.witness->second));

    DensityFamily single("single", {{"only", mnar}});
    CHECK(family_mar(single, e).all_mar ==
          is_realized_mar(selection_factorize(mnar).mechanism, e).mar());
}
