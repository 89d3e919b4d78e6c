#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "core/rng.hpp"
#include "core/space.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <vector>

using namespace marlab;

namespace {

DataSpace two_binary() {
    return DataSpace({Variable{"y1", {0, 1}}, Variable{"y2", {0, 1}}});
}

DataSpace mixed_levels() {
    return DataSpace({Variable{"y1", {0, 1}}, Variable{"y2", {0, 1, 2}}});
}

}  // namespace

TEST_CASE("product space enumerates values canonically") {
    DataSpace space = mixed_levels();
    CHECK(space.arity() == 2);
    CHECK(space.value_count() == 6);
    // Variable 0 most significant, levels in declared order.
    CHECK(space.value_at(0) == std::vector<int>{0, 0});
    CHECK(space.value_at(1) == std::vector<int>{0, 1});
    CHECK(space.value_at(2) == std::vector<int>{0, 2});
    CHECK(space.value_at(3) == std::vector<int>{1, 0});
    CHECK(space.value_at(5) == std::vector<int>{1, 2});
    for (std::size_t i = 0; i < space.value_count(); ++i)
        CHECK(space.index_of(space.value_at(i)) == i);
}

TEST_CASE("level codes need not be contiguous") {
    DataSpace space({Variable{"dose", {2, 5, 9}}});
    CHECK(space.value_count() == 3);
    CHECK(space.value_at(1) == std::vector<int>{5});
    CHECK(space.contains(std::vector<int>{9}));
    CHECK(!space.contains(std::vector<int>{3}));
    CHECK_THROWS_AS(space.index_of(std::vector<int>{3}), Error);
}

TEST_CASE("variable lookup by name") {
    DataSpace space = two_binary();
    CHECK(space.variable_index("y2") == 1);
    CHECK(!space.variable_index("y9"));
}

TEST_CASE("pattern parse and projections") {
    MissingnessPattern r = MissingnessPattern::parse("101");
    CHECK(r.size() == 3);
    CHECK(r.observed(0));
    CHECK(!r.observed(1));
    CHECK(r.observed_count() == 2);
    CHECK(r.observed_indices() == std::vector<std::size_t>{0, 2});
    CHECK(r.missing_indices() == std::vector<std::size_t>{1});
    CHECK(r.str() == "101");
    CHECK_THROWS_AS(MissingnessPattern::parse("1x0"), Error);
    CHECK(MissingnessPattern::all_ones(2).is_all_ones());
    CHECK(MissingnessPattern::all_zeros(2).is_all_zeros());
}

TEST_CASE("observed plus missing projections rebuild the vector") {
    DataSpace space = mixed_levels();
    std::vector<MissingnessPattern> patterns = {
        MissingnessPattern::parse("11"), MissingnessPattern::parse("10"),
        MissingnessPattern::parse("01"), MissingnessPattern::parse("00")};
    for (const auto& r : patterns) {
        for (std::size_t i = 0; i < space.value_count(); ++i) {
            std::vector<int> y = space.value_at(i);
            std::vector<int> ob = project_observed(y, r);
            std::vector<int> mi = project_missing(y, r);
            CHECK(ob.size() + mi.size() == y.size());
            CHECK(merge_projections(ob, mi, r) == y);
        }
    }
}

TEST_CASE("pattern set wants the complete-case pattern first") {
    std::vector<MissingnessPattern> ok = {MissingnessPattern::parse("11"),
                                          MissingnessPattern::parse("01")};
    PatternSet set(ok);
    CHECK(set.size() == 2);
    CHECK(set.index_of(MissingnessPattern::parse("01")) == 1);
    CHECK(!set.index_of(MissingnessPattern::parse("10")));

    CHECK_THROWS_AS(PatternSet({MissingnessPattern::parse("01")}), Error);
    CHECK_THROWS_AS(PatternSet({MissingnessPattern::parse("11"), MissingnessPattern::parse("11")}),
                    Error);
    CHECK_THROWS_AS(PatternSet({MissingnessPattern::parse("11"), MissingnessPattern::parse("011")}),
                    Error);
}

TEST_CASE("ob equivalence matches pattern and observed projection") {
    Point a{{0, 0}, MissingnessPattern::parse("10")};
    Point b{{0, 1}, MissingnessPattern::parse("10")};
    Point c{{1, 0}, MissingnessPattern::parse("10")};
    Point d{{0, 0}, MissingnessPattern::parse("11")};
    CHECK(ob_equivalent(a, b));   // same pattern, same observed y1
    CHECK(!ob_equivalent(a, c));  // observed y1 differs
    CHECK(!ob_equivalent(a, d));  // pattern differs
}

TEST_CASE("ob equivalence is an equivalence relation on sampled triples") {
    DataSpace space = mixed_levels();
    PatternSet patterns({MissingnessPattern::parse("11"), MissingnessPattern::parse("10"),
                         MissingnessPattern::parse("00")});
    std::vector<Point> points;
    for (std::size_t yi = 0; yi < space.value_count(); ++yi)
        for (std::size_t ri = 0; ri < patterns.size(); ++ri)
            points.push_back(Point{space.value_at(yi), patterns.at(ri)});

    SplitMix64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const Point& a = points[rng.below(points.size())];
        const Point& b = points[rng.below(points.size())];
        const Point& c = points[rng.below(points.size())];
        CHECK(ob_equivalent(a, a));
        CHECK(ob_equivalent(a, b) == ob_equivalent(b, a));
        if (ob_equivalent(a, b) && ob_equivalent(b, c)) CHECK(ob_equivalent(a, c));
    }
}

TEST_CASE("events partition the full space") {
    DataSpace space = mixed_levels();
    PatternSet patterns({MissingnessPattern::parse("11"), MissingnessPattern::parse("10"),
                         MissingnessPattern::parse("01"), MissingnessPattern::parse("00")});
    std::vector<ObservableDataEvent> events = enumerate_events(space, patterns);

    // One event per (pattern, observed assignment): 6 + 2 + 3 + 1.
    CHECK(events.size() == 12);

    std::size_t total_members = 0;
    std::map<std::pair<std::size_t, std::string>, int> seen;  // (y index, pattern) -> count
    for (const auto& e : events) {
        CHECK(!e.members.empty());
        total_members += e.members.size();
        for (const Point& p : e.members) {
            CHECK(p.r == e.pattern);
            for (const auto& [idx, code] : e.observed_values) CHECK(p.y[idx] == code);
            seen[{space.index_of(p.y), p.r.str()}] += 1;
        }
    }
    CHECK(total_members == space.value_count() * patterns.size());
    for (const auto& [key, count] : seen) CHECK(count == 1);
}

TEST_CASE("event members agree with the equivalence relation") {
    DataSpace space = two_binary();
    PatternSet patterns({MissingnessPattern::parse("11"), MissingnessPattern::parse("01")});
    for (const auto& e : enumerate_events(space, patterns)) {
        for (std::size_t yi = 0; yi < space.value_count(); ++yi) {
            Point p{space.value_at(yi), e.pattern};
            const bool member =
                std::find(e.members.begin(), e.members.end(), p) != e.members.end();
            CHECK(member == ob_equivalent(p, e.members.front()));
        }
    }
}

TEST_CASE("observable_event finds the class of a point") {
    DataSpace space = two_binary();
    PatternSet patterns({MissingnessPattern::parse("11"), MissingnessPattern::parse("10")});
    Point p{{0, 1}, MissingnessPattern::parse("10")};
    ObservableDataEvent e = observable_event(space, patterns, p);
    CHECK(e.pattern == p.r);
    CHECK(e.observed_values == std::map<std::size_t, int>{{0, 0}});
    REQUIRE(e.members.size() == 2);
    CHECK(e.members[0].y == std::vector<int>{0, 0});
    CHECK(e.members[1].y == std::vector<int>{0, 1});

    Point bad{{0, 1}, MissingnessPattern::parse("01")};
    CHECK_THROWS_AS(observable_event(space, patterns, bad), Error);
}

TEST_CASE("formatting helpers") {
    DataSpace space = two_binary();
    Point p{{1, 0}, MissingnessPattern::parse("10")};
    CHECK(format_values(p.y) == "(1,0)");
    CHECK(format_point(p) == "(y=(1,0), r=10)");
    CHECK(describe_pattern(space, p.r) == "observed: y1; missing: y2");

    PatternSet patterns({MissingnessPattern::parse("11"), MissingnessPattern::parse("10"),
                         MissingnessPattern::parse("00")});
    auto events = enumerate_events(space, patterns);
    CHECK(describe_event(space, events[0]) == "pattern 11, y1=0, y2=0");
    CHECK(describe_event(space, events.back()) == "pattern 00, nothing observed");
}
