#include "core/mar.hpp"

#include <algorithm>
#include <sstream>

namespace marlab {

namespace {

// Validation helper shared by the checks that need h up front.
void require_valid_density(const FullDensity& h, const char* op) {
    ValidationReport report = validate(h);
    if (report.valid()) return;
    std::ostringstream msg;
    msg << op << ": density is not valid";
    for (const auto& problem : report.problems) msg << "; " << problem;
    throw Error(msg.str());
}

Rational event_mass(const FullDensity& h, const ObservableDataEvent& e) {
    Rational total;
    for (const Point& p : e.members) total += h.prob(p);
    return total;
}

}  // namespace

RestrictionRange restriction_range(const Mechanism& g, const ObservableDataEvent& e) {
    RestrictionRange range;
    range.event = e;
    for (const Point& p : e.members) {
        std::optional<Rational> value = g.maybe_at(p);
        if (!value) {
            throw Error("restriction_range: mechanism undefined at " + format_point(p) +
                        ", a member of the event");
        }
        range.values.insert(*value);
        range.per_point.emplace_back(p, std::move(value));
    }
    return range;
}

RestrictionRange restriction_range_defined(const Mechanism& g, const ObservableDataEvent& e) {
    RestrictionRange range;
    range.event = e;
    for (const Point& p : e.members) {
        std::optional<Rational> value = g.maybe_at(p);
        if (value) {
            range.values.insert(*value);
        } else {
            ++range.undefined_members;
        }
        range.per_point.emplace_back(p, std::move(value));
    }
    return range;
}

Rational p_r_given_yobs(const Mechanism& g, const ObservableDataEvent& e, RangeMode mode) {
    RestrictionRange range = restriction_range_defined(g, e);
    if (range.values.empty()) {
        throw Error("p_r_given_yobs: mechanism undefined on the whole event (zero-mass event); "
                    "no value to report");
    }
    // std::set orders ascending, so the extremes sit at the ends.
    return mode == RangeMode::Sup ? *range.values.rbegin() : *range.values.begin();
}

EventClassification classify_event(const Mechanism& g, const ObservableDataEvent& e) {
    EventClassification result;
    result.status = EventMarStatus::ZeroMassExcluded;

    // The witness must be canonical: members come in canonical order, so
    // the first defined member plus the first later member disagreeing
    // with it is the lexicographically smallest differing pair.
    const Point* first_point = nullptr;
    std::optional<Rational> first_value;
    for (const Point& p : e.members) {
        std::optional<Rational> value = g.maybe_at(p);
        if (!value) {
            ++result.excluded_members;
            continue;
        }
        if (!first_value) {
            first_point = &p;
            first_value = std::move(value);
            result.status = EventMarStatus::Mar;
            continue;
        }
        if (*value != *first_value) {
            result.status = EventMarStatus::NotMar;
            result.witness = std::make_pair(*first_point, p);
            result.witness_values = std::make_pair(*first_value, *value);
            break;
        }
    }
    return result;
}

MarVerdict is_realized_mar(const Mechanism& g, const ObservableDataEvent& e) {
    EventClassification c = classify_event(g, e);
    if (c.status == EventMarStatus::ZeroMassExcluded) {
        throw Error("is_realized_mar: mechanism undefined on the whole event (zero-mass event); "
                    "constancy is undecidable there");
    }
    MarVerdict verdict;
    verdict.kind = c.status == EventMarStatus::Mar ? MarVerdict::Kind::RealizedMar
                                                   : MarVerdict::Kind::NotMar;
    verdict.event = e;
    verdict.witness = c.witness;
    verdict.witness_values = c.witness_values;
    verdict.excluded_members = c.excluded_members;
    return verdict;
}

MarVerdict is_everywhere_mar(const Mechanism& g) {
    MarVerdict verdict;
    verdict.kind = MarVerdict::Kind::EverywhereMar;
    for (const ObservableDataEvent& e : enumerate_events(g.space(), g.patterns())) {
        EventClassification c = classify_event(g, e);
        verdict.excluded_members += c.excluded_members;
        if (c.status == EventMarStatus::ZeroMassExcluded) {
            verdict.excluded_events.push_back(e);
            continue;
        }
        if (c.status == EventMarStatus::NotMar) {
            verdict.kind = MarVerdict::Kind::NotMar;
            verdict.event = e;
            verdict.witness = c.witness;
            verdict.witness_values = c.witness_values;
            return verdict;
        }
    }
    return verdict;
}

std::optional<Rational> ObservedMechanism::value_for(
    const MissingnessPattern& pattern, const std::map<std::size_t, int>& observed_values) const {
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (events[i].pattern == pattern && events[i].observed_values == observed_values) {
            return values[i];
        }
    }
    return std::nullopt;
}

ObservedMechanism observed_mechanism(const Mechanism& g, RangeMode mode) {
    ObservedMechanism om{mode, g.space(), g.patterns(), enumerate_events(g.space(), g.patterns()), {}};
    om.values.reserve(om.events.size());
    for (const ObservableDataEvent& e : om.events) {
        RestrictionRange range = restriction_range_defined(g, e);
        if (range.values.empty()) {
            om.values.emplace_back(std::nullopt);
        } else {
            om.values.emplace_back(mode == RangeMode::Sup ? *range.values.rbegin()
                                                          : *range.values.begin());
        }
    }
    return om;
}

bool standard_equation_holds(const Mechanism& g, const ObservableDataEvent& e, RangeMode mode) {
    RestrictionRange range = restriction_range_defined(g, e);
    if (range.values.empty()) {
        throw Error("standard_equation_holds: mechanism undefined on the whole event "
                    "(zero-mass event)");
    }
    Rational eventwise =
        mode == RangeMode::Sup ? *range.values.rbegin() : *range.values.begin();
    for (const auto& [point, value] : range.per_point) {
        if (value && *value != eventwise) return false;
    }
    return true;
}

bool drawn_at_random_check(const FullDensity& h, const ObservableDataEvent& e) {
    require_valid_density(h, "drawn_at_random_check");
    Rational event_p = event_mass(h, e);
    if (event_p.is_zero()) {
        throw Error("drawn_at_random_check: event has probability zero; "
                    "the conditional is undefined there");
    }
    std::vector<Rational> f = marginal_y(h);
    Rational event_f;
    for (const Point& p : e.members) event_f += f[h.space().index_of(p.y)];
    // Cross-multiplied form of h(y,r)/P(event) == f(y)/F(event), exact.
    for (const Point& p : e.members) {
        if (h.prob(p) * event_f != f[h.space().index_of(p.y)] * event_p) return false;
    }
    return true;
}

bool shape_proportionality_check(const FullDensity& h, const ObservableDataEvent& e) {
    return !shape_witness_indices(h, e);
}

std::optional<std::pair<std::size_t, std::size_t>> shape_witness_indices(
    const FullDensity& h, const ObservableDataEvent& e) {
    require_valid_density(h, "shape_proportionality_check");
    Rational event_p = event_mass(h, e);
    if (event_p.is_zero()) {
        throw Error("shape_proportionality_check: event has probability zero; "
                    "the mixture component is undefined there");
    }
    std::vector<Rational> f = marginal_y(h);
    // p(y|r) restricted to the event is proportional to f iff every 2x2
    // minor of the two value rows vanishes; p(r) scales one row and so
    // drops out of the cross-multiplication.
    const std::vector<Point>& pts = e.members;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        Rational hi = h.prob(pts[i]);
        const Rational& fi = f[h.space().index_of(pts[i].y)];
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            Rational hj = h.prob(pts[j]);
            const Rational& fj = f[h.space().index_of(pts[j].y)];
            if (hi * fj != hj * fi) return std::make_pair(i, j);
        }
    }
    return std::nullopt;
}

std::optional<Rational> shape_constant(const FullDensity& h, const ObservableDataEvent& e) {
    if (!shape_proportionality_check(h, e)) return std::nullopt;
    std::vector<Rational> f = marginal_y(h);
    std::vector<Rational> pr = marginal_r(h);
    const auto r_index = h.patterns().index_of(e.pattern);
    if (!r_index) throw Error("shape_constant: pattern " + e.pattern.str() + " is not in the pattern set");
    const Rational& pattern_mass = pr[*r_index];
    // Positive event mass implies positive pattern mass, so the mixture
    // component exists; any member with f > 0 pins the constant.
    for (const Point& p : e.members) {
        const Rational& fy = f[h.space().index_of(p.y)];
        if (!fy.is_zero()) return h.prob(p) / (fy * pattern_mass);
    }
    return std::nullopt;  // unreachable: event mass positive forces some f > 0
}

FullDensity reconstruct_full(const std::vector<Rational>& f, const ObservedMechanism& om) {
    if (f.size() != om.space.value_count()) {
        throw Error("reconstruct_full: marginal has " + std::to_string(f.size()) +
                    " entries; the space has " + std::to_string(om.space.value_count()) +
                    " values");
    }
    Rational mass;
    for (const Rational& v : f) {
        if (!v.is_probability()) {
            throw Error("reconstruct_full: marginal entry " + v.str() + " is outside [0, 1]");
        }
        mass += v;
    }
    if (mass != Rational(1)) {
        throw Error("reconstruct_full: marginal sums to " + mass.str() + "; must sum to 1");
    }

    std::size_t k = om.patterns.size();
    std::vector<std::optional<Rational>> table(om.space.value_count() * k);
    // Events partition the space, so this fills every slot exactly once.
    for (std::size_t i = 0; i < om.events.size(); ++i) {
        const ObservableDataEvent& e = om.events[i];
        const auto r_index = om.patterns.index_of(e.pattern);
        if (!r_index) {
            throw Error("reconstruct_full: pattern " + e.pattern.str() +
                        " is not in the pattern set");
        }
        for (const Point& p : e.members) {
            const Rational& fy = f[om.space.index_of(p.y)];
            if (!om.values[i]) {
                if (!fy.is_zero()) {
                    throw Error("reconstruct_full: observed mechanism undefined on the event of " +
                                format_point(p) + " but the marginal is positive there");
                }
                table[om.space.index_of(p.y) * k + *r_index] = Rational(0);
                continue;
            }
            table[om.space.index_of(p.y) * k + *r_index] = fy * *om.values[i];
        }
    }
    return FullDensity(om.space, om.patterns, std::move(table));
}

std::set<std::size_t> dependence_support(const Mechanism& g, const MissingnessPattern& r) {
    const DataSpace& space = g.space();
    const auto maybe_r = g.patterns().index_of(r);
    if (!maybe_r) {
        throw Error("dependence_support: pattern " + r.str() + " is not in the pattern set");
    }
    std::size_t r_index = *maybe_r;
    std::size_t n = space.variables().size();

    // stride[i]: distance in canonical index between neighbours in
    // coordinate i. Variable 0 is most significant.
    std::vector<std::size_t> stride(n, 1);
    for (std::size_t i = n; i-- > 1;) {
        stride[i - 1] = stride[i] * space.variables()[i].levels.size();
    }

    std::set<std::size_t> support;
    std::size_t count = space.value_count();
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t levels = space.variables()[i].levels.size();
        bool varies = false;
        for (std::size_t y = 0; y < count && !varies; ++y) {
            std::size_t pos = (y / stride[i]) % levels;
            if (pos != 0) continue;  // visit each coordinate-i line once, from its base point
            std::optional<Rational> seen;
            for (std::size_t level = 0; level < levels; ++level) {
                std::optional<Rational> value = g.maybe_at(y + level * stride[i], r_index);
                if (!value) continue;  // undefined entries cannot witness variation
                if (!seen) {
                    seen = std::move(value);
                } else if (*value != *seen) {
                    varies = true;
                    break;
                }
            }
        }
        if (varies) support.insert(i);
    }
    return support;
}

FamilyMarResult family_mar(const DensityFamily& family, const ObservableDataEvent& e) {
    FamilyMarResult result{true, std::nullopt, std::nullopt, 0};
    for (const auto& [member_label, density] : family.members()) {
        SelectionModel sm = selection_factorize(density);
        EventClassification c = classify_event(sm.mechanism, e);
        result.excluded_member_checks += c.status == EventMarStatus::ZeroMassExcluded ? 1 : 0;
        if (c.status == EventMarStatus::NotMar) {
            result.all_mar = false;
            result.offending_member = member_label;
            result.witness = c.witness;
            return result;
        }
    }
    return result;
}

}  // namespace marlab
