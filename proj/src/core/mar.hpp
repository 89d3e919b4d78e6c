#pragma once

#include "core/distribution.hpp"
#include "core/space.hpp"

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace marlab {

/// Whether the observed-data mechanism takes the supremum or infimum of
/// the restricted range. Both choices classify identically; sup is the
/// default everywhere.
enum class RangeMode { Sup, Inf };

/// The set of values the mechanism takes when its domain is restricted
/// to one observable data event, with a per-member listing for
/// diagnostics. Members where the mechanism is undefined (zero marginal
/// mass after factorizing) are counted, never guessed.
struct RestrictionRange {
    ObservableDataEvent event;
    std::set<Rational> values;  // distinct values over the defined members
    std::vector<std::pair<Point, std::optional<Rational>>> per_point;
    std::size_t undefined_members = 0;
};

/// Strict form: requires the mechanism to be defined on every member of
/// the event and throws otherwise.
RestrictionRange restriction_range(const Mechanism& g, const ObservableDataEvent& e);

/// Lenient form: skips undefined members and records how many were
/// excluded. The value set may be empty (event entirely of zero mass).
RestrictionRange restriction_range_defined(const Mechanism& g, const ObservableDataEvent& e);

/// The observed-data mechanism value for one event: sup (or inf) of the
/// restricted range. For a constant-on-the-event mechanism both modes
/// return that constant.
Rational p_r_given_yobs(const Mechanism& g, const ObservableDataEvent& e, RangeMode mode);

enum class EventMarStatus {
    Mar,              // mechanism constant on the event's defined members
    NotMar,           // two members with differing mechanism values
    ZeroMassExcluded  // mechanism undefined on every member
};

/// Per-event classification. The witness, when present, is the
/// canonical (lexicographically smallest) pair of members with
/// differing mechanism values, so results are order-independent.
struct EventClassification {
    EventMarStatus status;
    std::optional<std::pair<Point, Point>> witness;
    std::optional<std::pair<Rational, Rational>> witness_values;
    std::size_t excluded_members = 0;
};

EventClassification classify_event(const Mechanism& g, const ObservableDataEvent& e);

/// A classification decision together with its certificate: a negative
/// verdict always carries a two-point witness that can be checked
/// independently.
struct MarVerdict {
    enum class Kind { EverywhereMar, RealizedMar, NotMar };
    Kind kind;
    std::optional<ObservableDataEvent> event;  // checked event / witnessing event
    std::optional<std::pair<Point, Point>> witness;
    std::optional<std::pair<Rational, Rational>> witness_values;
    std::vector<ObservableDataEvent> excluded_events;  // zero-mass, mechanism undefined
    std::size_t excluded_members = 0;

    bool mar() const { return kind != Kind::NotMar; }
};

/// Constancy of the mechanism on one observable data event. Throws when
/// the mechanism is undefined on the whole event (nothing to decide).
MarVerdict is_realized_mar(const Mechanism& g, const ObservableDataEvent& e);

/// Constancy on every observable data event. Zero-mass events (mechanism
/// undefined throughout) are excluded from the test and reported in the
/// verdict.
MarVerdict is_everywhere_mar(const Mechanism& g);

/// The observed-data mechanism: one value per observable data event,
/// defined eventwise as sup (or inf) of the restricted range. A function
/// on the observable data, not a conditional distribution.
struct ObservedMechanism {
    RangeMode mode;
    DataSpace space;
    PatternSet patterns;
    std::vector<ObservableDataEvent> events;      // canonical order
    std::vector<std::optional<Rational>> values;  // aligned; empty only on zero-mass events

    /// Looks up the entry for (pattern, observed assignment); nullopt if
    /// no such event exists.
    std::optional<Rational> value_for(const MissingnessPattern& pattern,
                                      const std::map<std::size_t, int>& observed_values) const;
};

ObservedMechanism observed_mechanism(const Mechanism& g, RangeMode mode);

/// True iff the mechanism equals its eventwise sup (or inf) at every
/// defined member of the event: the standard-notation equality read as
/// functions. Coincides with is_realized_mar under both modes.
bool standard_equation_holds(const Mechanism& g, const ObservableDataEvent& e, RangeMode mode);

/// The "drawn at random" identity on one event: the pattern-mixture
/// conditional of the missing part given the observed part equals the
/// same conditional taken under the data marginal, exactly, at every
/// member. Requires the event to have positive probability under h.
bool drawn_at_random_check(const FullDensity& h, const ObservableDataEvent& e);

/// Proportionality form of the same property: restricted to the event,
/// the pattern-mixture component is a single scalar multiple of the data
/// marginal. Decided by exact cross-multiplication, independently of
/// drawn_at_random_check.
bool shape_proportionality_check(const FullDensity& h, const ObservableDataEvent& e);

/// The first (lexicographic) member index pair whose cross-multiplication
/// breaks proportionality, or nullopt when the shapes match. Same
/// preconditions as shape_proportionality_check.
std::optional<std::pair<std::size_t, std::size_t>> shape_witness_indices(
    const FullDensity& h, const ObservableDataEvent& e);

/// The proportionality constant c with p(y|r) = c f(y) on the event,
/// when it exists (positive-probability event, proportionality holds).
std::optional<Rational> shape_constant(const FullDensity& h, const ObservableDataEvent& e);

/// Rebuilds a full density from a data marginal and an observed-data
/// mechanism: h(y, r) = f(y) * om(observed part of y, r). The result
/// only passes validation when the mechanism behind om was everywhere
/// MAR; callers detect non-MAR inputs by validating/comparing.
FullDensity reconstruct_full(const std::vector<Rational>& f, const ObservedMechanism& om);

/// Variable indices the probability of pattern r actually varies with:
/// indices i admitting two data vectors that differ only at i and take
/// different mechanism values. Everywhere-MAR is equivalent to this
/// support staying inside the observed positions of r, for every r.
std::set<std::size_t> dependence_support(const Mechanism& g, const MissingnessPattern& r);

struct FamilyMarResult {
    bool all_mar;
    std::optional<std::string> offending_member;
    std::optional<std::pair<Point, Point>> witness;
    std::size_t excluded_member_checks = 0;  // zero-mass exclusions across the family
};

/// MAR with respect to one event for every density in the family, via
/// each member's factorized mechanism.
FamilyMarResult family_mar(const DensityFamily& family, const ObservableDataEvent& e);

}  // namespace marlab
