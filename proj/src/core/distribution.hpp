#pragma once

#include "core/rational.hpp"
#include "core/space.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace marlab {

/// Outcome of checking a probability table against its structural
/// invariants. Carries the defects rather than throwing, so callers can
/// render them; valid() gates every downstream operation.
struct ValidationReport {
    bool complete = true;
    bool range_ok = true;
    bool mass_ok = true;
    Rational total_mass;
    std::vector<std::string> problems;

    bool valid() const { return complete && range_ok && mass_ok; }
};

/// Exact probability table on the full sample space. Entries may be
/// absent (a table read from a file can be incomplete); validate()
/// reports completeness and unit mass. Immutable after construction.
class FullDensity {
public:
    FullDensity(DataSpace space, PatternSet patterns,
                std::vector<std::optional<Rational>> table);

    /// Complete table given in canonical index order ((y, r) with
    /// y major, pattern minor).
    static FullDensity from_table(DataSpace space, PatternSet patterns,
                                  std::vector<Rational> table);
    static FullDensity from_entries(
        DataSpace space, PatternSet patterns,
        const std::map<std::pair<std::size_t, std::size_t>, Rational>& entries);

    const DataSpace& space() const { return space_; }
    const PatternSet& patterns() const { return patterns_; }
    std::size_t entry_count() const { return table_.size(); }

    bool has_entry(std::size_t y_index, std::size_t r_index) const;
    const Rational& prob(std::size_t y_index, std::size_t r_index) const;
    const Rational& prob(const Point& p) const;
    bool is_complete() const;

    bool operator==(const FullDensity& o) const {
        return space_ == o.space_ && patterns_ == o.patterns_ && table_ == o.table_;
    }

private:
    std::size_t slot(std::size_t y_index, std::size_t r_index) const;

    DataSpace space_;
    PatternSet patterns_;
    std::vector<std::optional<Rational>> table_;
};

ValidationReport validate(const FullDensity& h);

/// The conditional factor of the selection-model factorization, treated
/// as a function on all of the full sample space. Entries can be marked
/// undefined: factorizing a density leaves the mechanism undefined at
/// every y with zero marginal mass, and nothing downstream is allowed to
/// invent values there.
class Mechanism {
public:
    Mechanism(DataSpace space, PatternSet patterns,
              std::vector<std::optional<Rational>> table);
    static Mechanism total(DataSpace space, PatternSet patterns,
                           std::vector<Rational> table);

    const DataSpace& space() const { return space_; }
    const PatternSet& patterns() const { return patterns_; }

    bool defined(std::size_t y_index, std::size_t r_index) const;
    const Rational& at(std::size_t y_index, std::size_t r_index) const;
    std::optional<Rational> maybe_at(std::size_t y_index, std::size_t r_index) const;
    const Rational& at(const Point& p) const;
    std::optional<Rational> maybe_at(const Point& p) const;

    /// True when every entry is defined (the usual case for user-supplied
    /// mechanisms).
    bool is_total() const;

    bool operator==(const Mechanism& o) const {
        return space_ == o.space_ && patterns_ == o.patterns_ && table_ == o.table_;
    }

private:
    std::size_t slot(std::size_t y_index, std::size_t r_index) const;

    DataSpace space_;
    PatternSet patterns_;
    std::vector<std::optional<Rational>> table_;
};

/// Checks the mechanism constraints: entries in [0,1] and, for every y
/// whose row is defined, the row summing exactly to 1. Rows may be
/// entirely undefined (zero-mass y after factorization); a row that is
/// only partially defined is itself a defect.
ValidationReport validate(const Mechanism& g);

/// The (f, g) pair of the selection-model factorization.
struct SelectionModel {
    std::vector<Rational> marginal;  // f(y), canonical y order
    Mechanism mechanism;             // g(r|y)

    const DataSpace& space() const { return mechanism.space(); }
    const PatternSet& patterns() const { return mechanism.patterns(); }

    bool operator==(const SelectionModel&) const = default;
};

ValidationReport validate(const SelectionModel& sm);

/// The (p(r), p(y|r)) pair of the pattern-mixture factorization.
/// Components are present exactly for the patterns with positive mass.
struct PatternMixture {
    DataSpace space;
    PatternSet patterns;
    std::vector<Rational> pattern_marginal;                        // p(r)
    std::vector<std::optional<std::vector<Rational>>> components;  // p(y|r)

    bool operator==(const PatternMixture&) const = default;
};

ValidationReport validate(const PatternMixture& pm);

/// A finite, explicitly indexed family of full densities over one shared
/// space and pattern set.
class DensityFamily {
public:
    DensityFamily(std::string label,
                  std::vector<std::pair<std::string, FullDensity>> members);

    const std::string& label() const { return label_; }
    const std::vector<std::pair<std::string, FullDensity>>& members() const { return members_; }

private:
    std::string label_;
    std::vector<std::pair<std::string, FullDensity>> members_;
};

/// f(y) = sum over r of h(y, r). Requires h valid.
std::vector<Rational> marginal_y(const FullDensity& h);
/// p(r) = sum over y of h(y, r). Requires h valid.
std::vector<Rational> marginal_r(const FullDensity& h);

/// Splits h into f and g. g is undefined at every y with f(y) = 0.
SelectionModel selection_factorize(const FullDensity& h);

/// Splits h into p(r) and the pattern-mixture components.
PatternMixture pattern_mixture_factorize(const FullDensity& h);

/// h(y, r) = f(y) g(r|y). Undefined g entries are only legal where
/// f(y) = 0, in which case the product is zero.
FullDensity recompose(const SelectionModel& sm);

/// h(y, r) = p(r) p(y|r). Missing components are only legal where
/// p(r) = 0.
FullDensity recompose(const PatternMixture& pm);

}  // namespace marlab
