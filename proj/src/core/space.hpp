#pragma once

#include "core/rational.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace marlab {

/// One coordinate of the data vector: a named variable with a finite,
/// ordered set of distinct integer level codes.
struct Variable {
    std::string name;
    std::vector<int> levels;

    bool operator==(const Variable&) const = default;
};

/// The finite set of complete data vectors: the full product grid of the
/// variables' level sets. Values are enumerated in product order with
/// variable 0 most significant and each variable running through its
/// levels in the order they were declared; "canonical order" and
/// "lexicographic order" below always mean this enumeration order.
class DataSpace {
public:
    explicit DataSpace(std::vector<Variable> variables);

    std::size_t arity() const { return variables_.size(); }
    const Variable& variable(std::size_t i) const { return variables_.at(i); }
    const std::vector<Variable>& variables() const { return variables_; }
    std::optional<std::size_t> variable_index(std::string_view name) const;

    /// Number of complete data vectors in the grid.
    std::size_t value_count() const { return value_count_; }

    bool contains(std::span<const int> y) const;
    /// Canonical index of a data vector; throws if y is not in the grid.
    std::size_t index_of(std::span<const int> y) const;
    std::vector<int> value_at(std::size_t index) const;

    bool operator==(const DataSpace& o) const { return variables_ == o.variables_; }

private:
    std::vector<Variable> variables_;
    std::vector<std::map<int, std::size_t>> level_pos_;  // code -> position, per variable
    std::size_t value_count_ = 1;
};

/// Binary response pattern over the variables; 1 = observed, 0 = missing.
class MissingnessPattern {
public:
    MissingnessPattern() = default;  // empty pattern; placeholder before assignment
    explicit MissingnessPattern(std::vector<std::uint8_t> bits);

    static MissingnessPattern all_ones(std::size_t n);
    static MissingnessPattern all_zeros(std::size_t n);
    /// Parses a bitstring such as "101"; throws on other characters.
    static MissingnessPattern parse(std::string_view bitstring);

    std::size_t size() const { return bits_.size(); }
    bool observed(std::size_t i) const { return bits_.at(i) != 0; }
    /// The dot product r.r: how many values this pattern observes.
    std::size_t observed_count() const;
    std::vector<std::size_t> observed_indices() const;
    std::vector<std::size_t> missing_indices() const;
    bool is_all_ones() const;
    bool is_all_zeros() const;

    std::string str() const;

    bool operator==(const MissingnessPattern&) const = default;
    bool operator<(const MissingnessPattern& o) const { return bits_ < o.bits_; }

private:
    std::vector<std::uint8_t> bits_;
};

/// The distinct realisable patterns, complete-case pattern first. The
/// all-zeros pattern is an ordinary member: present only if listed.
class PatternSet {
public:
    explicit PatternSet(std::vector<MissingnessPattern> patterns);

    std::size_t size() const { return patterns_.size(); }
    std::size_t arity() const { return patterns_.front().size(); }
    const MissingnessPattern& at(std::size_t j) const { return patterns_.at(j); }
    const std::vector<MissingnessPattern>& patterns() const { return patterns_; }
    std::optional<std::size_t> index_of(const MissingnessPattern& r) const;

    bool operator==(const PatternSet& o) const { return patterns_ == o.patterns_; }

private:
    std::vector<MissingnessPattern> patterns_;
};

/// A single element of the full sample space: a complete data vector
/// paired with the pattern that was realised for it.
struct Point {
    std::vector<int> y;
    MissingnessPattern r;

    bool operator==(const Point&) const = default;
};

/// All points sharing one pattern and one set of observed values: the
/// class of (y, r) under the observed-data equivalence relation. Members
/// are materialised eagerly, in canonical order.
struct ObservableDataEvent {
    MissingnessPattern pattern;
    std::map<std::size_t, int> observed_values;  // variable index -> level code
    std::vector<Point> members;

    bool operator==(const ObservableDataEvent&) const = default;
};

/// Entries of y at the observed positions of r, in index order. The
/// all-zeros pattern yields the empty vector.
std::vector<int> project_observed(std::span<const int> y, const MissingnessPattern& r);

/// Entries of y at the unobserved positions of r, in index order. The
/// all-ones pattern yields the empty vector.
std::vector<int> project_missing(std::span<const int> y, const MissingnessPattern& r);

/// Inverse of the pair (project_observed, project_missing): re-interleaves
/// the two sub-vectors back into a full data vector.
std::vector<int> merge_projections(std::span<const int> observed_part,
                                   std::span<const int> missing_part,
                                   const MissingnessPattern& r);

/// True iff the two points share a pattern and observed values.
/// Throws on dimension mismatch.
bool ob_equivalent(const Point& a, const Point& b);

/// The observable data event containing p. Throws if p is not a valid
/// point of the given space and pattern set.
ObservableDataEvent observable_event(const DataSpace& space, const PatternSet& patterns,
                                     const Point& p);

/// Every observable data event, in canonical order: patterns in set
/// order, observed assignments in lexicographic order. The result is a
/// partition of the full sample space.
std::vector<ObservableDataEvent> enumerate_events(const DataSpace& space,
                                                  const PatternSet& patterns);

std::string format_values(std::span<const int> values);
std::string format_point(const Point& p);

/// "observed: y1; missing: y2, y3" using the space's variable names.
std::string describe_pattern(const DataSpace& space, const MissingnessPattern& r);

/// "pattern 10, y1=0" (or ", nothing observed" for the all-zeros case).
std::string describe_event(const DataSpace& space, const ObservableDataEvent& e);

}  // namespace marlab
