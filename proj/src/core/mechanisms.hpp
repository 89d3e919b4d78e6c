#pragma once

#include "core/distribution.hpp"
#include "core/rng.hpp"
#include "core/space.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace marlab {

/// g(r|y) = pattern_probs[r] for every y. The probs must sum to 1.
Mechanism make_constant(const DataSpace& space, const PatternSet& patterns,
                        const std::vector<Rational>& pattern_probs);

/// A mechanism that depends on y only through the key variables, which
/// must all be observed under every pattern in the set. table[a] is the
/// probability vector over patterns for the a-th assignment of the key
/// variables (assignments enumerated in canonical order, first key index
/// most significant). Constant on every observable data event by
/// construction: the key coordinates are observed under every pattern.
Mechanism make_common_observed(const DataSpace& space, const PatternSet& patterns,
                               const std::vector<std::size_t>& key_indices,
                               const std::vector<std::vector<Rational>>& table);

/// The monotone chain over n variables in declared order: all-ones
/// first, then each prefix pattern down to (1,0,...,0), then optionally
/// the all-zeros pattern.
PatternSet monotone_patterns(std::size_t n, bool include_all_zeros);

/// Sequential-dropout mechanism over the monotone chain. hazards[t] is
/// the dropout probability table for step t+1: the chance that variable
/// t is the first one to go unobserved, given the values of variables
/// 0..t-1 (table indexed by the canonical index of that prefix, so
/// hazards[0] has exactly one entry). A hazard can only depend on
/// already-observed history; a table of any other size is rejected.
///
///   g(all-zeros | y)        = hazards[0]
///   g(first j observed | y) = [prod_{t<j} (1 - hazards[t](y))] * hazards[j](y)
///   g(all-ones | y)         = prod_{t<n} (1 - hazards[t](y))
///
/// Row sums telescope to exactly 1. Without the all-zeros pattern the
/// step-1 hazard must be 0, or the mass it would carry has nowhere to go.
Mechanism make_monotone_dropout(const DataSpace& space,
                                const std::vector<std::vector<Rational>>& hazards,
                                bool include_all_zeros);

/// Moves delta of conditional mass from the donor pattern to the event's
/// pattern at one member point of e, leaving every other row and column
/// untouched. With delta > 0 applied to a mechanism that was constant on
/// e, the result is not MAR on e and the perturbed member appears in the
/// witness. Rejects out-of-[0,1] results, a donor equal to the event's
/// pattern, and (for delta > 0) single-member events, where constancy
/// cannot be broken.
Mechanism perturb_mnar(const Mechanism& g, const ObservableDataEvent& e, const Rational& delta,
                       const MissingnessPattern& donor, std::size_t member_index = 0);

/// Parameters for the seeded random constructors. Denominators are kept
/// small so exact arithmetic stays cheap; constructions that need more
/// resolution (strictly positive vectors longer than max_denominator)
/// widen it locally.
struct GeneratorOptions {
    std::uint64_t seed = 0;
    unsigned max_denominator = 64;
};

/// Random exact probability vector of length k: a uniformly drawn
/// composition of a random denominator. strictly_positive forces every
/// entry to be nonzero.
std::vector<Rational> random_probability_vector(SplitMix64& rng, std::size_t k,
                                                unsigned max_denominator, bool strictly_positive);

/// Random strictly positive data marginal f over the space.
std::vector<Rational> random_positive_marginal(const DataSpace& space, SplitMix64& rng,
                                               unsigned max_denominator);

/// Random full density on the space; entries may be zero unless
/// strictly_positive is set.
FullDensity random_density(const DataSpace& space, const PatternSet& patterns,
                           const GeneratorOptions& opts, bool strictly_positive = false);

Mechanism random_constant(const DataSpace& space, const PatternSet& patterns,
                          const GeneratorOptions& opts);
Mechanism random_common_observed(const DataSpace& space, const PatternSet& patterns,
                                 const GeneratorOptions& opts);
Mechanism random_monotone(const DataSpace& space, bool include_all_zeros,
                          const GeneratorOptions& opts);

/// A deliberately not-MAR mechanism plus the event whose constancy was
/// broken, for tests and demonstrations that need a known witness.
struct MnarInstance {
    Mechanism mechanism;
    ObservableDataEvent target;
};

/// Strictly positive constant base mechanism with one perturbed member
/// point. Requires at least two patterns and at least one multi-member
/// event (some pattern must miss a variable).
MnarInstance random_mnar(const DataSpace& space, const PatternSet& patterns,
                         const GeneratorOptions& opts);

/// Recipe for one seeded mechanism construction, dispatched by kind.
struct MechanismSpec {
    enum class Kind { Constant, CommonObserved, MonotoneDropout, PerturbedMnar };
    Kind kind = Kind::Constant;
    std::uint64_t seed = 0;
    unsigned max_denominator = 64;
    bool include_all_zeros = true;  // MonotoneDropout only
};

/// Builds the mechanism described by the spec over the given space and
/// patterns. MonotoneDropout ignores the supplied patterns and uses the
/// monotone chain; the returned mechanism carries its actual pattern set.
Mechanism build_mechanism(const MechanismSpec& spec, const DataSpace& space,
                          const PatternSet& patterns);

/// One sampled unit: the realised pattern and the values that survived
/// it. Keys are exactly the pattern's observed indices.
struct IncompleteRow {
    MissingnessPattern pattern;
    std::map<std::size_t, int> values;
};

struct IncompleteDataset {
    std::vector<std::string> variable_names;
    std::vector<IncompleteRow> rows;
    std::uint64_t seed = 0;
};

/// n_rows i.i.d. draws from h with the missing coordinates dropped.
/// Row i draws from the substream SplitMix64(derive(seed, i)), so the
/// dataset is reproducible and independent of evaluation order. Sampling
/// is exact: a lazily extended binary fraction is refined until it falls
/// strictly inside one interval of the exact CDF.
IncompleteDataset sample_dataset(const FullDensity& h, std::size_t n_rows, std::uint64_t seed);

/// Header plus one line per row; missing cells are written NA and the
/// pattern bitstring leads each line.
std::string to_csv(const IncompleteDataset& ds);

struct BiasReport {
    Rational complete_case_mean;  // E[Y_i | R = all-ones]
    Rational marginal_mean;       // E[Y_i]
    Rational difference;          // complete-case minus marginal
};

/// Exact complete-case vs marginal mean of variable i, using the level
/// codes as numeric values. Requires positive complete-case probability.
BiasReport complete_case_bias(const FullDensity& h, std::size_t variable_index);

}  // namespace marlab
