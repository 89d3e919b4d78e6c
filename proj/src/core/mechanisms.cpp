#include "core/mechanisms.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

namespace marlab {

namespace {

void require_probability(const Rational& v, const char* what) {
    if (!v.is_probability()) {
        throw Error(std::string(what) + " " + v.str() + " is outside [0, 1]");
    }
}

void require_unit_sum(const std::vector<Rational>& probs, const char* what) {
    Rational sum;
    for (const Rational& v : probs) {
        require_probability(v, what);
        sum += v;
    }
    if (sum != Rational(1)) {
        throw Error(std::string(what) + " vector sums to " + sum.str() + "; must sum to 1");
    }
}

void require_valid_density(const FullDensity& h, const char* op) {
    ValidationReport report = validate(h);
    if (report.valid()) return;
    std::ostringstream msg;
    msg << op << ": density is not valid";
    for (const auto& problem : report.problems) msg << "; " << problem;
    throw Error(msg.str());
}

// Distance in canonical y index between neighbours in each coordinate.
std::vector<std::size_t> coordinate_strides(const DataSpace& space) {
    std::size_t n = space.arity();
    std::vector<std::size_t> stride(n, 1);
    for (std::size_t i = n; i-- > 1;) {
        stride[i - 1] = stride[i] * space.variable(i).levels.size();
    }
    return stride;
}

std::vector<std::size_t> common_observed_set(const PatternSet& patterns) {
    std::vector<std::size_t> common;
    for (std::size_t i = 0; i < patterns.arity(); ++i) {
        bool everywhere = true;
        for (const MissingnessPattern& r : patterns.patterns()) {
            if (!r.observed(i)) {
                everywhere = false;
                break;
            }
        }
        if (everywhere) common.push_back(i);
    }
    return common;
}

}  // namespace

Mechanism make_constant(const DataSpace& space, const PatternSet& patterns,
                        const std::vector<Rational>& pattern_probs) {
    if (pattern_probs.size() != patterns.size()) {
        throw Error("make_constant: " + std::to_string(pattern_probs.size()) +
                    " probabilities for " + std::to_string(patterns.size()) + " patterns");
    }
    require_unit_sum(pattern_probs, "make_constant: probability");
    std::vector<Rational> table;
    table.reserve(space.value_count() * patterns.size());
    for (std::size_t y = 0; y < space.value_count(); ++y) {
        table.insert(table.end(), pattern_probs.begin(), pattern_probs.end());
    }
    return Mechanism::total(space, patterns, std::move(table));
}

Mechanism make_common_observed(const DataSpace& space, const PatternSet& patterns,
                               const std::vector<std::size_t>& key_indices,
                               const std::vector<std::vector<Rational>>& table) {
    std::vector<std::size_t> common = common_observed_set(patterns);
    for (std::size_t i : key_indices) {
        if (i >= space.arity()) {
            throw Error("make_common_observed: key index " + std::to_string(i) +
                        " is out of range");
        }
        if (std::find(common.begin(), common.end(), i) == common.end()) {
            throw Error("make_common_observed: variable " + space.variable(i).name +
                        " is not observed under every pattern; the mechanism may only be "
                        "keyed on always-observed variables");
        }
    }
    if (std::set<std::size_t>(key_indices.begin(), key_indices.end()).size() !=
        key_indices.size()) {
        throw Error("make_common_observed: duplicate key index");
    }

    std::size_t assignments = 1;
    for (std::size_t i : key_indices) assignments *= space.variable(i).levels.size();
    if (table.size() != assignments) {
        throw Error("make_common_observed: table has " + std::to_string(table.size()) +
                    " rows; the key variables admit " + std::to_string(assignments) +
                    " assignments");
    }
    for (const auto& row : table) {
        if (row.size() != patterns.size()) {
            throw Error("make_common_observed: table row has " + std::to_string(row.size()) +
                        " entries for " + std::to_string(patterns.size()) + " patterns");
        }
        require_unit_sum(row, "make_common_observed: probability");
    }

    std::vector<std::size_t> stride = coordinate_strides(space);
    std::vector<Rational> full;
    full.reserve(space.value_count() * patterns.size());
    for (std::size_t y = 0; y < space.value_count(); ++y) {
        std::size_t key = 0;
        // First listed key index is most significant.
        for (std::size_t i : key_indices) {
            std::size_t levels = space.variable(i).levels.size();
            key = key * levels + (y / stride[i]) % levels;
        }
        full.insert(full.end(), table[key].begin(), table[key].end());
    }
    return Mechanism::total(space, patterns, std::move(full));
}

PatternSet monotone_patterns(std::size_t n, bool include_all_zeros) {
    if (n == 0) throw Error("monotone_patterns: need at least one variable");
    std::vector<MissingnessPattern> chain;
    for (std::size_t observed = n; observed >= 1; --observed) {
        std::vector<std::uint8_t> bits(n, 0);
        std::fill(bits.begin(), bits.begin() + static_cast<std::ptrdiff_t>(observed), 1);
        chain.emplace_back(std::move(bits));
    }
    if (include_all_zeros) chain.push_back(MissingnessPattern::all_zeros(n));
    return PatternSet(std::move(chain));
}

Mechanism make_monotone_dropout(const DataSpace& space,
                                const std::vector<std::vector<Rational>>& hazards,
                                bool include_all_zeros) {
    std::size_t n = space.arity();
    if (hazards.size() != n) {
        throw Error("make_monotone_dropout: " + std::to_string(hazards.size()) +
                    " hazard tables for " + std::to_string(n) + " variables");
    }
    std::size_t prefix_count = 1;
    for (std::size_t t = 0; t < n; ++t) {
        if (hazards[t].size() != prefix_count) {
            throw Error("make_monotone_dropout: hazard table for step " + std::to_string(t + 1) +
                        " has " + std::to_string(hazards[t].size()) + " entries; it may depend "
                        "only on the " + std::to_string(t) + " already-observed variables (" +
                        std::to_string(prefix_count) + " assignments)");
        }
        for (const Rational& v : hazards[t]) require_probability(v, "make_monotone_dropout: hazard");
        prefix_count *= space.variable(t).levels.size();
    }
    if (!include_all_zeros && !hazards[0][0].is_zero()) {
        throw Error("make_monotone_dropout: without the all-zeros pattern the step-1 hazard "
                    "must be 0; got " + hazards[0][0].str());
    }

    PatternSet patterns = monotone_patterns(n, include_all_zeros);
    std::size_t k = patterns.size();
    std::vector<std::size_t> stride = coordinate_strides(space);

    std::vector<Rational> table(space.value_count() * k);
    for (std::size_t y = 0; y < space.value_count(); ++y) {
        // Walk the steps once, keeping the survival product. The pattern
        // with the first j variables observed sits at set index n - j.
        std::size_t prefix = 0;
        Rational survival(1);
        for (std::size_t t = 0; t < n; ++t) {
            const Rational& hazard = hazards[t][prefix];
            Rational mass = survival * hazard;  // dropped out at step t+1: first t observed
            if (t == 0) {
                if (include_all_zeros) table[y * k + n] = std::move(mass);
            } else {
                table[y * k + (n - t)] = std::move(mass);
            }
            survival *= Rational(1) - hazard;
            std::size_t levels = space.variable(t).levels.size();
            prefix = prefix * levels + (y / stride[t]) % levels;
        }
        table[y * k + 0] = std::move(survival);  // all observed
    }
    return Mechanism::total(space, patterns, std::move(table));
}

Mechanism perturb_mnar(const Mechanism& g, const ObservableDataEvent& e, const Rational& delta,
                       const MissingnessPattern& donor, std::size_t member_index) {
    if (delta.sign() < 0) throw Error("perturb_mnar: delta must be nonnegative");
    if (donor == e.pattern) {
        throw Error("perturb_mnar: donor pattern equals the event's pattern; "
                    "mass must move between two different patterns");
    }
    const auto target_r = g.patterns().index_of(e.pattern);
    if (!target_r) throw Error("perturb_mnar: pattern " + e.pattern.str() + " is not in the set");
    const auto donor_r = g.patterns().index_of(donor);
    if (!donor_r) throw Error("perturb_mnar: donor pattern " + donor.str() + " is not in the set");
    if (member_index >= e.members.size()) {
        throw Error("perturb_mnar: member index " + std::to_string(member_index) +
                    " out of range for an event with " + std::to_string(e.members.size()) +
                    " members");
    }
    if (!delta.is_zero() && e.members.size() < 2) {
        throw Error("perturb_mnar: the event has a single member; perturbing it cannot "
                    "break constancy");
    }

    std::size_t y_index = g.space().index_of(e.members[member_index].y);
    std::optional<Rational> target_v = g.maybe_at(y_index, *target_r);
    std::optional<Rational> donor_v = g.maybe_at(y_index, *donor_r);
    if (!target_v || !donor_v) {
        throw Error("perturb_mnar: mechanism undefined at the perturbation point");
    }
    Rational new_target = *target_v + delta;
    Rational new_donor = *donor_v - delta;
    if (!new_target.is_probability() || !new_donor.is_probability()) {
        throw Error("perturb_mnar: delta " + delta.str() + " pushes an entry outside [0, 1] "
                    "(target becomes " + new_target.str() + ", donor becomes " +
                    new_donor.str() + ")");
    }

    std::size_t k = g.patterns().size();
    std::vector<std::optional<Rational>> table;
    table.reserve(g.space().value_count() * k);
    for (std::size_t y = 0; y < g.space().value_count(); ++y) {
        for (std::size_t r = 0; r < k; ++r) table.push_back(g.maybe_at(y, r));
    }
    table[y_index * k + *target_r] = std::move(new_target);
    table[y_index * k + *donor_r] = std::move(new_donor);
    return Mechanism(g.space(), g.patterns(), std::move(table));
}

std::vector<Rational> random_probability_vector(SplitMix64& rng, std::size_t k,
                                                unsigned max_denominator, bool strictly_positive) {
    if (k == 0) throw Error("random_probability_vector: need at least one entry");
    if (max_denominator == 0) throw Error("random_probability_vector: max denominator must be >= 1");
    std::vector<long> cuts;
    long q;
    if (strictly_positive) {
        // Positive composition: q >= k, cut points distinct in [1, q-1].
        long lo = static_cast<long>(k);
        long hi = std::max<long>(static_cast<long>(max_denominator), lo);
        q = lo + static_cast<long>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
        std::vector<long> pool(static_cast<std::size_t>(q - 1));
        std::iota(pool.begin(), pool.end(), 1);
        for (std::size_t i = 0; i + 1 < k; ++i) {
            std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
            std::swap(pool[i], pool[j]);
            cuts.push_back(pool[i]);
        }
    } else {
        q = 1 + static_cast<long>(rng.below(max_denominator));
        for (std::size_t i = 0; i + 1 < k; ++i) {
            cuts.push_back(static_cast<long>(rng.below(static_cast<std::uint64_t>(q) + 1)));
        }
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<Rational> parts;
    parts.reserve(k);
    long prev = 0;
    for (long c : cuts) {
        parts.emplace_back(c - prev, q);
        prev = c;
    }
    parts.emplace_back(q - prev, q);
    return parts;
}

std::vector<Rational> random_positive_marginal(const DataSpace& space, SplitMix64& rng,
                                               unsigned max_denominator) {
    return random_probability_vector(rng, space.value_count(), max_denominator, true);
}

FullDensity random_density(const DataSpace& space, const PatternSet& patterns,
                           const GeneratorOptions& opts, bool strictly_positive) {
    SplitMix64 rng(opts.seed);
    std::vector<Rational> table = random_probability_vector(
        rng, space.value_count() * patterns.size(), opts.max_denominator, strictly_positive);
    return FullDensity::from_table(space, patterns, std::move(table));
}

Mechanism random_constant(const DataSpace& space, const PatternSet& patterns,
                          const GeneratorOptions& opts) {
    SplitMix64 rng(opts.seed);
    return make_constant(space, patterns,
                         random_probability_vector(rng, patterns.size(), opts.max_denominator,
                                                   false));
}

Mechanism random_common_observed(const DataSpace& space, const PatternSet& patterns,
                                 const GeneratorOptions& opts) {
    SplitMix64 rng(opts.seed);
    std::vector<std::size_t> keys = common_observed_set(patterns);
    std::size_t assignments = 1;
    for (std::size_t i : keys) assignments *= space.variable(i).levels.size();
    std::vector<std::vector<Rational>> table;
    table.reserve(assignments);
    for (std::size_t a = 0; a < assignments; ++a) {
        table.push_back(
            random_probability_vector(rng, patterns.size(), opts.max_denominator, false));
    }
    return make_common_observed(space, patterns, keys, table);
}

Mechanism random_monotone(const DataSpace& space, bool include_all_zeros,
                          const GeneratorOptions& opts) {
    SplitMix64 rng(opts.seed);
    std::vector<std::vector<Rational>> hazards(space.arity());
    std::size_t prefix_count = 1;
    for (std::size_t t = 0; t < space.arity(); ++t) {
        hazards[t].reserve(prefix_count);
        for (std::size_t a = 0; a < prefix_count; ++a) {
            long den = 1 + static_cast<long>(rng.below(opts.max_denominator));
            long num = static_cast<long>(rng.below(static_cast<std::uint64_t>(den) + 1));
            hazards[t].emplace_back(num, den);
        }
        prefix_count *= space.variable(t).levels.size();
    }
    if (!include_all_zeros) hazards[0][0] = Rational(0);
    return make_monotone_dropout(space, hazards, include_all_zeros);
}

MnarInstance random_mnar(const DataSpace& space, const PatternSet& patterns,
                         const GeneratorOptions& opts) {
    if (patterns.size() < 2) {
        throw Error("random_mnar: need at least two patterns to move mass between");
    }
    SplitMix64 rng(opts.seed);
    // Strictly positive base so both perturbation directions have room.
    std::vector<Rational> base =
        random_probability_vector(rng, patterns.size(), opts.max_denominator, true);
    Mechanism g = make_constant(space, patterns, base);

    std::vector<ObservableDataEvent> events = enumerate_events(space, patterns);
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (events[i].members.size() >= 2) eligible.push_back(i);
    }
    if (eligible.empty()) {
        throw Error("random_mnar: every observable data event is a singleton; no mechanism "
                    "on this pattern set can fail to be MAR");
    }
    const ObservableDataEvent& target = events[eligible[rng.below(eligible.size())]];
    std::size_t target_r = *patterns.index_of(target.pattern);
    std::size_t donor_r = rng.below(patterns.size() - 1);
    if (donor_r >= target_r) ++donor_r;

    Rational headroom = Rational(1) - base[target_r];
    const Rational& bound = headroom < base[donor_r] ? headroom : base[donor_r];
    long den = 1 + static_cast<long>(rng.below(opts.max_denominator));
    long num = 1 + static_cast<long>(rng.below(static_cast<std::uint64_t>(den)));
    Rational delta = bound * Rational(num, den);

    return MnarInstance{perturb_mnar(g, target, delta, patterns.at(donor_r), 0), target};
}

Mechanism build_mechanism(const MechanismSpec& spec, const DataSpace& space,
                          const PatternSet& patterns) {
    GeneratorOptions opts{spec.seed, spec.max_denominator};
    switch (spec.kind) {
        case MechanismSpec::Kind::Constant:
            return random_constant(space, patterns, opts);
        case MechanismSpec::Kind::CommonObserved:
            return random_common_observed(space, patterns, opts);
        case MechanismSpec::Kind::MonotoneDropout:
            return random_monotone(space, spec.include_all_zeros, opts);
        case MechanismSpec::Kind::PerturbedMnar:
            return random_mnar(space, patterns, opts).mechanism;
    }
    throw Error("build_mechanism: unknown kind");
}

IncompleteDataset sample_dataset(const FullDensity& h, std::size_t n_rows, std::uint64_t seed) {
    require_valid_density(h, "sample_dataset");
    const std::size_t k = h.patterns().size();
    const std::size_t slots = h.space().value_count() * k;

    std::vector<Rational> cum(slots + 1);
    for (std::size_t s = 0; s < slots; ++s) cum[s + 1] = cum[s] + h.prob(s / k, s % k);

    IncompleteDataset ds;
    ds.seed = seed;
    for (const Variable& v : h.space().variables()) ds.variable_names.push_back(v.name);
    ds.rows.reserve(n_rows);

    for (std::size_t i = 0; i < n_rows; ++i) {
        SplitMix64 rng(SplitMix64::derive(seed, i));
        // Exact inversion: refine a binary fraction U until the interval
        // [U, U + 2^-bits) sits inside one CDF cell. Boundaries are exact
        // rationals, so the comparison never needs a tolerance.
        mpz_class numerator = 0;
        unsigned long bits = 0;
        std::size_t slot = 0;
        for (;;) {
            mpz_mul_2exp(numerator.get_mpz_t(), numerator.get_mpz_t(), 64);
            numerator += mpz_class(static_cast<unsigned long>(rng.next()));
            bits += 64;
            mpz_class denominator = 1;
            mpz_mul_2exp(denominator.get_mpz_t(), denominator.get_mpz_t(), bits);
            Rational u{mpq_class(numerator, denominator)};
            auto it = std::upper_bound(cum.begin(), cum.end(), u);
            slot = static_cast<std::size_t>(it - cum.begin()) - 1;
            Rational u_hi{mpq_class(numerator + 1, denominator)};
            if (u_hi <= cum[slot + 1]) break;
        }
        IncompleteRow row;
        row.pattern = h.patterns().at(slot % k);
        std::vector<int> y = h.space().value_at(slot / k);
        for (std::size_t idx : row.pattern.observed_indices()) row.values[idx] = y[idx];
        ds.rows.push_back(std::move(row));
    }
    return ds;
}

std::string to_csv(const IncompleteDataset& ds) {
    std::ostringstream out;
    out << "pattern";
    for (const std::string& name : ds.variable_names) out << "," << name;
    out << "\n";
    for (const IncompleteRow& row : ds.rows) {
        out << row.pattern.str();
        for (std::size_t i = 0; i < ds.variable_names.size(); ++i) {
            auto it = row.values.find(i);
            if (it == row.values.end()) {
                out << ",NA";
            } else {
                out << "," << it->second;
            }
        }
        out << "\n";
    }
    return out.str();
}

BiasReport complete_case_bias(const FullDensity& h, std::size_t variable_index) {
    require_valid_density(h, "complete_case_bias");
    if (variable_index >= h.space().arity()) {
        throw Error("complete_case_bias: variable index " + std::to_string(variable_index) +
                    " out of range");
    }
    std::vector<Rational> pr = marginal_r(h);
    if (pr[0].is_zero()) {
        throw Error("complete_case_bias: the complete-case pattern has probability zero; "
                    "the complete-case mean is undefined");
    }
    std::vector<Rational> f = marginal_y(h);

    Rational cc_weighted;
    Rational marginal;
    for (std::size_t y = 0; y < h.space().value_count(); ++y) {
        Rational code(h.space().value_at(y)[variable_index]);
        cc_weighted += code * h.prob(y, 0);
        marginal += code * f[y];
    }
    Rational cc_mean = cc_weighted / pr[0];
    Rational difference = cc_mean - marginal;
    return BiasReport{std::move(cc_mean), std::move(marginal), std::move(difference)};
}

}  // namespace marlab
