#include "core/reports.hpp"

#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace marlab {

namespace {

std::string payload_name(const ParsedModel& model) {
    if (std::holds_alternative<FullDensity>(model)) return "density";
    if (std::holds_alternative<SelectionModel>(model)) return "selection";
    return "mixture";
}

ValidationReport validate_payload(const ParsedModel& model) {
    return std::visit([](const auto& m) { return validate(m); }, model);
}

Rational event_h_mass(const FullDensity& h, const ObservableDataEvent& e) {
    Rational total;
    for (const Point& p : e.members) total += h.prob(p);
    return total;
}

std::string plural(std::size_t n, const char* word) {
    std::ostringstream out;
    out << n << ' ' << word;
    if (n != 1) out << 's';
    return out.str();
}

const char* kind_name(MechanismSpec::Kind k) {
    switch (k) {
        case MechanismSpec::Kind::Constant: return "constant";
        case MechanismSpec::Kind::CommonObserved: return "common-observed";
        case MechanismSpec::Kind::MonotoneDropout: return "monotone dropout";
        case MechanismSpec::Kind::PerturbedMnar: return "perturbed (not MAR)";
    }
    return "?";
}

/// Natural pattern set per construction: every pattern for the generic
/// kinds, the always-observe-the-first-variable half for common-observed,
/// the monotone chain for dropout. All-ones always leads.
PatternSet default_patterns(MechanismSpec::Kind kind, std::size_t n, bool include_all_zeros) {
    using Kind = MechanismSpec::Kind;
    if (kind == Kind::MonotoneDropout) return monotone_patterns(n, include_all_zeros);
    std::vector<MissingnessPattern> ps;
    for (std::size_t mask = std::size_t{1} << n; mask-- > 0;) {
        std::vector<std::uint8_t> bits(n);
        for (std::size_t i = 0; i < n; ++i)
            bits[i] = static_cast<std::uint8_t>((mask >> (n - 1 - i)) & 1u);
        MissingnessPattern p(std::move(bits));
        if (kind == Kind::CommonObserved && !p.observed(0)) continue;
        ps.push_back(std::move(p));
    }
    return PatternSet(std::move(ps));
}

}  // namespace

CommandResult cmd_validate(std::string_view file_text) {
    ParsedModel model = parse_model_lenient(file_text);
    const DataSpace& space = model_space(model);
    const PatternSet& patterns = model_patterns(model);
    ValidationReport report = validate_payload(model);

    std::ostringstream out;
    out << "payload: " << payload_name(model) << "\n";
    out << "space: " << plural(space.arity(), "variable") << ", "
        << plural(space.value_count(), "data vector") << ", "
        << plural(patterns.size(), "pattern") << "\n";
    if (report.valid()) {
        out << "status: valid\n";
        return {CommandStatus::Ok, out.str()};
    }
    out << "status: INVALID, " << plural(report.problems.size(), "problem") << "\n";
    for (const auto& p : report.problems) out << "  - " << p << "\n";
    return {CommandStatus::AssertFailed, out.str()};
}

CommandResult cmd_factorize(const ParsedModel& model, bool as_mixture) {
    FullDensity h = to_density(model);
    std::string text = as_mixture ? serialize_model(pattern_mixture_factorize(h))
                                  : serialize_model(selection_factorize(h));
    return {CommandStatus::Ok, std::move(text)};
}

CommandResult cmd_events(const ParsedModel& model) {
    const DataSpace& space = model_space(model);
    const PatternSet& patterns = model_patterns(model);
    std::vector<ObservableDataEvent> events = enumerate_events(space, patterns);

    std::ostringstream out;
    out << plural(events.size(), "observable data event") << " partitioning "
        << plural(space.value_count() * patterns.size(), "point") << "\n\n";
    for (std::size_t i = 0; i < events.size(); ++i) {
        const ObservableDataEvent& e = events[i];
        out << "event " << i << ": " << describe_event(space, e) << "\n";
        out << "  members (" << e.members.size() << "):";
        for (const Point& p : e.members) out << ' ' << format_point(p);
        out << "\n";
    }
    return {CommandStatus::Ok, out.str()};
}

CommandResult cmd_classify(const ParsedModel& model) {
    SelectionModel sm = to_selection(model);
    const Mechanism& g = sm.mechanism;
    const DataSpace& space = g.space();
    std::vector<ObservableDataEvent> events = enumerate_events(space, g.patterns());

    std::ostringstream out;
    out << "mechanism constancy per observable data event\n\n";
    for (std::size_t i = 0; i < events.size(); ++i) {
        const ObservableDataEvent& e = events[i];
        EventClassification c = classify_event(g, e);
        out << "event " << i << " (" << describe_event(space, e) << "): ";
        switch (c.status) {
            case EventMarStatus::Mar:
                out << "constant";
                if (c.excluded_members > 0)
                    out << " on defined members, " << plural(c.excluded_members, "zero-mass member")
                        << " excluded";
                out << "\n";
                break;
            case EventMarStatus::NotMar: {
                out << "NOT constant\n";
                const auto& [a, b] = *c.witness;
                const auto& [va, vb] = *c.witness_values;
                out << "    g(" << e.pattern.str() << " | y=" << format_values(a.y)
                    << ") = " << va.str() << "\n";
                out << "    g(" << e.pattern.str() << " | y=" << format_values(b.y)
                    << ") = " << vb.str() << "\n";
                break;
            }
            case EventMarStatus::ZeroMassExcluded:
                out << "excluded, mechanism undefined on every member\n";
                break;
        }
    }

    MarVerdict verdict = is_everywhere_mar(g);
    out << "\n";
    if (verdict.kind == MarVerdict::Kind::EverywhereMar) {
        out << "verdict: EverywhereMAR";
        if (!verdict.excluded_events.empty())
            out << " (" << plural(verdict.excluded_events.size(), "zero-mass event")
                << " excluded)";
        out << "\n";
    } else {
        out << "verdict: NotMAR\n";
        out << "witness: " << describe_event(space, *verdict.event) << ", y="
            << format_values(verdict.witness->first.y) << " vs y="
            << format_values(verdict.witness->second.y) << ", mechanism values "
            << verdict.witness_values->first.str() << " vs "
            << verdict.witness_values->second.str() << "\n";
    }
    return {CommandStatus::Ok, out.str()};
}

CommandResult cmd_pryobs(const ParsedModel& model, RangeMode mode) {
    SelectionModel sm = to_selection(model);
    ObservedMechanism om = observed_mechanism(sm.mechanism, mode);

    std::ostringstream out;
    out << "P(R = r | Y_obs), the " << (mode == RangeMode::Sup ? "supremum" : "infimum")
        << " of the mechanism over each observable data event\n\n";
    for (std::size_t i = 0; i < om.events.size(); ++i) {
        out << "  " << describe_event(om.space, om.events[i]) << ": ";
        if (om.values[i])
            out << om.values[i]->str() << "\n";
        else
            out << "undefined (zero-mass event)\n";
    }
    return {CommandStatus::Ok, out.str()};
}

namespace {

CommandResult check_standard_equation(const ParsedModel& model) {
    SelectionModel sm = to_selection(model);
    const Mechanism& g = sm.mechanism;
    std::vector<ObservableDataEvent> events = enumerate_events(g.space(), g.patterns());
    std::size_t checked = 0;
    std::size_t skipped = 0;
    for (const ObservableDataEvent& e : events) {
        RestrictionRange range = restriction_range_defined(g, e);
        if (range.values.empty()) {
            ++skipped;
            continue;
        }
        ++checked;
        if (standard_equation_holds(g, e, RangeMode::Sup)) continue;

        const Rational sup = *range.values.rbegin();
        std::ostringstream out;
        out << "check standard-equation: FAIL\n";
        out << "event: " << describe_event(g.space(), e) << "\n";
        out << "  sup of the restricted mechanism range = " << sup.str() << "\n";
        for (const auto& [point, value] : range.per_point) {
            if (value && *value != sup) {
                out << "  g(" << e.pattern.str() << " | y=" << format_values(point.y)
                    << ") = " << value->str() << " at missing part y_mis = "
                    << format_values(project_missing(point.y, e.pattern)) << "\n";
                break;
            }
        }
        out << "the mechanism varies within the event, so P(R|Y) is not a function of "
               "the observed data alone\n";
        return {CommandStatus::AssertFailed, out.str()};
    }
    std::ostringstream out;
    out << "check standard-equation: PASS on " << plural(checked, "event");
    if (skipped > 0) out << ", " << plural(skipped, "zero-mass event") << " skipped";
    out << "\n";
    return {CommandStatus::Ok, out.str()};
}

CommandResult check_drawn_at_random(const FullDensity& h) {
    std::vector<ObservableDataEvent> events = enumerate_events(h.space(), h.patterns());
    std::vector<Rational> f = marginal_y(h);
    std::size_t checked = 0;
    std::size_t skipped = 0;
    for (const ObservableDataEvent& e : events) {
        Rational event_p = event_h_mass(h, e);
        if (event_p.is_zero()) {
            ++skipped;
            continue;
        }
        ++checked;
        if (drawn_at_random_check(h, e)) continue;

        Rational event_f;
        for (const Point& p : e.members) event_f += f[h.space().index_of(p.y)];
        std::ostringstream out;
        out << "check drawn-at-random: FAIL\n";
        out << "event: " << describe_event(h.space(), e) << "\n";
        for (const Point& p : e.members) {
            const Rational& fy = f[h.space().index_of(p.y)];
            if (h.prob(p) * event_f == fy * event_p) continue;
            std::vector<int> y_mis = project_missing(p.y, e.pattern);
            out << "  at y=" << format_values(p.y) << ", missing part " << format_values(y_mis)
                << ":\n";
            out << "    p(y_mis | y_obs, r) = " << (h.prob(p) / event_p).str() << "\n";
            out << "    p(y_mis | y_obs)    = " << (fy / event_f).str() << "\n";
            break;
        }
        out << "within this event the missing values do not follow the population "
               "conditional law\n";
        return {CommandStatus::AssertFailed, out.str()};
    }
    std::ostringstream out;
    out << "check drawn-at-random: PASS on " << plural(checked, "event");
    if (skipped > 0) out << ", " << plural(skipped, "zero-mass event") << " skipped";
    out << "\n";
    return {CommandStatus::Ok, out.str()};
}

CommandResult check_shape(const FullDensity& h) {
    std::vector<ObservableDataEvent> events = enumerate_events(h.space(), h.patterns());
    std::vector<Rational> f = marginal_y(h);
    std::size_t checked = 0;
    std::size_t skipped = 0;
    for (const ObservableDataEvent& e : events) {
        if (event_h_mass(h, e).is_zero()) {
            ++skipped;
            continue;
        }
        ++checked;
        auto witness = shape_witness_indices(h, e);
        if (!witness) continue;

        const Point& a = e.members[witness->first];
        const Point& b = e.members[witness->second];
        std::ostringstream out;
        out << "check shape: FAIL\n";
        out << "event: " << describe_event(h.space(), e) << "\n";
        out << "restricted to the event, p(y | r) is not proportional to f(y):\n";
        out << "  y=" << format_values(a.y) << ": h = " << h.prob(a).str()
            << ", f = " << f[h.space().index_of(a.y)].str() << "\n";
        out << "  y=" << format_values(b.y) << ": h = " << h.prob(b).str()
            << ", f = " << f[h.space().index_of(b.y)].str() << "\n";
        out << "the cross products differ, so no constant c gives p(y|r) = c f(y)\n";
        return {CommandStatus::AssertFailed, out.str()};
    }
    std::ostringstream out;
    out << "check shape: PASS on " << plural(checked, "event");
    if (skipped > 0) out << ", " << plural(skipped, "zero-mass event") << " skipped";
    out << "\n";
    return {CommandStatus::Ok, out.str()};
}

}  // namespace

CommandResult cmd_check(const ParsedModel& model, std::string_view property) {
    if (property == "standard-equation") return check_standard_equation(model);
    if (property == "drawn-at-random") return check_drawn_at_random(to_density(model));
    if (property == "shape") return check_shape(to_density(model));
    throw Error("unknown property '" + std::string(property) +
                "'; expected drawn-at-random, shape, or standard-equation");
}

CommandResult cmd_reconstruct(const ParsedModel& model) {
    FullDensity h = to_density(model);
    SelectionModel sm = selection_factorize(h);
    ObservedMechanism om = observed_mechanism(sm.mechanism, RangeMode::Sup);
    FullDensity rebuilt = reconstruct_full(sm.marginal, om);

    if (rebuilt == h) {
        std::ostringstream out;
        out << "reconstruction: exact\n";
        out << "f(y) * P(R|Y_obs) reproduces h(y, r) at every point\n";
        return {CommandStatus::Ok, out.str()};
    }

    const DataSpace& space = h.space();
    const PatternSet& patterns = h.patterns();
    std::ostringstream out;
    out << "reconstruction: MISMATCH\n";
    bool found = false;
    for (std::size_t yi = 0; yi < space.value_count() && !found; ++yi) {
        for (std::size_t ri = 0; ri < patterns.size() && !found; ++ri) {
            if (h.prob(yi, ri) == rebuilt.prob(yi, ri)) continue;
            out << "first differing entry: y=" << format_values(space.value_at(yi))
                << ", r=" << patterns.at(ri).str() << "\n";
            out << "  original h       = " << h.prob(yi, ri).str() << "\n";
            out << "  f * P(R|Y_obs)   = " << rebuilt.prob(yi, ri).str() << "\n";
            found = true;
        }
    }
    MarVerdict verdict = is_everywhere_mar(sm.mechanism);
    if (!verdict.mar() && verdict.event) {
        out << "cause: the mechanism is not constant on " << describe_event(space, *verdict.event)
            << ", so no function of the observed data reproduces it\n";
    }
    return {CommandStatus::AssertFailed, out.str()};
}

CommandResult cmd_generate(const GenerateRequest& request) {
    using Kind = MechanismSpec::Kind;
    const Kind kind = request.spec.kind;

    if (request.n_variables == 0) throw Error("generate: need at least one variable");
    if (request.n_variables > 16) throw Error("generate: at most 16 variables");
    if (request.n_levels < 2) throw Error("generate: need at least two levels per variable");
    std::size_t value_count = 1;
    for (std::size_t i = 0; i < request.n_variables; ++i) {
        value_count *= request.n_levels;
        if (value_count > 1'000'000)
            throw Error("generate: the model would exceed 1e6 table entries");
    }

    std::vector<Variable> vars;
    vars.reserve(request.n_variables);
    for (std::size_t i = 0; i < request.n_variables; ++i) {
        Variable v;
        v.name = "y" + std::to_string(i + 1);
        for (std::size_t c = 0; c < request.n_levels; ++c) v.levels.push_back(static_cast<int>(c));
        vars.push_back(std::move(v));
    }
    DataSpace space(std::move(vars));

    if (request.patterns && kind == Kind::MonotoneDropout) {
        throw Error("generate: monotone dropout builds its own pattern chain; "
                    "an explicit pattern list is not accepted");
    }
    PatternSet patterns =
        request.patterns
            ? PatternSet(*request.patterns)
            : default_patterns(kind, request.n_variables, request.spec.include_all_zeros);
    if (value_count * patterns.size() > 1'000'000)
        throw Error("generate: the model would exceed 1e6 table entries");

    GeneratorOptions opts{request.spec.seed, request.spec.max_denominator};
    std::optional<ObservableDataEvent> mnar_target;
    Mechanism g = [&] {
        switch (kind) {
            case Kind::Constant: return random_constant(space, patterns, opts);
            case Kind::CommonObserved: return random_common_observed(space, patterns, opts);
            case Kind::MonotoneDropout:
                return random_monotone(space, request.spec.include_all_zeros, opts);
            case Kind::PerturbedMnar: {
                MnarInstance inst = random_mnar(space, patterns, opts);
                mnar_target = std::move(inst.target);
                return std::move(inst.mechanism);
            }
        }
        throw Error("generate: unknown mechanism kind");
    }();

    // Fixed substream so the marginal never shares draws with the mechanism.
    constexpr std::uint64_t kMarginalStream = 0x6d617267;
    SplitMix64 marginal_rng(SplitMix64::derive(request.spec.seed, kMarginalStream));
    SelectionModel sm{random_positive_marginal(space, marginal_rng, request.spec.max_denominator),
                      std::move(g)};

    std::ostringstream out;
    out << "# generated selection model\n";
    out << "# construction: " << kind_name(kind) << ", seed " << request.spec.seed
        << ", max denominator " << request.spec.max_denominator << "\n";
    switch (kind) {
        case Kind::Constant:
            out << "# the mechanism ignores y entirely: MCAR, hence everywhere MAR\n";
            break;
        case Kind::CommonObserved:
            out << "# the mechanism depends only on always-observed variables: everywhere MAR\n";
            break;
        case Kind::MonotoneDropout:
            out << "# dropout hazards depend on already-observed history only: everywhere MAR\n";
            break;
        case Kind::PerturbedMnar:
            out << "# constant mechanism perturbed at one member of "
                << describe_event(space, *mnar_target) << ": not MAR\n";
            break;
    }
    out << serialize_model(sm);
    return {CommandStatus::Ok, out.str()};
}

CommandResult cmd_sample(const ParsedModel& model, std::size_t n_rows, std::uint64_t seed) {
    FullDensity h = to_density(model);
    return {CommandStatus::Ok, to_csv(sample_dataset(h, n_rows, seed))};
}

CommandResult cmd_bias(const ParsedModel& model, std::string_view variable) {
    FullDensity h = to_density(model);
    const DataSpace& space = h.space();
    std::size_t index = 0;
    if (!variable.empty()) {
        auto found = space.variable_index(variable);
        if (!found) {
            std::string names;
            for (const Variable& v : space.variables()) {
                if (!names.empty()) names += ", ";
                names += v.name;
            }
            throw Error("unknown variable '" + std::string(variable) + "'; the space has " +
                        names);
        }
        index = *found;
    }
    BiasReport report = complete_case_bias(h, index);
    const std::string& name = space.variable(index).name;
    const std::string ones = MissingnessPattern::all_ones(space.arity()).str();

    std::ostringstream out;
    out << "complete-case bias for " << name << "\n\n";
    out << "  complete-case mean  E[" << name << " | R = " << ones
        << "] = " << report.complete_case_mean.str() << "\n";
    out << "  marginal mean       E[" << name << "] = " << report.marginal_mean.str() << "\n";
    out << "  difference          " << report.difference.str() << "\n\n";
    if (report.difference.is_zero()) {
        out << "the complete cases reproduce the marginal mean exactly\n";
    } else if (report.difference.sign() > 0) {
        out << "complete-case analysis overstates the mean by " << report.difference.str()
            << "\n";
    } else {
        out << "complete-case analysis understates the mean by " << (-report.difference).str()
            << "\n";
    }
    return {CommandStatus::Ok, out.str()};
}

CommandResult cmd_plot(const ParsedModel& model, int figure, FigureFormat format,
                       const EventSelector& selector) {
    FullDensity h = to_density(model);
    FigureKind kind;
    switch (figure) {
        case 1: kind = FigureKind::FullDistribution; break;
        case 2: kind = FigureKind::EventPanel; break;
        case 3: kind = FigureKind::ShapeComparison; break;
        default: throw Error("figure must be 1, 2, or 3");
    }
    return {CommandStatus::Ok, emit_figure(h, kind, format, selector)};
}

}  // namespace marlab
