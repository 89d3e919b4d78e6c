#include "core/distribution.hpp"

#include <set>
#include <sstream>

namespace marlab {

namespace {

std::string describe_slot(const DataSpace& space, const PatternSet& patterns,
                          std::size_t y_index, std::size_t r_index) {
    return "(y=" + format_values(space.value_at(y_index)) +
           ", r=" + patterns.at(r_index).str() + ")";
}

void require_valid(const ValidationReport& report, const char* what) {
    if (report.valid()) return;
    std::string msg = std::string(what) + " is invalid";
    for (const auto& p : report.problems) msg += "; " + p;
    throw Error(msg);
}

}  // namespace

FullDensity::FullDensity(DataSpace space, PatternSet patterns,
                         std::vector<std::optional<Rational>> table)
    : space_(std::move(space)), patterns_(std::move(patterns)), table_(std::move(table)) {
    if (space_.arity() != patterns_.arity())
        throw Error("data space and pattern set have different arity");
    if (table_.size() != space_.value_count() * patterns_.size())
        throw Error("density table has wrong size");
}

FullDensity FullDensity::from_table(DataSpace space, PatternSet patterns,
                                    std::vector<Rational> table) {
    std::vector<std::optional<Rational>> t;
    t.reserve(table.size());
    for (auto& p : table) t.emplace_back(std::move(p));
    return FullDensity(std::move(space), std::move(patterns), std::move(t));
}

FullDensity FullDensity::from_entries(
    DataSpace space, PatternSet patterns,
    const std::map<std::pair<std::size_t, std::size_t>, Rational>& entries) {
    std::vector<std::optional<Rational>> t(space.value_count() * patterns.size());
    const std::size_t k = patterns.size();
    for (const auto& [key, p] : entries) {
        if (key.first >= space.value_count() || key.second >= k)
            throw Error("density entry index out of range");
        t[key.first * k + key.second] = p;
    }
    return FullDensity(std::move(space), std::move(patterns), std::move(t));
}

std::size_t FullDensity::slot(std::size_t y_index, std::size_t r_index) const {
    if (y_index >= space_.value_count() || r_index >= patterns_.size())
        throw Error("density index out of range");
    return y_index * patterns_.size() + r_index;
}

bool FullDensity::has_entry(std::size_t y_index, std::size_t r_index) const {
    return table_[slot(y_index, r_index)].has_value();
}

const Rational& FullDensity::prob(std::size_t y_index, std::size_t r_index) const {
    const auto& e = table_[slot(y_index, r_index)];
    if (!e)
        throw Error("density has no entry for " +
                    describe_slot(space_, patterns_, y_index, r_index));
    return *e;
}

const Rational& FullDensity::prob(const Point& p) const {
    const auto r_index = patterns_.index_of(p.r);
    if (!r_index) throw Error("pattern " + p.r.str() + " is not in the pattern set");
    return prob(space_.index_of(p.y), *r_index);
}

bool FullDensity::is_complete() const {
    for (const auto& e : table_)
        if (!e) return false;
    return true;
}

ValidationReport validate(const FullDensity& h) {
    ValidationReport report;
    const std::size_t k = h.patterns().size();
    Rational mass;
    for (std::size_t yi = 0; yi < h.space().value_count(); ++yi) {
        for (std::size_t ri = 0; ri < k; ++ri) {
            if (!h.has_entry(yi, ri)) {
                report.complete = false;
                report.problems.push_back(
                    "incomplete table: no entry for " +
                    describe_slot(h.space(), h.patterns(), yi, ri));
                continue;
            }
            const Rational& p = h.prob(yi, ri);
            if (!p.is_probability()) {
                report.range_ok = false;
                report.problems.push_back(
                    "entry " + p.str() + " for " +
                    describe_slot(h.space(), h.patterns(), yi, ri) + " is outside [0,1]");
            }
            mass += p;
        }
    }
    report.total_mass = mass;
    if (mass != Rational(1)) {
        report.mass_ok = false;
        report.problems.push_back("mass != 1: table sums to " + mass.str());
    }
    return report;
}

Mechanism::Mechanism(DataSpace space, PatternSet patterns,
                     std::vector<std::optional<Rational>> table)
    : space_(std::move(space)), patterns_(std::move(patterns)), table_(std::move(table)) {
    if (space_.arity() != patterns_.arity())
        throw Error("data space and pattern set have different arity");
    if (table_.size() != space_.value_count() * patterns_.size())
        throw Error("mechanism table has wrong size");
}

Mechanism Mechanism::total(DataSpace space, PatternSet patterns, std::vector<Rational> table) {
    std::vector<std::optional<Rational>> t;
    t.reserve(table.size());
    for (auto& p : table) t.emplace_back(std::move(p));
    return Mechanism(std::move(space), std::move(patterns), std::move(t));
}

std::size_t Mechanism::slot(std::size_t y_index, std::size_t r_index) const {
    if (y_index >= space_.value_count() || r_index >= patterns_.size())
        throw Error("mechanism index out of range");
    return y_index * patterns_.size() + r_index;
}

bool Mechanism::defined(std::size_t y_index, std::size_t r_index) const {
    return table_[slot(y_index, r_index)].has_value();
}

const Rational& Mechanism::at(std::size_t y_index, std::size_t r_index) const {
    const auto& e = table_[slot(y_index, r_index)];
    if (!e)
        throw Error("mechanism undefined at " +
                    describe_slot(space_, patterns_, y_index, r_index) +
                    " (zero marginal mass)");
    return *e;
}

std::optional<Rational> Mechanism::maybe_at(std::size_t y_index, std::size_t r_index) const {
    return table_[slot(y_index, r_index)];
}

const Rational& Mechanism::at(const Point& p) const {
    const auto r_index = patterns_.index_of(p.r);
    if (!r_index) throw Error("pattern " + p.r.str() + " is not in the pattern set");
    return at(space_.index_of(p.y), *r_index);
}

std::optional<Rational> Mechanism::maybe_at(const Point& p) const {
    const auto r_index = patterns_.index_of(p.r);
    if (!r_index) throw Error("pattern " + p.r.str() + " is not in the pattern set");
    return maybe_at(space_.index_of(p.y), *r_index);
}

bool Mechanism::is_total() const {
    for (const auto& e : table_)
        if (!e) return false;
    return true;
}

ValidationReport validate(const Mechanism& g) {
    ValidationReport report;
    const std::size_t k = g.patterns().size();
    for (std::size_t yi = 0; yi < g.space().value_count(); ++yi) {
        std::size_t defined = 0;
        Rational row;
        for (std::size_t ri = 0; ri < k; ++ri) {
            const auto e = g.maybe_at(yi, ri);
            if (!e) continue;
            ++defined;
            row += *e;
            if (!e->is_probability()) {
                report.range_ok = false;
                report.problems.push_back(
                    "mechanism entry " + e->str() + " for " +
                    describe_slot(g.space(), g.patterns(), yi, ri) + " is outside [0,1]");
            }
        }
        if (defined == 0) continue;  // fully undefined row: zero-mass y
        if (defined < k) {
            report.complete = false;
            report.problems.push_back("mechanism row for y=" +
                                      format_values(g.space().value_at(yi)) +
                                      " is only partially defined");
            continue;
        }
        if (row != Rational(1)) {
            report.mass_ok = false;
            report.problems.push_back("mechanism rows for y=" +
                                      format_values(g.space().value_at(yi)) + " sum to " +
                                      row.str() + "; each row must sum to 1");
        }
    }
    return report;
}

ValidationReport validate(const SelectionModel& sm) {
    ValidationReport report;
    const auto& space = sm.space();
    if (sm.marginal.size() != space.value_count()) {
        report.complete = false;
        report.problems.push_back("marginal table has wrong size");
        return report;
    }
    Rational mass;
    for (std::size_t yi = 0; yi < sm.marginal.size(); ++yi) {
        const Rational& f = sm.marginal[yi];
        if (!f.is_probability()) {
            report.range_ok = false;
            report.problems.push_back("marginal entry " + f.str() + " for y=" +
                                      format_values(space.value_at(yi)) +
                                      " is outside [0,1]");
        }
        mass += f;
    }
    report.total_mass = mass;
    if (mass != Rational(1)) {
        report.mass_ok = false;
        report.problems.push_back("marginal mass != 1: sums to " + mass.str());
    }

    const ValidationReport mech = validate(sm.mechanism);
    report.complete = report.complete && mech.complete;
    report.range_ok = report.range_ok && mech.range_ok;
    report.mass_ok = report.mass_ok && mech.mass_ok;
    report.problems.insert(report.problems.end(), mech.problems.begin(), mech.problems.end());

    // the mechanism must be defined wherever the marginal carries mass
    for (std::size_t yi = 0; yi < sm.marginal.size(); ++yi) {
        if (sm.marginal[yi].is_zero()) continue;
        for (std::size_t ri = 0; ri < sm.patterns().size(); ++ri) {
            if (!sm.mechanism.defined(yi, ri)) {
                report.complete = false;
                report.problems.push_back("mechanism undefined at y=" +
                                          format_values(space.value_at(yi)) +
                                          " although f(y) > 0");
                break;
            }
        }
    }
    return report;
}

ValidationReport validate(const PatternMixture& pm) {
    ValidationReport report;
    const std::size_t k = pm.patterns.size();
    if (pm.pattern_marginal.size() != k || pm.components.size() != k) {
        report.complete = false;
        report.problems.push_back("pattern-mixture tables have wrong size");
        return report;
    }
    Rational mass;
    for (std::size_t ri = 0; ri < k; ++ri) {
        const Rational& pr = pm.pattern_marginal[ri];
        if (!pr.is_probability()) {
            report.range_ok = false;
            report.problems.push_back("pattern marginal " + pr.str() + " for r=" +
                                      pm.patterns.at(ri).str() + " is outside [0,1]");
        }
        mass += pr;
        const bool needs_component = pr.sign() > 0;
        if (needs_component && !pm.components[ri]) {
            report.complete = false;
            report.problems.push_back("no component for pattern " + pm.patterns.at(ri).str() +
                                      " although its marginal is positive");
            continue;
        }
        if (!pm.components[ri]) continue;
        const auto& comp = *pm.components[ri];
        if (comp.size() != pm.space.value_count()) {
            report.complete = false;
            report.problems.push_back("component for pattern " + pm.patterns.at(ri).str() +
                                      " has wrong size");
            continue;
        }
        Rational comp_mass;
        for (std::size_t yi = 0; yi < comp.size(); ++yi) {
            if (!comp[yi].is_probability()) {
                report.range_ok = false;
                report.problems.push_back("component entry " + comp[yi].str() + " for " +
                                          describe_slot(pm.space, pm.patterns, yi, ri) +
                                          " is outside [0,1]");
            }
            comp_mass += comp[yi];
        }
        if (comp_mass != Rational(1)) {
            report.mass_ok = false;
            report.problems.push_back("component for pattern " + pm.patterns.at(ri).str() +
                                      " sums to " + comp_mass.str() + "; must sum to 1");
        }
    }
    report.total_mass = mass;
    if (mass != Rational(1)) {
        report.mass_ok = false;
        report.problems.push_back("pattern marginal mass != 1: sums to " + mass.str());
    }
    return report;
}

DensityFamily::DensityFamily(std::string label,
                             std::vector<std::pair<std::string, FullDensity>> members)
    : label_(std::move(label)), members_(std::move(members)) {
    if (members_.empty()) throw Error("density family is empty");
    const auto& first = members_.front().second;
    for (const auto& [name, h] : members_) {
        if (!(h.space() == first.space()) || !(h.patterns() == first.patterns()))
            throw Error("density family member " + name +
                        " uses a different space or pattern set");
    }
}

std::vector<Rational> marginal_y(const FullDensity& h) {
    require_valid(validate(h), "density");
    std::vector<Rational> f(h.space().value_count());
    for (std::size_t yi = 0; yi < f.size(); ++yi)
        for (std::size_t ri = 0; ri < h.patterns().size(); ++ri)
            f[yi] += h.prob(yi, ri);
    return f;
}

std::vector<Rational> marginal_r(const FullDensity& h) {
    require_valid(validate(h), "density");
    std::vector<Rational> p(h.patterns().size());
    for (std::size_t yi = 0; yi < h.space().value_count(); ++yi)
        for (std::size_t ri = 0; ri < p.size(); ++ri)
            p[ri] += h.prob(yi, ri);
    return p;
}

SelectionModel selection_factorize(const FullDensity& h) {
    require_valid(validate(h), "density");
    const std::size_t k = h.patterns().size();
    std::vector<Rational> f(h.space().value_count());
    for (std::size_t yi = 0; yi < f.size(); ++yi)
        for (std::size_t ri = 0; ri < k; ++ri)
            f[yi] += h.prob(yi, ri);

    std::vector<std::optional<Rational>> g(f.size() * k);
    for (std::size_t yi = 0; yi < f.size(); ++yi) {
        if (f[yi].is_zero()) continue;  // g stays undefined on this row
        for (std::size_t ri = 0; ri < k; ++ri)
            g[yi * k + ri] = h.prob(yi, ri) / f[yi];
    }
    return SelectionModel{std::move(f), Mechanism(h.space(), h.patterns(), std::move(g))};
}

PatternMixture pattern_mixture_factorize(const FullDensity& h) {
    require_valid(validate(h), "density");
    const std::size_t k = h.patterns().size();
    const std::size_t m = h.space().value_count();
    std::vector<Rational> pr(k);
    for (std::size_t yi = 0; yi < m; ++yi)
        for (std::size_t ri = 0; ri < k; ++ri)
            pr[ri] += h.prob(yi, ri);

    std::vector<std::optional<std::vector<Rational>>> components(k);
    for (std::size_t ri = 0; ri < k; ++ri) {
        if (pr[ri].is_zero()) continue;
        std::vector<Rational> comp(m);
        for (std::size_t yi = 0; yi < m; ++yi) comp[yi] = h.prob(yi, ri) / pr[ri];
        components[ri] = std::move(comp);
    }
    return PatternMixture{h.space(), h.patterns(), std::move(pr), std::move(components)};
}

FullDensity recompose(const SelectionModel& sm) {
    const ValidationReport report = validate(sm);
    require_valid(report, "selection model");
    const std::size_t k = sm.patterns().size();
    std::vector<Rational> table(sm.marginal.size() * k);
    for (std::size_t yi = 0; yi < sm.marginal.size(); ++yi) {
        for (std::size_t ri = 0; ri < k; ++ri) {
            if (sm.marginal[yi].is_zero()) continue;  // 0 * anything = 0
            table[yi * k + ri] = sm.marginal[yi] * sm.mechanism.at(yi, ri);
        }
    }
    return FullDensity::from_table(sm.space(), sm.patterns(), std::move(table));
}

FullDensity recompose(const PatternMixture& pm) {
    require_valid(validate(pm), "pattern mixture");
    const std::size_t k = pm.patterns.size();
    const std::size_t m = pm.space.value_count();
    std::vector<Rational> table(m * k);
    for (std::size_t ri = 0; ri < k; ++ri) {
        if (pm.pattern_marginal[ri].is_zero()) continue;
        const auto& comp = *pm.components[ri];
        for (std::size_t yi = 0; yi < m; ++yi)
            table[yi * k + ri] = pm.pattern_marginal[ri] * comp[yi];
    }
    return FullDensity::from_table(pm.space, pm.patterns, std::move(table));
}

}  // namespace marlab
