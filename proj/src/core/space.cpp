#include "core/space.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>

namespace marlab {

DataSpace::DataSpace(std::vector<Variable> variables) : variables_(std::move(variables)) {
    if (variables_.empty()) throw Error("data space needs at least one variable");
    std::set<std::string> names;
    for (const auto& v : variables_) {
        if (v.name.empty()) throw Error("variable with empty name");
        if (!names.insert(v.name).second) throw Error("duplicate variable name: " + v.name);
        if (v.levels.empty()) throw Error("variable " + v.name + " has no levels");
        std::map<int, std::size_t> pos;
        for (std::size_t i = 0; i < v.levels.size(); ++i) {
            if (!pos.emplace(v.levels[i], i).second)
                throw Error("variable " + v.name + " has duplicate level codes");
        }
        if (value_count_ > std::numeric_limits<std::size_t>::max() / v.levels.size())
            throw Error("data space too large to enumerate");
        value_count_ *= v.levels.size();
        level_pos_.push_back(std::move(pos));
    }
}

std::optional<std::size_t> DataSpace::variable_index(std::string_view name) const {
    for (std::size_t i = 0; i < variables_.size(); ++i)
        if (variables_[i].name == name) return i;
    return std::nullopt;
}

bool DataSpace::contains(std::span<const int> y) const {
    if (y.size() != variables_.size()) return false;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (!level_pos_[i].count(y[i])) return false;
    return true;
}

std::size_t DataSpace::index_of(std::span<const int> y) const {
    if (y.size() != variables_.size())
        throw Error("data vector has wrong length for this space");
    std::size_t idx = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        auto it = level_pos_[i].find(y[i]);
        if (it == level_pos_[i].end())
            throw Error("value " + std::to_string(y[i]) + " is not a level of variable " +
                        variables_[i].name);
        idx = idx * variables_[i].levels.size() + it->second;
    }
    return idx;
}

std::vector<int> DataSpace::value_at(std::size_t index) const {
    if (index >= value_count_) throw Error("data vector index out of range");
    std::vector<int> y(variables_.size());
    for (std::size_t i = variables_.size(); i-- > 0;) {
        const auto& levels = variables_[i].levels;
        y[i] = levels[index % levels.size()];
        index /= levels.size();
    }
    return y;
}

MissingnessPattern::MissingnessPattern(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    if (bits_.empty()) throw Error("empty missingness pattern");
    for (auto b : bits_)
        if (b > 1) throw Error("missingness pattern bits must be 0 or 1");
}

MissingnessPattern MissingnessPattern::all_ones(std::size_t n) {
    return MissingnessPattern(std::vector<std::uint8_t>(n, 1));
}

MissingnessPattern MissingnessPattern::all_zeros(std::size_t n) {
    return MissingnessPattern(std::vector<std::uint8_t>(n, 0));
}

MissingnessPattern MissingnessPattern::parse(std::string_view bitstring) {
    std::vector<std::uint8_t> bits;
    bits.reserve(bitstring.size());
    for (char c : bitstring) {
        if (c != '0' && c != '1')
            throw Error("bad pattern bitstring: " + std::string(bitstring));
        bits.push_back(c == '1' ? 1 : 0);
    }
    return MissingnessPattern(std::move(bits));
}

std::size_t MissingnessPattern::observed_count() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

std::vector<std::size_t> MissingnessPattern::observed_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < bits_.size(); ++i)
        if (bits_[i]) out.push_back(i);
    return out;
}

std::vector<std::size_t> MissingnessPattern::missing_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < bits_.size(); ++i)
        if (!bits_[i]) out.push_back(i);
    return out;
}

bool MissingnessPattern::is_all_ones() const {
    return observed_count() == bits_.size();
}

bool MissingnessPattern::is_all_zeros() const {
    return observed_count() == 0;
}

std::string MissingnessPattern::str() const {
    std::string s;
    s.reserve(bits_.size());
    for (auto b : bits_) s.push_back(b ? '1' : '0');
    return s;
}

PatternSet::PatternSet(std::vector<MissingnessPattern> patterns) : patterns_(std::move(patterns)) {
    if (patterns_.empty()) throw Error("pattern set is empty");
    const std::size_t n = patterns_.front().size();
    if (!patterns_.front().is_all_ones())
        throw Error("first pattern must be the all-ones (complete case) pattern");
    std::set<MissingnessPattern> seen;
    for (const auto& p : patterns_) {
        if (p.size() != n) throw Error("patterns have differing lengths");
        if (!seen.insert(p).second) throw Error("duplicate pattern " + p.str());
    }
}

std::optional<std::size_t> PatternSet::index_of(const MissingnessPattern& r) const {
    for (std::size_t j = 0; j < patterns_.size(); ++j)
        if (patterns_[j] == r) return j;
    return std::nullopt;
}

std::vector<int> project_observed(std::span<const int> y, const MissingnessPattern& r) {
    if (y.size() != r.size()) throw Error("projection length mismatch");
    std::vector<int> out;
    out.reserve(r.observed_count());
    for (std::size_t i = 0; i < y.size(); ++i)
        if (r.observed(i)) out.push_back(y[i]);
    return out;
}

std::vector<int> project_missing(std::span<const int> y, const MissingnessPattern& r) {
    if (y.size() != r.size()) throw Error("projection length mismatch");
    std::vector<int> out;
    out.reserve(r.size() - r.observed_count());
    for (std::size_t i = 0; i < y.size(); ++i)
        if (!r.observed(i)) out.push_back(y[i]);
    return out;
}

std::vector<int> merge_projections(std::span<const int> observed_part,
                                   std::span<const int> missing_part,
                                   const MissingnessPattern& r) {
    if (observed_part.size() + missing_part.size() != r.size())
        throw Error("projection parts do not fill the pattern");
    if (observed_part.size() != r.observed_count())
        throw Error("observed part has wrong length for the pattern");
    std::vector<int> y(r.size());
    std::size_t oi = 0, mi = 0;
    for (std::size_t i = 0; i < r.size(); ++i)
        y[i] = r.observed(i) ? observed_part[oi++] : missing_part[mi++];
    return y;
}

bool ob_equivalent(const Point& a, const Point& b) {
    if (a.y.size() != b.y.size() || a.r.size() != b.r.size())
        throw Error("points from different spaces");
    if (!(a.r == b.r)) return false;
    return project_observed(a.y, a.r) == project_observed(b.y, b.r);
}

namespace {

void validate_point(const DataSpace& space, const PatternSet& patterns, const Point& p) {
    if (!space.contains(p.y)) throw Error("point value vector is not in the data space");
    if (!patterns.index_of(p.r)) throw Error("point pattern " + p.r.str() + " is not in the pattern set");
}

/// Enumerates the members of the event fixed by (pattern, observed values),
/// completing the free coordinates in canonical order.
std::vector<Point> enumerate_members(const DataSpace& space, const MissingnessPattern& pattern,
                                     const std::map<std::size_t, int>& observed_values) {
    const auto free_idx = pattern.missing_indices();
    std::vector<int> y(space.arity());
    for (const auto& [i, v] : observed_values) y[i] = v;

    std::vector<Point> members;
    std::vector<std::size_t> cursor(free_idx.size(), 0);
    for (;;) {
        for (std::size_t t = 0; t < free_idx.size(); ++t)
            y[free_idx[t]] = space.variable(free_idx[t]).levels[cursor[t]];
        members.push_back(Point{y, pattern});
        // advance mixed-radix cursor, last free coordinate fastest
        std::size_t t = free_idx.size();
        while (t-- > 0) {
            if (++cursor[t] < space.variable(free_idx[t]).levels.size()) break;
            cursor[t] = 0;
            if (t == 0) return members;
        }
        if (free_idx.empty()) return members;
    }
}

}  // namespace

ObservableDataEvent observable_event(const DataSpace& space, const PatternSet& patterns,
                                     const Point& p) {
    validate_point(space, patterns, p);
    ObservableDataEvent e;
    e.pattern = p.r;
    for (std::size_t i : p.r.observed_indices()) e.observed_values[i] = p.y[i];
    e.members = enumerate_members(space, e.pattern, e.observed_values);
    return e;
}

std::vector<ObservableDataEvent> enumerate_events(const DataSpace& space,
                                                  const PatternSet& patterns) {
    std::vector<ObservableDataEvent> events;
    for (std::size_t j = 0; j < patterns.size(); ++j) {
        const auto& r = patterns.at(j);
        const auto obs_idx = r.observed_indices();
        std::vector<std::size_t> cursor(obs_idx.size(), 0);
        for (;;) {
            ObservableDataEvent e;
            e.pattern = r;
            for (std::size_t t = 0; t < obs_idx.size(); ++t)
                e.observed_values[obs_idx[t]] = space.variable(obs_idx[t]).levels[cursor[t]];
            e.members = enumerate_members(space, r, e.observed_values);
            events.push_back(std::move(e));

            std::size_t t = obs_idx.size();
            bool done = obs_idx.empty();
            while (t-- > 0) {
                if (++cursor[t] < space.variable(obs_idx[t]).levels.size()) break;
                cursor[t] = 0;
                if (t == 0) done = true;
            }
            if (done) break;
        }
    }
    return events;
}

std::string format_values(std::span<const int> values) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) os << ',';
        os << values[i];
    }
    os << ')';
    return os.str();
}

std::string format_point(const Point& p) {
    return "(y=" + format_values(p.y) + ", r=" + p.r.str() + ")";
}

std::string describe_pattern(const DataSpace& space, const MissingnessPattern& r) {
    std::string observed;
    std::string missing;
    for (std::size_t i = 0; i < space.arity(); ++i) {
        std::string& side = r.observed(i) ? observed : missing;
        if (!side.empty()) side += ", ";
        side += space.variable(i).name;
    }
    return "observed: " + (observed.empty() ? "none" : observed) +
           "; missing: " + (missing.empty() ? "none" : missing);
}

std::string describe_event(const DataSpace& space, const ObservableDataEvent& e) {
    std::string out = "pattern " + e.pattern.str();
    if (e.observed_values.empty()) return out + ", nothing observed";
    for (const auto& [index, code] : e.observed_values) {
        out += ", " + space.variable(index).name + "=" + std::to_string(code);
    }
    return out;
}

}  // namespace marlab
