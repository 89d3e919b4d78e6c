#include "core/model_io.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

namespace marlab {

namespace {

const std::set<std::string> kSectionKeywords = {
    "space", "patterns", "density", "selection", "mixture",
    "marginal", "mechanism", "pattern-marginal", "component"};

struct Line {
    std::size_t number = 0;
    std::vector<std::string> tokens;
};

std::vector<Line> tokenize(std::string_view text) {
    std::vector<Line> lines;
    std::size_t number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        std::string_view raw =
            text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
        ++number;
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;

        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
        std::size_t hash = raw.find('#');
        if (hash != std::string_view::npos) raw = raw.substr(0, hash);

        Line line{number, {}};
        std::size_t t = 0;
        while (t < raw.size()) {
            while (t < raw.size() && (raw[t] == ' ' || raw[t] == '\t')) ++t;
            std::size_t start = t;
            while (t < raw.size() && raw[t] != ' ' && raw[t] != '\t') ++t;
            if (t > start) line.tokens.emplace_back(raw.substr(start, t - start));
        }
        if (!line.tokens.empty()) lines.push_back(std::move(line));
    }
    return lines;
}

bool is_section(const Line& line) { return kSectionKeywords.count(line.tokens[0]) != 0; }

int parse_level_code(const Line& line, const std::string& token) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw ParseError(line.number, "malformed level code '" + token + "'");
    }
    return value;
}

Rational parse_rational(const Line& line, const std::string& token) {
    std::optional<Rational> value = Rational::parse(token);
    if (!value) {
        if (token.find('.') != std::string::npos) {
            throw ParseError(line.number, "decimal probabilities are not accepted; write '" +
                                              token + "' as an exact rational p/q");
        }
        throw ParseError(line.number, "malformed rational '" + token + "'");
    }
    return *value;
}

MissingnessPattern parse_pattern_token(const Line& line, const std::string& token,
                                       std::size_t arity) {
    if (token.size() != arity) {
        throw ParseError(line.number, "pattern '" + token + "' has " +
                                          std::to_string(token.size()) + " bits; the space has " +
                                          std::to_string(arity) + " variables");
    }
    for (char c : token) {
        if (c != '0' && c != '1') {
            throw ParseError(line.number, "pattern '" + token + "' contains '" +
                                              std::string(1, c) + "'; only 0 and 1 are allowed");
        }
    }
    return MissingnessPattern::parse(token);
}

std::size_t parse_y_tokens(const Line& line, const DataSpace& space, std::size_t first) {
    std::vector<int> y;
    y.reserve(space.arity());
    for (std::size_t i = 0; i < space.arity(); ++i) {
        y.push_back(parse_level_code(line, line.tokens[first + i]));
    }
    if (!space.contains(y)) {
        throw ParseError(line.number, "value " + format_values(y) + " is not in the space");
    }
    return space.index_of(y);
}

std::size_t require_pattern_index(const Line& line, const PatternSet& patterns,
                                  const MissingnessPattern& r) {
    auto index = patterns.index_of(r);
    if (!index) {
        throw ParseError(line.number,
                         "pattern " + r.str() + " is not listed in the patterns section");
    }
    return *index;
}

struct LenientResult {
    ParsedModel model;
    std::size_t payload_line = 0;
};

LenientResult parse_internal(std::string_view text) {
    std::vector<Line> lines = tokenize(text);
    std::size_t i = 0;
    auto at_section = [&](const char* name) {
        return i < lines.size() && lines[i].tokens[0] == name;
    };

    // space
    if (lines.empty()) throw ParseError(1, "empty file; expected a 'space' section");
    if (!at_section("space") || lines[i].tokens.size() != 1) {
        throw ParseError(lines[i].number, "expected the 'space' section first");
    }
    ++i;
    std::vector<Variable> variables;
    std::set<std::string> names;
    for (; i < lines.size() && !is_section(lines[i]); ++i) {
        const Line& line = lines[i];
        if (line.tokens.size() < 2) {
            throw ParseError(line.number, "variable line needs a name and at least one level");
        }
        Variable v;
        v.name = line.tokens[0];
        if (kSectionKeywords.count(v.name)) {
            throw ParseError(line.number,
                             "variable name '" + v.name + "' collides with a section keyword");
        }
        std::set<int> seen;
        for (std::size_t t = 1; t < line.tokens.size(); ++t) {
            int code = parse_level_code(line, line.tokens[t]);
            if (!seen.insert(code).second) {
                throw ParseError(line.number, "duplicate level code " + std::to_string(code) +
                                                  " for variable " + v.name);
            }
            v.levels.push_back(code);
        }
        if (!names.insert(v.name).second) {
            throw ParseError(line.number, "duplicate variable name '" + v.name + "'");
        }
        variables.push_back(std::move(v));
    }
    if (variables.empty()) throw ParseError(lines[i - 1].number, "the space has no variables");
    DataSpace space(std::move(variables));

    // patterns
    if (!at_section("patterns") || lines[i].tokens.size() != 1) {
        std::size_t where = i < lines.size() ? lines[i].number : lines.back().number;
        throw ParseError(where, "expected the 'patterns' section after 'space'");
    }
    ++i;
    std::vector<MissingnessPattern> pattern_list;
    std::set<std::string> pattern_seen;
    for (; i < lines.size() && !is_section(lines[i]); ++i) {
        const Line& line = lines[i];
        if (line.tokens.size() != 1) {
            throw ParseError(line.number, "pattern line must be a single bitstring");
        }
        MissingnessPattern r = parse_pattern_token(line, line.tokens[0], space.arity());
        if (pattern_list.empty() && !r.is_all_ones()) {
            throw ParseError(line.number,
                             "the complete-case pattern (all ones) must be listed first");
        }
        if (!pattern_seen.insert(r.str()).second) {
            throw ParseError(line.number, "duplicate pattern " + r.str());
        }
        pattern_list.push_back(std::move(r));
    }
    if (pattern_list.empty()) {
        throw ParseError(lines[i - 1].number, "the patterns section is empty");
    }
    PatternSet patterns(std::move(pattern_list));
    const std::size_t k = patterns.size();
    const std::size_t n = space.arity();

    // payload
    if (i >= lines.size()) {
        throw ParseError(lines.back().number,
                         "expected a 'density', 'selection' or 'mixture' section");
    }
    const Line& header = lines[i];
    const std::string payload = header.tokens[0];
    const std::size_t payload_line = header.number;

    auto reject_trailing = [&](std::size_t j) {
        if (j < lines.size()) {
            throw ParseError(lines[j].number,
                             "unexpected section '" + lines[j].tokens[0] +
                                 "' after the model payload");
        }
    };

    if (payload == "density") {
        if (header.tokens.size() != 1) throw ParseError(header.number, "malformed section header");
        ++i;
        std::vector<std::optional<Rational>> table(space.value_count() * k);
        std::map<std::size_t, std::size_t> first_line;
        for (; i < lines.size() && !is_section(lines[i]); ++i) {
            const Line& line = lines[i];
            if (line.tokens.size() != n + 2) {
                throw ParseError(line.number,
                                 "density line must be: pattern, " + std::to_string(n) +
                                     " level codes, probability");
            }
            MissingnessPattern r = parse_pattern_token(line, line.tokens[0], n);
            std::size_t r_index = require_pattern_index(line, patterns, r);
            std::size_t y_index = parse_y_tokens(line, space, 1);
            std::size_t slot = y_index * k + r_index;
            if (table[slot]) {
                throw ParseError(line.number, "duplicate density entry (already given on line " +
                                                  std::to_string(first_line[slot]) + ")");
            }
            table[slot] = parse_rational(line, line.tokens[n + 1]);
            first_line[slot] = line.number;
        }
        reject_trailing(i);
        return {FullDensity(std::move(space), std::move(patterns), std::move(table)),
                payload_line};
    }

    if (payload == "selection") {
        if (header.tokens.size() != 1) throw ParseError(header.number, "malformed section header");
        ++i;
        std::vector<std::optional<Rational>> marginal(space.value_count());
        std::vector<std::optional<Rational>> mech(space.value_count() * k);
        bool saw_marginal = false;
        bool saw_mechanism = false;
        while (i < lines.size()) {
            const Line& sub = lines[i];
            if (sub.tokens[0] == "marginal" && sub.tokens.size() == 1) {
                if (saw_marginal) throw ParseError(sub.number, "duplicate 'marginal' block");
                saw_marginal = true;
                ++i;
                for (; i < lines.size() && !is_section(lines[i]); ++i) {
                    const Line& line = lines[i];
                    if (line.tokens.size() != n + 1) {
                        throw ParseError(line.number, "marginal line must be: " +
                                                          std::to_string(n) +
                                                          " level codes, probability");
                    }
                    std::size_t y_index = parse_y_tokens(line, space, 0);
                    if (marginal[y_index]) {
                        throw ParseError(line.number, "duplicate marginal entry");
                    }
                    marginal[y_index] = parse_rational(line, line.tokens[n]);
                }
            } else if (sub.tokens[0] == "mechanism" && sub.tokens.size() == 1) {
                if (saw_mechanism) throw ParseError(sub.number, "duplicate 'mechanism' block");
                saw_mechanism = true;
                ++i;
                for (; i < lines.size() && !is_section(lines[i]); ++i) {
                    const Line& line = lines[i];
                    if (line.tokens.size() != n + 2) {
                        throw ParseError(line.number,
                                         "mechanism line must be: " + std::to_string(n) +
                                             " level codes, pattern, probability");
                    }
                    std::size_t y_index = parse_y_tokens(line, space, 0);
                    MissingnessPattern r = parse_pattern_token(line, line.tokens[n], n);
                    std::size_t r_index = require_pattern_index(line, patterns, r);
                    std::size_t slot = y_index * k + r_index;
                    if (mech[slot]) throw ParseError(line.number, "duplicate mechanism entry");
                    mech[slot] = parse_rational(line, line.tokens[n + 1]);
                }
            } else {
                break;
            }
        }
        reject_trailing(i);
        if (!saw_marginal) throw ParseError(payload_line, "selection needs a 'marginal' block");
        if (!saw_mechanism) throw ParseError(payload_line, "selection needs a 'mechanism' block");
        std::vector<Rational> f;
        f.reserve(space.value_count());
        for (std::size_t y = 0; y < space.value_count(); ++y) {
            if (!marginal[y]) {
                throw ParseError(payload_line, "marginal entry missing for y=" +
                                                   format_values(space.value_at(y)));
            }
            f.push_back(std::move(*marginal[y]));
        }
        return {SelectionModel{std::move(f), Mechanism(std::move(space), std::move(patterns),
                                                       std::move(mech))},
                payload_line};
    }

    if (payload == "mixture") {
        if (header.tokens.size() != 1) throw ParseError(header.number, "malformed section header");
        ++i;
        std::vector<std::optional<Rational>> marginal(k);
        std::vector<std::optional<std::vector<std::optional<Rational>>>> comp(k);
        std::vector<std::size_t> comp_line(k, 0);
        bool saw_marginal = false;
        while (i < lines.size()) {
            const Line& sub = lines[i];
            if (sub.tokens[0] == "pattern-marginal" && sub.tokens.size() == 1) {
                if (saw_marginal) throw ParseError(sub.number, "duplicate 'pattern-marginal' block");
                saw_marginal = true;
                ++i;
                for (; i < lines.size() && !is_section(lines[i]); ++i) {
                    const Line& line = lines[i];
                    if (line.tokens.size() != 2) {
                        throw ParseError(line.number,
                                         "pattern-marginal line must be: pattern, probability");
                    }
                    MissingnessPattern r = parse_pattern_token(line, line.tokens[0], n);
                    std::size_t r_index = require_pattern_index(line, patterns, r);
                    if (marginal[r_index]) {
                        throw ParseError(line.number, "duplicate pattern-marginal entry");
                    }
                    marginal[r_index] = parse_rational(line, line.tokens[1]);
                }
            } else if (sub.tokens[0] == "component") {
                if (sub.tokens.size() != 2) {
                    throw ParseError(sub.number, "component header must be: component <pattern>");
                }
                MissingnessPattern r = parse_pattern_token(sub, sub.tokens[1], n);
                std::size_t r_index = require_pattern_index(sub, patterns, r);
                if (comp[r_index]) {
                    throw ParseError(sub.number, "duplicate component block for " + r.str());
                }
                comp[r_index].emplace(space.value_count());
                comp_line[r_index] = sub.number;
                ++i;
                for (; i < lines.size() && !is_section(lines[i]); ++i) {
                    const Line& line = lines[i];
                    if (line.tokens.size() != n + 1) {
                        throw ParseError(line.number, "component line must be: " +
                                                          std::to_string(n) +
                                                          " level codes, probability");
                    }
                    std::size_t y_index = parse_y_tokens(line, space, 0);
                    if ((*comp[r_index])[y_index]) {
                        throw ParseError(line.number, "duplicate component entry");
                    }
                    (*comp[r_index])[y_index] = parse_rational(line, line.tokens[n]);
                }
            } else {
                break;
            }
        }
        reject_trailing(i);
        if (!saw_marginal) throw ParseError(payload_line, "mixture needs a 'pattern-marginal' block");
        PatternMixture pm{space, patterns, {}, {}};
        pm.pattern_marginal.reserve(k);
        for (std::size_t r = 0; r < k; ++r) {
            if (!marginal[r]) {
                throw ParseError(payload_line, "pattern-marginal entry missing for " +
                                                   patterns.at(r).str());
            }
            pm.pattern_marginal.push_back(std::move(*marginal[r]));
        }
        pm.components.resize(k);
        for (std::size_t r = 0; r < k; ++r) {
            if (!comp[r]) continue;
            std::vector<Rational> component;
            component.reserve(space.value_count());
            for (std::size_t y = 0; y < space.value_count(); ++y) {
                if (!(*comp[r])[y]) {
                    throw ParseError(comp_line[r], "component for " + patterns.at(r).str() +
                                                       " is missing an entry for y=" +
                                                       format_values(space.value_at(y)));
                }
                component.push_back(std::move(*(*comp[r])[y]));
            }
            pm.components[r] = std::move(component);
        }
        return {std::move(pm), payload_line};
    }

    throw ParseError(header.number, "unknown section '" + payload +
                                        "'; expected density, selection or mixture");
}

ValidationReport validate_any(const ParsedModel& model) {
    return std::visit([](const auto& m) { return validate(m); }, model);
}

}  // namespace

ParsedModel parse_model_lenient(std::string_view text) {
    return std::move(parse_internal(text).model);
}

ParsedModel parse_model(std::string_view text) {
    LenientResult parsed = parse_internal(text);
    ValidationReport report = validate_any(parsed.model);
    if (!report.valid()) {
        std::ostringstream msg;
        msg << "the model violates its invariants";
        for (const std::string& problem : report.problems) msg << "; " << problem;
        throw ParseError(parsed.payload_line, msg.str());
    }
    return std::move(parsed.model);
}

namespace {

void write_space_and_patterns(std::ostringstream& out, const DataSpace& space,
                              const PatternSet& patterns) {
    out << "space\n";
    for (const Variable& v : space.variables()) {
        out << "  " << v.name;
        for (int code : v.levels) out << " " << code;
        out << "\n";
    }
    out << "patterns\n";
    for (const MissingnessPattern& r : patterns.patterns()) out << "  " << r.str() << "\n";
}

void write_y(std::ostringstream& out, const DataSpace& space, std::size_t y_index) {
    std::vector<int> y = space.value_at(y_index);
    for (std::size_t i = 0; i < y.size(); ++i) out << (i ? " " : "") << y[i];
}

}  // namespace

std::string serialize_model(const FullDensity& h) {
    std::ostringstream out;
    write_space_and_patterns(out, h.space(), h.patterns());
    out << "density\n";
    // Pattern-major so each pattern's table reads as one block.
    for (std::size_t r = 0; r < h.patterns().size(); ++r) {
        for (std::size_t y = 0; y < h.space().value_count(); ++y) {
            if (!h.has_entry(y, r)) continue;
            out << "  " << h.patterns().at(r).str() << " ";
            write_y(out, h.space(), y);
            out << " " << h.prob(y, r).str() << "\n";
        }
    }
    return out.str();
}

std::string serialize_model(const SelectionModel& sm) {
    std::ostringstream out;
    write_space_and_patterns(out, sm.space(), sm.patterns());
    out << "selection\nmarginal\n";
    for (std::size_t y = 0; y < sm.space().value_count(); ++y) {
        out << "  ";
        write_y(out, sm.space(), y);
        out << " " << sm.marginal[y].str() << "\n";
    }
    out << "mechanism\n";
    for (std::size_t y = 0; y < sm.space().value_count(); ++y) {
        for (std::size_t r = 0; r < sm.patterns().size(); ++r) {
            std::optional<Rational> v = sm.mechanism.maybe_at(y, r);
            if (!v) continue;
            out << "  ";
            write_y(out, sm.space(), y);
            out << " " << sm.patterns().at(r).str() << " " << v->str() << "\n";
        }
    }
    return out.str();
}

std::string serialize_model(const PatternMixture& pm) {
    std::ostringstream out;
    write_space_and_patterns(out, pm.space, pm.patterns);
    out << "mixture\npattern-marginal\n";
    for (std::size_t r = 0; r < pm.patterns.size(); ++r) {
        out << "  " << pm.patterns.at(r).str() << " " << pm.pattern_marginal[r].str() << "\n";
    }
    for (std::size_t r = 0; r < pm.patterns.size(); ++r) {
        if (!pm.components[r]) continue;
        out << "component " << pm.patterns.at(r).str() << "\n";
        for (std::size_t y = 0; y < pm.space.value_count(); ++y) {
            out << "  ";
            write_y(out, pm.space, y);
            out << " " << (*pm.components[r])[y].str() << "\n";
        }
    }
    return out.str();
}

std::string serialize_model(const ParsedModel& model) {
    return std::visit([](const auto& m) { return serialize_model(m); }, model);
}

const DataSpace& model_space(const ParsedModel& model) {
    return std::visit(
        [](const auto& m) -> const DataSpace& {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, FullDensity>) return m.space();
            else if constexpr (std::is_same_v<T, SelectionModel>) return m.space();
            else return m.space;
        },
        model);
}

const PatternSet& model_patterns(const ParsedModel& model) {
    return std::visit(
        [](const auto& m) -> const PatternSet& {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, FullDensity>) return m.patterns();
            else if constexpr (std::is_same_v<T, SelectionModel>) return m.patterns();
            else return m.patterns;
        },
        model);
}

FullDensity to_density(const ParsedModel& model) {
    return std::visit(
        [](const auto& m) -> FullDensity {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, FullDensity>) {
                ValidationReport report = validate(m);
                if (!report.valid()) {
                    std::string msg = "density is not valid";
                    for (const std::string& p : report.problems) msg += "; " + p;
                    throw Error(msg);
                }
                return m;
            } else {
                return recompose(m);
            }
        },
        model);
}

SelectionModel to_selection(const ParsedModel& model) {
    return std::visit(
        [](const auto& m) -> SelectionModel {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, SelectionModel>) {
                ValidationReport report = validate(m);
                if (!report.valid()) {
                    std::string msg = "selection model is not valid";
                    for (const std::string& p : report.problems) msg += "; " + p;
                    throw Error(msg);
                }
                return m;
            } else if constexpr (std::is_same_v<T, FullDensity>) {
                return selection_factorize(m);
            } else {
                return selection_factorize(recompose(m));
            }
        },
        model);
}

}  // namespace marlab
