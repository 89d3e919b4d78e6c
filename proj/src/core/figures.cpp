#include "core/figures.hpp"

#include "core/mar.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace marlab {

namespace {

void require_valid_density(const FullDensity& h, const char* op) {
    ValidationReport report = validate(h);
    if (report.valid()) return;
    std::ostringstream msg;
    msg << op << ": density is not valid";
    for (const auto& problem : report.problems) msg << "; " << problem;
    throw Error(msg.str());
}

std::string fmt2(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string svg_escape(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

void svg_rect(std::ostringstream& out, double x, double y, double w, double h,
              const char* fill, const char* stroke = nullptr) {
    out << "<rect x=\"" << fmt2(x) << "\" y=\"" << fmt2(y) << "\" width=\"" << fmt2(w)
        << "\" height=\"" << fmt2(h) << "\" fill=\"" << fill << "\"";
    if (stroke) out << " stroke=\"" << stroke << "\" stroke-width=\"1.5\"";
    out << "/>\n";
}

void svg_text(std::ostringstream& out, double x, double y, int size, const std::string& text,
              const char* fill = "#222", const char* anchor = "start") {
    out << "<text x=\"" << fmt2(x) << "\" y=\"" << fmt2(y) << "\" font-size=\"" << size
        << "\" font-family=\"monospace\" fill=\"" << fill << "\" text-anchor=\"" << anchor
        << "\">" << svg_escape(text) << "</text>\n";
}

std::string svg_document(double width, double height, const std::string& body) {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt2(width) << "\" height=\""
        << fmt2(height) << "\" viewBox=\"0 0 " << fmt2(width) << " " << fmt2(height) << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << body << "</svg>\n";
    return out.str();
}

double ratio(const Rational& v, const Rational& max) {
    if (max.is_zero()) return 0.0;
    return (v / max).to_double();
}

std::string ascii_bar(const Rational& v, const Rational& max, int width = 32) {
    int n = static_cast<int>(std::lround(ratio(v, max) * width));
    if (n == 0 && v.sign() > 0) n = 1;  // positive mass never renders empty
    return std::string(static_cast<std::size_t>(n), '#');
}

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

// ---------------------------------------------------------------- figure 1

std::string figure_full_ascii(const FullDensity& h) {
    PatternMixture pm = pattern_mixture_factorize(h);
    std::vector<Rational> f = marginal_y(h);
    Rational maxv;
    for (const auto& comp : pm.components) {
        if (!comp) continue;
        for (const Rational& v : *comp) maxv = std::max(maxv, v);
    }
    for (const Rational& v : f) maxv = std::max(maxv, v);

    std::size_t label_w = 0;
    std::size_t value_w = 0;
    for (std::size_t y = 0; y < h.space().value_count(); ++y) {
        label_w = std::max(label_w, format_values(h.space().value_at(y)).size());
    }
    for (const auto& comp : pm.components) {
        if (!comp) continue;
        for (const Rational& v : *comp) value_w = std::max(value_w, v.str().size());
    }
    for (const Rational& v : f) value_w = std::max(value_w, v.str().size());

    std::ostringstream out;
    out << "full distribution: h(y, r) = p(r) p(y | r)\n";
    for (std::size_t r = 0; r < pm.patterns.size(); ++r) {
        out << "\npattern " << pm.patterns.at(r).str() << "   p(r) = "
            << pm.pattern_marginal[r].str() << "\n";
        if (!pm.components[r]) {
            out << "  (zero-mass pattern: component undefined)\n";
            continue;
        }
        for (std::size_t y = 0; y < h.space().value_count(); ++y) {
            const Rational& v = (*pm.components[r])[y];
            out << "  " << pad(format_values(h.space().value_at(y)), label_w) << "  "
                << pad(v.str(), value_w) << "  " << ascii_bar(v, maxv) << "\n";
        }
    }
    out << "\nmarginal f(y)\n";
    for (std::size_t y = 0; y < h.space().value_count(); ++y) {
        out << "  " << pad(format_values(h.space().value_at(y)), label_w) << "  "
            << pad(f[y].str(), value_w) << "  " << ascii_bar(f[y], maxv) << "\n";
    }
    out << "\nmixture identity: f(y) = sum_r p(r) p(y|r), holds exactly\n";
    return out.str();
}

std::string figure_full_svg(const FullDensity& h) {
    PatternMixture pm = pattern_mixture_factorize(h);
    std::vector<Rational> f = marginal_y(h);
    Rational maxv;
    for (const auto& comp : pm.components) {
        if (!comp) continue;
        for (const Rational& v : *comp) maxv = std::max(maxv, v);
    }
    for (const Rational& v : f) maxv = std::max(maxv, v);

    const std::size_t m = h.space().value_count();
    const std::size_t k = pm.patterns.size();
    const double bar_w = 16;
    const double panel_w = std::max(150.0, 30 + bar_w * static_cast<double>(m) + 10);
    const double panel_h = 150;
    const double base_y = 60 + panel_h;  // bar baseline
    const double width = 20 + (panel_w + 18) * static_cast<double>(k + 1);
    const double height = base_y + 60;

    std::ostringstream body;
    svg_text(body, 20, 28, 15, "full distribution: h(y, r) = p(r) p(y | r)");
    svg_text(body, 20, height - 16, 12, "mixture identity: f(y) = sum_r p(r) p(y|r), holds exactly",
             "#444");

    for (std::size_t panel = 0; panel <= k; ++panel) {
        const double px = 20 + (panel_w + 18) * static_cast<double>(panel);
        std::string title;
        const std::vector<Rational>* values = nullptr;
        if (panel < k) {
            title = "r=" + pm.patterns.at(panel).str() + "  p(r)=" +
                    pm.pattern_marginal[panel].str();
            if (pm.components[panel]) values = &*pm.components[panel];
        } else {
            title = "marginal f(y)";
            values = &f;
        }
        svg_rect(body, px, 48, panel_w, panel_h + 22, "#fafafa", "#cccccc");
        svg_text(body, px + 6, 44, 12, title);
        if (!values) {
            svg_text(body, px + 6, 48 + panel_h / 2, 11, "p(r) = 0: component undefined", "#888");
            continue;
        }
        for (std::size_t y = 0; y < m; ++y) {
            const Rational& v = (*values)[y];
            double bh = ratio(v, maxv) * (panel_h - 14);
            double bx = px + 24 + bar_w * static_cast<double>(y);
            svg_rect(body, bx, base_y - bh, bar_w - 4, bh, panel < k ? "#4878b0" : "#b05848");
            if (m <= 12) {
                svg_text(body, bx + (bar_w - 4) / 2, base_y + 12, 8,
                         format_values(h.space().value_at(y)), "#555", "middle");
            }
        }
    }
    return svg_document(width, height, body.str());
}

// ---------------------------------------------------------------- figure 2

struct EventRow {
    ObservableDataEvent event;
    EventClassification verdict;
};

std::vector<EventRow> pattern_events(const FullDensity& h, const MissingnessPattern& r) {
    SelectionModel sm = selection_factorize(h);
    std::vector<EventRow> rows;
    for (ObservableDataEvent& e : enumerate_events(h.space(), h.patterns())) {
        if (!(e.pattern == r)) continue;
        EventClassification verdict = classify_event(sm.mechanism, e);
        rows.push_back(EventRow{std::move(e), std::move(verdict)});
    }
    return rows;
}

std::string verdict_line(const Mechanism& g, const EventRow& row) {
    switch (row.verdict.status) {
        case EventMarStatus::Mar: {
            // All defined members share one value; show it.
            Rational value;
            for (const Point& p : row.event.members) {
                if (auto v = g.maybe_at(p)) {
                    value = *v;
                    break;
                }
            }
            std::string out = "constant (MAR): g = " + value.str();
            if (row.verdict.excluded_members > 0) {
                out += " (" + std::to_string(row.verdict.excluded_members) +
                       " zero-mass members excluded)";
            }
            return out;
        }
        case EventMarStatus::NotMar: {
            RestrictionRange range = restriction_range_defined(g, row.event);
            std::string values;
            for (const Rational& v : range.values) {
                if (!values.empty()) values += ", ";
                values += v.str();
            }
            return "not constant (NotMAR): g takes {" + values + "}";
        }
        case EventMarStatus::ZeroMassExcluded:
            return "zero-mass event: mechanism undefined on every member";
    }
    return {};
}

std::string figure_events_ascii(const FullDensity& h, const MissingnessPattern& r) {
    SelectionModel sm = selection_factorize(h);
    std::vector<EventRow> rows = pattern_events(h, r);
    std::ostringstream out;
    out << "observable data events for pattern " << r.str() << " ("
        << describe_pattern(h.space(), r) << ")\n";
    for (const EventRow& row : rows) {
        out << "\nevent: " << describe_event(h.space(), row.event) << "\n";
        for (const Point& p : row.event.members) {
            auto v = sm.mechanism.maybe_at(p);
            out << "  y* = " << format_values(p.y) << "   g(r|y*) = "
                << (v ? v->str() : "undefined (f(y*) = 0)") << "\n";
        }
        out << "  -> " << verdict_line(sm.mechanism, row) << "\n";
    }
    return out.str();
}

std::string figure_events_svg(const FullDensity& h, const MissingnessPattern& r) {
    SelectionModel sm = selection_factorize(h);
    std::vector<EventRow> rows = pattern_events(h, r);

    double y_cursor = 64;
    std::ostringstream body;
    svg_text(body, 20, 28, 15,
             "observable data events for pattern " + r.str());
    svg_text(body, 20, 44, 11, describe_pattern(h.space(), r), "#444");

    double width = 460;
    for (const EventRow& row : rows) {
        const double box_h = 26 + 16 * static_cast<double>(row.event.members.size()) + 22;
        const char* strip = row.verdict.status == EventMarStatus::Mar          ? "#3d8a4f"
                            : row.verdict.status == EventMarStatus::NotMar     ? "#b03a3a"
                                                                               : "#999999";
        svg_rect(body, 20, y_cursor, width - 40, box_h, "#fafafa", "#cccccc");
        svg_rect(body, 20, y_cursor, 6, box_h, strip);
        svg_text(body, 34, y_cursor + 17, 12, describe_event(h.space(), row.event));
        double ty = y_cursor + 34;
        for (const Point& p : row.event.members) {
            auto v = sm.mechanism.maybe_at(p);
            svg_text(body, 44, ty, 11,
                     "y* = " + format_values(p.y) + "   g = " +
                         (v ? v->str() : "undefined (f = 0)"),
                     "#333");
            ty += 16;
        }
        svg_text(body, 44, ty + 4, 11, verdict_line(sm.mechanism, row), strip);
        y_cursor += box_h + 12;
    }
    return svg_document(width, y_cursor + 8, body.str());
}

// ---------------------------------------------------------------- figure 3

std::string figure_shape_ascii(const FullDensity& h, const ObservableDataEvent& e) {
    std::vector<Rational> f = marginal_y(h);
    std::vector<Rational> pr = marginal_r(h);
    const Rational& pattern_mass = pr[*h.patterns().index_of(e.pattern)];
    auto witness = shape_witness_indices(h, e);
    std::optional<Rational> constant = witness ? std::nullopt : shape_constant(h, e);

    Rational maxv;
    std::vector<Rational> component;
    for (const Point& p : e.members) {
        component.push_back(h.prob(p) / pattern_mass);
        maxv = std::max(maxv, component.back());
        maxv = std::max(maxv, f[h.space().index_of(p.y)]);
    }

    std::size_t label_w = 0;
    std::size_t value_w = 0;
    for (std::size_t i = 0; i < e.members.size(); ++i) {
        label_w = std::max(label_w, format_values(e.members[i].y).size());
        value_w = std::max(value_w, component[i].str().size());
        value_w = std::max(value_w, f[h.space().index_of(e.members[i].y)].str().size());
    }

    std::ostringstream out;
    out << "shape comparison on event: " << describe_event(h.space(), e) << "\n\n";
    for (std::size_t i = 0; i < e.members.size(); ++i) {
        const Rational& fv = f[h.space().index_of(e.members[i].y)];
        bool hot = witness && (witness->first == i || witness->second == i);
        out << (hot ? "* " : "  ") << pad(format_values(e.members[i].y), label_w)
            << "   p(y|r) = " << pad(component[i].str(), value_w) << "  "
            << pad(ascii_bar(component[i], maxv), 33) << " f(y) = " << pad(fv.str(), value_w)
            << "  " << ascii_bar(fv, maxv) << "\n";
    }
    out << "\n";
    if (constant) {
        out << "same shape: p(y|r) = c f(y) on this event, c = " << constant->str() << "\n";
    } else {
        out << "not proportional on this event; members " << format_values(e.members[witness->first].y)
            << " and " << format_values(e.members[witness->second].y)
            << " (marked *) break p(y|r) = c f(y)\n";
    }
    return out.str();
}

std::string figure_shape_svg(const FullDensity& h, const ObservableDataEvent& e) {
    std::vector<Rational> f = marginal_y(h);
    std::vector<Rational> pr = marginal_r(h);
    const Rational& pattern_mass = pr[*h.patterns().index_of(e.pattern)];
    auto witness = shape_witness_indices(h, e);
    std::optional<Rational> constant = witness ? std::nullopt : shape_constant(h, e);

    Rational maxv;
    std::vector<Rational> component;
    for (const Point& p : e.members) {
        component.push_back(h.prob(p) / pattern_mass);
        maxv = std::max(maxv, component.back());
        maxv = std::max(maxv, f[h.space().index_of(p.y)]);
    }

    const std::size_t m = e.members.size();
    const double group_w = 52;
    const double bar_w = 18;
    const double plot_h = 170;
    const double base_y = 70 + plot_h;
    const double width = std::max(480.0, 40 + group_w * static_cast<double>(m) + 20);
    const double height = base_y + 70;

    std::ostringstream body;
    svg_text(body, 20, 28, 15, "shape comparison: p(y|r) vs f(y)");
    svg_text(body, 20, 46, 11, describe_event(h.space(), e), "#444");

    for (std::size_t i = 0; i < m; ++i) {
        double gx = 40 + group_w * static_cast<double>(i);
        bool hot = witness && (witness->first == i || witness->second == i);
        double c_h = ratio(component[i], maxv) * plot_h;
        double f_h = ratio(f[h.space().index_of(e.members[i].y)], maxv) * plot_h;
        svg_rect(body, gx, base_y - c_h, bar_w, c_h, "#4878b0", hot ? "#d02020" : nullptr);
        svg_rect(body, gx + bar_w + 3, base_y - f_h, bar_w, f_h, "#c8a850",
                 hot ? "#d02020" : nullptr);
        svg_text(body, gx + bar_w + 1.5, base_y + 14, 9, format_values(e.members[i].y), "#555",
                 "middle");
    }
    svg_rect(body, 40, base_y, group_w * static_cast<double>(m), 1, "#333");
    svg_rect(body, width - 188, 58, 10, 10, "#4878b0");
    svg_text(body, width - 174, 67, 10, "p(y|r) on the event");
    svg_rect(body, width - 188, 74, 10, 10, "#c8a850");
    svg_text(body, width - 174, 83, 10, "f(y)");

    if (constant) {
        svg_text(body, 20, height - 16, 12,
                 "same shape: p(y|r) = c f(y) on this event, c = " + constant->str(), "#3d8a4f");
    } else {
        svg_text(body, 20, height - 16, 12,
                 "not proportional: members " + format_values(e.members[witness->first].y) +
                     " and " + format_values(e.members[witness->second].y) +
                     " (outlined) break p(y|r) = c f(y)",
                 "#b03a3a");
    }
    return svg_document(width, height, body.str());
}

}  // namespace

ObservableDataEvent resolve_event_selection(const FullDensity& h, const EventSelector& selector) {
    require_valid_density(h, "resolve_event_selection");
    if (selector.observed && !selector.pattern) {
        throw Error("resolve_event_selection: observed values were given without a pattern");
    }
    if (selector.pattern) {
        if (!h.patterns().index_of(*selector.pattern)) {
            throw Error("resolve_event_selection: pattern " + selector.pattern->str() +
                        " is not in the pattern set");
        }
    }
    if (selector.pattern && selector.observed) {
        std::vector<std::size_t> indices = selector.pattern->observed_indices();
        if (indices.size() != selector.observed->size()) {
            throw Error("resolve_event_selection: pattern " + selector.pattern->str() +
                        " observes " + std::to_string(indices.size()) + " variables but " +
                        std::to_string(selector.observed->size()) + " values were given");
        }
        // Any member completing the observed assignment identifies the event.
        std::vector<int> y(h.space().arity());
        for (std::size_t i = 0; i < h.space().arity(); ++i) y[i] = h.space().variable(i).levels[0];
        for (std::size_t i = 0; i < indices.size(); ++i) y[indices[i]] = (*selector.observed)[i];
        return observable_event(h.space(), h.patterns(), Point{std::move(y), *selector.pattern});
    }

    // Default: the first positive-probability event, preferring one with
    // at least two members (where the shape question is non-trivial),
    // restricted to the requested pattern if one was given.
    std::vector<ObservableDataEvent> events = enumerate_events(h.space(), h.patterns());
    const ObservableDataEvent* fallback = nullptr;
    for (const ObservableDataEvent& e : events) {
        if (selector.pattern && !(e.pattern == *selector.pattern)) continue;
        Rational mass;
        for (const Point& p : e.members) mass += h.prob(p);
        if (mass.is_zero()) continue;
        if (e.members.size() >= 2) return e;
        if (!fallback) fallback = &e;
    }
    if (fallback) return *fallback;
    throw Error("resolve_event_selection: no positive-probability event matches the selection");
}

std::string emit_figure(const FullDensity& h, FigureKind kind, FigureFormat format,
                        const EventSelector& selector) {
    require_valid_density(h, "emit_figure");
    switch (kind) {
        case FigureKind::FullDistribution:
            return format == FigureFormat::Svg ? figure_full_svg(h) : figure_full_ascii(h);
        case FigureKind::EventPanel: {
            MissingnessPattern r = h.patterns().at(0);
            if (selector.pattern) {
                if (!h.patterns().index_of(*selector.pattern)) {
                    throw Error("emit_figure: pattern " + selector.pattern->str() +
                                " is not in the pattern set");
                }
                r = *selector.pattern;
            } else {
                // Prefer a pattern with a missing coordinate: its events
                // have several members and the partition is visible.
                for (const MissingnessPattern& candidate : h.patterns().patterns()) {
                    if (!candidate.is_all_ones()) {
                        r = candidate;
                        break;
                    }
                }
            }
            return format == FigureFormat::Svg ? figure_events_svg(h, r)
                                               : figure_events_ascii(h, r);
        }
        case FigureKind::ShapeComparison: {
            ObservableDataEvent e = resolve_event_selection(h, selector);
            Rational mass;
            for (const Point& p : e.members) mass += h.prob(p);
            if (mass.is_zero()) {
                throw Error("emit_figure: the selected event has probability zero; "
                            "p(y|r) is undefined there");
            }
            return format == FigureFormat::Svg ? figure_shape_svg(h, e)
                                               : figure_shape_ascii(h, e);
        }
    }
    throw Error("emit_figure: unknown figure kind");
}

}  // namespace marlab
