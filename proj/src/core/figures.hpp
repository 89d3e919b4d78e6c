#pragma once

#include "core/distribution.hpp"
#include "core/space.hpp"

#include <optional>
#include <string>
#include <vector>

namespace marlab {

/// The three panel layouts: the factorization overview, the event
/// partition of one pattern, and the restricted shape comparison on one
/// event.
enum class FigureKind { FullDistribution = 1, EventPanel = 2, ShapeComparison = 3 };

enum class FigureFormat { Svg, Ascii };

/// Narrows which pattern/event a figure is about. Both fields optional:
/// the default is the first pattern with a missing coordinate (figure 2)
/// or the first positive-probability multi-member event (figure 3).
/// observed gives level codes for the pattern's observed indices, in
/// index order, and requires pattern to be set.
struct EventSelector {
    std::optional<MissingnessPattern> pattern;
    std::optional<std::vector<int>> observed;
};

/// The event a selector denotes over h's space, after applying the
/// defaults above. Throws when the selection is contradictory, the
/// pattern is unknown, or (with no explicit selection) no positive
/// event exists.
ObservableDataEvent resolve_event_selection(const FullDensity& h, const EventSelector& selector);

/// Renders one figure for a valid density. Output is deterministic:
/// identical inputs give identical bytes. Exact probabilities drive all
/// annotations; doubles appear only in coordinate geometry.
std::string emit_figure(const FullDensity& h, FigureKind kind, FigureFormat format,
                        const EventSelector& selector = {});

}  // namespace marlab
