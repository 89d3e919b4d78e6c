#pragma once

#include "core/distribution.hpp"

#include <string>
#include <string_view>
#include <variant>

namespace marlab {

/// Parse failure, carrying the 1-based line the problem was detected on.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// What a model file carries after its space and patterns sections.
using ParsedModel = std::variant<FullDensity, SelectionModel, PatternMixture>;

/// Grammar-level parse. Enforces everything structural: section order
/// and uniqueness, token shapes, exact-rational literals (decimals are
/// rejected, never rounded), known levels and patterns, no duplicate
/// entries. Probability invariants (range, unit mass, completeness of a
/// density table, mechanism row sums) are NOT enforced here, so a file
/// can be loaded in order to report exactly which invariant it breaks.
ParsedModel parse_model_lenient(std::string_view text);

/// Strict parse: parse_model_lenient followed by invariant validation.
/// Invariant failures are reported as a ParseError on the payload
/// section's line, listing every problem found.
ParsedModel parse_model(std::string_view text);

/// Canonical text form: sections in space/patterns/payload order,
/// two-space indented entry lines, entries in canonical order, rationals
/// in lowest terms. parse_model of the output reproduces the model
/// exactly, and serializing a parsed canonical file is byte-identical.
std::string serialize_model(const ParsedModel& model);

std::string serialize_model(const FullDensity& h);
std::string serialize_model(const SelectionModel& sm);
std::string serialize_model(const PatternMixture& pm);

/// The space a parsed model lives on, whichever payload it carries.
const DataSpace& model_space(const ParsedModel& model);
const PatternSet& model_patterns(const ParsedModel& model);

/// The model as a full density: a density payload directly, a valid
/// selection or mixture payload recomposed. Throws if the payload does
/// not validate.
FullDensity to_density(const ParsedModel& model);

/// The model's selection pair: a selection payload directly (validated),
/// anything else factorized from the density form.
SelectionModel to_selection(const ParsedModel& model);

}  // namespace marlab
