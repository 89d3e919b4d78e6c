#pragma once

#include "core/figures.hpp"
#include "core/mar.hpp"
#include "core/mechanisms.hpp"
#include "core/model_io.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace marlab {

/// Ok is a completed report; AssertFailed means the command asserts a
/// property (validate, check, reconstruct) and the property is false.
/// Anything else (bad input, undefined quantity) is thrown: ParseError
/// for file problems, Error otherwise.
enum class CommandStatus { Ok = 0, AssertFailed = 1 };

struct CommandResult {
    CommandStatus status = CommandStatus::Ok;
    std::string text;
};

/// Parses leniently, then reports every invariant the file violates.
/// AssertFailed when the model is invalid; syntax errors still throw.
CommandResult cmd_validate(std::string_view file_text);

/// Re-expresses the model in the requested factorization, in model file
/// form (the output parses back).
CommandResult cmd_factorize(const ParsedModel& model, bool as_mixture);

/// Lists the observable data event partition of the model's space.
CommandResult cmd_events(const ParsedModel& model);

/// EverywhereMAR / NotMAR verdict with witness, from the model's
/// factorized mechanism. A report, not an assertion: always Ok.
CommandResult cmd_classify(const ParsedModel& model);

/// The eventwise observed-data mechanism table.
CommandResult cmd_pryobs(const ParsedModel& model, RangeMode mode);

/// Asserts one property over every applicable event:
/// "drawn-at-random", "shape", or "standard-equation".
CommandResult cmd_check(const ParsedModel& model, std::string_view property);

/// Asserts that f(y) * P(r|Y_obs) rebuilds the full density bit-exactly.
CommandResult cmd_reconstruct(const ParsedModel& model);

struct GenerateRequest {
    MechanismSpec spec;
    std::size_t n_variables = 2;
    std::size_t n_levels = 2;
    /// Explicit pattern set; when absent each kind picks its natural
    /// default (all patterns, the always-observe-first-variable subset,
    /// or the monotone chain).
    std::optional<std::vector<MissingnessPattern>> patterns;
};

/// Emits a complete selection model file: a seeded random positive
/// marginal plus the requested mechanism, with a comment header naming
/// the construction.
CommandResult cmd_generate(const GenerateRequest& request);

/// CSV draw from the model's full density.
CommandResult cmd_sample(const ParsedModel& model, std::size_t n_rows, std::uint64_t seed);

/// Exact complete-case vs marginal mean of one variable.
CommandResult cmd_bias(const ParsedModel& model, std::string_view variable);

/// One of the three figure layouts, SVG or ASCII.
CommandResult cmd_plot(const ParsedModel& model, int figure, FigureFormat format,
                       const EventSelector& selector);

}  // namespace marlab
