#include "marlab/marlab.h"

#include "core/reports.hpp"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <optional>
#include <string>
#include <utility>
#include <vector>

struct marlab_model {
    marlab::ParsedModel model;
};

namespace {

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out != nullptr) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void set_error(char** error, const std::string& message) {
    if (error != nullptr) *error = dup_string(message);
}

marlab_status bad_argument(char** error, const char* message) {
    set_error(error, message);
    return MARLAB_BAD_ARGUMENT;
}

/// Exception boundary: nothing C++ may escape an extern-C frame.
template <typename Fn>
marlab_status guarded(char** error, Fn&& fn) {
    try {
        return fn();
    } catch (const marlab::ParseError& e) {
        set_error(error, e.what());
        return MARLAB_PARSE_ERROR;
    } catch (const std::bad_alloc&) {
        set_error(error, "out of memory");
        return MARLAB_ERROR;
    } catch (const std::exception& e) {
        set_error(error, e.what());
        return MARLAB_ERROR;
    }
}

template <typename Fn>
marlab_status run_command(char** out, char** error, Fn&& fn) {
    return guarded(error, [&]() -> marlab_status {
        marlab::CommandResult result = fn();
        if (out != nullptr) *out = dup_string(result.text);
        return result.status == marlab::CommandStatus::Ok ? MARLAB_OK : MARLAB_ASSERT_FAIL;
    });
}

std::optional<marlab::MechanismSpec::Kind> parse_kind(const char* kind) {
    using Kind = marlab::MechanismSpec::Kind;
    const std::string k = kind == nullptr ? "" : kind;
    if (k == "constant") return Kind::Constant;
    if (k == "common-observed") return Kind::CommonObserved;
    if (k == "monotone") return Kind::MonotoneDropout;
    if (k == "mnar") return Kind::PerturbedMnar;
    return std::nullopt;
}

}  // namespace

extern "C" {

const char* marlab_version(void) { return "0.1.0"; }

void marlab_string_free(char* s) { std::free(s); }

void marlab_model_free(marlab_model* model) { delete model; }

marlab_status marlab_model_parse(const char* text, marlab_model** out_model, char** error) {
    if (text == nullptr || out_model == nullptr)
        return bad_argument(error, "text and out_model must be non-null");
    return guarded(error, [&]() -> marlab_status {
        *out_model = new marlab_model{marlab::parse_model(text)};
        return MARLAB_OK;
    });
}

marlab_status marlab_validate(const char* text, char** out, char** error) {
    if (text == nullptr) return bad_argument(error, "text must be non-null");
    return run_command(out, error, [&] { return marlab::cmd_validate(text); });
}

marlab_status marlab_factorize(const marlab_model* model, int as_mixture, char** out,
                               char** error) {
    if (model == nullptr) return bad_argument(error, "model must be non-null");
    return run_command(out, error,
                       [&] { return marlab::cmd_factorize(model->model, as_mixture != 0); });
}

marlab_status marlab_events(const marlab_model* model, char** out, char** error) {
    if (model == nullptr) return bad_argument(error, "model must be non-null");
    return run_command(out, error, [&] { return marlab::cmd_events(model->model); });
}

marlab_status marlab_classify(const marlab_model* model, char** out, char** error) {
    if (model == nullptr) return bad_argument(error, "model must be non-null");
    return run_command(out, error, [&] { return marlab::cmd_classify(model->model); });
}

marlab_status marlab_pryobs(const marlab_model* model, int use_inf, char** out, char** error) {
    if (model == nullptr) return bad_argument(error, "model must be non-null");
    const marlab::RangeMode mode = use_inf != 0 ? marlab::RangeMode::Inf : marlab::RangeMode::Sup;
    return run_command(out, error, [&] { return marlab::cmd_pryobs(model->model, mode); });
}

marlab_status marlab_check(const marlab_model* model, const char* property, char** out,
                           char** error) {
    if (model == nullptr || property == nullptr)
        return bad_argument(error, "model and property must be non-null");
    return run_command(out, error, [&] { return marlab::cmd_check(model->model, property); });
}

marlab_status marlab_reconstruct(const marlab_model* model, char** out, char** error) {
    if (model == nullptr) return bad_argument(error, "model must be non-null");
    return run_command(out, error, [&] { return marlab::cmd_reconstruct(model->model); });
}

marlab_status marlab_generate(const marlab_generate_options* options, char** out, char** error) {
    if (options == nullptr) return bad_argument(error, "options must be non-null");
    const auto kind = parse_kind(options->kind);
    if (!kind) {
        return bad_argument(error,
                            "kind must be constant, common-observed, monotone or mnar");
    }
    if (options->patterns == nullptr && options->n_patterns != 0)
        return bad_argument(error, "n_patterns set but patterns is null");
    return run_command(out, error, [&] {
        marlab::GenerateRequest request;
        request.spec.kind = *kind;
        request.spec.seed = options->seed;
        if (options->max_denominator != 0) request.spec.max_denominator = options->max_denominator;
        request.spec.include_all_zeros = options->include_all_zeros != 0;
        if (options->n_variables != 0) request.n_variables = options->n_variables;
        if (options->n_levels != 0) request.n_levels = options->n_levels;
        if (options->patterns != nullptr && options->n_patterns > 0) {
            std::vector<marlab::MissingnessPattern> ps;
            ps.reserve(options->n_patterns);
            for (size_t i = 0; i < options->n_patterns; ++i) {
                if (options->patterns[i] == nullptr)
                    throw marlab::Error("pattern list holds a null entry");
                ps.push_back(marlab::MissingnessPattern::parse(options->patterns[i]));
            }
            request.patterns = std::move(ps);
        }
        return marlab::cmd_generate(request);
    });
}

marlab_status marlab_sample(const marlab_model* model, size_t n_rows, uint64_t seed, char** out,
                            char** error) {
    if (model == nullptr) return bad_argument(error, "model must be non-null");
    return run_command(out, error, [&] { return marlab::cmd_sample(model->model, n_rows, seed); });
}

marlab_status marlab_bias(const marlab_model* model, const char* variable, char** out,
                          char** error) {
    if (model == nullptr) return bad_argument(error, "model must be non-null");
    const char* name = variable == nullptr ? "" : variable;
    return run_command(out, error, [&] { return marlab::cmd_bias(model->model, name); });
}

marlab_status marlab_plot(const marlab_model* model, const marlab_plot_options* options,
                          char** out, char** error) {
    if (model == nullptr || options == nullptr)
        return bad_argument(error, "model and options must be non-null");
    if (options->observed != nullptr && options->pattern == nullptr)
        return bad_argument(error, "observed values require a pattern");
    return run_command(out, error, [&] {
        marlab::EventSelector selector;
        if (options->pattern != nullptr)
            selector.pattern = marlab::MissingnessPattern::parse(options->pattern);
        if (options->observed != nullptr)
            selector.observed =
                std::vector<int>(options->observed, options->observed + options->n_observed);
        const marlab::FigureFormat format =
            options->ascii != 0 ? marlab::FigureFormat::Ascii : marlab::FigureFormat::Svg;
        return marlab::cmd_plot(model->model, options->figure, format, selector);
    });
}

}  // extern "C"
