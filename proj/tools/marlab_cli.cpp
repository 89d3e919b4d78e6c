// Command line front end. Everything goes through the C API in
// marlab/marlab.h; this file only parses arguments, moves bytes and maps
// statuses onto exit codes (0 ok, 1 failed assertion, 2 bad input).

#include "marlab/marlab.h"

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct OwnedString {
    char* value = nullptr;
    ~OwnedString() { marlab_string_free(value); }
    OwnedString() = default;
    OwnedString(const OwnedString&) = delete;
    OwnedString& operator=(const OwnedString&) = delete;
};

struct OwnedModel {
    marlab_model* value = nullptr;
    ~OwnedModel() { marlab_model_free(value); }
    OwnedModel() = default;
    OwnedModel(const OwnedModel&) = delete;
    OwnedModel& operator=(const OwnedModel&) = delete;
};

int exit_code(marlab_status status) {
    switch (status) {
        case MARLAB_OK: return 0;
        case MARLAB_ASSERT_FAIL: return 1;
        default: return 2;
    }
}

bool read_file(const std::string& path, std::string& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::ostringstream buf;
    buf << in.rdbuf();
    out = buf.str();
    return true;
}

bool write_file(const std::string& path, const char* text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) return false;
    out << (text == nullptr ? "" : text);
    return bool(out);
}

/// Report text goes to stdout (also for failed assertions: the report is
/// the explanation); error messages go to stderr.
int finish(marlab_status status, const OwnedString& out, const OwnedString& error) {
    if (out.value != nullptr) std::cout << out.value;
    if (error.value != nullptr) std::cerr << "error: " << error.value << "\n";
    return exit_code(status);
}

/// Like finish, but MARLAB_OK output is written to a file when out_path
/// is nonempty.
int finish_to(const std::string& out_path, marlab_status status, const OwnedString& out,
              const OwnedString& error) {
    if (status == MARLAB_OK && !out_path.empty()) {
        if (!write_file(out_path, out.value)) {
            std::cerr << "error: cannot write " << out_path << "\n";
            return 2;
        }
        return 0;
    }
    return finish(status, out, error);
}

int load_model(const std::string& path, OwnedModel& model) {
    std::string text;
    if (!read_file(path, text)) {
        std::cerr << "error: cannot read " << path << "\n";
        return 2;
    }
    OwnedString error;
    if (marlab_model_parse(text.c_str(), &model.value, &error.value) != MARLAB_OK) {
        std::cerr << "error: " << path << ": "
                  << (error.value == nullptr ? "parse failed" : error.value) << "\n";
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact analysis of finite missing-data models"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(marlab_version()));

    std::string file;

    auto* validate =
        app.add_subcommand("validate", "report every probability invariant a model file breaks");
    validate->add_option("file", file, "model file")->required();

    std::string factor_as = "selection";
    auto* factorize =
        app.add_subcommand("factorize", "re-express the model in another factorization");
    factorize->add_option("file", file, "model file")->required();
    factorize->add_option("--as", factor_as, "target factorization")
        ->check(CLI::IsMember({"selection", "mixture"}));

    auto* events =
        app.add_subcommand("events", "list the observable data event partition");
    events->add_option("file", file, "model file")->required();

    auto* classify =
        app.add_subcommand("classify", "everywhere-MAR verdict with a witness when negative");
    classify->add_option("file", file, "model file")->required();

    std::string mode = "sup";
    auto* pryobs = app.add_subcommand("pryobs", "print the observed-data mechanism P(R|Y_obs)");
    pryobs->add_option("file", file, "model file")->required();
    pryobs->add_option("--mode", mode, "eventwise sup or inf")
        ->check(CLI::IsMember({"sup", "inf"}));

    std::string property;
    auto* check = app.add_subcommand("check", "assert one property on every applicable event");
    check->add_option("file", file, "model file")->required();
    check->add_option("--property", property, "property to assert")
        ->required()
        ->check(CLI::IsMember({"drawn-at-random", "shape", "standard-equation"}));

    auto* reconstruct =
        app.add_subcommand("reconstruct", "assert f * P(R|Y_obs) rebuilds the model exactly");
    reconstruct->add_option("file", file, "model file")->required();

    std::string gen_kind;
    std::uint64_t gen_seed = 0;
    std::size_t gen_variables = 2;
    std::size_t gen_levels = 2;
    unsigned gen_max_den = 64;
    bool gen_no_all_zeros = false;
    std::vector<std::string> gen_patterns;
    std::string out_path;
    auto* generate = app.add_subcommand("generate", "emit a seeded random selection model");
    generate->add_option("--kind", gen_kind, "mechanism construction")
        ->required()
        ->check(CLI::IsMember({"constant", "common-observed", "monotone", "mnar"}));
    generate->add_option("--seed", gen_seed, "generator seed");
    generate->add_option("--variables", gen_variables, "number of variables");
    generate->add_option("--levels", gen_levels, "levels per variable");
    generate->add_option("--max-denominator", gen_max_den, "denominator bound for drawn rationals");
    generate->add_flag("--no-all-zeros", gen_no_all_zeros,
                       "monotone: end the chain before the all-zeros pattern");
    generate->add_option("--pattern", gen_patterns,
                         "explicit pattern bitstring, repeatable, all-ones first");
    generate->add_option("--out", out_path, "write the model here instead of stdout");

    std::size_t sample_n = 0;
    std::uint64_t sample_seed = 0;
    auto* sample = app.add_subcommand("sample", "draw rows from the model as CSV");
    sample->add_option("file", file, "model file")->required();
    sample->add_option("--n", sample_n, "number of rows")->required();
    sample->add_option("--seed", sample_seed, "sampling seed");

    std::string bias_var;
    auto* bias =
        app.add_subcommand("bias", "exact complete-case vs marginal mean of one variable");
    bias->add_option("file", file, "model file")->required();
    bias->add_option("--var", bias_var, "variable name (default: the first variable)");

    int plot_figure = 0;
    std::string plot_format = "svg";
    std::string plot_pattern;
    std::vector<int> plot_observed;
    auto* plot = app.add_subcommand("plot", "render one figure as SVG or ASCII");
    plot->add_option("file", file, "model file")->required();
    plot->add_option("--figure", plot_figure, "1 full distribution, 2 event panel, 3 shapes")
        ->required()
        ->check(CLI::Range(1, 3));
    plot->add_option("--format", plot_format, "output format")
        ->check(CLI::IsMember({"svg", "ascii"}));
    auto* pattern_opt =
        plot->add_option("--pattern", plot_pattern, "focus on this pattern (figures 2 and 3)");
    plot->add_option("--observed", plot_observed,
                     "level codes at the pattern's observed positions, index order")
        ->needs(pattern_opt);
    plot->add_option("--out", out_path, "write the figure here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (validate->parsed()) {
        std::string text;
        if (!read_file(file, text)) {
            std::cerr << "error: cannot read " << file << "\n";
            return 2;
        }
        OwnedString out, error;
        return finish(marlab_validate(text.c_str(), &out.value, &error.value), out, error);
    }

    if (generate->parsed()) {
        std::vector<const char*> patterns;
        patterns.reserve(gen_patterns.size());
        for (const std::string& p : gen_patterns) patterns.push_back(p.c_str());
        marlab_generate_options options{};
        options.kind = gen_kind.c_str();
        options.seed = gen_seed;
        options.max_denominator = gen_max_den;
        options.n_variables = gen_variables;
        options.n_levels = gen_levels;
        options.include_all_zeros = gen_no_all_zeros ? 0 : 1;
        options.patterns = patterns.empty() ? nullptr : patterns.data();
        options.n_patterns = patterns.size();
        OwnedString out, error;
        return finish_to(out_path, marlab_generate(&options, &out.value, &error.value), out,
                         error);
    }

    OwnedModel model;
    if (const int rc = load_model(file, model); rc != 0) return rc;
    OwnedString out, error;

    if (factorize->parsed()) {
        return finish(marlab_factorize(model.value, factor_as == "mixture" ? 1 : 0, &out.value,
                                       &error.value),
                      out, error);
    }
    if (events->parsed())
        return finish(marlab_events(model.value, &out.value, &error.value), out, error);
    if (classify->parsed())
        return finish(marlab_classify(model.value, &out.value, &error.value), out, error);
    if (pryobs->parsed()) {
        return finish(marlab_pryobs(model.value, mode == "inf" ? 1 : 0, &out.value, &error.value),
                      out, error);
    }
    if (check->parsed()) {
        return finish(marlab_check(model.value, property.c_str(), &out.value, &error.value), out,
                      error);
    }
    if (reconstruct->parsed())
        return finish(marlab_reconstruct(model.value, &out.value, &error.value), out, error);
    if (sample->parsed()) {
        return finish(marlab_sample(model.value, sample_n, sample_seed, &out.value, &error.value),
                      out, error);
    }
    if (bias->parsed()) {
        return finish(marlab_bias(model.value, bias_var.c_str(), &out.value, &error.value), out,
                      error);
    }
    if (plot->parsed()) {
        marlab_plot_options options{};
        options.figure = plot_figure;
        options.ascii = plot_format == "ascii" ? 1 : 0;
        options.pattern = plot_pattern.empty() ? nullptr : plot_pattern.c_str();
        options.observed = plot_observed.empty() ? nullptr : plot_observed.data();
        options.n_observed = plot_observed.size();
        return finish_to(out_path, marlab_plot(model.value, &options, &out.value, &error.value),
                         out, error);
    }

    std::cerr << "error: no subcommand\n";
    return 2;
}
