#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <marlab/marlab.h>

#include <cstring>
#include <string>

namespace {

const char* kMnarText =
    "space\n"
    "  y1 0 1\n"
    "  y2 0 1\n"
    "patterns\n"
    "  11\n"
    "  10\n"
    "selection\n"
    "marginal\n"
    "  0 0 1/4\n"
    "  0 1 1/4\n"
    "  1 0 1/4\n"
    "  1 1 1/4\n"
    "mechanism\n"
    "  0 0 11 9/10\n"
    "  0 0 10 1/10\n"
    "  0 1 11 7/10\n"
    "  0 1 10 3/10\n"
    "  1 0 11 9/10\n"
    "  1 0 10 1/10\n"
    "  1 1 11 9/10\n"
    "  1 1 10 1/10\n";

const char* kMcarText =
    "space\n"
    "  y1 0 1\n"
    "patterns\n"
    "  1\n"
    "  0\n"
    "density\n"
    "  1 0 1/4\n"
    "  1 1 1/4\n"
    "  0 0 1/4\n"
    "  0 1 1/4\n";

struct Owned {
    char* s = nullptr;
    ~Owned() { marlab_string_free(s); }
    std::string str() const { return s ? std::string(s) : std::string(); }
};

struct OwnedModel {
    marlab_model* m = nullptr;
    ~OwnedModel() { marlab_model_free(m); }
};

bool contains(const std::string& text, const std::string& needle) {
    return text.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("version is a static non-empty string") {
    const char* v = marlab_version();
    REQUIRE(v != nullptr);
    CHECK(std::strlen(v) > 0);
    CHECK(v == marlab_version());
}

TEST_CASE("parse, classify and free round trip") {
    OwnedModel model;
    Owned error;
    REQUIRE(marlab_model_parse(kMnarText, &model.m, &error.s) == MARLAB_OK);
    REQUIRE(model.m != nullptr);
    CHECK(error.s == nullptr);

    Owned report;
    Owned classify_error;
    CHECK(marlab_classify(model.m, &report.s, &classify_error.s) == MARLAB_OK);
    CHECK(contains(report.str(), "verdict: NotMAR"));
    CHECK(contains(report.str(), "mechanism values 1/10 vs 3/10"));
}

TEST_CASE("parse failures come back as line-tagged messages") {
    OwnedModel model;
    Owned error;
    CHECK(marlab_model_parse("space\n  y1 0 1\njunk\n", &model.m, &error.s) ==
          MARLAB_PARSE_ERROR);
    CHECK(model.m == nullptr);
    REQUIRE(error.s != nullptr);
    CHECK(contains(error.str(), "line 3"));

    // Invariant violations are parse errors under the strict entry point.
    Owned invariant_error;
    CHECK(marlab_model_parse("space\n  y1 0 1\npatterns\n  1\ndensity\n  1 0 1/2\n  1 1 1/4\n",
                             &model.m, &invariant_error.s) == MARLAB_PARSE_ERROR);
    CHECK(contains(invariant_error.str(), "violates its invariants"));
}

TEST_CASE("validate reports invariant breaks without a model handle") {
    Owned out;
    Owned error;
    CHECK(marlab_validate(kMcarText, &out.s, &error.s) == MARLAB_OK);
    CHECK(contains(out.str(), "status: valid"));

    Owned bad_out;
    Owned bad_error;
    CHECK(marlab_validate("space\n  y1 0 1\npatterns\n  1\ndensity\n  1 0 1/2\n  1 1 1/4\n",
                          &bad_out.s, &bad_error.s) == MARLAB_ASSERT_FAIL);
    CHECK(contains(bad_out.str(), "status: INVALID"));

    Owned syntax_out;
    Owned syntax_error;
    CHECK(marlab_validate("space\n", &syntax_out.s, &syntax_error.s) == MARLAB_PARSE_ERROR);
    CHECK(syntax_out.s == nullptr);
    CHECK(syntax_error.s != nullptr);
}

TEST_CASE("null arguments are rejected uniformly") {
    OwnedModel model;
    {
        Owned error;
        CHECK(marlab_model_parse(nullptr, &model.m, &error.s) == MARLAB_BAD_ARGUMENT);
    }
    {
        Owned error;
        CHECK(marlab_model_parse(kMcarText, nullptr, &error.s) == MARLAB_BAD_ARGUMENT);
    }
    {
        Owned out, error;
        CHECK(marlab_validate(nullptr, &out.s, &error.s) == MARLAB_BAD_ARGUMENT);
        CHECK(out.s == nullptr);
    }
    {
        Owned out, error;
        CHECK(marlab_classify(nullptr, &out.s, &error.s) == MARLAB_BAD_ARGUMENT);
    }
    {
        Owned out, error;
        CHECK(marlab_generate(nullptr, &out.s, &error.s) == MARLAB_BAD_ARGUMENT);
    }

    Owned parse_error;
    REQUIRE(marlab_model_parse(kMcarText, &model.m, &parse_error.s) == MARLAB_OK);
    {
        Owned out, error;
        CHECK(marlab_check(model.m, nullptr, &out.s, &error.s) == MARLAB_BAD_ARGUMENT);
    }
    {
        Owned out, error;
        CHECK(marlab_plot(model.m, nullptr, &out.s, &error.s) == MARLAB_BAD_ARGUMENT);
    }

    // Freeing null is a no-op, never a crash.
    marlab_string_free(nullptr);
    marlab_model_free(nullptr);
}

TEST_CASE("checks distinguish failed assertions from errors") {
    OwnedModel model;
    Owned error;
    REQUIRE(marlab_model_parse(kMnarText, &model.m, &error.s) == MARLAB_OK);

    Owned fail_out;
    Owned fail_error;
    CHECK(marlab_check(model.m, "shape", &fail_out.s, &fail_error.s) == MARLAB_ASSERT_FAIL);
    CHECK(contains(fail_out.str(), "check shape: FAIL"));
    CHECK(fail_error.s == nullptr);

    Owned unknown_out;
    Owned unknown_error;
    CHECK(marlab_check(model.m, "sideways", &unknown_out.s, &unknown_error.s) == MARLAB_ERROR);
    CHECK(unknown_out.s == nullptr);
    CHECK(contains(unknown_error.str(), "unknown property 'sideways'"));

    Owned rec_out;
    Owned rec_error;
    CHECK(marlab_reconstruct(model.m, &rec_out.s, &rec_error.s) == MARLAB_ASSERT_FAIL);
    CHECK(contains(rec_out.str(), "reconstruction: MISMATCH"));
}

TEST_CASE("the full reporting surface works through the boundary") {
    OwnedModel model;
    Owned error;
    REQUIRE(marlab_model_parse(kMnarText, &model.m, &error.s) == MARLAB_OK);

    Owned factorized;
    CHECK(marlab_factorize(model.m, 1, &factorized.s, &error.s) == MARLAB_OK);
    CHECK(contains(factorized.str(), "mixture"));
    CHECK(contains(factorized.str(), "pattern-marginal"));

    Owned events;
    CHECK(marlab_events(model.m, &events.s, &error.s) == MARLAB_OK);
    CHECK(contains(events.str(), "observable data events"));

    Owned sup;
    CHECK(marlab_pryobs(model.m, 0, &sup.s, &error.s) == MARLAB_OK);
    CHECK(contains(sup.str(), "supremum"));
    CHECK(contains(sup.str(), "pattern 10, y1=0: 3/10"));
    Owned inf;
    CHECK(marlab_pryobs(model.m, 1, &inf.s, &error.s) == MARLAB_OK);
    CHECK(contains(inf.str(), "infimum"));
    CHECK(contains(inf.str(), "pattern 10, y1=0: 1/10"));

    Owned csv;
    CHECK(marlab_sample(model.m, 8, 21, &csv.s, &error.s) == MARLAB_OK);
    CHECK(csv.str().rfind("pattern,y1,y2\n", 0) == 0);
    Owned csv_again;
    CHECK(marlab_sample(model.m, 8, 21, &csv_again.s, &error.s) == MARLAB_OK);
    CHECK(csv.str() == csv_again.str());

    Owned bias;
    CHECK(marlab_bias(model.m, "y2", &bias.s, &error.s) == MARLAB_OK);
    CHECK(contains(bias.str(), "difference          -1/34"));
    Owned default_bias;
    CHECK(marlab_bias(model.m, nullptr, &default_bias.s, &error.s) == MARLAB_OK);
    CHECK(contains(default_bias.str(), "complete-case bias for y1"));
    Owned bias_error;
    Owned bias_out;
    CHECK(marlab_bias(model.m, "zz", &bias_out.s, &bias_error.s) == MARLAB_ERROR);
    CHECK(contains(bias_error.str(), "unknown variable 'zz'"));
}

TEST_CASE("generated models load back through the same boundary") {
    const char* kinds[] = {"constant", "common-observed", "monotone", "mnar"};
    for (const char* kind : kinds) {
        marlab_generate_options options = {};
        options.kind = kind;
        options.seed = 13;
        options.include_all_zeros = 1;
        Owned text;
        Owned error;
        REQUIRE(marlab_generate(&options, &text.s, &error.s) == MARLAB_OK);
        CHECK(contains(text.str(), "selection"));

        OwnedModel model;
        Owned parse_error;
        CHECK(marlab_model_parse(text.s, &model.m, &parse_error.s) == MARLAB_OK);

        Owned verdict;
        Owned verdict_error;
        CHECK(marlab_classify(model.m, &verdict.s, &verdict_error.s) == MARLAB_OK);
        const bool expect_mar = std::string(kind) != "mnar";
        CHECK(contains(verdict.str(),
                       expect_mar ? "verdict: EverywhereMAR" : "verdict: NotMAR"));
    }

    marlab_generate_options bad = {};
    bad.kind = "sideways";
    Owned out;
    Owned error;
    CHECK(marlab_generate(&bad, &out.s, &error.s) == MARLAB_BAD_ARGUMENT);

    // Explicit patterns travel through the C array form.
    const char* patterns[] = {"11", "01"};
    marlab_generate_options explicit_patterns = {};
    explicit_patterns.kind = "constant";
    explicit_patterns.seed = 2;
    explicit_patterns.patterns = patterns;
    explicit_patterns.n_patterns = 2;
    Owned text;
    Owned gen_error;
    REQUIRE(marlab_generate(&explicit_patterns, &text.s, &gen_error.s) == MARLAB_OK);
    CHECK(contains(text.str(), "  01\n"));
}

TEST_CASE("plots honour the selector and format switches") {
    OwnedModel model;
    Owned error;
    REQUIRE(marlab_model_parse(kMnarText, &model.m, &error.s) == MARLAB_OK);

    marlab_plot_options ascii = {};
    ascii.figure = 1;
    ascii.ascii = 1;
    Owned fig1;
    CHECK(marlab_plot(model.m, &ascii, &fig1.s, &error.s) == MARLAB_OK);
    CHECK(contains(fig1.str(), "full distribution"));

    marlab_plot_options svg = {};
    svg.figure = 3;
    const int observed[] = {0};
    svg.pattern = "10";
    svg.observed = observed;
    svg.n_observed = 1;
    Owned fig3;
    CHECK(marlab_plot(model.m, &svg, &fig3.s, &error.s) == MARLAB_OK);
    CHECK(fig3.str().rfind("<svg", 0) == 0);
    CHECK(contains(fig3.str(), "not proportional"));

    // Observed values without a pattern cannot address an event.
    marlab_plot_options orphan = {};
    orphan.figure = 3;
    orphan.observed = observed;
    orphan.n_observed = 1;
    Owned out;
    Owned orphan_error;
    CHECK(marlab_plot(model.m, &orphan, &out.s, &orphan_error.s) == MARLAB_BAD_ARGUMENT);

    marlab_plot_options wrong = {};
    wrong.figure = 9;
    Owned wrong_out;
    Owned wrong_error;
    CHECK(marlab_plot(model.m, &wrong, &wrong_out.s, &wrong_error.s) == MARLAB_ERROR);
    CHECK(contains(wrong_error.str(), "figure must be 1, 2, or 3"));
}
