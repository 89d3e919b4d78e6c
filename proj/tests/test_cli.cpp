#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include <sys/wait.h>

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

std::string cli_path() {
    const char* path = std::getenv("MARLAB_CLI_PATH");
    REQUIRE_MESSAGE(path != nullptr, "MARLAB_CLI_PATH must point at the cli binary");
    return path;
}

std::string data_dir() {
    const char* path = std::getenv("MARLAB_TEST_DATA");
    REQUIRE_MESSAGE(path != nullptr, "MARLAB_TEST_DATA must point at tests/data");
    return path;
}

std::string corpus(const std::string& name) { return data_dir() + "/corpus/" + name; }

/// Runs the cli with the given arguments, capturing stdout; stderr is
/// dropped so error-path tests only see the exit code.
RunResult run(const std::string& args) {
    const std::string command = "'" + cli_path() + "' " + args + " 2>/dev/null";
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult result;
    char buffer[4096];
    std::size_t n = 0;
    while ((n = fread(buffer, 1, sizeof buffer, pipe)) > 0) result.out.append(buffer, n);
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

bool contains(const std::string& text, const std::string& needle) {
    return text.find(needle) != std::string::npos;
}

std::string write_temp(const std::string& name, const std::string& content) {
    const char* base = std::getenv("TMPDIR");
    std::string path = std::string(base != nullptr ? base : "/tmp") + "/" + name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    REQUIRE(out.good());
    out << content;
    out.close();
    return path;
}

}  // namespace

TEST_CASE("classify reports the verdict and exits zero either way") {
    RunResult mar = run("classify " + corpus("mcar_2v.model"));
    CHECK(mar.exit_code == 0);
    CHECK(contains(mar.out, "verdict: EverywhereMAR"));

    RunResult mnar = run("classify " + corpus("mnar_2v.model"));
    CHECK(mnar.exit_code == 0);
    CHECK(contains(mnar.out, "verdict: NotMAR"));
    CHECK(contains(mnar.out, "witness:"));
}

TEST_CASE("validate distinguishes valid, invalid and unreadable inputs") {
    RunResult good = run("validate " + corpus("monotone_3v.model"));
    CHECK(good.exit_code == 0);
    CHECK(contains(good.out, "status: valid"));

    std::string heavy = write_temp(
        "cli_heavy.model",
        "space\n  y1 0 1\npatterns\n  1\n  0\ndensity\n"
        "  1 0 3/8\n  1 1 1/4\n  0 0 1/4\n  0 1 1/4\n");
    RunResult invalid = run("validate " + heavy);
    CHECK(invalid.exit_code == 1);
    CHECK(contains(invalid.out, "status: INVALID"));

    std::string decimal = write_temp(
        "cli_decimal.model",
        "space\n  y1 0 1\npatterns\n  1\ndensity\n  1 0 0.5\n  1 1 1/2\n");
    CHECK(run("validate " + decimal).exit_code == 2);

    CHECK(run("validate /nonexistent/nowhere.model").exit_code == 2);
}

TEST_CASE("usage errors exit two") {
    CHECK(run("").exit_code == 2);
    CHECK(run("classify").exit_code == 2);
    CHECK(run("frobnicate x.model").exit_code == 2);
    CHECK(run("pryobs --mode sideways " + corpus("mcar_2v.model")).exit_code == 2);
    CHECK(run("plot --figure 9 " + corpus("mcar_2v.model")).exit_code == 2);
    CHECK(run("check " + corpus("mcar_2v.model")).exit_code == 2);
}

TEST_CASE("check asserts properties with exit one on failure") {
    RunResult pass = run("check --property standard-equation " + corpus("mcar_2v.model"));
    CHECK(pass.exit_code == 0);
    CHECK(contains(pass.out, "PASS"));

    RunResult fail = run("check --property standard-equation " + corpus("mnar_2v.model"));
    CHECK(fail.exit_code == 1);
    CHECK(contains(fail.out, "FAIL"));
    CHECK(contains(fail.out, "y_mis"));

    CHECK(run("check --property shape " + corpus("mnar_2v.model")).exit_code == 1);
    CHECK(run("check --property drawn-at-random " + corpus("commonobs_2v.model")).exit_code == 0);
}

TEST_CASE("reconstruct succeeds exactly on MAR corpora") {
    CHECK(run("reconstruct " + corpus("mcar_3v.model")).exit_code == 0);
    RunResult fail = run("reconstruct " + corpus("mnar_2v.model"));
    CHECK(fail.exit_code == 1);
    CHECK(contains(fail.out, "reconstruction: MISMATCH"));
}

TEST_CASE("factorize and pryobs report in the requested form") {
    RunResult mix = run("factorize --as mixture " + corpus("mcar_2v.model"));
    CHECK(mix.exit_code == 0);
    CHECK(contains(mix.out, "pattern-marginal"));

    RunResult sel = run("factorize " + corpus("mcar_2v.model"));
    CHECK(contains(sel.out, "mechanism"));

    RunResult inf = run("pryobs --mode inf " + corpus("mnar_2v.model"));
    CHECK(inf.exit_code == 0);
    CHECK(contains(inf.out, "infimum"));
}

TEST_CASE("sampling is reproducible across processes") {
    const std::string args = "sample --n 20 --seed 7 " + corpus("monotone_2v.model");
    RunResult first = run(args);
    CHECK(first.exit_code == 0);
    CHECK(first.out.rfind("pattern,y1,y2\n", 0) == 0);
    RunResult second = run(args);
    CHECK(second.out == first.out);
}

TEST_CASE("generated models round-trip through the cli") {
    RunResult generated = run("generate --kind monotone --seed 42 --variables 3");
    CHECK(generated.exit_code == 0);
    std::string path = write_temp("cli_generated.model", generated.out);
    CHECK(run("validate " + path).exit_code == 0);
    RunResult verdict = run("classify " + path);
    CHECK(contains(verdict.out, "verdict: EverywhereMAR"));
    CHECK(run("check --property drawn-at-random " + path).exit_code == 0);

    RunResult again = run("generate --kind monotone --seed 42 --variables 3");
    CHECK(again.out == generated.out);
}

TEST_CASE("bias reads the hand-enumerated demonstration model") {
    RunResult r = run("bias --var y2 " + corpus("bias_demo.model"));
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "E[y2 | R = 11] = 8/17"));
    CHECK(contains(r.out, "difference          -1/34"));
    CHECK(contains(r.out, "understates the mean by 1/34"));
}

TEST_CASE("plots write figures to stdout or a file") {
    RunResult ascii = run("plot --figure 1 --format ascii " + corpus("mcar_2v.model"));
    CHECK(ascii.exit_code == 0);
    CHECK(contains(ascii.out, "full distribution"));

    RunResult svg = run("plot --figure 2 " + corpus("mnar_2v.model"));
    CHECK(svg.exit_code == 0);
    CHECK(svg.out.rfind("<svg", 0) == 0);

    const char* base = std::getenv("TMPDIR");
    std::string path = std::string(base != nullptr ? base : "/tmp") + "/cli_fig.svg";
    RunResult to_file = run("plot --figure 3 --out '" + path + "' " + corpus("mnar_2v.model"));
    CHECK(to_file.exit_code == 0);
    std::ifstream in(path);
    std::string written((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(written.rfind("<svg", 0) == 0);
    CHECK(contains(written, "</svg>"));
}

TEST_CASE("events lists the partition of the sample space") {
    RunResult r = run("events " + corpus("mcar_2v3l.model"));
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "observable data events partitioning"));
}
