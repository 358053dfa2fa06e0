#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "mfrac/problem_io.hpp"

using namespace mfrac;

namespace {

class TempFile {
public:
    explicit TempFile(const std::string& content) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() / ("mfrac_io_test_" + std::to_string(counter++) + ".json");
        std::ofstream out(path_);
        out << content;
    }
    ~TempFile() {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }
    std::string path() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

} // namespace

TEST_CASE("load_problem: homogeneous fixture") {
    const TempFile f(R"json({"alpha":0.5,"beta":1.0,"coefficients":[3,4]})json");
    const ProblemSpec spec = load_problem(f.path());
    CHECK(spec.alpha == 0.5);
    CHECK(spec.beta == 1.0);
    CHECK(spec.p == std::vector<double>{3.0, 4.0});
    CHECK_FALSE(spec.forcing.has_value());
    CHECK_FALSE(spec.initial.has_value());
}

TEST_CASE("load_problem: forcing parsed with the file's alpha") {
    const TempFile f(R"json({"alpha":0.5,"beta":1,"coefficients":[3,4],"forcing":"exp(2*t^a)"})json");
    const ProblemSpec spec = load_problem(f.path());
    REQUIRE(spec.forcing.has_value());
    CHECK(spec.forcing->kind == MExpr::Kind::Exp);
    CHECK(spec.forcing->exponent == doctest::Approx(0.5)); // alpha substituted
}

TEST_CASE("load_problem: full option set") {
    const TempFile f(R"json({
        "alpha": 0.5, "beta": 2.0, "coefficients": [5, 4],
        "forcing": "sin(2*t^a)",
        "initial": {"t0": 1.5, "values": [1.0, -0.5]},
        "lower_limit": 0.75,
        "quad": {"abs_tol": 1e-12, "rel_tol": 1e-11, "max_depth": 30}
    })json");
    const ProblemSpec spec = load_problem(f.path());
    REQUIRE(spec.initial.has_value());
    CHECK(spec.initial->t0 == 1.5);
    CHECK(spec.initial->values.size() == 2);
    CHECK(spec.lower_limit == doctest::Approx(0.75));
    CHECK(spec.quad.abs_tol == 1e-12);
    CHECK(spec.quad.rel_tol == 1e-11);
    CHECK(spec.quad.max_depth == 30);
}

TEST_CASE("load_problem: validation failures name the constraint") {
    SUBCASE("alpha out of range") {
        const TempFile f(R"json({"alpha":1.5,"beta":1,"coefficients":[3,4]})json");
        CHECK_THROWS_WITH_AS(load_problem(f.path()),
                             "problem file: field '<validation>': alpha must be in (0,1]", problem_format_error);
    }
    SUBCASE("empty coefficients") {
        const TempFile f(R"json({"alpha":0.5,"beta":1,"coefficients":[]})json");
        CHECK_THROWS_AS(load_problem(f.path()), problem_format_error);
    }
    SUBCASE("initial length mismatch") {
        const TempFile f(R"json({"alpha":0.5,"beta":1,"coefficients":[3,4],"initial":{"t0":1,"values":[1]}})json");
        CHECK_THROWS_AS(load_problem(f.path()), problem_format_error);
    }
    SUBCASE("lower_limit above t0") {
        const TempFile f(
            R"json({"alpha":0.5,"beta":1,"coefficients":[3,4],"initial":{"t0":1,"values":[1,0]},"lower_limit":2})json");
        CHECK_THROWS_AS(load_problem(f.path()), problem_format_error);
    }
}

TEST_CASE("load_problem: unknown keys are rejected") {
    SUBCASE("top level") {
        const TempFile f(R"json({"alpha":0.5,"beta":1,"coefficients":[3,4],"extra":1})json");
        try {
            load_problem(f.path());
            FAIL("expected problem_format_error");
        } catch (const problem_format_error& e) {
            CHECK(e.field() == "extra");
        }
    }
    SUBCASE("inside initial") {
        const TempFile f(R"json({"alpha":0.5,"beta":1,"coefficients":[3,4],"initial":{"t0":1,"values":[1,0],"x":2}})json");
        CHECK_THROWS_AS(load_problem(f.path()), problem_format_error);
    }
    SUBCASE("inside quad") {
        const TempFile f(R"json({"alpha":0.5,"beta":1,"coefficients":[3,4],"quad":{"tol":1}})json");
        CHECK_THROWS_AS(load_problem(f.path()), problem_format_error);
    }
}

TEST_CASE("load_problem: malformed input") {
    SUBCASE("bad JSON") {
        const TempFile f("{not json");
        CHECK_THROWS_AS(load_problem(f.path()), problem_format_error);
    }
    SUBCASE("non-object root") {
        const TempFile f("[1,2,3]");
        CHECK_THROWS_AS(load_problem(f.path()), problem_format_error);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_problem("/nonexistent/mfrac.json"), problem_format_error);
    }
    SUBCASE("forcing parse errors surface with their offset") {
        const TempFile f(R"json({"alpha":0.5,"beta":1,"coefficients":[3,4],"forcing":"exp(2*t^a"})json");
        CHECK_THROWS_AS(load_problem(f.path()), parse_error);
    }
    SUBCASE("wrong types") {
        const TempFile f(R"json({"alpha":"x","beta":1,"coefficients":[3,4]})json");
        CHECK_THROWS_AS(load_problem(f.path()), problem_format_error);
    }
}

TEST_CASE("load_problem: 64 KiB size cap") {
    std::string big = R"json({"alpha":0.5,"beta":1,"coefficients":[3,4])json";
    big += std::string(70 * 1024, ' ');
    big += "}";
    const TempFile f(big);
    CHECK_THROWS_AS(load_problem(f.path()), problem_format_error);
}
