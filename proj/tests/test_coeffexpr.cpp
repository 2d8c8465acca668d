#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oscphase/coeffexpr.hpp"

using namespace oscphase;

TEST_CASE("expression basics") {
    REQUIRE(eval_q(parse("1 + t^2"), 2.0, 0.0) == Catch::Approx(5.0).margin(1e-15));
    REQUIRE(eval_q(parse("omega^2*(1-t^2)"), 0.0, 3.0) == Catch::Approx(9.0).margin(1e-15));
    REQUIRE(eval_q(parse("1e-2 + 2E3"), 0.0, 0.0) == Catch::Approx(2000.01).margin(1e-12));
    REQUIRE(eval_q(parse("sqrt(abs(-4))"), 0.0, 0.0) == Catch::Approx(2.0).margin(1e-15));
    REQUIRE(eval_q(parse("sin(t)^2 + cos(t)^2"), 0.7, 0.0) == Catch::Approx(1.0).margin(1e-15));
    REQUIRE(eval_q(parse("exp(log(3))"), 0.0, 0.0) == Catch::Approx(3.0).margin(1e-14));
    REQUIRE(eval_q(parse("tanh(0)"), 0.0, 0.0) == 0.0);
}

TEST_CASE("expression precedence") {
    // ^ binds tighter than unary minus, right associative
    REQUIRE(eval_q(parse("-t^2"), 3.0, 0.0) == Catch::Approx(-9.0));
    REQUIRE(eval_q(parse("2^3^2"), 0.0, 0.0) == Catch::Approx(512.0));
    REQUIRE(eval_q(parse("2*3^2"), 0.0, 0.0) == Catch::Approx(18.0));
    REQUIRE(eval_q(parse("2^-1"), 0.0, 0.0) == Catch::Approx(0.5));
    REQUIRE(eval_q(parse("1 - 2 - 3"), 0.0, 0.0) == Catch::Approx(-4.0));
    REQUIRE(eval_q(parse("8/4/2"), 0.0, 0.0) == Catch::Approx(1.0));
    REQUIRE(eval_q(parse("1 + 2*t"), 5.0, 0.0) == Catch::Approx(11.0));
}

TEST_CASE("parse errors carry byte offsets") {
    try {
        parse("1+*t");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        REQUIRE(e.offset() == 2);
    }
    REQUIRE_THROWS_AS(parse(""), ParseError);
    REQUIRE_THROWS_AS(parse("   "), ParseError);
    REQUIRE_THROWS_AS(parse("x + 1"), ParseError);
    REQUIRE_THROWS_AS(parse("foo(t)"), ParseError);
    REQUIRE_THROWS_AS(parse("sin t"), ParseError);
    REQUIRE_THROWS_AS(parse("(1+t"), ParseError);
    REQUIRE_THROWS_AS(parse("1+t)"), ParseError);
    try {
        parse("t + q");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        REQUIRE(e.offset() == 4);
    }
}

TEST_CASE("catalog entries") {
    SECTION("legendre normal form") {
        auto q = CoefficientSpec::catalog("legendre", {{"n", 2.0}});
        REQUIRE(eval_q(q, 0.0, 1.0) == Catch::Approx(7.0).margin(1e-14));
        REQUIRE_THROWS_AS(eval_q(q, 1.0, 1.0), NumericFailure);
        REQUIRE_THROWS_AS(eval_q(q, -1.0, 1.0), NumericFailure);
    }
    SECTION("gegenbauer normal form") {
        auto q = CoefficientSpec::catalog("gegenbauer", {{"n", 2.0}, {"alpha", 1.0}});
        REQUIRE(eval_q(q, 0.0, 1.0) == Catch::Approx(9.5).margin(1e-14));
    }
    SECTION("bvp coefficient") {
        auto q = CoefficientSpec::catalog("bvp");
        REQUIRE(eval_q(q, 0.0, 1.0) == Catch::Approx(21.0).margin(1e-12));
    }
    SECTION("validation") {
        REQUIRE_THROWS_AS(CoefficientSpec::catalog("nope"), InvalidConfig);
        REQUIRE_THROWS_AS(CoefficientSpec::catalog("legendre"), InvalidConfig);
        REQUIRE_THROWS_AS(CoefficientSpec::catalog("gegenbauer", {{"n", 4.0}}), InvalidConfig);
        REQUIRE_THROWS_AS(CoefficientSpec::catalog("gegenbauer", {{"n", 4.0}, {"alpha", -0.6}}),
                          InvalidConfig);
    }
}

TEST_CASE("callback specs evaluate the callback") {
    auto q = CoefficientSpec::callback([](double t, double w) { return w + t; });
    REQUIRE(eval_q(q, 1.0, 2.0) == 3.0);
}

TEST_CASE("non-finite evaluation is rejected") {
    REQUIRE_THROWS_AS(eval_q(parse("1/t"), 0.0, 0.0), NumericFailure);
    REQUIRE_THROWS_AS(eval_q(parse("log(t)"), -1.0, 0.0), NumericFailure);
}

TEST_CASE("property: pretty print round-trips evaluation") {
    const char* sources[] = {
        "1 + t^2",
        "omega^2*(1-t^2)",
        "-t^3 + sin(2*t)*cos(omega) - sqrt(abs(t)) / (1 + t^2)",
        "exp(-t) * tanh(t + 1e-3) + 2^-t",
        "((t))+((omega))^2",
    };
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (const char* src : sources) {
        CoefficientSpec a = parse(src);
        CoefficientSpec b = parse(a.pretty());
        for (int i = 0; i < 100; ++i) {
            double t = u(rng), w = std::abs(u(rng)) + 0.5;
            double va = eval_q(a, t, w);
            double vb = eval_q(b, t, w);
            REQUIRE(va == vb);  // identical AST evaluation, bit for bit
        }
    }
}

TEST_CASE("property: legendre catalog form is even in t") {
    auto q = CoefficientSpec::catalog("legendre", {{"n", 64.0}});
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> u(0.0, 0.999);
    for (int i = 0; i < 100; ++i) {
        double t = u(rng);
        REQUIRE(eval_q(q, t, 1.0) == Catch::Approx(eval_q(q, -t, 1.0)).epsilon(1e-14));
    }
}

TEST_CASE("determinism: identical inputs give bit-identical values") {
    CoefficientSpec q = parse("sin(t)*exp(-t^2/3) + omega");
    double v1 = eval_q(q, 0.37, 11.0);
    double v2 = eval_q(q, 0.37, 11.0);
    REQUIRE(v1 == v2);
}
