#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hlab/coefficients.hpp"

using namespace hlab;

namespace {
const double kTwoPi = 2.0 * 3.1415926535897932384626433832795;

// Custom non-symmetric m=2 tensor for adjoint tests.
CoefficientTensor nonsymmetric_test_tensor() {
    auto eval = [](const Vec2&, CoeffValue& out) {
        out.m = 2;
        out.v.fill(0.0);
        for (int i = 0; i < 2; ++i)
            for (int a = 0; a < 2; ++a) out.at(i, i, a, a) = 3.0;
        out.at(0, 1, 0, 1) = 0.5; // no matching transposed entry
        out.at(1, 0, 1, 0) = 0.25;
    };
    return CoefficientTensor(2, eval, 2.0, 4.0, false, "nonsym-test");
}
} // namespace

TEST_CASE("constant builtin is the identity Laplacian scaled by c") {
    auto A = make_builtin("constant", {.c0 = 1.0});
    CHECK(A.mu() == doctest::Approx(1.0));
    auto v = A.evaluate({0.3, 0.7});
    CHECK(v.at(0, 0, 0, 0) == 1.0);
    CHECK(v.at(1, 1, 0, 0) == 1.0);
    CHECK(v.at(0, 1, 0, 0) == 0.0);

    auto A5 = make_builtin("constant", {.c0 = 5.0});
    auto v5 = A5.evaluate({-4.2, 17.0});
    CHECK(v5.at(0, 0, 0, 0) == 5.0);
    CHECK(v5.at(1, 1, 0, 0) == 5.0);
}

TEST_CASE("laminate evaluation hits analytic values") {
    auto A = make_builtin("laminate", {.c0 = 2.0, .c1 = 1.0});
    // sin(2 pi * 0.25) = 1
    auto v = A.evaluate({0.25, 0.9});
    CHECK(v.at(0, 0, 0, 0) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(v.at(1, 1, 0, 0) == doctest::Approx(3.0).epsilon(1e-14));
    // periodicity: y1 = 1.25 equals y1 = 0.25
    auto v2 = A.evaluate({1.25, 0.0});
    auto v3 = A.evaluate({0.25, 0.0});
    CHECK(v2.at(0, 0, 0, 0) == v3.at(0, 0, 0, 0));
}

TEST_CASE("ellipticity-violating parameters are rejected") {
    CHECK_THROWS_AS(make_builtin("laminate", {.c0 = 1.0, .c1 = 1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_builtin("separable", {.c0 = 0.5, .c1 = 0.7}),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_builtin("nope", {}), std::invalid_argument);
    CHECK_THROWS_AS(make_builtin("constant", {.c0 = 2.0, .m = 2, .coupling = 2.5}),
                    std::invalid_argument);
}

TEST_CASE("periodicity is bit-exact under integer shifts") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> grid(0, (1 << 20) - 1);
    for (const char* name : {"constant", "laminate", "separable", "rotated-laminate"}) {
        auto A = make_builtin(name, {.c0 = 2.0, .c1 = 0.75});
        for (int trial = 0; trial < 20; ++trial) {
            // dyadic points add exactly with small integers
            Vec2 y{grid(rng) / double(1 << 20), grid(rng) / double(1 << 20)};
            auto base = A.evaluate(y);
            for (int zx = -2; zx <= 2; ++zx)
                for (int zy = -2; zy <= 2; ++zy) {
                    auto shifted = A.evaluate({y.x + zx, y.y + zy});
                    for (int k = 0; k < 4; ++k)
                        CHECK(shifted.v[size_t(k)] == base.v[size_t(k)]);
                }
        }
    }
}

TEST_CASE("symmetry of builtin values under (i,a)<->(j,b)") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const char* name : {"laminate", "separable", "rotated-laminate"}) {
        auto A = make_builtin(name, {.c0 = 2.0, .c1 = 1.0, .m = 2, .coupling = 0.3});
        REQUIRE(A.symmetric());
        for (int trial = 0; trial < 100; ++trial) {
            auto v = A.evaluate({u(rng), u(rng)});
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    for (int a = 0; a < 2; ++a)
                        for (int b = 0; b < 2; ++b)
                            CHECK(v.at(i, j, a, b) == v.at(j, i, b, a));
        }
    }
}

TEST_CASE("estimate_ellipticity brackets the analytic extrema") {
    SUBCASE("constant") {
        auto rep = estimate_ellipticity(make_builtin("constant", {.c0 = 1.0}), 16);
        CHECK(rep.lower == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(rep.upper == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(rep.samples == 16);
        CHECK_FALSE(rep.violated);
    }
    SUBCASE("laminate range [1,3]") {
        auto rep = estimate_ellipticity(make_builtin("laminate", {.c0 = 2.0, .c1 = 1.0}), 4096);
        CHECK(rep.lower == doctest::Approx(1.0).epsilon(1e-2));
        CHECK(rep.upper == doctest::Approx(3.0).epsilon(1e-2));
        CHECK(std::abs(rep.worst.x - 0.75) < 1e-12); // minimum at y1 = 3/4
    }
    SUBCASE("separable range [1,3]") {
        auto rep = estimate_ellipticity(make_builtin("separable", {.c0 = 2.0, .c1 = 1.0}), 4096);
        CHECK(rep.lower == doctest::Approx(1.0).epsilon(1e-2));
        CHECK(rep.upper == doctest::Approx(3.0).epsilon(1e-2));
    }
    SUBCASE("lower bound >= 0.99 mu for every catalog entry") {
        for (const char* name : {"constant", "laminate", "separable", "rotated-laminate"}) {
            auto A = make_builtin(name, {.c0 = 2.0, .c1 = 1.0});
            auto rep = estimate_ellipticity(A, 4096);
            CHECK(rep.lower >= 0.99 * A.mu());
        }
    }
}

TEST_CASE("adjoint transposes indices and is an involution") {
    SUBCASE("symmetric builtins are fixed points") {
        auto A = make_builtin("laminate", {.c0 = 2.0, .c1 = 1.0});
        auto As = adjoint(A);
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int t = 0; t < 10; ++t) {
            Vec2 y{u(rng), u(rng)};
            auto v = A.evaluate(y), w = As.evaluate(y);
            for (int k = 0; k < 4; ++k) CHECK(v.v[size_t(k)] == doctest::Approx(w.v[size_t(k)]));
        }
    }
    SUBCASE("non-symmetric m=2 tensor transposes, double adjoint restores") {
        auto A = nonsymmetric_test_tensor();
        auto As = adjoint(A);
        auto Ass = adjoint(As);
        std::mt19937 rng(5);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int t = 0; t < 10; ++t) {
            Vec2 y{u(rng), u(rng)};
            auto v = A.evaluate(y), w = As.evaluate(y), v2 = Ass.evaluate(y);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    for (int a = 0; a < 2; ++a)
                        for (int b = 0; b < 2; ++b) {
                            CHECK(w.at(i, j, a, b) == v.at(j, i, b, a));
                            CHECK(v2.at(i, j, a, b) == v.at(i, j, a, b));
                        }
        }
    }
}

TEST_CASE("rotated laminate oscillates along the diagonal") {
    auto A = make_builtin("rotated-laminate", {.c0 = 2.0, .c1 = 1.0});
    // constant along anti-diagonal lines y1 + y2 = const
    auto v1 = A.evaluate({0.1, 0.3});
    auto v2 = A.evaluate({0.3, 0.1});
    CHECK(v1.at(0, 0, 0, 0) == doctest::Approx(v2.at(0, 0, 0, 0)));
    auto v3 = A.evaluate({0.125, 0.125});
    CHECK(v3.at(0, 0, 0, 0) == doctest::Approx(2.0 + std::sin(kTwoPi * 0.25)));
}
