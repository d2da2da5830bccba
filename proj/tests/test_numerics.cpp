#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "lsl/numerics.hpp"

using namespace lsl;

TEST_CASE("cumulative_trapezoid is exact on constants and linears") {
    const RadialGrid g = RadialGrid::make_uniform(1.0, 10);
    std::vector<double> ones(g.size(), 1.0);
    auto c = cumulative_trapezoid(g, ones);
    CHECK(c.front() == 0.0);
    CHECK(c.back() == Catch::Approx(1.0).margin(1e-15));

    auto lin = cumulative_trapezoid(g, g.nodes);
    CHECK(lin.back() == Catch::Approx(0.5).margin(1e-15));
}

TEST_CASE("cumulative_trapezoid converges at second order on y^2") {
    auto err_for = [](std::size_t n) {
        const RadialGrid g = RadialGrid::make_uniform(1.0, n);
        std::vector<double> f(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) f[i] = g.nodes[i] * g.nodes[i];
        return std::abs(cumulative_trapezoid(g, f).back() - 1.0 / 3.0);
    };
    const double ratio = err_for(10) / err_for(20);
    CHECK(ratio == Catch::Approx(4.0).margin(0.3));
}

TEST_CASE("cumulative_trapezoid is linear and monotone") {
    std::mt19937 rng(7u);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    const RadialGrid g = RadialGrid::make_uniform(2.0, 33);
    std::vector<double> f(g.size()), h(g.size());
    for (auto& v : f) v = u(rng);
    for (auto& v : h) v = u(rng);
    std::vector<double> combo(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) combo[i] = 3.0 * f[i] - 0.5 * h[i];
    const auto cf = cumulative_trapezoid(g, f);
    const auto ch = cumulative_trapezoid(g, h);
    const auto cc = cumulative_trapezoid(g, combo);
    for (std::size_t i = 0; i < g.size(); ++i)
        CHECK(cc[i] == Catch::Approx(3.0 * cf[i] - 0.5 * ch[i]).margin(1e-12));
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(cf[i] >= cf[i - 1]);  // f >= 0
}

TEST_CASE("cumulative_trapezoid rejects mismatched lengths") {
    const RadialGrid g = RadialGrid::make_uniform(1.0, 4);
    CHECK_THROWS_AS(cumulative_trapezoid(g, std::vector<double>(3, 1.0)), config_error);
}

TEST_CASE("rk4_step: constant derivative leaves state unchanged") {
    const std::vector<double> s{2.5};
    auto out = rk4_step(s, [](double, const std::vector<double>& v) {
        return std::vector<double>(v.size(), 0.0);
    }, 0.0, 0.1);
    CHECK(out[0] == 2.5);
}

TEST_CASE("rk4_step matches the exponential to fifth order") {
    auto deriv = [](double, const std::vector<double>& v) { return v; };
    const std::vector<double> s{1.0};
    const double h = 0.1;
    const double err1 = std::abs(rk4_step(s, deriv, 0.0, h)[0] - std::exp(h));
    const double err2 = std::abs(rk4_step(s, deriv, 0.0, h / 2)[0] - std::exp(h / 2));
    CHECK(err1 < 1e-7);
    CHECK(err1 / err2 == Catch::Approx(32.0).epsilon(0.15));
}

TEST_CASE("rk4_step flags non-finite derivatives") {
    auto bad = [](double, const std::vector<double>& v) {
        return std::vector<double>(v.size(), std::nan(""));
    };
    CHECK_THROWS_AS(rk4_step(std::vector<double>{1.0}, bad, 0.0, 0.1), numerical_error);
}

TEST_CASE("bisect_event finds linear and quadratic roots") {
    CHECK(bisect_event([](double y) { return y - 0.5; }, 0.0, 1.0, 1e-12) ==
          Catch::Approx(0.5).margin(1e-11));
    CHECK(bisect_event([](double y) { return y * y - 2.0; }, 1.0, 2.0, 1e-12) ==
          Catch::Approx(std::sqrt(2.0)).margin(1e-11));
}

TEST_CASE("bisect_event rejects brackets without a sign change") {
    CHECK_THROWS_AS(bisect_event([](double) { return 1.0; }, 0.0, 1.0, 1e-8), numerical_error);
    CHECK_THROWS_AS(bisect_event([](double y) { return y - 0.5; }, 0.0, 1.0, 0.0), config_error);
}

TEST_CASE("fit_loglog recovers exact power laws") {
    const auto f1 = fit_loglog({1.0, 10.0, 100.0}, {1.0, 10.0, 100.0});
    CHECK(f1.slope == Catch::Approx(1.0).margin(1e-12));
    CHECK(f1.residual < 1e-12);

    std::vector<double> x{1.0, 2.0, 4.0, 8.0}, y;
    for (double v : x) y.push_back(3.0 * v * v);
    const auto f2 = fit_loglog(x, y);
    CHECK(f2.slope == Catch::Approx(2.0).margin(1e-12));
    CHECK(f2.intercept == Catch::Approx(std::log(3.0)).margin(1e-12));
}

TEST_CASE("fit_loglog on y = x/log(x) has slope slightly below 1") {
    std::vector<double> x, y;
    for (double v = 1e3; v <= 1.001e6; v *= 10.0) {
        x.push_back(v);
        y.push_back(v / std::log(v));
    }
    const auto f = fit_loglog(x, y);
    // independent long-double least squares over the same points
    long double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const long double lx = logl(x[i]), ly = logl(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const long double n = static_cast<long double>(x.size());
    const long double slope_ld = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(f.slope == Catch::Approx(static_cast<double>(slope_ld)).margin(1e-12));
    // the log correction shaves the exponent just below 1
    CHECK(f.slope > 0.88);
    CHECK(f.slope < 1.0);
}

TEST_CASE("fit_loglog slope is invariant under rescaling the abscissae") {
    std::vector<double> x{2.0, 5.0, 11.0, 31.0}, y{3.0, 7.0, 20.0, 55.0};
    const auto f1 = fit_loglog(x, y);
    for (double& v : x) v *= 17.0;
    const auto f2 = fit_loglog(x, y);
    CHECK(f1.slope == Catch::Approx(f2.slope).margin(1e-12));
}

TEST_CASE("fit_loglog rejects nonpositive data and short input") {
    CHECK_THROWS_AS(fit_loglog({1.0, -2.0}, {1.0, 2.0}), config_error);
    CHECK_THROWS_AS(fit_loglog(std::vector<double>{1.0}, std::vector<double>{1.0}), config_error);
}

TEST_CASE("pchip reproduces linear data exactly and preserves monotone range") {
    std::vector<double> x{0.0, 0.5, 1.2, 2.0}, y;
    for (double v : x) y.push_back(2.0 * v - 1.0);
    const PchipInterpolant p(x, y);
    for (double q : {0.1, 0.77, 1.9}) CHECK(p(q) == Catch::Approx(2.0 * q - 1.0).margin(1e-14));

    // monotone decreasing data: interpolant stays within the data range
    std::vector<double> yd{10.0, 5.0, 2.0, 1.5};
    const PchipInterpolant pd(x, yd);
    for (double q = 0.0; q <= 2.0; q += 0.01) {
        CHECK(pd(q) <= 10.0 + 1e-12);
        CHECK(pd(q) >= 1.5 - 1e-12);
    }
    for (double q = 0.01; q <= 2.0; q += 0.01) CHECK(pd(q) <= pd(q - 0.01) + 1e-12);
}
