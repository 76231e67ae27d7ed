#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "cqed/analytic.hpp"
#include "cqed/fitting.hpp"
#include "cqed/master_equation.hpp"
#include "fixtures.hpp"

using namespace cqed;
using namespace cqed::fit;

namespace {

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        v[static_cast<std::size_t>(k)] = a + (b - a) * k / (n - 1);
    return v;
}

double rel(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

} // namespace

TEST_CASE("Lorentzian round trip at linewidth scale") {
    const double w = units::from_mhz(40.2);
    const auto x = linspace(-3 * w, 3 * w, 41);
    std::vector<double> y;
    for (double v : x)
        y.push_back(lorentzian(v, 1.0, 0.0, w, 0.0));
    const FitResult r = fit_lorentzian(x, y);
    REQUIRE(r.converged);
    CHECK(rel(r["A"], 1.0) < 1e-8);
    CHECK(std::abs(r["x0"]) < 1e-8 * w);
    CHECK(rel(r["w"], w) < 1e-8);
    CHECK(std::abs(r["B"]) < 1e-8);
    for (std::size_t k = 1; k < r.cost_history.size(); ++k)
        CHECK(r.cost_history[k] <= r.cost_history[k - 1]);
}

TEST_CASE("Lorentzian round trips for random parameters") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> amp(-5.0, 5.0), centre(-1.0, 1.0), width(0.3, 2.0), base(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        double a = amp(rng);
        if (std::abs(a) < 0.2)
            a = 1.0;
        const double x0 = centre(rng), w = width(rng), b = base(rng);
        const auto x = linspace(x0 - 4 * w, x0 + 4 * w, 61);
        std::vector<double> y;
        for (double v : x)
            y.push_back(lorentzian(v, a, x0, w, b));
        const FitResult r = fit_lorentzian(x, y);
        CAPTURE(trial);
        CHECK(r.converged);
        CHECK(rel(r["A"], a) < 1e-6);
        CHECK(std::abs(r["x0"] - x0) < 1e-6 * w);
        CHECK(rel(r["w"], w) < 1e-6);
        CHECK(std::abs(r["B"] - b) < 1e-6 * std::max(1.0, std::abs(b)));
    }
}

TEST_CASE("Lorentzian weights suppress an outlier") {
    const auto x = linspace(-5, 5, 51);
    std::vector<double> y, w(x.size(), 1.0);
    for (double v : x)
        y.push_back(lorentzian(v, 2.0, 0.5, 1.5, 0.1));
    y[10] += 3.0;
    w[10] = 0.0;
    const FitResult r = fit_lorentzian(x, y, w);
    CHECK(rel(r["w"], 1.5) < 1e-6);
    CHECK(fit_lorentzian(x, y)["w"] != doctest::Approx(1.5).epsilon(1e-3));
}

TEST_CASE("flat data is reported as degenerate") {
    const auto x = linspace(0, 1, 11);
    const std::vector<double> y(11, 0.3);
    const FitResult r = fit_lorentzian(x, y);
    CHECK_FALSE(r.converged);
    CHECK_FALSE(r.diagnostic.empty());
    CHECK_THROWS_AS(fit_lorentzian(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}),
                    std::invalid_argument);
}

TEST_CASE("converged fits satisfy the gradient criterion") {
    // y = a exp(b x) on raw, unstandardised data
    const ModelFn model = [](const Eigen::VectorXd& x, const Eigen::VectorXd& th, Eigen::VectorXd& f,
                             Eigen::MatrixXd& j) {
        f = th(0) * (th(1) * x.array()).exp();
        j.resize(x.size(), 2);
        j.col(0) = (th(1) * x.array()).exp();
        j.col(1) = x.array() * f.array();
    };
    std::mt19937 rng(5);
    std::normal_distribution<double> noise(0.0, 0.01);
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(30, 0.0, 2.0), y(30);
    for (int k = 0; k < 30; ++k)
        y(k) = 1.5 * std::exp(-0.8 * x(k)) + noise(rng);
    Eigen::VectorXd theta0(2);
    theta0 << 1.0, 0.0;
    const FitResult r = levenberg_marquardt(model, x, y, Eigen::VectorXd::Ones(30), theta0, {"a", "b"});
    REQUIRE(r.converged);
    Eigen::VectorXd f;
    Eigen::MatrixXd j;
    model(x, r.params, f, j);
    const double grad = (j.transpose() * (y - f)).norm();
    CHECK(grad <= 1e-8 * (1.0 + r.params.norm()));
    CHECK(r["a"] == doctest::Approx(1.5).epsilon(0.02));
    CHECK(r.error("b") > 0.0);
    for (std::size_t k = 1; k < r.cost_history.size(); ++k)
        CHECK(r.cost_history[k] <= r.cost_history[k - 1]);
}

TEST_CASE("polynomial minimum of a parabola") {
    const auto x = linspace(0, 6, 31);
    std::vector<double> y;
    for (double v : x)
        y.push_back((v - 3.0) * (v - 3.0));
    for (int degree = 2; degree <= 6; ++degree) {
        const PolyMinimum m = fit_poly_minimum(x, y, degree);
        CHECK(std::abs(m.x_min - 3.0) < 1e-10);
        CHECK(std::abs(m.value) < 1e-10);
    }
    CHECK_THROWS_AS(fit_poly_minimum(x, y, 7), std::invalid_argument);
}

TEST_CASE("monotone data has no minimum") {
    const auto x = linspace(0, 1, 21);
    std::vector<double> y;
    for (double v : x)
        y.push_back(std::exp(v));
    CHECK_THROWS_AS(fit_poly_minimum(x, y, 4), NoMinimumError);
}

TEST_CASE("polynomial minimum is invariant under affine rescaling of y") {
    const auto x = linspace(-2, 3, 41);
    std::vector<double> y, z;
    for (double v : x) {
        y.push_back(std::cosh(v - 0.37) + 0.1 * v * v * v);
        z.push_back(-4.0e7 + 2.5e9 * y.back());
    }
    const double a = fit_poly_minimum(x, y, 4).x_min;
    const double b = fit_poly_minimum(x, z, 4).x_min;
    CHECK(std::abs(a - b) < 1e-9);
}

TEST_CASE("polynomial minimum round trips for random quartics") {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> centre(-1.0, 1.0), c3(-0.3, 0.3), c4(0.0, 0.5);
    for (int trial = 0; trial < 50; ++trial) {
        const double m = centre(rng), a3 = c3(rng), a4 = c4(rng);
        // y = (x - m)^2 (1 + a3 (x - m) + a4 (x - m)^2) has a local minimum at m
        const auto x = linspace(m - 1.0, m + 1.0, 41);
        std::vector<double> y;
        for (double v : x) {
            const double d = v - m;
            y.push_back(d * d * (1.0 + a3 * d + a4 * d * d));
        }
        CHECK(std::abs(fit_poly_minimum(x, y, 4).x_min - m) < 1e-6);
    }
}

TEST_CASE("free-space minimum of the master equation, every degree") {
    SystemParams p = fixtures::reference_system(0.05, 3);
    const double target = analytic::interference_detunings(p).minus;
    std::vector<double> x, y;
    for (int k = -20; k <= 20; ++k) {
        p.delta_c = target + 0.005 * k * p.kappa;
        x.push_back(p.delta_c / p.kappa);
        y.push_back(solve_steady(p).rates.p_free);
    }
    for (int degree = 2; degree <= 6; ++degree) {
        CAPTURE(degree);
        CHECK(rel(fit_poly_minimum(x, y, degree).x_min * p.kappa, target) < 0.05);
    }
    CHECK(target / p.kappa == doctest::Approx(0.388).epsilon(2e-3));
}

TEST_CASE("exponential loss: noiseless recovery") {
    const auto t = linspace(0, 90, 10);
    std::vector<double> y;
    for (double v : t)
        y.push_back(analytic::coating_loss_model(v, 1750, 23600, 123));
    const FitResult r = fit_exponential_loss(t, y);
    REQUIRE(r.converged);
    CHECK(rel(r["tau"], 123.0) < 1e-6);
    CHECK(rel(r["L0"], 1750.0) < 1e-6);
    CHECK(rel(r["dL"], 23600.0) < 1e-6);

    std::mt19937 rng(31);
    std::uniform_real_distribution<double> l0(0, 5000), dl(1000, 40000), tau(20, 400);
    for (int trial = 0; trial < 50; ++trial) {
        const double a = l0(rng), b = dl(rng), c = tau(rng);
        const auto tt = linspace(0, 2.0 * c, 15);
        std::vector<double> yy;
        for (double v : tt)
            yy.push_back(analytic::coating_loss_model(v, a, b, c));
        const FitResult f = fit_exponential_loss(tt, yy);
        CAPTURE(trial);
        CHECK(rel(f["tau"], c) < 1e-6);
        CHECK(rel(f["dL"], b) < 1e-6);
        CHECK(std::abs(f["L0"] - a) < 1e-6 * b);
    }
}

TEST_CASE("exponential loss under 5% multiplicative noise") {
    const auto t = linspace(0, 180, 20);
    std::vector<double> errors;
    for (unsigned seed = 0; seed < 100; ++seed) {
        std::mt19937 rng(seed);
        std::normal_distribution<double> noise(0.0, 0.05);
        std::vector<double> y;
        for (double v : t)
            y.push_back(analytic::coating_loss_model(v, 1750, 23600, 123) * (1.0 + noise(rng)));
        const FitResult r = fit_exponential_loss(t, y);
        errors.push_back(r.converged ? rel(r["tau"], 123.0) : 1.0);
        CHECK(r.error("tau") > 0.0);
    }
    std::nth_element(errors.begin(), errors.begin() + 50, errors.end());
    CHECK(errors[50] <= 0.15);
}

TEST_CASE("exponential loss degenerate inputs") {
    const auto t = linspace(0, 90, 10);
    const std::vector<double> flat(10, 1750.0);
    const FitResult r = fit_exponential_loss(t, flat);
    CHECK_FALSE(r.converged);
    CHECK(r.diagnostic.find("unidentifiable") != std::string::npos);
    CHECK_THROWS_AS(fit_exponential_loss(std::vector<double>{0, 1, 2}, std::vector<double>{1, 2, 3}),
                    std::invalid_argument);
    CHECK_THROWS_AS(fit_exponential_loss(std::vector<double>{-1, 1, 2, 3}, std::vector<double>{1, 2, 3, 4}),
                    std::invalid_argument);
}
