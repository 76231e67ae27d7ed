#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cqed/detector.hpp"

using namespace cqed;
using namespace cqed::detector;

namespace {

constexpr double kSigmaPerFwhm = 0.42466090014400953;

CorrelationCurve gaussian_dip(double depth, double width, double tmax, std::size_t n) {
    CorrelationCurve c;
    c.tau = uniform_grid(0.0, tmax, n);
    for (double t : c.tau)
        c.values.push_back(1.0 - depth * std::exp(-0.5 * t * t / (width * width)));
    return c;
}

double trapezoid(const CorrelationCurve& c) {
    double area = 0.0;
    for (std::size_t k = 1; k < c.size(); ++k)
        area += 0.5 * (c.tau[k] - c.tau[k - 1]) * ((1.0 - c.values[k]) + (1.0 - c.values[k - 1]));
    return area;
}

} // namespace

TEST_CASE("mirroring to negative delays") {
    CorrelationCurve c;
    c.tau = {0.0, 1.0, 2.0};
    c.values = {0.0, 0.5, 0.9};
    const CorrelationCurve m = mirror_symmetric(c);
    CHECK(m.tau == std::vector<double>{-2.0, -1.0, 0.0, 1.0, 2.0});
    CHECK(m.values == std::vector<double>{0.9, 0.5, 0.0, 0.5, 0.9});
    CHECK(mirror_symmetric(m).tau == m.tau);

    c.tau = {0.5, 1.0};
    c.values = {0.2, 0.4};
    CHECK(mirror_symmetric(c).size() == 4);
}

TEST_CASE("zero jitter leaves the curve alone") {
    const CorrelationCurve c = gaussian_dip(1.0, 1e-9, 2e-8, 101);
    const CorrelationCurve out = convolve_jitter(c, DetectorModel{});
    CHECK(out.values == c.values);
    CHECK(out.convolved);
}

TEST_CASE("Gaussian dip convolved with Gaussian jitter") {
    const double width = 2e-9, fwhm = 3.2e-9, depth = 1.0;
    const double sj = fwhm * kSigmaPerFwhm;
    const CorrelationCurve c = gaussian_dip(depth, width, 40e-9, 4001);
    const CorrelationCurve out = convolve_jitter(c, DetectorModel{.jitter_fwhm = fwhm});
    const double s2 = width * width + sj * sj;
    for (std::size_t k = 0; k < out.size(); k += 97) {
        const double t = out.tau[k];
        const double expect = 1.0 - depth * width / std::sqrt(s2) * std::exp(-0.5 * t * t / s2);
        CHECK(std::abs(out.values[k] - expect) < 1e-4);
    }
    CHECK(out.at_zero() == doctest::Approx(1.0 - width / std::sqrt(s2)).epsilon(1e-4));
    CHECK(trapezoid(out) == doctest::Approx(trapezoid(mirror_symmetric(c))).epsilon(1e-6));
}

TEST_CASE("coarse grids are resampled to an eighth of the FWHM") {
    const double fwhm = 3.2e-9;
    const CorrelationCurve c = gaussian_dip(1.0, 3e-9, 30e-9, 16);
    const CorrelationCurve out = convolve_jitter(c, DetectorModel{.jitter_fwhm = fwhm});
    CHECK(out.tau.front() == doctest::Approx(-30e-9));
    CHECK(out.tau.back() == doctest::Approx(30e-9));
    for (std::size_t k = 1; k < out.size(); ++k)
        CHECK(out.tau[k] - out.tau[k - 1] <= fwhm / 8.0 * (1 + 1e-9));
    for (std::size_t k = 0; k < out.size(); ++k)
        CHECK(out.values[k] == doctest::Approx(out.values[out.size() - 1 - k]).epsilon(1e-12));
}

TEST_CASE("constant curves are invariant under jitter") {
    CorrelationCurve flat;
    flat.tau = uniform_grid(0.0, 1e-8, 201);
    flat.values.assign(201, 1.0);
    const CorrelationCurve out = convolve_jitter(flat, DetectorModel{.jitter_fwhm = 2e-9});
    for (double v : out.values)
        CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("dark-count floor against a Monte Carlo coincidence count") {
    // Perfect antibunching: each bin sends the signal to one detector only.
    const double signal = 200.0, dark = 3.0;
    std::mt19937_64 rng(42);
    std::bernoulli_distribution coin(0.5);
    std::poisson_distribution<int> noise(dark);
    const int bins = 400000;
    double n1 = 0, n2 = 0, n12 = 0;
    for (int b = 0; b < bins; ++b) {
        const bool first = coin(rng);
        const double a = (first ? 2.0 * signal : 0.0) + noise(rng);
        const double c = (first ? 0.0 : 2.0 * signal) + noise(rng);
        n1 += a;
        n2 += c;
        n12 += a * c;
    }
    const double measured = n12 * bins / (n1 * n2);
    const DetectorModel model{.dark_rate = dark, .signal_rate = signal};
    CHECK(measured == doctest::Approx(dark_count_floor(model)).epsilon(0.02));

    CorrelationCurve ideal;
    ideal.tau = {0.0, 1.0};
    ideal.values = {0.0, 1.0};
    const CorrelationCurve m = apply_dark_counts(ideal, model);
    CHECK(m.values[0] == doctest::Approx(dark_count_floor(model)));
    CHECK(m.values[1] == doctest::Approx(1.0));
}

TEST_CASE("floor of two percent") {
    const double r = 1.0 / std::sqrt(0.98) - 1.0;
    const DetectorModel model{.dark_rate = r * 1e5, .signal_rate = 1e5};
    CHECK(dark_count_floor(model) == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(dark_count_floor(DetectorModel{.signal_rate = 1.0}) == 0.0);
    CHECK_THROWS_AS(dark_count_floor(DetectorModel{}), std::domain_error);
    CHECK_THROWS_AS(DetectorModel{.dark_rate = -1.0}.validate(), std::invalid_argument);
}

TEST_CASE("escape fraction and fiber output") {
    CHECK(symmetric_escape(1000.0, 500.0) == doctest::Approx(1.0 / 3.0));
    CHECK(symmetric_escape(1000.0, 0.0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(symmetric_escape(0.0, 0.0), std::invalid_argument);
    CHECK(fiber_output_rate(1e6, 1.0, 1.0) == 1e6);
    CHECK(fiber_output_rate(2e6, 0.5, 0.3) == doctest::Approx(2.0 * fiber_output_rate(1e6, 0.5, 0.3)));
    CHECK(fiber_output_rate(1e6, 0.2, 0.5) == doctest::Approx(1e5));
    CHECK_THROWS_AS(fiber_output_rate(1e6, 1.5, 1.0), std::invalid_argument);
}
