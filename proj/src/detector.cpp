#include "cqed/detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cqed::detector {

namespace {

constexpr double kFwhmToSigma = 0.42466090014400953; // 1 / (2 sqrt(2 ln 2))

bool is_uniform(const std::vector<double>& t, double spacing) {
    for (std::size_t k = 1; k < t.size(); ++k)
        if (std::abs((t[k] - t[k - 1]) - spacing) > 1e-9 * spacing)
            return false;
    return true;
}

double interpolate(const CorrelationCurve& c, double x) {
    const auto it = std::lower_bound(c.tau.begin(), c.tau.end(), x);
    if (it == c.tau.begin())
        return c.values.front();
    if (it == c.tau.end())
        return c.values.back();
    const auto k = static_cast<std::size_t>(it - c.tau.begin());
    const double t0 = c.tau[k - 1], t1 = c.tau[k];
    const double w = (x - t0) / (t1 - t0);
    return (1.0 - w) * c.values[k - 1] + w * c.values[k];
}

} // namespace

void DetectorModel::validate() const {
    if (!(jitter_fwhm >= 0.0) || !(dark_rate >= 0.0) || !(signal_rate >= 0.0))
        throw std::invalid_argument("DetectorModel: jitter and rates must be >= 0");
}

CorrelationCurve mirror_symmetric(const CorrelationCurve& curve) {
    if (curve.empty())
        throw std::invalid_argument("mirror_symmetric: empty curve");
    if (curve.tau.size() != curve.values.size())
        throw std::invalid_argument("mirror_symmetric: tau/value length mismatch");
    if (curve.tau.front() < 0.0)
        return curve;

    CorrelationCurve out;
    out.convolved = curve.convolved;
    const std::size_t n = curve.size();
    const std::size_t skip = curve.tau.front() == 0.0 ? 1 : 0;
    for (std::size_t k = n; k-- > skip;) {
        out.tau.push_back(-curve.tau[k]);
        out.values.push_back(curve.values[k]);
    }
    out.tau.insert(out.tau.end(), curve.tau.begin(), curve.tau.end());
    out.values.insert(out.values.end(), curve.values.begin(), curve.values.end());
    return out;
}

CorrelationCurve convolve_jitter(const CorrelationCurve& curve, const DetectorModel& model) {
    model.validate();
    if (curve.empty())
        throw std::invalid_argument("convolve_jitter: empty curve");
    if (model.jitter_fwhm == 0.0) {
        CorrelationCurve same = curve;
        same.convolved = true;
        return same;
    }

    const CorrelationCurve full = mirror_symmetric(curve);
    const double max_spacing = model.jitter_fwhm / 8.0;

    CorrelationCurve grid;
    const double span = full.tau.back() - full.tau.front();
    const double native = full.size() > 1 ? span / static_cast<double>(full.size() - 1) : 0.0;
    if (full.size() > 1 && native <= max_spacing && is_uniform(full.tau, native)) {
        grid = full;
    } else {
        const double h = full.size() > 1 ? std::min(native, max_spacing) : max_spacing;
        const auto steps = static_cast<std::size_t>(std::ceil(span / h - 1e-9));
        const double start = full.tau.front();
        const double step = steps == 0 ? h : span / static_cast<double>(steps);
        for (std::size_t k = 0; k <= steps; ++k) {
            const double x = start + step * static_cast<double>(k);
            grid.tau.push_back(x);
            grid.values.push_back(interpolate(full, x));
        }
    }

    const std::size_t n = grid.size();
    const double h = n > 1 ? (grid.tau.back() - grid.tau.front()) / static_cast<double>(n - 1)
                           : max_spacing;
    const double sigma = model.jitter_fwhm * kFwhmToSigma;
    const auto half = static_cast<std::ptrdiff_t>(std::ceil(5.0 * sigma / h));

    std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
    double mass = 0.0;
    for (std::ptrdiff_t j = -half; j <= half; ++j) {
        const double x = static_cast<double>(j) * h;
        const double w = std::exp(-0.5 * x * x / (sigma * sigma));
        kernel[static_cast<std::size_t>(j + half)] = w;
        mass += w;
    }
    for (double& w : kernel)
        w /= mass;

    CorrelationCurve out;
    out.tau = grid.tau;
    out.values.resize(n);
    out.convolved = true;
    const auto count = static_cast<std::ptrdiff_t>(n);
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        double acc = 0.0;
        for (std::ptrdiff_t j = -half; j <= half; ++j) {
            const std::ptrdiff_t src = i - j;
            const double v = (src < 0 || src >= count) ? 1.0 : grid.values[static_cast<std::size_t>(src)];
            acc += kernel[static_cast<std::size_t>(j + half)] * v;
        }
        out.values[static_cast<std::size_t>(i)] = std::max(0.0, acc);
    }
    return out;
}

double dark_count_floor(const DetectorModel& model) {
    model.validate();
    if (!(model.signal_rate > 0.0))
        throw std::domain_error("dark_count_floor: signal rate must be > 0");
    const double r = model.dark_rate / model.signal_rate;
    return (2.0 * r + r * r) / ((1.0 + r) * (1.0 + r));
}

CorrelationCurve apply_dark_counts(const CorrelationCurve& curve, const DetectorModel& model) {
    const double floor = dark_count_floor(model);
    const double r = model.dark_rate / model.signal_rate;
    const double scale = 1.0 / ((1.0 + r) * (1.0 + r));
    CorrelationCurve out = curve;
    for (double& v : out.values)
        v = v * scale + floor;
    return out;
}

double symmetric_escape(double transmission_ppm, double loss_ppm) {
    if (transmission_ppm < 0.0 || loss_ppm < 0.0 || transmission_ppm + loss_ppm <= 0.0)
        throw std::invalid_argument("symmetric_escape: invalid mirror budget");
    return transmission_ppm / (2.0 * (transmission_ppm + loss_ppm));
}

double fiber_output_rate(double p_cavity, double escape, double eta_fiber) {
    if (!(escape >= 0.0 && escape <= 1.0) || !(eta_fiber >= 0.0 && eta_fiber <= 1.0))
        throw std::invalid_argument("fiber_output_rate: probabilities must lie in [0, 1]");
    if (p_cavity < 0.0)
        throw std::invalid_argument("fiber_output_rate: negative rate");
    return p_cavity * escape * eta_fiber;
}

} // namespace cqed::detector
