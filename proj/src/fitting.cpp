#include "cqed/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cqed::fit {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Sorted {
    VectorXd x;
    VectorXd y;
    VectorXd w;
};

Sorted sort_samples(std::span<const double> x, std::span<const double> y,
                    std::span<const double> weights) {
    if (x.size() != y.size())
        throw std::invalid_argument("fit: x and y lengths differ");
    if (!weights.empty() && weights.size() != x.size())
        throw std::invalid_argument("fit: weights length differs from data");
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

    Sorted s{VectorXd(x.size()), VectorXd(x.size()), VectorXd::Ones(x.size())};
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        s.x(i) = x[order[k]];
        s.y(i) = y[order[k]];
        if (!weights.empty()) {
            if (!(weights[order[k]] >= 0.0))
                throw std::invalid_argument("fit: weights must be >= 0");
            s.w(i) = weights[order[k]];
        }
    }
    if (!s.x.allFinite() || !s.y.allFinite())
        throw std::invalid_argument("fit: non-finite sample");
    return s;
}

// Maps normalised parameters back: theta = scale .* theta_n + shift.
void denormalise(FitResult& r, const VectorXd& scale, const VectorXd& shift) {
    r.params = r.params.cwiseProduct(scale) + shift;
    r.std_errors = r.std_errors.cwiseProduct(scale.cwiseAbs());
}

FitResult degenerate(std::vector<std::string> names, std::string why) {
    FitResult r;
    r.params = VectorXd::Constant(static_cast<Eigen::Index>(names.size()), std::nan(""));
    r.std_errors = r.params;
    r.names = std::move(names);
    r.converged = false;
    r.diagnostic = std::move(why);
    return r;
}

void lorentzian_model(const VectorXd& x, const VectorXd& th, VectorXd& f, MatrixXd& j) {
    const double amp = th(0), x0 = th(1), h = 0.5 * th(2), off = th(3);
    f.resize(x.size());
    j.resize(x.size(), 4);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double dx = x(i) - x0;
        const double d = dx * dx + h * h;
        const double shape = h * h / d;
        f(i) = amp * shape + off;
        j(i, 0) = shape;
        j(i, 1) = amp * 2.0 * h * h * dx / (d * d);
        j(i, 2) = amp * h * dx * dx / (d * d);
        j(i, 3) = 1.0;
    }
}

void loss_model(const VectorXd& t, const VectorXd& th, VectorXd& f, MatrixXd& j) {
    const double l0 = th(0), dl = th(1), tau = th(2);
    f.resize(t.size());
    j.resize(t.size(), 3);
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        const double e = std::exp(-t(i) / tau);
        f(i) = l0 + dl * (1.0 - e);
        j(i, 0) = 1.0;
        j(i, 1) = 1.0 - e;
        j(i, 2) = -dl * e * t(i) / (tau * tau);
    }
}

double poly_eval(const VectorXd& c, double u) {
    double v = 0.0;
    for (Eigen::Index k = c.size(); k-- > 0;)
        v = v * u + c(k);
    return v;
}

VectorXd poly_derivative(const VectorXd& c) {
    VectorXd d(std::max<Eigen::Index>(c.size() - 1, 1));
    d.setZero();
    for (Eigen::Index k = 1; k < c.size(); ++k)
        d(k - 1) = static_cast<double>(k) * c(k);
    return d;
}

// Real roots of a polynomial with coefficients in ascending order.
std::vector<double> real_roots(const VectorXd& c) {
    Eigen::Index deg = c.size() - 1;
    while (deg > 0 && c(deg) == 0.0)
        --deg;
    if (deg < 1)
        return {};
    if (deg == 1)
        return {-c(0) / c(1)};
    MatrixXd companion = MatrixXd::Zero(deg, deg);
    companion.block(1, 0, deg - 1, deg - 1).setIdentity();
    for (Eigen::Index k = 0; k < deg; ++k)
        companion(k, deg - 1) = -c(k) / c(deg);
    Eigen::EigenSolver<MatrixXd> es(companion, false);
    std::vector<double> roots;
    for (const auto& z : es.eigenvalues())
        if (std::abs(z.imag()) <= 1e-7 * (1.0 + std::abs(z.real())))
            roots.push_back(z.real());
    return roots;
}

} // namespace

double FitResult::operator[](std::string_view name) const {
    for (std::size_t k = 0; k < names.size(); ++k)
        if (names[k] == name)
            return params(static_cast<Eigen::Index>(k));
    throw std::out_of_range("FitResult: no parameter " + std::string(name));
}

double FitResult::error(std::string_view name) const {
    for (std::size_t k = 0; k < names.size(); ++k)
        if (names[k] == name)
            return std_errors(static_cast<Eigen::Index>(k));
    throw std::out_of_range("FitResult: no parameter " + std::string(name));
}

FitResult levenberg_marquardt(const ModelFn& model, const VectorXd& x, const VectorXd& y,
                              const VectorXd& weights, VectorXd theta0,
                              std::vector<std::string> names, const LmOptions& options) {
    const Eigen::Index n = x.size();
    const Eigen::Index p = theta0.size();
    if (y.size() != n || weights.size() != n)
        throw std::invalid_argument("levenberg_marquardt: data length mismatch");
    if (static_cast<Eigen::Index>(names.size()) != p)
        throw std::invalid_argument("levenberg_marquardt: parameter name count mismatch");
    if (n < p)
        throw std::invalid_argument("levenberg_marquardt: fewer samples than parameters");

    const VectorXd sw = weights.cwiseSqrt();
    VectorXd f;
    MatrixXd jac;
    auto evaluate = [&](const VectorXd& th, VectorXd& r, MatrixXd& j) {
        model(x, th, f, jac);
        r = sw.cwiseProduct(f - y);
        j = sw.asDiagonal() * jac;
        return r.squaredNorm();
    };

    FitResult out;
    out.names = std::move(names);
    VectorXd theta = std::move(theta0);
    VectorXd r;
    MatrixXd j;
    double cost = evaluate(theta, r, j);
    if (!std::isfinite(cost))
        throw std::invalid_argument("levenberg_marquardt: model not finite at initial guess");
    out.cost_history.push_back(cost);

    double lambda = options.lambda0;
    bool stalled = false;
    int it = 0;
    for (; it < options.max_iterations && !stalled; ++it) {
        const VectorXd grad = j.transpose() * r;
        if (grad.norm() <= options.gradient_tol * (1.0 + theta.norm())) {
            out.converged = true;
            break;
        }
        const MatrixXd jtj = j.transpose() * j;
        bool accepted = false;
        while (!accepted && lambda < 1e20) {
            MatrixXd a = jtj;
            for (Eigen::Index k = 0; k < p; ++k)
                a(k, k) += lambda * std::max(jtj(k, k), 1e-12);
            const VectorXd step = a.ldlt().solve(-grad);
            const VectorXd trial = theta + step;
            VectorXd r_trial;
            MatrixXd j_trial;
            const double trial_cost = evaluate(trial, r_trial, j_trial);
            if (std::isfinite(trial_cost) && trial_cost < cost) {
                theta = trial;
                r = std::move(r_trial);
                j = std::move(j_trial);
                stalled = cost - trial_cost <= 1e-15 * cost &&
                          step.norm() <= 1e-14 * (1.0 + theta.norm());
                cost = trial_cost;
                out.cost_history.push_back(cost);
                lambda /= options.lambda_factor;
                accepted = true;
            } else {
                lambda *= options.lambda_factor;
            }
        }
        if (!accepted)
            break;
    }
    out.iterations = it;

    if (!out.converged) {
        const VectorXd grad = j.transpose() * r;
        out.converged = grad.norm() <= options.gradient_tol * (1.0 + theta.norm());
        if (!out.converged)
            out.diagnostic = "gradient norm " + std::to_string(grad.norm()) +
                             " above tolerance after " + std::to_string(out.iterations) +
                             " iterations";
    }

    out.params = theta;
    out.residual_norm = cost;
    const double dof = static_cast<double>(std::max<Eigen::Index>(n - p, 1));
    const MatrixXd jtj = j.transpose() * j;
    Eigen::FullPivLU<MatrixXd> lu(jtj);
    if (lu.isInvertible()) {
        const MatrixXd cov = lu.inverse() * (cost / dof);
        out.std_errors = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    } else {
        out.std_errors = VectorXd::Constant(p, std::numeric_limits<double>::infinity());
        if (out.diagnostic.empty())
            out.diagnostic = "singular normal matrix: parameters not identifiable";
        out.converged = false;
    }
    return out;
}

double lorentzian(double x, double amplitude, double center, double width, double offset) {
    const double h = 0.5 * width;
    const double dx = x - center;
    return amplitude * h * h / (dx * dx + h * h) + offset;
}

FitResult fit_lorentzian(std::span<const double> x, std::span<const double> y,
                         std::span<const double> weights, const LmOptions& options) {
    std::vector<std::string> names{"A", "x0", "w", "B"};
    if (x.size() < 5)
        throw std::invalid_argument("fit_lorentzian: need at least 5 points");
    const Sorted s = sort_samples(x, y, weights);
    const Eigen::Index n = s.x.size();

    const double ymin = s.y.minCoeff(), ymax = s.y.maxCoeff();
    const double xmin = s.x(0), xmax = s.x(n - 1);
    if (ymax - ymin <= 1e-14 * std::max(std::abs(ymax), 1e-300) || ymax == ymin)
        return degenerate(names, "degenerate data: constant y, no line to fit");
    if (xmax == xmin)
        return degenerate(names, "degenerate data: all x identical");

    // Standardise: u = (x - cx)/sx, v = (y - cy)/sy.
    const double cx = 0.5 * (xmin + xmax), sx = 0.5 * (xmax - xmin);
    const double cy = ymin, sy = ymax - ymin;
    const VectorXd u = (s.x.array() - cx) / sx;
    const VectorXd v = (s.y.array() - cy) / sy;

    // Initial guess from the weighted samples: baseline from the end points,
    // centre at the extremum, width from the half-maximum crossings.
    std::vector<Eigen::Index> kept;
    for (Eigen::Index i = 0; i < n; ++i)
        if (s.w(i) > 0.0)
            kept.push_back(i);
    if (kept.size() < 5)
        throw std::invalid_argument("fit_lorentzian: need at least 5 points with positive weight");
    const auto m = static_cast<Eigen::Index>(kept.size());
    VectorXd gu(m), gv(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        gu(k) = u(kept[static_cast<std::size_t>(k)]);
        gv(k) = v(kept[static_cast<std::size_t>(k)]);
    }
    const double base = 0.5 * (gv(0) + gv(m - 1));
    Eigen::Index imax, imin;
    const double vmax = gv.maxCoeff(&imax), vmin = gv.minCoeff(&imin);
    const bool peak = vmax - base >= base - vmin;
    const Eigen::Index ic = peak ? imax : imin;
    const double amp = (peak ? vmax : vmin) - base;
    const double half = base + 0.5 * amp;
    auto beyond_half = [&](Eigen::Index i) { return peak ? gv(i) < half : gv(i) > half; };
    auto crossing = [&](Eigen::Index inner, Eigen::Index outer) {
        const double t = (gv(inner) - half) / (gv(inner) - gv(outer));
        return gu(inner) + t * (gu(outer) - gu(inner));
    };
    double left = gu(0), right = gu(m - 1);
    for (Eigen::Index i = ic; i > 0; --i)
        if (beyond_half(i - 1)) {
            left = crossing(i, i - 1);
            break;
        }
    for (Eigen::Index i = ic; i + 1 < m; ++i)
        if (beyond_half(i + 1)) {
            right = crossing(i, i + 1);
            break;
        }
    double width = right - left;
    if (!(width > 0.0))
        width = 0.5 * (gu(m - 1) - gu(0));

    VectorXd theta0(4);
    theta0 << amp, gu(ic), width, base;
    FitResult r = levenberg_marquardt(lorentzian_model, u, v, s.w, theta0, names, options);

    VectorXd scale(4), shift(4);
    scale << sy, sx, sx, sy;
    shift << 0.0, cx, 0.0, cy;
    r.params(2) = std::abs(r.params(2));
    denormalise(r, scale, shift);
    return r;
}

PolyMinimum fit_poly_minimum(std::span<const double> x, std::span<const double> y, int degree,
                             std::size_t half_window) {
    if (degree < 2 || degree > 6)
        throw std::invalid_argument("fit_poly_minimum: degree must lie in [2, 6]");
    if (x.size() < static_cast<std::size_t>(degree + 2))
        throw std::invalid_argument("fit_poly_minimum: need at least degree + 2 points");
    const Sorted s = sort_samples(x, y, {});
    const Eigen::Index n = s.x.size();

    Eigen::Index k;
    s.y.minCoeff(&k);
    if (k == 0 || k == n - 1)
        throw NoMinimumError("fit_poly_minimum: discrete minimum at the window edge");

    Eigen::Index half = std::min(k, n - 1 - k);
    if (half_window > 0)
        half = std::min<Eigen::Index>(half, static_cast<Eigen::Index>(half_window));
    const Eigen::Index len = 2 * half + 1;
    if (len < degree + 2)
        throw NoMinimumError("fit_poly_minimum: window around the minimum holds fewer than "
                             "degree + 2 points");

    const Eigen::Index first = k - half;
    const double center = s.x(k);
    const double scale = std::max(std::abs(s.x(first) - center), std::abs(s.x(first + len - 1) - center));
    const VectorXd u = (s.x.segment(first, len).array() - center) / scale;
    const VectorXd v = s.y.segment(first, len);

    MatrixXd vander(len, degree + 1);
    for (Eigen::Index i = 0; i < len; ++i) {
        double pw = 1.0;
        for (int d = 0; d <= degree; ++d) {
            vander(i, d) = pw;
            pw *= u(i);
        }
    }
    Eigen::ColPivHouseholderQR<MatrixXd> qr(vander);
    const VectorXd coef = qr.solve(v);

    PolyMinimum out;
    out.center = center;
    out.scale = scale;
    FitResult& fr = out.fit;
    for (int d = 0; d <= degree; ++d)
        fr.names.push_back("c" + std::to_string(d));
    fr.params = coef;
    fr.residual_norm = (vander * coef - v).squaredNorm();
    fr.converged = qr.rank() == degree + 1;
    fr.iterations = 1;
    fr.cost_history = {fr.residual_norm};
    const double dof = static_cast<double>(std::max<Eigen::Index>(len - degree - 1, 1));
    const MatrixXd vtv = vander.transpose() * vander;
    fr.std_errors = (vtv.inverse().diagonal() * (fr.residual_norm / dof)).cwiseMax(0.0).cwiseSqrt();
    if (!fr.converged)
        throw NoMinimumError("fit_poly_minimum: rank-deficient design matrix");

    const VectorXd d1 = poly_derivative(coef);
    const VectorXd d2 = poly_derivative(d1);
    double best = std::numeric_limits<double>::infinity();
    bool found = false;
    for (double root : real_roots(d1)) {
        // Newton polish on p'(u).
        for (int iter = 0; iter < 5; ++iter) {
            const double slope = poly_eval(d2, root);
            if (slope == 0.0)
                break;
            root -= poly_eval(d1, root) / slope;
        }
        if (std::abs(root) > 1.0 || !(poly_eval(d2, root) > 0.0))
            continue;
        if (std::abs(root) < std::abs(best)) {
            best = root;
            found = true;
        }
    }
    if (!found)
        throw NoMinimumError("fit_poly_minimum: no interior minimum of the fitted polynomial");

    out.x_min = center + best * scale;
    out.value = poly_eval(coef, best);
    return out;
}

FitResult fit_exponential_loss(std::span<const double> t, std::span<const double> loss,
                               const LmOptions& options) {
    std::vector<std::string> names{"L0", "dL", "tau"};
    if (t.size() < 4)
        throw std::invalid_argument("fit_exponential_loss: need at least 4 points");
    for (double v : t)
        if (v < 0.0)
            throw std::invalid_argument("fit_exponential_loss: times must be >= 0");
    const Sorted s = sort_samples(t, loss, {});
    const Eigen::Index n = s.x.size();

    const double st = s.x(n - 1);
    const double ymin = s.y.minCoeff(), ymax = s.y.maxCoeff();
    if (!(st > 0.0))
        return degenerate(names, "degenerate data: zero time span");
    if (ymax - ymin <= 1e-14 * std::max(std::abs(ymax), 1e-300) || ymax == ymin)
        return degenerate(names, "dL = 0: time constant unidentifiable");

    const double cy = ymin, sy = ymax - ymin;
    const VectorXd u = s.x / st;
    const VectorXd v = (s.y.array() - cy) / sy;

    // Initial tau from a log grid with (L0, dL) solved linearly at each node.
    double best_cost = std::numeric_limits<double>::infinity();
    VectorXd theta0(3);
    for (int k = 0; k <= 80; ++k) {
        const double tau = std::pow(10.0, -2.0 + 4.0 * k / 80.0);
        MatrixXd a(n, 2);
        a.col(0).setOnes();
        a.col(1) = (1.0 - (-u.array() / tau).exp()).matrix();
        const Eigen::Vector2d lin = a.colPivHouseholderQr().solve(v);
        const double c = (a * lin - v).squaredNorm();
        if (c < best_cost) {
            best_cost = c;
            theta0 << lin(0), lin(1), tau;
        }
    }

    FitResult r = levenberg_marquardt(loss_model, u, v, VectorXd::Ones(n), theta0, names, options);
    if (r.params(2) <= 0.0) {
        r.converged = false;
        r.diagnostic = "non-physical time constant";
    } else if (r.params(2) > 1e3) {
        r.converged = false;
        r.diagnostic = "time constant far beyond the sampled span: unidentifiable";
    } else if (std::abs(r.params(1)) < 1e-9) {
        r.converged = false;
        r.diagnostic = "dL ~ 0: time constant unidentifiable";
    }

    VectorXd scale(3), shift(3);
    scale << sy, sy, st;
    shift << cy, 0.0, 0.0;
    denormalise(r, scale, shift);
    return r;
}

} // namespace cqed::fit
