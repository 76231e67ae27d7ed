// fitting.hpp: least-squares fits: Lorentzian line, local polynomial minimum, saturating loss

#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace cqed::fit {

struct FitResult {
    std::vector<std::string> names;
    Eigen::VectorXd params;
    Eigen::VectorXd std_errors; // from (J^T J)^-1 scaled by residual variance
    double residual_norm = 0.0; // weighted sum of squared residuals
    bool converged = false;
    int iterations = 0;
    std::string diagnostic;
    std::vector<double> cost_history; // cost after every accepted step, starting value first

    double operator[](std::string_view name) const;
    double error(std::string_view name) const;
};

struct LmOptions {
    double lambda0 = 1e-3;
    double lambda_factor = 10.0;
    int max_iterations = 1000;
    double gradient_tol = 1e-8; // converged when |J^T r| <= tol (1 + |theta|)
};

/// Fills f(x_i; theta) and the Jacobian d f / d theta for every sample.
using ModelFn = std::function<void(const Eigen::VectorXd& x, const Eigen::VectorXd& theta,
                                   Eigen::VectorXd& f, Eigen::MatrixXd& jacobian)>;

/// Damped Gauss-Newton with Marquardt diagonal scaling. lambda is divided by
/// lambda_factor on an accepted step and multiplied on a rejected one.
FitResult levenberg_marquardt(const ModelFn& model, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& y, const Eigen::VectorXd& weights,
                              Eigen::VectorXd theta0, std::vector<std::string> names,
                              const LmOptions& options = {});

/// y = A (w/2)^2 / ((x - x0)^2 + (w/2)^2) + B; parameters "A", "x0", "w", "B".
/// Empty weights means unit weights.
FitResult fit_lorentzian(std::span<const double> x, std::span<const double> y,
                         std::span<const double> weights = {}, const LmOptions& options = {});

double lorentzian(double x, double amplitude, double center, double width, double offset);

class NoMinimumError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PolyMinimum {
    double x_min = 0.0;
    double value = 0.0;
    FitResult fit; // coefficients "c0".."cN" of the polynomial in u = (x - center) / scale
    double center = 0.0;
    double scale = 1.0;
};

/// Least-squares polynomial on a window centred at the discrete minimum;
/// x_min is the derivative root inside the window nearest that minimum.
/// half_window = 0 takes the widest symmetric window the data allows.
PolyMinimum fit_poly_minimum(std::span<const double> x, std::span<const double> y, int degree,
                             std::size_t half_window = 0);

/// loss(t) = L0 + dL (1 - exp(-t / tau)); parameters "L0", "dL", "tau".
FitResult fit_exponential_loss(std::span<const double> t, std::span<const double> loss,
                               const LmOptions& options = {});

} // namespace cqed::fit
