#include "cqed/correlation.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "cqed/master_equation.hpp"

namespace cqed {

namespace {

void check_grid(std::span<const double> tau_grid) {
    if (tau_grid.empty())
        throw std::invalid_argument("correlation: empty tau grid");
    if (!std::is_sorted(tau_grid.begin(), tau_grid.end()) || tau_grid.front() < 0.0)
        throw std::invalid_argument("correlation: tau grid must be sorted and >= 0");
}

// Regression theorem for <B^dag(0) B^dag B(tau) B(0)> / <B^dag B>^2.
CorrelationCurve regression_g2(const MatrixXc& l, const MatrixXc& lowering,
                               std::span<const double> tau_grid) {
    const StateMatrix rho = steady_state(l);
    const MatrixXc raising = lowering.adjoint();
    const MatrixXc number = raising * lowering;
    const double mean = expectation_real(number, rho.matrix());
    if (!(mean > 1e-300))
        throw VanishingIntensityError("g2: steady-state intensity vanishes");

    const MatrixXc seed = lowering * rho.matrix() * raising;
    const auto evolved = propagate_grid(l, vec(seed), tau_grid);

    CorrelationCurve curve;
    curve.tau.assign(tau_grid.begin(), tau_grid.end());
    curve.values.reserve(evolved.size());
    for (const VectorXc& v : evolved) {
        const double numerator = (number * unvec(v)).trace().real();
        curve.values.push_back(numerator / (mean * mean));
    }
    return curve;
}

} // namespace

double CorrelationCurve::at_zero() const {
    if (empty())
        throw std::logic_error("CorrelationCurve: empty");
    std::size_t best = 0;
    for (std::size_t k = 1; k < tau.size(); ++k)
        if (std::abs(tau[k]) < std::abs(tau[best]))
            best = k;
    return values[best];
}

TwoLevelDrive TwoLevelDrive::from(const SystemParams& p) {
    return TwoLevelDrive{.rabi = p.rabi(), .detuning = p.delta_a, .decay = p.Gamma()};
}

CorrelationCurve g2_cavity(const SystemParams& p, std::span<const double> tau_grid) {
    check_grid(tau_grid);
    p.validate();
    const OperatorSet ops = build_operators(p.hilbert());
    return regression_g2(liouvillian(p, ops), ops.a, tau_grid);
}

CorrelationCurve atom_g2(const TwoLevelDrive& drive, std::span<const double> tau_grid) {
    check_grid(tau_grid);
    if (!(drive.decay > 0.0))
        throw std::invalid_argument("atom_g2: decay must be positive");
    const MatrixXc sm = atom_lowering();
    const MatrixXc sp = sm.adjoint();
    const MatrixXc h = -drive.detuning * (sp * sm) + (drive.rabi / 2.0) * (sp + sm);
    const std::array<MatrixXc, 1> collapse{std::sqrt(drive.decay) * sm};
    return regression_g2(lindblad_superoperator(h, collapse), sm, tau_grid);
}

CorrelationCurve atom_g2(const SystemParams& p, std::span<const double> tau_grid) {
    if (p.g != 0.0)
        throw std::invalid_argument("atom_g2: expects g = 0");
    p.validate();
    return atom_g2(TwoLevelDrive::from(p), tau_grid);
}

std::vector<double> uniform_grid(double start, double stop, std::size_t count) {
    if (count < 2)
        throw std::invalid_argument("uniform_grid: need at least two points");
    std::vector<double> grid(count);
    const double step = (stop - start) / static_cast<double>(count - 1);
    for (std::size_t k = 0; k < count; ++k)
        grid[k] = start + step * static_cast<double>(k);
    grid.back() = stop;
    return grid;
}

} // namespace cqed
