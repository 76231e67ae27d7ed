#include "cqed/system.hpp"

#include <cmath>
#include <stdexcept>

namespace cqed {

double SystemParams::rabi() const { return Gamma() * std::sqrt(s / 2.0); }

double SystemParams::cooperativity() const {
    if (kappa <= 0.0 || gamma <= 0.0)
        throw std::domain_error("cooperativity: kappa and gamma must be positive");
    return g * g / (2.0 * kappa * gamma);
}

void SystemParams::validate() const {
    for (double v : {g, kappa, gamma, delta_a, delta_c, s})
        if (!std::isfinite(v))
            throw std::invalid_argument("SystemParams: non-finite value");
    if (g < 0.0 || kappa < 0.0 || gamma < 0.0)
        throw std::invalid_argument("SystemParams: g, kappa, gamma must be >= 0");
    if (s < 0.0)
        throw std::invalid_argument("SystemParams: saturation parameter must be >= 0");
    hilbert().validate();
}

} // namespace cqed
