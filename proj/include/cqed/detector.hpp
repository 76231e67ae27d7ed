// detector.hpp: detector-space observables: timing jitter, dark-count floor, fiber output rate

#pragma once

#include "cqed/correlation.hpp"

namespace cqed::detector {

struct DetectorModel {
    double jitter_fwhm = 0.0; // s
    double dark_rate = 0.0;   // counts/s per detector
    double signal_rate = 0.0; // signal counts/s per detector

    void validate() const;
};

/// Extends a curve sampled on tau >= 0 to negative delays using g2(-tau) = g2(tau).
/// Curves that already contain negative delays are returned unchanged.
CorrelationCurve mirror_symmetric(const CorrelationCurve& curve);

/// Convolves with a unit-mass Gaussian of the model's FWHM, truncated at +-5 sigma.
///
/// The curve is mirrored to negative tau, resampled onto a uniform grid with
/// spacing <= FWHM/8 when needed, and extended with the value 1 beyond its ends.
/// The result lives on that uniform, symmetric grid.
CorrelationCurve convolve_jitter(const CorrelationCurve& curve, const DetectorModel& model);

/// Accidental-coincidence contribution to g2(0) from uncorrelated dark counts.
///
/// With per-detector signal S and dark rate d, r = d/S, the measured correlation is
///   g2_meas = [S^2 g2 + 2 S d + d^2] / (S + d)^2 = g2 / (1 + r)^2 + (2r + r^2) / (1 + r)^2,
/// so the floor at g2 = 0 is (2r + r^2)/(1 + r)^2 = 2r (1 + O(r)).
double dark_count_floor(const DetectorModel& model);

/// Applies the uncorrelated background to every sample of a curve.
CorrelationCurve apply_dark_counts(const CorrelationCurve& curve, const DetectorModel& model);

/// Fraction of intracavity decay leaving through the detected mirror of a
/// symmetric cavity: T / (2 (T + L)).
double symmetric_escape(double transmission_ppm, double loss_ppm);

double fiber_output_rate(double p_cavity, double escape, double eta_fiber);

} // namespace cqed::detector
