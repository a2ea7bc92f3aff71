#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sakura/fixed_point.hpp"
#include "sakura/trig.hpp"

// Golden implementations of the locally-coupled Kuramoto drift: the direct
// pairwise form and the reformulated S/C form, in double precision and as a
// bit-exact fixed-point functional model.

namespace sakura {

struct DriftParams {
    double k = 1.0;        // local coupling strength
    double k_ref = 0.0;    // reference gain
    double psi_ref = 0.0;  // reference phase in [-pi, pi)
    int m = 5;             // odd neighborhood side length

    int neighborhood_count() const { return m * m; }
    void validate() const;
};

enum class BoundaryMode { replicate, reflect, wrap, zero_phase };

BoundaryMode boundary_from_string(const std::string& name);
std::string to_string(BoundaryMode mode);

// Phase sample with out-of-image coordinates resolved by the boundary mode.
// zero_phase substitutes theta = 0 (sin 0, cos 1) outside the image.
PhaseQ15 sample_phase(const PhaseMap& map, int x, int y, BoundaryMode mode);

// Real-valued drift field, same dimensions as the source map.
struct DriftField {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    double& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    double at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
};

// Per-step scalar coefficients quantized to Q1.15: K/M^2 and the two
// reference-term products, loaded once per sampling step.
struct QuantizedDriftParams {
    int16_t k_over_m2 = 0;
    int16_t kref_sin_psi = 0;
    int16_t kref_cos_psi = 0;
    int m = 5;

    static QuantizedDriftParams from(const DriftParams& params);
};

// Fixed-point drift evaluation result: Q8.24 drift values plus the captured
// center sin/cos per pixel and sticky saturation accounting.
struct FixedDriftField {
    int width = 0;
    int height = 0;
    std::vector<AccQ824> data;
    std::vector<PhaseQ15> center_sin;
    std::vector<PhaseQ15> center_cos;
    SatTracker sat;

    AccQ824 at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
};

// Direct pairwise evaluation of the deterministic drift,
//   (K/M^2) * sum_j sin(theta_j - theta_i) + K_ref * sin(psi_ref - theta_i),
// in double precision. The j = i term contributes exactly zero.
DriftField drift_direct(const PhaseMap& map, const DriftParams& params, BoundaryMode boundary);

// Neighborhood accumulations S_i = sum sin(theta_j), C_i = sum cos(theta_j)
// over the M x M window around pixel (x, y), center excluded.
std::pair<double, double> neighbor_sums(const PhaseMap& map, int x, int y, int m,
                                        BoundaryMode boundary);

// Unscaled neighborhood core cos_i * S - sin_i * C.
inline double nbr_core(double s, double c, double sin_i, double cos_i) {
    return cos_i * s - sin_i * c;
}

// Reference-attraction term K_ref * (sin(psi) cos_i - cos(psi) sin_i)
// == K_ref * sin(psi - theta_i).
inline double ref_term(double sin_i, double cos_i, double k_ref, double psi_ref) {
    return k_ref * (std::sin(psi_ref) * cos_i - std::cos(psi_ref) * sin_i);
}

// S/C-form evaluation; algebraically identical to drift_direct but computed
// through a separate code path.
DriftField drift_reformulated(const PhaseMap& map, const DriftParams& params,
                              BoundaryMode boundary);

// Bit-exact fixed-point evaluation using the quarter-wave LUT, Q8.24
// accumulation and the quantized per-step coefficients. The systolic
// simulator must reproduce this output raw-for-raw.
FixedDriftField drift_fixed(const PhaseMap& map, const QuantizedDriftParams& params_q,
                            BoundaryMode boundary, const QuarterWaveLut& lut);

}  // namespace sakura
