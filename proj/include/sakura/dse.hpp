#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sakura/systolic.hpp"

// Analytical design-space exploration: closed-form cycle/throughput/energy
// models, bilinear power/area models with least-squares fitting, optimal
// width, Pareto extraction and baseline ratios.

namespace sakura {
namespace dse {

// Bilinear cost model coefficients: cost = c_hw*Nh*Nw + c_w*Nw + c_h*Nh + c_fixed.
struct ModelCoefficients {
    double p_hw = 0.0;
    double p_w = 0.0;
    double p_h = 0.0;
    double p_fixed = 0.0;

    bool all_non_negative() const {
        return p_hw >= 0.0 && p_w >= 0.0 && p_h >= 0.0 && p_fixed >= 0.0;
    }
};

struct MeasurementSample {
    int nh = 0;
    int nw = 0;
    double power_w = 0.0;
    double area_um2 = 0.0;
    std::optional<double> sys_latency_s;
    std::optional<double> sys_power_w;

    void validate() const;
};

struct SweepRecord {
    int nh = 0;
    int nw = 0;
    int ctile = 0;
    double cycles_per_px = 0.0;
    double throughput_px = 0.0;
    double power_w = 0.0;
    double area_um2 = 0.0;
    double epx_j = 0.0;
    std::optional<double> sys_epx_j;
    bool frontier = false;
};

// Steady-state cycles per tile, N_w + M^2 + 1.
int cycles_per_tile(int nw, int m);

// Pixel throughput f_clk*Nh*Nw/(Nw+M^2+1) and cycles per output pixel.
double throughput_px(const ArrayConfig& config);
double cycles_per_px(const ArrayConfig& config);

double power_total(const ModelCoefficients& coeffs, int nh, int nw);
double area_total(const ModelCoefficients& coeffs, int nh, int nw);

// Energy per output pixel in the expanded separable form; algebraically
// equal to P_total * C_tile / (Nh * Nw * f_clk).
double energy_px(const ModelCoefficients& power, const ArrayConfig& config);

// Energy-optimal array width for a given height,
//   sqrt((M^2+1) * (p_h + p_fixed/Nh) / (p_hw + p_w/Nh)).
// Throws when the denominator is zero (width preference unbounded).
double optimal_width(const ModelCoefficients& power, int nh, int m);

// Ordinary least squares over the basis {Nh*Nw, Nw, Nh, 1}. Returns the
// coefficients and R^2. Requires >= 4 samples with a full-rank design.
enum class FitTarget { power, area };
std::pair<ModelCoefficients, double> fit_bilinear(const std::vector<MeasurementSample>& samples,
                                                  FitTarget target);

// Marks the non-dominated (area, E_px) records in place and returns, for
// each budget, the index of the minimum-E_px record with area <= budget
// (nullopt when no config fits). Ties break toward smaller area, then
// smaller N_w.
std::vector<std::optional<size_t>> pareto_frontier(std::vector<SweepRecord>& records,
                                                   const std::vector<double>& budgets);

struct BaselineRatios {
    double speedup = 0.0;       // lat_a / lat_b
    double energy_ratio = 0.0;  // (lat_a*pow_a) / (lat_b*pow_b)
    double power_ratio = 0.0;   // pow_b / pow_a
};

BaselineRatios baseline_ratios(double lat_a_s, double pow_a_w, double lat_b_s, double pow_b_w);

// System-level energy per pixel: latency * power / pixels.
double system_epx(double latency_s, double power_w, double pixels);

// Evaluate the full sweep over a set of configs from fitted or supplied
// coefficients; sys_pixels scales the optional measurement-driven overlay.
struct SweepInputs {
    ModelCoefficients power;
    ModelCoefficients area;
    std::vector<MeasurementSample> overlay;  // optional per-config system rows
    double sys_pixels = 9216.0;
};

std::vector<SweepRecord> evaluate_sweep(const std::vector<ArrayConfig>& configs,
                                        const SweepInputs& inputs, int jobs = 1);

// Synthetic coefficient set shipped with the repository. Calibrated to
// plausible magnitudes only; not measured data.
ModelCoefficients synthetic_power_coefficients();
ModelCoefficients synthetic_area_coefficients();

}  // namespace dse
}  // namespace sakura
