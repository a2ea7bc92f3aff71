#include "sakura/dse.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace sakura {
namespace dse {

void MeasurementSample::validate() const {
    if (nh < 1 || nw < 1) throw std::invalid_argument("measurement: N_h and N_w must be >= 1");
    if (!(power_w > 0.0) || !(area_um2 > 0.0)) {
        throw std::invalid_argument("measurement: power and area must be > 0");
    }
    if (sys_latency_s.has_value() != sys_power_w.has_value()) {
        throw std::invalid_argument("measurement: system latency and power must come together");
    }
    if (sys_latency_s && (!(*sys_latency_s > 0.0) || !(*sys_power_w > 0.0))) {
        throw std::invalid_argument("measurement: system overlay values must be > 0");
    }
}

int cycles_per_tile(int nw, int m) {
    if (nw < 1) throw std::invalid_argument("cycles_per_tile: N_w must be >= 1");
    if (m < 3 || m % 2 == 0) throw std::invalid_argument("cycles_per_tile: M must be odd and >= 3");
    return nw + m * m + 1;
}

double throughput_px(const ArrayConfig& config) {
    config.validate();
    return config.fclk_hz * config.nh * config.nw / cycles_per_tile(config.nw, config.m);
}

double cycles_per_px(const ArrayConfig& config) {
    config.validate();
    return static_cast<double>(cycles_per_tile(config.nw, config.m))
           / (static_cast<double>(config.nh) * config.nw);
}

double power_total(const ModelCoefficients& c, int nh, int nw) {
    return c.p_hw * nh * nw + c.p_w * nw + c.p_h * nh + c.p_fixed;
}

double area_total(const ModelCoefficients& c, int nh, int nw) {
    return power_total(c, nh, nw);  // same separable form
}

double energy_px(const ModelCoefficients& power, const ArrayConfig& config) {
    config.validate();
    double ctile = cycles_per_tile(config.nw, config.m);
    return ctile / config.fclk_hz
           * (power.p_hw + power.p_w / config.nh + power.p_h / config.nw
              + power.p_fixed / (static_cast<double>(config.nh) * config.nw));
}

double optimal_width(const ModelCoefficients& power, int nh, int m) {
    if (nh < 1) throw std::invalid_argument("optimal_width: N_h must be >= 1");
    if (m < 3 || m % 2 == 0) throw std::invalid_argument("optimal_width: M must be odd and >= 3");
    double den = power.p_hw + power.p_w / nh;
    if (!(den > 0.0)) {
        throw std::domain_error("optimal_width: zero denominator, width preference unbounded");
    }
    double num = power.p_h + power.p_fixed / nh;
    return std::sqrt((m * m + 1) * num / den);
}

namespace {

// Solve the 4x4 normal equations by Gaussian elimination with partial
// pivoting. The grid designs used here are well conditioned.
std::array<double, 4> solve4(std::array<std::array<double, 4>, 4> a, std::array<double, 4> b) {
    double scale = 0.0;
    for (const auto& row : a) {
        for (double v : row) scale = std::max(scale, std::abs(v));
    }
    const double tol = scale * 1e-12;
    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 4; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        if (std::abs(a[pivot][col]) <= tol) {
            throw std::invalid_argument(
                "fit_bilinear: rank-deficient design (degenerate config grid), basis column "
                + std::to_string(col) + " is dependent");
        }
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (int r = 0; r < 4; ++r) {
            if (r == col) continue;
            double f = a[r][col] / a[col][col];
            for (int k = col; k < 4; ++k) a[r][k] -= f * a[col][k];
            b[r] -= f * b[col];
        }
    }
    return {b[0] / a[0][0], b[1] / a[1][1], b[2] / a[2][2], b[3] / a[3][3]};
}

}  // namespace

std::pair<ModelCoefficients, double> fit_bilinear(const std::vector<MeasurementSample>& samples,
                                                  FitTarget target) {
    if (samples.size() < 4) {
        throw std::invalid_argument("fit_bilinear: need at least 4 samples, got "
                                    + std::to_string(samples.size()));
    }
    for (const auto& s : samples) s.validate();

    // Normal equations over the basis {Nh*Nw, Nw, Nh, 1}.
    std::array<std::array<double, 4>, 4> xtx{};
    std::array<double, 4> xty{};
    double y_sum = 0.0;
    for (const auto& s : samples) {
        double y = target == FitTarget::power ? s.power_w : s.area_um2;
        double row[4] = {static_cast<double>(s.nh) * s.nw, static_cast<double>(s.nw),
                         static_cast<double>(s.nh), 1.0};
        for (int i = 0; i < 4; ++i) {
            xty[i] += row[i] * y;
            for (int j = 0; j < 4; ++j) xtx[i][j] += row[i] * row[j];
        }
        y_sum += y;
    }

    std::array<double, 4> beta = solve4(xtx, xty);
    ModelCoefficients coeffs{beta[0], beta[1], beta[2], beta[3]};

    double y_mean = y_sum / static_cast<double>(samples.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (const auto& s : samples) {
        double y = target == FitTarget::power ? s.power_w : s.area_um2;
        double pred = power_total(coeffs, s.nh, s.nw);
        ss_res += (y - pred) * (y - pred);
        ss_tot += (y - y_mean) * (y - y_mean);
    }
    double r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return {coeffs, r2};
}

std::vector<std::optional<size_t>> pareto_frontier(std::vector<SweepRecord>& records,
                                                   const std::vector<double>& budgets) {
    if (records.empty()) throw std::invalid_argument("pareto_frontier: empty config set");

    for (auto& r : records) r.frontier = true;
    for (size_t i = 0; i < records.size(); ++i) {
        for (size_t j = 0; j < records.size(); ++j) {
            if (i == j) continue;
            bool no_worse = records[j].area_um2 <= records[i].area_um2
                            && records[j].epx_j <= records[i].epx_j;
            bool better = records[j].area_um2 < records[i].area_um2
                          || records[j].epx_j < records[i].epx_j;
            if (no_worse && better) {
                records[i].frontier = false;
                break;
            }
        }
    }

    std::vector<std::optional<size_t>> winners;
    winners.reserve(budgets.size());
    for (double budget : budgets) {
        std::optional<size_t> best;
        for (size_t i = 0; i < records.size(); ++i) {
            if (records[i].area_um2 > budget) continue;
            if (!best) {
                best = i;
                continue;
            }
            const SweepRecord& a = records[i];
            const SweepRecord& b = records[*best];
            if (a.epx_j < b.epx_j
                || (a.epx_j == b.epx_j
                    && (a.area_um2 < b.area_um2
                        || (a.area_um2 == b.area_um2 && a.nw < b.nw)))) {
                best = i;
            }
        }
        winners.push_back(best);
    }
    return winners;
}

BaselineRatios baseline_ratios(double lat_a_s, double pow_a_w, double lat_b_s, double pow_b_w) {
    if (!(lat_a_s > 0.0) || !(pow_a_w > 0.0) || !(lat_b_s > 0.0) || !(pow_b_w > 0.0)) {
        throw std::invalid_argument("baseline_ratios: all inputs must be > 0");
    }
    BaselineRatios r;
    r.speedup = lat_a_s / lat_b_s;
    r.energy_ratio = (lat_a_s * pow_a_w) / (lat_b_s * pow_b_w);
    r.power_ratio = pow_b_w / pow_a_w;
    return r;
}

double system_epx(double latency_s, double power_w, double pixels) {
    if (!(latency_s > 0.0) || !(power_w > 0.0)) {
        throw std::invalid_argument("system_epx: latency and power must be > 0");
    }
    if (!(pixels > 0.0)) throw std::invalid_argument("system_epx: pixel count must be > 0");
    return latency_s * power_w / pixels;
}

std::vector<SweepRecord> evaluate_sweep(const std::vector<ArrayConfig>& configs,
                                        const SweepInputs& inputs, int jobs) {
    std::vector<SweepRecord> records(configs.size());
    if (jobs < 1) jobs = 1;
    jobs = std::min<int>(jobs, static_cast<int>(configs.size()) > 0 ? static_cast<int>(configs.size()) : 1);

    auto work = [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            const ArrayConfig& cfg = configs[i];
            SweepRecord rec;
            rec.nh = cfg.nh;
            rec.nw = cfg.nw;
            rec.ctile = cycles_per_tile(cfg.nw, cfg.m);
            rec.cycles_per_px = cycles_per_px(cfg);
            rec.throughput_px = throughput_px(cfg);
            rec.power_w = power_total(inputs.power, cfg.nh, cfg.nw);
            rec.area_um2 = area_total(inputs.area, cfg.nh, cfg.nw);
            rec.epx_j = energy_px(inputs.power, cfg);
            for (const auto& s : inputs.overlay) {
                if (s.nh == cfg.nh && s.nw == cfg.nw && s.sys_latency_s && s.sys_power_w) {
                    rec.sys_epx_j = system_epx(*s.sys_latency_s, *s.sys_power_w, inputs.sys_pixels);
                }
            }
            records[i] = rec;
        }
    };

    if (jobs == 1 || configs.size() < 2) {
        work(0, configs.size());
    } else {
        std::vector<std::thread> pool;
        size_t chunk = (configs.size() + jobs - 1) / jobs;
        for (int t = 0; t < jobs; ++t) {
            size_t begin = static_cast<size_t>(t) * chunk;
            size_t end = std::min(configs.size(), begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(work, begin, end);
        }
        for (auto& th : pool) th.join();
    }
    return records;
}

// Synthetic values sized from a 45 nm-class breakdown; the power set puts the
// H20W5 total at 54.12 mW, the area set carries the SoC shell in the fixed
// term. Labeled synthetic everywhere they ship.
ModelCoefficients synthetic_power_coefficients() {
    return ModelCoefficients{1.125e-4, 5.83e-4, 1.435e-3, 1.1255e-2};
}

ModelCoefficients synthetic_area_coefficients() {
    return ModelCoefficients{4264.0, 20469.0, 76503.0, 1452406.0};
}

}  // namespace dse
}  // namespace sakura
