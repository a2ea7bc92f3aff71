#include "sakura/drift.hpp"

#include <cmath>
#include <stdexcept>

namespace sakura {

void DriftParams::validate() const {
    if (m < 3 || m % 2 == 0) throw std::invalid_argument("DriftParams: M must be odd and >= 3");
    if (!std::isfinite(k) || k < 0.0) throw std::invalid_argument("DriftParams: K must be finite and >= 0");
    if (!std::isfinite(k_ref) || k_ref < 0.0) {
        throw std::invalid_argument("DriftParams: K_ref must be finite and >= 0");
    }
    if (!std::isfinite(psi_ref)) throw std::invalid_argument("DriftParams: psi_ref must be finite");
}

BoundaryMode boundary_from_string(const std::string& name) {
    if (name == "replicate") return BoundaryMode::replicate;
    if (name == "reflect") return BoundaryMode::reflect;
    if (name == "wrap") return BoundaryMode::wrap;
    if (name == "zero") return BoundaryMode::zero_phase;
    throw std::invalid_argument("unknown boundary mode: " + name);
}

std::string to_string(BoundaryMode mode) {
    switch (mode) {
        case BoundaryMode::replicate: return "replicate";
        case BoundaryMode::reflect: return "reflect";
        case BoundaryMode::wrap: return "wrap";
        case BoundaryMode::zero_phase: return "zero";
    }
    return "?";
}

namespace {

int fold_index(int i, int n, BoundaryMode mode) {
    switch (mode) {
        case BoundaryMode::replicate:
            return i < 0 ? 0 : (i >= n ? n - 1 : i);
        case BoundaryMode::reflect:
            // mirror with edge duplication: ...cba|abc...|cba...
            while (i < 0 || i >= n) {
                if (i < 0) i = -i - 1;
                if (i >= n) i = 2 * n - 1 - i;
            }
            return i;
        case BoundaryMode::wrap: {
            int r = i % n;
            return r < 0 ? r + n : r;
        }
        case BoundaryMode::zero_phase:
            return i;  // handled by the caller
    }
    return i;
}

}  // namespace

PhaseQ15 sample_phase(const PhaseMap& map, int x, int y, BoundaryMode mode) {
    if (mode == BoundaryMode::zero_phase) {
        if (x < 0 || x >= map.width || y < 0 || y >= map.height) return PhaseQ15{0};
        return map.at(x, y);
    }
    return map.at(fold_index(x, map.width, mode), fold_index(y, map.height, mode));
}

QuantizedDriftParams QuantizedDriftParams::from(const DriftParams& params) {
    params.validate();
    QuantizedDriftParams q;
    q.m = params.m;
    q.k_over_m2 = q15_from_real(params.k / static_cast<double>(params.neighborhood_count()));
    q.kref_sin_psi = q15_from_real(params.k_ref * std::sin(params.psi_ref));
    q.kref_cos_psi = q15_from_real(params.k_ref * std::cos(params.psi_ref));
    return q;
}

DriftField drift_direct(const PhaseMap& map, const DriftParams& params, BoundaryMode boundary) {
    params.validate();
    DriftField out{map.width, map.height,
                   std::vector<double>(map.pixels(), 0.0)};
    const int h = params.m / 2;
    const double scale = params.k / static_cast<double>(params.neighborhood_count());

    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            double theta_i = decode_phase(map.at(x, y));
            double sum = 0.0;
            for (int dy = -h; dy <= h; ++dy) {
                for (int dx = -h; dx <= h; ++dx) {
                    double theta_j = decode_phase(sample_phase(map, x + dx, y + dy, boundary));
                    sum += std::sin(theta_j - theta_i);
                }
            }
            out.at(x, y) = scale * sum + params.k_ref * std::sin(params.psi_ref - theta_i);
        }
    }
    return out;
}

std::pair<double, double> neighbor_sums(const PhaseMap& map, int x, int y, int m,
                                        BoundaryMode boundary) {
    if (x < 0 || x >= map.width || y < 0 || y >= map.height) {
        throw std::out_of_range("neighbor_sums: pixel index outside the map");
    }
    const int h = m / 2;
    double s = 0.0, c = 0.0;
    for (int dy = -h; dy <= h; ++dy) {
        for (int dx = -h; dx <= h; ++dx) {
            if (dx == 0 && dy == 0) continue;  // center is captured, not accumulated
            double theta_j = decode_phase(sample_phase(map, x + dx, y + dy, boundary));
            s += std::sin(theta_j);
            c += std::cos(theta_j);
        }
    }
    return {s, c};
}

DriftField drift_reformulated(const PhaseMap& map, const DriftParams& params,
                              BoundaryMode boundary) {
    params.validate();
    DriftField out{map.width, map.height,
                   std::vector<double>(map.pixels(), 0.0)};
    const double scale = params.k / static_cast<double>(params.neighborhood_count());
    const double sin_psi = std::sin(params.psi_ref);
    const double cos_psi = std::cos(params.psi_ref);

    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            auto [s, c] = neighbor_sums(map, x, y, params.m, boundary);
            double theta_i = decode_phase(map.at(x, y));
            double sin_i = std::sin(theta_i);
            double cos_i = std::cos(theta_i);
            double core = nbr_core(s, c, sin_i, cos_i);
            out.at(x, y) = scale * core + params.k_ref * (sin_psi * cos_i - cos_psi * sin_i);
        }
    }
    return out;
}

FixedDriftField drift_fixed(const PhaseMap& map, const QuantizedDriftParams& params_q,
                            BoundaryMode boundary, const QuarterWaveLut& lut) {
    FixedDriftField out;
    out.width = map.width;
    out.height = map.height;
    out.data.resize(map.pixels());
    out.center_sin.resize(map.pixels());
    out.center_cos.resize(map.pixels());

    const int h = params_q.m / 2;
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            AccQ824 acc_s{0}, acc_c{0};
            for (int dy = -h; dy <= h; ++dy) {
                for (int dx = -h; dx <= h; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    SinCosQ15 sc = sincos_q15(sample_phase(map, x + dx, y + dy, boundary), lut);
                    acc_s = acc_add(acc_s, acc_from_q15(sc.sin.raw), out.sat);
                    acc_c = acc_add(acc_c, acc_from_q15(sc.cos.raw), out.sat);
                }
            }
            SinCosQ15 center = sincos_q15(map.at(x, y), lut);
            size_t idx = static_cast<size_t>(y) * map.width + x;
            out.center_sin[idx] = center.sin;
            out.center_cos[idx] = center.cos;

            AccQ824 core = acc_sub(mul_q15_acc(center.cos.raw, acc_s, out.sat),
                                   mul_q15_acc(center.sin.raw, acc_c, out.sat), out.sat);
            AccQ824 nbr = mul_q15_acc(params_q.k_over_m2, core, out.sat);
            AccQ824 ref = acc_sub(mul_q15(params_q.kref_sin_psi, center.cos.raw),
                                  mul_q15(params_q.kref_cos_psi, center.sin.raw), out.sat);
            out.data[idx] = acc_add(nbr, ref, out.sat);
        }
    }
    return out;
}

}  // namespace sakura
