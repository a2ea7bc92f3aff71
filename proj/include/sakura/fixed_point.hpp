#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

// Q1.15 phase codes and the Q8.24 accumulator shared by the trig, drift
// and systolic modules. All rounding is round-to-nearest-even; accumulator
// overflow saturates and is counted, never wrapped.

namespace sakura {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Signed 16-bit phase in Q1.15: raw/2^15 is the normalized value in [-1,1),
// physical phase is normalized * pi. Every bit pattern is a valid phase;
// two's-complement wraparound coincides with phase wraparound.
struct PhaseQ15 {
    int16_t raw = 0;

    constexpr bool operator==(const PhaseQ15&) const = default;
};

// Signed 32-bit accumulator in Q8.24 (1 sign + 7 integer + 24 fraction bits),
// range [-128, 128). Holds neighborhood sums (|.| <= 24) and combined cores
// (|.| <= 48) with headroom.
struct AccQ824 {
    int32_t raw = 0;

    constexpr bool operator==(const AccQ824&) const = default;
};

inline constexpr int32_t kAccMax = std::numeric_limits<int32_t>::max();
inline constexpr int32_t kAccMin = std::numeric_limits<int32_t>::min();
inline constexpr double kAccScale = 16777216.0;  // 2^24
inline constexpr double kQ15Scale = 32768.0;     // 2^15

// Sticky saturation accounting for a run of accumulator operations.
struct SatTracker {
    uint64_t count = 0;

    bool sticky() const { return count > 0; }
    void merge(const SatTracker& other) { count += other.count; }
};

// Round x to the nearest integer, ties to even.
inline int64_t round_half_even(double x) {
    double f = std::floor(x);
    double r = x - f;
    auto k = static_cast<int64_t>(f);
    if (r > 0.5) return k + 1;
    if (r < 0.5) return k;
    return (k & 1) ? k + 1 : k;
}

// Arithmetic shift right by n with round-to-nearest-even on the shifted-out
// bits. n in [1, 62].
inline int64_t shift_right_rne(int64_t v, int n) {
    int64_t floor_part = v >> n;
    int64_t rem = v & ((int64_t{1} << n) - 1);
    int64_t half = int64_t{1} << (n - 1);
    if (rem > half) return floor_part + 1;
    if (rem < half) return floor_part;
    return floor_part + (floor_part & 1);
}

// Wrap an arbitrary finite angle into [-pi, pi).
inline double wrap_phase(double theta) {
    double w = std::remainder(theta, kTwoPi);
    if (w >= kPi) w -= kTwoPi;
    return w;
}

// Encode a physical phase (radians) as Q1.15. The angle is wrapped into
// [-pi, pi), normalized by pi and rounded to the code grid; a round-up to
// +1.0 lands on the -1.0 code, which is the same phase.
inline PhaseQ15 encode_phase(double theta_radians) {
    if (!std::isfinite(theta_radians)) {
        throw std::invalid_argument("encode_phase: non-finite phase");
    }
    double v = wrap_phase(theta_radians) / kPi;
    int64_t k = round_half_even(v * kQ15Scale);
    return PhaseQ15{static_cast<int16_t>(static_cast<uint16_t>(k & 0xFFFF))};
}

inline double decode_phase(PhaseQ15 p) {
    return static_cast<double>(p.raw) * (kPi / kQ15Scale);
}

// Quantize a plain (non-phase) real to Q1.15 with saturation. Used for the
// per-step scalar coefficients; unlike encode_phase this does not wrap.
inline int16_t q15_from_real(double x) {
    if (!std::isfinite(x)) {
        throw std::invalid_argument("q15_from_real: non-finite value");
    }
    int64_t k = round_half_even(x * kQ15Scale);
    if (k > 32767) k = 32767;
    if (k < -32768) k = -32768;
    return static_cast<int16_t>(k);
}

inline double q15_to_real(int16_t raw) {
    return static_cast<double>(raw) / kQ15Scale;
}

inline double acc_to_real(AccQ824 a) {
    return static_cast<double>(a.raw) / kAccScale;
}

// Exact widening of a Q1.15 value into the accumulator format.
inline AccQ824 acc_from_q15(int16_t raw) {
    return AccQ824{static_cast<int32_t>(raw) << 9};
}

// Quantize a real to Q8.24 with saturation.
inline AccQ824 acc_from_real(double x, SatTracker& sat) {
    if (!std::isfinite(x)) {
        throw std::invalid_argument("acc_from_real: non-finite value");
    }
    int64_t k = round_half_even(x * kAccScale);
    if (k > kAccMax) { k = kAccMax; ++sat.count; }
    if (k < kAccMin) { k = kAccMin; ++sat.count; }
    return AccQ824{static_cast<int32_t>(k)};
}

// 16x16 -> 32 product of two Q1.15 values, renormalized from Q2.30 to Q8.24
// by an arithmetic right shift of 6 with round-to-nearest-even. Cannot
// overflow.
inline AccQ824 mul_q15(int16_t a, int16_t b) {
    auto p = static_cast<int64_t>(a) * static_cast<int64_t>(b);
    return AccQ824{static_cast<int32_t>(shift_right_rne(p, 6))};
}

// Q1.15 x Q8.24 -> Q8.24 product (shift right 15, round-to-nearest-even,
// saturate). Realizes the center multiply in the combine datapath.
inline AccQ824 mul_q15_acc(int16_t a, AccQ824 b, SatTracker& sat) {
    auto p = static_cast<int64_t>(a) * static_cast<int64_t>(b.raw);
    int64_t r = shift_right_rne(p, 15);
    if (r > kAccMax) { r = kAccMax; ++sat.count; }
    if (r < kAccMin) { r = kAccMin; ++sat.count; }
    return AccQ824{static_cast<int32_t>(r)};
}

// Saturating Q8.24 addition; clamps count toward the tracker.
inline AccQ824 acc_add(AccQ824 a, AccQ824 b, SatTracker& sat) {
    int64_t s = static_cast<int64_t>(a.raw) + static_cast<int64_t>(b.raw);
    if (s > kAccMax) { s = kAccMax; ++sat.count; }
    if (s < kAccMin) { s = kAccMin; ++sat.count; }
    return AccQ824{static_cast<int32_t>(s)};
}

inline AccQ824 acc_sub(AccQ824 a, AccQ824 b, SatTracker& sat) {
    int64_t s = static_cast<int64_t>(a.raw) - static_cast<int64_t>(b.raw);
    if (s > kAccMax) { s = kAccMax; ++sat.count; }
    if (s < kAccMin) { s = kAccMin; ++sat.count; }
    return AccQ824{static_cast<int32_t>(s)};
}

// Row-major 2-D grid of Q1.15 phases, top-left origin.
struct PhaseMap {
    int width = 0;
    int height = 0;
    std::vector<PhaseQ15> data;

    PhaseMap() = default;
    PhaseMap(int w, int h) : width(w), height(h), data(check_dims(w, h)) {}

    PhaseQ15& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    PhaseQ15 at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
    size_t pixels() const { return data.size(); }

private:
    static size_t check_dims(int w, int h) {
        if (w < 1 || h < 1) throw std::invalid_argument("PhaseMap: dimensions must be >= 1");
        return static_cast<size_t>(w) * static_cast<size_t>(h);
    }
};

}  // namespace sakura
