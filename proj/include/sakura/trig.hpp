#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <utility>

#include "sakura/fixed_point.hpp"

// Quarter-wave sine table matching the streamer's sinusoidal units: 4096
// stored samples over [0, pi/2] plus an explicit endpoint, quadrant decoding
// from the top two bits of the phase code, 2-bit fractional linear
// interpolation.

namespace sakura {

struct SinCosQ15 {
    PhaseQ15 sin;
    PhaseQ15 cos;

    constexpr bool operator==(const SinCosQ15&) const = default;
};

// Unsigned Q0.16 sine samples for angles k*(pi/2)/4096, k = 0..4096. The
// endpoint entry makes interpolation at the last segment uniform; values are
// clamped to the 16-bit max, so the table never encodes a full 1.0.
struct QuarterWaveLut {
    static constexpr int kSamples = 4096;
    std::array<uint16_t, kSamples + 1> samples{};
};

// Deterministic table construction: samples[k] = round(sin(k*pi/8192) * 2^16)
// clamped to 65535.
QuarterWaveLut build_lut();

// Table-based sin/cos of a Q1.15 phase. The raw code is reinterpreted as an
// unsigned full-turn angle (phase 0 at code 0, codes >= 0x8000 covering
// [pi, 2pi)); top 2 bits select the quadrant, next 12 index the table, bottom
// 2 drive linear interpolation with weight frac/4. Outputs are signed Q1.15
// with 1.0 saturating to 0x7FFF.
SinCosQ15 sincos_q15(PhaseQ15 p, const QuarterWaveLut& lut);

// Library-precision sine/cosine, used only by golden oracles.
std::pair<double, double> sincos_exact(double theta);

// CSV dump (index, stored value) for cross-implementation comparison.
void dump_lut_csv(const QuarterWaveLut& lut, std::ostream& out);

}  // namespace sakura
