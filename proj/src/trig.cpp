#include "sakura/trig.hpp"

#include <cmath>
#include <stdexcept>

namespace sakura {

namespace {

// Interpolated Q0.16 magnitude at quarter-turn position idx in [0, 16384],
// where 4 code steps span one table segment. idx = 16384 hits the stored
// endpoint exactly.
uint32_t lut_magnitude(const QuarterWaveLut& lut, uint32_t idx) {
    uint32_t k = idx >> 2;
    uint32_t f = idx & 3u;
    uint32_t s0 = lut.samples[k];
    uint32_t s1 = lut.samples[f == 0 ? k : k + 1];
    return (s0 * (4u - f) + s1 * f + 2u) >> 2;
}

// Signed sine of an unsigned full-turn angle code (65536 codes per turn).
int32_t sin_of_angle(const QuarterWaveLut& lut, uint16_t angle) {
    uint32_t quadrant = angle >> 14;
    uint32_t idx = angle & 0x3FFFu;

    bool mirror = (quadrant & 1u) != 0;   // quadrants 1 and 3 run backwards
    bool negate = (quadrant & 2u) != 0;   // quadrants 2 and 3 are negative
    if (mirror) idx = 16384u - idx;

    uint32_t m = lut_magnitude(lut, idx);

    // Q0.16 magnitude -> Q1.15, round-to-nearest-even. Saturate after the
    // sign is applied: +1.0 clamps to 0x7FFF, -1.0 is representable.
    int32_t v = static_cast<int32_t>(m >> 1);
    if (m & 1u) v += (v & 1);
    if (negate) v = -v;
    if (v > 32767) v = 32767;
    if (v < -32768) v = -32768;
    return v;
}

}  // namespace

QuarterWaveLut build_lut() {
    QuarterWaveLut lut;
    for (int k = 0; k <= QuarterWaveLut::kSamples; ++k) {
        double s = std::sin(static_cast<double>(k) * kPi / 8192.0);
        int64_t code = round_half_even(s * 65536.0);
        if (code > 65535) code = 65535;
        if (code < 0) code = 0;
        lut.samples[static_cast<size_t>(k)] = static_cast<uint16_t>(code);
    }
    return lut;
}

SinCosQ15 sincos_q15(PhaseQ15 p, const QuarterWaveLut& lut) {
    auto angle = static_cast<uint16_t>(p.raw);
    int32_t s = sin_of_angle(lut, angle);
    int32_t c = sin_of_angle(lut, static_cast<uint16_t>(angle + 0x4000u));
    return SinCosQ15{PhaseQ15{static_cast<int16_t>(s)}, PhaseQ15{static_cast<int16_t>(c)}};
}

std::pair<double, double> sincos_exact(double theta) {
    if (!std::isfinite(theta)) {
        throw std::invalid_argument("sincos_exact: non-finite angle");
    }
    return {std::sin(theta), std::cos(theta)};
}

void dump_lut_csv(const QuarterWaveLut& lut, std::ostream& out) {
    out << "index,value\n";
    for (size_t k = 0; k < lut.samples.size(); ++k) {
        out << k << ',' << lut.samples[k] << '\n';
    }
}

}  // namespace sakura
