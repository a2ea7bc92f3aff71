#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "sakura/drift.hpp"
#include "sakura/fixed_point.hpp"
#include "sakura/trig.hpp"

// Cycle-accurate simulator of the N_h x N_w PE array: streamer, column/row
// buffers, 2-D offset-sweep schedule with in-dataflow center capture,
// drain-prefill overlap, and per-tile cycle accounting.

namespace sakura {

struct ArrayConfig {
    int nh = 20;           // PE rows
    int nw = 5;            // PE columns
    int m = 5;             // neighborhood side
    double fclk_hz = 1e8;  // common target clock

    void validate() const;
};

// One spatial tile of the image. Tiles beyond the image edge are computed on
// boundary-padded data and masked on write-back; active_w/active_h give the
// in-image extent.
struct TileRect {
    int x0 = 0;
    int y0 = 0;
    int active_w = 0;
    int active_h = 0;
};

struct TilePlan {
    int tile_rows = 0;
    int tile_cols = 0;
    std::vector<TileRect> tiles;  // row-major
};

TilePlan plan_tiles(int width, int height, const ArrayConfig& config);

struct TileCycles {
    int prefill = 0;
    int sweep = 0;
    int drain = 0;
    int total() const { return prefill + sweep + drain; }
};

struct CycleTrace {
    std::vector<TileCycles> per_tile;
    uint64_t prefill_cycles = 0;
    uint64_t sweep_cycles = 0;
    uint64_t drain_cycles = 0;
    uint64_t total_cycles = 0;
    uint64_t streamer_conversions = 0;

    double seconds(double fclk_hz) const { return static_cast<double>(total_cycles) / fclk_hz; }
};

void write_trace_csv(const CycleTrace& trace, std::ostream& out);

// Drained output of one tile: per-PE unscaled cores and captured centers.
struct TileResult {
    int nh = 0;
    int nw = 0;
    std::vector<AccQ824> core;      // nh*nw, row-major over PEs
    std::vector<PhaseQ15> scb;      // captured sin(theta_i)
    std::vector<PhaseQ15> ccb;      // captured cos(theta_i)
    TileCycles cycles;
    uint64_t streamer_conversions = 0;
    SatTracker sat;
};

// Per-PE register state as modeled by the simulator.
struct PeState {
    AccQ824 acc_s{0};
    AccQ824 acc_c{0};
    PhaseQ15 scb{0};      // Sin Center Buffer
    PhaseQ15 ccb{0};      // Cos Center Buffer
    SinCosQ15 down_reg;   // CDB/SDB: transformed sample currently held
    SinCosQ15 snap_reg;   // CRB/SRB: snapshot for horizontal advancement
    bool captured = false;
};

// Post-array combine shared by the functional model and the simulator:
// u = (K/M^2) * core + K_ref-term built from the captured center components.
AccQ824 combine_drift(AccQ824 core, PhaseQ15 scb, PhaseQ15 ccb,
                      const QuantizedDriftParams& params_q, SatTracker& sat);

// Simulate one tile cycle by cycle. The event log, when given, receives one
// line per cycle. Throws std::logic_error on internal scheduling violations
// (simulator bugs, not user errors).
TileResult run_tile(const PhaseMap& map, const TileRect& tile, const ArrayConfig& config,
                    const QuantizedDriftParams& params_q, BoundaryMode boundary,
                    const QuarterWaveLut& lut, std::ostream* event_log = nullptr,
                    int tile_index = 0);

// Process the whole image in row-major tile order with drain-prefill
// overlap. The output field is bit-identical to drift_fixed on the same map.
struct RunImageResult {
    FixedDriftField field;
    CycleTrace trace;
};

RunImageResult run_image(const PhaseMap& map, const ArrayConfig& config,
                         const QuantizedDriftParams& params_q, BoundaryMode boundary,
                         const QuarterWaveLut& lut, std::ostream* event_log = nullptr);

// Theta Update Unit: integrate one tile region of the phase map,
//   theta' = wrap(theta + [(K/M^2) core + ref + score] dt + sqrt(2 D dt) xi),
// with the final increment quantized to the Q1.15 grid. noise holds one
// standard normal per image pixel in raster order; score may be null.
void post_array_update(const TileResult& tile_out, const TileRect& rect,
                       const QuantizedDriftParams& params_q, const PhaseMap& theta_in,
                       const std::vector<double>& noise, const DriftField* score,
                       double diffusion, double dt, PhaseMap& theta_out, SatTracker& sat);

// Single-pixel integration step shared by the fixed-point engines.
PhaseQ15 integrate_phase(PhaseQ15 theta, AccQ824 drift_q, double score_value,
                         double diffusion, double dt, double xi);

}  // namespace sakura
