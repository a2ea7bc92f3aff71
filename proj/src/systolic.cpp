#include "sakura/systolic.hpp"

#include <cmath>
#include <stdexcept>

namespace sakura {

void ArrayConfig::validate() const {
    if (nh < 1 || nw < 1) throw std::invalid_argument("ArrayConfig: N_h and N_w must be >= 1");
    if (m < 3 || m % 2 == 0) throw std::invalid_argument("ArrayConfig: M must be odd and >= 3");
    if (!(fclk_hz > 0.0)) throw std::invalid_argument("ArrayConfig: f_clk must be > 0");
}

TilePlan plan_tiles(int width, int height, const ArrayConfig& config) {
    config.validate();
    if (width < 1 || height < 1) throw std::invalid_argument("plan_tiles: image must be >= 1x1");

    TilePlan plan;
    plan.tile_rows = (height + config.nh - 1) / config.nh;
    plan.tile_cols = (width + config.nw - 1) / config.nw;
    plan.tiles.reserve(static_cast<size_t>(plan.tile_rows) * plan.tile_cols);
    for (int ty = 0; ty < plan.tile_rows; ++ty) {
        for (int tx = 0; tx < plan.tile_cols; ++tx) {
            TileRect t;
            t.x0 = tx * config.nw;
            t.y0 = ty * config.nh;
            t.active_w = std::min(config.nw, width - t.x0);
            t.active_h = std::min(config.nh, height - t.y0);
            plan.tiles.push_back(t);
        }
    }
    return plan;
}

void write_trace_csv(const CycleTrace& trace, std::ostream& out) {
    out << "tile_index,prefill,sweep,drain,total\n";
    for (size_t i = 0; i < trace.per_tile.size(); ++i) {
        const TileCycles& t = trace.per_tile[i];
        out << i << ',' << t.prefill << ',' << t.sweep << ',' << t.drain << ',' << t.total()
            << '\n';
    }
}

AccQ824 combine_drift(AccQ824 core, PhaseQ15 scb, PhaseQ15 ccb,
                      const QuantizedDriftParams& params_q, SatTracker& sat) {
    AccQ824 nbr = mul_q15_acc(params_q.k_over_m2, core, sat);
    AccQ824 ref = acc_sub(mul_q15(params_q.kref_sin_psi, ccb.raw),
                          mul_q15(params_q.kref_cos_psi, scb.raw), sat);
    return acc_add(nbr, ref, sat);
}

namespace {

// Streams transformed halo columns for one tile, rightmost column first,
// each sample converted exactly once through the shared LUT.
class TileStreamer {
public:
    TileStreamer(const PhaseMap& map, const TileRect& tile, const ArrayConfig& config,
                 BoundaryMode boundary, const QuarterWaveLut& lut)
        : map_(map), boundary_(boundary), lut_(lut), y_top_(tile.y0 - config.m / 2),
          col_height_(config.nh + config.m - 1), next_x_(tile.x0 + config.nw - 1 + config.m / 2),
          last_x_(tile.x0 - config.m / 2) {}

    bool exhausted() const { return next_x_ < last_x_; }

    std::vector<SinCosQ15> next_column() {
        if (exhausted()) throw std::logic_error("streamer: column requested past the halo edge");
        std::vector<SinCosQ15> col(static_cast<size_t>(col_height_));
        for (int r = 0; r < col_height_; ++r) {
            col[static_cast<size_t>(r)] =
                sincos_q15(sample_phase(map_, next_x_, y_top_ + r, boundary_), lut_);
            ++conversions_;
        }
        --next_x_;
        return col;
    }

    uint64_t conversions() const { return conversions_; }

private:
    const PhaseMap& map_;
    BoundaryMode boundary_;
    const QuarterWaveLut& lut_;
    int y_top_;
    int col_height_;
    int next_x_;
    int last_x_;
    uint64_t conversions_ = 0;
};

// Array fabric state: the (M-1) x N_w row buffer stacked above the N_h x N_w
// PE input registers, with the snapshot registers used across horizontal
// advancement.
class ArrayFabric {
public:
    ArrayFabric(const ArrayConfig& config)
        : nh_(config.nh), nw_(config.nw), m_(config.m),
          pes_(static_cast<size_t>(nh_) * nw_),
          rowbuf_(static_cast<size_t>(m_ - 1) * nw_),
          rowbuf_snap_(rowbuf_.size()) {}

    PeState& pe(int r, int c) { return pes_[static_cast<size_t>(r) * nw_ + c]; }
    const PeState& pe(int r, int c) const { return pes_[static_cast<size_t>(r) * nw_ + c]; }

    // One column enters at the left edge; everything moves one PE to the
    // right. Column layout: rows 0..M-2 feed the row buffer, the rest feed
    // the array.
    void shift_right_inject(const std::vector<SinCosQ15>& column) {
        for (int r = 0; r < m_ - 1; ++r) {
            for (int c = nw_ - 1; c > 0; --c) rb(r, c) = rb(r, c - 1);
            rb(r, 0) = column[static_cast<size_t>(r)];
        }
        for (int r = 0; r < nh_; ++r) {
            for (int c = nw_ - 1; c > 0; --c) pe(r, c).down_reg = pe(r, c - 1).down_reg;
            pe(r, 0).down_reg = column[static_cast<size_t>(m_ - 1 + r)];
        }
    }

    // Row buffer and array shift down one row; the row buffer's bottom row
    // enters the array's top row.
    void shift_down() {
        for (int c = 0; c < nw_; ++c) {
            for (int r = nh_ - 1; r > 0; --r) pe(r, c).down_reg = pe(r - 1, c).down_reg;
            pe(0, c).down_reg = rb(m_ - 2, c);
            for (int r = m_ - 2; r > 0; --r) rb(r, c) = rb(r - 1, c);
            rb(0, c) = SinCosQ15{};
        }
    }

    // CRB/SRB capture of the right-going state before a vertical sweep.
    void snapshot() {
        for (auto& p : pes_) p.snap_reg = p.down_reg;
        rowbuf_snap_ = rowbuf_;
    }

    void restore() {
        for (auto& p : pes_) p.down_reg = p.snap_reg;
        rowbuf_ = rowbuf_snap_;
    }

private:
    SinCosQ15& rb(int r, int c) { return rowbuf_[static_cast<size_t>(r) * nw_ + c]; }

    int nh_, nw_, m_;
    std::vector<PeState> pes_;
    std::vector<SinCosQ15> rowbuf_;
    std::vector<SinCosQ15> rowbuf_snap_;
};

}  // namespace

TileResult run_tile(const PhaseMap& map, const TileRect& tile, const ArrayConfig& config,
                    const QuantizedDriftParams& params_q, BoundaryMode boundary,
                    const QuarterWaveLut& lut, std::ostream* event_log, int tile_index) {
    config.validate();
    if (config.m != params_q.m) {
        throw std::invalid_argument("run_tile: config and quantized params disagree on M");
    }

    TileStreamer streamer(map, tile, config, boundary, lut);
    ArrayFabric fabric(config);
    TileResult result;
    result.nh = config.nh;
    result.nw = config.nw;
    result.core.resize(static_cast<size_t>(config.nh) * config.nw);
    result.scb.resize(result.core.size());
    result.ccb.resize(result.core.size());

    int cycle = 0;
    const int m = config.m;
    const int half = m / 2;

    // Prefill: one transformed column per cycle, contents shifting right.
    for (int i = 0; i < config.nw; ++i) {
        fabric.shift_right_inject(streamer.next_column());
        if (event_log) {
            *event_log << "cycle=" << cycle << " tile=" << tile_index << " phase=prefill\n";
        }
        ++cycle;
    }
    result.cycles.prefill = cycle;

    // Offset sweep: M vertical offsets per horizontal offset. Snapshot,
    // restore and column injection share the first cycle of each group, the
    // only schedule consistent with C_tile = N_w + M^2 + 1.
    for (int s = 0; s < m * m; ++s) {
        int group = s / m;
        int step = s % m;
        if (step == 0) {
            if (group > 0) {
                fabric.restore();
                fabric.shift_right_inject(streamer.next_column());
            }
            fabric.snapshot();
        } else {
            fabric.shift_down();
        }

        bool is_center = (group == half && step == half);
        for (int r = 0; r < config.nh; ++r) {
            for (int c = 0; c < config.nw; ++c) {
                PeState& p = fabric.pe(r, c);
                if (is_center) {
                    if (p.captured) {
                        throw std::logic_error("run_tile: center captured twice in one tile");
                    }
                    p.scb = p.down_reg.sin;
                    p.ccb = p.down_reg.cos;
                    p.captured = true;
                } else {
                    p.acc_s = acc_add(p.acc_s, acc_from_q15(p.down_reg.sin.raw), result.sat);
                    p.acc_c = acc_add(p.acc_c, acc_from_q15(p.down_reg.cos.raw), result.sat);
                }
            }
        }
        if (event_log) {
            *event_log << "cycle=" << cycle << " tile=" << tile_index << " phase=sweep dx="
                       << (group - half) << " dy=" << (step - half) << '\n';
        }
        ++cycle;
    }
    result.cycles.sweep = cycle - result.cycles.prefill;

    // Combine and drain within one cycle; the drain overlaps the next tile's
    // prefill, so it never costs more than this.
    for (int r = 0; r < config.nh; ++r) {
        for (int c = 0; c < config.nw; ++c) {
            PeState& p = fabric.pe(r, c);
            if (!p.captured) {
                throw std::logic_error("run_tile: PE finished the sweep without a center capture");
            }
            AccQ824 core = acc_sub(mul_q15_acc(p.ccb.raw, p.acc_s, result.sat),
                                   mul_q15_acc(p.scb.raw, p.acc_c, result.sat), result.sat);
            size_t idx = static_cast<size_t>(r) * config.nw + c;
            result.core[idx] = core;
            result.scb[idx] = p.scb;
            result.ccb[idx] = p.ccb;
        }
    }
    if (event_log) {
        *event_log << "cycle=" << cycle << " tile=" << tile_index << " phase=combine_drain\n";
    }
    ++cycle;
    result.cycles.drain = 1;
    result.streamer_conversions = streamer.conversions();
    return result;
}

RunImageResult run_image(const PhaseMap& map, const ArrayConfig& config,
                         const QuantizedDriftParams& params_q, BoundaryMode boundary,
                         const QuarterWaveLut& lut, std::ostream* event_log) {
    TilePlan plan = plan_tiles(map.width, map.height, config);

    RunImageResult out;
    out.field.width = map.width;
    out.field.height = map.height;
    out.field.data.resize(map.pixels());
    out.field.center_sin.resize(map.pixels());
    out.field.center_cos.resize(map.pixels());
    out.trace.per_tile.reserve(plan.tiles.size());

    for (size_t ti = 0; ti < plan.tiles.size(); ++ti) {
        const TileRect& rect = plan.tiles[ti];
        TileResult tile_out = run_tile(map, rect, config, params_q, boundary, lut, event_log,
                                       static_cast<int>(ti));
        out.field.sat.merge(tile_out.sat);

        for (int r = 0; r < rect.active_h; ++r) {
            for (int c = 0; c < rect.active_w; ++c) {
                size_t src = static_cast<size_t>(r) * config.nw + c;
                size_t dst = static_cast<size_t>(rect.y0 + r) * map.width + (rect.x0 + c);
                out.field.data[dst] = combine_drift(tile_out.core[src], tile_out.scb[src],
                                                    tile_out.ccb[src], params_q, out.field.sat);
                out.field.center_sin[dst] = tile_out.scb[src];
                out.field.center_cos[dst] = tile_out.ccb[src];
            }
        }

        out.trace.per_tile.push_back(tile_out.cycles);
        out.trace.prefill_cycles += static_cast<uint64_t>(tile_out.cycles.prefill);
        out.trace.sweep_cycles += static_cast<uint64_t>(tile_out.cycles.sweep);
        out.trace.drain_cycles += static_cast<uint64_t>(tile_out.cycles.drain);
        out.trace.total_cycles += static_cast<uint64_t>(tile_out.cycles.total());
        out.trace.streamer_conversions += tile_out.streamer_conversions;
    }
    return out;
}

PhaseQ15 integrate_phase(PhaseQ15 theta, AccQ824 drift_q, double score_value, double diffusion,
                         double dt, double xi) {
    double increment = (acc_to_real(drift_q) + score_value) * dt
                       + std::sqrt(2.0 * diffusion * dt) * xi;
    int64_t delta = round_half_even(increment / kPi * kQ15Scale);
    auto wrapped = static_cast<uint16_t>(static_cast<uint16_t>(theta.raw)
                                         + static_cast<uint16_t>(delta & 0xFFFF));
    return PhaseQ15{static_cast<int16_t>(wrapped)};
}

void post_array_update(const TileResult& tile_out, const TileRect& rect,
                       const QuantizedDriftParams& params_q, const PhaseMap& theta_in,
                       const std::vector<double>& noise, const DriftField* score,
                       double diffusion, double dt, PhaseMap& theta_out, SatTracker& sat) {
    if (!(dt > 0.0)) throw std::invalid_argument("post_array_update: dt must be > 0");
    if (diffusion < 0.0) throw std::invalid_argument("post_array_update: D must be >= 0");
    if (noise.size() != theta_in.pixels()) {
        throw std::invalid_argument("post_array_update: noise field size mismatch");
    }
    if (score != nullptr && (score->width != theta_in.width || score->height != theta_in.height)) {
        throw std::invalid_argument("post_array_update: score field dimension mismatch");
    }
    if (theta_out.width != theta_in.width || theta_out.height != theta_in.height) {
        throw std::invalid_argument("post_array_update: output map dimension mismatch");
    }

    for (int r = 0; r < rect.active_h; ++r) {
        for (int c = 0; c < rect.active_w; ++c) {
            size_t src = static_cast<size_t>(r) * tile_out.nw + c;
            int x = rect.x0 + c;
            int y = rect.y0 + r;
            size_t px = static_cast<size_t>(y) * theta_in.width + x;
            AccQ824 u = combine_drift(tile_out.core[src], tile_out.scb[src], tile_out.ccb[src],
                                      params_q, sat);
            double score_v = score ? score->at(x, y) : 0.0;
            theta_out.at(x, y) = integrate_phase(theta_in.at(x, y), u, score_v, diffusion, dt,
                                                 noise[px]);
        }
    }
}

}  // namespace sakura
