#include "sakura/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace sakura {

double ScheduleTable::eval(double t) const {
    if (points.empty()) throw std::logic_error("ScheduleTable: empty table");
    if (t <= points.front().first) return points.front().second;
    if (t >= points.back().first) return points.back().second;
    for (size_t i = 1; i < points.size(); ++i) {
        if (t <= points[i].first) {
            auto [t0, v0] = points[i - 1];
            auto [t1, v1] = points[i];
            if (t1 == t0) return v1;
            double a = (t - t0) / (t1 - t0);
            return v0 + a * (v1 - v0);
        }
    }
    return points.back().second;
}

void ScheduleTable::validate(const std::string& name, bool non_negative) const {
    if (points.empty()) {
        throw std::invalid_argument("schedule: table '" + name + "' is empty");
    }
    for (size_t i = 0; i < points.size(); ++i) {
        if (!std::isfinite(points[i].first) || !std::isfinite(points[i].second)) {
            throw std::invalid_argument("schedule: non-finite entry in table '" + name + "'");
        }
        if (i > 0 && points[i].first < points[i - 1].first) {
            throw std::invalid_argument("schedule: table '" + name + "' is not sorted by t");
        }
        if (non_negative && points[i].second < 0.0) {
            throw std::invalid_argument("schedule: table '" + name + "' must be >= 0");
        }
    }
}

void Schedule::validate() const {
    k.validate("K", true);
    k_ref.validate("K_ref", true);
    d.validate("D", true);
    if (!(dt > 0.0)) throw std::invalid_argument("schedule: dt must be > 0");
    if (steps < 0) throw std::invalid_argument("schedule: steps must be >= 0");
    if (!std::isfinite(psi_ref)) throw std::invalid_argument("schedule: psi_ref must be finite");
}

Schedule Schedule::defaults() {
    Schedule s;
    s.k.points = {{0.0, 1.0}, {1.0, 0.0}};
    s.k_ref.points = {{0.0, 0.0}, {1.0, 1.0}};
    s.d.points = {{0.0, 0.1}, {1.0, 0.1}};
    s.psi_ref = 0.0;
    s.dt = 0.01;
    s.steps = 100;
    return s;
}

double NoiseStream::next_uniform() {
    // splitmix64
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

double NoiseStream::next_normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * next_uniform() - 1.0;
        v = 2.0 * next_uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double mag = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * mag;
    has_spare_ = true;
    return u * mag;
}

std::vector<double> NoiseStream::normal_field(size_t count) {
    std::vector<double> field(count);
    for (auto& x : field) x = next_normal();
    return field;
}

DriftEngine engine_from_string(const std::string& name) {
    if (name == "oracle") return DriftEngine::oracle;
    if (name == "fixed") return DriftEngine::fixed;
    if (name == "systolic") return DriftEngine::systolic;
    throw std::invalid_argument("unknown drift engine: " + name);
}

std::string to_string(DriftEngine engine) {
    switch (engine) {
        case DriftEngine::oracle: return "oracle";
        case DriftEngine::fixed: return "fixed";
        case DriftEngine::systolic: return "systolic";
    }
    return "?";
}

namespace {

DriftParams params_at(const Schedule& schedule, double t) {
    DriftParams p;
    p.k = schedule.k.eval(t);
    p.k_ref = schedule.k_ref.eval(t);
    p.psi_ref = schedule.psi_ref;
    p.m = 5;
    return p;
}

PhaseMap step_impl(const PhaseMap& map, const Schedule& schedule, double t, NoiseStream& noise,
                   const StepContext& ctx, const DriftField* score) {
    schedule.validate();
    if (score != nullptr && (score->width != map.width || score->height != map.height)) {
        throw std::invalid_argument("step: score field dimension mismatch");
    }
    DriftParams params = params_at(schedule, t);
    double diffusion = schedule.d.eval(t);
    double dt = schedule.dt;
    std::vector<double> xi = noise.normal_field(map.pixels());

    PhaseMap next(map.width, map.height);

    if (ctx.engine == DriftEngine::oracle) {
        DriftField u = drift_reformulated(map, params, ctx.boundary);
        double sigma = std::sqrt(2.0 * diffusion * dt);
        for (int y = 0; y < map.height; ++y) {
            for (int x = 0; x < map.width; ++x) {
                size_t px = static_cast<size_t>(y) * map.width + x;
                double drift = u.at(x, y) + (score ? score->at(x, y) : 0.0);
                double theta = decode_phase(map.at(x, y)) + drift * dt + sigma * xi[px];
                next.at(x, y) = encode_phase(theta);
            }
        }
        return next;
    }

    if (ctx.lut == nullptr) {
        throw std::invalid_argument("step: fixed/systolic engines need a LUT");
    }
    QuantizedDriftParams params_q = QuantizedDriftParams::from(params);
    SatTracker sat;

    if (ctx.engine == DriftEngine::fixed) {
        FixedDriftField u = drift_fixed(map, params_q, ctx.boundary, *ctx.lut);
        for (int y = 0; y < map.height; ++y) {
            for (int x = 0; x < map.width; ++x) {
                size_t px = static_cast<size_t>(y) * map.width + x;
                next.at(x, y) = integrate_phase(map.at(x, y), u.at(x, y),
                                                score ? score->at(x, y) : 0.0, diffusion, dt,
                                                xi[px]);
            }
        }
        return next;
    }

    // systolic engine: tile-by-tile drain into the Theta Update Unit.
    TilePlan plan = plan_tiles(map.width, map.height, ctx.config);
    for (size_t ti = 0; ti < plan.tiles.size(); ++ti) {
        TileResult tile_out = run_tile(map, plan.tiles[ti], ctx.config, params_q, ctx.boundary,
                                       *ctx.lut, nullptr, static_cast<int>(ti));
        post_array_update(tile_out, plan.tiles[ti], params_q, map, xi, score, diffusion, dt,
                          next, sat);
    }
    return next;
}

}  // namespace

PhaseMap forward_step(const PhaseMap& map, const Schedule& schedule, double t, NoiseStream& noise,
                      const StepContext& ctx) {
    return step_impl(map, schedule, t, noise, ctx, nullptr);
}

PhaseMap reverse_step(const PhaseMap& map, const Schedule& schedule, double t, NoiseStream& noise,
                      const StepContext& ctx, const DriftField* score) {
    return step_impl(map, schedule, t, noise, ctx, score);
}

PhaseMap trivial_drift_step(const PhaseMap& map, double beta, double diffusion, double dt,
                            NoiseStream& noise) {
    if (!(dt > 0.0)) throw std::invalid_argument("trivial_drift_step: dt must be > 0");
    if (diffusion < 0.0) throw std::invalid_argument("trivial_drift_step: D must be >= 0");
    PhaseMap next(map.width, map.height);
    double sigma = std::sqrt(2.0 * diffusion * dt);
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            double theta = decode_phase(map.at(x, y));
            theta += -0.5 * beta * theta * dt + sigma * noise.next_normal();
            next.at(x, y) = encode_phase(theta);
        }
    }
    return next;
}

double local_coherence(const PhaseMap& map, int m) {
    if (m < 1 || m % 2 == 0) throw std::invalid_argument("local_coherence: M must be odd and >= 1");
    const int h = m / 2;
    double total = 0.0;
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            double re = 0.0, im = 0.0;
            for (int dy = -h; dy <= h; ++dy) {
                for (int dx = -h; dx <= h; ++dx) {
                    double theta =
                        decode_phase(sample_phase(map, x + dx, y + dy, BoundaryMode::replicate));
                    re += std::cos(theta);
                    im += std::sin(theta);
                }
            }
            total += std::sqrt(re * re + im * im) / static_cast<double>(m * m);
        }
    }
    return total / static_cast<double>(map.pixels());
}

PhaseMap make_striped_map(int width, int height, int period, double amplitude) {
    if (period < 2) throw std::invalid_argument("make_striped_map: period must be >= 2");
    PhaseMap map(width, height);
    int half = period / 2;
    for (int y = 0; y < height; ++y) {
        bool high = (y / half) % 2 == 0;
        PhaseQ15 v = encode_phase(high ? amplitude : -amplitude);
        for (int x = 0; x < width; ++x) map.at(x, y) = v;
    }
    return map;
}

PhaseMap make_random_map(int width, int height, uint64_t seed) {
    PhaseMap map(width, height);
    NoiseStream rng(seed);
    for (auto& p : map.data) {
        p = encode_phase((rng.next_uniform() * 2.0 - 1.0) * kPi);
    }
    return map;
}

PhaseMap make_uniform_map(int width, int height, double theta) {
    PhaseMap map(width, height);
    PhaseQ15 v = encode_phase(theta);
    for (auto& p : map.data) p = v;
    return map;
}

}  // namespace sakura
