#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sakura/drift.hpp"
#include "sakura/systolic.hpp"

// Euler-Maruyama forward/reverse Kuramoto orientation diffusion over phase
// maps: seeded Gaussian noise, piecewise-linear schedules, a score hook, the
// trivial-drift baseline and the local-coherence metric.

namespace sakura {

// Piecewise-linear table over normalized time t in [0, 1].
struct ScheduleTable {
    std::vector<std::pair<double, double>> points;  // (t, value), sorted by t

    double eval(double t) const;
    void validate(const std::string& name, bool non_negative) const;
};

struct Schedule {
    ScheduleTable k;          // coupling strength K(t)
    ScheduleTable k_ref;      // reference gain K_ref(t)
    ScheduleTable d;          // diffusion coefficient D(t)
    double psi_ref = 0.0;
    double dt = 0.01;
    int steps = 100;

    void validate() const;

    // Placeholder ramps: K 1 -> 0, K_ref 0 -> 1, D constant 0.1, 100 steps of
    // dt = 0.01. User-overridable; not tied to any particular dataset.
    static Schedule defaults();
};

// Deterministic standard-normal stream: splitmix64 counter generator uniforms
// fed through the Marsaglia polar transform.
class NoiseStream {
public:
    explicit NoiseStream(uint64_t seed) : state_(seed) {}

    double next_uniform();  // [0, 1)
    double next_normal();

    // One variate per pixel in raster order, so engine choice never changes
    // the noise assignment.
    std::vector<double> normal_field(size_t count);

private:
    uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

enum class DriftEngine { oracle, fixed, systolic };

DriftEngine engine_from_string(const std::string& name);
std::string to_string(DriftEngine engine);

// Per-step context shared by the stepping functions.
struct StepContext {
    DriftEngine engine = DriftEngine::oracle;
    BoundaryMode boundary = BoundaryMode::replicate;
    ArrayConfig config;                // used by the systolic engine
    const QuarterWaveLut* lut = nullptr;  // required by fixed/systolic engines
};

// One Euler-Maruyama step of the forward SDE:
//   theta' = wrap(theta + u(theta, t) dt + sqrt(2 D(t) dt) xi).
PhaseMap forward_step(const PhaseMap& map, const Schedule& schedule, double t,
                      NoiseStream& noise, const StepContext& ctx);

// Reverse-time step: the externally supplied score field (zero when absent)
// is merged into the deterministic drift before integration.
PhaseMap reverse_step(const PhaseMap& map, const Schedule& schedule, double t,
                      NoiseStream& noise, const StepContext& ctx,
                      const DriftField* score = nullptr);

// Trivial-drift baseline theta' = wrap(theta - beta/2 * theta * dt + noise),
// treating the phase value itself as the contracted state.
PhaseMap trivial_drift_step(const PhaseMap& map, double beta, double diffusion, double dt,
                            NoiseStream& noise);

// Mean over pixels of |sum_{j in N_i} e^{i theta_j}| / M^2, center included,
// replicate boundary. 1.0 means perfect local alignment.
double local_coherence(const PhaseMap& map, int m);

// Deterministic map generators for experiments and the CLI.
PhaseMap make_striped_map(int width, int height, int period, double amplitude);
PhaseMap make_random_map(int width, int height, uint64_t seed);
PhaseMap make_uniform_map(int width, int height, double theta);

}  // namespace sakura
