// Command-line front end: drift kernel runs, cycle-accurate simulation, DSE
// sweeps and fitting, diffusion trajectories, and the self-test suite.
//
// Exit codes: 0 success, 1 self-test/verification failure, 2 I/O or format
// error, 3 parameter validation error.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "sakura/dse.hpp"
#include "sakura/io.hpp"
#include "sakura/sampler.hpp"
#include "sakura/systolic.hpp"

namespace fs = std::filesystem;
using namespace sakura;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr double kDefaultTrivialBeta = 0.1;
constexpr int kDefaultStripePeriod = 8;

struct DriftArgs {
    std::string input;
    std::string output;
    std::string csv;
    std::string engine = "oracle";
    std::string boundary = "replicate";
    double k = 1.0;
    double k_ref = 0.0;
    double psi_ref = 0.0;
    int m = 5;
    int nh = 20;
    int nw = 5;
};

struct SimulateArgs {
    std::string input;
    std::string output;
    std::string trace;
    std::string event_log;
    std::string boundary = "replicate";
    double k = 1.0;
    double k_ref = 0.0;
    double psi_ref = 0.0;
    int m = 5;
    int nh = 20;
    int nw = 5;
    double fclk_hz = 1e8;
};

struct SweepArgs {
    std::string coeffs;
    std::string measurements;
    std::string output;
    std::string budgets;
    std::string grid = "5:25:5";
    int m = 5;
    double fclk_hz = 1e8;
    double sys_pixels = 9216.0;
    int jobs = 1;
};

struct SampleArgs {
    std::string input;
    std::string gen;
    std::string schedule_path;
    std::string snapshot_dir = ".";
    std::string direction = "forward";
    std::string engine = "oracle";
    std::string boundary = "replicate";
    std::string drift_kind = "kuramoto";
    int width = 96;
    int height = 96;
    int period = kDefaultStripePeriod;
    double amplitude = kPi / 4;
    double value = 0.0;
    uint64_t seed = 1;
    int steps = -1;
    double dt = 0.0;
    double beta = kDefaultTrivialBeta;
    int nh = 20;
    int nw = 5;
    int m = 5;
};

DriftParams make_params(double k, double k_ref, double psi_ref, int m) {
    DriftParams p;
    p.k = k;
    p.k_ref = k_ref;
    p.psi_ref = psi_ref;
    p.m = m;
    p.validate();
    return p;
}

int run_drift(const DriftArgs& args) {
    PhaseMap map = io::read_phase_map(args.input);
    DriftParams params = make_params(args.k, args.k_ref, args.psi_ref, args.m);
    BoundaryMode boundary = boundary_from_string(args.boundary);
    DriftEngine engine = engine_from_string(args.engine);

    io::RunManifest manifest;
    manifest.command = "drift";
    manifest.tool_version = kVersion;
    manifest.add_param("engine", args.engine);
    manifest.add_param("boundary", args.boundary);
    manifest.add_param("k", std::to_string(params.k));
    manifest.add_param("k_ref", std::to_string(params.k_ref));
    manifest.add_param("psi_ref", std::to_string(params.psi_ref));
    manifest.add_param("m", std::to_string(params.m));
    manifest.add_input(args.input);

    if (engine == DriftEngine::oracle) {
        // direct pairwise form: sin(theta_j - theta_i) vanishes exactly on
        // uniform maps
        DriftField field = drift_direct(map, params, boundary);
        io::write_kdf1_real(field, args.output);
        if (!args.csv.empty()) io::write_drift_csv_real(field, args.csv);
    } else {
        QuantizedDriftParams q = QuantizedDriftParams::from(params);
        QuarterWaveLut lut = build_lut();
        FixedDriftField field;
        if (engine == DriftEngine::fixed) {
            field = drift_fixed(map, q, boundary, lut);
        } else {
            ArrayConfig config{args.nh, args.nw, args.m, 1e8};
            field = run_image(map, config, q, boundary, lut).field;
            manifest.add_param("nh", std::to_string(args.nh));
            manifest.add_param("nw", std::to_string(args.nw));
        }
        if (field.sat.sticky()) {
            std::fprintf(stderr, "warning: %llu accumulator saturation event(s)\n",
                         static_cast<unsigned long long>(field.sat.count));
        }
        io::write_kdf1_fixed(field, args.output);
        if (!args.csv.empty()) io::write_drift_csv_fixed(field, args.csv);
    }

    manifest.add_output(args.output);
    if (!args.csv.empty()) manifest.add_output(args.csv);
    io::write_manifest(manifest, args.output + ".manifest");
    return 0;
}

int run_simulate(const SimulateArgs& args) {
    if (args.nh < 1 || args.nh > 1024 || args.nw < 1 || args.nw > 1024) {
        throw std::invalid_argument("simulate: N_h and N_w must lie in [1, 1024]");
    }
    PhaseMap map = io::read_phase_map(args.input);
    DriftParams params = make_params(args.k, args.k_ref, args.psi_ref, args.m);
    ArrayConfig config{args.nh, args.nw, args.m, args.fclk_hz};
    config.validate();
    QuantizedDriftParams q = QuantizedDriftParams::from(params);
    QuarterWaveLut lut = build_lut();

    std::ofstream event_out;
    std::ostream* event_sink = nullptr;
    if (!args.event_log.empty()) {
        event_out.open(args.event_log);
        if (!event_out) throw io::FormatError("cannot open event log: " + args.event_log);
        event_sink = &event_out;
    }

    auto wall_start = std::chrono::steady_clock::now();
    RunImageResult result =
        run_image(map, config, q, boundary_from_string(args.boundary), lut, event_sink);
    auto wall_end = std::chrono::steady_clock::now();
    double wall_s = std::chrono::duration<double>(wall_end - wall_start).count();

    std::printf("tiles: %zu\n", result.trace.per_tile.size());
    std::printf("total cycles: %llu\n",
                static_cast<unsigned long long>(result.trace.total_cycles));
    std::printf("modeled time: %.6g s at %.6g Hz\n", result.trace.seconds(config.fclk_hz),
                config.fclk_hz);
    std::printf("wall clock: %.3f s\n", wall_s);

    io::RunManifest manifest;
    manifest.command = "simulate";
    manifest.tool_version = kVersion;
    manifest.add_param("nh", std::to_string(args.nh));
    manifest.add_param("nw", std::to_string(args.nw));
    manifest.add_param("m", std::to_string(args.m));
    manifest.add_param("fclk_hz", std::to_string(args.fclk_hz));
    manifest.add_param("boundary", args.boundary);
    manifest.add_param("k", std::to_string(params.k));
    manifest.add_param("k_ref", std::to_string(params.k_ref));
    manifest.add_param("psi_ref", std::to_string(params.psi_ref));
    manifest.add_input(args.input);

    std::string manifest_anchor;
    if (!args.trace.empty()) {
        std::ostringstream trace_text;
        write_trace_csv(result.trace, trace_text);
        io::write_file_atomic(args.trace, trace_text.str());
        manifest.add_output(args.trace);
        manifest_anchor = args.trace;
    }
    if (!args.output.empty()) {
        io::write_kdf1_fixed(result.field, args.output);
        manifest.add_output(args.output);
        if (manifest_anchor.empty()) manifest_anchor = args.output;
    }
    if (!args.event_log.empty()) {
        event_out.close();
        manifest.add_output(args.event_log);
    }
    if (!manifest_anchor.empty()) io::write_manifest(manifest, manifest_anchor + ".manifest");
    return 0;
}

std::vector<int> parse_grid(const std::string& spec) {
    int lo, hi, step;
    if (std::sscanf(spec.c_str(), "%d:%d:%d", &lo, &hi, &step) != 3 || lo < 1 || hi < lo
        || step < 1) {
        throw std::invalid_argument("sweep: bad --grid spec (want min:max:step): " + spec);
    }
    std::vector<int> values;
    for (int v = lo; v <= hi; v += step) values.push_back(v);
    return values;
}

std::vector<double> parse_budgets(const std::string& spec) {
    std::vector<double> budgets;
    if (spec.empty()) return budgets;
    std::istringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            budgets.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw std::invalid_argument("sweep: bad budget value: " + tok);
        }
    }
    return budgets;
}

int run_sweep(const SweepArgs& args) {
    if (args.coeffs.empty() == args.measurements.empty()) {
        throw std::invalid_argument("sweep: give exactly one of --coeffs or --measurements");
    }
    if (args.jobs < 1) throw std::invalid_argument("sweep: --jobs must be >= 1");

    dse::SweepInputs inputs;
    inputs.sys_pixels = args.sys_pixels;

    io::RunManifest manifest;
    manifest.command = "sweep";
    manifest.tool_version = kVersion;
    manifest.add_param("grid", args.grid);
    manifest.add_param("m", std::to_string(args.m));
    manifest.add_param("fclk_hz", std::to_string(args.fclk_hz));
    manifest.add_param("jobs", std::to_string(args.jobs));

    if (!args.coeffs.empty()) {
        io::CoefficientFile file = io::read_coefficients(args.coeffs);
        inputs.power = file.power;
        inputs.area = file.area;
        manifest.add_input(args.coeffs);
    } else {
        auto samples = io::read_measurements_csv(args.measurements);
        auto [power, power_r2] = dse::fit_bilinear(samples, dse::FitTarget::power);
        auto [area, area_r2] = dse::fit_bilinear(samples, dse::FitTarget::area);
        std::printf("power fit: R^2 = %.6f\n", power_r2);
        std::printf("area fit:  R^2 = %.6f\n", area_r2);
        if (!power.all_non_negative() || !area.all_non_negative()) {
            std::fprintf(stderr, "warning: fitted coefficients include negative values\n");
        }
        inputs.power = power;
        inputs.area = area;
        inputs.overlay = samples;
        manifest.add_input(args.measurements);
    }

    std::vector<ArrayConfig> configs;
    for (int nh : parse_grid(args.grid)) {
        for (int nw : parse_grid(args.grid)) {
            configs.push_back(ArrayConfig{nh, nw, args.m, args.fclk_hz});
        }
    }

    auto records = dse::evaluate_sweep(configs, inputs, args.jobs);
    std::vector<double> budgets = parse_budgets(args.budgets);
    auto winners = dse::pareto_frontier(records, budgets);

    for (size_t i = 0; i < budgets.size(); ++i) {
        if (winners[i].has_value()) {
            const dse::SweepRecord& w = records[*winners[i]];
            std::printf("budget %.6g um^2: best H%dW%d, E_px = %.6g J, area = %.6g um^2\n",
                        budgets[i], w.nh, w.nw, w.epx_j, w.area_um2);
        } else {
            std::printf("budget %.6g um^2: no feasible configuration\n", budgets[i]);
        }
    }

    if (!args.output.empty()) {
        io::write_sweep_csv(records, args.output, true);
        manifest.add_output(args.output);
        io::write_manifest(manifest, args.output + ".manifest");
    }
    return 0;
}

int run_sample(const SampleArgs& args) {
    Schedule schedule =
        args.schedule_path.empty() ? Schedule::defaults() : io::read_schedule(args.schedule_path);
    if (args.steps >= 0) schedule.steps = args.steps;
    if (args.dt > 0.0) schedule.dt = args.dt;
    schedule.validate();

    bool forward;
    if (args.direction == "forward") {
        forward = true;
    } else if (args.direction == "reverse") {
        forward = false;
    } else {
        throw std::invalid_argument("sample: --direction must be forward or reverse");
    }
    if (args.drift_kind != "kuramoto" && args.drift_kind != "trivial") {
        throw std::invalid_argument("sample: --drift must be kuramoto or trivial");
    }

    PhaseMap map(1, 1);
    if (!args.input.empty()) {
        map = io::read_phase_map(args.input);
    } else if (args.gen == "striped") {
        map = make_striped_map(args.width, args.height, args.period, args.amplitude);
    } else if (args.gen == "random") {
        map = make_random_map(args.width, args.height, args.seed ^ 0x9E3779B97F4A7C15ull);
    } else if (args.gen == "uniform") {
        map = make_uniform_map(args.width, args.height, args.value);
    } else {
        throw std::invalid_argument("sample: give --input or --gen striped|random|uniform");
    }

    StepContext ctx;
    ctx.engine = engine_from_string(args.engine);
    ctx.boundary = boundary_from_string(args.boundary);
    ctx.config = ArrayConfig{args.nh, args.nw, args.m, 1e8};
    QuarterWaveLut lut;
    if (ctx.engine != DriftEngine::oracle) {
        lut = build_lut();
        ctx.lut = &lut;
    }

    fs::create_directories(args.snapshot_dir);
    auto snapshot_path = [&](int index) {
        char name[32];
        std::snprintf(name, sizeof name, "snapshot_%04d.kpm", index);
        return (fs::path(args.snapshot_dir) / name).string();
    };

    io::RunManifest manifest;
    manifest.command = "sample";
    manifest.tool_version = kVersion;
    manifest.add_param("direction", args.direction);
    manifest.add_param("drift", args.drift_kind);
    manifest.add_param("engine", args.engine);
    manifest.add_param("boundary", args.boundary);
    manifest.add_param("seed", std::to_string(args.seed));
    manifest.add_param("steps", std::to_string(schedule.steps));
    manifest.add_param("dt", std::to_string(schedule.dt));
    if (args.drift_kind == "trivial") manifest.add_param("beta", std::to_string(args.beta));
    if (!args.input.empty()) {
        manifest.add_input(args.input);
    } else {
        manifest.add_param("gen", args.gen);
        manifest.add_param("width", std::to_string(args.width));
        manifest.add_param("height", std::to_string(args.height));
    }
    if (!args.schedule_path.empty()) manifest.add_input(args.schedule_path);

    NoiseStream noise(args.seed);
    std::vector<std::pair<double, double>> coherence;

    io::write_kpm1(map, snapshot_path(0));
    coherence.emplace_back(forward ? 0.0 : 1.0, local_coherence(map, args.m));

    for (int step = 0; step < schedule.steps; ++step) {
        double t = forward ? step * schedule.dt : 1.0 - step * schedule.dt;
        if (args.drift_kind == "trivial") {
            map = trivial_drift_step(map, args.beta, schedule.d.eval(t), schedule.dt, noise);
        } else if (forward) {
            map = forward_step(map, schedule, t, noise, ctx);
        } else {
            map = reverse_step(map, schedule, t, noise, ctx);
        }
        io::write_kpm1(map, snapshot_path(step + 1));
        double t_next = forward ? (step + 1) * schedule.dt : 1.0 - (step + 1) * schedule.dt;
        coherence.emplace_back(t_next, local_coherence(map, args.m));
    }

    std::string coherence_path = (fs::path(args.snapshot_dir) / "coherence.csv").string();
    io::write_coherence_csv(coherence, coherence_path);

    for (int i = 0; i <= schedule.steps; ++i) manifest.add_output(snapshot_path(i));
    manifest.add_output(coherence_path);
    io::write_manifest(manifest, (fs::path(args.snapshot_dir) / "run.manifest").string());

    std::printf("wrote %d snapshot(s) and %s\n", schedule.steps + 1, coherence_path.c_str());
    return 0;
}

int run_lutdump(const std::string& output) {
    QuarterWaveLut lut = build_lut();
    std::ostringstream text;
    dump_lut_csv(lut, text);
    io::write_file_atomic(output, text.str());
    return 0;
}

int run_convert(const std::string& input, const std::string& output) {
    PhaseMap map = io::read_phase_map(input);
    if (output.size() >= 4 && output.substr(output.size() - 4) == ".pgm") {
        io::write_pgm16(map, output);
    } else if (output.size() >= 4 && output.substr(output.size() - 4) == ".kpm") {
        io::write_kpm1(map, output);
    } else {
        throw std::invalid_argument("convert: output must end in .kpm or .pgm");
    }
    io::RunManifest manifest;
    manifest.command = "convert";
    manifest.tool_version = kVersion;
    manifest.add_input(input);
    manifest.add_output(output);
    io::write_manifest(manifest, output + ".manifest");
    return 0;
}

// ---------------------------------------------------------------------------
// selftest: the verification checks behind the acceptance gate, runnable from
// a fresh checkout.

struct CheckReporter {
    int failures = 0;

    void report(const std::string& name, bool ok, const std::string& detail) {
        std::printf("[%s] %-38s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
        if (!ok) ++failures;
    }
};

void check_reformulation(CheckReporter& rep) {
    BoundaryMode modes[4] = {BoundaryMode::replicate, BoundaryMode::reflect, BoundaryMode::wrap,
                             BoundaryMode::zero_phase};
    NoiseStream size_rng(0xACC0001);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        int w = trial == 0 ? 1 : (trial == 1 ? 96 : 1 + static_cast<int>(size_rng.next_uniform() * 95.0));
        int h = trial == 0 ? 1 : (trial == 1 ? 96 : 1 + static_cast<int>(size_rng.next_uniform() * 95.0));
        PhaseMap map = make_random_map(w, h, 0xF00D + trial);
        DriftParams p;
        p.k = 0.25 + size_rng.next_uniform();
        p.k_ref = size_rng.next_uniform();
        p.psi_ref = (size_rng.next_uniform() * 2.0 - 1.0) * kPi;
        DriftField a = drift_direct(map, p, modes[trial % 4]);
        DriftField b = drift_reformulated(map, p, modes[trial % 4]);
        for (size_t i = 0; i < a.data.size(); ++i) {
            worst = std::max(worst, std::abs(a.data[i] - b.data[i]));
        }
    }
    char detail[80];
    std::snprintf(detail, sizeof detail, "max |direct - reformulated| = %.3g", worst);
    rep.report("reformulation identity", worst <= 1e-12, detail);
}

void check_cycles(CheckReporter& rep, const QuarterWaveLut& lut) {
    PhaseMap map = make_random_map(96, 96, 0xACC0002);
    QuantizedDriftParams q = QuantizedDriftParams::from(make_params(1.0, 0.5, 0.2, 5));
    bool ok = true;
    uint64_t h20w5_total = 0;
    for (int nh = 5; nh <= 25 && ok; nh += 5) {
        for (int nw = 5; nw <= 25; nw += 5) {
            ArrayConfig config{nh, nw, 5, 1e8};
            RunImageResult r = run_image(map, config, q, BoundaryMode::replicate, lut);
            for (const TileCycles& t : r.trace.per_tile) {
                if (t.total() != nw + 26) {
                    ok = false;
                    std::fprintf(stderr, "cycle mismatch at H%dW%d: %d != %d\n", nh, nw,
                                 t.total(), nw + 26);
                    break;
                }
            }
            if (nh == 20 && nw == 5) h20w5_total = r.trace.total_cycles;
            if (!ok) break;
        }
    }
    ok = ok && h20w5_total == 3100;
    char detail[80];
    std::snprintf(detail, sizeof detail, "25 configs, H20W5 total = %llu",
                  static_cast<unsigned long long>(h20w5_total));
    rep.report("cycle exactness (N_w + 26)", ok, detail);
}

void check_bit_exactness(CheckReporter& rep, const QuarterWaveLut& lut) {
    QuantizedDriftParams q = QuantizedDriftParams::from(make_params(1.0, 0.6, 0.4, 5));
    bool ok = true;
    for (int nh = 5; nh <= 25 && ok; nh += 5) {
        for (int nw = 5; nw <= 25 && ok; nw += 5) {
            ArrayConfig config{nh, nw, 5, 1e8};
            for (int seed = 0; seed < 5 && ok; ++seed) {
                PhaseMap map = make_random_map(96, 96, 0xACC0003 + seed);
                RunImageResult sim = run_image(map, config, q, BoundaryMode::replicate, lut);
                FixedDriftField ref = drift_fixed(map, q, BoundaryMode::replicate, lut);
                for (size_t i = 0; i < ref.data.size(); ++i) {
                    if (sim.field.data[i].raw != ref.data[i].raw) {
                        ok = false;
                        break;
                    }
                }
            }
        }
    }
    rep.report("engine bit-exactness", ok, "25 configs x 5 maps, raw-for-raw");
}

void check_lut(CheckReporter& rep, const QuarterWaveLut& lut) {
    double max_err = 0.0, max_pyth = 0.0;
    for (int raw = -32768; raw <= 32767; ++raw) {
        PhaseQ15 p{static_cast<int16_t>(raw)};
        SinCosQ15 sc = sincos_q15(p, lut);
        double theta = decode_phase(p);
        double s = sc.sin.raw / 32768.0, c = sc.cos.raw / 32768.0;
        max_err = std::max({max_err, std::abs(s - std::sin(theta)), std::abs(c - std::cos(theta))});
        max_pyth = std::max(max_pyth, std::abs(s * s + c * c - 1.0));
    }
    char detail[96];
    std::snprintf(detail, sizeof detail, "max err %.3g (<= 2^-12), pyth %.3g (<= 2^-10)", max_err,
                  max_pyth);
    rep.report("LUT fidelity", max_err <= 0x1.0p-12 && max_pyth <= 0x1.0p-10, detail);
}

void check_fit(CheckReporter& rep, int jobs) {
    (void)jobs;
    dse::ModelCoefficients truth = dse::synthetic_power_coefficients();
    std::vector<dse::MeasurementSample> clean, noisy;
    NoiseStream rng(0xACC0005);
    for (int nh = 5; nh <= 25; nh += 5) {
        for (int nw = 5; nw <= 25; nw += 5) {
            dse::MeasurementSample s;
            s.nh = nh;
            s.nw = nw;
            s.power_w = dse::power_total(truth, nh, nw);
            s.area_um2 = dse::area_total(dse::synthetic_area_coefficients(), nh, nw);
            clean.push_back(s);
            s.power_w *= 1.0 + 0.001 * (2.0 * rng.next_uniform() - 1.0);
            s.area_um2 *= 1.0 + 0.001 * (2.0 * rng.next_uniform() - 1.0);
            noisy.push_back(s);
        }
    }
    auto [cfit, cr2] = dse::fit_bilinear(clean, dse::FitTarget::power);
    bool exact = std::abs(cfit.p_hw - truth.p_hw) <= 1e-9 * truth.p_hw
                 && std::abs(cfit.p_w - truth.p_w) <= 1e-9 * truth.p_w
                 && std::abs(cfit.p_h - truth.p_h) <= 1e-9 * truth.p_h
                 && std::abs(cfit.p_fixed - truth.p_fixed) <= 1e-9 * truth.p_fixed;
    auto [nfit, nr2] = dse::fit_bilinear(noisy, dse::FitTarget::power);
    (void)nfit;
    char detail[96];
    std::snprintf(detail, sizeof detail, "clean R^2 = %.9f, 0.1%% noise R^2 = %.6f", cr2, nr2);
    rep.report("bilinear model fit", exact && cr2 > 1.0 - 1e-12 && nr2 > 0.999, detail);
}

void check_optimal_width(CheckReporter& rep) {
    NoiseStream rng(0xACC0006);
    bool ok = true;
    double worst = 0.0;
    int checked = 0;
    for (int trial = 0; trial < 1000 || checked < 1000; ++trial) {
        dse::ModelCoefficients p{1e-5 + 1e-3 * rng.next_uniform(), 1e-5 + 1e-2 * rng.next_uniform(),
                                 1e-5 + 1e-2 * rng.next_uniform(), 1e-5 + 1e-1 * rng.next_uniform()};
        int nh = 1 + static_cast<int>(rng.next_uniform() * 40.0);
        double star = dse::optimal_width(p, nh, 5);
        if (star < 0.5 || star > 60.0) continue;
        ++checked;

        auto e_of = [&](double w) {
            return (w + 26.0) * (p.p_hw + p.p_w / nh + p.p_h / w + p.p_fixed / (nh * w));
        };
        double a = 1e-3, b = 400.0;
        const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
        double c = b - phi * (b - a), d = a + phi * (b - a);
        while (b - a > 1e-3) {
            if (e_of(c) < e_of(d)) {
                b = d; d = c; c = b - phi * (b - a);
            } else {
                a = c; c = d; d = a + phi * (b - a);
            }
        }
        double numeric = 0.5 * (a + b);
        for (double h : {1e-2, 1e-4}) {
            double f0 = e_of(numeric - h), f1 = e_of(numeric), f2 = e_of(numeric + h);
            double den = f0 - 2.0 * f1 + f2;
            if (den > 0.0) numeric += h * (f0 - f2) / (2.0 * den);
        }
        worst = std::max(worst, std::abs(numeric - star));
        if (std::abs(numeric - star) > 1e-6) ok = false;

        int argmin = 1;
        double best = 1e300;
        for (int nw = 1; nw <= 200; ++nw) {
            double e = dse::energy_px(p, ArrayConfig{nh, nw, 5, 1e8});
            if (e < best) { best = e; argmin = nw; }
        }
        int lo = std::max(1, static_cast<int>(std::floor(star)) - 1);
        int hi = std::min(200, static_cast<int>(std::ceil(star)) + 1);
        if (argmin < lo || argmin > hi) ok = false;
        if (trial > 100000) break;
    }
    char detail[80];
    std::snprintf(detail, sizeof detail, "%d draws, max |numeric - formula| = %.3g", checked,
                  worst);
    rep.report("optimal-width formula", ok, detail);
}

void check_ratios(CheckReporter& rep) {
    dse::BaselineRatios r = dse::baseline_ratios(123.8e-3, 30.38e-3, 641.3e-6, 84.5e-3);
    double epx = dse::system_epx(641.3e-6, 84.5e-3, 9216.0);
    bool ok = std::abs(r.speedup / 192.99 - 1.0) < 0.005
              && std::abs(r.energy_ratio / 69.39 - 1.0) < 0.005
              && std::abs(r.power_ratio / 2.78 - 1.0) < 0.005
              && std::abs(epx / 5.88e-9 - 1.0) < 0.005
              && std::abs((270.57e-9 / epx) / 46.02 - 1.0) < 0.005;
    char detail[96];
    std::snprintf(detail, sizeof detail, "%.2fx / %.2fx / %.2fx, %.3g J/px", r.speedup,
                  r.energy_ratio, r.power_ratio, epx);
    rep.report("baseline ratio arithmetic", ok, detail);
}

void check_structure(CheckReporter& rep) {
    PhaseMap seed_map = make_striped_map(96, 96, kDefaultStripePeriod, kPi / 4);
    Schedule sched = Schedule::defaults();
    StepContext ctx;
    ctx.engine = DriftEngine::oracle;
    NoiseStream nk(0xFEED5EED), nt(0xFEED5EED);
    PhaseMap kuramoto = seed_map, trivial = seed_map;
    bool ok = true;
    double min_margin = 1e9;
    for (int step = 0; step < 100; ++step) {
        double t = step * sched.dt;
        kuramoto = forward_step(kuramoto, sched, t, nk, ctx);
        trivial = trivial_drift_step(trivial, kDefaultTrivialBeta, sched.d.eval(t), sched.dt, nt);
        if (step < 50) {
            double margin = local_coherence(kuramoto, 5) - local_coherence(trivial, 5);
            min_margin = std::min(min_margin, margin);
            if (margin <= 0.0) ok = false;
        }
    }
    char detail[80];
    std::snprintf(detail, sizeof detail, "min margin over first 50 steps = %.4f", min_margin);
    rep.report("structure preservation", ok, detail);
}

void check_energy_shape(CheckReporter& rep) {
    NoiseStream rng(0xACC0009);
    bool ok = true;
    for (int trial = 0; trial < 1000 && ok; ++trial) {
        dse::ModelCoefficients p{1e-3 * rng.next_uniform(), 1e-2 * rng.next_uniform(),
                                 1e-2 * rng.next_uniform(), 1e-1 * rng.next_uniform()};
        int nw = 1 + static_cast<int>(rng.next_uniform() * 30.0);
        if (p.p_w + p.p_fixed / nw > 0.0) {
            double prev = 1e300;
            for (int nh = 1; nh <= 50; ++nh) {
                double e = dse::energy_px(p, ArrayConfig{nh, nw, 5, 1e8});
                if (e >= prev) { ok = false; break; }
                prev = e;
            }
        }
        // unimodality in N_w by exhaustive scan
        int nh = 1 + static_cast<int>(rng.next_uniform() * 30.0);
        bool rising = false;
        double prev = dse::energy_px(p, ArrayConfig{nh, 1, 5, 1e8});
        for (int w = 2; w <= 200; ++w) {
            double e = dse::energy_px(p, ArrayConfig{nh, w, 5, 1e8});
            if (e > prev) rising = true;
            if (rising && e < prev) { ok = false; break; }
            prev = e;
        }
    }
    rep.report("E_px monotonicity and convexity", ok, "1000 coefficient draws");
}

int run_selftest(int jobs) {
    auto start = std::chrono::steady_clock::now();
    QuarterWaveLut lut = build_lut();
    CheckReporter rep;

    check_reformulation(rep);
    check_cycles(rep, lut);
    check_bit_exactness(rep, lut);
    check_lut(rep, lut);
    check_fit(rep, jobs);
    check_optimal_width(rep);
    check_ratios(rep);
    check_structure(rep);
    check_energy_shape(rep);

    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s: %d check(s) failed, %.1f s\n", rep.failures == 0 ? "OK" : "FAILED",
                rep.failures, elapsed);
    return rep.failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sakura: systolic-array model for locally coupled Kuramoto drift"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    DriftArgs drift_args;
    CLI::App* drift = app.add_subcommand("drift", "evaluate the drift kernel over a phase map");
    drift->add_option("--input", drift_args.input, "input phase map (.kpm or .pgm)")->required();
    drift->add_option("--output", drift_args.output, "output drift field (KDF1)")->required();
    drift->add_option("--csv", drift_args.csv, "also write x,y,value CSV");
    drift->add_option("--engine", drift_args.engine, "oracle|fixed|systolic");
    drift->add_option("--boundary", drift_args.boundary, "replicate|reflect|wrap|zero");
    drift->add_option("--k", drift_args.k, "coupling strength K");
    drift->add_option("--kref", drift_args.k_ref, "reference gain K_ref");
    drift->add_option("--psi-ref", drift_args.psi_ref, "reference phase");
    drift->add_option("--m", drift_args.m, "neighborhood side");
    drift->add_option("--nh", drift_args.nh, "PE rows (systolic engine)");
    drift->add_option("--nw", drift_args.nw, "PE columns (systolic engine)");

    SimulateArgs sim_args;
    CLI::App* sim = app.add_subcommand("simulate", "cycle-accurate array simulation");
    sim->add_option("--input", sim_args.input, "input phase map")->required();
    sim->add_option("--nh", sim_args.nh, "PE rows")->required();
    sim->add_option("--nw", sim_args.nw, "PE columns")->required();
    sim->add_option("--m", sim_args.m, "neighborhood side");
    sim->add_option("--fclk-hz", sim_args.fclk_hz, "clock frequency");
    sim->add_option("--boundary", sim_args.boundary, "boundary mode");
    sim->add_option("--k", sim_args.k, "coupling strength K");
    sim->add_option("--kref", sim_args.k_ref, "reference gain");
    sim->add_option("--psi-ref", sim_args.psi_ref, "reference phase");
    sim->add_option("--trace", sim_args.trace, "cycle trace CSV output");
    sim->add_option("--output", sim_args.output, "drift field output (KDF1)");
    sim->add_option("--event-log", sim_args.event_log, "per-cycle event log");

    SweepArgs sweep_args;
    CLI::App* sweep = app.add_subcommand("sweep", "design-space sweep and model fitting");
    sweep->add_option("--coeffs", sweep_args.coeffs, "coefficient file");
    sweep->add_option("--measurements", sweep_args.measurements, "measurement CSV to fit");
    sweep->add_option("--output", sweep_args.output, "sweep CSV output");
    sweep->add_option("--budgets", sweep_args.budgets, "comma-separated area budgets (um^2)");
    sweep->add_option("--grid", sweep_args.grid, "config grid min:max:step");
    sweep->add_option("--m", sweep_args.m, "neighborhood side");
    sweep->add_option("--fclk-hz", sweep_args.fclk_hz, "clock frequency");
    sweep->add_option("--sys-pixels", sweep_args.sys_pixels, "pixels behind system overlay rows");
    sweep->add_option("--jobs", sweep_args.jobs, "sweep worker threads");

    SampleArgs sample_args;
    CLI::App* sample = app.add_subcommand("sample", "run a diffusion trajectory");
    CLI::Option* sample_input = sample->add_option("--input", sample_args.input,
                                                   "initial phase map");
    sample->add_option("--gen", sample_args.gen, "generator: striped|random|uniform")
        ->excludes(sample_input);
    sample->add_option("--width", sample_args.width, "generated map width");
    sample->add_option("--height", sample_args.height, "generated map height");
    sample->add_option("--period", sample_args.period, "stripe period (striped gen)");
    sample->add_option("--amplitude", sample_args.amplitude, "stripe amplitude (striped gen)");
    sample->add_option("--value", sample_args.value, "phase value (uniform gen)");
    sample->add_option("--schedule", sample_args.schedule_path, "schedule file");
    sample->add_option("--seed", sample_args.seed, "noise seed");
    sample->add_option("--steps", sample_args.steps, "step count override");
    sample->add_option("--dt", sample_args.dt, "step size override");
    sample->add_option("--direction", sample_args.direction, "forward|reverse");
    sample->add_option("--engine", sample_args.engine, "oracle|fixed|systolic");
    sample->add_option("--boundary", sample_args.boundary, "boundary mode");
    sample->add_option("--drift", sample_args.drift_kind, "kuramoto|trivial");
    sample->add_option("--beta", sample_args.beta, "trivial-drift contraction rate");
    sample->add_option("--nh", sample_args.nh, "PE rows (systolic engine)");
    sample->add_option("--nw", sample_args.nw, "PE columns (systolic engine)");
    sample->add_option("--m", sample_args.m, "neighborhood side");
    sample->add_option("--snapshot-dir", sample_args.snapshot_dir, "snapshot directory");

    int selftest_jobs = 1;
    CLI::App* selftest = app.add_subcommand("selftest", "run the verification suite");
    selftest->add_option("--jobs", selftest_jobs, "worker threads for sweep checks");

    std::string lut_output;
    CLI::App* lutdump = app.add_subcommand("lutdump", "dump the quarter-wave LUT as CSV");
    lutdump->add_option("--output", lut_output, "CSV path")->required();

    std::string convert_in, convert_out;
    CLI::App* convert = app.add_subcommand("convert", "convert phase maps between .kpm and .pgm");
    convert->add_option("--input", convert_in, "input map (.kpm or .pgm)")->required();
    convert->add_option("--output", convert_out, "output map (.kpm or .pgm)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }

    try {
        if (drift->parsed()) return run_drift(drift_args);
        if (sim->parsed()) return run_simulate(sim_args);
        if (sweep->parsed()) return run_sweep(sweep_args);
        if (sample->parsed()) return run_sample(sample_args);
        if (selftest->parsed()) return run_selftest(selftest_jobs);
        if (lutdump->parsed()) return run_lutdump(lut_output);
        if (convert->parsed()) return run_convert(convert_in, convert_out);
    } catch (const io::FormatError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 1;
    }
    return 0;
}
