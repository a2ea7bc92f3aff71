#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sakura/drift.hpp"
#include "sakura/dse.hpp"
#include "sakura/fixed_point.hpp"
#include "sakura/sampler.hpp"

// File formats and run manifests. Binary formats are little-endian with a
// 12-byte header: 4-byte magic, u32 width, u32 height.

namespace sakura {
namespace io {

// Raised for malformed or truncated inputs (CLI exit code 2).
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// "KPM1": Q1.15 phase samples, row-major, top-left origin.
void write_kpm1(const PhaseMap& map, const std::string& path);
PhaseMap read_kpm1(const std::string& path);

// "KDF1": 32-bit drift samples. Fixed-point fields store Q8.24 raw codes,
// oracle fields store IEEE float32.
void write_kdf1_fixed(const FixedDriftField& field, const std::string& path);
void write_kdf1_real(const DriftField& field, const std::string& path);

// DriftField CSV export: x,y,value.
void write_drift_csv_fixed(const FixedDriftField& field, const std::string& path);
void write_drift_csv_real(const DriftField& field, const std::string& path);

// 16-bit binary PGM (P5, maxval 65535): gray 0 -> -pi, gray 65535 ->
// pi*(1 - 2^-15), lossless against Q1.15.
void write_pgm16(const PhaseMap& map, const std::string& path);
PhaseMap read_pgm16(const std::string& path);

// Reads a phase map by extension: .pgm as 16-bit PGM, anything else as KPM1.
PhaseMap read_phase_map(const std::string& path);

// Flat key = value text with '#' comments.
std::map<std::string, std::string> read_key_value(const std::string& path);

Schedule read_schedule(const std::string& path);
void write_schedule(const Schedule& schedule, const std::string& path);

// Coefficient file carrying both models: keys p_hw,p_w,p_h,p_fixed and
// a_hw,a_w,a_h,a_fixed.
struct CoefficientFile {
    dse::ModelCoefficients power;
    dse::ModelCoefficients area;
};
CoefficientFile read_coefficients(const std::string& path);
void write_coefficients(const CoefficientFile& coeffs, const std::string& path);

// Measurement CSV: header nh,nw,power_w,area_um2[,sys_latency_s,sys_power_w].
std::vector<dse::MeasurementSample> read_measurements_csv(const std::string& path);
void write_measurements_csv(const std::vector<dse::MeasurementSample>& samples,
                            const std::string& path);

// Sweep CSV: nh,nw,ctile,cpx,tpx,power_w,area_um2,epx_j[,sys_epx_j][,frontier].
void write_sweep_csv(const std::vector<dse::SweepRecord>& records, const std::string& path,
                     bool with_frontier);

void write_coherence_csv(const std::vector<std::pair<double, double>>& curve,
                         const std::string& path);  // rows: step index via position, (t, value)

// FNV-1a 64-bit content digest, hex-encoded.
std::string digest_hex(const void* data, size_t size);
std::string file_digest(const std::string& path);

// Run manifest written alongside every output artifact: command, resolved
// parameters and input/output content digests, as flat key = value text.
struct RunManifest {
    std::string command;
    std::string tool_version;
    std::vector<std::pair<std::string, std::string>> parameters;
    std::vector<std::pair<std::string, std::string>> inputs;   // path -> digest
    std::vector<std::pair<std::string, std::string>> outputs;  // path -> digest

    void add_param(const std::string& key, const std::string& value);
    void add_input(const std::string& path);
    void add_output(const std::string& path);
};

void write_manifest(const RunManifest& manifest, const std::string& path);

// Atomic text/binary writes: temp file in the same directory, then rename.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace io
}  // namespace sakura
