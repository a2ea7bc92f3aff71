#include "sakura/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace sakura {
namespace io {

namespace {

constexpr const char* kToolVersion = "0.1.0";

void put_u32le(std::string& out, uint32_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>((v >> 16) & 0xFF));
    out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

uint32_t get_u32le(const std::string& buf, size_t off) {
    return static_cast<uint32_t>(static_cast<unsigned char>(buf[off]))
           | static_cast<uint32_t>(static_cast<unsigned char>(buf[off + 1])) << 8
           | static_cast<uint32_t>(static_cast<unsigned char>(buf[off + 2])) << 16
           | static_cast<uint32_t>(static_cast<unsigned char>(buf[off + 3])) << 24;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string header_with_dims(const char magic[4], int width, int height) {
    std::string out(magic, 4);
    put_u32le(out, static_cast<uint32_t>(width));
    put_u32le(out, static_cast<uint32_t>(height));
    return out;
}

std::pair<uint32_t, uint32_t> parse_header(const std::string& buf, const char magic[4],
                                           const std::string& path) {
    if (buf.size() < 12 || std::memcmp(buf.data(), magic, 4) != 0) {
        throw FormatError("bad magic in " + path + " (expected " + std::string(magic, 4) + ")");
    }
    uint32_t w = get_u32le(buf, 4);
    uint32_t h = get_u32le(buf, 8);
    if (w == 0 || h == 0 || w > (1u << 20) || h > (1u << 20)) {
        throw FormatError("bad dimensions in " + path);
    }
    return {w, h};
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_file_atomic(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError("cannot open for writing: " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw FormatError("short write: " + tmp.string());
    }
    fs::rename(tmp, target);
}

void write_kpm1(const PhaseMap& map, const std::string& path) {
    std::string out = header_with_dims("KPM1", map.width, map.height);
    out.reserve(out.size() + map.pixels() * 2);
    for (const PhaseQ15& p : map.data) {
        auto u = static_cast<uint16_t>(p.raw);
        out.push_back(static_cast<char>(u & 0xFF));
        out.push_back(static_cast<char>((u >> 8) & 0xFF));
    }
    write_file_atomic(path, out);
}

PhaseMap read_kpm1(const std::string& path) {
    std::string buf = read_file(path);
    auto [w, h] = parse_header(buf, "KPM1", path);
    size_t need = 12 + static_cast<size_t>(w) * h * 2;
    if (buf.size() != need) {
        throw FormatError("truncated or oversized payload in " + path);
    }
    PhaseMap map(static_cast<int>(w), static_cast<int>(h));
    for (size_t i = 0; i < map.pixels(); ++i) {
        auto lo = static_cast<uint16_t>(static_cast<unsigned char>(buf[12 + 2 * i]));
        auto hi = static_cast<uint16_t>(static_cast<unsigned char>(buf[13 + 2 * i]));
        map.data[i].raw = static_cast<int16_t>(static_cast<uint16_t>(lo | (hi << 8)));
    }
    return map;
}

void write_kdf1_fixed(const FixedDriftField& field, const std::string& path) {
    std::string out = header_with_dims("KDF1", field.width, field.height);
    for (const AccQ824& v : field.data) {
        put_u32le(out, static_cast<uint32_t>(v.raw));
    }
    write_file_atomic(path, out);
}

void write_kdf1_real(const DriftField& field, const std::string& path) {
    std::string out = header_with_dims("KDF1", field.width, field.height);
    for (double v : field.data) {
        auto f = static_cast<float>(v);
        uint32_t bits;
        std::memcpy(&bits, &f, 4);
        put_u32le(out, bits);
    }
    write_file_atomic(path, out);
}

void write_drift_csv_fixed(const FixedDriftField& field, const std::string& path) {
    std::ostringstream out;
    out << "x,y,value\n";
    for (int y = 0; y < field.height; ++y) {
        for (int x = 0; x < field.width; ++x) {
            out << x << ',' << y << ',' << format_double(acc_to_real(field.at(x, y))) << '\n';
        }
    }
    write_file_atomic(path, out.str());
}

void write_drift_csv_real(const DriftField& field, const std::string& path) {
    std::ostringstream out;
    out << "x,y,value\n";
    for (int y = 0; y < field.height; ++y) {
        for (int x = 0; x < field.width; ++x) {
            out << x << ',' << y << ',' << format_double(field.at(x, y)) << '\n';
        }
    }
    write_file_atomic(path, out.str());
}

void write_pgm16(const PhaseMap& map, const std::string& path) {
    std::ostringstream head;
    head << "P5\n" << map.width << ' ' << map.height << "\n65535\n";
    std::string out = head.str();
    for (const PhaseQ15& p : map.data) {
        // raw + 32768 maps [-32768, 32767] linearly onto [0, 65535]
        auto g = static_cast<uint16_t>(static_cast<int32_t>(p.raw) + 32768);
        out.push_back(static_cast<char>((g >> 8) & 0xFF));  // PGM samples are big-endian
        out.push_back(static_cast<char>(g & 0xFF));
    }
    write_file_atomic(path, out);
}

PhaseMap read_pgm16(const std::string& path) {
    std::string buf = read_file(path);
    size_t pos = 0;
    auto next_token = [&]() -> std::string {
        while (pos < buf.size()) {
            if (std::isspace(static_cast<unsigned char>(buf[pos]))) {
                ++pos;
            } else if (buf[pos] == '#') {
                while (pos < buf.size() && buf[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
        size_t start = pos;
        while (pos < buf.size() && !std::isspace(static_cast<unsigned char>(buf[pos]))) ++pos;
        return buf.substr(start, pos - start);
    };

    if (next_token() != "P5") throw FormatError("not a binary PGM: " + path);
    int w, h, maxval;
    try {
        w = std::stoi(next_token());
        h = std::stoi(next_token());
        maxval = std::stoi(next_token());
    } catch (const std::exception&) {
        throw FormatError("malformed PGM header: " + path);
    }
    if (w < 1 || h < 1) throw FormatError("bad PGM dimensions: " + path);
    if (maxval != 65535) throw FormatError("PGM maxval must be 65535: " + path);
    ++pos;  // single whitespace after maxval
    size_t need = static_cast<size_t>(w) * h * 2;
    if (buf.size() - pos != need) throw FormatError("truncated PGM payload: " + path);

    PhaseMap map(w, h);
    for (size_t i = 0; i < map.pixels(); ++i) {
        auto hi = static_cast<uint16_t>(static_cast<unsigned char>(buf[pos + 2 * i]));
        auto lo = static_cast<uint16_t>(static_cast<unsigned char>(buf[pos + 2 * i + 1]));
        auto g = static_cast<uint16_t>((hi << 8) | lo);
        map.data[i].raw = static_cast<int16_t>(static_cast<int32_t>(g) - 32768);
    }
    return map;
}

PhaseMap read_phase_map(const std::string& path) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".pgm") return read_pgm16(path);
    return read_kpm1(path);
}

std::map<std::string, std::string> read_key_value(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        size_t eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos) {
                throw FormatError(path + ":" + std::to_string(lineno)
                                  + ": expected 'key = value'");
            }
            continue;
        }
        auto trim = [](std::string s) {
            size_t b = s.find_first_not_of(" \t\r");
            size_t e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw FormatError(path + ":" + std::to_string(lineno) + ": empty key");
        }
        kv[key] = value;
    }
    return kv;
}

namespace {

ScheduleTable parse_table(const std::string& text, const std::string& key) {
    ScheduleTable table;
    std::istringstream ss(text);
    std::string tok;
    while (ss >> tok) {
        size_t colon = tok.find(':');
        if (colon == std::string::npos) {
            throw FormatError("schedule table '" + key + "': expected t:value pairs");
        }
        try {
            table.points.emplace_back(std::stod(tok.substr(0, colon)),
                                      std::stod(tok.substr(colon + 1)));
        } catch (const std::exception&) {
            throw FormatError("schedule table '" + key + "': bad number in '" + tok + "'");
        }
    }
    return table;
}

std::string table_to_string(const ScheduleTable& table) {
    std::ostringstream ss;
    for (size_t i = 0; i < table.points.size(); ++i) {
        if (i) ss << ' ';
        ss << format_double(table.points[i].first) << ':'
           << format_double(table.points[i].second);
    }
    return ss.str();
}

double parse_double_kv(const std::map<std::string, std::string>& kv, const std::string& key,
                       double fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
        return std::stod(it->second);
    } catch (const std::exception&) {
        throw FormatError("bad numeric value for '" + key + "': " + it->second);
    }
}

}  // namespace

Schedule read_schedule(const std::string& path) {
    auto kv = read_key_value(path);
    Schedule s = Schedule::defaults();
    if (kv.count("K")) s.k = parse_table(kv.at("K"), "K");
    if (kv.count("K_ref")) s.k_ref = parse_table(kv.at("K_ref"), "K_ref");
    if (kv.count("D")) s.d = parse_table(kv.at("D"), "D");
    s.psi_ref = parse_double_kv(kv, "psi_ref", s.psi_ref);
    s.dt = parse_double_kv(kv, "dt", s.dt);
    s.steps = static_cast<int>(parse_double_kv(kv, "steps", s.steps));
    s.validate();
    return s;
}

void write_schedule(const Schedule& schedule, const std::string& path) {
    std::ostringstream out;
    out << "# sampling schedule (piecewise-linear tables over t in [0,1])\n";
    out << "K = " << table_to_string(schedule.k) << '\n';
    out << "K_ref = " << table_to_string(schedule.k_ref) << '\n';
    out << "D = " << table_to_string(schedule.d) << '\n';
    out << "psi_ref = " << format_double(schedule.psi_ref) << '\n';
    out << "dt = " << format_double(schedule.dt) << '\n';
    out << "steps = " << schedule.steps << '\n';
    write_file_atomic(path, out.str());
}

CoefficientFile read_coefficients(const std::string& path) {
    auto kv = read_key_value(path);
    CoefficientFile c;
    auto need = [&](const std::string& key) {
        auto it = kv.find(key);
        if (it == kv.end()) throw FormatError("coefficient file missing key: " + key);
        try {
            return std::stod(it->second);
        } catch (const std::exception&) {
            throw FormatError("bad numeric value for '" + key + "': " + it->second);
        }
    };
    c.power = {need("p_hw"), need("p_w"), need("p_h"), need("p_fixed")};
    c.area = {need("a_hw"), need("a_w"), need("a_h"), need("a_fixed")};
    return c;
}

void write_coefficients(const CoefficientFile& coeffs, const std::string& path) {
    std::ostringstream out;
    out << "p_hw = " << format_double(coeffs.power.p_hw) << '\n';
    out << "p_w = " << format_double(coeffs.power.p_w) << '\n';
    out << "p_h = " << format_double(coeffs.power.p_h) << '\n';
    out << "p_fixed = " << format_double(coeffs.power.p_fixed) << '\n';
    out << "a_hw = " << format_double(coeffs.area.p_hw) << '\n';
    out << "a_w = " << format_double(coeffs.area.p_w) << '\n';
    out << "a_h = " << format_double(coeffs.area.p_h) << '\n';
    out << "a_fixed = " << format_double(coeffs.area.p_fixed) << '\n';
    write_file_atomic(path, out.str());
}

std::vector<dse::MeasurementSample> read_measurements_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open file: " + path);
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    bool with_sys = false;
    std::vector<dse::MeasurementSample> samples;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!header_seen) {
            if (cells.size() == 4 && cells[0] == "nh" && cells[1] == "nw"
                && cells[2] == "power_w" && cells[3] == "area_um2") {
                with_sys = false;
            } else if (cells.size() == 6 && cells[0] == "nh" && cells[1] == "nw"
                       && cells[2] == "power_w" && cells[3] == "area_um2"
                       && cells[4] == "sys_latency_s" && cells[5] == "sys_power_w") {
                with_sys = true;
            } else {
                throw FormatError(path + ":" + std::to_string(lineno)
                                  + ": bad measurement CSV header");
            }
            header_seen = true;
            continue;
        }
        if (cells.size() != (with_sys ? 6u : 4u)) {
            throw FormatError(path + ":" + std::to_string(lineno) + ": wrong column count");
        }
        dse::MeasurementSample s;
        try {
            s.nh = std::stoi(cells[0]);
            s.nw = std::stoi(cells[1]);
            s.power_w = std::stod(cells[2]);
            s.area_um2 = std::stod(cells[3]);
            if (with_sys) {
                s.sys_latency_s = std::stod(cells[4]);
                s.sys_power_w = std::stod(cells[5]);
            }
        } catch (const std::exception&) {
            throw FormatError(path + ":" + std::to_string(lineno) + ": bad numeric cell");
        }
        try {
            s.validate();
        } catch (const std::exception& e) {
            throw FormatError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        samples.push_back(s);
    }
    if (!header_seen) throw FormatError(path + ": empty measurement CSV");
    return samples;
}

void write_measurements_csv(const std::vector<dse::MeasurementSample>& samples,
                            const std::string& path) {
    bool with_sys = std::any_of(samples.begin(), samples.end(),
                                [](const auto& s) { return s.sys_latency_s.has_value(); });
    std::ostringstream out;
    out << "nh,nw,power_w,area_um2";
    if (with_sys) out << ",sys_latency_s,sys_power_w";
    out << '\n';
    for (const auto& s : samples) {
        out << s.nh << ',' << s.nw << ',' << format_double(s.power_w) << ','
            << format_double(s.area_um2);
        if (with_sys) {
            out << ',' << format_double(s.sys_latency_s.value_or(0.0)) << ','
                << format_double(s.sys_power_w.value_or(0.0));
        }
        out << '\n';
    }
    write_file_atomic(path, out.str());
}

void write_sweep_csv(const std::vector<dse::SweepRecord>& records, const std::string& path,
                     bool with_frontier) {
    bool with_sys = std::any_of(records.begin(), records.end(),
                                [](const auto& r) { return r.sys_epx_j.has_value(); });
    std::ostringstream out;
    out << "nh,nw,ctile,cpx,tpx,power_w,area_um2,epx_j";
    if (with_sys) out << ",sys_epx_j";
    if (with_frontier) out << ",frontier";
    out << '\n';
    for (const auto& r : records) {
        out << r.nh << ',' << r.nw << ',' << r.ctile << ',' << format_double(r.cycles_per_px)
            << ',' << format_double(r.throughput_px) << ',' << format_double(r.power_w) << ','
            << format_double(r.area_um2) << ',' << format_double(r.epx_j);
        if (with_sys) out << ',' << (r.sys_epx_j ? format_double(*r.sys_epx_j) : std::string());
        if (with_frontier) out << ',' << (r.frontier ? 1 : 0);
        out << '\n';
    }
    write_file_atomic(path, out.str());
}

void write_coherence_csv(const std::vector<std::pair<double, double>>& curve,
                         const std::string& path) {
    std::ostringstream out;
    out << "step,t,coherence\n";
    for (size_t i = 0; i < curve.size(); ++i) {
        out << i << ',' << format_double(curve[i].first) << ','
            << format_double(curve[i].second) << '\n';
    }
    write_file_atomic(path, out.str());
}

std::string digest_hex(const void* data, size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    uint64_t h = 0xCBF29CE484222325ull;
    for (size_t i = 0; i < size; ++i) {
        h ^= bytes[i];
        h *= 0x100000001B3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string file_digest(const std::string& path) {
    std::string contents = read_file(path);
    return digest_hex(contents.data(), contents.size());
}

void RunManifest::add_param(const std::string& key, const std::string& value) {
    parameters.emplace_back(key, value);
}

void RunManifest::add_input(const std::string& path) {
    inputs.emplace_back(path, file_digest(path));
}

void RunManifest::add_output(const std::string& path) {
    outputs.emplace_back(path, file_digest(path));
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
    std::ostringstream out;
    out << "command = " << manifest.command << '\n';
    out << "tool_version = "
        << (manifest.tool_version.empty() ? kToolVersion : manifest.tool_version) << '\n';
    for (const auto& [k, v] : manifest.parameters) out << "param." << k << " = " << v << '\n';
    for (const auto& [p, d] : manifest.inputs) {
        out << "input = " << p << '\n' << "input_digest = " << d << '\n';
    }
    for (const auto& [p, d] : manifest.outputs) {
        out << "output = " << p << '\n' << "output_digest = " << d << '\n';
    }
    write_file_atomic(path, out.str());
}

}  // namespace io
}  // namespace sakura
