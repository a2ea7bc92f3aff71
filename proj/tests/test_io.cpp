#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "sakura/io.hpp"
#include "sakura/sampler.hpp"

using namespace sakura;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path()
               / ("sakura-test-" + std::to_string(::getpid()) + "-"
                  + std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

}  // namespace

TEST_CASE("kpm1 round-trip preserves every code") {
    TempDir dir;
    PhaseMap map(256, 256);
    for (int i = 0; i < 65536; ++i) {
        map.data[static_cast<size_t>(i)].raw = static_cast<int16_t>(i - 32768);
    }
    std::string path = dir.file("all.kpm");
    io::write_kpm1(map, path);
    PhaseMap back = io::read_kpm1(path);
    REQUIRE(back.width == 256);
    REQUIRE(back.height == 256);
    for (size_t i = 0; i < map.pixels(); ++i) REQUIRE(back.data[i].raw == map.data[i].raw);
}

TEST_CASE("kpm1 rejects wrong magic and truncation") {
    TempDir dir;
    PhaseMap map = make_random_map(4, 3, 1);
    std::string path = dir.file("map.kpm");
    io::write_kpm1(map, path);

    std::string contents;
    {
        std::ifstream in(path, std::ios::binary);
        contents.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }

    std::string bad_magic = contents;
    bad_magic[0] = 'X';
    io::write_file_atomic(dir.file("bad.kpm"), bad_magic);
    CHECK_THROWS_AS(io::read_kpm1(dir.file("bad.kpm")), io::FormatError);

    io::write_file_atomic(dir.file("short.kpm"), contents.substr(0, contents.size() - 3));
    CHECK_THROWS_AS(io::read_kpm1(dir.file("short.kpm")), io::FormatError);

    CHECK_THROWS_AS(io::read_kpm1(dir.file("absent.kpm")), io::FormatError);
}

TEST_CASE("kdf1 fixed dump carries the raw Q8.24 codes little-endian") {
    TempDir dir;
    FixedDriftField field;
    field.width = 2;
    field.height = 1;
    field.data = {AccQ824{0x01020304}, AccQ824{-2}};
    field.center_sin.resize(2);
    field.center_cos.resize(2);
    std::string path = dir.file("f.kdf");
    io::write_kdf1_fixed(field, path);

    std::ifstream in(path, std::ios::binary);
    std::string buf(std::istreambuf_iterator<char>(in), {});
    REQUIRE(buf.size() == 12 + 8);
    CHECK(buf.substr(0, 4) == "KDF1");
    CHECK(static_cast<unsigned char>(buf[12]) == 0x04);
    CHECK(static_cast<unsigned char>(buf[13]) == 0x03);
    CHECK(static_cast<unsigned char>(buf[14]) == 0x02);
    CHECK(static_cast<unsigned char>(buf[15]) == 0x01);
    CHECK(static_cast<unsigned char>(buf[16]) == 0xFE);
    CHECK(static_cast<unsigned char>(buf[19]) == 0xFF);
}

TEST_CASE("drift field csv exports carry x,y,value rows") {
    TempDir dir;
    DriftField real{2, 2, {0.5, -1.25, 0.0, 3.0}};
    io::write_drift_csv_real(real, dir.file("r.csv"));
    std::string text = slurp_file(dir.file("r.csv"));
    CHECK(text == "x,y,value\n0,0,0.5\n1,0,-1.25\n0,1,0\n1,1,3\n");

    FixedDriftField fx;
    fx.width = 1;
    fx.height = 2;
    fx.data = {AccQ824{1 << 24}, AccQ824{-(1 << 23)}};
    fx.center_sin.resize(2);
    fx.center_cos.resize(2);
    io::write_drift_csv_fixed(fx, dir.file("f.csv"));
    CHECK(slurp_file(dir.file("f.csv")) == "x,y,value\n0,0,1\n0,1,-0.5\n");
}

TEST_CASE("pgm16 round-trip is lossless against Q1.15") {
    TempDir dir;
    PhaseMap map(256, 256);
    for (int i = 0; i < 65536; ++i) {
        map.data[static_cast<size_t>(i)].raw = static_cast<int16_t>(i - 32768);
    }
    std::string path = dir.file("map.pgm");
    io::write_pgm16(map, path);
    PhaseMap back = io::read_pgm16(path);
    for (size_t i = 0; i < map.pixels(); ++i) REQUIRE(back.data[i].raw == map.data[i].raw);

    // read_phase_map dispatches on extension
    PhaseMap again = io::read_phase_map(path);
    CHECK(again.data[123].raw == map.data[123].raw);
}

TEST_CASE("pgm16 rejects 8-bit and malformed files") {
    TempDir dir;
    io::write_file_atomic(dir.file("8bit.pgm"), "P5\n2 2\n255\n\0\0\0\0");
    CHECK_THROWS_AS(io::read_pgm16(dir.file("8bit.pgm")), io::FormatError);
    io::write_file_atomic(dir.file("junk.pgm"), "P6\n1 1\n65535\n..");
    CHECK_THROWS_AS(io::read_pgm16(dir.file("junk.pgm")), io::FormatError);
}

TEST_CASE("key=value parser handles comments and rejects junk lines") {
    TempDir dir;
    io::write_file_atomic(dir.file("ok.txt"),
                          "# comment\nalpha = 1.5\n beta=two words \n\ngamma = 3 # trailing\n");
    auto kv = io::read_key_value(dir.file("ok.txt"));
    CHECK(kv.at("alpha") == "1.5");
    CHECK(kv.at("beta") == "two words");
    CHECK(kv.at("gamma") == "3");

    io::write_file_atomic(dir.file("bad.txt"), "not a pair\n");
    CHECK_THROWS_AS(io::read_key_value(dir.file("bad.txt")), io::FormatError);
}

TEST_CASE("schedule file round-trip") {
    TempDir dir;
    Schedule s = Schedule::defaults();
    s.psi_ref = 0.25;
    s.steps = 42;
    std::string path = dir.file("sched.txt");
    io::write_schedule(s, path);
    Schedule back = io::read_schedule(path);
    CHECK(back.steps == 42);
    CHECK(back.psi_ref == 0.25);
    CHECK(back.dt == s.dt);
    CHECK(back.k.eval(0.0) == 1.0);
    CHECK(back.k.eval(1.0) == 0.0);
    CHECK(back.k_ref.eval(0.5) == doctest::Approx(0.5));
    CHECK(back.d.eval(0.3) == doctest::Approx(0.1));

    io::write_file_atomic(dir.file("bad.txt"), "K = oops\n");
    CHECK_THROWS_AS(io::read_schedule(dir.file("bad.txt")), io::FormatError);

    // validation failures surface as invalid_argument (CLI exit 3)
    io::write_file_atomic(dir.file("neg.txt"), "D = 0:-1\n");
    CHECK_THROWS_AS(io::read_schedule(dir.file("neg.txt")), std::invalid_argument);
}

TEST_CASE("coefficient file round-trip and missing keys") {
    TempDir dir;
    io::CoefficientFile c;
    c.power = dse::synthetic_power_coefficients();
    c.area = dse::synthetic_area_coefficients();
    std::string path = dir.file("coeffs.txt");
    io::write_coefficients(c, path);
    io::CoefficientFile back = io::read_coefficients(path);
    CHECK(back.power.p_hw == c.power.p_hw);
    CHECK(back.power.p_fixed == c.power.p_fixed);
    CHECK(back.area.p_h == c.area.p_h);

    io::write_file_atomic(dir.file("partial.txt"), "p_hw = 1\np_w = 2\np_h = 3\np_fixed = 4\n");
    CHECK_THROWS_AS(io::read_coefficients(dir.file("partial.txt")), io::FormatError);
}

TEST_CASE("measurement csv round-trip, with and without the system overlay") {
    TempDir dir;
    std::vector<dse::MeasurementSample> samples;
    for (int nh = 5; nh <= 10; nh += 5) {
        for (int nw = 5; nw <= 10; nw += 5) {
            dse::MeasurementSample s;
            s.nh = nh;
            s.nw = nw;
            s.power_w = 0.01 * nh;
            s.area_um2 = 100.0 * nw;
            samples.push_back(s);
        }
    }
    std::string plain = dir.file("m.csv");
    io::write_measurements_csv(samples, plain);
    auto back = io::read_measurements_csv(plain);
    REQUIRE(back.size() == samples.size());
    CHECK(back[2].nh == samples[2].nh);
    CHECK(back[2].power_w == samples[2].power_w);
    CHECK_FALSE(back[0].sys_latency_s.has_value());

    samples[0].sys_latency_s = 641.3e-6;
    samples[0].sys_power_w = 84.5e-3;
    samples[1].sys_latency_s = 1e-3;
    samples[1].sys_power_w = 0.1;
    samples[2].sys_latency_s = 1e-3;
    samples[2].sys_power_w = 0.1;
    samples[3].sys_latency_s = 1e-3;
    samples[3].sys_power_w = 0.1;
    std::string with_sys = dir.file("msys.csv");
    io::write_measurements_csv(samples, with_sys);
    auto back2 = io::read_measurements_csv(with_sys);
    REQUIRE(back2[0].sys_latency_s.has_value());
    CHECK(*back2[0].sys_latency_s == doctest::Approx(641.3e-6));

    io::write_file_atomic(dir.file("badhdr.csv"), "a,b,c\n1,2,3\n");
    CHECK_THROWS_AS(io::read_measurements_csv(dir.file("badhdr.csv")), io::FormatError);
    io::write_file_atomic(dir.file("badrow.csv"), "nh,nw,power_w,area_um2\n1,2,x,4\n");
    CHECK_THROWS_AS(io::read_measurements_csv(dir.file("badrow.csv")), io::FormatError);
    io::write_file_atomic(dir.file("negrow.csv"), "nh,nw,power_w,area_um2\n1,2,-0.5,4\n");
    CHECK_THROWS_AS(io::read_measurements_csv(dir.file("negrow.csv")), io::FormatError);
}

TEST_CASE("sweep csv layout") {
    TempDir dir;
    std::vector<dse::SweepRecord> records(1);
    records[0].nh = 20;
    records[0].nw = 5;
    records[0].ctile = 31;
    records[0].cycles_per_px = 0.31;
    records[0].throughput_px = 3.2e8;
    records[0].power_w = 0.05412;
    records[0].area_um2 = 3.5e6;
    records[0].epx_j = 1.6e-10;
    records[0].frontier = true;
    std::string path = dir.file("sweep.csv");
    io::write_sweep_csv(records, path, true);

    std::ifstream in(path);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "nh,nw,ctile,cpx,tpx,power_w,area_um2,epx_j,frontier");
    CHECK(row.substr(0, 10) == "20,5,31,0.");
    CHECK(row.back() == '1');
}

TEST_CASE("digest is stable and content-sensitive") {
    std::string a = io::digest_hex("hello", 5);
    std::string b = io::digest_hex("hello", 5);
    std::string c = io::digest_hex("hellp", 5);
    CHECK(a == b);
    CHECK(a != c);
    CHECK(a.size() == 16);
}

TEST_CASE("manifest lists parameters and digests") {
    TempDir dir;
    std::string data = dir.file("out.bin");
    io::write_file_atomic(data, "payload");

    io::RunManifest m;
    m.command = "drift";
    m.add_param("engine", "fixed");
    m.add_output(data);
    std::string path = dir.file("out.manifest");
    io::write_manifest(m, path);

    std::ifstream in(path);
    std::string text(std::istreambuf_iterator<char>(in), {});
    CHECK(text.find("command = drift") != std::string::npos);
    CHECK(text.find("param.engine = fixed") != std::string::npos);
    CHECK(text.find("output_digest = " + io::file_digest(data)) != std::string::npos);
    CHECK(text.find("tool_version = ") != std::string::npos);
}

TEST_CASE("atomic writes leave no temp file behind") {
    TempDir dir;
    std::string path = dir.file("x.txt");
    io::write_file_atomic(path, "abc");
    CHECK(fs::exists(path));
    CHECK_FALSE(fs::exists(path + ".tmp"));
    io::write_file_atomic(path, "def");
    std::ifstream in(path);
    std::string text(std::istreambuf_iterator<char>(in), {});
    CHECK(text == "def");
}
