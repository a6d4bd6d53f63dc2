#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <string>

#include <json.hpp>

#include "tqs/io.hpp"
#include "tqs/sensor.hpp"
#include "tqs/solver.hpp"
#include "tqs/synth.hpp"

namespace {

std::string g_binary;  // path to the tqs executable, from argv[1]

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run(const std::string& args) {
    const std::string cmd = g_binary + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {};
    RunResult res;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) res.out.append(buf, n);
    const int status = pclose(pipe);
    res.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

std::string tmp_path(const std::string& name) { return ::testing::TempDir() + "cli_" + name; }

std::string bytes_of(const std::string& path) { return tqs::detail::read_file(path); }

}  // namespace

TEST(Cli, HelpExitsClean) {
    EXPECT_EQ(run("--help").code, 0);
    EXPECT_EQ(run("reconstruct --help").code, 0);
}

TEST(Cli, PatternMatchesLibrary) {
    const std::string pat = tmp_path("pat7.nsp");
    ASSERT_EQ(run("pattern --layout 3q-nonreg --size 32x32 --seed 7 -o " + pat).code, 0);
    const auto loaded = tqs::load_pattern(pat);
    const auto want = tqs::generate_pattern(tqs::LayoutKind::ThreeQuarterNonReg, 32, 32, 7);
    EXPECT_EQ(loaded.meaning, want.meaning);
    EXPECT_EQ(loaded.codes, want.codes);
}

TEST(Cli, SimulateMatchesLibraryAndWritesSidecar) {
    const std::string zp = tmp_path("zp.pgm"), pat = tmp_path("pat.nsp");
    const std::string sensor = tmp_path("sensor.pgm");
    tqs::save_pgm(tqs::zoneplate(64, 64), zp);
    ASSERT_EQ(run("pattern --layout 3q-nonreg --size 32x32 --seed 3 -o " + pat).code, 0);
    ASSERT_EQ(run("simulate -i " + zp + " --pattern " + pat + " --layout 3q-nonreg -o " + sensor)
                  .code,
              0);

    const std::string lib = tmp_path("sensor_lib.pgm");
    tqs::save_pgm(tqs::acquire(tqs::load_pgm<tqs::HiResImage>(zp), tqs::load_pattern(pat),
                               tqs::LayoutKind::ThreeQuarterNonReg),
                  lib);
    EXPECT_EQ(bytes_of(sensor), bytes_of(lib));

    const auto side = nlohmann::json::parse(bytes_of(sensor + ".json"));
    EXPECT_EQ(side["layout"], "3q-nonreg");
    EXPECT_EQ(side["seed"], 0);
    EXPECT_EQ(side["noise"]["enabled"], false);
    EXPECT_EQ(side["noise"]["full_well"], 10000.0);
    EXPECT_EQ(side["pattern"], pat);
    EXPECT_EQ(side["input"], zp);
}

TEST(Cli, NoisySimulateIsSeedDeterministic) {
    const std::string zp = tmp_path("nzp.pgm"), pat = tmp_path("npat.nsp");
    tqs::save_pgm(tqs::zoneplate(32, 32), zp);
    ASSERT_EQ(run("pattern --layout quarter --size 16x16 --seed 1 -o " + pat).code, 0);
    const std::string base = "simulate -i " + zp + " --pattern " + pat +
                             " --layout quarter --noise --full-well 2000 --readout-sigma 10";
    const std::string a = tmp_path("na.pgm"), b = tmp_path("nb.pgm"), c = tmp_path("nc.pgm");
    ASSERT_EQ(run(base + " --seed 5 -o " + a).code, 0);
    ASSERT_EQ(run(base + " --seed 5 -o " + b).code, 0);
    ASSERT_EQ(run(base + " --seed 6 -o " + c).code, 0);
    EXPECT_EQ(bytes_of(a), bytes_of(b));
    EXPECT_NE(bytes_of(a), bytes_of(c));
    const auto side = nlohmann::json::parse(bytes_of(a + ".json"));
    EXPECT_EQ(side["noise"]["enabled"], true);
    EXPECT_EQ(side["noise"]["full_well"], 2000.0);
    EXPECT_EQ(side["noise"]["readout_sigma"], 10.0);
}

TEST(Cli, ReconstructMatchesLibraryPipeline) {
    const std::string zp = tmp_path("rzp.pgm"), pat = tmp_path("rpat.nsp");
    const std::string sensor = tmp_path("rsensor.pgm"), rec = tmp_path("rrec.pgm");
    tqs::save_pgm(tqs::zoneplate(64, 64), zp);
    ASSERT_EQ(run("pattern --layout 3q-nonreg --size 32x32 --seed 2 -o " + pat).code, 0);
    ASSERT_EQ(run("simulate -i " + zp + " --pattern " + pat + " --layout 3q-nonreg -o " + sensor)
                  .code,
              0);
    ASSERT_EQ(run("reconstruct -i " + sensor + " --pattern " + pat +
                  " --algo jsde --iters 20 -o " + rec)
                  .code,
              0);

    tqs::JsdeParams params;
    params.iterations = 20;
    const std::string lib = tmp_path("rrec_lib.pgm");
    tqs::save_pgm(tqs::reconstruct(tqs::load_pgm<tqs::SensorImage>(sensor),
                                   tqs::load_pattern(pat), params),
                  lib);
    EXPECT_EQ(bytes_of(rec), bytes_of(lib));
}

TEST(Cli, DefaultsEqualExplicitFlags) {
    const std::string zp = tmp_path("dzp.pgm"), pat = tmp_path("dpat.nsp");
    const std::string sensor = tmp_path("dsensor.pgm");
    tqs::save_pgm(tqs::zoneplate(64, 64), zp);
    ASSERT_EQ(run("pattern --layout 3q-nonreg --size 32x32 --seed 9 -o " + pat).code, 0);
    ASSERT_EQ(run("simulate -i " + zp + " --pattern " + pat + " --layout 3q-nonreg -o " + sensor)
                  .code,
              0);
    const std::string a = tmp_path("da.pgm"), b = tmp_path("db.pgm");
    ASSERT_EQ(run("reconstruct -i " + sensor + " --pattern " + pat +
                  " --algo jsde --iters 20 -o " + a)
                  .code,
              0);
    ASSERT_EQ(run("reconstruct -i " + sensor + " --pattern " + pat +
                  " --algo jsde --block 4 --border 14 --iters 20 --rho 0.7 --gamma 0.5"
                  " --threads 1 -o " +
                  b)
                  .code,
              0);
    EXPECT_EQ(bytes_of(a), bytes_of(b));
}

TEST(Cli, ReconstructThreadCountInvariant) {
    const std::string zp = tmp_path("tzp.pgm"), pat = tmp_path("tpat.nsp");
    const std::string sensor = tmp_path("tsensor.pgm");
    tqs::save_pgm(tqs::zoneplate(64, 64), zp);
    ASSERT_EQ(run("pattern --layout 3q-nonreg --size 32x32 --seed 4 -o " + pat).code, 0);
    ASSERT_EQ(run("simulate -i " + zp + " --pattern " + pat + " --layout 3q-nonreg -o " + sensor)
                  .code,
              0);
    const std::string a = tmp_path("ta.pgm"), b = tmp_path("tb.pgm");
    ASSERT_EQ(run("reconstruct -i " + sensor + " --pattern " + pat +
                  " --algo mp --iters 20 --threads 1 -o " + a)
                  .code,
              0);
    ASSERT_EQ(run("reconstruct -i " + sensor + " --pattern " + pat +
                  " --algo mp --iters 20 --threads 3 -o " + b)
                  .code,
              0);
    EXPECT_EQ(bytes_of(a), bytes_of(b));
}

TEST(Cli, BaselinesNeedNoPattern) {
    const std::string zp = tmp_path("bzp.pgm"), pat = tmp_path("bpat.nsp");
    const std::string sensor = tmp_path("bsensor.pgm");
    tqs::save_pgm(tqs::zoneplate(32, 32), zp);
    ASSERT_EQ(run("pattern --layout large --size 16x16 -o " + pat).code, 0);
    ASSERT_EQ(run("simulate -i " + zp + " --pattern " + pat + " --layout large -o " + sensor).code,
              0);
    EXPECT_EQ(run("reconstruct -i " + sensor + " --algo pe -o " + tmp_path("bpe.pgm")).code, 0);
    EXPECT_EQ(run("reconstruct -i " + sensor + " --algo bicubic -o " + tmp_path("bbc.pgm")).code,
              0);
}

TEST(Cli, EvaluateOutputFormat) {
    const std::string zp = tmp_path("ezp.pgm");
    tqs::save_pgm(tqs::zoneplate(32, 32), zp);
    const auto self = run("evaluate " + zp + " " + zp + " --metrics psnr");
    EXPECT_EQ(self.code, 0);
    EXPECT_EQ(self.out, "psnr,inf\n");

    const std::string other = tmp_path("eother.pgm");
    tqs::save_pgm(tqs::constant(32, 32, 0.5), other);
    const auto both = run("evaluate " + zp + " " + other);
    EXPECT_EQ(both.code, 0);
    EXPECT_EQ(both.out.compare(0, 5, "psnr,"), 0);
    const auto nl = both.out.find('\n');
    ASSERT_NE(nl, std::string::npos);
    EXPECT_EQ(both.out.compare(nl + 1, 5, "ssim,"), 0);
    EXPECT_NO_THROW(std::stod(both.out.substr(5)));
}

TEST(Cli, MtfWritesCsv) {
    const std::string csv = tmp_path("mtf.csv");
    ASSERT_EQ(run("mtf --layout 3q-nonreg --algo pe --freqs 10,90 --size 64x64 --seed 7 -o " + csv)
                  .code,
              0);
    const std::string text = bytes_of(csv);
    ASSERT_EQ(text.compare(0, 30, "rel_freq,contrast,imax,imin\n10"), 0);
    int lines = 0;
    for (char ch : text)
        if (ch == '\n') ++lines;
    EXPECT_EQ(lines, 3);  // header + one row per frequency
    EXPECT_NE(text.find("\n90,"), std::string::npos);
}

TEST(Cli, UsageErrorsExit2) {
    EXPECT_EQ(run("frobnicate").code, 2);                       // unknown subcommand
    EXPECT_EQ(run("pattern --layout 3q-nonreg -o x.nsp").code, 2);  // missing --size
    EXPECT_EQ(run("pattern --layout bogus --size 4x4 -o x.nsp").code, 2);
    EXPECT_EQ(run("pattern --layout large --size 12a34 -o x.nsp").code, 2);
    EXPECT_EQ(run("pattern --layout large --size 0x16 -o x.nsp").code, 2);
    EXPECT_EQ(run("mtf --layout 3q-nonreg --algo pe --size 63x64 -o x.csv").code, 2);

    const std::string zp = tmp_path("uzp.pgm");
    tqs::save_pgm(tqs::zoneplate(16, 16), zp);
    EXPECT_EQ(run("reconstruct -i " + zp + " --algo jsde -o x.pgm").code, 2);  // no --pattern
    EXPECT_EQ(run("evaluate " + zp + " " + zp + " --metrics vmaf").code, 2);
    EXPECT_EQ(run("mtf --layout 3q-nonreg --algo pe --freqs 10,,90 -o x.csv").code, 2);
}

TEST(Cli, DataErrorsExit3) {
    const std::string missing = tmp_path("no-such-file.pgm");
    const std::string pat = tmp_path("xpat.nsp");
    ASSERT_EQ(run("pattern --layout 3q-nonreg --size 8x8 --seed 1 -o " + pat).code, 0);
    EXPECT_EQ(run("simulate -i " + missing + " --pattern " + pat +
                  " --layout 3q-nonreg -o x.pgm")
                  .code,
              3);

    const std::string garbage = tmp_path("garbage.pgm");
    tqs::detail::write_file(garbage, "this is not a pgm");
    EXPECT_EQ(run("reconstruct -i " + garbage + " --algo pe -o x.pgm").code, 3);

    // pattern/sensor size mismatch surfaces as a data error
    const std::string zp = tmp_path("xzp.pgm"), sensor = tmp_path("xsensor.pgm");
    tqs::save_pgm(tqs::zoneplate(32, 32), zp);
    EXPECT_EQ(run("simulate -i " + zp + " --pattern " + pat + " --layout 3q-nonreg -o " + sensor)
                  .code,
              3);

    // kept-meaning pattern cannot drive sparse reconstruction
    const std::string kpat = tmp_path("xkpat.nsp");
    ASSERT_EQ(run("pattern --layout quarter --size 16x16 --seed 1 -o " + kpat).code, 0);
    const std::string qsensor = tmp_path("xqsensor.pgm");
    ASSERT_EQ(run("simulate -i " + zp + " --pattern " + kpat + " --layout quarter -o " + qsensor)
                  .code,
              0);
    EXPECT_EQ(run("reconstruct -i " + qsensor + " --pattern " + kpat + " --algo jsde -o x.pgm")
                  .code,
              3);

    // frequency outside (0,100] is a library-level range error
    EXPECT_EQ(run("mtf --layout 3q-nonreg --algo pe --freqs 150 --size 32x32 -o x.csv").code, 3);

    const std::string ezp = tmp_path("x16.pgm");
    tqs::save_pgm(tqs::zoneplate(16, 16), ezp);
    EXPECT_EQ(run("evaluate " + zp + " " + ezp).code, 3);  // dimension mismatch
}

int main(int argc, char** argv) {
    ::testing::InitGoogleTest(&argc, argv);
    if (argc < 2) {
        std::fprintf(stderr, "usage: test_cli <path-to-tqs-binary>\n");
        return 1;
    }
    g_binary = argv[1];
    return RUN_ALL_TESTS();
}
