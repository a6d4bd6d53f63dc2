// tqs: sensor-layout simulation and 2x reconstruction experiments.
//
// Subcommands: pattern, simulate, reconstruct, evaluate, mtf.
// Exit codes: 0 success, 2 usage error, 3 data/runtime error.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tqs/baselines.hpp"
#include "tqs/image.hpp"
#include "tqs/io.hpp"
#include "tqs/metrics.hpp"
#include "tqs/sensor.hpp"
#include "tqs/solver.hpp"
#include "tqs/synth.hpp"

namespace {

// CLI-level misuse that CLI11's parser cannot catch itself (exit 2).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const std::map<std::string, tqs::LayoutKind>& layout_names() {
    static const std::map<std::string, tqs::LayoutKind> m{
        {"large", tqs::LayoutKind::LargePixel},
        {"quarter", tqs::LayoutKind::QuarterNonReg},
        {"3q-reg", tqs::LayoutKind::ThreeQuarterReg},
        {"3q-nonreg", tqs::LayoutKind::ThreeQuarterNonReg},
    };
    return m;
}

const char* layout_name(tqs::LayoutKind k) {
    switch (k) {
        case tqs::LayoutKind::LargePixel: return "large";
        case tqs::LayoutKind::QuarterNonReg: return "quarter";
        case tqs::LayoutKind::ThreeQuarterReg: return "3q-reg";
        default: return "3q-nonreg";
    }
}

enum class Algo { Jsde, Mp, Pe, Bicubic };

const std::map<std::string, Algo>& algo_names() {
    static const std::map<std::string, Algo> m{
        {"jsde", Algo::Jsde}, {"mp", Algo::Mp}, {"pe", Algo::Pe}, {"bicubic", Algo::Bicubic}};
    return m;
}

std::pair<int, int> parse_size(const std::string& s) {
    const auto x = s.find('x');
    std::size_t a = 0, b = 0;
    int w = 0, h = 0;
    try {
        if (x == std::string::npos) throw std::invalid_argument("");
        w = std::stoi(s.substr(0, x), &a);
        h = std::stoi(s.substr(x + 1), &b);
    } catch (const std::exception&) {
        throw UsageError("--size must look like 128x128, got '" + s + "'");
    }
    if (a != x || b != s.size() - x - 1 || w <= 0 || h <= 0)
        throw UsageError("--size must be two positive integers like 128x128, got '" + s + "'");
    return {w, h};
}

std::string format_value(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string format_freq(double f) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", f);
    return buf;
}

struct PatternCfg {
    tqs::LayoutKind layout{};
    std::string size, out;
    std::uint64_t seed = 0;
};

struct SimulateCfg {
    std::string input, pattern, out;
    tqs::LayoutKind layout{};
    std::uint64_t seed = 0;
    bool noise = false;
    double full_well = 10000.0;
    double readout_sigma = 25.0;
};

struct ReconstructCfg {
    std::string input, pattern, out;
    Algo algo{};
    tqs::JsdeParams params;
    int threads = 1;
};

struct EvaluateCfg {
    std::string ref, test;
    std::string metrics = "psnr,ssim";
};

struct MtfCfg {
    tqs::LayoutKind layout{};
    Algo algo{};
    std::string freqs = "2,10,26,42,58,74,90,98";
    std::string size = "512x512";
    std::string out;
    std::uint64_t seed = 0;
    tqs::JsdeParams params;
    int threads = 1;
};

std::vector<double> parse_double_list(const std::string& s, const char* what) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto comma = s.find(',', pos);
        const std::string tok = s.substr(pos, comma == std::string::npos ? s.npos : comma - pos);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = std::string::npos;
        }
        if (used != tok.size() || tok.empty())
            throw UsageError(std::string(what) + ": bad number '" + tok + "'");
        out.push_back(v);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw UsageError(std::string(what) + ": empty list");
    return out;
}

int run_pattern(const PatternCfg& cfg) {
    const auto [w, h] = parse_size(cfg.size);
    tqs::save_pattern(tqs::generate_pattern(cfg.layout, w, h, cfg.seed), cfg.out);
    return 0;
}

int run_simulate(const SimulateCfg& cfg) {
    const auto hires = tqs::load_pgm<tqs::HiResImage>(cfg.input);
    const auto pattern = tqs::load_pattern(cfg.pattern);
    tqs::SensorImage sensor = tqs::acquire(hires, pattern, cfg.layout);
    tqs::NoiseParams np;
    np.enabled = cfg.noise;
    np.full_well = cfg.full_well;
    np.readout_sigma = cfg.readout_sigma;
    if (np.enabled) sensor = tqs::apply_noise(sensor, cfg.layout, np, cfg.seed);
    tqs::save_pgm(sensor, cfg.out);

    nlohmann::ordered_json side;
    side["layout"] = layout_name(cfg.layout);
    side["seed"] = cfg.seed;
    side["noise"] = {{"enabled", np.enabled},
                     {"full_well", np.full_well},
                     {"readout_sigma", np.readout_sigma}};
    side["pattern"] = cfg.pattern;
    side["input"] = cfg.input;
    tqs::detail::write_file(cfg.out + ".json", side.dump(2) + "\n");
    return 0;
}

int run_reconstruct(const ReconstructCfg& cfg) {
    const auto sensor = tqs::load_pgm<tqs::SensorImage>(cfg.input);
    tqs::HiResImage out;
    switch (cfg.algo) {
        case Algo::Pe:
            out = tqs::pixel_enlargement(sensor);
            break;
        case Algo::Bicubic:
            out = tqs::bicubic_x2(sensor);
            break;
        default: {
            if (cfg.pattern.empty())
                throw UsageError("--pattern is required for jsde/mp reconstruction");
            const auto pattern = tqs::load_pattern(cfg.pattern);
            const auto algo = cfg.algo == Algo::Jsde ? tqs::ReconAlgo::Jsde : tqs::ReconAlgo::Mp;
            out = tqs::reconstruct(sensor, pattern, cfg.params, algo, cfg.threads);
            break;
        }
    }
    tqs::save_pgm(out, cfg.out);
    return 0;
}

int run_evaluate(const EvaluateCfg& cfg) {
    const auto ref = tqs::load_pgm<tqs::HiResImage>(cfg.ref);
    const auto test = tqs::load_pgm<tqs::HiResImage>(cfg.test);
    std::size_t pos = 0;
    std::string rows;
    while (pos <= cfg.metrics.size()) {
        const auto comma = cfg.metrics.find(',', pos);
        const std::string name =
            cfg.metrics.substr(pos, comma == std::string::npos ? cfg.metrics.npos : comma - pos);
        double v = 0.0;
        if (name == "psnr") {
            v = tqs::psnr(ref, test);
        } else if (name == "ssim") {
            v = tqs::ssim(ref, test);
        } else {
            throw UsageError("unknown metric '" + name + "' (expected psnr or ssim)");
        }
        rows += name + "," + format_value(v) + "\n";
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    std::cout << rows;
    return 0;
}

int run_mtf(const MtfCfg& cfg) {
    const auto [X, Y] = parse_size(cfg.size);
    if (X % 2 || Y % 2) throw UsageError("--size dimensions must be even (fine grid)");
    const auto freqs = parse_double_list(cfg.freqs, "--freqs");
    tqs::MtfAlgo algo{};
    switch (cfg.algo) {
        case Algo::Jsde: algo = tqs::MtfAlgo::Jsde; break;
        case Algo::Mp: algo = tqs::MtfAlgo::Mp; break;
        case Algo::Pe: algo = tqs::MtfAlgo::Pe; break;
        case Algo::Bicubic: algo = tqs::MtfAlgo::Bicubic; break;
    }
    const auto points =
        tqs::mtf_sweep(cfg.layout, algo, freqs, cfg.seed, X, Y, cfg.params, cfg.threads);
    std::string csv = "rel_freq,contrast,imax,imin\n";
    for (const auto& p : points)
        csv += format_freq(p.rel_freq) + "," + format_value(p.contrast) + "," +
               format_value(p.imax) + "," + format_value(p.imin) + "\n";
    tqs::detail::write_file(cfg.out, csv);
    return 0;
}

void add_jsde_flags(CLI::App* cmd, tqs::JsdeParams& p, int& threads) {
    cmd->add_option("--block", p.block_size, "Block size B (even)")->capture_default_str();
    cmd->add_option("--border", p.border_width, "Border width W")->capture_default_str();
    cmd->add_option("--iters", p.iterations, "Greedy iterations I")->capture_default_str();
    cmd->add_option("--rho", p.rho, "Weighting decay rho")->capture_default_str();
    cmd->add_option("--gamma", p.gamma, "Deficiency compensation gamma")->capture_default_str();
    cmd->add_option("--threads", threads, "Worker threads (0 = hardware)")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sensor sampling-layout simulation and 2x sparse reconstruction"};
    app.require_subcommand(1);

    const auto layout_tr = CLI::CheckedTransformer(layout_names(), CLI::ignore_case);
    const auto algo_tr = CLI::CheckedTransformer(algo_names(), CLI::ignore_case);

    PatternCfg pat;
    auto* cmd_pattern = app.add_subcommand("pattern", "Generate a sampling pattern file");
    cmd_pattern->add_option("--layout", pat.layout, "Sampling layout")
        ->required()
        ->transform(layout_tr);
    cmd_pattern->add_option("--size", pat.size, "Sensor grid size WxH")->required();
    cmd_pattern->add_option("--seed", pat.seed, "Pattern seed")->capture_default_str();
    cmd_pattern->add_option("-o,--output", pat.out, "Output pattern file")->required();

    SimulateCfg sim;
    auto* cmd_simulate = app.add_subcommand("simulate", "Acquire a sensor image from a fine-grid image");
    cmd_simulate->add_option("-i,--input", sim.input, "Fine-grid input PGM")->required();
    cmd_simulate->add_option("--pattern", sim.pattern, "Pattern file")->required();
    cmd_simulate->add_option("--layout", sim.layout, "Sampling layout")
        ->required()
        ->transform(layout_tr);
    cmd_simulate->add_flag("--noise", sim.noise, "Enable shot + readout noise");
    cmd_simulate->add_option("--full-well", sim.full_well, "Full-well capacity, electrons")
        ->capture_default_str();
    cmd_simulate->add_option("--readout-sigma", sim.readout_sigma, "Readout noise sigma, electrons")
        ->capture_default_str();
    cmd_simulate->add_option("--seed", sim.seed, "Noise seed")->capture_default_str();
    cmd_simulate->add_option("-o,--output", sim.out, "Output sensor PGM")->required();

    ReconstructCfg rec;
    auto* cmd_reconstruct = app.add_subcommand("reconstruct", "Reconstruct the fine grid from a sensor image");
    cmd_reconstruct->add_option("-i,--input", rec.input, "Sensor input PGM")->required();
    cmd_reconstruct->add_option("--pattern", rec.pattern, "Pattern file (required for jsde/mp)");
    cmd_reconstruct->add_option("--algo", rec.algo, "Reconstruction algorithm")
        ->required()
        ->transform(algo_tr);
    add_jsde_flags(cmd_reconstruct, rec.params, rec.threads);
    cmd_reconstruct->add_option("-o,--output", rec.out, "Output fine-grid PGM")->required();

    EvaluateCfg ev;
    auto* cmd_evaluate = app.add_subcommand("evaluate", "Compare two images, print metric,value rows");
    cmd_evaluate->add_option("ref", ev.ref, "Reference PGM")->required();
    cmd_evaluate->add_option("test", ev.test, "Test PGM")->required();
    cmd_evaluate->add_option("--metrics", ev.metrics, "Comma list of psnr,ssim")
        ->capture_default_str();

    MtfCfg mtf;
    auto* cmd_mtf = app.add_subcommand("mtf", "Contrast sweep over sinusoidal line patterns");
    cmd_mtf->add_option("--layout", mtf.layout, "Sampling layout")->required()->transform(layout_tr);
    cmd_mtf->add_option("--algo", mtf.algo, "Reconstruction algorithm")->required()->transform(algo_tr);
    cmd_mtf->add_option("--freqs", mtf.freqs, "Comma list, percent of low-res sampling frequency")
        ->capture_default_str();
    cmd_mtf->add_option("--size", mtf.size, "Fine-grid size WxH (even)")->capture_default_str();
    cmd_mtf->add_option("--seed", mtf.seed, "Pattern seed")->capture_default_str();
    add_jsde_flags(cmd_mtf, mtf.params, mtf.threads);
    cmd_mtf->add_option("-o,--output", mtf.out, "Output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (cmd_pattern->parsed()) return run_pattern(pat);
        if (cmd_simulate->parsed()) return run_simulate(sim);
        if (cmd_reconstruct->parsed()) return run_reconstruct(rec);
        if (cmd_evaluate->parsed()) return run_evaluate(ev);
        if (cmd_mtf->parsed()) return run_mtf(mtf);
    } catch (const UsageError& e) {
        std::cerr << "tqs: usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "tqs: error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
