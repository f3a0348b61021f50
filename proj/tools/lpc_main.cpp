// lpc: packet-loss concealment for tiled feature tensors.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 flowcheck failure.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "lpc/error.hpp"
#include "lpc/pipeline.hpp"

namespace fs = std::filesystem;
using namespace lpc;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitFlowcheck = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::uint64_t default_seed() {
    if (const char* env = std::getenv("LP_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw UsageError(std::string("LP_SEED is not an integer: ") + env);
        }
    }
    return 0;
}

std::string layout_comment(const MosaicLayout& L) {
    std::ostringstream s;
    s << "lpc-layout channels=" << L.original_channels << " channel_height=" << L.channel_height
      << " channel_width=" << L.channel_width << " tile_rows=" << L.tile_rows
      << " tile_cols=" << L.tile_cols;
    return s.str();
}

std::optional<MosaicLayout> parse_layout_comment(const std::vector<std::string>& comments) {
    for (const auto& c : comments) {
        if (c.rfind("lpc-layout", 0) != 0) continue;
        MosaicLayout L;
        std::istringstream in(c.substr(10));
        std::string tok;
        while (in >> tok) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos) continue;
            const auto key = tok.substr(0, eq);
            const std::size_t v = std::stoul(tok.substr(eq + 1));
            if (key == "channels") L.original_channels = v;
            else if (key == "channel_height") L.channel_height = v;
            else if (key == "channel_width") L.channel_width = v;
            else if (key == "tile_rows") L.tile_rows = v;
            else if (key == "tile_cols") L.tile_cols = v;
        }
        return L;
    }
    return std::nullopt;
}

void write_quant(const fs::path& path, const QuantParams& q) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    char buf[80];
    std::snprintf(buf, sizeof buf, "%.9g %.9g\n", q.lo, q.hi);
    out << buf;
}

QuantParams read_quant(const fs::path& path) {
    std::ifstream in(path);
    QuantParams q;
    if (!(in >> q.lo >> q.hi)) throw FormatError("cannot read quantization sidecar " + path.string());
    if (!(q.lo <= q.hi)) throw FormatError("quantization sidecar has lo > hi");
    return q;
}

struct EngineFlags {
    int radius = 3;
    NSParams ns;
    double tau = 10.0;

    void add(CLI::App* app) {
        app->add_option("--radius", radius, "Telea neighborhood radius")->capture_default_str();
        app->add_option("--ns-iterations", ns.iterations, "Navier-Stokes transport iterations")->capture_default_str();
        app->add_option("--ns-step", ns.step_size, "Navier-Stokes transport step size")->capture_default_str();
        app->add_option("--ns-diffusion-every", ns.diffusion_every, "Transport iterations between diffusion passes")->capture_default_str();
        app->add_option("--ns-diffusion-steps", ns.diffusion_steps, "Diffusion steps per pass")->capture_default_str();
        app->add_option("--tau", tau, "SiLRTC threshold in gray levels (all modes)")
            ->capture_default_str();
    }
    EngineParams params() const {
        EngineParams e;
        e.telea.radius = radius;
        e.ns = ns;
        e.silrtc_taus_gray = {tau, tau, tau};
        return e;
    }
};

int cmd_corrupt(const fs::path& tensor_path, double p, std::uint64_t seed, const fs::path& out) {
    const FeatureTensor tensor = read_tensor(tensor_path);
    const Corrupted c = corrupt(tensor, {p, seed});
    ByteGrid mask(c.received.mask.rows(), c.received.mask.cols());
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = c.received.mask[i] ? 255 : 0;

    const std::string stem = out.string();
    write_pgm(stem + ".pgm", c.received.bytes, {layout_comment(c.layout)});
    write_pgm(stem + ".mask.pgm", mask);
    write_quant(stem + ".quant", c.received.params);

    std::size_t lost = 0;
    for (std::size_t r = 0; r < mask.rows(); r += kRowsPerPacket) lost += mask(r, 0) ? 1 : 0;
    std::cerr << "corrupt: " << c.packets_total << " packets, " << lost << " lost; wrote " << stem
              << ".{pgm,mask.pgm,quant}\n";
    return 0;
}

int cmd_recover(const fs::path& mosaic_path, fs::path mask_path, fs::path quant_path,
                const std::string& method_name, const fs::path& out, MosaicLayout override_layout,
                const EngineParams& engine) {
    Method method;
    try {
        method = parse_method(method_name);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const std::string stem = (mosaic_path.parent_path() / mosaic_path.stem()).string();
    if (mask_path.empty()) mask_path = stem + ".mask.pgm";
    if (quant_path.empty()) quant_path = stem + ".quant";

    const PgmImage mosaic = read_pgm(mosaic_path);
    const PgmImage mask_img = read_pgm(mask_path);
    if (!mask_img.image.same_shape(mosaic.image))
        throw FormatError("mask and mosaic sizes differ");
    const QuantParams q = read_quant(quant_path);

    MosaicLayout layout = parse_layout_comment(mosaic.comments).value_or(MosaicLayout{});
    if (override_layout.original_channels) {
        const std::size_t ch = override_layout.original_channels;
        layout = square_layout(ch, override_layout.channel_height, override_layout.channel_width);
    }
    if (layout.original_channels == 0) {
        // No geometry recorded: treat the mosaic as a single channel.
        layout = square_layout(1, mosaic.image.rows(), mosaic.image.cols());
    }
    Mosaic check{RealGrid(mosaic.image.rows(), mosaic.image.cols()), layout};
    check.validate();

    MaskGrid mask(mask_img.image.rows(), mask_img.image.cols());
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = mask_img.image[i] >= 128 ? 1 : 0;

    const RealGrid holed = dequantize(mosaic.image, q);
    const auto t0 = std::chrono::steady_clock::now();
    RealGrid rec = recover_mosaic(holed, mask, layout, q, method, engine);
    const auto t1 = std::chrono::steady_clock::now();
    write_tensor(out, untile(Mosaic{std::move(rec), layout}));
    std::cerr << "recover: method=" << method_name << " time="
              << std::chrono::duration<double>(t1 - t0).count() << " s per tensor; wrote "
              << out.string() << '\n';
    return 0;
}

int cmd_sweep(SweepConfig cfg) {
    const SweepResult result = run_sweep(cfg);
    fs::create_directories(cfg.out_dir);
    {
        std::ofstream csv(cfg.out_dir / "sweep.csv");
        write_sweep_csv(csv, result.rows);
    }
    {
        std::ofstream gains(cfg.out_dir / "gains.csv");
        write_gain_table(gains, result);
    }
    {
        std::ofstream svg(cfg.out_dir / "masked_psnr.svg");
        write_svg_chart(svg, result);
    }
    std::size_t failures = 0;
    for (const auto& r : result.rows) failures += r.status != "ok";
    std::cout << "rows: " << result.rows.size() << " (" << failures << " not ok)\n";
    std::cout << "mean masked PSNR (dB):\n";
    for (const auto& [m, curve] : result.mean_curves) {
        std::printf("  %-14s", to_string(m).c_str());
        for (const auto& [p, v] : curve.points) std::printf("  p=%.2f:%7.2f", p, v);
        std::printf("\n");
    }
    if (!result.gains.empty()) {
        std::cout << "average gain vs none (dB):\n";
        for (const auto& [m, g] : result.gains) std::printf("  %-14s %8.3f\n", to_string(m).c_str(), g);
    }
    std::cout << "wrote " << (cfg.out_dir / "sweep.csv").string() << ", gains.csv, masked_psnr.svg\n";
    return 0;
}

int cmd_flowcheck(double tolerance, const fs::path& out) {
    const auto rows = run_flowcheck(tolerance);
    if (out.empty()) {
        write_flowcheck_csv(std::cout, rows);
    } else {
        std::ofstream f(out);
        if (!f) throw std::runtime_error("cannot write " + out.string());
        write_flowcheck_csv(f, rows);
    }
    std::size_t failed = 0;
    for (const auto& r : rows) failed += !r.result.pass;
    std::cerr << "flowcheck: " << rows.size() - failed << "/" << rows.size() << " PASS (tolerance "
              << tolerance << ")\n";
    return failed ? kExitFlowcheck : 0;
}

int cmd_bench(const FeatureTensor& tensor, double p, std::uint64_t seed, int repeats,
              const std::vector<Method>& methods, const EngineParams& engine) {
    const auto rows = run_bench(tensor, {p, seed}, methods, repeats, engine);
    std::printf("%-14s %12s\n", "method", "median_s");
    double telea = 0.0, ns = 0.0, slow = 0.0;
    for (const auto& r : rows) {
        std::printf("%-14s %12.6f\n", to_string(r.method).c_str(), r.median());
        if (r.method == Method::telea) telea = r.median();
        if (r.method == Method::navier_stokes) ns = r.median();
        if (r.method == Method::silrtc_250) slow = r.median();
    }
    if (telea > 0 && slow > 0) std::printf("telea:silrtc_250 speed ratio %.1fx\n", slow / telea);
    if (ns > 0 && slow > 0) std::printf("navier_stokes:silrtc_250 speed ratio %.1fx\n", slow / ns);
    return 0;
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
    std::vector<Method> out;
    try {
        for (const auto& n : names) out.push_back(parse_method(n));
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Packet-loss concealment for tiled deep-feature tensors"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    try {
        seed = default_seed();
    } catch (const UsageError& e) {
        std::cerr << e.what() << '\n';
        return kExitUsage;
    }
    EngineFlags engine_flags;

    // corrupt
    auto* corrupt_cmd = app.add_subcommand("corrupt", "Tile, quantize, packetize and drop packets");
    fs::path c_tensor, c_out;
    double c_p = 0.1;
    corrupt_cmd->add_option("tensor", c_tensor, "Input LTNS tensor")->required();
    corrupt_cmd->add_option("-p,--loss", c_p, "Packet loss probability")->capture_default_str();
    corrupt_cmd->add_option("--seed", seed, "Loss RNG seed (default: $LP_SEED or 0)");
    corrupt_cmd->add_option("-o,--out", c_out, "Output prefix")->required();

    // recover
    auto* recover_cmd = app.add_subcommand("recover", "Fill lost rows and write an LTNS tensor");
    fs::path r_mosaic, r_mask, r_quant, r_out;
    std::string r_method = "telea";
    MosaicLayout r_layout;
    recover_cmd->add_option("mosaic", r_mosaic, "Holed mosaic (P5 PGM)")->required();
    recover_cmd->add_option("--mask", r_mask, "Mask PGM (default: <mosaic>.mask.pgm)");
    recover_cmd->add_option("--quant", r_quant, "Quantization sidecar (default: <mosaic>.quant)");
    recover_cmd->add_option("-m,--method", r_method,
                            "none|nearest_rows|telea|navier_stokes|silrtc_50|silrtc_250")
        ->capture_default_str();
    recover_cmd->add_option("--channels", r_layout.original_channels, "Override channel count");
    recover_cmd->add_option("--channel-height", r_layout.channel_height, "Override channel height");
    recover_cmd->add_option("--channel-width", r_layout.channel_width, "Override channel width");
    recover_cmd->add_option("-o,--out", r_out, "Output LTNS tensor")->required();
    engine_flags.add(recover_cmd);

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "Loss sweep over tensors, methods and seeds");
    fs::path s_config;
    std::string s_tensors, s_probs, s_methods, s_seeds, s_out;
    std::size_t s_synthetic = 0;
    unsigned s_jobs = 0;
    sweep_cmd->add_option("-c,--config", s_config, "key=value config file");
    sweep_cmd->add_option("--tensors", s_tensors, "Comma-separated LTNS paths");
    sweep_cmd->add_option("--synthetic", s_synthetic, "Add N synthetic corpus tensors");
    sweep_cmd->add_option("--probabilities", s_probs, "Comma-separated loss probabilities");
    sweep_cmd->add_option("--methods", s_methods, "Comma-separated method names");
    sweep_cmd->add_option("--seeds", s_seeds, "Comma-separated seeds");
    sweep_cmd->add_option("-o,--out", s_out, "Output directory");
    sweep_cmd->add_option("-j,--jobs", s_jobs, "Worker threads");
    engine_flags.add(sweep_cmd);

    // flowcheck
    auto* flow_cmd = app.add_subcommand("flowcheck", "Verify flow invariance under network ops");
    double f_tol = 1e-6;
    fs::path f_out;
    flow_cmd->add_option("-t,--tolerance", f_tol, "Largest allowed normalized residual")->capture_default_str();
    flow_cmd->add_option("-o,--out", f_out, "CSV output (default: stdout)");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "Time recovery methods on one tensor");
    fs::path b_tensor;
    double b_p = 0.1;
    int b_repeats = 3;
    std::vector<std::string> b_methods{"telea", "navier_stokes", "silrtc_50", "silrtc_250"};
    bench_cmd->add_option("tensor", b_tensor, "LTNS tensor (default: synthetic 256x64x64)");
    bench_cmd->add_option("-p,--loss", b_p, "Packet loss probability")->capture_default_str();
    bench_cmd->add_option("--seed", seed, "Loss RNG seed (default: $LP_SEED or 0)");
    bench_cmd->add_option("-r,--repeats", b_repeats, "Timed runs per method; the median is reported")->capture_default_str();
    bench_cmd->add_option("--methods", b_methods, "Comma-separated methods to time")
        ->delimiter(',')
        ->capture_default_str();
    engine_flags.add(bench_cmd);

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Write the synthetic corpus as LTNS files");
    fs::path y_dir = "corpus";
    CorpusSpec y_spec;
    synth_cmd->add_option("-o,--out", y_dir, "Output directory")->capture_default_str();
    synth_cmd->add_option("-n,--count", y_spec.count, "Number of tensors")->capture_default_str();
    synth_cmd->add_option("--channels", y_spec.channels, "Channels per tensor")->capture_default_str();
    synth_cmd->add_option("--height", y_spec.height, "Channel height")->capture_default_str();
    synth_cmd->add_option("--width", y_spec.width, "Channel width")->capture_default_str();
    synth_cmd->add_option("--seed", y_spec.seed, "Corpus seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*corrupt_cmd) return cmd_corrupt(c_tensor, c_p, seed, c_out);
        if (*recover_cmd)
            return cmd_recover(r_mosaic, r_mask, r_quant, r_method, r_out, r_layout,
                               engine_flags.params());
        if (*sweep_cmd) {
            SweepConfig cfg;
            cfg.engine = engine_flags.params();
            std::map<std::string, std::string> kv;
            try {
                if (!s_config.empty()) kv = read_key_values(s_config);
                if (sweep_cmd->count("--tensors")) kv["tensors"] = s_tensors;
                if (sweep_cmd->count("--synthetic")) kv["synthetic"] = std::to_string(s_synthetic);
                if (sweep_cmd->count("--probabilities")) kv["probabilities"] = s_probs;
                if (sweep_cmd->count("--methods")) kv["methods"] = s_methods;
                if (sweep_cmd->count("--seeds")) kv["seeds"] = s_seeds;
                if (sweep_cmd->count("--out")) kv["out"] = s_out;
                if (sweep_cmd->count("--jobs")) kv["jobs"] = std::to_string(s_jobs);
                if (!kv.count("seeds") && std::getenv("LP_SEED")) kv["seeds"] = std::to_string(seed);
                apply_settings(cfg, kv);
                cfg.validate();
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            return cmd_sweep(std::move(cfg));
        }
        if (*flow_cmd) return cmd_flowcheck(f_tol, f_out);
        if (*bench_cmd) {
            const auto methods = parse_methods(b_methods);
            const FeatureTensor tensor =
                b_tensor.empty() ? synth_tensor(CorpusKind::bumps, 256, 64, 64, 1) : read_tensor(b_tensor);
            return cmd_bench(tensor, b_p, seed, b_repeats, methods, engine_flags.params());
        }
        if (*synth_cmd) {
            fs::create_directories(y_dir);
            for (const auto& e : synth_corpus(y_spec)) write_tensor(y_dir / (e.name + ".ltns"), e.tensor);
            std::cerr << "synth: wrote " << y_spec.count << " tensors to " << y_dir.string() << '\n';
            return 0;
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
