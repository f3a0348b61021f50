#include "lpc/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "lpc/metrics.hpp"

namespace lpc {

std::string to_string(Method m) {
    switch (m) {
    case Method::none: return "none";
    case Method::nearest_rows: return "nearest_rows";
    case Method::telea: return "telea";
    case Method::navier_stokes: return "navier_stokes";
    case Method::silrtc_50: return "silrtc_50";
    case Method::silrtc_250: return "silrtc_250";
    }
    return "unknown";
}

Method parse_method(const std::string& name) {
    for (Method m : all_methods())
        if (to_string(m) == name) return m;
    throw std::invalid_argument("unknown method '" + name + "'");
}

const std::vector<Method>& all_methods() {
    static const std::vector<Method> methods{Method::none,          Method::nearest_rows,
                                             Method::telea,         Method::navier_stokes,
                                             Method::silrtc_50,     Method::silrtc_250};
    return methods;
}

const std::vector<double>& default_loss_grid() {
    static const std::vector<double> grid{0.05, 0.10, 0.15, 0.20, 0.25, 0.30};
    return grid;
}

Corrupted corrupt(const FeatureTensor& tensor, const ChannelConfig& channel,
                  std::uint32_t frame_id) {
    channel.validate();
    const Mosaic mosaic = tile(tensor);
    const Quantized q = quantize(mosaic.grid);
    const auto packets = packetize(q.bytes, q.params, frame_id);
    const auto survivors = drop(packets, channel);

    Corrupted out;
    out.layout = mosaic.layout;
    out.sent_params = {static_cast<float>(q.params.lo), static_cast<float>(q.params.hi)};
    out.sent_bytes = q.bytes;
    out.packets_total = packets.size();
    out.received = reassemble(survivors, packets.size(), q.bytes.rows(), q.bytes.cols());
    return out;
}

namespace {

Tensor3 mosaic_to_tensor3(const RealGrid& grid, const MosaicLayout& L) {
    Tensor3 t({L.original_channels, L.channel_height, L.channel_width});
    for (std::size_t k = 0; k < L.original_channels; ++k) {
        const std::size_t r0 = (k / L.tile_cols) * L.channel_height;
        const std::size_t c0 = (k % L.tile_cols) * L.channel_width;
        for (std::size_t r = 0; r < L.channel_height; ++r)
            for (std::size_t c = 0; c < L.channel_width; ++c) t(k, r, c) = grid(r0 + r, c0 + c);
    }
    return t;
}

RealGrid recover_silrtc(const MaskedImage& image, const MosaicLayout& layout,
                        const QuantParams& params, int iterations, const EngineParams& engine) {
    const Mosaic check{image.grid, layout};
    check.validate();
    const Tensor3 tensor = mosaic_to_tensor3(image.grid, layout);
    const auto hidden = untile_mask(image.mask, layout);
    ObservationSet omega{tensor.dims, std::vector<std::uint8_t>(hidden.size())};
    for (std::size_t i = 0; i < hidden.size(); ++i) omega.observed[i] = hidden[i] ? 0 : 1;

    SiLRTCParams sp;
    sp.iterations = iterations;
    const double to_data = 1.0 / gray_scale(params);
    for (std::size_t m = 0; m < 3; ++m) sp.taus[m] = engine.silrtc_taus_gray[m] * to_data;
    const Tensor3 completed = silrtc(tensor, omega, sp).tensor;

    // Write back only the hidden entries so known pixels stay bit-identical.
    RealGrid out = image.grid;
    const auto& L = layout;
    for (std::size_t k = 0; k < L.original_channels; ++k) {
        const std::size_t r0 = (k / L.tile_cols) * L.channel_height;
        const std::size_t c0 = (k % L.tile_cols) * L.channel_width;
        for (std::size_t r = 0; r < L.channel_height; ++r)
            for (std::size_t c = 0; c < L.channel_width; ++c)
                if (image.mask(r0 + r, c0 + c)) out(r0 + r, c0 + c) = completed(k, r, c);
    }
    return out;
}

}  // namespace

RealGrid recover_mosaic(const RealGrid& holed, const MaskGrid& mask, const MosaicLayout& layout,
                        const QuantParams& params, Method method, const EngineParams& engine) {
    MaskedImage image{holed, mask};
    image.validate();
    for (std::size_t i = 0; i < image.grid.size(); ++i)
        if (mask[i]) image.grid[i] = 0.0;

    switch (method) {
    case Method::none: return image.grid;
    case Method::nearest_rows: return inpaint_rows_nearest(image);
    case Method::telea: return inpaint_telea(image, engine.telea);
    case Method::navier_stokes: return inpaint_ns(image, engine.ns);
    case Method::silrtc_50: return recover_silrtc(image, layout, params, 50, engine);
    case Method::silrtc_250: return recover_silrtc(image, layout, params, 250, engine);
    }
    throw std::invalid_argument("recover_mosaic: unknown method");
}

Score score(const RealGrid& recovered, const RealGrid& truth, const MaskGrid& loss,
            const MosaicLayout& layout, const QuantParams& params) {
    const MaskGrid coverage = channel_coverage(layout);
    if (!loss.same_shape(coverage)) throw std::invalid_argument("score: mask/layout mismatch");
    MaskGrid lost_pixels(loss.rows(), loss.cols(), 0);
    bool any = false;
    for (std::size_t i = 0; i < loss.size(); ++i) {
        lost_pixels[i] = loss[i] && coverage[i];
        any = any || lost_pixels[i];
    }
    const double peak = kMosaicPeak / gray_scale(params);
    Score s;
    s.masked_psnr_db = any ? masked_psnr(recovered, truth, lost_pixels, peak) : kPsnrCapDb;
    s.psnr_db = masked_psnr(recovered, truth, coverage, peak);
    return s;
}

void SweepConfig::validate() const {
    if (tensors.empty() && !synthetic)
        throw std::invalid_argument("sweep: no input tensors");
    if (synthetic && synthetic->count == 0)
        throw std::invalid_argument("sweep: synthetic corpus is empty");
    if (probabilities.empty() || methods.empty() || seeds.empty())
        throw std::invalid_argument("sweep: probabilities, methods and seeds must be nonempty");
    for (double p : probabilities)
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("sweep: probability outside [0, 1]");
    if (jobs == 0) throw std::invalid_argument("sweep: jobs must be positive");
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (auto t = trim(item); !t.empty()) out.push_back(t);
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double d = 0.0;
    try {
        d = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size()) throw std::invalid_argument("bad number for " + key + ": '" + v + "'");
    return d;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    std::uint64_t n = 0;
    try {
        if (!v.empty() && v.front() != '-') n = std::stoull(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size())
        throw std::invalid_argument("bad integer for " + key + ": '" + v + "'");
    return n;
}

}  // namespace

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) +
                                        ": expected key=value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

void apply_settings(SweepConfig& cfg, const std::map<std::string, std::string>& kv) {
    auto corpus = [&]() -> CorpusSpec& {
        if (!cfg.synthetic) cfg.synthetic = CorpusSpec{};
        return *cfg.synthetic;
    };
    for (const auto& [key, value] : kv) {
        if (key == "tensors") {
            cfg.tensors.clear();
            for (const auto& t : split_list(value)) cfg.tensors.emplace_back(t);
        } else if (key == "synthetic") {
            corpus().count = parse_u64(key, value);
        } else if (key == "synthetic_channels") {
            corpus().channels = parse_u64(key, value);
        } else if (key == "synthetic_height") {
            corpus().height = parse_u64(key, value);
        } else if (key == "synthetic_width") {
            corpus().width = parse_u64(key, value);
        } else if (key == "synthetic_seed") {
            corpus().seed = parse_u64(key, value);
        } else if (key == "probabilities") {
            cfg.probabilities.clear();
            for (const auto& p : split_list(value)) cfg.probabilities.push_back(parse_double(key, p));
        } else if (key == "methods") {
            cfg.methods.clear();
            for (const auto& m : split_list(value)) cfg.methods.push_back(parse_method(m));
        } else if (key == "seeds") {
            cfg.seeds.clear();
            for (const auto& s : split_list(value)) cfg.seeds.push_back(parse_u64(key, s));
        } else if (key == "out") {
            cfg.out_dir = value;
        } else if (key == "jobs") {
            cfg.jobs = static_cast<unsigned>(parse_u64(key, value));
        } else {
            throw std::invalid_argument("unknown config key '" + key + "'");
        }
    }
}

std::uint64_t tensor_loss_seed(std::uint64_t seed, std::size_t tensor_index) {
    return seed + static_cast<std::uint64_t>(tensor_index) * 0x9E3779B97F4A7C15ULL;
}

namespace {

struct SweepJob {
    std::size_t tensor;
    double p;
    std::uint64_t seed;
};

std::vector<SweepRow> run_job(const CorpusEntry& entry, std::size_t tensor_index, const SweepJob& job,
                              const SweepConfig& cfg) {
    std::vector<SweepRow> rows;
    auto base_row = [&](Method m) {
        SweepRow r;
        r.tensor = entry.name;
        r.p = job.p;
        r.method = m;
        r.seed = job.seed;
        return r;
    };

    Corrupted c;
    try {
        c = corrupt(entry.tensor, {job.p, tensor_loss_seed(job.seed, tensor_index)});
    } catch (const std::exception& e) {
        for (Method m : cfg.methods) {
            SweepRow r = base_row(m);
            r.masked_psnr_db = r.psnr_db = std::nan("");
            r.status = std::string("error: ") + e.what();
            rows.push_back(std::move(r));
        }
        return rows;
    }
    const RealGrid truth = dequantize(c.sent_bytes, c.sent_params);
    const RealGrid holed = dequantize(c.received.bytes, c.received.params);
    std::size_t lost_packets = 0;
    for (std::size_t r = 0; r < c.received.mask.rows(); r += kRowsPerPacket)
        lost_packets += c.received.mask(r, 0) ? 1 : 0;

    for (Method m : cfg.methods) {
        SweepRow r = base_row(m);
        r.lost_packets = lost_packets;
        try {
            const auto t0 = std::chrono::steady_clock::now();
            const RealGrid rec = recover_mosaic(holed, c.received.mask, c.layout, c.received.params,
                                                m, cfg.engine);
            const auto t1 = std::chrono::steady_clock::now();
            r.recover_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            const Score s = score(rec, truth, c.received.mask, c.layout, c.sent_params);
            r.masked_psnr_db = s.masked_psnr_db;
            r.psnr_db = s.psnr_db;
            for (std::size_t i = 0; i < rec.size(); ++i)
                if (!c.received.mask[i] && rec[i] != holed[i]) {
                    r.status = "known_pixels_modified";
                    break;
                }
        } catch (const std::exception& e) {
            r.masked_psnr_db = r.psnr_db = std::nan("");
            r.status = std::string("error: ") + e.what();
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace

SweepResult run_sweep(const SweepConfig& cfg) {
    cfg.validate();
    std::vector<CorpusEntry> inputs;
    for (const auto& path : cfg.tensors) inputs.push_back({path.stem().string(), read_tensor(path)});
    if (cfg.synthetic)
        for (auto& e : synth_corpus(*cfg.synthetic)) inputs.push_back(std::move(e));

    std::vector<SweepJob> jobs;
    for (std::size_t t = 0; t < inputs.size(); ++t)
        for (double p : cfg.probabilities)
            for (std::uint64_t s : cfg.seeds) jobs.push_back({t, p, s});

    std::vector<std::vector<SweepRow>> results(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();)
            results[j] = run_job(inputs[jobs[j].tensor], jobs[j].tensor, jobs[j], cfg);
    };
    const unsigned n_workers = std::max(1u, std::min<unsigned>(cfg.jobs, static_cast<unsigned>(jobs.size())));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    SweepResult out;
    for (auto& r : results)
        for (auto& row : r) out.rows.push_back(std::move(row));
    std::stable_sort(out.rows.begin(), out.rows.end(), [](const SweepRow& a, const SweepRow& b) {
        if (a.tensor != b.tensor) return a.tensor < b.tensor;
        if (a.p != b.p) return a.p < b.p;
        if (a.method != b.method) return a.method < b.method;
        return a.seed < b.seed;
    });

    std::map<Method, std::map<double, std::pair<double, int>>> sums;
    for (const auto& r : out.rows) {
        if (r.status != "ok" || r.lost_packets == 0) continue;
        auto& cell = sums[r.method][r.p];
        cell.first += r.masked_psnr_db;
        cell.second += 1;
    }
    for (const auto& [m, by_p] : sums) {
        MetricCurve curve;
        for (const auto& [p, cell] : by_p) curve.points.emplace_back(p, cell.first / cell.second);
        out.mean_curves[m] = std::move(curve);
    }
    if (const auto base = out.mean_curves.find(Method::none); base != out.mean_curves.end()) {
        for (const auto& [m, curve] : out.mean_curves) {
            if (curve.points.size() < 2) continue;
            try {
                out.gains[m] = average_gain(curve, base->second);
            } catch (const std::invalid_argument&) {
                // Grids differ because some runs failed; leave the gain out.
            }
        }
    }
    return out;
}

double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median: empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double BenchRow::median() const { return lpc::median(seconds); }

std::vector<BenchRow> run_bench(const FeatureTensor& tensor, const ChannelConfig& channel,
                                const std::vector<Method>& methods, int repeats,
                                const EngineParams& engine) {
    if (repeats < 1) throw std::invalid_argument("bench: repeats must be >= 1");
    const Corrupted c = corrupt(tensor, channel);
    const RealGrid holed = dequantize(c.received.bytes, c.received.params);
    std::size_t lost_packets = 0;
    for (std::size_t r = 0; r < c.received.mask.rows(); r += kRowsPerPacket)
        lost_packets += c.received.mask(r, 0) ? 1 : 0;
    std::vector<BenchRow> rows;
    for (Method m : methods) {
        BenchRow row{m, {}};
        for (int i = 0; i < repeats; ++i) {
            const auto t0 = std::chrono::steady_clock::now();
            const RealGrid rec =
                recover_mosaic(holed, c.received.mask, c.layout, c.received.params, m, engine);
            const auto t1 = std::chrono::steady_clock::now();
            row.seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace lpc
