#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lpc/corpus.hpp"
#include "lpc/flow.hpp"
#include "lpc/inpaint.hpp"
#include "lpc/lowrank.hpp"
#include "lpc/metrics.hpp"
#include "lpc/packet.hpp"
#include "lpc/tensor.hpp"

namespace lpc {

enum class Method { none, nearest_rows, telea, navier_stokes, silrtc_50, silrtc_250 };

std::string to_string(Method m);
/// Throws std::invalid_argument for an unknown method name.
Method parse_method(const std::string& name);
const std::vector<Method>& all_methods();

/// Default loss sweep.
const std::vector<double>& default_loss_grid();

/// Sender-side quantized mosaic and what the receiver reconstructs from the survivors.
struct Corrupted {
    MosaicLayout layout;
    QuantParams sent_params;  // float32-rounded, as carried in the packet headers
    ByteGrid sent_bytes;
    Reassembly received;
    std::size_t packets_total = 0;
};

/// tile -> quantize -> packetize -> drop -> reassemble.
Corrupted corrupt(const FeatureTensor& tensor, const ChannelConfig& channel,
                  std::uint32_t frame_id = 0);

struct EngineParams {
    TeleaParams telea;
    NSParams ns;
    /// SiLRTC thresholds in 8-bit gray levels; rescaled to data units per mosaic.
    std::array<double, 3> silrtc_taus_gray{10.0, 10.0, 10.0};
};

/// Fills the masked pixels of a dequantized mosaic with the chosen method. For the
/// SiLRTC methods the mosaic is untiled to the 3-way tensor and completed there.
/// Padding tiles (if any) are left as received.
RealGrid recover_mosaic(const RealGrid& holed, const MaskGrid& mask, const MosaicLayout& layout,
                        const QuantParams& params, Method method,
                        const EngineParams& engine = {});

struct Score {
    double masked_psnr_db = 0.0;  // over lost pixels that belong to real channels
    double psnr_db = 0.0;         // over all real-channel pixels
};

/// PSNR in 8-bit gray levels (peak 255) against the quantize->dequantize ground truth.
/// A mosaic with no lost pixels scores the PSNR cap for masked_psnr_db.
Score score(const RealGrid& recovered, const RealGrid& truth, const MaskGrid& loss,
            const MosaicLayout& layout, const QuantParams& params);

struct SweepConfig {
    std::vector<std::filesystem::path> tensors;
    std::optional<CorpusSpec> synthetic;
    std::vector<double> probabilities = default_loss_grid();
    std::vector<Method> methods = all_methods();
    std::vector<std::uint64_t> seeds{1};
    std::filesystem::path out_dir = "sweep_out";
    unsigned jobs = 1;
    EngineParams engine;

    /// Throws std::invalid_argument on empty lists or probabilities outside [0, 1].
    void validate() const;
};

/// Flat key=value file: tensors, synthetic, synthetic_channels, synthetic_height,
/// synthetic_width, synthetic_seed, probabilities, methods, seeds, out, jobs.
/// Lists are comma-separated; '#' starts a comment.
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);
/// Applies key=value overrides onto cfg. Throws std::invalid_argument on unknown keys
/// or malformed values.
void apply_settings(SweepConfig& cfg, const std::map<std::string, std::string>& kv);

struct SweepRow {
    std::string tensor;
    double p = 0.0;
    Method method = Method::none;
    std::uint64_t seed = 0;
    double masked_psnr_db = 0.0;
    double psnr_db = 0.0;
    double recover_ms = 0.0;
    std::string status = "ok";
    std::size_t lost_packets = 0;  // not written to the CSV
};

struct SweepResult {
    std::vector<SweepRow> rows;  // sorted by (tensor, p, method, seed)
    /// Mean masked PSNR per method and probability over successful rows that lost at
    /// least one packet (loss-free rows sit at the PSNR cap and would swamp the mean).
    std::map<Method, MetricCurve> mean_curves;
    /// average_gain of each method's curve against `none`, when both have >= 2 points.
    std::map<Method, double> gains;
};

/// Loss seed for tensor i of a sweep: seed + i * 0x9E3779B97F4A7C15 (mod 2^64).
std::uint64_t tensor_loss_seed(std::uint64_t seed, std::size_t tensor_index);

SweepResult run_sweep(const SweepConfig& cfg);

// Report writers.
inline constexpr const char* kSweepCsvHeader =
    "tensor,p,method,seed,masked_psnr_db,psnr_db,recover_ms,status";
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_gain_table(std::ostream& out, const SweepResult& result);
/// Self-contained SVG polyline chart of mean masked PSNR vs loss probability.
void write_svg_chart(std::ostream& out, const SweepResult& result);

struct FlowcheckRow {
    std::string signal;
    double vx = 0.0, vy = 0.0;
    flow::InvarianceRow result;
};

/// The fixed signal x transform matrix: gaussian_bump, stripes and smoothed noise
/// (seeds 1-3), each translating at (1,0), (0,1), (1,1), (2,0), against 3x3 box and
/// random convolutions, relu, sigmoid, tanh, 3x3 local max and 2x downscale. Signals
/// feeding the downscale are generated at twice the listed flow so the downscaled
/// sequence translates by the listed flow.
std::vector<FlowcheckRow> run_flowcheck(double tolerance);
inline constexpr const char* kFlowcheckCsvHeader =
    "transform,signal,flow,max_residual,rms_residual,pass";
void write_flowcheck_csv(std::ostream& out, const std::vector<FlowcheckRow>& rows);

struct BenchRow {
    Method method;
    std::vector<double> seconds;
    double median() const;
};

/// Times each method on one corrupted tensor, `repeats` runs each.
std::vector<BenchRow> run_bench(const FeatureTensor& tensor, const ChannelConfig& channel,
                                const std::vector<Method>& methods, int repeats,
                                const EngineParams& engine = {});

/// Median of a nonempty sample (mean of the two middle values for even sizes).
double median(std::vector<double> values);

}  // namespace lpc
