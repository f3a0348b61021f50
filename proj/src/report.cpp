#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "lpc/pipeline.hpp"

namespace lpc {

namespace {

std::string fmt(const char* spec, double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

}  // namespace

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << kSweepCsvHeader << '\n';
    for (const auto& r : rows)
        out << csv_field(r.tensor) << ',' << fmt("%g", r.p) << ',' << to_string(r.method) << ','
            << r.seed << ',' << fmt("%.6f", r.masked_psnr_db) << ',' << fmt("%.6f", r.psnr_db)
            << ',' << fmt("%.3f", r.recover_ms) << ',' << csv_field(r.status) << '\n';
}

void write_gain_table(std::ostream& out, const SweepResult& result) {
    out << "method,average_gain_db\n";
    for (const auto& [m, g] : result.gains) out << to_string(m) << ',' << fmt("%.6f", g) << '\n';
}

void write_svg_chart(std::ostream& out, const SweepResult& result) {
    constexpr double W = 720, H = 440, left = 70, right = 170, top = 30, bottom = 60;
    double pmin = 1e9, pmax = -1e9, vmin = 1e9, vmax = -1e9;
    for (const auto& [m, curve] : result.mean_curves)
        for (const auto& [p, v] : curve.points) {
            pmin = std::min(pmin, p), pmax = std::max(pmax, p);
            vmin = std::min(vmin, v), vmax = std::max(vmax, v);
        }
    if (pmin > pmax) pmin = 0, pmax = 1, vmin = 0, vmax = 1;
    if (pmax == pmin) pmin -= 0.05, pmax += 0.05;
    if (vmax == vmin) vmin -= 1, vmax += 1;
    const double pad = 0.05 * (vmax - vmin);
    vmin -= pad, vmax += pad;

    auto X = [&](double p) { return left + (p - pmin) / (pmax - pmin) * (W - left - right); };
    auto Y = [&](double v) { return H - bottom - (v - vmin) / (vmax - vmin) * (H - top - bottom); };
    static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right << "\" y2=\""
        << H - bottom << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
        << H - bottom << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double p = pmin + (pmax - pmin) * i / 5, v = vmin + (vmax - vmin) * i / 5;
        out << "<text x=\"" << fmt("%.1f", X(p)) << "\" y=\"" << H - bottom + 18
            << "\" text-anchor=\"middle\">" << fmt("%.2f", p) << "</text>\n";
        out << "<text x=\"" << left - 6 << "\" y=\"" << fmt("%.1f", Y(v) + 4)
            << "\" text-anchor=\"end\">" << fmt("%.1f", v) << "</text>\n";
    }
    out << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 15
        << "\" text-anchor=\"middle\">packet loss probability</text>\n";
    out << "<text transform=\"translate(18," << (top + H - bottom) / 2
        << ") rotate(-90)\" text-anchor=\"middle\">mean masked PSNR (dB)</text>\n";

    int k = 0;
    for (const auto& [m, curve] : result.mean_curves) {
        const char* color = colors[k % 6];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (const auto& [p, v] : curve.points) out << fmt("%.1f", X(p)) << ',' << fmt("%.1f", Y(v)) << ' ';
        out << "\"/>\n";
        const double ly = top + 10 + 20 * k;
        out << "<line x1=\"" << W - right + 15 << "\" y1=\"" << ly << "\" x2=\"" << W - right + 40
            << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << W - right + 46 << "\" y=\"" << ly + 4 << "\">" << to_string(m)
            << "</text>\n";
        ++k;
    }
    out << "</svg>\n";
}

std::vector<FlowcheckRow> run_flowcheck(double tolerance) {
    using namespace flow;
    constexpr std::size_t kSize = 64, kFrames = 4;
    const std::vector<Profile> profiles{{ProfileKind::gaussian_bump, 0},
                                        {ProfileKind::stripes, 0},
                                        {ProfileKind::smoothed_noise, 1},
                                        {ProfileKind::smoothed_noise, 2},
                                        {ProfileKind::smoothed_noise, 3}};
    const std::vector<std::pair<int, int>> flows{{1, 0}, {0, 1}, {1, 1}, {2, 0}};
    const std::vector<Transform> same_scale{box_kernel(3),
                                            random_kernel(3, 7),
                                            Pointwise{Activation::relu},
                                            Pointwise{Activation::sigmoid},
                                            Pointwise{Activation::tanh},
                                            LocalMax{1}};
    const Downscale half{2, 2};

    std::vector<FlowcheckRow> rows;
    for (const auto& profile : profiles)
        for (const auto& [vx, vy] : flows) {
            const auto seq = synth_translating(profile, vx, vy, kFrames, kSize, kSize);
            for (auto& r : invariance_report(seq, FlowField::constant(vx, vy), same_scale, tolerance))
                rows.push_back({name(profile), double(vx), double(vy), std::move(r)});

            const auto fast = synth_translating(profile, half.sx * vx, half.sy * vy, kFrames, kSize, kSize);
            for (auto& r : invariance_report(fast, FlowField::constant(half.sx * vx, half.sy * vy),
                                             {half}, tolerance))
                rows.push_back({name(profile), double(vx), double(vy), std::move(r)});
        }
    return rows;
}

void write_flowcheck_csv(std::ostream& out, const std::vector<FlowcheckRow>& rows) {
    out << kFlowcheckCsvHeader << '\n';
    for (const auto& r : rows)
        out << r.result.transform << ',' << r.signal << ",\"(" << fmt("%g", r.vx) << ','
            << fmt("%g", r.vy) << ")\"," << fmt("%.6e", r.result.residual.max) << ','
            << fmt("%.6e", r.result.residual.rms) << ',' << (r.result.pass ? "PASS" : "FAIL")
            << '\n';
}

}  // namespace lpc
