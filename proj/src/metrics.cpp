#include "lpc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lpc {

namespace {

void require_same_shape(const RealGrid& a, const RealGrid& b, const char* what) {
    if (!a.same_shape(b)) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

double to_psnr(double err, double peak) {
    if (!(peak > 0.0)) throw std::invalid_argument("psnr: peak must be positive");
    if (err <= 0.0) return kPsnrCapDb;
    return std::min(kPsnrCapDb, 10.0 * std::log10(peak * peak / err));
}

}  // namespace

double mse(const RealGrid& a, const RealGrid& b) {
    require_same_shape(a, b, "mse");
    if (a.empty()) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s / static_cast<double>(a.size());
}

double psnr(const RealGrid& a, const RealGrid& b, double peak) { return to_psnr(mse(a, b), peak); }

double masked_psnr(const RealGrid& a, const RealGrid& b, const MaskGrid& mask, double peak) {
    require_same_shape(a, b, "masked_psnr");
    if (!a.same_shape(mask)) throw std::invalid_argument("masked_psnr: mask size mismatch");
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (mask[i]) {
            s += (a[i] - b[i]) * (a[i] - b[i]);
            ++n;
        }
    if (n == 0) throw std::invalid_argument("masked_psnr: empty mask");
    return to_psnr(s / static_cast<double>(n), peak);
}

void MetricCurve::validate() const {
    if (points.size() < 2) throw std::invalid_argument("MetricCurve: need at least 2 points");
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double p = points[i].first;
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("MetricCurve: probability outside [0, 1]");
        if (i > 0 && !(p > points[i - 1].first))
            throw std::invalid_argument("MetricCurve: probabilities must increase strictly");
    }
}

double average_gain(const MetricCurve& method, const MetricCurve& baseline) {
    method.validate();
    baseline.validate();
    if (method.points.size() != baseline.points.size())
        throw std::invalid_argument("average_gain: curves have different grids");
    double area = 0.0;
    for (std::size_t i = 0; i < method.points.size(); ++i) {
        if (method.points[i].first != baseline.points[i].first)
            throw std::invalid_argument("average_gain: curves have different grids");
        if (i == 0) continue;
        const double h = method.points[i].first - method.points[i - 1].first;
        const double d0 = method.points[i - 1].second - baseline.points[i - 1].second;
        const double d1 = method.points[i].second - baseline.points[i].second;
        area += 0.5 * h * (d0 + d1);
    }
    return area / (method.points.back().first - method.points.front().first);
}

}  // namespace lpc
