#pragma once

#include <utility>
#include <vector>

#include "lpc/grid.hpp"

namespace lpc {

/// Value returned by psnr when the inputs match exactly.
inline constexpr double kPsnrCapDb = 200.0;
inline constexpr double kMosaicPeak = 255.0;

double mse(const RealGrid& a, const RealGrid& b);
/// 10 log10(peak^2 / mse), capped at kPsnrCapDb.
double psnr(const RealGrid& a, const RealGrid& b, double peak);
/// PSNR over the mask-true pixels only. Throws std::invalid_argument on an empty mask.
double masked_psnr(const RealGrid& a, const RealGrid& b, const MaskGrid& mask, double peak);

/// (loss probability, value) pairs with strictly increasing probabilities.
struct MetricCurve {
    std::vector<std::pair<double, double>> points;
    void validate() const;
};

/// Trapezoidal area between the curves divided by the probability range.
/// Throws std::invalid_argument if the probability grids differ.
double average_gain(const MetricCurve& method, const MetricCurve& baseline);

}  // namespace lpc
