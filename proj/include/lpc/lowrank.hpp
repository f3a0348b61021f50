#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "lpc/tensor.hpp"

namespace lpc {

/// Dense 3-way tensor indexed (channel, row, col), last index fastest.
struct Tensor3 {
    std::array<std::size_t, 3> dims{};
    std::vector<double> data;

    Tensor3() = default;
    explicit Tensor3(std::array<std::size_t, 3> d, double fill = 0.0)
        : dims{d}, data(d[0] * d[1] * d[2], fill) {}

    double& operator()(std::size_t c, std::size_t r, std::size_t w) {
        return data[(c * dims[1] + r) * dims[2] + w];
    }
    double operator()(std::size_t c, std::size_t r, std::size_t w) const {
        return data[(c * dims[1] + r) * dims[2] + w];
    }

    static Tensor3 from(const FeatureTensor& t);
    FeatureTensor to_feature_tensor() const;

    friend bool operator==(const Tensor3&, const Tensor3&) = default;
};

/// Same layout as Tensor3::data; 1 = observed.
struct ObservationSet {
    std::array<std::size_t, 3> dims{};
    std::vector<std::uint8_t> observed;
};

/// Singular value shrinkage: U * diag(max(sigma - tau, 0)) * V^T.
///
/// The decomposition comes from the eigen-decomposition of the smaller Gram matrix
/// (A A^T or A^T A), which for the short-and-wide unfoldings used here is several times
/// cheaper than a bidiagonal SVD. Singular directions with sigma <= tau are dropped
/// entirely, so the squared conditioning of the Gram route only affects directions that
/// are shrunk to zero anyway. Throws NumericalError on non-finite input or solver failure.
Eigen::MatrixXd svt(const Eigen::MatrixXd& matrix, double tau);

/// Mode-n matricization. Row index is the mode-n index; columns enumerate the remaining
/// two modes in lexicographic order with the later mode fastest:
///   mode 0: column = row * W + col
///   mode 1: column = channel * W + col
///   mode 2: column = channel * H + row
Eigen::MatrixXd unfold(const Tensor3& tensor, int mode);
Tensor3 fold(const Eigen::MatrixXd& matrix, int mode, std::array<std::size_t, 3> dims);

struct SiLRTCParams {
    std::array<double, 3> alphas{1.0 / 3, 1.0 / 3, 1.0 / 3};
    std::array<double, 3> taus{10.0, 10.0, 10.0};
    int iterations = 50;
    double stop_tol = 0.0;

    void validate() const;

    static SiLRTCParams preset50() { return {}; }
    static SiLRTCParams preset250() {
        SiLRTCParams p;
        p.iterations = 250;
        return p;
    }
};

struct SiLRTCResult {
    Tensor3 tensor;
    /// Relative change of the unobserved entries, one value per iteration run.
    std::vector<double> relative_change;
};

/// Simple low-rank tensor completion. Unobserved entries start at zero; each iteration
/// replaces them with the alpha-weighted average of the three folded, shrunk unfoldings,
/// and stops early once the relative change drops below stop_tol.
/// Observed entries are never written. Throws std::invalid_argument when nothing is
/// observed or shapes disagree.
SiLRTCResult silrtc(const Tensor3& input, const ObservationSet& omega, const SiLRTCParams& params);

}  // namespace lpc
