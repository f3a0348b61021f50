#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include "doctest.h"
#include "lpc/lowrank.hpp"

using namespace lpc;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
    return m;
}

/// Reference shrinkage through a full two-sided Jacobi SVD.
Eigen::MatrixXd jacobi_svt(const Eigen::MatrixXd& a, double tau) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd s = (svd.singularValues().array() - tau).max(0.0);
    return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

Tensor3 random_tensor(std::array<std::size_t, 3> dims, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Tensor3 t(dims);
    for (double& v : t.data) v = u(rng);
    return t;
}

struct Rank1Case {
    Tensor3 truth;
    Tensor3 holed;
    ObservationSet omega;
};

/// a (x) b (x) c on 16x16x8 in gray-level magnitudes with 20% of entries hidden.
Rank1Case rank1_case(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(1.0, 2.0);
    const std::array<std::size_t, 3> dims{16, 16, 8};
    std::vector<double> a(16), b(16), c(8);
    for (double& v : a) v = u(rng);
    for (double& v : b) v = u(rng);
    for (double& v : c) v = u(rng);
    Rank1Case k{Tensor3(dims), Tensor3(dims), {dims, std::vector<std::uint8_t>(16 * 16 * 8, 1)}};
    for (std::size_t i = 0; i < 16; ++i)
        for (std::size_t j = 0; j < 16; ++j)
            for (std::size_t l = 0; l < 8; ++l) k.truth(i, j, l) = 30.0 * a[i] * b[j] * c[l];
    std::vector<std::size_t> idx(k.truth.data.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    k.holed = k.truth;
    for (std::size_t i = 0; i < idx.size() / 5; ++i) {
        k.omega.observed[idx[i]] = 0;
        k.holed.data[idx[i]] = 0.0;
    }
    return k;
}

double hidden_relative_error(const Tensor3& got, const Rank1Case& k) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < got.data.size(); ++i)
        if (!k.omega.observed[i]) {
            num += std::pow(got.data[i] - k.truth.data[i], 2);
            den += std::pow(k.truth.data[i], 2);
        }
    return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("svt with tau 0 reproduces the input") {
    for (auto [r, c] : {std::pair{5, 9}, {9, 5}, {7, 7}, {1, 6}}) {
        const auto a = random_matrix(r, c, std::uint64_t(r * 10 + c));
        CHECK((svt(a, 0.0) - a).norm() / a.norm() < 1e-6);
    }
}

TEST_CASE("svt with tau above the largest singular value returns zero") {
    const auto a = random_matrix(6, 11, 4);
    const double smax = Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues()(0);
    CHECK(svt(a, smax).norm() == doctest::Approx(0.0));
    CHECK(svt(a, smax * 2).norm() == 0.0);
}

TEST_CASE("svt on diag(3, 1) with tau 1 gives diag(2, 0)") {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = 1.0;
    const auto s = svt(d, 1.0);
    CHECK(s(0, 0) == doctest::Approx(2.0));
    CHECK(std::abs(s(0, 1)) < 1e-12);
    CHECK(std::abs(s(1, 0)) < 1e-12);
    CHECK(std::abs(s(1, 1)) < 1e-12);
}

TEST_CASE("svt agrees with a Jacobi SVD reference") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const Eigen::Index r = 3 + Eigen::Index(seed % 5), c = 4 + Eigen::Index((seed * 7) % 30);
        const auto a = random_matrix(r, c, seed);
        for (double tau : {0.1, 1.0, 2.5}) {
            const auto ref = jacobi_svt(a, tau);
            CHECK((svt(a, tau) - ref).norm() <= 1e-8 * std::max(1.0, ref.norm()));
        }
    }
}

TEST_CASE("svt is non-expansive in the Frobenius norm") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto a = random_matrix(8, 20, seed), b = random_matrix(8, 20, seed + 100);
        for (double tau : {0.5, 2.0})
            CHECK((svt(a, tau) - svt(b, tau)).norm() <= (a - b).norm() + 1e-10);
    }
}

TEST_CASE("svt rejects non-finite input") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Ones(3, 3);
    a(1, 1) = NAN;
    CHECK_THROWS(svt(a, 1.0));
}

TEST_CASE("unfold of the 2x2x2 counting tensor") {
    Tensor3 t({2, 2, 2});
    for (std::size_t i = 0; i < 8; ++i) t.data[i] = double(i);
    const auto m0 = unfold(t, 0);
    REQUIRE(m0.rows() == 2);
    REQUIRE(m0.cols() == 4);
    for (int j = 0; j < 4; ++j) CHECK(m0(0, j) == double(j));  // channel 0 in row-then-col order
    for (int j = 0; j < 4; ++j) CHECK(m0(1, j) == double(4 + j));
    const auto m1 = unfold(t, 1);
    CHECK(m1(0, 0) == 0.0);
    CHECK(m1(0, 1) == 1.0);
    CHECK(m1(0, 2) == 4.0);
    CHECK(m1(1, 3) == 7.0);
    const auto m2 = unfold(t, 2);
    CHECK(m2(1, 0) == 1.0);
    CHECK(m2(1, 1) == 3.0);
    CHECK(m2(0, 2) == 4.0);
}

TEST_CASE("fold inverts unfold exactly and unfold keeps every entry") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto t = random_tensor({3 + seed, 4, 5 + seed % 2}, seed);
        for (int mode = 0; mode < 3; ++mode) {
            const auto m = unfold(t, mode);
            CHECK(m.rows() == Eigen::Index(t.dims[std::size_t(mode)]));
            CHECK(fold(m, mode, t.dims) == t);
            std::vector<double> a(t.data), b(m.data(), m.data() + m.size());
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            CHECK(a == b);
        }
    }
    CHECK_THROWS(unfold(random_tensor({2, 2, 2}, 1), 3));
    CHECK_THROWS(fold(Eigen::MatrixXd(3, 4), 0, {2, 2, 2}));
}

TEST_CASE("silrtc on a fully observed tensor changes nothing") {
    const auto t = random_tensor({4, 5, 6}, 9);
    const ObservationSet all{t.dims, std::vector<std::uint8_t>(t.data.size(), 1)};
    const auto res = silrtc(t, all, SiLRTCParams::preset50());
    CHECK(res.tensor == t);
}

TEST_CASE("silrtc rejects empty or mismatched observation sets") {
    const auto t = random_tensor({4, 5, 6}, 9);
    CHECK_THROWS_AS(silrtc(t, {t.dims, std::vector<std::uint8_t>(t.data.size(), 0)}, {}),
                    std::invalid_argument);
    CHECK_THROWS_AS(silrtc(t, {{4, 5, 5}, std::vector<std::uint8_t>(100, 1)}, {}),
                    std::invalid_argument);
    SiLRTCParams bad;
    bad.alphas = {0.5, 0.5, 0.5};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = {};
    bad.taus[1] = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("silrtc recovers a rank-one tensor and more iterations do not hurt") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto k = rank1_case(seed);
        const auto r250 = silrtc(k.holed, k.omega, SiLRTCParams::preset250());
        const auto r50 = silrtc(k.holed, k.omega, SiLRTCParams::preset50());
        const double e250 = hidden_relative_error(r250.tensor, k);
        const double e50 = hidden_relative_error(r50.tensor, k);
        CHECK(e250 < 5e-2);
        CHECK(e250 <= e50);
        CHECK(r250.relative_change.size() == 250);
        for (double v : r250.relative_change) CHECK(std::isfinite(v));
        for (std::size_t i = 0; i < k.holed.data.size(); ++i)
            if (k.omega.observed[i]) {
                CHECK(r250.tensor.data[i] == k.holed.data[i]);
                CHECK(r50.tensor.data[i] == k.holed.data[i]);
            }
    }
}

TEST_CASE("observed entries stay bit-identical at every iteration budget") {
    const auto k = rank1_case(5);
    for (int iters = 1; iters <= 5; ++iters) {
        SiLRTCParams p;
        p.iterations = iters;
        const auto res = silrtc(k.holed, k.omega, p);
        bool same = true;
        for (std::size_t i = 0; i < k.holed.data.size(); ++i)
            if (k.omega.observed[i] && std::memcmp(&res.tensor.data[i], &k.holed.data[i], sizeof(double)))
                same = false;
        CHECK(same);
    }
}

TEST_CASE("silrtc stops early once the relative change falls under stop_tol") {
    const auto k = rank1_case(7);
    SiLRTCParams p = SiLRTCParams::preset250();
    p.stop_tol = 1e-3;
    const auto res = silrtc(k.holed, k.omega, p);
    REQUIRE(!res.relative_change.empty());
    CHECK(res.relative_change.size() < 250);
    CHECK(res.relative_change.back() < 1e-3);
    for (std::size_t i = 0; i + 1 < res.relative_change.size(); ++i)
        CHECK(res.relative_change[i] >= 1e-3);
}

TEST_CASE("tensor3 converts to and from feature tensors") {
    FeatureTensor f(2, 3, 4);
    for (std::size_t i = 0; i < f.size(); ++i) f.values()[i] = float(i) * 0.5f;
    const auto t = Tensor3::from(f);
    CHECK(t(1, 2, 3) == f.at(1, 2, 3));
    CHECK(t.to_feature_tensor() == f);
}
