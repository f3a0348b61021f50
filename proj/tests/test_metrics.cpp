#include <cmath>

#include "doctest.h"
#include "lpc/metrics.hpp"

using namespace lpc;

TEST_CASE("mse and psnr of a unit error at peak 255") {
    const RealGrid a(4, 4, 10.0), b(4, 4, 11.0);
    CHECK(mse(a, b) == 1.0);
    CHECK(psnr(a, b, 255.0) == doctest::Approx(48.130803608679102));
    CHECK(psnr(a, a, 255.0) == kPsnrCapDb);
    CHECK_THROWS_AS(mse(a, RealGrid(4, 5)), std::invalid_argument);
}

TEST_CASE("masked psnr only looks at masked pixels") {
    RealGrid a(2, 2, 0.0), b(2, 2, 0.0);
    b(0, 1) = 2.0;
    b(1, 1) = 100.0;
    MaskGrid m(2, 2, 0);
    m(0, 1) = 1;
    // mse = 4 over one pixel: 10 log10(255^2 / 4)
    CHECK(masked_psnr(a, b, m, 255.0) == doctest::Approx(10 * std::log10(255.0 * 255.0 / 4.0)));
    CHECK_THROWS_AS(masked_psnr(a, b, MaskGrid(2, 2, 0), 255.0), std::invalid_argument);
}

TEST_CASE("average gain is the trapezoid area over the range") {
    const MetricCurve base{{{0.1, 10.0}, {0.2, 8.0}, {0.3, 6.0}}};
    const MetricCurve method{{{0.1, 12.0}, {0.2, 12.0}, {0.3, 7.0}}};
    // differences 2, 4, 1 -> (0.1 * 3 + 0.1 * 2.5) / 0.2 = 2.75
    CHECK(average_gain(method, base) == doctest::Approx(2.75));
    CHECK(average_gain(base, base) == 0.0);
    const MetricCurve other{{{0.1, 1.0}, {0.25, 1.0}, {0.3, 1.0}}};
    CHECK_THROWS_AS(average_gain(other, base), std::invalid_argument);
    const MetricCurve unsorted{{{0.2, 1.0}, {0.1, 1.0}}};
    CHECK_THROWS_AS(unsorted.validate(), std::invalid_argument);
}
