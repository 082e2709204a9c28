#include <cmath>

#include "doctest.h"
#include "test_util.hpp"
#include "tfa/ops.hpp"
#include "tfa/rng.hpp"

using namespace tfa;
using tfa::test::random_tensor;

namespace {

// Naive reference implementations, kept independent of the library path.

Tensor matmul_naive(const Tensor& a, const Tensor& b) {
    const std::size_t m = a.extent(0), k = a.extent(1), p = b.extent(1);
    Tensor out = Tensor::zeros({m, p});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < p; ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < k; ++t) s += a.at(i, t) * b.at(t, j);
            out.at(i, j) = s;
        }
    return out;
}

Tensor conv2d_naive(const Tensor& x, const Tensor& kern, std::size_t stride, std::size_t pad) {
    const std::size_t h = x.extent(0), w = x.extent(1), cin = x.extent(2);
    const std::size_t k = kern.extent(0), cout = kern.extent(3);
    const std::size_t oh = (h + 2 * pad - k) / stride + 1;
    const std::size_t ow = (w + 2 * pad - k) / stride + 1;
    // Build an explicitly zero-padded copy, then correlate.
    Tensor padded = Tensor::zeros({h + 2 * pad, w + 2 * pad, cin});
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t xx = 0; xx < w; ++xx)
            for (std::size_t c = 0; c < cin; ++c) padded.at(y + pad, xx + pad, c) = x.at(y, xx, c);
    Tensor out = Tensor::zeros({oh, ow, cout});
    for (std::size_t oy = 0; oy < oh; ++oy)
        for (std::size_t ox = 0; ox < ow; ++ox)
            for (std::size_t co = 0; co < cout; ++co) {
                double s = 0.0;
                for (std::size_t ky = 0; ky < k; ++ky)
                    for (std::size_t kx = 0; kx < k; ++kx)
                        for (std::size_t ci = 0; ci < cin; ++ci)
                            s += padded.at(oy * stride + ky, ox * stride + kx, ci) *
                                 kern.at(((ky * k + kx) * cin + ci) * cout + co);
                out.at(oy, ox, co) = s;
            }
    return out;
}

}  // namespace

TEST_CASE("matmul identity and hand case") {
    auto a = Tensor::from({2, 2}, {1, 2, 3, 4});
    auto eye = Tensor::from({2, 2}, {1, 0, 0, 1});
    auto r = matmul(a, eye);
    for (std::size_t i = 0; i < 4; ++i) CHECK(r.at(i) == a.at(i));

    auto b = Tensor::from({2, 2}, {5, 6, 7, 8});
    auto c = matmul(a, b);
    CHECK(c.at(0, 0) == 19);
    CHECK(c.at(0, 1) == 22);
    CHECK(c.at(1, 0) == 43);
    CHECK(c.at(1, 1) == 50);
}

TEST_CASE("matmul matches naive triple-loop reference") {
    Rng rng(5);
    auto a = random_tensor({5, 7}, rng);
    auto b = random_tensor({7, 3}, rng);
    auto fast = matmul(a, b);
    auto ref = matmul_naive(a, b);
    for (std::size_t i = 0; i < fast.numel(); ++i)
        CHECK(fast.at(i) == doctest::Approx(ref.at(i)).epsilon(1e-12));
}

TEST_CASE("matmul rejects mismatched inner extents with both shapes named") {
    auto a = Tensor::zeros({2, 3});
    auto b = Tensor::zeros({4, 2});
    try {
        matmul(a, b);
        FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
        std::string msg = e.what();
        CHECK(msg.find("[2x3]") != std::string::npos);
        CHECK(msg.find("[4x2]") != std::string::npos);
    }
}

TEST_CASE("softmax symmetric and shift-invariant") {
    auto r = softmax_lastdim(Tensor::from({2}, {0.0, 0.0}));
    CHECK(r.at(0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(r.at(1) == doctest::Approx(0.5).epsilon(1e-15));

    Rng rng(9);
    auto x = random_tensor({6}, rng);
    auto shifted = add_scalar(x, 3.75);
    auto s0 = softmax_lastdim(x);
    auto s1 = softmax_lastdim(shifted);
    for (std::size_t i = 0; i < 6; ++i) CHECK(s0.at(i) == doctest::Approx(s1.at(i)).epsilon(1e-14));
}

TEST_CASE("softmax matches direct exp/sum evaluation") {
    auto s = softmax_lastdim(Tensor::from({3}, {1.0, 2.0, 3.0}));
    const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
    CHECK(s.at(0) == doctest::Approx(std::exp(1.0) / z).epsilon(1e-14));
    CHECK(s.at(1) == doctest::Approx(std::exp(2.0) / z).epsilon(1e-14));
    CHECK(s.at(2) == doctest::Approx(std::exp(3.0) / z).epsilon(1e-14));
}

TEST_CASE("softmax rows sum to one within 1e-12") {
    Rng rng(17);
    auto x = random_tensor({8, 13}, rng, 4.0);
    auto s = softmax_lastdim(x);
    for (std::size_t r = 0; r < 8; ++r) {
        double sum = 0.0;
        for (std::size_t j = 0; j < 13; ++j) {
            CHECK(s.at(r, j) >= 0.0);
            sum += s.at(r, j);
        }
        CHECK(std::fabs(sum - 1.0) < 1e-12);
    }
}

TEST_CASE("layer_norm handles constant slices and the two-point case") {
    auto gamma = Tensor::from({4}, {1, 1, 1, 1});
    auto beta = Tensor::zeros({4});
    auto out = layer_norm(Tensor::full({2, 4}, 3.25), gamma, beta, 1e-6);
    for (std::size_t i = 0; i < out.numel(); ++i) CHECK(out.at(i) == doctest::Approx(0.0));

    auto g2 = Tensor::from({2}, {1, 1});
    auto b2 = Tensor::zeros({2});
    auto two = layer_norm(Tensor::from({2}, {1.0, 3.0}), g2, b2, 1e-10);
    CHECK(two.at(0) == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(two.at(1) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("layer_norm standardizes random slices") {
    Rng rng(23);
    auto x = random_tensor({5, 32}, rng, 2.5);
    auto gamma = Tensor::full({32}, 1.0);
    auto beta = Tensor::zeros({32});
    auto out = layer_norm(x, gamma, beta, 1e-9);
    for (std::size_t r = 0; r < 5; ++r) {
        double mean = 0.0, var = 0.0;
        for (std::size_t j = 0; j < 32; ++j) mean += out.at(r, j);
        mean /= 32.0;
        for (std::size_t j = 0; j < 32; ++j) var += (out.at(r, j) - mean) * (out.at(r, j) - mean);
        var /= 32.0;
        CHECK(std::fabs(mean) < 1e-10);
        CHECK(std::fabs(var - 1.0) < 1e-6);
    }
}

TEST_CASE("gelu fixed points and asymptotes") {
    auto x = Tensor::from({3}, {0.0, 10.0, -10.0});
    auto y = gelu(x);
    CHECK(y.at(0) == 0.0);
    CHECK(y.at(1) == doctest::Approx(10.0).epsilon(1e-6));
    CHECK(std::fabs(y.at(2)) < 1e-6);
}

TEST_CASE("conv2d identity kernel and forced-sum case") {
    Rng rng(31);
    auto x = random_tensor({4, 5, 1}, rng);
    auto ident = Tensor::from({1, 1, 1, 1}, {1.0});
    auto y = conv2d(x, ident, 1, 0);
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(y.at(i) == x.at(i));

    auto ones_in = Tensor::full({5, 5, 1}, 1.0);
    auto ones_k = Tensor::full({3, 3, 1, 1}, 1.0);
    auto s = conv2d(ones_in, ones_k, 1, 0);
    CHECK(s.extent(0) == 3);
    CHECK(s.extent(1) == 3);
    for (std::size_t i = 0; i < s.numel(); ++i) CHECK(s.at(i) == doctest::Approx(9.0));
}

TEST_CASE("conv2d matches naive loop reference") {
    Rng rng(37);
    auto x = random_tensor({8, 8, 2}, rng);
    auto k = random_tensor({3, 3, 2, 4}, rng);
    for (std::size_t stride : {1, 2}) {
        for (std::size_t pad : {0, 1}) {
            auto fast = conv2d(x, k, stride, pad);
            auto ref = conv2d_naive(x, k, stride, pad);
            REQUIRE(fast.shape() == ref.shape());
            for (std::size_t i = 0; i < fast.numel(); ++i)
                CHECK(fast.at(i) == doctest::Approx(ref.at(i)).epsilon(1e-12));
        }
    }
}

TEST_CASE("conv2d rejects outputs smaller than one") {
    auto x = Tensor::zeros({2, 2, 1});
    auto k = Tensor::zeros({5, 5, 1, 1});
    CHECK_THROWS_AS(conv2d(x, k, 1, 0), DimensionError);
}

TEST_CASE("bilinear resize to the same size is bitwise identity") {
    Rng rng(41);
    auto x = random_tensor({6, 7, 3}, rng);
    auto y = bilinear_resize(x, 6, 7);
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(y.at(i) == x.at(i));
}

TEST_CASE("bilinear resize extends a 1x1 map as a constant") {
    auto x = Tensor::from({1, 1, 2}, {0.25, -4.0});
    auto y = bilinear_resize(x, 5, 3);
    for (std::size_t i = 0; i < 5 * 3; ++i) {
        CHECK(y.at(2 * i) == 0.25);
        CHECK(y.at(2 * i + 1) == -4.0);
    }
}

TEST_CASE("bilinear 2x2 -> 4x4 matches the half-pixel formula") {
    // Hand evaluation: source positions for target j are (j+0.5)*0.5-0.5,
    // i.e. {-0.25, 0.25, 0.75, 1.25}, clamped to [0,1].
    auto x = Tensor::from({2, 2, 1}, {0.0, 1.0, 2.0, 3.0});
    auto y = bilinear_resize(x, 4, 4);
    const double col[4] = {0.0, 0.25, 0.75, 1.0};  // interpolation along one axis
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) {
            const double expect = (1.0 - col[r]) * ((1.0 - col[c]) * 0.0 + col[c] * 1.0) +
                                  col[r] * ((1.0 - col[c]) * 2.0 + col[c] * 3.0);
            CHECK(y.at(r, c, 0) == doctest::Approx(expect).epsilon(1e-14));
        }
}

TEST_CASE("ops are deterministic given identical inputs") {
    Rng rng(43);
    auto a = random_tensor({4, 4}, rng);
    auto b = random_tensor({4, 4}, rng);
    auto r1 = matmul(a, b);
    auto r2 = matmul(a, b);
    for (std::size_t i = 0; i < r1.numel(); ++i) CHECK(r1.at(i) == r2.at(i));
    auto s1 = softmax_lastdim(a);
    auto s2 = softmax_lastdim(a);
    for (std::size_t i = 0; i < s1.numel(); ++i) CHECK(s1.at(i) == s2.at(i));
}

TEST_CASE("row and column slicing round-trips") {
    Rng rng(47);
    auto x = random_tensor({6, 8}, rng);
    auto top = slice_rows(x, 0, 3);
    auto bottom = slice_rows(x, 3, 6);
    auto back = concat_rows(top, bottom);
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(back.at(i) == x.at(i));

    auto left = slice_cols(x, 0, 5);
    auto right = slice_cols(x, 5, 8);
    auto back2 = concat_cols({left, right});
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(back2.at(i) == x.at(i));
}
