#include "doctest.h"
#include "tfa/ops.hpp"
#include "tfa/tensor.hpp"

using namespace tfa;

TEST_CASE("tensor shape and data length stay consistent") {
    auto t = Tensor::zeros({2, 3});
    CHECK(t.numel() == 6);
    CHECK(t.rank() == 2);
    CHECK_THROWS_AS(Tensor::from({2, 2}, {1.0, 2.0, 3.0}), DimensionError);
    CHECK_THROWS_AS(Tensor::zeros({2, 0}), DimensionError);
}

TEST_CASE("rank-0 scalar has one element") {
    auto s = Tensor::scalar(4.5);
    CHECK(s.rank() == 0);
    CHECK(s.numel() == 1);
    CHECK(s.at(0) == 4.5);
}

TEST_CASE("copies share storage, clone does not") {
    auto a = Tensor::from({2}, {1.0, 2.0});
    Tensor b = a;
    b.at(0) = 9.0;
    CHECK(a.at(0) == 9.0);
    CHECK(a.id() == b.id());

    Tensor c = a.clone();
    c.at(1) = -1.0;
    CHECK(a.at(1) == 2.0);
    CHECK(c.id() != a.id());
}

TEST_CASE("non-finite op outputs raise instead of propagating") {
    auto a = Tensor::from({2}, {1.0, 0.0});
    auto b = Tensor::from({2}, {0.0, 0.0});
    CHECK_THROWS_AS(div(a, b), NumericError);
}
