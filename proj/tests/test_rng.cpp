#include <vector>

#include "doctest.h"
#include "tfa/rng.hpp"

using namespace tfa;

TEST_CASE("identical seed and call sequence give identical outputs") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.next_u64() == b.next_u64());
        CHECK(a.uniform() == b.uniform());
        CHECK(a.normal() == b.normal());
    }
}

TEST_CASE("split children are independent and do not perturb the parent") {
    Rng control(7);
    std::vector<std::uint64_t> before;
    for (int i = 0; i < 4; ++i) before.push_back(control.next_u64());

    Rng parent(7);
    std::vector<std::uint64_t> first_four;
    for (int i = 0; i < 4; ++i) first_four.push_back(parent.next_u64());
    Rng child = parent.split();
    // Draining the child leaves the parent's own future stream untouched.
    std::vector<std::uint64_t> child_vals;
    for (int i = 0; i < 16; ++i) child_vals.push_back(child.next_u64());

    Rng replay(7);
    for (int i = 0; i < 4; ++i) CHECK(replay.next_u64() == first_four[i]);
    Rng child2 = replay.split();
    for (int i = 0; i < 16; ++i) CHECK(child2.next_u64() == child_vals[i]);

    // Child outputs differ from what the parent would have produced.
    int same = 0;
    Rng parent_tail(7);
    for (int i = 0; i < 5; ++i) parent_tail.next_u64();
    for (int i = 0; i < 16; ++i) same += (parent_tail.next_u64() == child_vals[i]);
    CHECK(same == 0);
}

TEST_CASE("uniform stays in [0,1) and normal has sane moments") {
    Rng r(3);
    double sum = 0.0, sumsq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        sum += z;
        sumsq += z * z;
    }
    CHECK(std::fabs(sum / n) < 0.05);
    CHECK(std::fabs(sumsq / n - 1.0) < 0.05);
}

TEST_CASE("sample_without_replacement returns distinct indices") {
    Rng r(11);
    auto idx = r.sample_without_replacement(64, 32);
    CHECK(idx.size() == 32);
    std::vector<bool> seen(64, false);
    for (auto i : idx) {
        CHECK(i < 64);
        CHECK(!seen[i]);
        seen[i] = true;
    }
}
