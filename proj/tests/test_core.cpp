#include "doctest.h"
#include "peerlab/core.hpp"

#include <set>

using namespace peerlab;

TEST_CASE("derive_rng is deterministic for identical paths") {
    Rng a = derive_rng(7, {"agent", 0});
    Rng b = derive_rng(7, {"agent", 0});
    for (int k = 0; k < 100; ++k) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("derive_rng separates distinct paths") {
    Rng a = derive_rng(7, {"agent", 0});
    Rng b = derive_rng(7, {"agent", 1});
    int equal = 0;
    for (int k = 0; k < 100; ++k) equal += a.next_u64() == b.next_u64();
    CHECK(equal == 0);

    // Label/index boundaries are part of the key.
    CHECK(derive_seed(7, std::vector<PathPart>{"ab"}) != derive_seed(7, std::vector<PathPart>{"a", "b"}));
    CHECK(derive_seed(7, std::vector<PathPart>{"1"}) != derive_seed(7, std::vector<PathPart>{1}));
    CHECK(derive_seed(7, std::vector<PathPart>{"agent"}) != derive_seed(8, std::vector<PathPart>{"agent"}));
}

TEST_CASE("derive_rng rejects an empty path") {
    CHECK_THROWS_AS(derive_rng(7, std::span<const PathPart>{}), ContractViolation);
}

TEST_CASE("engine matches the standard-mandated mt19937_64 sequence") {
    // The standard fixes the 10000th output of a default-constructed mt19937_64.
    std::mt19937_64 reference;
    reference.discard(9999);
    CHECK(reference() == 9981545732273789042ULL);

    Rng rng(5489u);
    for (int k = 0; k < 9999; ++k) rng.next_u64();
    CHECK(rng.next_u64() == 9981545732273789042ULL);
}

TEST_CASE("golden draws for seed 7, path agent/0") {
    // Recorded once; any change here breaks cross-run reproducibility of saved results.
    const std::uint64_t golden[10] = {
        1117582748122792241ULL, 4527079044241062181ULL, 9688268705031166199ULL, 6340096352039044872ULL,
        9614160817272778266ULL, 8591918845416281639ULL, 555287071726839809ULL,  2815875119137293792ULL,
        5278542356255589484ULL, 234654234428721153ULL,
    };
    Rng rng = derive_rng(7, {"agent", 0});
    for (auto g : golden) CHECK(rng.next_u64() == g);
}

TEST_CASE("uniform draws stay in range and uniform_index is unbiased") {
    Rng rng = derive_rng(3, {"test"});
    std::vector<int> counts(7, 0);
    const int draws = 70000;
    for (int k = 0; k < draws; ++k) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        ++counts[rng.uniform_index(7)];
    }
    const double p = 1.0 / 7.0;
    const double sigma = std::sqrt(draws * p * (1 - p));
    for (int c : counts) CHECK(std::abs(c - draws * p) < 5 * sigma);
    CHECK_THROWS_AS(rng.uniform_index(0), ContractViolation);
}

TEST_CASE("normal draws have unit variance") {
    Rng rng = derive_rng(3, {"normal"});
    double sum = 0, sq = 0;
    const int n = 40000;
    for (int k = 0; k < n; ++k) {
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    CHECK(std::abs(sum / n) < 5.0 / std::sqrt(n));
    CHECK(std::abs(sq / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
}

TEST_CASE("transitions reject non-finite data") {
    Observation s{0.0, 0.5}, s2{0.5, 0.5};
    CHECK_NOTHROW(make_transition(s, ActionValue::discrete(1), 1.0, s2, false, 2, 4));
    CHECK_THROWS_AS(make_transition(s, ActionValue::discrete(1), NAN, s2, false, 0, 4), ContractViolation);
    CHECK_THROWS_AS(make_transition(s, ActionValue::discrete(1), INFINITY, s2, false, 0, 4), ContractViolation);
    CHECK_THROWS_AS(make_transition(Observation{NAN, 0.0}, ActionValue::discrete(1), 0.0, s2, false, 0, 4),
                    ContractViolation);
    CHECK_THROWS_AS(make_transition(s, ActionValue::discrete(1), 0.0, s2, false, 4, 4), ContractViolation);
    CHECK_THROWS_AS(ActionValue::continuous({0.1, NAN}), ContractViolation);
}

TEST_CASE("action values compare bitwise") {
    CHECK(ActionValue::discrete(2) == ActionValue::discrete(2));
    CHECK_FALSE(ActionValue::discrete(2) == ActionValue::discrete(1));
    CHECK(ActionValue::continuous({0.25, -0.5}) == ActionValue::continuous({0.25, -0.5}));
    CHECK_FALSE(ActionValue::continuous({0.0}) == ActionValue::continuous({-0.0}));
    CHECK_FALSE(ActionValue::continuous({0.0}) == ActionValue::discrete(0));
    CHECK_THROWS_AS(ActionValue::discrete(1).values(), ContractViolation);
    CHECK_THROWS_AS(ActionValue::continuous({1.0}).index(), ContractViolation);
}
