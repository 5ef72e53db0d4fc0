#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "vlmlab/matrix.hpp"
#include "vlmlab/random.hpp"
#include "vlmlab/rope.hpp"

using namespace vlmlab;

namespace {

// Independent oracle: explicit 2x2 rotation-matrix multiply per group.
std::vector<double> rotate_pairs_oracle(const std::vector<double>& v, double position,
                                        const std::vector<double>& freqs) {
    std::vector<double> out(v.size());
    for (std::size_t g = 0; g < v.size() / 2; ++g) {
        const double a = position * freqs[g];
        out[2 * g] = std::cos(a) * v[2 * g] - std::sin(a) * v[2 * g + 1];
        out[2 * g + 1] = std::sin(a) * v[2 * g] + std::cos(a) * v[2 * g + 1];
    }
    return out;
}

// Independent oracle: per-group relative-distance closed form of the dot.
double rope_dot_oracle(const std::vector<double>& q, int m, const std::vector<double>& k, int n,
                       const std::vector<double>& freqs) {
    double s = 0.0;
    for (std::size_t g = 0; g < q.size() / 2; ++g) {
        const double delta = static_cast<double>(m - n) * freqs[g];
        const double q0 = q[2 * g], q1 = q[2 * g + 1];
        const double k0 = k[2 * g], k1 = k[2 * g + 1];
        s += (q0 * k0 + q1 * k1) * std::cos(delta) + (q0 * k1 - q1 * k0) * std::sin(delta);
    }
    return s;
}

std::vector<double> random_vector(RandomSource& rng, std::size_t d) {
    std::vector<double> v(d);
    for (double& x : v) x = rng.normal();
    return v;
}

} // namespace

TEST_CASE("frequency schedule values") {
    const FrequencySchedule s(10000.0, 64);
    CHECK(s.frequency(0) == 1.0);
    CHECK(s.frequency(32) == Catch::Approx(1e-4).epsilon(1e-12));
    CHECK(2.0 * std::sin(50.0 * s.frequency(32)) == Catch::Approx(0.01).margin(1e-4));

    const FrequencySchedule scaled(10000.0, 64, RopeScaling{49.0, 8.0});
    CHECK(scaled.scale_factor(0) == 1.0);
    CHECK(scaled.frequency(32) == Catch::Approx(50.0 * 1e-4).epsilon(1e-12));

    CHECK_THROWS_AS(s.frequency(33), std::out_of_range);
    CHECK_THROWS_AS(FrequencySchedule(10000.0, 63), std::invalid_argument);
}

TEST_CASE("scaling factor is nondecreasing with g(0) = 1") {
    for (double alpha : {0.0, 49.0, 99.0}) {
        const FrequencySchedule s(10000.0, 64, RopeScaling{alpha, 8.0});
        CHECK(s.scale_factor(0) == 1.0);
        double prev = s.scale_factor(0);
        for (std::size_t i = 1; i <= 32; ++i) {
            const double g = s.scale_factor(i);
            REQUIRE(g >= prev);
            prev = g;
        }
    }
}

TEST_CASE("apply_rope_1d matches the rotation-matrix oracle") {
    SECTION("zero position is identity") {
        const FrequencySchedule s(10000.0, 8);
        RandomSource rng(1);
        const auto v = random_vector(rng, 8);
        for (auto layout : {RopeLayout::AdjacentPairs, RopeLayout::RotateHalf})
            CHECK(apply_rope_1d(v, 0, s, layout) == v);
    }
    SECTION("quarter turn") {
        const std::vector<double> v = {1.0, 0.0};
        const auto out = apply_rope_1d(v, 1, uniform_frequencies(std::numbers::pi / 2, 1),
                                       RopeLayout::AdjacentPairs);
        CHECK(out[0] == Catch::Approx(0.0).margin(1e-15));
        CHECK(out[1] == Catch::Approx(1.0).margin(1e-15));
    }
    SECTION("half turn") {
        const std::vector<double> v = {0.0, 1.0};
        const auto out = apply_rope_1d(v, 1, uniform_frequencies(std::numbers::pi, 1),
                                       RopeLayout::AdjacentPairs);
        CHECK(out[0] == Catch::Approx(0.0).margin(1e-15));
        CHECK(out[1] == Catch::Approx(-1.0).margin(1e-15));
    }
    SECTION("random vectors against the oracle") {
        RandomSource rng(77);
        const FrequencySchedule s(10000.0, 16);
        const auto freqs = s.frequencies(8);
        for (int t = 0; t < 200; ++t) {
            const auto v = random_vector(rng, 16);
            const int m = static_cast<int>(rng.uniform_index(100));
            const auto mine = apply_rope_1d(v, m, s, RopeLayout::AdjacentPairs);
            const auto oracle = rotate_pairs_oracle(v, m, freqs);
            for (std::size_t i = 0; i < 16; ++i)
                REQUIRE(mine[i] == Catch::Approx(oracle[i]).margin(1e-12));
        }
    }
    SECTION("dimension mismatch is rejected") {
        const FrequencySchedule s(10000.0, 8);
        const std::vector<double> v(6, 1.0);
        CHECK_THROWS_AS(apply_rope_1d(v, 1, s, RopeLayout::AdjacentPairs), std::invalid_argument);
    }
}

TEST_CASE("apply_rope preserves norms") {
    RandomSource rng(5);
    const FrequencySchedule s(10000.0, 64);
    for (int t = 0; t < 200; ++t) {
        const auto v = random_vector(rng, 64);
        const int m = static_cast<int>(rng.uniform_index(200)) - 100;
        for (auto layout : {RopeLayout::AdjacentPairs, RopeLayout::RotateHalf}) {
            const auto r1 = apply_rope_1d(v, m, s, layout);
            REQUIRE(std::abs(norm(r1) - norm(v)) < 1e-12 * (1.0 + norm(v)));
            const auto r2 = apply_rope_2d(v, {m, -m}, s, layout);
            REQUIRE(std::abs(norm(r2) - norm(v)) < 1e-12 * (1.0 + norm(v)));
        }
    }
}

TEST_CASE("apply_rope_2d basics") {
    SECTION("origin is identity") {
        RandomSource rng(2);
        const auto v = random_vector(rng, 8);
        const FrequencySchedule s(10000.0, 8);
        CHECK(apply_rope_2d(v, {0, 0}, s, RopeLayout::AdjacentPairs) == v);
    }
    SECTION("x rotates the first half only") {
        const std::vector<double> v = {1.0, 0.0, 1.0, 0.0};
        const auto freqs = uniform_frequencies(std::numbers::pi / 2, 1);
        const auto out = apply_rope_2d(v, {1, 0}, freqs, freqs, RopeLayout::AdjacentPairs);
        CHECK(out[0] == Catch::Approx(0.0).margin(1e-15));
        CHECK(out[1] == Catch::Approx(1.0).margin(1e-15));
        CHECK(out[2] == 1.0);
        CHECK(out[3] == 0.0);
    }
    SECTION("changing y leaves the x half bit-identical") {
        RandomSource rng(3);
        const FrequencySchedule s(10000.0, 16);
        const auto v = random_vector(rng, 16);
        const auto a = apply_rope_2d(v, {3, 1}, s, RopeLayout::AdjacentPairs);
        const auto b = apply_rope_2d(v, {3, 9}, s, RopeLayout::AdjacentPairs);
        for (std::size_t i = 0; i < 8; ++i) REQUIRE(a[i] == b[i]);
    }
    SECTION("dimension not divisible by 4 is rejected") {
        const FrequencySchedule s(10000.0, 6);
        const std::vector<double> v(6, 1.0);
        CHECK_THROWS_AS(apply_rope_2d(v, {1, 1}, s, RopeLayout::AdjacentPairs),
                        std::invalid_argument);
    }
}

TEST_CASE("rope_dot basics") {
    RandomSource rng(9);
    const FrequencySchedule s(10000.0, 8);
    SECTION("equal positions reduce to the plain dot") {
        for (int t = 0; t < 50; ++t) {
            const auto q = random_vector(rng, 8);
            const auto k = random_vector(rng, 8);
            const int m = static_cast<int>(rng.uniform_index(50));
            REQUIRE(rope_dot(q, m, k, m, s, RopeLayout::AdjacentPairs) ==
                    Catch::Approx(dot(q, k)).margin(1e-12));
        }
    }
    SECTION("unit offset with theta = 1 gives cos(1)") {
        const std::vector<double> q = {1.0, 0.0}, k = {1.0, 0.0};
        const double val =
            rope_dot(q, 3, k, 2, uniform_frequencies(1.0, 1), RopeLayout::AdjacentPairs);
        CHECK(val == Catch::Approx(std::cos(1.0)).margin(1e-15));
    }
    SECTION("matches the relative-distance oracle") {
        for (int t = 0; t < 200; ++t) {
            const auto q = random_vector(rng, 8);
            const auto k = random_vector(rng, 8);
            const int m = static_cast<int>(rng.uniform_index(100));
            const int n = static_cast<int>(rng.uniform_index(100));
            const double mine = rope_dot(q, m, k, n, s, RopeLayout::AdjacentPairs);
            const double oracle = rope_dot_oracle(q, m, k, n, s.frequencies(4));
            REQUIRE(mine == Catch::Approx(oracle).margin(1e-9));
        }
    }
}

TEST_CASE("rope_dot shift invariance") {
    RandomSource rng(31);
    std::vector<FrequencySchedule> schedules;
    for (double alpha : {0.0, 49.0, 99.0})
        for (std::size_t d : {2, 4, 8, 64})
            schedules.emplace_back(10000.0, d,
                                   alpha == 0.0 ? std::optional<RopeScaling>{}
                                                : std::optional<RopeScaling>{{alpha, 8.0}});
    for (const auto& s : schedules) {
        const std::size_t d = s.head_dim();
        for (auto layout : {RopeLayout::AdjacentPairs, RopeLayout::RotateHalf}) {
            for (int t = 0; t < 40; ++t) {
                const auto q = random_vector(rng, d);
                const auto k = random_vector(rng, d);
                const int m = static_cast<int>(rng.uniform_index(100));
                const int n = static_cast<int>(rng.uniform_index(100));
                const int shift = static_cast<int>(rng.uniform_index(101)) - 50;
                const double base = rope_dot(q, m, k, n, s, layout);
                const double shifted = rope_dot(q, m + shift, k, n + shift, s, layout);
                REQUIRE(std::abs(base - shifted) < 1e-9);
            }
        }
    }
}

TEST_CASE("rope_dot 2d shift invariance per axis") {
    RandomSource rng(37);
    for (std::size_t d : {4, 8, 64}) {
        const FrequencySchedule s(10000.0, d);
        for (int t = 0; t < 60; ++t) {
            const auto q = random_vector(rng, d);
            const auto k = random_vector(rng, d);
            const PatchPosition pq{static_cast<int>(rng.uniform_index(40)),
                                   static_cast<int>(rng.uniform_index(40))};
            const PatchPosition pk{static_cast<int>(rng.uniform_index(40)),
                                   static_cast<int>(rng.uniform_index(40))};
            const int tx = static_cast<int>(rng.uniform_index(41)) - 20;
            const int ty = static_cast<int>(rng.uniform_index(41)) - 20;
            const double base = rope_dot(q, pq, k, pk, s, RopeLayout::AdjacentPairs);
            const double shift_x = rope_dot(q, {pq.x + tx, pq.y}, k, {pk.x + tx, pk.y}, s,
                                            RopeLayout::AdjacentPairs);
            const double shift_y = rope_dot(q, {pq.x, pq.y + ty}, k, {pk.x, pk.y + ty}, s,
                                            RopeLayout::AdjacentPairs);
            REQUIRE(std::abs(base - shift_x) < 1e-9);
            REQUIRE(std::abs(base - shift_y) < 1e-9);
        }
    }
}

TEST_CASE("conjugate symmetry: opposite offsets cancel the sine terms") {
    RandomSource rng(41);
    for (int t = 0; t < 200; ++t) {
        const auto q = random_vector(rng, 2);
        const auto k = random_vector(rng, 2);
        const double theta = rng.uniform(0.1, 2.0);
        const int m = 1 + static_cast<int>(rng.uniform_index(10));
        const auto freqs = uniform_frequencies(theta, 1);
        const double plus = rope_dot(q, m, k, 0, freqs, RopeLayout::AdjacentPairs);
        const double minus = rope_dot(q, -m, k, 0, freqs, RopeLayout::AdjacentPairs);
        const double expected = 2.0 * dot(q, k) * std::cos(m * theta);
        REQUIRE(std::abs(plus + minus - expected) < 1e-12);
    }
}

TEST_CASE("layout permutation") {
    SECTION("d = 2 is the identity") {
        CHECK(layout_permutation(2) == std::vector<std::size_t>{0, 1});
    }
    SECTION("d = 4") {
        CHECK(layout_permutation(4) == std::vector<std::size_t>{0, 2, 1, 3});
    }
    SECTION("odd d is rejected") {
        CHECK_THROWS_AS(layout_permutation(5), std::invalid_argument);
    }
    SECTION("cross-layout dot products agree") {
        RandomSource rng(43);
        const FrequencySchedule s(10000.0, 8);
        const auto pi = layout_permutation(8);
        for (int t = 0; t < 200; ++t) {
            const auto q = random_vector(rng, 8);
            const auto k = random_vector(rng, 8);
            const int m = static_cast<int>(rng.uniform_index(60));
            const int n = static_cast<int>(rng.uniform_index(60));
            const double adj = rope_dot(q, m, k, n, s, RopeLayout::AdjacentPairs);
            const double rot = rope_dot(permute(q, pi), m, permute(k, pi), n, s,
                                        RopeLayout::RotateHalf);
            REQUIRE(std::abs(adj - rot) < 1e-12);
        }
    }
}

TEST_CASE("scaled schedules keep shift invariance") {
    RandomSource rng(47);
    const FrequencySchedule s(10000.0, 64, RopeScaling{49.0, 8.0});
    for (int t = 0; t < 100; ++t) {
        const auto q = random_vector(rng, 64);
        const auto k = random_vector(rng, 64);
        const int m = static_cast<int>(rng.uniform_index(50));
        const int n = static_cast<int>(rng.uniform_index(50));
        const int shift = static_cast<int>(rng.uniform_index(21)) - 10;
        const double base = rope_dot(q, m, k, n, s, RopeLayout::RotateHalf);
        const double moved = rope_dot(q, m + shift, k, n + shift, s, RopeLayout::RotateHalf);
        REQUIRE(std::abs(base - moved) < 1e-9);
    }
}

TEST_CASE("rope config json round trip") {
    const RopeConfig cfg{FrequencySchedule(10000.0, 64, RopeScaling{49.0, 8.0}),
                         RopeLayout::RotateHalf};
    const auto j = rope_config_to_json(cfg);
    const RopeConfig back = rope_config_from_json(j);
    CHECK(back.schedule.base() == cfg.schedule.base());
    CHECK(back.schedule.head_dim() == cfg.schedule.head_dim());
    REQUIRE(back.schedule.scaling().has_value());
    CHECK(back.schedule.scaling()->alpha == 49.0);
    CHECK(back.layout == RopeLayout::RotateHalf);

    const auto plain = rope_config_from_json(nlohmann::json{{"base", 100.0}, {"head_dim", 8}});
    CHECK_FALSE(plain.schedule.scaling().has_value());
    CHECK(plain.layout == RopeLayout::AdjacentPairs);
    CHECK_THROWS_WITH(rope_config_from_json(nlohmann::json{{"head_dim", 8}}),
                      Catch::Matchers::ContainsSubstring("base"));
}
