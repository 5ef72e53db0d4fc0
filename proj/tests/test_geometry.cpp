#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "vlmlab/dualsim.hpp"
#include "vlmlab/fixtures.hpp"
#include "vlmlab/geometry.hpp"
#include "vlmlab/matrix.hpp"
#include "vlmlab/random.hpp"

using namespace vlmlab;

namespace {

DirectionVector scene_direction(const TwoObjectScene& s) {
    const ObjectOutputs out = closed_form_outputs(s);
    return direction_vector(out.h_a, out.h_b, s.relation);
}

} // namespace

TEST_CASE("direction_vector basics") {
    const std::vector<double> h_s = {1.0, 2.0}, h_n = {0.0, 1.0};
    const DirectionVector v = direction_vector(h_s, h_n, Relation::Left);
    CHECK(v.v == std::vector<double>{1.0, 1.0});
    CHECK(v.relation == Relation::Left);

    const DirectionVector zero = direction_vector(h_s, h_s, Relation::Right);
    CHECK(zero.v == std::vector<double>{0.0, 0.0});

    const std::vector<double> shorter = {1.0};
    CHECK_THROWS_AS(direction_vector(h_s, shorter, Relation::Left), std::invalid_argument);
}

TEST_CASE("mirrored scenes give opposite direction vectors") {
    RandomSource rng(211);
    for (int t = 0; t < 100; ++t) {
        TwoObjectScene s = fixtures::random_scene(rng, Relation::Left);
        const DirectionVector left = scene_direction(s);
        s.relation = Relation::Right;
        // Swapping which object carries the offset mirrors the geometry:
        // v_left(A,B at -m) = -v_right with A and B exchanged.
        TwoObjectScene mirrored = s;
        std::swap(mirrored.q_a, mirrored.q_b);
        std::swap(mirrored.k_a, mirrored.k_b);
        std::swap(mirrored.v_a, mirrored.v_b);
        const DirectionVector right = scene_direction(mirrored);
        for (std::size_t i = 0; i < 4; ++i)
            REQUIRE(left.v[i] == Catch::Approx(-right.v[i]).margin(1e-12));
    }
}

TEST_CASE("decomposition reassembles the direction vector") {
    RandomSource rng(223);
    for (int t = 0; t < 1000; ++t) {
        const TwoObjectScene s = fixtures::random_scene(rng);
        const DirectionDecomposition d = decompose(s);
        const DirectionVector direct = scene_direction(s);
        const Vec4 rebuilt = d.reconstruct();
        for (std::size_t i = 0; i < 4; ++i)
            REQUIRE(std::abs(rebuilt[i] - direct.v[i]) < 1e-12);
    }
}

TEST_CASE("behind scenes have exactly zero x-axis key terms") {
    RandomSource rng(227);
    for (int t = 0; t < 200; ++t) {
        const TwoObjectScene s = fixtures::random_scene(rng, Relation::Behind);
        const DirectionDecomposition d = decompose(s);
        CHECK(d.c3 == 0.0);
        CHECK(d.c4 == 0.0);
        CHECK(d.key_x == Vec4{0.0, 0.0, 0.0, 0.0});
        CHECK(d.key_y != Vec4{0.0, 0.0, 0.0, 0.0});
    }
}

TEST_CASE("left scenes have exactly zero y-axis key terms") {
    RandomSource rng(229);
    for (int t = 0; t < 200; ++t) {
        const TwoObjectScene s = fixtures::random_scene(rng, Relation::Left);
        const DirectionDecomposition d = decompose(s);
        CHECK(d.c3_y == 0.0);
        CHECK(d.c4_y == 0.0);
        CHECK(d.key_y == Vec4{0.0, 0.0, 0.0, 0.0});
    }
}

TEST_CASE("v_left plus v_right equals twice the common part") {
    RandomSource rng(233);
    for (int t = 0; t < 500; ++t) {
        TwoObjectScene s = fixtures::random_scene(rng, Relation::Left);
        const DirectionVector left = scene_direction(s);
        const DirectionDecomposition d = decompose(s);
        s.relation = Relation::Right;
        const DirectionVector right = scene_direction(s);
        for (std::size_t i = 0; i < 4; ++i)
            REQUIRE(std::abs(left.v[i] + right.v[i] - 2.0 * d.common[i]) < 1e-12);
    }
}

TEST_CASE("opposing relations are collinear around the common part") {
    RandomSource rng(239);
    for (int t = 0; t < 500; ++t) {
        TwoObjectScene s = fixtures::random_scene(rng, Relation::Left);
        const DirectionVector left = scene_direction(s);
        const DirectionDecomposition d = decompose(s);
        s.relation = Relation::Right;
        const DirectionVector right = scene_direction(s);
        for (std::size_t i = 0; i < 4; ++i) {
            const double from_left = left.v[i] - d.common[i];
            const double from_right = right.v[i] - d.common[i];
            REQUIRE(std::abs(from_left + from_right) < 1e-12);
        }
    }
}

TEST_CASE("decomposition coefficients match their definitions") {
    RandomSource rng(241);
    const TwoObjectScene s = fixtures::random_scene(rng, Relation::Left);
    const DirectionDecomposition d = decompose(s);
    const double sin_m = std::sin(s.m * s.theta);
    CHECK(d.c3 == Catch::Approx((s.q_b[0] * s.k_a[1] - s.q_b[1] * s.k_a[0]) * sin_m).margin(1e-15));
    CHECK(d.c4 == Catch::Approx((s.q_a[0] * s.k_b[1] - s.q_a[1] * s.k_b[0]) * sin_m).margin(1e-15));
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(d.key_x[i] == Catch::Approx(d.c3 * s.v_a[i] + d.c4 * s.v_b[i]).margin(1e-15));
}

TEST_CASE("intervene blends rows toward the replacement mean") {
    const Matrix v_r = Matrix::from_rows({{1.0, 2.0}, {3.0, 4.0}});
    const Matrix v_rp = Matrix::from_rows({{5.0, 6.0}, {7.0, 8.0}});  // mean (6, 7)
    SECTION("alpha 0 is identity") {
        CHECK(intervene(v_r, v_rp, 0.0) == v_r);
    }
    SECTION("alpha 1 replaces every row with the mean") {
        const Matrix out = intervene(v_r, v_rp, 1.0);
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(out(i, 0) == 6.0);
            CHECK(out(i, 1) == 7.0);
        }
    }
    SECTION("alpha outside [0,1] is rejected") {
        CHECK_THROWS_AS(intervene(v_r, v_rp, 1.5), std::invalid_argument);
        CHECK_THROWS_AS(intervene(v_r, v_rp, -0.1), std::invalid_argument);
    }
}

TEST_CASE("intervention linearity for mean-pooled direction vectors") {
    RandomSource rng(251);
    const std::size_t dim = 6, n_s = 5, n_n = 7;
    for (double alpha : {0.0, 0.25, 0.5, 1.0}) {
        const Matrix vs_r = fixtures::random_matrix(n_s, dim, rng);
        const Matrix vn_r = fixtures::random_matrix(n_n, dim, rng);
        const Matrix vs_rp = fixtures::random_matrix(n_s, dim, rng);
        const Matrix vn_rp = fixtures::random_matrix(n_n, dim, rng);

        std::vector<std::size_t> all_s(n_s), all_n(n_n);
        for (std::size_t i = 0; i < n_s; ++i) all_s[i] = i;
        for (std::size_t i = 0; i < n_n; ++i) all_n[i] = i;

        const auto dv = [&](const Matrix& s, const Matrix& n) {
            const auto ms = mean_pool(s, all_s);
            const auto mn = mean_pool(n, all_n);
            std::vector<double> out(dim);
            for (std::size_t j = 0; j < dim; ++j) out[j] = ms[j] - mn[j];
            return out;
        };

        const auto v_r = dv(vs_r, vn_r);
        const auto v_rp = dv(vs_rp, vn_rp);
        const auto v_mixed = dv(intervene(vs_r, vs_rp, alpha), intervene(vn_r, vn_rp, alpha));
        for (std::size_t j = 0; j < dim; ++j) {
            const double expected = (1.0 - alpha) * v_r[j] + alpha * v_rp[j];
            REQUIRE(std::abs(v_mixed[j] - expected) < 1e-12);
        }
    }
}

TEST_CASE("erase_object replaces targets with the source mean") {
    const Matrix v = Matrix::from_rows({{0.0, 0.0}, {2.0, 4.0}, {4.0, 8.0}});
    SECTION("hand-computed replacement") {
        const std::vector<std::size_t> target = {0}, source = {1, 2};
        const Matrix out = erase_object(v, target, source);
        CHECK(out(0, 0) == 3.0);
        CHECK(out(0, 1) == 6.0);
        CHECK(out(1, 0) == 2.0);
        CHECK(out(2, 1) == 8.0);
    }
    SECTION("self-replacement is a no-op") {
        const std::vector<std::size_t> idx = {1};
        CHECK(erase_object(v, idx, idx) == v);
    }
    SECTION("idempotent when source and target are disjoint") {
        const std::vector<std::size_t> target = {0}, source = {1, 2};
        const Matrix once = erase_object(v, target, source);
        const Matrix twice = erase_object(once, target, source);
        CHECK(once == twice);
    }
    SECTION("empty sets are rejected") {
        const std::vector<std::size_t> empty, some = {0};
        CHECK_THROWS_WITH(erase_object(v, empty, some),
                          Catch::Matchers::ContainsSubstring("empty"));
        CHECK_THROWS_WITH(erase_object(v, some, empty),
                          Catch::Matchers::ContainsSubstring("empty"));
    }
}

TEST_CASE("sample_direction_vectors") {
    RandomSource rng(257);
    SECTION("singleton masks give identical deterministic trials") {
        const Matrix v = fixtures::random_matrix(4, 3, rng);
        const ObjectMask mask{{1}, {2}, {}};
        const Matrix out = sample_direction_vectors(v, mask, 10, RandomSource(5));
        for (std::size_t t = 0; t < 10; ++t)
            for (std::size_t j = 0; j < 3; ++j)
                REQUIRE(out(t, j) == v(1, j) - v(2, j));
    }
    SECTION("small objects are used whole") {
        const Matrix v = fixtures::random_matrix(30, 2, rng);
        ObjectMask mask;
        for (std::size_t i = 0; i < 15; ++i) mask.satellite.push_back(i);
        for (std::size_t i = 15; i < 30; ++i) mask.nucleus.push_back(i);
        const Matrix out = sample_direction_vectors(v, mask, 100, RandomSource(7));
        for (std::size_t t = 1; t < 100; ++t)
            for (std::size_t j = 0; j < 2; ++j) REQUIRE(out(t, j) == out(0, j));
    }
    SECTION("constant-row objects are invariant to the sampled subset") {
        Matrix v(60, 2);
        for (std::size_t i = 0; i < 60; ++i) {
            v(i, 0) = i < 30 ? 2.0 : -1.0;
            v(i, 1) = i < 30 ? 5.0 : 0.5;
        }
        ObjectMask mask;
        for (std::size_t i = 0; i < 30; ++i) mask.satellite.push_back(i);
        for (std::size_t i = 30; i < 60; ++i) mask.nucleus.push_back(i);
        const Matrix out = sample_direction_vectors(v, mask, 50, RandomSource(11));
        for (std::size_t t = 0; t < 50; ++t) {
            REQUIRE(out(t, 0) == Catch::Approx(3.0).margin(1e-12));
            REQUIRE(out(t, 1) == Catch::Approx(4.5).margin(1e-12));
        }
    }
    SECTION("trials are reproducible and order-independent") {
        const Matrix v = fixtures::random_matrix(80, 3, rng);
        ObjectMask mask;
        for (std::size_t i = 0; i < 40; ++i) mask.satellite.push_back(i);
        for (std::size_t i = 40; i < 80; ++i) mask.nucleus.push_back(i);
        const Matrix a = sample_direction_vectors(v, mask, 20, RandomSource(13));
        const Matrix b = sample_direction_vectors(v, mask, 20, RandomSource(13));
        CHECK(a == b);
        const Matrix longer = sample_direction_vectors(v, mask, 40, RandomSource(13));
        for (std::size_t t = 0; t < 20; ++t)
            for (std::size_t j = 0; j < 3; ++j) REQUIRE(longer(t, j) == a(t, j));
    }
    SECTION("empty masks are rejected") {
        const Matrix v = fixtures::random_matrix(4, 2, rng);
        CHECK_THROWS_WITH(sample_direction_vectors(v, ObjectMask{{}, {1}, {}}, 1, RandomSource(1)),
                          Catch::Matchers::ContainsSubstring("empty mask"));
    }
}

TEST_CASE("object masks must be disjoint and in range") {
    ObjectMask bad{{0, 1}, {1}, {}};
    CHECK_THROWS_AS(bad.validate(4), std::invalid_argument);
    ObjectMask oob{{9}, {1}, {}};
    CHECK_THROWS_AS(oob.validate(4), std::out_of_range);
}

TEST_CASE("axis_split identities") {
    RandomSource rng(263);
    const std::size_t n = 6, d = 8;
    const Matrix q = fixtures::random_matrix(n, d, rng);
    const Matrix k = fixtures::random_matrix(n, d, rng);
    const ObjectMask mask{{0, 1}, {4, 5}, {2, 3}};
    const AxisSplitResult r = axis_split(q, k, mask);

    SECTION("m_x + m_y equals the full product") {
        const Matrix full = matmul_a_bt(q, k);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                REQUIRE(std::abs(r.m_x(i, j) + r.m_y(i, j) - full(i, j)) < 1e-12);
    }
    SECTION("concatenated softmax rows sum to one") {
        for (std::size_t i = 0; i < n; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < n; ++j) sum += r.a_x(i, j) + r.a_y(i, j);
            REQUIRE(std::abs(sum - 1.0) < 1e-12);
        }
    }
    SECTION("satellite-to-nucleus averages are within (0,1)") {
        CHECK(r.a_sn_x > 0.0);
        CHECK(r.a_sn_y > 0.0);
        CHECK(r.a_sn_x < 1.0);
        CHECK(r.a_sn_y < 1.0);
    }
}

TEST_CASE("axis_split with zero y half") {
    RandomSource rng(269);
    const std::size_t n = 4, d = 6;
    Matrix q = fixtures::random_matrix(n, d, rng);
    Matrix k = fixtures::random_matrix(n, d, rng);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = d / 2; c < d; ++c) {
            q(i, c) = 0.0;
            k(i, c) = 0.0;
        }
    const AxisSplitResult r = axis_split(q, k, ObjectMask{{0}, {3}, {}});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) REQUIRE(r.m_y(i, j) == 0.0);
}

TEST_CASE("axis_split rejects bad shapes") {
    CHECK_THROWS_AS(axis_split(Matrix(3, 4), Matrix(4, 4), ObjectMask{}), std::invalid_argument);
    CHECK_THROWS_WITH(axis_split(Matrix(3, 5), Matrix(3, 5), ObjectMask{}),
                      Catch::Matchers::ContainsSubstring("odd"));
}

TEST_CASE("normalize_unit_range") {
    const std::vector<double> xs = {2.0, 4.0, 3.0};
    const auto out = normalize_unit_range(xs);
    CHECK(out == std::vector<double>{0.0, 1.0, 0.5});
    const std::vector<double> flat = {1.0, 1.0};
    CHECK(normalize_unit_range(flat) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("key_term_report collects norm ratios") {
    RandomSource rng(271);
    std::vector<TwoObjectScene> scenes;
    for (int t = 0; t < 50; ++t) scenes.push_back(fixtures::random_scene(rng));
    const KeyTermStats stats = key_term_report(scenes);
    CHECK(stats.count == 50);
    CHECK(stats.mean_ratio > 0.0);
    CHECK(stats.min_ratio <= stats.mean_ratio);
    CHECK(stats.mean_ratio <= stats.max_ratio);
}

TEST_CASE("direction clouds: left/right key parts anti-parallel, left/behind disjoint support") {
    RandomSource rng(277);
    const fixtures::SceneFamily family = fixtures::scene_family(rng);
    RandomSource jitter(31);

    Vec4 mean_left{}, mean_right{};
    for (int t = 0; t < 100; ++t) {
        const auto sl = family.sample(Relation::Left, jitter);
        const auto sr = family.sample(Relation::Right, jitter);
        const auto sb = family.sample(Relation::Behind, jitter);
        const DirectionDecomposition dl = decompose(sl);
        const DirectionDecomposition dr = decompose(sr);
        const DirectionDecomposition db = decompose(sb);
        for (std::size_t i = 0; i < 4; ++i) {
            mean_left[i] += dl.sign * dl.key_x[i];
            mean_right[i] += dr.sign * dr.key_x[i];
        }
        REQUIRE(dl.key_y == Vec4{0.0, 0.0, 0.0, 0.0});
        REQUIRE(db.key_x == Vec4{0.0, 0.0, 0.0, 0.0});
        REQUIRE(db.c3 == 0.0);
        REQUIRE(db.c4 == 0.0);
    }
    double dp = 0.0, nl = 0.0, nr = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        dp += mean_left[i] * mean_right[i];
        nl += mean_left[i] * mean_left[i];
        nr += mean_right[i] * mean_right[i];
    }
    const double cosine = dp / std::sqrt(nl * nr);
    CHECK(cosine < -0.99);
}
