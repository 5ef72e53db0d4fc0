// Seeded synthetic fixtures shared by the CLI and the test suites: random
// two-object scenes, a keyword configuration with a known object set,
// hand-built token maps for the label-map algorithm, a planted-cluster
// image for the full token-map pipeline, and the linear-teacher
// distillation problem.

#ifndef VLMLAB_FIXTURES_HPP
#define VLMLAB_FIXTURES_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "vlmlab/dualsim.hpp"
#include "vlmlab/matrix.hpp"
#include "vlmlab/random.hpp"
#include "vlmlab/tokenmap.hpp"

namespace vlmlab::fixtures {

inline Vec4 random_vec4(RandomSource& rng) {
    return {rng.normal(), rng.normal(), rng.normal(), rng.normal()};
}

inline TwoObjectScene random_scene(RandomSource& rng, Relation relation) {
    TwoObjectScene s;
    s.q_a = random_vec4(rng);
    s.k_a = random_vec4(rng);
    s.v_a = random_vec4(rng);
    s.q_b = random_vec4(rng);
    s.k_b = random_vec4(rng);
    s.v_b = random_vec4(rng);
    s.relation = relation;
    s.m = 1 + static_cast<int>(rng.uniform_index(5));
    s.n = 1 + static_cast<int>(rng.uniform_index(5));
    s.theta = rng.uniform(0.1, 2.0);
    return s;
}

inline TwoObjectScene random_scene(RandomSource& rng) {
    const Relation r = kAllRelations[rng.uniform_index(4)];
    return random_scene(rng, r);
}

/// A family of scenes sharing one (q, k, v) base with small jitter; used for
/// direction-vector clouds.
struct SceneFamily {
    TwoObjectScene base;
    double jitter = 0.05;

    TwoObjectScene sample(Relation relation, RandomSource& rng) const {
        TwoObjectScene s = base;
        s.relation = relation;
        const auto perturb = [&](Vec4& v) {
            for (double& x : v) x += jitter * rng.normal();
        };
        perturb(s.q_a);
        perturb(s.k_a);
        perturb(s.v_a);
        perturb(s.q_b);
        perturb(s.k_b);
        perturb(s.v_b);
        return s;
    }
};

inline SceneFamily scene_family(RandomSource& rng) {
    SceneFamily fam;
    fam.base = random_scene(rng, Relation::Left);
    fam.base.m = 3;
    fam.base.n = 2;
    fam.base.theta = 0.7;
    return fam;
}

// --- keyword configuration ---------------------------------------------------

inline KeywordConfig bear_keyword_config() {
    KeywordConfig cfg;
    cfg.objects.push_back({"bear", {"bear", "head", "eye", "nose", "paw"}});
    cfg.objects.push_back({"log", {"log", "wood", "bark"}});
    cfg.objects.push_back({"apple", {"apple"}});
    cfg.objects.push_back({"berry", {"berry"}});
    cfg.representative["bear"] = {"bear"};
    cfg.representative["log"] = {"log"};
    cfg.attributes["bear"] = {"fur", "brown"};
    cfg.attributes["log"] = {"wood", "rough"};
    cfg.colors["bear"] = {139, 69, 19};
    cfg.colors["log"] = {160, 82, 45};
    cfg.colors["apple"] = {200, 30, 30};
    cfg.colors["berry"] = {60, 30, 160};
    cfg.synonyms["truck"] = {"truck", "pickup", "lorry", "hauler", "firetruck"};
    cfg.synonyms["bear"] = {"bear", "grizzly"};
    cfg.finalize();
    return cfg;
}

// --- hand-built token maps ----------------------------------------------------

inline TokenMap grid_tokenmap(std::size_t height, std::size_t width,
                              const std::vector<std::string>& tokens) {
    TokenMap tm;
    tm.height = height;
    tm.width = width;
    for (const auto& t : tokens) tm.cells.push_back({t, "", 1.0, 0.0});
    tm.validate();
    return tm;
}

/// Center cell is unknown; meaningful neighbors are bear x3 and paw x1.
inline TokenMap bear_3x3_tokenmap() {
    return grid_tokenmap(3, 3,
                         {"bear", "bear", "bear",
                          "paw", "xx", ".",
                          ".", ".", "."});
}

/// Two cells: a kept run and a punctuation run whose top-2 is punctuation too.
inline TokenMap punct_tokenmap() {
    TokenMap tm;
    tm.height = 1;
    tm.width = 2;
    tm.cells.push_back({"the", "cat", 0.8, 0.1});
    tm.cells.push_back({".", ".", 0.6, 0.2});
    tm.validate();
    return tm;
}

// --- planted-cluster pipeline fixture ----------------------------------------

inline std::vector<std::string> demo_vocab() {
    return {"bear", "head", "eye", "nose", "paw", "log",  "wood", "bark",
            "fur",  "brown", "rough", ".",  ",",  " ",    "the",  "in",
            "sky",  "tree",  "rock",  "xx", "water", "grass", "!", "?"};
}

/// 8x8 label grid: a bear blob over a log strip on punctuation background.
inline std::vector<std::size_t> demo_label_grid() {
    const std::size_t B = 0;   // "bear"
    const std::size_t P = 4;   // "paw"
    const std::size_t F = 8;   // "fur"
    const std::size_t L = 5;   // "log"
    const std::size_t W = 6;   // "wood"
    const std::size_t D = 11;  // "."
    return {
        D, D, D, D, D, D, D, D,
        D, D, F, B, B, D, D, D,
        D, F, B, B, B, B, D, D,
        D, B, B, B, B, B, B, D,
        D, P, B, B, B, P, D, D,
        L, L, L, W, L, L, L, L,
        L, L, L, L, L, W, L, L,
        D, D, D, D, D, D, D, D,
    };
}

/// Embeddings whose logit-lens decoding recovers a planted token grid:
/// each row points along its token's unembedding column plus noise.
inline Matrix planted_embeddings(const std::vector<std::size_t>& labels, const Matrix& w_u,
                                 double scale, double noise, RandomSource& rng) {
    Matrix v(labels.size(), w_u.rows());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        for (std::size_t j = 0; j < w_u.rows(); ++j)
            v(i, j) = scale * w_u(j, labels[i]) + noise * rng.normal();
    }
    return v;
}

inline Matrix random_unembedding(std::size_t dim, std::size_t vocab, RandomSource& rng) {
    Matrix w(dim, vocab);
    for (double& x : w.data()) x = rng.normal();
    return w;
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, RandomSource& rng,
                            double stddev = 1.0) {
    Matrix m(rows, cols);
    for (double& x : m.data()) x = stddev * rng.normal();
    return m;
}

// --- distillation fixture -----------------------------------------------------

/// Linear teacher: teacher_logits = V * w_star. The decoder starts from a
/// deliberately different unembedding.
struct DistillFixture {
    Matrix v_train, teacher_train;
    Matrix v_val, teacher_val;
    Matrix w_star;
    Matrix w_init;
};

inline DistillFixture distill_fixture(std::uint64_t seed, std::size_t dim = 16,
                                      std::size_t vocab = 32, std::size_t n_train = 2000,
                                      std::size_t n_val = 500) {
    RandomSource rng(seed);
    DistillFixture f;
    f.w_star = random_matrix(dim, vocab, rng);
    f.w_init = random_matrix(dim, vocab, rng, 0.1);
    f.v_train = random_matrix(n_train, dim, rng);
    f.v_val = random_matrix(n_val, dim, rng);
    f.teacher_train = matmul(f.v_train, f.w_star);
    f.teacher_val = matmul(f.v_val, f.w_star);
    return f;
}

} // namespace vlmlab::fixtures

#endif // VLMLAB_FIXTURES_HPP
