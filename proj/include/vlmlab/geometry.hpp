// Direction vectors between object representations and their decomposition
// into a relation-independent common part and the sine-carried key terms
// that discriminate opposing relations:
//
//     v_left   = common_lr - key_x      v_right = common_lr + key_x
//     v_behind = common_fb - key_y      v_front = common_fb + key_y
//
// with key_x = sin(m*theta) * (k3x vA + k4x vB) living entirely in the
// X-axis coefficient slots and key_y = sin(n*theta) * (k3y vA + k4y vB) in
// the Y-axis slots. Also: embedding interventions, object erasure, sampled
// direction-vector clouds, and the attention axis-split diagnostic.

#ifndef VLMLAB_GEOMETRY_HPP
#define VLMLAB_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "vlmlab/dualsim.hpp"
#include "vlmlab/matrix.hpp"
#include "vlmlab/random.hpp"

namespace vlmlab {

struct DirectionVector {
    Relation relation;
    std::vector<double> v;
};

/// v^r = h_satellite - h_nucleus.
inline DirectionVector direction_vector(std::span<const double> h_s, std::span<const double> h_n,
                                        Relation r) {
    if (h_s.size() != h_n.size())
        throw std::invalid_argument("direction_vector: dimension mismatch");
    DirectionVector out{r, std::vector<double>(h_s.size())};
    for (std::size_t i = 0; i < h_s.size(); ++i) out.v[i] = h_s[i] - h_n[i];
    return out;
}

struct DirectionDecomposition {
    Relation relation = Relation::Left;
    int sign = -1;  // -1 for left/behind, +1 for right/front
    Vec4 common{}, key_x{}, key_y{};
    double c1 = 0, c2 = 0;
    double c3 = 0, c4 = 0;      // X-axis sine coefficients of vA / vB
    double c3_y = 0, c4_y = 0;  // Y-axis analogs
    double k1x = 0, k2x = 0, k3x = 0, k4x = 0;
    double k1y = 0, k2y = 0, k3y = 0, k4y = 0;

    Vec4 reconstruct() const {
        Vec4 out;
        for (std::size_t i = 0; i < 4; ++i)
            out[i] = common[i] + sign * (key_x[i] + key_y[i]);
        return out;
    }
};

/// Common/key decomposition of the direction vector of a scene. The common
/// part is grouped per opposing pair (left/right vs front/behind), so the
/// X pair keeps its cos(m*theta) cross terms inside `common` while the Y
/// pair keeps cos(n*theta) terms, and only the sine terms discriminate.
inline DirectionDecomposition decompose(const TwoObjectScene& scene) {
    scene.validate();
    const Vec4 &qa = scene.q_a, &ka = scene.k_a, &va = scene.v_a;
    const Vec4 &qb = scene.q_b, &kb = scene.k_b, &vb = scene.v_b;

    DirectionDecomposition d;
    d.relation = scene.relation;
    d.k1x = qb[0] * ka[0] + qb[1] * ka[1];
    d.k2x = qa[0] * kb[0] + qa[1] * kb[1];
    d.k3x = qb[0] * ka[1] - qb[1] * ka[0];
    d.k4x = qa[0] * kb[1] - qa[1] * kb[0];
    d.k1y = qb[2] * ka[2] + qb[3] * ka[3];
    d.k2y = qa[2] * kb[2] + qa[3] * kb[3];
    d.k3y = qb[2] * ka[3] - qb[3] * ka[2];
    d.k4y = qa[2] * kb[3] - qa[3] * kb[2];

    const double qa_ka = qa[0] * ka[0] + qa[1] * ka[1] + qa[2] * ka[2] + qa[3] * ka[3];
    const double qb_kb = qb[0] * kb[0] + qb[1] * kb[1] + qb[2] * kb[2] + qb[3] * kb[3];

    const bool x_pair = scene.relation == Relation::Left || scene.relation == Relation::Right;
    if (x_pair) {
        const double phi = scene.m * scene.theta;
        d.c1 = qa_ka - d.k1y - d.k1x * std::cos(phi);
        d.c2 = d.k2x * std::cos(phi) + d.k2y - qb_kb;
        d.c3 = d.k3x * std::sin(phi);
        d.c4 = d.k4x * std::sin(phi);
        d.key_x = detail::axpy(d.c3, va, d.c4, vb);
        d.key_y = Vec4{};
        d.sign = scene.relation == Relation::Left ? -1 : +1;
    } else {
        const double phi = scene.n * scene.theta;
        d.c1 = qa_ka - d.k1x - d.k1y * std::cos(phi);
        d.c2 = d.k2x + d.k2y * std::cos(phi) - qb_kb;
        d.c3_y = d.k3y * std::sin(phi);
        d.c4_y = d.k4y * std::sin(phi);
        d.key_y = detail::axpy(d.c3_y, va, d.c4_y, vb);
        d.key_x = Vec4{};
        d.sign = scene.relation == Relation::Behind ? -1 : +1;
    }
    d.common = detail::axpy(d.c1, va, d.c2, vb);
    return d;
}

/// Satellite / nucleus / background position-index sets; pairwise disjoint.
struct ObjectMask {
    std::vector<std::size_t> satellite;
    std::vector<std::size_t> nucleus;
    std::vector<std::size_t> background;

    void validate(std::size_t total) const {
        std::vector<std::size_t> all;
        for (const auto* set : {&satellite, &nucleus, &background})
            all.insert(all.end(), set->begin(), set->end());
        for (std::size_t i : all)
            if (i >= total) throw std::out_of_range("ObjectMask: index out of range");
        std::sort(all.begin(), all.end());
        if (std::adjacent_find(all.begin(), all.end()) != all.end())
            throw std::invalid_argument("ObjectMask: index sets must be pairwise disjoint");
    }
};

/// Blend each row of v_r toward the mean row of v_rp:
/// row_i' = (1 - alpha) row_i + alpha * mean(v_rp).
inline Matrix intervene(const Matrix& v_r, const Matrix& v_rp, double alpha) {
    if (v_r.cols() != v_rp.cols()) throw std::invalid_argument("intervene: column mismatch");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("intervene: alpha must be in [0,1]");
    if (v_rp.rows() == 0) throw std::invalid_argument("intervene: empty replacement");
    std::vector<std::size_t> all(v_rp.rows());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const std::vector<double> mean = mean_pool(v_rp, all);
    Matrix out(v_r.rows(), v_r.cols());
    for (std::size_t i = 0; i < v_r.rows(); ++i)
        for (std::size_t j = 0; j < v_r.cols(); ++j)
            out(i, j) = (1.0 - alpha) * v_r(i, j) + alpha * mean[j];
    return out;
}

/// Replace the rows at `target` with the mean of the rows at `source`
/// (taken from the input, before any replacement). All other rows are
/// copied bit-identically.
inline Matrix erase_object(const Matrix& v, std::span<const std::size_t> target,
                           std::span<const std::size_t> source) {
    if (target.empty() || source.empty())
        throw std::invalid_argument("erase_object: empty index set");
    for (std::size_t i : target)
        if (i >= v.rows()) throw std::out_of_range("erase_object: target index out of range");
    const std::vector<double> mean = mean_pool(v, source);
    Matrix out = v;
    for (std::size_t i : target) out.set_row(i, mean);
    return out;
}

/// One direction vector per trial: sample patch subsets of the satellite and
/// nucleus, mean-pool each, subtract. An object with fewer than 20 patches
/// is used whole; larger objects contribute floor(|I|/2) sampled patches.
/// Trial t draws from rng.substream(t), so trials are order-independent.
inline Matrix sample_direction_vectors(const Matrix& v, const ObjectMask& mask,
                                       std::size_t trials, const RandomSource& rng) {
    if (mask.satellite.empty() || mask.nucleus.empty())
        throw std::invalid_argument("sample_direction_vectors: empty mask");
    if (trials < 1) throw std::invalid_argument("sample_direction_vectors: trials must be >= 1");
    mask.validate(v.rows());

    const auto draw = [&](const std::vector<std::size_t>& indices,
                          RandomSource& source) -> std::vector<std::size_t> {
        if (indices.size() < 20) return indices;
        const std::size_t k = indices.size() / 2;
        std::vector<std::size_t> out;
        out.reserve(k);
        for (std::size_t pick : source.sample_without_replacement(indices.size(), k))
            out.push_back(indices[pick]);
        return out;
    };

    Matrix out(trials, v.cols());
    for (std::size_t t = 0; t < trials; ++t) {
        RandomSource sub = rng.substream(t);
        const auto mean_s = mean_pool(v, draw(mask.satellite, sub));
        const auto mean_n = mean_pool(v, draw(mask.nucleus, sub));
        for (std::size_t j = 0; j < v.cols(); ++j) out(t, j) = mean_s[j] - mean_n[j];
    }
    return out;
}

struct AxisSplitResult {
    Matrix m_x, m_y;  // Q^X (K^X)^T and Q^Y (K^Y)^T, each N x N
    Matrix a_x, a_y;  // halves of softmax([M_X | M_Y]) per row
    double a_sn_x = 0.0;
    double a_sn_y = 0.0;
};

/// Split the attention-score computation into X and Y halves (columns
/// [0, d/2) are the X half), softmax the concatenated N x 2N score matrix
/// per row, and average the satellite-to-nucleus scores of each half.
/// Handles a single head; average over heads and samples in the caller.
inline AxisSplitResult axis_split(const Matrix& q, const Matrix& k, const ObjectMask& mask) {
    if (q.rows() != k.rows() || q.cols() != k.cols())
        throw std::invalid_argument("axis_split: Q and K must have the same shape");
    if (q.cols() % 2 != 0) throw std::invalid_argument("axis_split: odd head dimension");
    const std::size_t n = q.rows();
    const std::size_t half = q.cols() / 2;
    mask.validate(n);

    AxisSplitResult r;
    r.m_x = Matrix(n, n);
    r.m_y = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double sx = 0.0, sy = 0.0;
            for (std::size_t c = 0; c < half; ++c) sx += q(i, c) * k(j, c);
            for (std::size_t c = half; c < q.cols(); ++c) sy += q(i, c) * k(j, c);
            r.m_x(i, j) = sx;
            r.m_y(i, j) = sy;
        }
    }

    Matrix concat(n, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            concat(i, j) = r.m_x(i, j);
            concat(i, n + j) = r.m_y(i, j);
        }
    }
    const Matrix a = softmax_rows(concat);
    r.a_x = Matrix(n, n);
    r.a_y = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            r.a_x(i, j) = a(i, j);
            r.a_y(i, j) = a(i, n + j);
        }

    if (!mask.satellite.empty() && !mask.nucleus.empty()) {
        double sx = 0.0, sy = 0.0;
        for (std::size_t i : mask.satellite)
            for (std::size_t j : mask.nucleus) {
                sx += r.a_x(i, j);
                sy += r.a_y(i, j);
            }
        const double count = static_cast<double>(mask.satellite.size() * mask.nucleus.size());
        r.a_sn_x = sx / count;
        r.a_sn_y = sy / count;
    }
    return r;
}

/// Min-max normalize a series to [0,1]; a constant series maps to zeros.
inline std::vector<double> normalize_unit_range(std::span<const double> xs) {
    if (xs.empty()) return {};
    const auto [lo_it, hi_it] = std::minmax_element(xs.begin(), xs.end());
    const double lo = *lo_it, hi = *hi_it;
    std::vector<double> out(xs.size(), 0.0);
    if (hi > lo)
        for (std::size_t i = 0; i < xs.size(); ++i) out[i] = (xs[i] - lo) / (hi - lo);
    return out;
}

struct KeyTermStats {
    std::size_t count = 0;
    double mean_ratio = 0.0;
    double min_ratio = 0.0;
    double max_ratio = 0.0;
};

/// ||active key term|| / ||common term|| over a batch of scenes. Reporting
/// only; the magnitude claim is not asserted anywhere.
inline KeyTermStats key_term_report(std::span<const TwoObjectScene> scenes) {
    KeyTermStats stats;
    double sum = 0.0;
    for (const auto& scene : scenes) {
        const DirectionDecomposition d = decompose(scene);
        Vec4 key;
        for (std::size_t i = 0; i < 4; ++i) key[i] = d.key_x[i] + d.key_y[i];
        const double nc = norm(std::span<const double>(d.common));
        if (nc == 0.0) continue;
        const double ratio = norm(std::span<const double>(key)) / nc;
        if (stats.count == 0) {
            stats.min_ratio = stats.max_ratio = ratio;
        } else {
            stats.min_ratio = std::min(stats.min_ratio, ratio);
            stats.max_ratio = std::max(stats.max_ratio, ratio);
        }
        sum += ratio;
        ++stats.count;
    }
    if (stats.count > 0) stats.mean_ratio = sum / static_cast<double>(stats.count);
    return stats;
}

} // namespace vlmlab

#endif // VLMLAB_GEOMETRY_HPP
