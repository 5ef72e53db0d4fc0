// PCA by iterated power method with deflation. No external eigensolver;
// the iteration is deterministic (unit-basis start vector) so repeated
// runs on the same data produce identical loadings.

#ifndef VLMLAB_PCA_HPP
#define VLMLAB_PCA_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "vlmlab/matrix.hpp"

namespace vlmlab {

struct PcaResult {
    Matrix scores;    // rows x k
    Matrix loadings;  // cols x k, orthonormal columns
    std::vector<double> component_variances;
    std::vector<double> column_means;
};

namespace detail {

inline void gram_schmidt(std::vector<double>& v, const Matrix& loadings, std::size_t ncols) {
    for (std::size_t c = 0; c < ncols; ++c) {
        double proj = 0.0;
        for (std::size_t j = 0; j < v.size(); ++j) proj += v[j] * loadings(j, c);
        for (std::size_t j = 0; j < v.size(); ++j) v[j] -= proj * loadings(j, c);
    }
}

} // namespace detail

/// Scores and loadings of the top-k principal directions of the
/// column-centered data. Sign convention: the largest-magnitude loading
/// entry of each component is positive.
inline PcaResult pca(const Matrix& m, std::size_t k) {
    if (k > m.cols()) throw std::invalid_argument("pca: k > cols");
    if (m.rows() < 2) throw std::invalid_argument("pca: need at least 2 rows");

    const std::size_t n = m.rows();
    const std::size_t d = m.cols();

    std::vector<double> means(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) means[j] += m(i, j);
    for (double& x : means) x /= static_cast<double>(n);

    Matrix centered(n, d);
    double max_abs = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            centered(i, j) = m(i, j) - means[j];
            max_abs = std::max(max_abs, std::abs(m(i, j)));
        }

    // Sample covariance; d is small at desk scale.
    Matrix cov = matmul_at_b(centered, centered);
    const double denom = static_cast<double>(n - 1);
    for (double& x : cov.data()) x /= denom;

    double total_var = 0.0;
    for (std::size_t j = 0; j < d; ++j) total_var += cov(j, j);
    if (total_var < 1e-18 * (max_abs * max_abs + 1.0))
        throw std::invalid_argument("pca: degenerate covariance");

    constexpr int kMaxIters = 1000;
    constexpr double kConvergence = 1e-10;

    PcaResult result;
    result.loadings = Matrix(d, k);
    result.component_variances.assign(k, 0.0);
    result.column_means = means;

    Matrix deflated = cov;
    for (std::size_t comp = 0; comp < k; ++comp) {
        // Start from the basis vector of the largest remaining diagonal.
        std::size_t start = 0;
        for (std::size_t j = 1; j < d; ++j)
            if (deflated(j, j) > deflated(start, start)) start = j;

        std::vector<double> v(d, 0.0);
        v[start] = 1.0;
        detail::gram_schmidt(v, result.loadings, comp);
        double vn = norm(v);
        bool degenerate_direction = false;
        if (vn < 1e-12) {
            // Start vector fell in the span of earlier components; take the
            // first basis vector with a nonzero residual instead.
            for (std::size_t j = 0; j < d && vn < 1e-12; ++j) {
                std::fill(v.begin(), v.end(), 0.0);
                v[j] = 1.0;
                detail::gram_schmidt(v, result.loadings, comp);
                vn = norm(v);
            }
        }
        for (double& x : v) x /= vn;

        double lambda = 0.0;
        for (int it = 0; it < kMaxIters; ++it) {
            std::vector<double> w(d, 0.0);
            for (std::size_t r = 0; r < d; ++r) {
                double s = 0.0;
                for (std::size_t c = 0; c < d; ++c) s += deflated(r, c) * v[c];
                w[r] = s;
            }
            detail::gram_schmidt(w, result.loadings, comp);
            const double wn = norm(w);
            if (wn < 1e-300) {
                // Residual variance is exactly exhausted; keep the current
                // orthonormal direction with eigenvalue zero.
                degenerate_direction = true;
                break;
            }
            double delta = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                w[j] /= wn;
                delta = std::max(delta, std::abs(w[j] - v[j]));
            }
            v = w;
            lambda = wn;
            if (delta < kConvergence) break;
        }
        if (degenerate_direction) lambda = 0.0;

        // Largest-magnitude loading positive.
        std::size_t imax = 0;
        for (std::size_t j = 1; j < d; ++j)
            if (std::abs(v[j]) > std::abs(v[imax])) imax = j;
        if (v[imax] < 0.0)
            for (double& x : v) x = -x;

        for (std::size_t j = 0; j < d; ++j) result.loadings(j, comp) = v[j];
        result.component_variances[comp] = lambda;

        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t c = 0; c < d; ++c) deflated(r, c) -= lambda * v[r] * v[c];
    }

    result.scores = matmul(centered, result.loadings);
    return result;
}

/// Rows x k scores against the top-k principal directions.
inline Matrix pca_project(const Matrix& m, std::size_t k) { return pca(m, k).scores; }

} // namespace vlmlab

#endif // VLMLAB_PCA_HPP
