// Rotary position embedding in 1D and 2D, with both industrial pairing
// layouts and the frequency-schedule rectification
//
//     theta_i  = base^(-2i/d)
//     theta_i' = theta_i * g(i),   g(i) = 1 + alpha * (2i/d)^p
//
// Layouts:
//   AdjacentPairs (GPT-J style)  - group i rotates dims (2i, 2i+1)
//   RotateHalf    (GPT-NeoX)     - group i rotates dims (i, i+d/2)
//
// 2D RoPE splits the vector into an X half and a Y half; each half gets an
// independent sub-rotation (the chosen layout applied within the half) so
// the two axes never mix. Group g of either axis uses theta_g.
//
// Dot products of rotated queries and keys depend on positions only through
// their difference, per axis in 2D. The low-level entry points take explicit
// per-group frequencies so a single-frequency minimal model can be driven
// through the same code path as a full schedule.

#ifndef VLMLAB_ROPE_HPP
#define VLMLAB_ROPE_HPP

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace vlmlab {

enum class RopeLayout { AdjacentPairs, RotateHalf };

inline const char* to_string(RopeLayout layout) {
    return layout == RopeLayout::AdjacentPairs ? "adjacent" : "rotate_half";
}

inline RopeLayout rope_layout_from_string(const std::string& s) {
    if (s == "adjacent") return RopeLayout::AdjacentPairs;
    if (s == "rotate_half") return RopeLayout::RotateHalf;
    throw std::invalid_argument("unknown rope layout: " + s);
}

struct RopeScaling {
    double alpha = 0.0;  // scaling magnitude, >= 0
    double p = 1.0;      // exponent, >= 1
};

/// Patch coordinates in patch units: x is the column index, y the row index.
/// Signed values are allowed for relative-offset scenes.
struct PatchPosition {
    int x = 0;
    int y = 0;
};

class FrequencySchedule {
public:
    FrequencySchedule(double base, std::size_t head_dim,
                      std::optional<RopeScaling> scaling = std::nullopt)
        : base_(base), head_dim_(head_dim), scaling_(scaling) {
        // base > 1 keeps theta_i strictly decreasing in i.
        if (!(base > 1.0)) throw std::invalid_argument("FrequencySchedule: base must exceed 1");
        if (head_dim == 0 || head_dim % 2 != 0)
            throw std::invalid_argument("FrequencySchedule: head_dim must be a positive even count");
        if (scaling_) {
            if (scaling_->alpha < 0.0)
                throw std::invalid_argument("FrequencySchedule: alpha must be nonnegative");
            if (scaling_->p < 1.0)
                throw std::invalid_argument("FrequencySchedule: p must be >= 1");
        }
    }

    double base() const { return base_; }
    std::size_t head_dim() const { return head_dim_; }
    const std::optional<RopeScaling>& scaling() const { return scaling_; }

    /// g(i); identically 1 without scaling, and g(0) = 1 always.
    double scale_factor(std::size_t i) const {
        check_index(i);
        if (!scaling_) return 1.0;
        if (i == 0) return 1.0;
        const double x = 2.0 * static_cast<double>(i) / static_cast<double>(head_dim_);
        return 1.0 + scaling_->alpha * std::pow(x, scaling_->p);
    }

    /// theta_i, scaled when a scaling is set. Valid for 0 <= 2i <= d; the
    /// index i = d/2 gives the limiting frequency base^(-1).
    double frequency(std::size_t i) const {
        check_index(i);
        const double exponent = -2.0 * static_cast<double>(i) / static_cast<double>(head_dim_);
        return std::pow(base_, exponent) * scale_factor(i);
    }

    std::vector<double> frequencies(std::size_t groups) const {
        std::vector<double> out(groups);
        for (std::size_t i = 0; i < groups; ++i) out[i] = frequency(i);
        return out;
    }

private:
    void check_index(std::size_t i) const {
        if (2 * i > head_dim_)
            throw std::out_of_range("FrequencySchedule: group index " + std::to_string(i) +
                                    " out of range for head_dim " + std::to_string(head_dim_));
    }

    double base_;
    std::size_t head_dim_;
    std::optional<RopeScaling> scaling_;
};

/// All groups share one frequency -- the minimal-model schedule.
inline std::vector<double> uniform_frequencies(double theta, std::size_t groups) {
    return std::vector<double>(groups, theta);
}

namespace detail {

inline void rotate_group(double& a, double& b, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double ra = a * c - b * s;
    const double rb = a * s + b * c;
    a = ra;
    b = rb;
}

inline void apply_rope_span(std::span<double> v, double position,
                            std::span<const double> freqs, RopeLayout layout) {
    const std::size_t d = v.size();
    if (d % 2 != 0) throw std::invalid_argument("apply_rope: odd dimension");
    const std::size_t groups = d / 2;
    if (freqs.size() != groups)
        throw std::invalid_argument("apply_rope: need one frequency per dimension group");
    for (std::size_t g = 0; g < groups; ++g) {
        const double angle = position * freqs[g];
        if (layout == RopeLayout::AdjacentPairs)
            rotate_group(v[2 * g], v[2 * g + 1], angle);
        else
            rotate_group(v[g], v[g + groups], angle);
    }
}

} // namespace detail

inline std::vector<double> apply_rope_1d(std::span<const double> v, int m,
                                         std::span<const double> freqs, RopeLayout layout) {
    std::vector<double> out(v.begin(), v.end());
    detail::apply_rope_span(out, static_cast<double>(m), freqs, layout);
    return out;
}

inline std::vector<double> apply_rope_1d(std::span<const double> v, int m,
                                         const FrequencySchedule& s, RopeLayout layout) {
    if (v.size() != s.head_dim())
        throw std::invalid_argument("apply_rope_1d: vector dimension != head_dim");
    return apply_rope_1d(v, m, s.frequencies(v.size() / 2), layout);
}

/// 2D RoPE: dims [0, d/2) rotate by the x position, dims [d/2, d) by y.
inline std::vector<double> apply_rope_2d(std::span<const double> v, PatchPosition pos,
                                         std::span<const double> freqs_x,
                                         std::span<const double> freqs_y, RopeLayout layout) {
    const std::size_t d = v.size();
    if (d % 4 != 0) throw std::invalid_argument("apply_rope_2d: dimension not divisible by 4");
    std::vector<double> out(v.begin(), v.end());
    std::span<double> whole(out);
    detail::apply_rope_span(whole.subspan(0, d / 2), static_cast<double>(pos.x), freqs_x, layout);
    detail::apply_rope_span(whole.subspan(d / 2), static_cast<double>(pos.y), freqs_y, layout);
    return out;
}

inline std::vector<double> apply_rope_2d(std::span<const double> v, PatchPosition pos,
                                         const FrequencySchedule& s, RopeLayout layout) {
    if (v.size() != s.head_dim())
        throw std::invalid_argument("apply_rope_2d: vector dimension != head_dim");
    const auto freqs = s.frequencies(v.size() / 4);
    return apply_rope_2d(v, pos, freqs, freqs, layout);
}

namespace detail {

inline double dot_spans(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace detail

/// <f(q, m), f(k, n)> -- rotate both sides, then dot. Depends on positions
/// only through m - n.
inline double rope_dot(std::span<const double> q, int m, std::span<const double> k, int n,
                       std::span<const double> freqs, RopeLayout layout) {
    if (q.size() != k.size()) throw std::invalid_argument("rope_dot: dimension mismatch");
    const auto rq = apply_rope_1d(q, m, freqs, layout);
    const auto rk = apply_rope_1d(k, n, freqs, layout);
    return detail::dot_spans(rq, rk);
}

inline double rope_dot(std::span<const double> q, int m, std::span<const double> k, int n,
                       const FrequencySchedule& s, RopeLayout layout) {
    if (q.size() != k.size()) throw std::invalid_argument("rope_dot: dimension mismatch");
    return rope_dot(q, m, k, n, s.frequencies(q.size() / 2), layout);
}

inline double rope_dot(std::span<const double> q, PatchPosition mq, std::span<const double> k,
                       PatchPosition nk, std::span<const double> freqs_x,
                       std::span<const double> freqs_y, RopeLayout layout) {
    if (q.size() != k.size()) throw std::invalid_argument("rope_dot: dimension mismatch");
    const auto rq = apply_rope_2d(q, mq, freqs_x, freqs_y, layout);
    const auto rk = apply_rope_2d(k, nk, freqs_x, freqs_y, layout);
    return detail::dot_spans(rq, rk);
}

inline double rope_dot(std::span<const double> q, PatchPosition mq, std::span<const double> k,
                       PatchPosition nk, const FrequencySchedule& s, RopeLayout layout) {
    if (q.size() != k.size()) throw std::invalid_argument("rope_dot: dimension mismatch");
    const auto freqs = s.frequencies(q.size() / 4);
    return rope_dot(q, mq, k, nk, freqs, freqs, layout);
}

/// Permutation pi with: RotateHalf applied to the pi-reordered vector
/// reproduces AdjacentPairs dot products exactly. Slot j < d/2 takes the
/// first element of pair j, slot j + d/2 its second element.
inline std::vector<std::size_t> layout_permutation(std::size_t d) {
    if (d == 0 || d % 2 != 0) throw std::invalid_argument("layout_permutation: odd dimension");
    std::vector<std::size_t> pi(d);
    for (std::size_t j = 0; j < d / 2; ++j) {
        pi[j] = 2 * j;
        pi[j + d / 2] = 2 * j + 1;
    }
    return pi;
}

inline std::vector<double> permute(std::span<const double> v, std::span<const std::size_t> pi) {
    std::vector<double> out(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) out[j] = v[pi[j]];
    return out;
}

// --- JSON config -----------------------------------------------------------
//
// {"base": 10000.0, "head_dim": 64, "scaling": {"alpha": 49.0, "p": 8.0} | null,
//  "layout": "adjacent" | "rotate_half"}

struct RopeConfig {
    FrequencySchedule schedule;
    RopeLayout layout = RopeLayout::AdjacentPairs;
};

inline RopeConfig rope_config_from_json(const nlohmann::json& j) {
    if (!j.contains("base")) throw std::invalid_argument("rope config: missing field 'base'");
    if (!j.contains("head_dim")) throw std::invalid_argument("rope config: missing field 'head_dim'");
    std::optional<RopeScaling> scaling;
    if (j.contains("scaling") && !j.at("scaling").is_null()) {
        const auto& s = j.at("scaling");
        scaling = RopeScaling{s.at("alpha").get<double>(), s.at("p").get<double>()};
    }
    RopeLayout layout = RopeLayout::AdjacentPairs;
    if (j.contains("layout")) layout = rope_layout_from_string(j.at("layout").get<std::string>());
    return RopeConfig{
        FrequencySchedule(j.at("base").get<double>(), j.at("head_dim").get<std::size_t>(), scaling),
        layout};
}

inline nlohmann::json rope_config_to_json(const RopeConfig& cfg) {
    nlohmann::json j;
    j["base"] = cfg.schedule.base();
    j["head_dim"] = cfg.schedule.head_dim();
    if (cfg.schedule.scaling())
        j["scaling"] = {{"alpha", cfg.schedule.scaling()->alpha}, {"p", cfg.schedule.scaling()->p}};
    else
        j["scaling"] = nullptr;
    j["layout"] = to_string(cfg.layout);
    return j;
}

} // namespace vlmlab

#endif // VLMLAB_ROPE_HPP
