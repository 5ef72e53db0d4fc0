// The idealized two-object attention model: two single-patch objects A and B
// with 4-dimensional queries/keys/values (the minimum for 2D RoPE), one
// shared rotation frequency, and four spatial relations of A relative to B.
// B sits at the origin; A sits at (-m,0), (m,0), (0,n) or (0,-n) for
// left / right / front / behind.
//
// closed_form_outputs evaluates the attention outputs for both object
// positions from the expanded real-valued coefficient formulas. The
// simplified_attention simulator computes the same quantity as a literal
// rotate-then-dot weighted sum (no softmax, no scale, no output projection),
// giving an independent route to the same values. full_attention restores
// the softmax and scale factor for comparison experiments.

#ifndef VLMLAB_DUALSIM_HPP
#define VLMLAB_DUALSIM_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vlmlab/matrix.hpp"
#include "vlmlab/rope.hpp"

namespace vlmlab {

enum class Relation { Left, Right, Front, Behind };

inline constexpr std::array<Relation, 4> kAllRelations = {Relation::Left, Relation::Right,
                                                          Relation::Front, Relation::Behind};

inline const char* to_string(Relation r) {
    switch (r) {
        case Relation::Left: return "left";
        case Relation::Right: return "right";
        case Relation::Front: return "front";
        case Relation::Behind: return "behind";
    }
    return "?";
}

inline Relation relation_from_string(const std::string& s) {
    if (s == "left") return Relation::Left;
    if (s == "right") return Relation::Right;
    if (s == "front") return Relation::Front;
    if (s == "behind") return Relation::Behind;
    throw std::invalid_argument("unknown relation: " + s);
}

/// Position of the satellite (object A) for a relation; the nucleus is at
/// the origin.
inline PatchPosition satellite_position(Relation r, int m, int n) {
    switch (r) {
        case Relation::Left: return {-m, 0};
        case Relation::Right: return {m, 0};
        case Relation::Front: return {0, n};
        case Relation::Behind: return {0, -n};
    }
    return {0, 0};
}

using Vec4 = std::array<double, 4>;

struct TwoObjectScene {
    Vec4 q_a{}, k_a{}, v_a{};
    Vec4 q_b{}, k_b{}, v_b{};
    Relation relation = Relation::Left;
    int m = 1;  // X-axis offset in patch units, >= 1
    int n = 1;  // Y-axis offset in patch units, >= 1
    double theta = 1.0;

    void validate() const {
        if (m < 1 || n < 1) throw std::invalid_argument("TwoObjectScene: offsets must be >= 1");
        if (!(theta > 0.0)) throw std::invalid_argument("TwoObjectScene: theta must be positive");
    }
};

struct ObjectOutputs {
    Vec4 h_a{};
    Vec4 h_b{};
};

namespace detail {

/// Re[(a0 + i a1)(b0 - i b1) e^{i phi}] -- one rotated pair product.
inline double pair_term(double a0, double a1, double b0, double b1, double phi) {
    return (a0 * b0 + a1 * b1) * std::cos(phi) + (a0 * b1 - a1 * b0) * std::sin(phi);
}

/// Coefficient of the value vector for query at dq = pos_q - pos_k.
inline double coeff(const Vec4& q, const Vec4& k, double dx, double dy, double theta) {
    return pair_term(q[0], q[1], k[0], k[1], dx * theta) +
           pair_term(q[2], q[3], k[2], k[3], dy * theta);
}

inline Vec4 axpy(double a, const Vec4& x, double b, const Vec4& y) {
    return {a * x[0] + b * y[0], a * x[1] + b * y[1], a * x[2] + b * y[2], a * x[3] + b * y[3]};
}

} // namespace detail

/// Attention outputs at the positions of A and B, from the expanded
/// closed-form coefficients.
inline ObjectOutputs closed_form_outputs(const TwoObjectScene& scene) {
    scene.validate();
    const PatchPosition pa = satellite_position(scene.relation, scene.m, scene.n);
    const double ax = static_cast<double>(pa.x);
    const double ay = static_cast<double>(pa.y);

    // Self terms see zero relative offset, so their rotations cancel.
    const double caa = detail::coeff(scene.q_a, scene.k_a, 0.0, 0.0, scene.theta);
    const double cbb = detail::coeff(scene.q_b, scene.k_b, 0.0, 0.0, scene.theta);
    const double cab = detail::coeff(scene.q_a, scene.k_b, ax, ay, scene.theta);
    const double cba = detail::coeff(scene.q_b, scene.k_a, -ax, -ay, scene.theta);

    ObjectOutputs out;
    out.h_a = detail::axpy(caa, scene.v_a, cab, scene.v_b);
    out.h_b = detail::axpy(cba, scene.v_a, cbb, scene.v_b);
    return out;
}

namespace detail {

inline std::vector<Vec4> attention_impl(std::span<const Vec4> qs, std::span<const Vec4> ks,
                                        std::span<const Vec4> vs,
                                        std::span<const PatchPosition> positions,
                                        std::span<const double> freqs, bool with_softmax,
                                        double scale) {
    const std::size_t count = qs.size();
    if (ks.size() != count || vs.size() != count || positions.size() != count)
        throw std::invalid_argument("attention: sequence length mismatch");
    std::vector<Vec4> out(count, Vec4{});
    std::vector<double> weights(count);
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t j = 0; j < count; ++j) {
            weights[j] = rope_dot(std::span<const double>(qs[i]), positions[i],
                                  std::span<const double>(ks[j]), positions[j], freqs, freqs,
                                  RopeLayout::AdjacentPairs);
            if (with_softmax) weights[j] /= scale;
        }
        if (with_softmax) softmax_inplace(weights);
        Vec4 acc{};
        for (std::size_t j = 0; j < count; ++j)
            for (std::size_t c = 0; c < 4; ++c) acc[c] += weights[j] * vs[j][c];
        out[i] = acc;
    }
    return out;
}

} // namespace detail

/// Bidirectional unnormalized attention: out_i = sum_j <f(q_i), f(k_j)> v_j.
inline std::vector<Vec4> simplified_attention(std::span<const Vec4> qs, std::span<const Vec4> ks,
                                              std::span<const Vec4> vs,
                                              std::span<const PatchPosition> positions,
                                              double theta) {
    return detail::attention_impl(qs, ks, vs, positions, uniform_frequencies(theta, 1), false, 1.0);
}

inline std::vector<Vec4> simplified_attention(std::span<const Vec4> qs, std::span<const Vec4> ks,
                                              std::span<const Vec4> vs,
                                              std::span<const PatchPosition> positions,
                                              const FrequencySchedule& s) {
    return detail::attention_impl(qs, ks, vs, positions, s.frequencies(1), false, 1.0);
}

/// Reference attention with softmax over scaled scores.
inline std::vector<Vec4> full_attention(std::span<const Vec4> qs, std::span<const Vec4> ks,
                                        std::span<const Vec4> vs,
                                        std::span<const PatchPosition> positions, double theta,
                                        double scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("full_attention: scale must be positive");
    return detail::attention_impl(qs, ks, vs, positions, uniform_frequencies(theta, 1), true, scale);
}

inline std::vector<Vec4> full_attention(std::span<const Vec4> qs, std::span<const Vec4> ks,
                                        std::span<const Vec4> vs,
                                        std::span<const PatchPosition> positions,
                                        const FrequencySchedule& s, double scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("full_attention: scale must be positive");
    return detail::attention_impl(qs, ks, vs, positions, s.frequencies(1), true, scale);
}

/// Raster-scan input order of the two tokens (satellite first when it
/// precedes the nucleus in reading order). The bidirectional sum does not
/// depend on it; it is recorded for fixture fidelity.
struct SceneSequence {
    std::vector<Vec4> qs, ks, vs;
    std::vector<PatchPosition> positions;
    std::size_t index_a = 0;
    std::size_t index_b = 1;
};

inline SceneSequence scene_sequence(const TwoObjectScene& scene) {
    scene.validate();
    const PatchPosition pa = satellite_position(scene.relation, scene.m, scene.n);
    const PatchPosition pb{0, 0};
    SceneSequence seq;
    const bool a_first = (pa.y < pb.y) || (pa.y == pb.y && pa.x < pb.x);
    if (a_first) {
        seq.qs = {scene.q_a, scene.q_b};
        seq.ks = {scene.k_a, scene.k_b};
        seq.vs = {scene.v_a, scene.v_b};
        seq.positions = {pa, pb};
        seq.index_a = 0;
        seq.index_b = 1;
    } else {
        seq.qs = {scene.q_b, scene.q_a};
        seq.ks = {scene.k_b, scene.k_a};
        seq.vs = {scene.v_b, scene.v_a};
        seq.positions = {pb, pa};
        seq.index_a = 1;
        seq.index_b = 0;
    }
    return seq;
}

// --- JSON fixtures ----------------------------------------------------------
//
// {"qA": [..4], "kA": ..., "vA": ..., "qB": ..., "kB": ..., "vB": ...,
//  "relation": "left", "m": 1, "n": 1, "theta": 0.7}

namespace detail {

inline Vec4 vec4_from_json(const nlohmann::json& j, const char* field) {
    if (!j.contains(field)) throw std::invalid_argument(std::string("scene: missing field '") + field + "'");
    const auto& arr = j.at(field);
    if (!arr.is_array() || arr.size() != 4)
        throw std::invalid_argument(std::string("scene: field '") + field + "' must be a 4-vector");
    Vec4 v;
    for (std::size_t i = 0; i < 4; ++i) v[i] = arr[i].get<double>();
    return v;
}

} // namespace detail

inline TwoObjectScene scene_from_json(const nlohmann::json& j) {
    TwoObjectScene s;
    s.q_a = detail::vec4_from_json(j, "qA");
    s.k_a = detail::vec4_from_json(j, "kA");
    s.v_a = detail::vec4_from_json(j, "vA");
    s.q_b = detail::vec4_from_json(j, "qB");
    s.k_b = detail::vec4_from_json(j, "kB");
    s.v_b = detail::vec4_from_json(j, "vB");
    if (!j.contains("relation")) throw std::invalid_argument("scene: missing field 'relation'");
    s.relation = relation_from_string(j.at("relation").get<std::string>());
    s.m = j.value("m", 1);
    s.n = j.value("n", 1);
    s.theta = j.value("theta", 1.0);
    s.validate();
    return s;
}

inline nlohmann::json scene_to_json(const TwoObjectScene& s) {
    nlohmann::json j;
    j["qA"] = s.q_a;
    j["kA"] = s.k_a;
    j["vA"] = s.v_a;
    j["qB"] = s.q_b;
    j["kB"] = s.k_b;
    j["vB"] = s.v_b;
    j["relation"] = to_string(s.relation);
    j["m"] = s.m;
    j["n"] = s.n;
    j["theta"] = s.theta;
    return j;
}

} // namespace vlmlab

#endif // VLMLAB_DUALSIM_HPP
