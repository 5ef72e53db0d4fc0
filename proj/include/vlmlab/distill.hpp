// Knowledge distillation of a visual decoder: a single linear map from
// embedding space to vocabulary logits, initialized from the unembedding
// matrix and trained against teacher logits with
//
//     L = alpha * tau^2 * KL(softmax(teacher/tau) || softmax(student/tau))
//       + (1 - alpha) * CE(argmax(teacher), softmax(student))
//
// averaged over rows. The trainer is plain gradient descent with linear
// warmup followed by cosine decay, hard-loss-only validation, and early
// stopping on consecutive non-improving evaluations.

#ifndef VLMLAB_DISTILL_HPP
#define VLMLAB_DISTILL_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "vlmlab/matrix.hpp"
#include "vlmlab/random.hpp"

namespace vlmlab {

struct VisualDecoder {
    Matrix weights;  // D x |vocab|
    std::optional<std::vector<double>> bias;

    static VisualDecoder from_unembedding(const Matrix& w_u, bool with_bias = false) {
        VisualDecoder dec;
        dec.weights = w_u;
        if (with_bias) dec.bias = std::vector<double>(w_u.cols(), 0.0);
        return dec;
    }
};

/// logits = V * weights (+ bias).
inline Matrix decode_visual(const VisualDecoder& dec, const Matrix& v) {
    if (v.cols() != dec.weights.rows())
        throw std::invalid_argument("decode_visual: embedding dim != decoder input dim");
    Matrix logits = matmul(v, dec.weights);
    if (dec.bias) {
        if (dec.bias->size() != logits.cols())
            throw std::invalid_argument("decode_visual: bias size mismatch");
        for (std::size_t i = 0; i < logits.rows(); ++i)
            for (std::size_t j = 0; j < logits.cols(); ++j) logits(i, j) += (*dec.bias)[j];
    }
    return logits;
}

struct DistillConfig {
    double tau = 2.5;
    double alpha_kd = 0.5;  // weight of the soft loss
    double lr = 0.5;
    std::size_t steps = 1000;
    std::size_t batch = 64;
    std::uint64_t seed = 0;
    std::size_t early_stop_patience = 5;
    std::size_t warmup_steps = 100;
    std::size_t eval_every = 50;

    void validate() const {
        if (!(tau > 0.0)) throw std::invalid_argument("DistillConfig: tau must be positive");
        if (!(alpha_kd >= 0.0 && alpha_kd <= 1.0))
            throw std::invalid_argument("DistillConfig: alpha must be in [0,1]");
        if (!(lr > 0.0)) throw std::invalid_argument("DistillConfig: lr must be positive");
        if (batch < 1) throw std::invalid_argument("DistillConfig: batch must be >= 1");
        if (eval_every < 1) throw std::invalid_argument("DistillConfig: eval_every must be >= 1");
    }
};

inline nlohmann::json distill_config_to_json(const DistillConfig& cfg) {
    return {{"tau", cfg.tau},
            {"alpha", cfg.alpha_kd},
            {"lr", cfg.lr},
            {"steps", cfg.steps},
            {"batch", cfg.batch},
            {"seed", cfg.seed},
            {"early_stop_patience", cfg.early_stop_patience},
            {"warmup_steps", cfg.warmup_steps},
            {"eval_every", cfg.eval_every}};
}

inline DistillConfig distill_config_from_json(const nlohmann::json& j) {
    DistillConfig cfg;
    cfg.tau = j.value("tau", cfg.tau);
    cfg.alpha_kd = j.value("alpha", cfg.alpha_kd);
    cfg.lr = j.value("lr", cfg.lr);
    cfg.steps = j.value("steps", cfg.steps);
    cfg.batch = j.value("batch", cfg.batch);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.early_stop_patience = j.value("early_stop_patience", cfg.early_stop_patience);
    cfg.warmup_steps = j.value("warmup_steps", cfg.warmup_steps);
    cfg.eval_every = j.value("eval_every", cfg.eval_every);
    cfg.validate();
    return cfg;
}

/// Per-row argmax of the teacher logits; ties break to the lowest index.
inline std::vector<std::size_t> teacher_labels(const Matrix& teacher_logits) {
    std::vector<std::size_t> labels(teacher_logits.rows());
    for (std::size_t i = 0; i < teacher_logits.rows(); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < teacher_logits.cols(); ++j)
            if (teacher_logits(i, j) > teacher_logits(i, best)) best = j;
        labels[i] = best;
    }
    return labels;
}

struct KdLossResult {
    double loss = 0.0;
    double soft = 0.0;  // tau^2 * KL, row-averaged
    double hard = 0.0;  // cross-entropy against teacher argmax, row-averaged
    Matrix grad;        // d loss / d student_logits
};

inline KdLossResult kd_loss(const Matrix& student_logits, const Matrix& teacher_logits,
                            const DistillConfig& cfg) {
    cfg.validate();
    if (student_logits.rows() != teacher_logits.rows() ||
        student_logits.cols() != teacher_logits.cols())
        throw std::invalid_argument("kd_loss: logits shape mismatch");
    if (student_logits.empty()) throw std::invalid_argument("kd_loss: empty logits");

    const std::size_t n = student_logits.rows();
    const std::size_t vocab = student_logits.cols();
    const double tau = cfg.tau;
    const double inv_n = 1.0 / static_cast<double>(n);

    Matrix student_t = student_logits;
    Matrix teacher_t = teacher_logits;
    for (double& x : student_t.data()) x /= tau;
    for (double& x : teacher_t.data()) x /= tau;
    const Matrix q_t = softmax_rows(student_t);
    const Matrix p_t = softmax_rows(teacher_t);
    const Matrix q = softmax_rows(student_logits);
    const std::vector<std::size_t> labels = teacher_labels(teacher_logits);

    KdLossResult r;
    r.grad = Matrix(n, vocab);
    for (std::size_t i = 0; i < n; ++i) {
        double kl = 0.0;
        for (std::size_t j = 0; j < vocab; ++j) {
            const double p = p_t(i, j);
            const double qt = q_t(i, j);
            if (p > 0.0 && p != qt) kl += p * (std::log(p) - std::log(qt));
        }
        r.soft += tau * tau * kl;
        r.hard += -std::log(q(i, labels[i]));
        for (std::size_t j = 0; j < vocab; ++j) {
            const double g_soft = tau * (q_t(i, j) - p_t(i, j));
            const double g_hard = q(i, j) - (j == labels[i] ? 1.0 : 0.0);
            r.grad(i, j) = inv_n * (cfg.alpha_kd * g_soft + (1.0 - cfg.alpha_kd) * g_hard);
        }
    }
    r.soft *= inv_n;
    r.hard *= inv_n;
    r.loss = cfg.alpha_kd * r.soft + (1.0 - cfg.alpha_kd) * r.hard;
    return r;
}

/// Hard term only -- what validation uses.
inline double hard_loss(const Matrix& student_logits, const Matrix& teacher_logits) {
    const Matrix q = softmax_rows(student_logits);
    const auto labels = teacher_labels(teacher_logits);
    double loss = 0.0;
    for (std::size_t i = 0; i < q.rows(); ++i) loss += -std::log(q(i, labels[i]));
    return loss / static_cast<double>(q.rows());
}

/// Linear warmup to cfg.lr, then cosine decay to zero across the remaining
/// steps.
inline double lr_at_step(const DistillConfig& cfg, std::size_t step) {
    if (cfg.warmup_steps > 0 && step < cfg.warmup_steps)
        return cfg.lr * static_cast<double>(step + 1) / static_cast<double>(cfg.warmup_steps);
    if (cfg.steps <= cfg.warmup_steps) return cfg.lr;
    const double progress = static_cast<double>(step - cfg.warmup_steps) /
                            static_cast<double>(cfg.steps - cfg.warmup_steps);
    return cfg.lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

struct TrainResult {
    VisualDecoder decoder;  // best-validation weights
    struct CurvePoint {
        std::size_t step;
        double train_loss;
        double val_loss;
    };
    std::vector<CurvePoint> curve;
    std::size_t steps_run = 0;
    bool early_stopped = false;
    double best_val = 0.0;
};

inline TrainResult train_decoder(const Matrix& v_train, const Matrix& teacher_train,
                                 const Matrix& v_val, const Matrix& teacher_val,
                                 const Matrix& w_u, const DistillConfig& cfg,
                                 bool with_bias = false) {
    cfg.validate();
    if (v_train.rows() == 0) throw std::invalid_argument("train_decoder: empty training set");
    if (v_train.rows() != teacher_train.rows())
        throw std::invalid_argument("train_decoder: train teacher row mismatch");
    if (v_val.rows() != teacher_val.rows())
        throw std::invalid_argument("train_decoder: val teacher row mismatch");

    TrainResult result;
    result.decoder = VisualDecoder::from_unembedding(w_u, with_bias);
    if (cfg.steps == 0) return result;

    VisualDecoder current = result.decoder;
    RandomSource rng(cfg.seed);
    double best_val = std::numeric_limits<double>::infinity();
    VisualDecoder best = current;
    std::size_t bad_evals = 0;

    const auto evaluate = [&](std::size_t step, double train_loss) -> bool {
        const double val = hard_loss(decode_visual(current, v_val), teacher_val);
        result.curve.push_back({step, train_loss, val});
        if (val < best_val) {
            best_val = val;
            best = current;
            bad_evals = 0;
        } else {
            ++bad_evals;
        }
        return cfg.early_stop_patience > 0 && bad_evals >= cfg.early_stop_patience;
    };

    const std::size_t n = v_train.rows();
    const std::size_t batch = std::min(cfg.batch, n);
    for (std::size_t step = 0; step < cfg.steps; ++step) {
        Matrix vb(batch, v_train.cols());
        Matrix tb(batch, teacher_train.cols());
        for (std::size_t b = 0; b < batch; ++b) {
            const std::size_t pick = rng.uniform_index(n);
            vb.set_row(b, v_train.row(pick));
            tb.set_row(b, teacher_train.row(pick));
        }

        const Matrix logits = decode_visual(current, vb);
        const KdLossResult l = kd_loss(logits, tb, cfg);
        const Matrix grad_w = matmul_at_b(vb, l.grad);
        const double lr = lr_at_step(cfg, step);
        for (std::size_t i = 0; i < current.weights.rows(); ++i)
            for (std::size_t j = 0; j < current.weights.cols(); ++j)
                current.weights(i, j) -= lr * grad_w(i, j);
        if (current.bias) {
            for (std::size_t j = 0; j < l.grad.cols(); ++j) {
                double g = 0.0;
                for (std::size_t i = 0; i < l.grad.rows(); ++i) g += l.grad(i, j);
                (*current.bias)[j] -= lr * g;
            }
        }
        result.steps_run = step + 1;

        const bool last = step + 1 == cfg.steps;
        if ((step + 1) % cfg.eval_every == 0 || last) {
            if (evaluate(step + 1, l.loss)) {
                result.early_stopped = !last;
                break;
            }
        }
    }

    result.decoder = best;
    result.best_val = best_val;
    return result;
}

} // namespace vlmlab

#endif // VLMLAB_DISTILL_HPP
