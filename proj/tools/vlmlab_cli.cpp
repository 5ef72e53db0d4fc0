// Command-line surface for the library: property-check suites, scene
// simulation, token-map / segmentation-map exports, RLE compression, and
// decoder distillation. Every command is deterministic given its flags and
// seed; artifacts use fixed 12-significant-digit float formatting.
//
// Exit codes: 0 success, 1 validation error, 2 verification failure.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vlmlab/compress.hpp"
#include "vlmlab/distill.hpp"
#include "vlmlab/dualsim.hpp"
#include "vlmlab/fixtures.hpp"
#include "vlmlab/format.hpp"
#include "vlmlab/geometry.hpp"
#include "vlmlab/matrix.hpp"
#include "vlmlab/matrix_io.hpp"
#include "vlmlab/pca.hpp"
#include "vlmlab/random.hpp"
#include "vlmlab/rope.hpp"
#include "vlmlab/tokenmap.hpp"

namespace {

using nlohmann::json;
using namespace vlmlab;

json load_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    json j;
    try {
        is >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    return j;
}

void save_json(const json& j, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << j.dump(2) << "\n";
}

void save_text(const std::string& text, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << text;
}

std::vector<std::string> load_vocab(const std::string& path) {
    const json j = load_json(path);
    if (!j.is_array()) throw std::runtime_error(path + ": vocab must be a JSON array");
    std::vector<std::string> vocab;
    for (const auto& t : j) vocab.push_back(t.get<std::string>());
    return vocab;
}

// A --config JSON can stand in for flags; explicitly given flags win, and
// unknown keys are rejected.
class ConfigMerger {
public:
    ConfigMerger(CLI::App* sub, const std::string& path) : sub_(sub) {
        if (!path.empty()) cfg_ = load_json(path);
        known_.insert("config");
    }

    template <typename T>
    ConfigMerger& field(const std::string& name, T& var) {
        known_.insert(name);
        if (!cfg_.is_null() && cfg_.contains(name) &&
            sub_->get_option("--" + name)->count() == 0)
            var = cfg_.at(name).get<T>();
        return *this;
    }

    void finish() const {
        if (cfg_.is_null()) return;
        for (const auto& [key, value] : cfg_.items())
            if (!known_.count(key))
                throw std::invalid_argument("config: unknown key '" + key + "'");
    }

private:
    CLI::App* sub_;
    json cfg_;
    std::set<std::string> known_;
};

std::vector<double> random_vector(RandomSource& rng, std::size_t d) {
    std::vector<double> v(d);
    for (double& x : v) x = rng.normal();
    return v;
}

// --- rope-check ---------------------------------------------------------------

struct RopeCheckArgs {
    std::uint64_t seed = 0;
    std::size_t trials = 1000;
};

int run_rope_check(const RopeCheckArgs& args) {
    RandomSource rng(args.seed);
    std::size_t checks = 0, violations = 0;

    const auto expect = [&](bool ok) {
        ++checks;
        if (!ok) ++violations;
    };

    std::vector<FrequencySchedule> schedules;
    for (double alpha : {0.0, 49.0, 99.0})
        for (std::size_t d : {2, 4, 8, 64})
            schedules.emplace_back(10000.0, d,
                                   alpha == 0.0 ? std::optional<RopeScaling>{}
                                                : std::optional<RopeScaling>{{alpha, 8.0}});

    const std::size_t per_combo =
        std::max<std::size_t>(1, args.trials / (schedules.size() * 2));
    for (const auto& s : schedules) {
        for (auto layout : {RopeLayout::AdjacentPairs, RopeLayout::RotateHalf}) {
            for (std::size_t t = 0; t < per_combo; ++t) {
                const std::size_t d = s.head_dim();
                const auto q = random_vector(rng, d);
                const auto k = random_vector(rng, d);
                const int m = static_cast<int>(rng.uniform_index(100));
                const int n = static_cast<int>(rng.uniform_index(100));
                const int shift = static_cast<int>(rng.uniform_index(101)) - 50;

                const double base = rope_dot(q, m, k, n, s, layout);
                const double moved = rope_dot(q, m + shift, k, n + shift, s, layout);
                expect(std::abs(base - moved) < 1e-9);

                const auto rotated = apply_rope_1d(q, m, s, layout);
                expect(std::abs(norm(rotated) - norm(q)) < 1e-12 * (1.0 + norm(q)));

                if (d % 4 == 0) {
                    const PatchPosition pq{m, n}, pk{n, m};
                    const double b2 = rope_dot(q, pq, k, pk, s, layout);
                    const double mx = rope_dot(q, {pq.x + shift, pq.y}, k, {pk.x + shift, pk.y},
                                               s, layout);
                    const double my = rope_dot(q, {pq.x, pq.y + shift}, k, {pk.x, pk.y + shift},
                                               s, layout);
                    expect(std::abs(b2 - mx) < 1e-9);
                    expect(std::abs(b2 - my) < 1e-9);
                }
            }
        }
    }

    const FrequencySchedule plain(10000.0, 8);
    const auto pi = layout_permutation(8);
    for (std::size_t t = 0; t < args.trials; ++t) {
        const auto q = random_vector(rng, 8);
        const auto k = random_vector(rng, 8);
        const int m = static_cast<int>(rng.uniform_index(60));
        const int n = static_cast<int>(rng.uniform_index(60));
        const double adj = rope_dot(q, m, k, n, plain, RopeLayout::AdjacentPairs);
        const double rot = rope_dot(permute(q, pi), m, permute(k, pi), n, plain,
                                    RopeLayout::RotateHalf);
        expect(std::abs(adj - rot) < 1e-12);
    }

    const FrequencySchedule decay(10000.0, 64);
    const double probe = 2.0 * std::sin(50.0 * decay.frequency(32));
    expect(probe >= 0.0099 && probe <= 0.0101);

    std::cout << "rope-check: " << violations << " violations in " << checks << " checks\n";
    return violations == 0 ? 0 : 2;
}

// --- simulate -------------------------------------------------------------------

struct SimulateArgs {
    std::uint64_t seed = 0;
    std::size_t trials = 100;
    std::string out = "direction_vectors.csv";
};

int run_simulate(const SimulateArgs& args) {
    RandomSource rng(args.seed);
    const fixtures::SceneFamily family = fixtures::scene_family(rng);

    std::vector<std::string> relations;
    Matrix cloud(args.trials * 4, 4);
    std::size_t row = 0;
    for (Relation r : kAllRelations) {
        RandomSource jitter = rng.substream(static_cast<std::uint64_t>(r));
        for (std::size_t t = 0; t < args.trials; ++t) {
            const TwoObjectScene scene = family.sample(r, jitter);
            const ObjectOutputs out = closed_form_outputs(scene);
            const DirectionVector v = direction_vector(out.h_a, out.h_b, r);
            for (std::size_t j = 0; j < 4; ++j) cloud(row, j) = v.v[j];
            relations.push_back(to_string(r));
            ++row;
        }
    }

    const Matrix scores = pca_project(cloud, 2);
    std::string csv = "relation,pc1,pc2\n";
    for (std::size_t i = 0; i < scores.rows(); ++i)
        csv += relations[i] + "," + format_sig12(scores(i, 0)) + "," +
               format_sig12(scores(i, 1)) + "\n";
    save_text(csv, args.out);
    std::cout << "simulate: wrote " << scores.rows() << " direction vectors to " << args.out
              << "\n";
    return 0;
}

// --- verify-geometry ------------------------------------------------------------

struct VerifyGeometryArgs {
    std::uint64_t seed = 0;
    std::size_t trials = 1000;
};

int run_verify_geometry(const VerifyGeometryArgs& args) {
    RandomSource rng(args.seed);
    std::size_t checks = 0, violations = 0;
    const auto expect = [&](bool ok) {
        ++checks;
        if (!ok) ++violations;
    };

    std::vector<TwoObjectScene> scenes;
    for (std::size_t t = 0; t < args.trials; ++t) {
        TwoObjectScene s = fixtures::random_scene(rng, Relation::Left);
        scenes.push_back(s);

        const ObjectOutputs left_out = closed_form_outputs(s);
        const DirectionVector left = direction_vector(left_out.h_a, left_out.h_b, s.relation);
        const DirectionDecomposition dl = decompose(s);
        const Vec4 rebuilt = dl.reconstruct();
        for (std::size_t i = 0; i < 4; ++i) expect(std::abs(rebuilt[i] - left.v[i]) < 1e-12);
        expect(dl.key_y == Vec4{0.0, 0.0, 0.0, 0.0});

        s.relation = Relation::Right;
        const ObjectOutputs right_out = closed_form_outputs(s);
        const DirectionVector right = direction_vector(right_out.h_a, right_out.h_b, s.relation);
        for (std::size_t i = 0; i < 4; ++i) {
            expect(std::abs(left.v[i] + right.v[i] - 2.0 * dl.common[i]) < 1e-12);
            expect(std::abs((left.v[i] - dl.common[i]) + (right.v[i] - dl.common[i])) < 1e-12);
        }

        s.relation = Relation::Behind;
        const DirectionDecomposition db = decompose(s);
        expect(db.c3 == 0.0 && db.c4 == 0.0);
        expect(db.key_x == Vec4{0.0, 0.0, 0.0, 0.0});
    }

    RandomSource emb_rng = rng.substream(1);
    for (double alpha : {0.0, 0.25, 0.5, 1.0}) {
        const Matrix vs_r = fixtures::random_matrix(6, 5, emb_rng);
        const Matrix vn_r = fixtures::random_matrix(4, 5, emb_rng);
        const Matrix vs_rp = fixtures::random_matrix(6, 5, emb_rng);
        const Matrix vn_rp = fixtures::random_matrix(4, 5, emb_rng);
        std::vector<std::size_t> all_s = {0, 1, 2, 3, 4, 5}, all_n = {0, 1, 2, 3};
        const auto dv = [&](const Matrix& s, const Matrix& n) {
            const auto ms = mean_pool(s, all_s);
            const auto mn = mean_pool(n, all_n);
            std::vector<double> out(5);
            for (std::size_t j = 0; j < 5; ++j) out[j] = ms[j] - mn[j];
            return out;
        };
        const auto v_r = dv(vs_r, vn_r);
        const auto v_rp = dv(vs_rp, vn_rp);
        const auto mixed = dv(intervene(vs_r, vs_rp, alpha), intervene(vn_r, vn_rp, alpha));
        for (std::size_t j = 0; j < 5; ++j)
            expect(std::abs(mixed[j] - ((1.0 - alpha) * v_r[j] + alpha * v_rp[j])) < 1e-12);
    }

    const KeyTermStats stats = key_term_report(scenes);
    std::cout << "verify-geometry: " << violations << " violations in " << checks << " checks\n";
    std::cout << "key/common norm ratio over " << stats.count
              << " scenes: mean " << format_sig12(stats.mean_ratio) << ", min "
              << format_sig12(stats.min_ratio) << ", max " << format_sig12(stats.max_ratio)
              << "\n";
    return violations == 0 ? 0 : 2;
}

// --- axis-split -----------------------------------------------------------------

struct AxisSplitArgs {
    std::uint64_t seed = 0;
    std::size_t layers = 12;
    std::size_t heads = 4;
    std::size_t samples = 4;
    std::size_t tokens = 16;
    std::size_t dim = 16;
    std::string rope;  // optional schedule/layout JSON; overrides --dim
    std::string out = "axis_split.csv";
};

int run_axis_split(const AxisSplitArgs& args) {
    RopeConfig rope{FrequencySchedule(10000.0, args.dim), RopeLayout::AdjacentPairs};
    if (!args.rope.empty()) rope = rope_config_from_json(load_json(args.rope));
    const FrequencySchedule& schedule = rope.schedule;
    const std::size_t dim = schedule.head_dim();
    if (dim % 4 != 0)
        throw std::invalid_argument("axis-split: head dimension must be divisible by 4");
    const std::size_t grid_w = 4;

    ObjectMask mask;
    for (std::size_t i = 0; i < args.tokens / 4; ++i) mask.satellite.push_back(i);
    for (std::size_t i = args.tokens - args.tokens / 4; i < args.tokens; ++i)
        mask.nucleus.push_back(i);

    RandomSource master(args.seed);
    std::vector<double> ax(args.layers), ay(args.layers);
    for (std::size_t layer = 0; layer < args.layers; ++layer) {
        RandomSource layer_rng = master.substream(layer);
        double sum_x = 0.0, sum_y = 0.0;
        for (std::size_t s = 0; s < args.samples; ++s) {
            for (std::size_t h = 0; h < args.heads; ++h) {
                Matrix q(args.tokens, dim), k(args.tokens, dim);
                for (std::size_t i = 0; i < args.tokens; ++i) {
                    const PatchPosition pos{static_cast<int>(i % grid_w),
                                            static_cast<int>(i / grid_w)};
                    const auto qr = apply_rope_2d(random_vector(layer_rng, dim), pos, schedule,
                                                  rope.layout);
                    const auto kr = apply_rope_2d(random_vector(layer_rng, dim), pos, schedule,
                                                  rope.layout);
                    q.set_row(i, qr);
                    k.set_row(i, kr);
                }
                const AxisSplitResult r = axis_split(q, k, mask);
                sum_x += r.a_sn_x;
                sum_y += r.a_sn_y;
            }
        }
        const double denom = static_cast<double>(args.samples * args.heads);
        ax[layer] = sum_x / denom;
        ay[layer] = sum_y / denom;
    }

    const auto nx = normalize_unit_range(ax);
    const auto ny = normalize_unit_range(ay);
    std::string csv = "layer,ax,ay\n";
    for (std::size_t layer = 0; layer < args.layers; ++layer)
        csv += std::to_string(layer + 1) + "," + format_sig12(nx[layer]) + "," +
               format_sig12(ny[layer]) + "\n";
    save_text(csv, args.out);
    std::cout << "axis-split: wrote " << args.layers << " layers to " << args.out << "\n";
    return 0;
}

// --- tokenmap -------------------------------------------------------------------

struct TokenMapArgs {
    std::string embeddings, unembed, vocab, out = "tokenmap.json";
    std::size_t height = 0, width = 0;
};

int run_tokenmap(const TokenMapArgs& args) {
    const Matrix v = read_vlmg1(args.embeddings);
    const Matrix w_u = read_vlmg1(args.unembed);
    const std::vector<std::string> vocab = load_vocab(args.vocab);
    const TokenMap tm = logit_lens(v, w_u, args.height, args.width, vocab);

    json j = tokenmap_to_json(tm);
    for (auto& cell : j.at("cells")) {
        cell["p1"] = quant12(cell.at("p1").get<double>());
        cell["p2"] = quant12(cell.at("p2").get<double>());
    }
    save_json(j, args.out);
    std::cout << "tokenmap: decoded " << tm.cells.size() << " cells to " << args.out << "\n";
    return 0;
}

// --- segmap ---------------------------------------------------------------------

struct SegMapArgs {
    std::string tokenmap, keywords, out = "segmap.ppm", labels;
};

int run_segmap(const SegMapArgs& args) {
    const TokenMap tm = tokenmap_from_json(load_json(args.tokenmap));
    const KeywordConfig cfg = keyword_config_from_json(load_json(args.keywords));
    const LabelMap lm = label_map(tm, cfg);
    const SegMap sm = render_seg_map(lm, cfg);
    write_ppm(sm, args.out);
    if (!args.labels.empty()) save_json(labelmap_to_json(lm), args.labels);
    std::cout << "segmap: wrote " << sm.width << "x" << sm.height << " map to " << args.out
              << "\n";
    return 0;
}

// --- stats ----------------------------------------------------------------------

struct StatsArgs {
    std::string tokenmap, keywords, object, mode = "strict", out;
};

int run_stats(const StatsArgs& args) {
    const TokenMap tm = tokenmap_from_json(load_json(args.tokenmap));
    const KeywordConfig cfg = keyword_config_from_json(load_json(args.keywords));
    const auto [r_a, r_r] = word_ratios(tm, cfg);

    std::set<std::string> names;
    for (const auto& entry : cfg.representative)
        names.insert(entry.second.begin(), entry.second.end());

    json j;
    j["r_A"] = quant12(r_a);
    j["r_R"] = quant12(r_r);
    j["emergence_rate"] = quant12(emergence_rate(tm, names));
    if (!args.object.empty()) {
        const SynonymMode mode = synonym_mode_from_string(args.mode);
        j["object"] = args.object;
        j["mode"] = args.mode;
        j["answer"] = synonym_answer(tm, args.object, cfg, mode) ? "yes" : "no";
    }
    if (args.out.empty())
        std::cout << j.dump(2) << "\n";
    else
        save_json(j, args.out);
    return 0;
}

// --- compress -------------------------------------------------------------------

struct CompressArgs {
    std::string tokenmap, embeddings, keywords;
    std::string method = "all", reducer = "random";
    std::uint64_t seed = 0;
    std::string out = "compressed.vlmg", report;
};

int run_compress(const CompressArgs& args) {
    const TokenMap tm = tokenmap_from_json(load_json(args.tokenmap));
    const Matrix v = read_vlmg1(args.embeddings);
    KeywordConfig cfg;
    if (!args.keywords.empty()) cfg = keyword_config_from_json(load_json(args.keywords));

    const CompressionMethod method{run_filter_from_string(args.method),
                                   run_reducer_from_string(args.reducer)};
    const auto runs = rle_runs(tm);
    RandomSource rng(args.seed);
    const Matrix compressed = compress(v, runs, method, cfg, rng);
    write_vlmg1(compressed, args.out);

    CompressionReport report;
    report.n_before = v.rows();
    report.n_after = compressed.rows();
    report.rate_percent = quant12(reduction_rate(report.n_before, report.n_after));
    report.method = args.method;
    report.runs = runs.size();
    const json j = report_to_json(report);
    if (!args.report.empty()) save_json(j, args.report);
    std::cout << j.dump(2) << "\n";
    return 0;
}

// --- distill --------------------------------------------------------------------

struct DistillArgs {
    std::uint64_t seed = 0;
    std::size_t steps = 2000, batch = 128, patience = 5, warmup = 100, eval_every = 50;
    double tau = 2.0, alpha = 0.5, lr = 0.5;
    std::size_t dim = 16, vocab_size = 32, train_size = 2000, val_size = 500;
    std::string out_prefix = "decoder";
};

int run_distill(const DistillArgs& args) {
    const fixtures::DistillFixture f =
        fixtures::distill_fixture(args.seed, args.dim, args.vocab_size, args.train_size,
                                  args.val_size);
    DistillConfig cfg;
    cfg.tau = args.tau;
    cfg.alpha_kd = args.alpha;
    cfg.lr = args.lr;
    cfg.steps = args.steps;
    cfg.batch = args.batch;
    cfg.seed = args.seed;
    cfg.early_stop_patience = args.patience;
    cfg.warmup_steps = args.warmup;
    cfg.eval_every = args.eval_every;

    const TrainResult r =
        train_decoder(f.v_train, f.teacher_train, f.v_val, f.teacher_val, f.w_init, cfg);

    write_vlmg1(r.decoder.weights, args.out_prefix + ".vlmg");

    json sidecar = distill_config_to_json(cfg);
    sidecar["bias"] = r.decoder.bias ? json(*r.decoder.bias) : json(nullptr);
    sidecar["best_val"] = quant12(r.best_val);
    sidecar["steps_run"] = r.steps_run;
    sidecar["early_stopped"] = r.early_stopped;
    save_json(sidecar, args.out_prefix + ".json");

    std::string csv = "step,train_loss,val_loss\n";
    for (const auto& p : r.curve)
        csv += std::to_string(p.step) + "," + format_sig12(p.train_loss) + "," +
               format_sig12(p.val_loss) + "\n";
    save_text(csv, args.out_prefix + "_loss.csv");

    std::cout << "distill: " << r.steps_run << " steps, best validation hard loss "
              << format_sig12(r.best_val) << (r.early_stopped ? " (early stop)" : "") << "\n";
    return 0;
}

// --- gen-fixtures ---------------------------------------------------------------

struct GenFixturesArgs {
    std::uint64_t seed = 0;
    std::string out = "fixtures";
};

int run_gen_fixtures(const GenFixturesArgs& args) {
    namespace fs = std::filesystem;
    fs::create_directories(args.out);
    const auto path = [&](const std::string& name) { return (fs::path(args.out) / name).string(); };

    RandomSource rng(args.seed);
    RandomSource scene_rng = rng.substream(1);
    for (Relation r : kAllRelations) {
        const TwoObjectScene s = fixtures::random_scene(scene_rng, r);
        json j = scene_to_json(s);
        for (const char* key : {"qA", "kA", "vA", "qB", "kB", "vB"})
            for (auto& x : j.at(key)) x = quant12(x.get<double>());
        j["theta"] = quant12(s.theta);
        save_json(j, path(std::string("scene_") + to_string(r) + ".json"));
    }

    RandomSource wu_rng = rng.substream(2);
    const auto vocab = fixtures::demo_vocab();
    const Matrix w_u = fixtures::random_unembedding(8, vocab.size(), wu_rng);
    write_vlmg1(w_u, path("wu.vlmg"));

    RandomSource emb_rng = rng.substream(3);
    const Matrix v = fixtures::planted_embeddings(fixtures::demo_label_grid(), w_u, 4.0, 0.5,
                                                  emb_rng);
    write_vlmg1(v, path("embeddings.vlmg"));

    save_json(json(vocab), path("vocab.json"));
    save_json(keyword_config_to_json(fixtures::bear_keyword_config()), path("keywords.json"));
    save_json(tokenmap_to_json(fixtures::bear_3x3_tokenmap()), path("tokenmap_bear.json"));
    save_json(tokenmap_to_json(fixtures::punct_tokenmap()), path("tokenmap_punct.json"));
    save_json(rope_config_to_json(
                  {FrequencySchedule(10000.0, 16, RopeScaling{49.0, 8.0}), RopeLayout::RotateHalf}),
              path("rope.json"));

    RandomSource punct_rng = rng.substream(4);
    write_vlmg1(fixtures::random_matrix(2, 8, punct_rng), path("embeddings_punct.vlmg"));

    std::cout << "gen-fixtures: wrote fixtures to " << args.out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for visual-token geometry, token maps, "
                 "RLE compression and decoder distillation"};
    app.require_subcommand(1);

    RopeCheckArgs rope_args;
    auto* rope_cmd = app.add_subcommand("rope-check",
                                        "run rotary-embedding property suites");
    std::string rope_config;
    rope_cmd->add_option("--seed", rope_args.seed, "random seed");
    rope_cmd->add_option("--trials", rope_args.trials, "trials per suite");
    rope_cmd->add_option("--config", rope_config, "JSON config standing in for flags");

    SimulateArgs sim_args;
    auto* sim_cmd = app.add_subcommand("simulate",
                                       "two-object scenes to a direction-vector PCA CSV");
    std::string sim_config;
    sim_cmd->add_option("--seed", sim_args.seed, "random seed");
    sim_cmd->add_option("--trials", sim_args.trials, "direction vectors per relation");
    sim_cmd->add_option("--out", sim_args.out, "output CSV path");
    sim_cmd->add_option("--config", sim_config, "JSON config standing in for flags");

    VerifyGeometryArgs geo_args;
    auto* geo_cmd = app.add_subcommand("verify-geometry",
                                       "collinearity / orthogonality / intervention report");
    std::string geo_config;
    geo_cmd->add_option("--seed", geo_args.seed, "random seed");
    geo_cmd->add_option("--trials", geo_args.trials, "random scenes to verify");
    geo_cmd->add_option("--config", geo_config, "JSON config standing in for flags");

    AxisSplitArgs axis_args;
    auto* axis_cmd = app.add_subcommand("axis-split", "attention axis-split curves CSV");
    std::string axis_config;
    axis_cmd->add_option("--seed", axis_args.seed, "random seed");
    axis_cmd->add_option("--layers", axis_args.layers, "number of synthetic layers");
    axis_cmd->add_option("--heads", axis_args.heads, "heads averaged per layer");
    axis_cmd->add_option("--samples", axis_args.samples, "samples averaged per layer");
    axis_cmd->add_option("--tokens", axis_args.tokens, "sequence length");
    axis_cmd->add_option("--dim", axis_args.dim, "head dimension (divisible by 4)");
    axis_cmd->add_option("--rope", axis_args.rope, "rope schedule/layout JSON (overrides --dim)");
    axis_cmd->add_option("--out", axis_args.out, "output CSV path");
    axis_cmd->add_option("--config", axis_config, "JSON config standing in for flags");

    TokenMapArgs tm_args;
    auto* tm_cmd = app.add_subcommand("tokenmap", "decode embeddings into a token map JSON");
    std::string tm_config;
    tm_cmd->add_option("--embeddings", tm_args.embeddings, "VLMG1 embedding matrix")->required();
    tm_cmd->add_option("--unembed", tm_args.unembed, "VLMG1 unembedding matrix")->required();
    tm_cmd->add_option("--vocab", tm_args.vocab, "vocabulary JSON array")->required();
    tm_cmd->add_option("--height", tm_args.height, "grid height")->required();
    tm_cmd->add_option("--width", tm_args.width, "grid width")->required();
    tm_cmd->add_option("--out", tm_args.out, "output token map JSON");
    tm_cmd->add_option("--config", tm_config, "JSON config standing in for flags");

    SegMapArgs seg_args;
    auto* seg_cmd = app.add_subcommand("segmap", "token map to label map and PPM");
    std::string seg_config;
    seg_cmd->add_option("--tokenmap", seg_args.tokenmap, "token map JSON")->required();
    seg_cmd->add_option("--keywords", seg_args.keywords, "keyword config JSON")->required();
    seg_cmd->add_option("--out", seg_args.out, "output PPM path");
    seg_cmd->add_option("--labels", seg_args.labels, "optional label map JSON path");
    seg_cmd->add_option("--config", seg_config, "JSON config standing in for flags");

    StatsArgs stats_args;
    auto* stats_cmd = app.add_subcommand("stats",
                                         "word ratios, emergence rate and synonym answer");
    std::string stats_config;
    stats_cmd->add_option("--tokenmap", stats_args.tokenmap, "token map JSON")->required();
    stats_cmd->add_option("--keywords", stats_args.keywords, "keyword config JSON")->required();
    stats_cmd->add_option("--object", stats_args.object, "object class for the synonym answer");
    stats_cmd->add_option("--mode", stats_args.mode, "strict or loose");
    stats_cmd->add_option("--out", stats_args.out, "optional output JSON path");
    stats_cmd->add_option("--config", stats_config, "JSON config standing in for flags");

    CompressArgs comp_args;
    auto* comp_cmd = app.add_subcommand("compress", "RLE-compress a visual embedding sequence");
    std::string comp_config;
    comp_cmd->add_option("--tokenmap", comp_args.tokenmap, "token map JSON")->required();
    comp_cmd->add_option("--embeddings", comp_args.embeddings, "VLMG1 embeddings")->required();
    comp_cmd->add_option("--keywords", comp_args.keywords, "keyword config JSON");
    comp_cmd->add_option("--method", comp_args.method, "all | filter-top1 | filter-top2");
    comp_cmd->add_option("--reducer", comp_args.reducer, "random | mean");
    comp_cmd->add_option("--seed", comp_args.seed, "random seed");
    comp_cmd->add_option("--out", comp_args.out, "compressed VLMG1 path");
    comp_cmd->add_option("--report", comp_args.report, "optional report JSON path");
    comp_cmd->add_option("--config", comp_config, "JSON config standing in for flags");

    DistillArgs dist_args;
    auto* dist_cmd = app.add_subcommand("distill",
                                        "train the visual decoder on a synthetic fixture");
    std::string dist_config;
    dist_cmd->add_option("--seed", dist_args.seed, "fixture and training seed");
    dist_cmd->add_option("--steps", dist_args.steps, "max training steps");
    dist_cmd->add_option("--batch", dist_args.batch, "batch size");
    dist_cmd->add_option("--tau", dist_args.tau, "distillation temperature");
    dist_cmd->add_option("--alpha", dist_args.alpha, "soft-loss weight");
    dist_cmd->add_option("--lr", dist_args.lr, "peak learning rate");
    dist_cmd->add_option("--patience", dist_args.patience, "early-stop patience");
    dist_cmd->add_option("--warmup", dist_args.warmup, "warmup steps");
    dist_cmd->add_option("--eval-every", dist_args.eval_every, "steps between evaluations");
    dist_cmd->add_option("--dim", dist_args.dim, "embedding dimension");
    dist_cmd->add_option("--vocab-size", dist_args.vocab_size, "vocabulary size");
    dist_cmd->add_option("--train", dist_args.train_size, "training rows");
    dist_cmd->add_option("--val", dist_args.val_size, "validation rows");
    dist_cmd->add_option("--out-prefix", dist_args.out_prefix, "artifact path prefix");
    dist_cmd->add_option("--config", dist_config, "JSON config standing in for flags");

    GenFixturesArgs gen_args;
    auto* gen_cmd = app.add_subcommand("gen-fixtures", "write seeded synthetic fixtures");
    std::string gen_config;
    gen_cmd->add_option("--seed", gen_args.seed, "random seed");
    gen_cmd->add_option("--out", gen_args.out, "output directory");
    gen_cmd->add_option("--config", gen_config, "JSON config standing in for flags");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*rope_cmd) {
            ConfigMerger m(rope_cmd, rope_config);
            m.field("seed", rope_args.seed).field("trials", rope_args.trials);
            m.finish();
            return run_rope_check(rope_args);
        }
        if (*sim_cmd) {
            ConfigMerger m(sim_cmd, sim_config);
            m.field("seed", sim_args.seed)
                .field("trials", sim_args.trials)
                .field("out", sim_args.out);
            m.finish();
            return run_simulate(sim_args);
        }
        if (*geo_cmd) {
            ConfigMerger m(geo_cmd, geo_config);
            m.field("seed", geo_args.seed).field("trials", geo_args.trials);
            m.finish();
            return run_verify_geometry(geo_args);
        }
        if (*axis_cmd) {
            ConfigMerger m(axis_cmd, axis_config);
            m.field("seed", axis_args.seed)
                .field("layers", axis_args.layers)
                .field("heads", axis_args.heads)
                .field("samples", axis_args.samples)
                .field("tokens", axis_args.tokens)
                .field("dim", axis_args.dim)
                .field("rope", axis_args.rope)
                .field("out", axis_args.out);
            m.finish();
            return run_axis_split(axis_args);
        }
        if (*tm_cmd) {
            ConfigMerger m(tm_cmd, tm_config);
            m.field("embeddings", tm_args.embeddings)
                .field("unembed", tm_args.unembed)
                .field("vocab", tm_args.vocab)
                .field("height", tm_args.height)
                .field("width", tm_args.width)
                .field("out", tm_args.out);
            m.finish();
            return run_tokenmap(tm_args);
        }
        if (*seg_cmd) {
            ConfigMerger m(seg_cmd, seg_config);
            m.field("tokenmap", seg_args.tokenmap)
                .field("keywords", seg_args.keywords)
                .field("out", seg_args.out)
                .field("labels", seg_args.labels);
            m.finish();
            return run_segmap(seg_args);
        }
        if (*stats_cmd) {
            ConfigMerger m(stats_cmd, stats_config);
            m.field("tokenmap", stats_args.tokenmap)
                .field("keywords", stats_args.keywords)
                .field("object", stats_args.object)
                .field("mode", stats_args.mode)
                .field("out", stats_args.out);
            m.finish();
            return run_stats(stats_args);
        }
        if (*comp_cmd) {
            ConfigMerger m(comp_cmd, comp_config);
            m.field("tokenmap", comp_args.tokenmap)
                .field("embeddings", comp_args.embeddings)
                .field("keywords", comp_args.keywords)
                .field("method", comp_args.method)
                .field("reducer", comp_args.reducer)
                .field("seed", comp_args.seed)
                .field("out", comp_args.out)
                .field("report", comp_args.report);
            m.finish();
            return run_compress(comp_args);
        }
        if (*dist_cmd) {
            ConfigMerger m(dist_cmd, dist_config);
            m.field("seed", dist_args.seed)
                .field("steps", dist_args.steps)
                .field("batch", dist_args.batch)
                .field("tau", dist_args.tau)
                .field("alpha", dist_args.alpha)
                .field("lr", dist_args.lr)
                .field("patience", dist_args.patience)
                .field("warmup", dist_args.warmup)
                .field("eval-every", dist_args.eval_every)
                .field("dim", dist_args.dim)
                .field("vocab-size", dist_args.vocab_size)
                .field("train", dist_args.train_size)
                .field("val", dist_args.val_size)
                .field("out-prefix", dist_args.out_prefix);
            m.finish();
            return run_distill(dist_args);
        }
        if (*gen_cmd) {
            ConfigMerger m(gen_cmd, gen_config);
            m.field("seed", gen_args.seed).field("out", gen_args.out);
            m.finish();
            return run_gen_fixtures(gen_args);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
