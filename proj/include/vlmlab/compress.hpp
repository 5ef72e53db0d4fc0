// Run-length-encoding compression of visual embedding sequences.
//
// Stage 1 groups consecutive cells with equal top-1 tokens into runs; the
// stored (top1, top2) pair of a run comes from its last cell, matching a
// scanner that saves the previous cell's candidates when a run closes.
// Stage 2 optionally drops meaningless runs (by top-1, or only when both
// top-1 and top-2 are meaningless) and reduces each surviving run to a
// single embedding, either a uniformly chosen member row or the mean row.

#ifndef VLMLAB_COMPRESS_HPP
#define VLMLAB_COMPRESS_HPP

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vlmlab/matrix.hpp"
#include "vlmlab/random.hpp"
#include "vlmlab/tokenmap.hpp"

namespace vlmlab {

/// One run of the flattened token map; `start` is 1-based.
struct Run {
    std::size_t start = 1;
    std::size_t length = 1;
    std::string top1, top2;
};

enum class RunFilter { AllRuns, FilterTop1, FilterTop2 };
enum class RunReducer { RandomSelect, MeanPool };

struct CompressionMethod {
    RunFilter filter = RunFilter::AllRuns;
    RunReducer reducer = RunReducer::RandomSelect;
};

inline const char* to_string(RunFilter f) {
    switch (f) {
        case RunFilter::AllRuns: return "all";
        case RunFilter::FilterTop1: return "filter-top1";
        case RunFilter::FilterTop2: return "filter-top2";
    }
    return "?";
}

inline RunFilter run_filter_from_string(const std::string& s) {
    if (s == "all") return RunFilter::AllRuns;
    if (s == "filter-top1") return RunFilter::FilterTop1;
    if (s == "filter-top2") return RunFilter::FilterTop2;
    throw std::invalid_argument("unknown compression method: " + s);
}

inline const char* to_string(RunReducer r) {
    return r == RunReducer::RandomSelect ? "random" : "mean";
}

inline RunReducer run_reducer_from_string(const std::string& s) {
    if (s == "random") return RunReducer::RandomSelect;
    if (s == "mean") return RunReducer::MeanPool;
    throw std::invalid_argument("unknown reducer: " + s);
}

/// Maximal runs of equal consecutive top-1 tokens over the flattened map.
inline std::vector<Run> rle_runs(const TokenMap& tm) {
    if (tm.cells.empty()) throw std::invalid_argument("rle_runs: empty sequence");
    std::vector<Run> runs;
    std::size_t start = 1, length = 1;
    for (std::size_t i = 1; i < tm.cells.size(); ++i) {
        if (tm.cells[i].top1 == tm.cells[i - 1].top1) {
            ++length;
        } else {
            runs.push_back({start, length, tm.cells[i - 1].top1, tm.cells[i - 1].top2});
            start = i + 1;
            length = 1;
        }
    }
    runs.push_back({start, length, tm.cells.back().top1, tm.cells.back().top2});
    return runs;
}

/// Expand runs back into the top-1 token sequence.
inline std::vector<std::string> expand_runs(std::span<const Run> runs) {
    std::vector<std::string> out;
    for (const Run& r : runs)
        for (std::size_t i = 0; i < r.length; ++i) out.push_back(r.top1);
    return out;
}

inline bool run_is_dropped(const Run& r, RunFilter filter, const KeywordConfig& cfg) {
    switch (filter) {
        case RunFilter::AllRuns: return false;
        case RunFilter::FilterTop1: return cfg.is_meaningless(r.top1);
        case RunFilter::FilterTop2:
            return cfg.is_meaningless(r.top1) && cfg.is_meaningless(r.top2);
    }
    return false;
}

/// Stage 2: filter runs and reduce each survivor to one embedding row.
/// Output rows preserve run order.
inline Matrix compress(const Matrix& v, std::span<const Run> runs, CompressionMethod method,
                       const KeywordConfig& cfg, RandomSource& rng) {
    std::size_t total = 0;
    for (const Run& r : runs) {
        if (r.start < 1 || r.start - 1 + r.length > v.rows())
            throw std::invalid_argument("compress: run outside embedding range");
        total += r.length;
    }
    if (total != v.rows())
        throw std::invalid_argument("compress: runs do not partition the sequence");

    std::vector<double> out_data;
    std::size_t kept = 0;
    for (const Run& r : runs) {
        if (run_is_dropped(r, method.filter, cfg)) continue;
        const std::size_t first = r.start - 1;
        if (method.reducer == RunReducer::RandomSelect) {
            const std::size_t pick = first + rng.uniform_index(r.length);
            auto row = v.row(pick);
            out_data.insert(out_data.end(), row.begin(), row.end());
        } else {
            std::vector<std::size_t> idx(r.length);
            for (std::size_t i = 0; i < r.length; ++i) idx[i] = first + i;
            const auto mean = mean_pool(v, idx);
            out_data.insert(out_data.end(), mean.begin(), mean.end());
        }
        ++kept;
    }
    return Matrix::from_data(kept, v.cols(), std::move(out_data));
}

/// Percentage decrease of the sequence length.
inline double reduction_rate(std::size_t n_before, std::size_t n_after) {
    if (n_before < 1) throw std::invalid_argument("reduction_rate: n_before must be >= 1");
    if (n_after > n_before) throw std::invalid_argument("reduction_rate: n_after > n_before");
    return 100.0 * static_cast<double>(n_before - n_after) / static_cast<double>(n_before);
}

struct CompressionReport {
    std::size_t n_before = 0;
    std::size_t n_after = 0;
    double rate_percent = 0.0;
    std::string method;
    std::size_t runs = 0;
};

inline nlohmann::json report_to_json(const CompressionReport& r) {
    return {{"n_before", r.n_before}, {"n_after", r.n_after}, {"rate_percent", r.rate_percent},
            {"method", r.method},     {"runs", r.runs}};
}

} // namespace vlmlab

#endif // VLMLAB_COMPRESS_HPP
