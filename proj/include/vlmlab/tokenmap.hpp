// Logit-lens token maps and their refinement into label / segmentation maps.
//
// A token map is an H x W grid over the patchified image; each cell holds
// the top-2 decoded text tokens of that patch's embedding with their
// probabilities. The label map resolves every cell to an object label:
// keyword cells directly, other cells by 8-neighborhood voting over
// meaningful neighbors with a frequency -> cumulative-Manhattan-distance ->
// lexicographic tie-break chain. Word-ratio, emergence-rate and synonym
// statistics are computed on top of the token map.

#ifndef VLMLAB_TOKENMAP_HPP
#define VLMLAB_TOKENMAP_HPP

#include <array>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vlmlab/matrix.hpp"

namespace vlmlab {

struct TokenCell {
    std::string top1, top2;
    double p1 = 0.0, p2 = 0.0;
};

struct TokenMap {
    std::size_t height = 0, width = 0;
    std::vector<TokenCell> cells;  // row-major, height * width entries

    const TokenCell& at(std::size_t row, std::size_t col) const {
        return cells[row * width + col];
    }
    TokenCell& at(std::size_t row, std::size_t col) { return cells[row * width + col]; }

    void validate() const {
        if (cells.size() != height * width)
            throw std::invalid_argument("TokenMap: cells size != height*width");
        for (const auto& c : cells) {
            if (!(c.p1 >= c.p2)) throw std::invalid_argument("TokenMap: p1 < p2");
            if (c.p1 < 0.0 || c.p1 > 1.0 || c.p2 < 0.0 || c.p2 > 1.0)
                throw std::invalid_argument("TokenMap: probabilities outside [0,1]");
        }
    }
};

using Rgb = std::array<std::uint8_t, 3>;

inline constexpr const char* kBackgroundLabel = "background";
inline constexpr const char* kOthersLabel = "others";
inline constexpr Rgb kBackgroundColor = {0, 0, 0};
inline constexpr Rgb kOthersColor = {128, 128, 128};

/// Tokens with no practical meaning: ASCII punctuation, whitespace-only
/// strings, and the empty token. Fully overridable in the config.
inline std::set<std::string> default_meaningless_tokens() {
    std::set<std::string> m;
    m.insert("");
    const std::string punct = R"(!"#$%&'()*+,-./:;<=>?@[\]^_`{|}~)";
    for (char c : punct) m.insert(std::string(1, c));
    for (const char* ws : {" ", "  ", "\t", "\n", "\r", " \t"}) m.insert(ws);
    return m;
}

inline bool is_whitespace_only(const std::string& s) {
    if (s.empty()) return true;
    for (char c : s)
        if (c != ' ' && c != '\t' && c != '\n' && c != '\r' && c != '\f' && c != '\v') return false;
    return true;
}

class KeywordConfig {
public:
    struct ObjectEntry {
        std::string name;
        std::vector<std::string> keywords;
    };

    // Declaration order matters: a token claimed by several objects resolves
    // to the first one.
    std::vector<ObjectEntry> objects;
    std::map<std::string, std::set<std::string>> representative;  // W^{R,o}
    std::map<std::string, std::set<std::string>> attributes;      // W^{A,o}
    std::map<std::string, Rgb> colors;
    std::set<std::string> meaningless = default_meaningless_tokens();
    bool whitespace_is_meaningless = true;
    std::map<std::string, std::set<std::string>> synonyms;

    bool is_meaningless(const std::string& token) const {
        return meaningless.count(token) > 0 ||
               (whitespace_is_meaningless && is_whitespace_only(token));
    }

    std::optional<std::string> object_for_token(const std::string& token) const {
        for (const auto& entry : objects)
            for (const auto& kw : entry.keywords)
                if (kw == token) return entry.name;
        return std::nullopt;
    }

    /// Warns on stderr when keyword sets overlap; reserved labels always
    /// have a color.
    void finalize(std::ostream& warnings = std::cerr) {
        if (!colors.count(kBackgroundLabel)) colors[kBackgroundLabel] = kBackgroundColor;
        if (!colors.count(kOthersLabel)) colors[kOthersLabel] = kOthersColor;
        std::map<std::string, std::string> seen;
        for (const auto& entry : objects)
            for (const auto& kw : entry.keywords) {
                auto [it, inserted] = seen.emplace(kw, entry.name);
                if (!inserted && it->second != entry.name)
                    warnings << "keyword config: token '" << kw << "' claimed by both '"
                             << it->second << "' and '" << entry.name << "'; using '"
                             << it->second << "'\n";
            }
    }
};

struct LabelMap {
    std::size_t height = 0, width = 0;
    std::vector<std::string> labels;  // row-major

    const std::string& at(std::size_t row, std::size_t col) const {
        return labels[row * width + col];
    }
};

struct SegMap {
    std::size_t height = 0, width = 0;
    std::vector<Rgb> pixels;  // row-major

    const Rgb& at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
};

/// Decode every patch embedding through the unembedding matrix: per cell,
/// softmax(row * w_u), keep the top-2 tokens. Probability ties break toward
/// the lowest vocabulary index.
inline TokenMap logit_lens(const Matrix& v, const Matrix& w_u, std::size_t height,
                           std::size_t width, const std::vector<std::string>& vocab) {
    if (v.cols() != w_u.rows())
        throw std::invalid_argument("logit_lens: embedding dim != unembedding rows");
    if (height * width != v.rows())
        throw std::invalid_argument("logit_lens: height*width != number of embeddings");
    if (vocab.size() != w_u.cols())
        throw std::invalid_argument("logit_lens: vocab size != unembedding cols");
    if (w_u.cols() < 2) throw std::invalid_argument("logit_lens: vocabulary must have >= 2 tokens");

    const Matrix probs = softmax_rows(matmul(v, w_u));
    TokenMap tm;
    tm.height = height;
    tm.width = width;
    tm.cells.resize(v.rows());
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        std::size_t best = 0, second = 1;
        if (probs(i, 1) > probs(i, 0)) {
            best = 1;
            second = 0;
        }
        for (std::size_t j = 2; j < probs.cols(); ++j) {
            if (probs(i, j) > probs(i, best)) {
                second = best;
                best = j;
            } else if (probs(i, j) > probs(i, second)) {
                second = j;
            }
        }
        tm.cells[i] = {vocab[best], vocab[second], probs(i, best), probs(i, second)};
    }
    return tm;
}

namespace detail {

struct NeighborVote {
    std::string token;
    int distance;  // Manhattan distance, 1 or 2
};

inline std::string resolve_unclassified(const TokenMap& tm, std::size_t row, std::size_t col,
                                        const KeywordConfig& cfg) {
    std::vector<NeighborVote> votes;
    for (int di = -1; di <= 1; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
            if (di == 0 && dj == 0) continue;
            const long long ni = static_cast<long long>(row) + di;
            const long long nj = static_cast<long long>(col) + dj;
            if (ni < 0 || nj < 0 || ni >= static_cast<long long>(tm.height) ||
                nj >= static_cast<long long>(tm.width))
                continue;
            const std::string& tok = tm.at(static_cast<std::size_t>(ni),
                                           static_cast<std::size_t>(nj)).top1;
            if (!cfg.is_meaningless(tok))
                votes.push_back({tok, std::abs(di) + std::abs(dj)});
        }
    }
    if (votes.empty()) return kBackgroundLabel;

    std::map<std::string, int> freq;
    std::map<std::string, int> cum_dist;
    for (const auto& v : votes) {
        freq[v.token] += 1;
        cum_dist[v.token] += v.distance;
    }
    int max_count = 0;
    for (const auto& [tok, count] : freq) max_count = std::max(max_count, count);

    // Frequency winner; ties by minimum cumulative Manhattan distance, then
    // lexicographically smallest token for determinism.
    std::string winner;
    int best_dist = 0;
    for (const auto& [tok, count] : freq) {
        if (count != max_count) continue;
        const int dist = cum_dist[tok];
        if (winner.empty() || dist < best_dist || (dist == best_dist && tok < winner)) {
            winner = tok;
            best_dist = dist;
        }
    }

    const auto object = cfg.object_for_token(winner);
    return object ? *object : kOthersLabel;
}

} // namespace detail

/// Phase 1 of the segmentation-map refinement: keyword cells take their
/// object's label directly; every other cell is resolved by neighbor voting.
inline LabelMap label_map(const TokenMap& tm, const KeywordConfig& cfg) {
    tm.validate();
    LabelMap lm;
    lm.height = tm.height;
    lm.width = tm.width;
    lm.labels.resize(tm.cells.size());
    for (std::size_t i = 0; i < tm.height; ++i) {
        for (std::size_t j = 0; j < tm.width; ++j) {
            const auto object = cfg.object_for_token(tm.at(i, j).top1);
            lm.labels[i * tm.width + j] =
                object ? *object : detail::resolve_unclassified(tm, i, j, cfg);
        }
    }
    return lm;
}

/// Phase 2: per-cell color lookup.
inline SegMap render_seg_map(const LabelMap& lm, const KeywordConfig& cfg) {
    SegMap sm;
    sm.height = lm.height;
    sm.width = lm.width;
    sm.pixels.resize(lm.labels.size());
    for (std::size_t i = 0; i < lm.labels.size(); ++i) {
        const std::string& label = lm.labels[i];
        auto it = cfg.colors.find(label);
        if (it == cfg.colors.end()) {
            if (label == kBackgroundLabel)
                sm.pixels[i] = kBackgroundColor;
            else if (label == kOthersLabel)
                sm.pixels[i] = kOthersColor;
            else
                throw std::invalid_argument("render_seg_map: no color for label '" + label + "'");
        } else {
            sm.pixels[i] = it->second;
        }
    }
    return sm;
}

/// Fractions of cells whose top-1 token is an attribute / representative
/// word of any object.
inline std::pair<double, double> word_ratios(const TokenMap& tm, const KeywordConfig& cfg) {
    if (tm.cells.empty()) return {0.0, 0.0};
    std::size_t attr = 0, repr = 0;
    for (const auto& cell : tm.cells) {
        bool is_attr = false, is_repr = false;
        for (const auto& entry : cfg.attributes)
            if (entry.second.count(cell.top1)) { is_attr = true; break; }
        for (const auto& entry : cfg.representative)
            if (entry.second.count(cell.top1)) { is_repr = true; break; }
        attr += is_attr;
        repr += is_repr;
    }
    const double n = static_cast<double>(tm.cells.size());
    return {static_cast<double>(attr) / n, static_cast<double>(repr) / n};
}

/// Fraction of cells whose top-1 token is one of the given object names.
inline double emergence_rate(const TokenMap& tm, const std::set<std::string>& names) {
    if (tm.cells.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& cell : tm.cells) hits += names.count(cell.top1) > 0;
    return static_cast<double>(hits) / static_cast<double>(tm.cells.size());
}

enum class SynonymMode { Strict, Loose };

inline SynonymMode synonym_mode_from_string(const std::string& s) {
    if (s == "strict") return SynonymMode::Strict;
    if (s == "loose") return SynonymMode::Loose;
    throw std::invalid_argument("unknown synonym mode: " + s);
}

/// Answer "is <object> in the image?" from the token map. Strict scans only
/// top-1 tokens; loose also scans top-2.
inline bool synonym_answer(const TokenMap& tm, const std::string& object,
                           const KeywordConfig& cfg, SynonymMode mode) {
    auto it = cfg.synonyms.find(object);
    if (it == cfg.synonyms.end())
        throw std::invalid_argument("synonym_answer: unknown class '" + object + "'");
    const auto& syns = it->second;
    for (const auto& cell : tm.cells) {
        if (syns.count(cell.top1)) return true;
        if (mode == SynonymMode::Loose && syns.count(cell.top2)) return true;
    }
    return false;
}

// --- JSON / PPM interchange -------------------------------------------------

inline nlohmann::json tokenmap_to_json(const TokenMap& tm) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : tm.cells)
        cells.push_back({{"top1", c.top1}, {"top2", c.top2}, {"p1", c.p1}, {"p2", c.p2}});
    return {{"height", tm.height}, {"width", tm.width}, {"cells", cells}};
}

inline TokenMap tokenmap_from_json(const nlohmann::json& j) {
    TokenMap tm;
    if (!j.contains("height")) throw std::invalid_argument("token map: missing field 'height'");
    if (!j.contains("width")) throw std::invalid_argument("token map: missing field 'width'");
    if (!j.contains("cells")) throw std::invalid_argument("token map: missing field 'cells'");
    tm.height = j.at("height").get<std::size_t>();
    tm.width = j.at("width").get<std::size_t>();
    for (const auto& c : j.at("cells")) {
        TokenCell cell;
        cell.top1 = c.at("top1").get<std::string>();
        cell.top2 = c.value("top2", std::string{});
        cell.p1 = c.value("p1", 1.0);
        cell.p2 = c.value("p2", 0.0);
        tm.cells.push_back(cell);
    }
    tm.validate();
    return tm;
}

inline nlohmann::json labelmap_to_json(const LabelMap& lm) {
    return {{"height", lm.height}, {"width", lm.width}, {"labels", lm.labels}};
}

inline KeywordConfig keyword_config_from_json(const nlohmann::json& j,
                                              std::ostream& warnings = std::cerr) {
    KeywordConfig cfg;
    if (j.contains("objects")) {
        for (const auto& entry : j.at("objects")) {
            KeywordConfig::ObjectEntry e;
            e.name = entry.at("name").get<std::string>();
            for (const auto& kw : entry.at("keywords")) e.keywords.push_back(kw.get<std::string>());
            cfg.objects.push_back(std::move(e));
        }
    }
    const auto read_word_map = [&](const char* field,
                                   std::map<std::string, std::set<std::string>>& out) {
        if (!j.contains(field)) return;
        for (const auto& [name, words] : j.at(field).items())
            for (const auto& w : words) out[name].insert(w.get<std::string>());
    };
    read_word_map("representative", cfg.representative);
    read_word_map("attributes", cfg.attributes);
    read_word_map("synonyms", cfg.synonyms);
    if (j.contains("colors")) {
        for (const auto& [name, rgb] : j.at("colors").items()) {
            if (!rgb.is_array() || rgb.size() != 3)
                throw std::invalid_argument("keyword config: color for '" + name +
                                            "' must be an RGB triple");
            cfg.colors[name] = {rgb[0].get<std::uint8_t>(), rgb[1].get<std::uint8_t>(),
                                rgb[2].get<std::uint8_t>()};
        }
    }
    if (j.contains("meaningless")) {
        cfg.meaningless.clear();
        for (const auto& t : j.at("meaningless")) cfg.meaningless.insert(t.get<std::string>());
        if (cfg.meaningless.empty())
            throw std::invalid_argument("keyword config: meaningless set must be nonempty");
    }
    cfg.whitespace_is_meaningless = j.value("whitespace_meaningless", true);
    cfg.finalize(warnings);
    return cfg;
}

inline nlohmann::json keyword_config_to_json(const KeywordConfig& cfg) {
    nlohmann::json objects = nlohmann::json::array();
    for (const auto& e : cfg.objects) objects.push_back({{"name", e.name}, {"keywords", e.keywords}});
    nlohmann::json j;
    j["objects"] = objects;
    j["representative"] = cfg.representative;
    j["attributes"] = cfg.attributes;
    nlohmann::json colors;
    for (const auto& [name, rgb] : cfg.colors) colors[name] = {rgb[0], rgb[1], rgb[2]};
    j["colors"] = colors;
    j["meaningless"] = cfg.meaningless;
    j["whitespace_meaningless"] = cfg.whitespace_is_meaningless;
    j["synonyms"] = cfg.synonyms;
    return j;
}

/// Plain binary PPM (P6), one pixel per patch cell.
inline void write_ppm(const SegMap& sm, std::ostream& os) {
    os << "P6\n" << sm.width << " " << sm.height << "\n255\n";
    for (const Rgb& px : sm.pixels)
        os.write(reinterpret_cast<const char*>(px.data()), 3);
    if (!os) throw std::runtime_error("ppm: write failed");
}

inline void write_ppm(const SegMap& sm, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("ppm: cannot open " + path);
    write_ppm(sm, os);
}

} // namespace vlmlab

#endif // VLMLAB_TOKENMAP_HPP
