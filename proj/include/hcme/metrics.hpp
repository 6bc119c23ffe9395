#pragma once

// Security-analysis metrics: histogram, entropy, adjacent-pixel correlation,
// NPCR/UACI, PSNR, SSIM, chi-square, and the JSON/CSV report around them.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hcme/errors.hpp"
#include "hcme/image.hpp"
#include "hcme/pgm.hpp"

namespace hcme {

inline constexpr std::uint64_t kDefaultCorrelationSeed = 0x5eedc0de;
inline constexpr std::size_t kDefaultCorrelationSamples = 5000;
inline constexpr std::size_t kSsimWindow = 8;
inline constexpr double kSsimK1 = 0.01, kSsimK2 = 0.03, kSsimL = 255.0;

inline std::array<std::uint64_t, 256> histogram(const ByteImage& img) {
    std::array<std::uint64_t, 256> h{};
    for (std::uint8_t v : img.data) ++h[v];
    return h;
}

/// Shannon entropy in bits over the 256 intensity levels.
inline double entropy(const ByteImage& img) {
    if (img.data.empty()) throw Error("entropy of an empty image");
    auto h = histogram(img);
    double total = static_cast<double>(img.data.size());
    double e = 0;
    for (std::uint64_t count : h) {
        if (count == 0) continue;
        double p = static_cast<double>(count) / total;
        e -= p * std::log2(p);
    }
    return e;
}

inline double chi_square_uniformity(const std::array<std::uint64_t, 256>& hist) {
    std::uint64_t total = 0;
    for (auto c : hist) total += c;
    double expected = static_cast<double>(total) / 256.0;
    double chi = 0;
    for (auto c : hist) {
        double d = static_cast<double>(c) - expected;
        chi += d * d / expected;
    }
    return chi;
}

enum class Adjacency { Horizontal, Vertical, Diagonal };

inline std::string_view adjacency_name(Adjacency a) {
    switch (a) {
        case Adjacency::Horizontal: return "horizontal";
        case Adjacency::Vertical: return "vertical";
        case Adjacency::Diagonal: return "diagonal";
    }
    return "?";
}

/// Pearson correlation over `samples` randomly chosen adjacent pairs.
/// Returns nullopt when either sampled vector is constant.
inline std::optional<double> adjacent_correlation(const ByteImage& img, Adjacency dir,
                                                  std::size_t samples = kDefaultCorrelationSamples,
                                                  std::uint64_t rng_seed = kDefaultCorrelationSeed) {
    if (img.rows < 2 || img.cols < 2) throw DimensionMismatch("correlation needs at least 2x2");
    if (samples < 2) throw Error("correlation needs at least 2 samples");
    std::mt19937_64 rng(rng_seed);
    const std::size_t max_r = dir == Adjacency::Horizontal ? img.rows : img.rows - 1;
    const std::size_t max_c = dir == Adjacency::Vertical ? img.cols : img.cols - 1;
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    const double inv_n = 1.0 / static_cast<double>(samples);
    for (std::size_t k = 0; k < samples; ++k) {
        std::size_t i = rng() % max_r;
        std::size_t j = rng() % max_c;
        double a = img.at(i, j);
        double b = 0;
        switch (dir) {
            case Adjacency::Horizontal: b = img.at(i, j + 1); break;
            case Adjacency::Vertical: b = img.at(i + 1, j); break;
            case Adjacency::Diagonal: b = img.at(i + 1, j + 1); break;
        }
        sa += a; sb += b; saa += a * a; sbb += b * b; sab += a * b;
    }
    double cov = sab * inv_n - (sa * inv_n) * (sb * inv_n);
    double va = saa * inv_n - (sa * inv_n) * (sa * inv_n);
    double vb = sbb * inv_n - (sb * inv_n) * (sb * inv_n);
    if (va <= 0 || vb <= 0) return std::nullopt;
    return cov / std::sqrt(va * vb);
}

/// Pearson correlation of two whole images (Eq.-style, no sampling).
inline std::optional<double> image_correlation(const ByteImage& a, const ByteImage& b) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw DimensionMismatch("correlation needs equal dimensions");
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    const double inv_n = 1.0 / static_cast<double>(a.data.size());
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        double x = a.data[i], y = b.data[i];
        sa += x; sb += y; saa += x * x; sbb += y * y; sab += x * y;
    }
    double cov = sab * inv_n - (sa * inv_n) * (sb * inv_n);
    double va = saa * inv_n - (sa * inv_n) * (sa * inv_n);
    double vb = sbb * inv_n - (sb * inv_n) * (sb * inv_n);
    if (va <= 0 || vb <= 0) return std::nullopt;
    return cov / std::sqrt(va * vb);
}

/// NPCR: percentage of differing positions. UACI: mean |difference| / 255
/// as a percentage.
inline std::pair<double, double> npcr_uaci(const ByteImage& c1, const ByteImage& c2) {
    if (c1.rows != c2.rows || c1.cols != c2.cols)
        throw DimensionMismatch("NPCR/UACI need equal dimensions");
    std::uint64_t changed = 0, abs_sum = 0;
    for (std::size_t i = 0; i < c1.data.size(); ++i) {
        int d = static_cast<int>(c1.data[i]) - static_cast<int>(c2.data[i]);
        if (d != 0) ++changed;
        abs_sum += static_cast<std::uint64_t>(d < 0 ? -d : d);
    }
    double total = static_cast<double>(c1.data.size());
    double npcr = 100.0 * static_cast<double>(changed) / total;
    double uaci = 100.0 * static_cast<double>(abs_sum) / (255.0 * total);
    return {npcr, uaci};
}

/// PSNR in dB; identical images report +infinity.
inline double psnr(const ByteImage& a, const ByteImage& b) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw DimensionMismatch("PSNR needs equal dimensions");
    double mse = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
        mse += d * d;
    }
    mse /= static_cast<double>(a.data.size());
    if (mse == 0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

/// Mean SSIM over 8x8 uniform windows at stride 1 (single whole-image window
/// when the image is smaller than the window).
inline double ssim(const ByteImage& a, const ByteImage& b) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw DimensionMismatch("SSIM needs equal dimensions");
    const double c1 = (kSsimK1 * kSsimL) * (kSsimK1 * kSsimL);
    const double c2 = (kSsimK2 * kSsimL) * (kSsimK2 * kSsimL);
    std::size_t wr = std::min(a.rows, kSsimWindow);
    std::size_t wc = std::min(a.cols, kSsimWindow);
    double acc = 0;
    std::size_t windows = 0;
    for (std::size_t r = 0; r + wr <= a.rows; ++r) {
        for (std::size_t c = 0; c + wc <= a.cols; ++c) {
            double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
            for (std::size_t i = 0; i < wr; ++i)
                for (std::size_t j = 0; j < wc; ++j) {
                    double x = a.at(r + i, c + j), y = b.at(r + i, c + j);
                    sa += x; sb += y; saa += x * x; sbb += y * y; sab += x * y;
                }
            double n = static_cast<double>(wr * wc);
            double ma = sa / n, mb = sb / n;
            double va = saa / n - ma * ma, vb = sbb / n - mb * mb;
            double cab = sab / n - ma * mb;
            acc += ((2 * ma * mb + c1) * (2 * cab + c2)) /
                   ((ma * ma + mb * mb + c1) * (va + vb + c2));
            ++windows;
        }
    }
    return acc / static_cast<double>(windows);
}

// --- report -------------------------------------------------------------

struct ImageStats {
    std::string name;
    std::size_t rows = 0, cols = 0;
    double entropy = 0;
    double chi_square = 0;
    std::optional<double> corr_horizontal, corr_vertical, corr_diagonal;
    std::array<std::uint64_t, 256> histogram{};
};

struct AnalysisReport {
    std::size_t correlation_samples = kDefaultCorrelationSamples;
    std::uint64_t correlation_rng_seed = kDefaultCorrelationSeed;
    ImageStats a;
    std::optional<ImageStats> b;
    // comparison block, present when b is
    std::optional<double> npcr, uaci, psnr_db, ssim_value;
};

inline ImageStats image_stats(const ByteImage& img, std::string name,
                              std::size_t samples = kDefaultCorrelationSamples,
                              std::uint64_t rng_seed = kDefaultCorrelationSeed) {
    ImageStats s;
    s.name = std::move(name);
    s.rows = img.rows;
    s.cols = img.cols;
    s.entropy = entropy(img);
    s.histogram = histogram(img);
    s.chi_square = chi_square_uniformity(s.histogram);
    if (img.rows >= 2 && img.cols >= 2) {
        s.corr_horizontal = adjacent_correlation(img, Adjacency::Horizontal, samples, rng_seed);
        s.corr_vertical = adjacent_correlation(img, Adjacency::Vertical, samples, rng_seed);
        s.corr_diagonal = adjacent_correlation(img, Adjacency::Diagonal, samples, rng_seed);
    }
    return s;
}

inline AnalysisReport analyze(const ByteImage& a, const ByteImage* b,
                              std::size_t samples = kDefaultCorrelationSamples,
                              std::uint64_t rng_seed = kDefaultCorrelationSeed,
                              std::string name_a = "a", std::string name_b = "b") {
    AnalysisReport rep;
    rep.correlation_samples = samples;
    rep.correlation_rng_seed = rng_seed;
    rep.a = image_stats(a, std::move(name_a), samples, rng_seed);
    if (b) {
        rep.b = image_stats(*b, std::move(name_b), samples, rng_seed);
        auto [n, u] = npcr_uaci(a, *b);
        rep.npcr = n;
        rep.uaci = u;
        rep.psnr_db = psnr(a, *b);
        rep.ssim_value = ssim(a, *b);
    }
    return rep;
}

namespace detail {

inline nlohmann::json corr_json(const std::optional<double>& v) {
    if (!v) return nullptr;  // flagged undefined (degenerate variance)
    return *v;
}

inline nlohmann::json stats_json(const ImageStats& s) {
    nlohmann::json j{{"name", s.name},
                     {"rows", s.rows},
                     {"cols", s.cols},
                     {"entropy", s.entropy},
                     {"chi_square", s.chi_square},
                     {"correlation",
                      {{"horizontal", corr_json(s.corr_horizontal)},
                       {"vertical", corr_json(s.corr_vertical)},
                       {"diagonal", corr_json(s.corr_diagonal)}}}};
    j["histogram"] = s.histogram;
    return j;
}

}  // namespace detail

inline std::string report_json(const AnalysisReport& rep) {
    nlohmann::json j;
    j["header"] = {{"tool", "hcme"},
                   {"ssim_window", kSsimWindow},
                   {"ssim_k1", kSsimK1},
                   {"ssim_k2", kSsimK2},
                   {"ssim_l", kSsimL},
                   {"correlation_samples", rep.correlation_samples},
                   {"correlation_rng_seed", rep.correlation_rng_seed}};
    j["a"] = detail::stats_json(rep.a);
    if (rep.b) {
        j["b"] = detail::stats_json(*rep.b);
        j["comparison"] = {{"npcr", *rep.npcr}, {"uaci", *rep.uaci}, {"ssim", *rep.ssim_value}};
        if (std::isinf(*rep.psnr_db))
            j["comparison"]["psnr"] = "inf";
        else
            j["comparison"]["psnr"] = *rep.psnr_db;
    }
    return j.dump(2) + "\n";
}

inline std::string report_csv(const AnalysisReport& rep) {
    auto corr = [](const std::optional<double>& v) {
        return v ? std::to_string(*v) : std::string("undefined");
    };
    std::string out = "image,rows,cols,entropy,chi_square,corr_h,corr_v,corr_d\n";
    auto row = [&](const ImageStats& s) {
        out += s.name + ',' + std::to_string(s.rows) + ',' + std::to_string(s.cols) + ',' +
               std::to_string(s.entropy) + ',' + std::to_string(s.chi_square) + ',' +
               corr(s.corr_horizontal) + ',' + corr(s.corr_vertical) + ',' +
               corr(s.corr_diagonal) + '\n';
    };
    row(rep.a);
    if (rep.b) row(*rep.b);
    return out;
}

/// 256-column bar chart of the histogram, tallest bin scaled to full height.
inline ByteImage histogram_image(const std::array<std::uint64_t, 256>& hist,
                                 std::size_t height = 128) {
    std::uint64_t peak = 1;
    for (auto c : hist) peak = std::max(peak, c);
    ByteImage img(height, 256, 255);
    for (std::size_t bin = 0; bin < 256; ++bin) {
        std::size_t bar = static_cast<std::size_t>((hist[bin] * height) / peak);
        for (std::size_t k = 0; k < bar; ++k) img.at(height - 1 - k, bin) = 0;
    }
    return img;
}

}  // namespace hcme
