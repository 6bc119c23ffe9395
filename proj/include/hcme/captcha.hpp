#pragma once

// Deterministic captcha generation. The renderer is integer-only (fixed-point
// rotation, Bresenham lines, SplitMix64 draws) so a seed reproduces the exact
// same plane on any platform — decryption depends on that.

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hcme/detail/font8x8.hpp"
#include "hcme/detail/splitmix64.hpp"
#include "hcme/errors.hpp"
#include "hcme/image.hpp"
#include "hcme/pgm.hpp"

namespace hcme {

inline constexpr std::size_t kCaptchaChars = 6;
inline constexpr std::size_t kMinCaptchaDim = 64;
inline constexpr int kDefaultMaxAttempts = 3;

struct CaptchaChallenge {
    std::string answer;
    ByteImage plane;
    std::uint64_t seed = 0;
};

namespace detail {

struct GlyphBox {
    std::size_t x0 = 0, y0 = 0, size = 0;  // box is size x size, fully inside the plane
};

// Q15 sine/cosine for integer degrees 0..15.
inline constexpr std::int32_t kSinQ15[16] = {0,    572,  1144, 1715, 2286, 2856, 3425, 3993,
                                             4560, 5126, 5690, 6252, 6813, 7371, 7927, 8481};
inline constexpr std::int32_t kCosQ15[16] = {32768, 32763, 32748, 32723, 32688, 32643,
                                             32588, 32524, 32449, 32365, 32270, 32166,
                                             32052, 31928, 31795, 31651};

struct CaptchaLayout {
    std::vector<GlyphBox> boxes;
    std::vector<int> angles_deg;  // in [-15, 15]
    std::string answer;
};

// Fixed draw order: 6 characters, then per glyph (angle, jitter), then noise.
// The consumption order is part of the format; reordering breaks decryption
// of existing envelopes.
inline CaptchaLayout captcha_layout(SplitMix64& rng, std::size_t dim) {
    CaptchaLayout layout;
    for (std::size_t i = 0; i < kCaptchaChars; ++i)
        layout.answer.push_back(kCaptchaCharset[rng.below(kCaptchaCharsetSize)]);
    const std::size_t scale = dim / 10;
    const std::size_t slot = dim / kCaptchaChars;
    // Room for a +-15 degree rotation, but never wider than the slot.
    const std::size_t box = std::min(scale + (scale / 2) + 2, slot);
    const std::size_t base_y = (dim - box) / 2;
    const std::int64_t jitter_range = static_cast<std::int64_t>(dim / 20);
    for (std::size_t i = 0; i < kCaptchaChars; ++i) {
        GlyphBox gb;
        gb.size = box;
        gb.x0 = i * slot + (slot - box) / 2;
        int angle = static_cast<int>(rng.range(-15, 15));
        std::int64_t jitter = rng.range(-jitter_range, jitter_range);
        gb.y0 = static_cast<std::size_t>(static_cast<std::int64_t>(base_y) + jitter);
        layout.boxes.push_back(gb);
        layout.angles_deg.push_back(angle);
    }
    return layout;
}

inline void draw_glyph(ByteImage& plane, const GlyphBox& gb, int angle_deg, int glyph,
                       std::size_t scale, std::uint8_t fg) {
    const std::int32_t cosv = kCosQ15[angle_deg < 0 ? -angle_deg : angle_deg];
    const std::int32_t sinv = angle_deg < 0 ? -kSinQ15[-angle_deg] : kSinQ15[angle_deg];
    const std::int64_t box = static_cast<std::int64_t>(gb.size);
    const std::int64_t half = box / 2;
    const std::int64_t glyph_px = static_cast<std::int64_t>(scale);
    const std::int64_t g0 = half - glyph_px / 2;
    for (std::int64_t v = 0; v < box; ++v) {
        for (std::int64_t u = 0; u < box; ++u) {
            // inverse-rotate the target pixel around the box center
            std::int64_t du = u - half, dv = v - half;
            std::int64_t su = (cosv * du + sinv * dv) >> 15;
            std::int64_t sv = (-sinv * du + cosv * dv) >> 15;
            std::int64_t gx = su + half - g0, gy = sv + half - g0;
            if (gx < 0 || gy < 0 || gx >= glyph_px || gy >= glyph_px) continue;
            int fx = static_cast<int>(gx * 8 / glyph_px);
            int fy = static_cast<int>(gy * 8 / glyph_px);
            if (glyph_bit(glyph, fy, fx))
                plane.at(gb.y0 + static_cast<std::size_t>(v), gb.x0 + static_cast<std::size_t>(u)) = fg;
        }
    }
}

inline void draw_line(ByteImage& plane, std::int64_t x0, std::int64_t y0, std::int64_t x1,
                      std::int64_t y1, std::uint8_t value) {
    std::int64_t dx = x1 > x0 ? x1 - x0 : x0 - x1;
    std::int64_t dy = y1 > y0 ? y1 - y0 : y0 - y1;
    std::int64_t sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    std::int64_t err = dx - dy;
    for (;;) {
        plane.at(static_cast<std::size_t>(y0), static_cast<std::size_t>(x0)) = value;
        if (x0 == x1 && y0 == y1) break;
        std::int64_t e2 = 2 * err;
        if (e2 > -dy) { err -= dy; x0 += sx; }
        if (e2 < dx) { err += dx; y0 += sy; }
    }
}

}  // namespace hcme::detail

/// Renders the 6-character challenge plane: gradient background (40..120),
/// rotated/jittered glyphs, N^2/200 noise dots and 4 lines.
inline CaptchaChallenge generate_captcha(std::uint64_t seed, std::size_t dim) {
    if (dim < kMinCaptchaDim)
        throw DimensionTooSmall("captcha plane must be at least 64x64");
    detail::SplitMix64 rng(seed);
    detail::CaptchaLayout layout = detail::captcha_layout(rng, dim);

    CaptchaChallenge ch;
    ch.seed = seed;
    ch.answer = layout.answer;
    ch.plane = ByteImage(dim, dim);
    for (std::size_t j = 0; j < dim; ++j) {
        auto bg = static_cast<std::uint8_t>(40 + (80 * j) / (dim - 1));
        for (std::size_t i = 0; i < dim; ++i) ch.plane.at(i, j) = bg;
    }
    for (std::size_t i = 0; i < kCaptchaChars; ++i) {
        int glyph = 0;
        for (int g = 0; g < detail::kCaptchaCharsetSize; ++g)
            if (detail::kCaptchaCharset[g] == layout.answer[i]) glyph = g;
        detail::draw_glyph(ch.plane, layout.boxes[i], layout.angles_deg[i], glyph, dim / 10, 235);
    }
    const std::size_t dots = dim * dim / 200;
    for (std::size_t d = 0; d < dots; ++d) {
        std::size_t r = rng.below(dim), c = rng.below(dim);
        ch.plane.at(r, c) = static_cast<std::uint8_t>(rng.below(256));
    }
    for (int l = 0; l < 4; ++l) {
        auto x0 = static_cast<std::int64_t>(rng.below(dim));
        auto y0 = static_cast<std::int64_t>(rng.below(dim));
        auto x1 = static_cast<std::int64_t>(rng.below(dim));
        auto y1 = static_cast<std::int64_t>(rng.below(dim));
        detail::draw_line(ch.plane, x0, y0, x1, y1, static_cast<std::uint8_t>(rng.below(256)));
    }
    return ch;
}

enum class CaptchaVerdict { Accept, Retry, Reject };

/// Case-sensitive exact match; mismatches retry until attempts run out.
inline CaptchaVerdict verify_captcha(std::string_view expected, std::string_view typed,
                                     int attempt, int max_attempts = kDefaultMaxAttempts) {
    if (typed == expected) return CaptchaVerdict::Accept;
    return attempt < max_attempts ? CaptchaVerdict::Retry : CaptchaVerdict::Reject;
}

/// RGB preview of the grayscale plane; plays no role in encryption.
inline std::vector<std::uint8_t> captcha_preview_ppm(const CaptchaChallenge& ch) {
    ByteImage r = ch.plane, g = ch.plane, b = ch.plane;
    for (std::size_t i = 0; i < ch.plane.data.size(); ++i) {
        std::uint8_t v = ch.plane.data[i];
        r.data[i] = static_cast<std::uint8_t>(40 + (v * 170) / 255);
        g.data[i] = static_cast<std::uint8_t>(30 + (v * 120) / 255);
        b.data[i] = static_cast<std::uint8_t>(255 - v / 2);
    }
    return write_ppm(r, g, b);
}

}  // namespace hcme
