#pragma once

// The five diffusion primitives and their exact inverses. All of them act on
// a ByteImage and return a new one; none resizes.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "hcme/errors.hpp"
#include "hcme/image.hpp"

namespace hcme {

enum class Direction { Forward, Inverse };

/// Keyed per-pixel stage: the byte is split into 8/k segments, each segment
/// XORed with the aligned segment of key byte ks[2i] (which composes to a
/// whole-byte XOR), then the byte is rotated left by ks[2i+1] mod 8 bits.
/// Two keystream bytes per pixel.
inline ByteImage segment_diffuse(const ByteImage& img, std::span<const std::uint8_t> ks,
                                 int segment_bits, Direction dir) {
    if (segment_bits != 2 && segment_bits != 4 && segment_bits != 8)
        throw InvalidSegmentWidth("segment width must be 2, 4 or 8 bits");
    if (ks.size() < 2 * img.pixel_count())
        throw KeystreamExhausted("segment diffusion needs 2 keystream bytes per pixel");
    ByteImage out = img;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        std::uint8_t key = ks[2 * i];
        int rot = ks[2 * i + 1] & 7;
        std::uint8_t v = out.data[i];
        if (dir == Direction::Forward) {
            v = std::rotl(static_cast<std::uint8_t>(v ^ key), rot);
        } else {
            v = std::rotr(v, rot) ^ key;
        }
        out.data[i] = v;
    }
    return out;
}

/// Row pass bottom-up (each row XORed with the already-updated row below),
/// then column pass right-to-left. The inverse reads ciphertext only:
/// columns first, then rows.
inline ByteImage adjacent_diffuse(const ByteImage& img, Direction dir) {
    ByteImage out = img;
    const std::size_t rows = out.rows, cols = out.cols;
    if (rows == 0 || cols == 0) return out;
    if (dir == Direction::Forward) {
        for (std::size_t i = rows - 1; i-- > 0;)
            for (std::size_t j = 0; j < cols; ++j) out.at(i, j) ^= out.at(i + 1, j);
        for (std::size_t j = cols - 1; j-- > 0;)
            for (std::size_t i = 0; i < rows; ++i) out.at(i, j) ^= out.at(i, j + 1);
    } else {
        // Ascending order leaves the neighbor untouched until it is consumed.
        for (std::size_t j = 0; j + 1 < cols; ++j)
            for (std::size_t i = 0; i < rows; ++i) out.at(i, j) ^= out.at(i, j + 1);
        for (std::size_t i = 0; i + 1 < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) out.at(i, j) ^= out.at(i + 1, j);
    }
    return out;
}

/// Chebyshev ring index of (i, j) around the center floor((n-1)/2).
inline std::size_t chebyshev_ring(std::size_t i, std::size_t j, std::size_t n) {
    std::size_t c = (n - 1) / 2;
    std::size_t di = i > c ? i - c : c - i;
    std::size_t dj = j > c ? j - c : c - j;
    return di > dj ? di : dj;
}

/// Parent of a non-center pixel: every coordinate sitting exactly on the ring
/// steps one unit toward the center, landing in the next inner ring.
inline std::pair<std::size_t, std::size_t> radial_parent(std::size_t i, std::size_t j,
                                                         std::size_t n) {
    std::size_t c = (n - 1) / 2;
    std::size_t ring = chebyshev_ring(i, j, n);
    std::size_t pi = i, pj = j;
    std::size_t di = i > c ? i - c : c - i;
    std::size_t dj = j > c ? j - c : c - j;
    if (di == ring) pi = i > c ? i - 1 : i + 1;
    if (dj == ring) pj = j > c ? j - 1 : j + 1;
    return {pi, pj};
}

/// Concentric diffusion from the center outward; one keystream byte per pixel
/// indexed by row-major position. Forward chains each pixel to its updated
/// parent; the inverse reads ciphertext only.
inline ByteImage radial_diffuse(const ByteImage& img, std::span<const std::uint8_t> ks,
                                Direction dir) {
    if (img.rows != img.cols) throw NotSquare("radial diffusion needs a square image");
    if (ks.size() < img.pixel_count())
        throw KeystreamExhausted("radial diffusion needs one keystream byte per pixel");
    const std::size_t n = img.rows;
    ByteImage out = img;
    if (n == 0) return out;
    const std::size_t c = (n - 1) / 2;
    if (dir == Direction::Inverse) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                std::uint8_t v = img.at(i, j) ^ ks[i * n + j];
                if (i != c || j != c) {
                    auto [pi, pj] = radial_parent(i, j, n);
                    v ^= img.at(pi, pj);
                }
                out.at(i, j) = v;
            }
        return out;
    }
    // Bucket pixels by ring so parents are complete before their children.
    std::size_t max_ring = 0;
    for (std::size_t corner : {chebyshev_ring(0, 0, n), chebyshev_ring(n - 1, n - 1, n)})
        max_ring = std::max(max_ring, corner);
    std::vector<std::vector<std::uint32_t>> rings(max_ring + 1);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            rings[chebyshev_ring(i, j, n)].push_back(static_cast<std::uint32_t>(i * n + j));
    for (std::size_t r = 0; r <= max_ring; ++r)
        for (std::uint32_t pos : rings[r]) {
            std::size_t i = pos / n, j = pos % n;
            std::uint8_t v = img.at(i, j) ^ ks[pos];
            if (r != 0) {
                auto [pi, pj] = radial_parent(i, j, n);
                v ^= out.at(pi, pj);
            }
            out.at(i, j) = v;
        }
    return out;
}

}  // namespace hcme
