#pragma once

// Orchestration of one image: zero padding to a power-of-two square, chaotic
// row/column permutation, the diffusion stack, and the exact inverse chain.

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "hcme/diffusion.hpp"
#include "hcme/errors.hpp"
#include "hcme/image.hpp"
#include "hcme/key_schedule.hpp"

namespace hcme {

/// Zero-pads to the next power-of-two square, content at the top-left.
inline ByteImage pad(const ByteImage& img) {
    std::size_t n = next_pow2(std::max(img.rows, img.cols));
    if (n == 0) n = 1;
    ByteImage out(n, n, 0);
    out.original_rows = img.rows;
    out.original_cols = img.cols;
    for (std::size_t i = 0; i < img.rows; ++i)
        for (std::size_t j = 0; j < img.cols; ++j) out.at(i, j) = img.at(i, j);
    return out;
}

/// Top-left crop back to the recorded original shape.
inline ByteImage unpad(const ByteImage& img) {
    if (img.original_rows > img.rows || img.original_cols > img.cols)
        throw DimensionMismatch("original dimensions exceed padded dimensions");
    ByteImage out(img.original_rows, img.original_cols);
    for (std::size_t i = 0; i < out.rows; ++i)
        for (std::size_t j = 0; j < out.cols; ++j) out.at(i, j) = img.at(i, j);
    return out;
}

inline void validate_permutation(std::span<const std::uint32_t> perm, std::size_t n) {
    if (perm.size() != n) throw NotAPermutation("permutation length does not match dimension");
    std::vector<bool> seen(n, false);
    for (std::uint32_t v : perm) {
        if (v >= n || seen[v]) throw NotAPermutation("indices are not a bijection on 0..n-1");
        seen[v] = true;
    }
}

inline std::vector<std::uint32_t> invert_permutation(std::span<const std::uint32_t> perm) {
    std::vector<std::uint32_t> inv(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = static_cast<std::uint32_t>(i);
    return inv;
}

/// Forward: out_row[i] = in_row[perm_rows[i]], then columns likewise.
/// Inverse applies the inverse permutations in reverse order.
inline ByteImage permute_image(const ByteImage& img, std::span<const std::uint32_t> perm_rows,
                               std::span<const std::uint32_t> perm_cols, Direction dir) {
    validate_permutation(perm_rows, img.rows);
    validate_permutation(perm_cols, img.cols);
    std::vector<std::uint32_t> inv_r, inv_c;
    std::span<const std::uint32_t> pr = perm_rows, pc = perm_cols;
    if (dir == Direction::Inverse) {
        inv_r = invert_permutation(perm_rows);
        inv_c = invert_permutation(perm_cols);
        pr = inv_r;
        pc = inv_c;
    }
    ByteImage out = img;
    for (std::size_t i = 0; i < img.rows; ++i)
        for (std::size_t j = 0; j < img.cols; ++j) out.at(i, j) = img.at(pr[i], pc[j]);
    return out;
}

/// Element-wise XOR; self-inverse.
inline ByteImage superimpose(const ByteImage& a, const ByteImage& b) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw DimensionMismatch("superimpose needs equal dimensions");
    ByteImage out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] ^= b.data[i];
    return out;
}

namespace detail {

// One z-keystream covers the whole stack: three segment stages at two bytes
// per pixel plus one byte per pixel for the radial stage, in distinct
// non-overlapping windows.
inline constexpr std::size_t kStreamBytesPerPixel = 7;

struct StageStreams {
    Keystream z;
    std::size_t n2;

    std::span<const std::uint8_t> segment(int stage) const {
        return z.window(static_cast<std::size_t>(stage) * 2 * n2, 2 * n2);
    }
    std::span<const std::uint8_t> radial() const { return z.window(6 * n2, n2); }
};

inline StageStreams make_streams(const KeySet& keys, const MapParams& params, std::size_t n) {
    StageStreams s{keystream_bytes(keys.seed_z, params, kStreamBytesPerPixel * n * n,
                                   keys.transient, "stream-z"),
                   n * n};
    return s;
}

}  // namespace detail

/// pad -> permute -> segment k=2 -> k=4 -> k=8 -> adjacent -> radial.
inline ByteImage encrypt_image(const ByteImage& plain, const KeySet& keys,
                               const MapParams& params = MapParams::canonical()) {
    ByteImage img = pad(plain);
    const std::size_t n = img.rows;
    auto perm_rows = permutation_from_sequence(keys.seed_x, params, n, keys.transient);
    auto perm_cols = permutation_from_sequence(keys.seed_y, params, n, keys.transient);
    img = permute_image(img, perm_rows, perm_cols, Direction::Forward);
    auto streams = detail::make_streams(keys, params, n);
    img = segment_diffuse(img, streams.segment(0), 2, Direction::Forward);
    img = segment_diffuse(img, streams.segment(1), 4, Direction::Forward);
    img = segment_diffuse(img, streams.segment(2), 8, Direction::Forward);
    img = adjacent_diffuse(img, Direction::Forward);
    img = radial_diffuse(img, streams.radial(), Direction::Forward);
    return img;
}

/// Exact inverse chain; expects original dimensions recorded on the input.
inline ByteImage decrypt_image(const ByteImage& cipher, const KeySet& keys,
                               const MapParams& params = MapParams::canonical()) {
    if (cipher.rows != cipher.cols || !is_pow2(cipher.rows))
        throw DimensionMismatch("ciphertext must be a power-of-two square");
    if (cipher.data.size() != cipher.pixel_count())
        throw DimensionMismatch("ciphertext byte count does not match its dimensions");
    const std::size_t n = cipher.rows;
    auto streams = detail::make_streams(keys, params, n);
    ByteImage img = radial_diffuse(cipher, streams.radial(), Direction::Inverse);
    img = adjacent_diffuse(img, Direction::Inverse);
    img = segment_diffuse(img, streams.segment(2), 8, Direction::Inverse);
    img = segment_diffuse(img, streams.segment(1), 4, Direction::Inverse);
    img = segment_diffuse(img, streams.segment(0), 2, Direction::Inverse);
    auto perm_rows = permutation_from_sequence(keys.seed_x, params, n, keys.transient);
    auto perm_cols = permutation_from_sequence(keys.seed_y, params, n, keys.transient);
    img = permute_image(img, perm_rows, perm_cols, Direction::Inverse);
    img.original_rows = cipher.original_rows;
    img.original_cols = cipher.original_cols;
    return unpad(img);
}

}  // namespace hcme
