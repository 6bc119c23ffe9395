#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hcme/errors.hpp"

namespace hcme {

// Row-major 8-bit matrix, the unit all permutation and diffusion acts on.
// original_rows/original_cols remember the pre-padding shape.
struct ByteImage {
    std::size_t rows = 0, cols = 0;
    std::size_t original_rows = 0, original_cols = 0;
    std::vector<std::uint8_t> data;

    ByteImage() = default;
    ByteImage(std::size_t r, std::size_t c, std::uint8_t fill = 0)
        : rows(r), cols(c), original_rows(r), original_cols(c), data(r * c, fill) {}

    std::uint8_t& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    std::uint8_t at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::size_t pixel_count() const { return rows * cols; }

    bool operator==(const ByteImage&) const = default;
};

inline std::size_t next_pow2(std::size_t v) {
    std::size_t n = 1;
    while (n < v) n <<= 1;
    return n;
}

inline bool is_pow2(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

}  // namespace hcme
