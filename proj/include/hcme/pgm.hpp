#pragma once

// Binary PGM (P5) reader/writer used as the non-DICOM fallback, plus a P6
// writer for RGB previews. Maxval is fixed at 255.

#include <cctype>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hcme/errors.hpp"
#include "hcme/image.hpp"

namespace hcme {

namespace detail {

class PnmHeaderReader {
public:
    explicit PnmHeaderReader(std::span<const std::uint8_t> buf) : buf_(buf) {}

    std::string magic() {
        if (buf_.size() < 2) throw MalformedHeader("truncated header");
        pos_ = 2;
        return {static_cast<char>(buf_[0]), static_cast<char>(buf_[1])};
    }

    // Next whitespace-delimited integer token; '#' starts a comment line.
    std::size_t next_int() {
        skip_space_and_comments();
        if (pos_ >= buf_.size() || !std::isdigit(buf_[pos_]))
            throw MalformedHeader("expected integer field");
        std::size_t v = 0;
        while (pos_ < buf_.size() && std::isdigit(buf_[pos_])) {
            v = v * 10 + (buf_[pos_] - '0');
            if (v > 1000000000) throw MalformedHeader("header field out of range");
            ++pos_;
        }
        return v;
    }

    std::span<const std::uint8_t> raster() {
        if (pos_ >= buf_.size() || !std::isspace(buf_[pos_]))
            throw MalformedHeader("missing raster separator");
        ++pos_;  // exactly one whitespace byte before the raster
        return buf_.subspan(pos_);
    }

private:
    void skip_space_and_comments() {
        while (pos_ < buf_.size()) {
            if (std::isspace(buf_[pos_])) {
                ++pos_;
            } else if (buf_[pos_] == '#') {
                while (pos_ < buf_.size() && buf_[pos_] != '\n') ++pos_;
            } else {
                return;
            }
        }
    }

    std::span<const std::uint8_t> buf_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline ByteImage read_pgm(std::span<const std::uint8_t> bytes) {
    detail::PnmHeaderReader hdr(bytes);
    if (hdr.magic() != "P5") throw MalformedHeader("not a binary PGM (P5) stream");
    std::size_t cols = hdr.next_int();
    std::size_t rows = hdr.next_int();
    std::size_t maxval = hdr.next_int();
    if (maxval != 255) throw UnsupportedMaxval("only maxval 255 is supported");
    if (rows == 0 || cols == 0) throw MalformedHeader("zero dimension");
    auto raster = hdr.raster();
    if (raster.size() != rows * cols) throw MalformedHeader("raster size does not match header");
    ByteImage img(rows, cols);
    img.data.assign(raster.begin(), raster.end());
    return img;
}

inline std::vector<std::uint8_t> write_pgm(const ByteImage& img) {
    std::string header = "P5\n" + std::to_string(img.cols) + " " + std::to_string(img.rows) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.data.begin(), img.data.end());
    return out;
}

inline std::vector<std::uint8_t> write_ppm(const ByteImage& r, const ByteImage& g,
                                           const ByteImage& b) {
    if (r.rows != g.rows || r.rows != b.rows || r.cols != g.cols || r.cols != b.cols)
        throw DimensionMismatch("RGB planes must share dimensions");
    std::string header = "P6\n" + std::to_string(r.cols) + " " + std::to_string(r.rows) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + 3 * r.data.size());
    for (std::size_t i = 0; i < r.data.size(); ++i) {
        out.push_back(r.data[i]);
        out.push_back(g.data[i]);
        out.push_back(b.data[i]);
    }
    return out;
}

}  // namespace hcme
