#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "hcme/errors.hpp"

namespace hcme::detail {

// Little-endian scalar packing used by every on-disk structure.

template <typename T>
inline void put_le(std::vector<std::uint8_t>& out, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i)
        out.push_back(static_cast<std::uint8_t>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
}

template <typename T>
inline T get_le(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return static_cast<T>(v);
}

// Bounds-checked cursor over an input buffer.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> buf) : buf_(buf) {}

    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return buf_.size() - pos_; }

    template <typename T>
    T read_le() {
        require(sizeof(T));
        T v = get_le<T>(buf_.data() + pos_);
        pos_ += sizeof(T);
        return v;
    }

    std::span<const std::uint8_t> read_bytes(std::size_t n) {
        require(n);
        auto s = buf_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

    std::vector<std::uint8_t> read_vector(std::size_t n) {
        auto s = read_bytes(n);
        return {s.begin(), s.end()};
    }

private:
    void require(std::size_t n) const {
        if (n > remaining())
            throw LengthMismatch("declared length exceeds available bytes at offset " +
                                 std::to_string(pos_));
    }

    std::span<const std::uint8_t> buf_;
    std::size_t pos_ = 0;
};

inline int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

inline std::vector<std::uint8_t> parse_hex(std::string_view s) {
    if (s.size() % 2 != 0) throw Error("hex string has odd length");
    std::vector<std::uint8_t> out(s.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        int hi = hex_nibble(s[2 * i]), lo = hex_nibble(s[2 * i + 1]);
        if (hi < 0 || lo < 0) throw Error("invalid hex digit");
        out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
    }
    return out;
}

inline std::string to_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    s.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xf]);
    }
    return s;
}

}  // namespace hcme::detail
