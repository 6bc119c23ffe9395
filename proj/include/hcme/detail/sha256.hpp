#pragma once

// Compact SHA-256 (FIPS 180-4). Self-contained so the key schedule carries no
// link-time dependency; checked against the standard test vectors in the suite.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <span>

namespace hcme::detail {

class Sha256 {
public:
    using Digest = std::array<std::uint8_t, 32>;

    Sha256() { reset(); }

    void reset() {
        state_ = {0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u, 0xa54ff53au,
                  0x510e527fu, 0x9b05688cu, 0x1f83d9abu, 0x5be0cd19u};
        total_ = 0;
        buffered_ = 0;
    }

    void update(std::span<const std::uint8_t> data) {
        total_ += data.size();
        for (std::uint8_t b : data) {
            buffer_[buffered_++] = b;
            if (buffered_ == 64) {
                process(buffer_.data());
                buffered_ = 0;
            }
        }
    }

    Digest finish() {
        std::uint64_t bit_len = total_ * 8;
        const std::uint8_t pad = 0x80;
        update({&pad, 1});
        const std::uint8_t zero = 0;
        while (buffered_ != 56) update({&zero, 1});
        std::array<std::uint8_t, 8> len{};
        for (int i = 0; i < 8; ++i) len[i] = static_cast<std::uint8_t>(bit_len >> (56 - 8 * i));
        update(len);
        Digest d;
        for (int i = 0; i < 8; ++i) {
            d[4 * i + 0] = static_cast<std::uint8_t>(state_[i] >> 24);
            d[4 * i + 1] = static_cast<std::uint8_t>(state_[i] >> 16);
            d[4 * i + 2] = static_cast<std::uint8_t>(state_[i] >> 8);
            d[4 * i + 3] = static_cast<std::uint8_t>(state_[i]);
        }
        return d;
    }

    static Digest hash(std::span<const std::uint8_t> data) {
        Sha256 h;
        h.update(data);
        return h.finish();
    }

private:
    static constexpr std::array<std::uint32_t, 64> k_ = {
        0x428a2f98u, 0x71374491u, 0xb5c0fbcfu, 0xe9b5dba5u, 0x3956c25bu, 0x59f111f1u,
        0x923f82a4u, 0xab1c5ed5u, 0xd807aa98u, 0x12835b01u, 0x243185beu, 0x550c7dc3u,
        0x72be5d74u, 0x80deb1feu, 0x9bdc06a7u, 0xc19bf174u, 0xe49b69c1u, 0xefbe4786u,
        0x0fc19dc6u, 0x240ca1ccu, 0x2de92c6fu, 0x4a7484aau, 0x5cb0a9dcu, 0x76f988dau,
        0x983e5152u, 0xa831c66du, 0xb00327c8u, 0xbf597fc7u, 0xc6e00bf3u, 0xd5a79147u,
        0x06ca6351u, 0x14292967u, 0x27b70a85u, 0x2e1b2138u, 0x4d2c6dfcu, 0x53380d13u,
        0x650a7354u, 0x766a0abbu, 0x81c2c92eu, 0x92722c85u, 0xa2bfe8a1u, 0xa81a664bu,
        0xc24b8b70u, 0xc76c51a3u, 0xd192e819u, 0xd6990624u, 0xf40e3585u, 0x106aa070u,
        0x19a4c116u, 0x1e376c08u, 0x2748774cu, 0x34b0bcb5u, 0x391c0cb3u, 0x4ed8aa4au,
        0x5b9cca4fu, 0x682e6ff3u, 0x748f82eeu, 0x78a5636fu, 0x84c87814u, 0x8cc70208u,
        0x90befffau, 0xa4506cebu, 0xbef9a3f7u, 0xc67178f2u};

    void process(const std::uint8_t* p) {
        std::uint32_t w[64];
        for (int i = 0; i < 16; ++i)
            w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
                   (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
        for (int i = 16; i < 64; ++i) {
            std::uint32_t s0 = std::rotr(w[i - 15], 7) ^ std::rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            std::uint32_t s1 = std::rotr(w[i - 2], 17) ^ std::rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }
        auto [a, b, c, d, e, f, g, h] = std::tuple{state_[0], state_[1], state_[2], state_[3],
                                                   state_[4], state_[5], state_[6], state_[7]};
        for (int i = 0; i < 64; ++i) {
            std::uint32_t s1 = std::rotr(e, 6) ^ std::rotr(e, 11) ^ std::rotr(e, 25);
            std::uint32_t ch = (e & f) ^ (~e & g);
            std::uint32_t t1 = h + s1 + ch + k_[i] + w[i];
            std::uint32_t s0 = std::rotr(a, 2) ^ std::rotr(a, 13) ^ std::rotr(a, 22);
            std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            std::uint32_t t2 = s0 + maj;
            h = g; g = f; f = e; e = d + t1;
            d = c; c = b; b = a; a = t1 + t2;
        }
        state_[0] += a; state_[1] += b; state_[2] += c; state_[3] += d;
        state_[4] += e; state_[5] += f; state_[6] += g; state_[7] += h;
    }

    std::array<std::uint32_t, 8> state_;
    std::array<std::uint8_t, 64> buffer_;
    std::uint64_t total_ = 0;
    std::size_t buffered_ = 0;
};

}  // namespace hcme::detail
