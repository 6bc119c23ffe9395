#pragma once

// CRC-32 (IEEE 802.3, reflected 0xEDB88320), the variant zlib uses.

#include <array>
#include <cstdint>
#include <span>

namespace hcme::detail {

inline const std::array<std::uint32_t, 256>& crc32_table() {
    static const std::array<std::uint32_t, 256> table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int j = 0; j < 8; ++j)
                c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : (c >> 1);
            t[i] = c;
        }
        return t;
    }();
    return table;
}

inline std::uint32_t crc32(std::span<const std::uint8_t> data, std::uint32_t seed = 0) {
    const auto& t = crc32_table();
    std::uint32_t c = seed ^ 0xFFFFFFFFu;
    for (std::uint8_t b : data) c = t[(c ^ b) & 0xff] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

}  // namespace hcme::detail
