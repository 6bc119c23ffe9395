#pragma once

// HCME container: the single on-disk artifact an encryption produces.
// Little-endian layout, CRC-32 of everything preceding it as the last four
// bytes. See docs/envelope_format.md for the field-by-field description.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hcme/detail/bytes.hpp"
#include "hcme/detail/crc32.hpp"
#include "hcme/errors.hpp"
#include "hcme/key_schedule.hpp"

namespace hcme {

inline constexpr std::uint16_t kEnvelopeVersion = 1;
inline constexpr std::uint8_t kFlagCaptcha = 0x01;
inline constexpr std::uint8_t kFlagPartialRoi = 0x02;

struct RoiBox {
    std::uint32_t z0 = 0, z1 = 0, y0 = 0, y1 = 0, x0 = 0, x1 = 0;
    bool operator==(const RoiBox&) const = default;
};

struct RoiEntry {
    RoiBox box;
    std::vector<std::uint8_t> block;  // encrypted padded sub-image
    bool operator==(const RoiEntry&) const = default;
};

struct Envelope {
    std::uint16_t version = kEnvelopeVersion;
    std::uint8_t kdf_id = kKdfIdSha256;
    std::uint8_t flags = 0;
    std::uint32_t original_rows = 0, original_cols = 0;  // pixel units, pre-padding
    std::uint32_t padded_dim = 0;                        // byte-matrix dimension
    std::uint8_t bits_allocated = 8;
    std::uint32_t slice_count = 0;
    Salt salt{};
    std::uint8_t captcha_len = 0;
    std::vector<RoiEntry> roi;
    std::vector<std::uint8_t> enc_metadata;
    std::vector<std::uint8_t> enc_captcha;
    std::vector<std::uint8_t> payload;

    bool captcha_present() const { return flags & kFlagCaptcha; }
    bool partial() const { return flags & kFlagPartialRoi; }

    bool operator==(const Envelope&) const = default;
};

inline std::vector<std::uint8_t> write_envelope(const Envelope& env) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), {'H', 'C', 'M', 'E'});
    detail::put_le<std::uint16_t>(out, env.version);
    out.push_back(env.kdf_id);
    out.push_back(env.flags);
    detail::put_le<std::uint32_t>(out, env.original_rows);
    detail::put_le<std::uint32_t>(out, env.original_cols);
    detail::put_le<std::uint32_t>(out, env.padded_dim);
    out.push_back(env.bits_allocated);
    detail::put_le<std::uint32_t>(out, env.slice_count);
    out.insert(out.end(), env.salt.bytes.begin(), env.salt.bytes.end());
    out.push_back(env.captcha_len);
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(env.roi.size()));
    for (const auto& entry : env.roi) {
        detail::put_le<std::uint32_t>(out, entry.box.z0);
        detail::put_le<std::uint32_t>(out, entry.box.z1);
        detail::put_le<std::uint32_t>(out, entry.box.y0);
        detail::put_le<std::uint32_t>(out, entry.box.y1);
        detail::put_le<std::uint32_t>(out, entry.box.x0);
        detail::put_le<std::uint32_t>(out, entry.box.x1);
        detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(entry.block.size()));
        out.insert(out.end(), entry.block.begin(), entry.block.end());
    }
    detail::put_le<std::uint64_t>(out, env.enc_metadata.size());
    out.insert(out.end(), env.enc_metadata.begin(), env.enc_metadata.end());
    detail::put_le<std::uint64_t>(out, env.enc_captcha.size());
    out.insert(out.end(), env.enc_captcha.begin(), env.enc_captcha.end());
    detail::put_le<std::uint64_t>(out, env.payload.size());
    out.insert(out.end(), env.payload.begin(), env.payload.end());
    detail::put_le<std::uint32_t>(out, detail::crc32(out));
    return out;
}

inline Envelope read_envelope(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || bytes[0] != 'H' || bytes[1] != 'C' || bytes[2] != 'M' ||
        bytes[3] != 'E')
        throw BadMagic("missing HCME magic");
    if (bytes.size() < 8) throw LengthMismatch("envelope shorter than its fixed header");
    std::uint32_t stored_crc = detail::get_le<std::uint32_t>(bytes.data() + bytes.size() - 4);
    if (detail::crc32(bytes.subspan(0, bytes.size() - 4)) != stored_crc)
        throw BadChecksum("envelope CRC-32 mismatch");
    detail::ByteReader r(bytes.subspan(4, bytes.size() - 8));
    Envelope env;
    env.version = r.read_le<std::uint16_t>();
    if (env.version != kEnvelopeVersion)
        throw UnsupportedVersion("envelope version " + std::to_string(env.version));
    env.kdf_id = r.read_le<std::uint8_t>();
    env.flags = r.read_le<std::uint8_t>();
    env.original_rows = r.read_le<std::uint32_t>();
    env.original_cols = r.read_le<std::uint32_t>();
    env.padded_dim = r.read_le<std::uint32_t>();
    env.bits_allocated = r.read_le<std::uint8_t>();
    env.slice_count = r.read_le<std::uint32_t>();
    auto salt = r.read_bytes(16);
    env.salt = Salt::from_bytes(salt);
    env.captcha_len = r.read_le<std::uint8_t>();
    std::uint32_t roi_count = r.read_le<std::uint32_t>();
    env.roi.reserve(roi_count);
    for (std::uint32_t i = 0; i < roi_count; ++i) {
        RoiEntry entry;
        entry.box.z0 = r.read_le<std::uint32_t>();
        entry.box.z1 = r.read_le<std::uint32_t>();
        entry.box.y0 = r.read_le<std::uint32_t>();
        entry.box.y1 = r.read_le<std::uint32_t>();
        entry.box.x0 = r.read_le<std::uint32_t>();
        entry.box.x1 = r.read_le<std::uint32_t>();
        std::uint32_t block_len = r.read_le<std::uint32_t>();
        entry.block = r.read_vector(block_len);
        env.roi.push_back(std::move(entry));
    }
    env.enc_metadata = r.read_vector(r.read_le<std::uint64_t>());
    env.enc_captcha = r.read_vector(r.read_le<std::uint64_t>());
    env.payload = r.read_vector(r.read_le<std::uint64_t>());
    if (r.remaining() != 0) throw LengthMismatch("trailing bytes after envelope payload");
    return env;
}

}  // namespace hcme
