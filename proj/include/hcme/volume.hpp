#pragma once

// Slice stacks: series loading, whole-model and partial-ROI encryption, and
// decryption with the captcha gate. Slices are processed with independent
// per-slice key sets (context "slice-<index>"), so they can run in parallel
// and identical plaintext slices never share a keystream.

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hcme/captcha.hpp"
#include "hcme/dicom.hpp"
#include "hcme/envelope.hpp"
#include "hcme/detail/parallel.hpp"
#include "hcme/image.hpp"
#include "hcme/pipeline.hpp"

namespace hcme {

struct Volume {
    std::vector<ByteImage> slices;     // byte matrices: rows x (cols * bytes-per-pixel)
    std::vector<DicomObject> sources;  // empty (raw), one (single file) or one per slice
    std::size_t bits_allocated = 8;
    std::size_t pixel_rows = 0, pixel_cols = 0;
    std::array<double, 3> spacing{1.0, 1.0, 1.0};  // row, col, slice (mm)
    bool spacing_from_tags = false;

    std::size_t byte_cols() const { return pixel_cols * (bits_allocated / 8); }
};

inline Volume volume_from_dicom(DicomObject obj) {
    Volume vol;
    vol.bits_allocated = obj.bits_allocated;
    vol.pixel_rows = obj.rows;
    vol.pixel_cols = obj.cols;
    auto pixels = obj.pixel_data();
    const std::size_t frame = obj.frame_bytes();
    for (std::size_t f = 0; f < obj.frames; ++f) {
        ByteImage img(obj.rows, obj.cols * (obj.bits_allocated / 8));
        img.data.assign(pixels.begin() + static_cast<std::ptrdiff_t>(f * frame),
                        pixels.begin() + static_cast<std::ptrdiff_t>((f + 1) * frame));
        vol.slices.push_back(std::move(img));
    }
    vol.sources.push_back(std::move(obj));
    return vol;
}

inline Volume volume_from_image(ByteImage img) {
    Volume vol;
    vol.bits_allocated = 8;
    vol.pixel_rows = img.rows;
    vol.pixel_cols = img.cols;
    vol.slices.push_back(std::move(img));
    return vol;
}

namespace detail {

inline bool parse_long(const std::string& s, long& out) {
    try {
        std::size_t used = 0;
        out = std::stol(s, &used);
        while (used < s.size() && s[used] == ' ') ++used;
        return used == s.size() && !s.empty();
    } catch (...) {
        return false;
    }
}

inline bool parse_double(const std::string& s, double& out) {
    try {
        std::size_t used = 0;
        out = std::stod(s, &used);
        while (used < s.size() && s[used] == ' ') ++used;
        return used == s.size() && !s.empty();
    } catch (...) {
        return false;
    }
}

}  // namespace detail

/// Orders parsed slice files by Instance Number, falling back to Slice
/// Location when any instance number is missing.
inline Volume load_series(std::vector<DicomObject> files) {
    if (files.empty()) throw InconsistentSeries("series is empty");
    for (std::size_t i = 1; i < files.size(); ++i) {
        if (files[i].rows != files[0].rows || files[i].cols != files[0].cols ||
            files[i].bits_allocated != files[0].bits_allocated)
            throw InconsistentSeries("slice dimensions or bit depth differ across the series");
        if (files[i].frames != 1 || files[0].frames != 1)
            throw InconsistentSeries("multi-frame files cannot be mixed into a slice series");
    }

    std::vector<std::pair<double, std::size_t>> order;
    bool use_instance = true;
    for (std::size_t i = 0; i < files.size(); ++i) {
        long inst = 0;
        if (!detail::parse_long(files[i].string_value(kTagInstanceNumber), inst)) {
            use_instance = false;
            break;
        }
        order.emplace_back(static_cast<double>(inst), i);
    }
    if (!use_instance) {
        order.clear();
        for (std::size_t i = 0; i < files.size(); ++i) {
            double loc = 0;
            if (!detail::parse_double(files[i].string_value(kTagSliceLocation), loc))
                throw InconsistentSeries("no usable Instance Number or Slice Location order key");
            order.emplace_back(loc, i);
        }
    }
    std::sort(order.begin(), order.end());
    for (std::size_t i = 1; i < order.size(); ++i)
        if (order[i].first == order[i - 1].first)
            throw DuplicateOrderKey("two slices share the same order key");

    Volume vol;
    vol.bits_allocated = files[0].bits_allocated;
    vol.pixel_rows = files[0].rows;
    vol.pixel_cols = files[0].cols;

    std::string ps = files[0].string_value(kTagPixelSpacing);
    std::string st = files[0].string_value(kTagSliceThickness);
    bool have_ps = false, have_st = false;
    if (auto sep = ps.find('\\'); sep != std::string::npos) {
        double r = 0, c = 0;
        if (detail::parse_double(ps.substr(0, sep), r) &&
            detail::parse_double(ps.substr(sep + 1), c)) {
            vol.spacing[0] = r;
            vol.spacing[1] = c;
            have_ps = true;
        }
    }
    if (double t = 0; detail::parse_double(st, t)) {
        vol.spacing[2] = t;
        have_st = true;
    }
    vol.spacing_from_tags = have_ps && have_st;

    for (auto& [key, idx] : order) {
        (void)key;
        Volume one = volume_from_dicom(std::move(files[idx]));
        vol.slices.push_back(std::move(one.slices[0]));
        vol.sources.push_back(std::move(one.sources[0]));
    }
    return vol;
}

struct EncryptOptions {
    bool captcha = true;
    int jobs = 0;
};

using CaptchaProvider = std::function<std::string(const CaptchaChallenge&, int attempt)>;

namespace detail {

inline std::string slice_context(std::size_t index) {
    return "slice-" + std::to_string(index);
}

inline std::vector<std::uint8_t> metadata_container(const Volume& vol) {
    std::vector<std::uint8_t> out;
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(vol.sources.size()));
    for (const auto& src : vol.sources) {
        auto blob = serialize_metadata(src);
        put_le<std::uint64_t>(out, blob.size());
        out.insert(out.end(), blob.begin(), blob.end());
    }
    return out;
}

inline void xor_with_stream(std::vector<std::uint8_t>& data, const ChaosState& seed,
                            const MapParams& params, std::size_t transient) {
    if (data.empty()) return;
    Keystream ks = keystream_bytes(seed, params, data.size(), transient, "meta");
    for (std::size_t i = 0; i < data.size(); ++i) data[i] ^= ks.bytes[i];
}

struct CaptchaPlanes {
    bool enabled = false;
    CaptchaChallenge challenge;
    ByteImage encrypted;
};

inline CaptchaPlanes prepare_captcha(const MasterKey& key, const Salt& salt,
                                     std::uint64_t captcha_seed, std::size_t dim, bool requested,
                                     const MapParams& params) {
    CaptchaPlanes cp;
    if (!requested || dim < kMinCaptchaDim) return cp;
    cp.enabled = true;
    cp.challenge = generate_captcha(captcha_seed, dim);
    cp.encrypted = encrypt_image(cp.challenge.plane, derive_keyset(key, salt, "captcha"), params);
    return cp;
}

inline void validate_roi(const RoiBox& roi, const Volume& vol) {
    bool ok = roi.z0 < roi.z1 && roi.y0 < roi.y1 && roi.x0 < roi.x1 &&
              roi.z1 <= vol.slices.size() && roi.y1 <= vol.pixel_rows &&
              roi.x1 <= vol.pixel_cols;
    if (!ok) throw RoiOutOfBounds("ROI box does not fit inside the volume");
}

}  // namespace detail

/// Encrypts every slice through the full pipeline; the captcha plane is
/// superimposed on slice 0 only.
inline Envelope encrypt_volume_whole(const Volume& vol, const MasterKey& key, const Salt& salt,
                                     const EncryptOptions& opts = {},
                                     const MapParams& params = MapParams::canonical()) {
    if (vol.slices.empty()) throw Error("cannot encrypt an empty volume");
    const std::size_t n = next_pow2(std::max(vol.pixel_rows, vol.byte_cols()));
    KeySet base = derive_keyset(key, salt);

    Envelope env;
    env.original_rows = static_cast<std::uint32_t>(vol.pixel_rows);
    env.original_cols = static_cast<std::uint32_t>(vol.pixel_cols);
    env.padded_dim = static_cast<std::uint32_t>(n);
    env.bits_allocated = static_cast<std::uint8_t>(vol.bits_allocated);
    env.slice_count = static_cast<std::uint32_t>(vol.slices.size());
    env.salt = salt;

    auto cp = detail::prepare_captcha(key, salt, base.captcha_seed, n, opts.captcha, params);
    if (cp.enabled) {
        env.flags |= kFlagCaptcha;
        env.captcha_len = static_cast<std::uint8_t>(cp.challenge.answer.size());
        env.enc_captcha = cp.encrypted.data;
    }

    std::vector<ByteImage> ciphers(vol.slices.size());
    detail::parallel_for(vol.slices.size(), opts.jobs, [&](std::size_t i) {
        KeySet ks = derive_keyset(key, salt, detail::slice_context(i));
        ciphers[i] = encrypt_image(vol.slices[i], ks, params);
    });
    if (cp.enabled) ciphers[0] = superimpose(ciphers[0], cp.encrypted);

    env.payload.reserve(vol.slices.size() * n * n);
    for (const auto& c : ciphers) env.payload.insert(env.payload.end(), c.data.begin(), c.data.end());

    env.enc_metadata = detail::metadata_container(vol);
    detail::xor_with_stream(env.enc_metadata, base.meta_seed, params, base.transient);
    return env;
}

/// Encrypts only the ROI sub-images; voxels outside the box stay plain. The
/// carrier keeps a cosmetic crop of each ciphertext over the box so the
/// region reads as occluded in a viewer; decryption uses the stored blocks.
inline Envelope encrypt_volume_partial(const Volume& vol, const RoiBox& roi, const MasterKey& key,
                                       const Salt& salt, const EncryptOptions& opts = {},
                                       const MapParams& params = MapParams::canonical()) {
    if (vol.slices.empty()) throw Error("cannot encrypt an empty volume");
    detail::validate_roi(roi, vol);
    const std::size_t bpp = vol.bits_allocated / 8;
    const std::size_t sub_rows = roi.y1 - roi.y0;
    const std::size_t sub_cols = (roi.x1 - roi.x0) * bpp;
    const std::size_t bx0 = roi.x0 * bpp;
    const std::size_t n = next_pow2(std::max(sub_rows, sub_cols));
    KeySet base = derive_keyset(key, salt);

    Envelope env;
    env.flags |= kFlagPartialRoi;
    env.original_rows = static_cast<std::uint32_t>(vol.pixel_rows);
    env.original_cols = static_cast<std::uint32_t>(vol.pixel_cols);
    env.padded_dim = static_cast<std::uint32_t>(n);
    env.bits_allocated = static_cast<std::uint8_t>(vol.bits_allocated);
    env.slice_count = static_cast<std::uint32_t>(vol.slices.size());
    env.salt = salt;

    auto cp = detail::prepare_captcha(key, salt, base.captcha_seed, n, opts.captcha, params);
    if (cp.enabled) {
        env.flags |= kFlagCaptcha;
        env.captcha_len = static_cast<std::uint8_t>(cp.challenge.answer.size());
        env.enc_captcha = cp.encrypted.data;
    }

    std::vector<ByteImage> carrier = vol.slices;
    env.roi.resize(roi.z1 - roi.z0);
    detail::parallel_for(roi.z1 - roi.z0, opts.jobs, [&](std::size_t k) {
        std::size_t z = roi.z0 + k;
        ByteImage sub(sub_rows, sub_cols);
        for (std::size_t i = 0; i < sub_rows; ++i)
            for (std::size_t j = 0; j < sub_cols; ++j)
                sub.at(i, j) = vol.slices[z].at(roi.y0 + i, bx0 + j);
        KeySet ks = derive_keyset(key, salt, detail::slice_context(z));
        ByteImage enc = encrypt_image(sub, ks, params);
        if (cp.enabled && z == roi.z0) enc = superimpose(enc, cp.encrypted);
        for (std::size_t i = 0; i < sub_rows; ++i)
            for (std::size_t j = 0; j < sub_cols; ++j)
                carrier[z].at(roi.y0 + i, bx0 + j) = enc.at(i, j);
        RoiEntry entry;
        entry.box = {static_cast<std::uint32_t>(z), static_cast<std::uint32_t>(z + 1),
                     roi.y0, roi.y1, roi.x0, roi.x1};
        entry.block = std::move(enc.data);
        env.roi[k] = std::move(entry);
    });

    env.payload.reserve(vol.slices.size() * vol.pixel_rows * vol.byte_cols());
    for (const auto& s : carrier) env.payload.insert(env.payload.end(), s.data.begin(), s.data.end());

    env.enc_metadata = detail::metadata_container(vol);
    detail::xor_with_stream(env.enc_metadata, base.meta_seed, params, base.transient);
    return env;
}

/// Inverse of whichever mode produced the envelope. The captcha gate runs
/// first; nothing is decrypted until a typed answer is accepted.
inline Volume decrypt_volume(const Envelope& env, const MasterKey& key,
                             const CaptchaProvider& provider = {},
                             int max_attempts = kDefaultMaxAttempts,
                             const MapParams& params = MapParams::canonical()) {
    if (env.kdf_id != kKdfIdSha256)
        throw UnsupportedVersion("unknown KDF id " + std::to_string(env.kdf_id));
    KeySet base = derive_keyset(key, env.salt);
    const std::size_t n = env.padded_dim;
    const std::size_t bpp = env.bits_allocated / 8;
    const std::size_t rows = env.original_rows;
    const std::size_t cols_b = env.original_cols * bpp;

    ByteImage captcha_enc;
    if (env.captcha_present()) {
        CaptchaChallenge challenge = generate_captcha(base.captcha_seed, n);
        for (int attempt = 1;; ++attempt) {
            std::string typed = provider ? provider(challenge, attempt) : std::string{};
            CaptchaVerdict v = verify_captcha(challenge.answer, typed, attempt, max_attempts);
            if (v == CaptchaVerdict::Accept) break;
            if (v == CaptchaVerdict::Reject)
                throw CaptchaRejected("captcha verification failed after " +
                                      std::to_string(max_attempts) + " attempts");
        }
        captcha_enc = encrypt_image(challenge.plane, derive_keyset(key, env.salt, "captcha"), params);
        if (env.enc_captcha != captcha_enc.data)
            throw BadChecksum("stored captcha block does not match the regenerated plane");
    }

    Volume vol;
    vol.bits_allocated = env.bits_allocated;
    vol.pixel_rows = rows;
    vol.pixel_cols = env.original_cols;
    vol.slices.resize(env.slice_count);

    if (!env.partial()) {
        if (env.payload.size() != static_cast<std::size_t>(env.slice_count) * n * n)
            throw LengthMismatch("payload size does not match slice count and padded dimension");
        detail::parallel_for(env.slice_count, 0, [&](std::size_t i) {
            ByteImage cipher;
            cipher.rows = cipher.cols = n;
            cipher.original_rows = rows;
            cipher.original_cols = cols_b;
            cipher.data.assign(env.payload.begin() + static_cast<std::ptrdiff_t>(i * n * n),
                               env.payload.begin() + static_cast<std::ptrdiff_t>((i + 1) * n * n));
            if (i == 0 && env.captcha_present()) {
                ByteImage as_img;
                as_img.rows = as_img.cols = n;
                as_img.data = std::move(cipher.data);
                cipher.data = superimpose(as_img, captcha_enc).data;
            }
            vol.slices[i] = decrypt_image(cipher, derive_keyset(key, env.salt, detail::slice_context(i)), params);
        });
    } else {
        if (env.payload.size() != static_cast<std::size_t>(env.slice_count) * rows * cols_b)
            throw LengthMismatch("carrier payload size does not match slice dimensions");
        for (std::size_t i = 0; i < env.slice_count; ++i) {
            ByteImage s(rows, cols_b);
            s.data.assign(env.payload.begin() + static_cast<std::ptrdiff_t>(i * rows * cols_b),
                          env.payload.begin() + static_cast<std::ptrdiff_t>((i + 1) * rows * cols_b));
            vol.slices[i] = std::move(s);
        }
        detail::parallel_for(env.roi.size(), 0, [&](std::size_t k) {
            const RoiEntry& entry = env.roi[k];
            const RoiBox& box = entry.box;
            if (box.z1 != box.z0 + 1 || box.z0 >= env.slice_count)
                throw LengthMismatch("malformed ROI table entry");
            const std::size_t sub_rows = box.y1 - box.y0;
            const std::size_t sub_cols = (box.x1 - box.x0) * bpp;
            if (entry.block.size() != n * n)
                throw LengthMismatch("ROI block size does not match padded dimension");
            ByteImage cipher;
            cipher.rows = cipher.cols = n;
            cipher.original_rows = sub_rows;
            cipher.original_cols = sub_cols;
            cipher.data = entry.block;
            if (k == 0 && env.captcha_present()) {
                ByteImage as_img;
                as_img.rows = as_img.cols = n;
                as_img.data = std::move(cipher.data);
                cipher.data = superimpose(as_img, captcha_enc).data;
            }
            ByteImage sub = decrypt_image(
                cipher, derive_keyset(key, env.salt, detail::slice_context(box.z0)), params);
            for (std::size_t i = 0; i < sub_rows; ++i)
                for (std::size_t j = 0; j < sub_cols; ++j)
                    vol.slices[box.z0].at(box.y0 + i, box.x0 * bpp + j) = sub.at(i, j);
        });
    }

    std::vector<std::uint8_t> container = env.enc_metadata;
    detail::xor_with_stream(container, base.meta_seed, params, base.transient);
    if (!container.empty()) {
        detail::ByteReader r(container);
        std::size_t count = r.read_le<std::uint32_t>();
        if (count != 0 && count != 1 && count != env.slice_count)
            throw LengthMismatch("metadata entry count does not match the slice count");
        for (std::size_t i = 0; i < count; ++i) {
            std::size_t len = r.read_le<std::uint64_t>();
            auto blob = r.read_bytes(len);
            if (count == env.slice_count && count != 1) {
                vol.sources.push_back(deserialize_metadata(blob, vol.slices[i].data));
            } else {
                std::vector<std::uint8_t> pixels;
                for (const auto& s : vol.slices) pixels.insert(pixels.end(), s.data.begin(), s.data.end());
                vol.sources.push_back(deserialize_metadata(blob, std::move(pixels)));
            }
        }
    }
    return vol;
}

/// Single fixed answer for non-interactive decryption.
inline Volume decrypt_volume(const Envelope& env, const MasterKey& key, const std::string& answer,
                             int max_attempts = kDefaultMaxAttempts,
                             const MapParams& params = MapParams::canonical()) {
    return decrypt_volume(
        env, key, [&answer](const CaptchaChallenge&, int) { return answer; }, max_attempts, params);
}

}  // namespace hcme
