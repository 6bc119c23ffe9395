#pragma once

// Everything the cipher consumes is derived here from (master key, salt)
// through labeled SHA-256 digests: chaotic seeds, keystream bytes, and the
// argsort permutations. Derivation is pure, so (key, salt) alone reproduces
// an encryption exactly.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hcme/chaos.hpp"
#include "hcme/detail/bytes.hpp"
#include "hcme/detail/sha256.hpp"
#include "hcme/errors.hpp"

namespace hcme {

inline constexpr std::uint8_t kKdfIdSha256 = 1;

struct MasterKey {
    std::array<std::uint8_t, 32> bytes{};

    static MasterKey from_bytes(std::span<const std::uint8_t> b) {
        if (b.size() != 32) throw InvalidKeyLength("master key must be exactly 32 bytes");
        MasterKey k;
        std::copy(b.begin(), b.end(), k.bytes.begin());
        return k;
    }

    static MasterKey from_hex(std::string_view hex) {
        if (hex.size() != 64) throw InvalidKeyLength("master key must be 64 hex characters");
        return from_bytes(detail::parse_hex(hex));
    }
};

struct Salt {
    std::array<std::uint8_t, 16> bytes{};

    static Salt from_bytes(std::span<const std::uint8_t> b) {
        if (b.size() != 16) throw InvalidSaltLength("salt must be exactly 16 bytes");
        Salt s;
        std::copy(b.begin(), b.end(), s.bytes.begin());
        return s;
    }

    static Salt from_hex(std::string_view hex) {
        if (hex.size() != 32) throw InvalidSaltLength("salt must be 32 hex characters");
        return from_bytes(detail::parse_hex(hex));
    }

    bool operator==(const Salt&) const = default;
};

struct KeySet {
    ChaosState seed_x, seed_y, seed_z, meta_seed;
    std::uint64_t captcha_seed = 0;
    std::size_t transient = kDefaultTransient;
};

namespace detail {

inline Sha256::Digest labeled_digest(const MasterKey& key, const Salt& salt,
                                     std::string_view label, std::string_view context) {
    Sha256 h;
    h.update(key.bytes);
    h.update(salt.bytes);
    h.update({reinterpret_cast<const std::uint8_t*>(label.data()), label.size()});
    if (!context.empty()) {
        const std::uint8_t sep = '/';
        h.update({&sep, 1});
        h.update({reinterpret_cast<const std::uint8_t*>(context.data()), context.size()});
    }
    return h.finish();
}

// First three 8-byte windows of the digest, each mapped into [0.1, 0.9).
inline ChaosState digest_to_seed(const Sha256::Digest& d) {
    auto component = [&](std::size_t window) {
        std::uint64_t u = get_le<std::uint64_t>(d.data() + 8 * window);
        double f = static_cast<double>(u) / 18446744073709551616.0;  // 2^64
        return 0.1 + 0.8 * f;
    };
    return {component(0), component(1), component(2)};
}

}  // namespace detail

/// Derives all seeds for one image (or one slice, via a context label such as
/// "slice-3"). The captcha seed is shared plumbing: only the empty-context
/// derivation of it is used by the container format.
inline KeySet derive_keyset(const MasterKey& key, const Salt& salt, std::string_view context = {}) {
    KeySet ks;
    ks.seed_x = detail::digest_to_seed(detail::labeled_digest(key, salt, "perm-x", context));
    ks.seed_y = detail::digest_to_seed(detail::labeled_digest(key, salt, "perm-y", context));
    ks.seed_z = detail::digest_to_seed(detail::labeled_digest(key, salt, "stream-z", context));
    ks.meta_seed = detail::digest_to_seed(detail::labeled_digest(key, salt, "meta", context));
    auto cd = detail::labeled_digest(key, salt, "captcha", context);
    ks.captcha_seed = detail::get_le<std::uint64_t>(cd.data());
    ks.transient = kDefaultTransient;
    return ks;
}

struct Keystream {
    std::vector<std::uint8_t> bytes;
    std::string label;

    std::span<const std::uint8_t> window(std::size_t offset, std::size_t len) const {
        if (offset + len > bytes.size()) throw KeystreamExhausted("keystream window out of range");
        return {bytes.data() + offset, len};
    }
};

/// byte_i = floor(frac(|x_i| * 1e6) * 256) over the post-transient orbit.
inline Keystream keystream_bytes(const ChaosState& seed, const MapParams& params, std::size_t n,
                                 std::size_t transient = kDefaultTransient,
                                 std::string label = {}) {
    Keystream out;
    out.label = std::move(label);
    out.bytes.reserve(n);
    OrbitStream stream(seed, params, transient);
    for (std::size_t i = 0; i < n; ++i) {
        double m = std::fabs(stream.advance().x) * 1e6;
        double frac = m - std::floor(m);
        int b = static_cast<int>(frac * 256.0);
        out.bytes.push_back(static_cast<std::uint8_t>(b > 255 ? 255 : b));
    }
    return out;
}

/// Argsort of n chaotic x-values (ties broken by index): a bijection on
/// 0..n-1 by construction.
inline std::vector<std::uint32_t> permutation_from_sequence(const ChaosState& seed,
                                                            const MapParams& params, std::size_t n,
                                                            std::size_t transient = kDefaultTransient) {
    if (n == 0) throw Error("permutation length must be at least 1");
    std::vector<double> xs;
    xs.reserve(n);
    OrbitStream stream(seed, params, transient);
    for (std::size_t i = 0; i < n; ++i) xs.push_back(stream.advance().x);
    std::vector<std::uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return xs[a] < xs[b]; });
    return idx;
}

}  // namespace hcme
