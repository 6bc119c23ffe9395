#pragma once

// Restricted DICOM reader/writer: Explicit and Implicit VR Little Endian,
// uncompressed pixel data, defined-length elements. Rows, Columns, Bits
// Allocated, Number of Frames and Pixel Data are interpreted; every other
// element passes through opaquely, in file order, so re-serializing an
// unmodified object is byte-identical.

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hcme/detail/bytes.hpp"
#include "hcme/errors.hpp"

namespace hcme {

struct Tag {
    std::uint16_t group = 0, element = 0;
    bool operator==(const Tag&) const = default;
};

inline constexpr Tag kTagTransferSyntax{0x0002, 0x0010};
inline constexpr Tag kTagNumberOfFrames{0x0028, 0x0008};
inline constexpr Tag kTagRows{0x0028, 0x0010};
inline constexpr Tag kTagColumns{0x0028, 0x0011};
inline constexpr Tag kTagBitsAllocated{0x0028, 0x0100};
inline constexpr Tag kTagPixelSpacing{0x0028, 0x0030};
inline constexpr Tag kTagSliceThickness{0x0018, 0x0050};
inline constexpr Tag kTagInstanceNumber{0x0020, 0x0013};
inline constexpr Tag kTagSliceLocation{0x0020, 0x1041};
inline constexpr Tag kTagPixelData{0x7FE0, 0x0010};

inline constexpr std::string_view kSyntaxImplicitLE = "1.2.840.10008.1.2";
inline constexpr std::string_view kSyntaxExplicitLE = "1.2.840.10008.1.2.1";

struct DicomElement {
    Tag tag;
    std::array<char, 2> vr{'U', 'N'};
    std::vector<std::uint8_t> value;
};

namespace detail {

inline bool is_long_form_vr(std::array<char, 2> vr) {
    static constexpr const char* kLong[] = {"OB", "OW", "OF", "OD", "OL", "OV",
                                            "SQ", "UC", "UR", "UT", "UN"};
    for (auto* v : kLong)
        if (vr[0] == v[0] && vr[1] == v[1]) return true;
    return false;
}

inline bool is_known_vr(std::array<char, 2> vr) {
    static constexpr const char* kShort[] = {"AE", "AS", "AT", "CS", "DA", "DS", "DT",
                                             "FL", "FD", "IS", "LO", "LT", "PN", "SH",
                                             "SL", "SS", "ST", "TM", "UI", "UL", "US"};
    if (is_long_form_vr(vr)) return true;
    for (auto* v : kShort)
        if (vr[0] == v[0] && vr[1] == v[1]) return true;
    return false;
}

inline std::string trim_padding(std::span<const std::uint8_t> value) {
    std::string s(value.begin(), value.end());
    while (!s.empty() && (s.back() == '\0' || s.back() == ' ')) s.pop_back();
    return s;
}

}  // namespace detail

struct DicomObject {
    static constexpr std::size_t kNoPixelElement = static_cast<std::size_t>(-1);

    bool has_preamble = false;
    std::array<std::uint8_t, 128> preamble{};
    bool explicit_vr = true;
    std::string transfer_syntax;  // empty for headerless streams
    std::vector<DicomElement> elements;
    std::size_t pixel_index = kNoPixelElement;
    std::size_t rows = 0, cols = 0, bits_allocated = 8, frames = 1;

    bool operator==(const DicomObject&) const = default;

    std::size_t expected_pixel_bytes() const { return rows * cols * (bits_allocated / 8) * frames; }
    std::size_t frame_bytes() const { return rows * cols * (bits_allocated / 8); }

    std::span<const std::uint8_t> pixel_data() const {
        return elements[pixel_index].value;
    }
    void set_pixel_data(std::vector<std::uint8_t> bytes) {
        elements[pixel_index].value = std::move(bytes);
    }

    const DicomElement* find(Tag tag) const {
        for (const auto& e : elements)
            if (e.tag == tag) return &e;
        return nullptr;
    }

    // ASCII elements (IS/DS) may carry space/null padding.
    std::string string_value(Tag tag) const {
        const auto* e = find(tag);
        return e ? detail::trim_padding(e->value) : std::string{};
    }
};

namespace detail {

inline std::size_t read_us(const DicomElement& e) {
    if (e.value.size() < 2) throw MalformedElement("US element shorter than 2 bytes");
    return get_le<std::uint16_t>(e.value.data());
}

inline void extract_image_info(DicomObject& obj) {
    const DicomElement* rows = obj.find(kTagRows);
    const DicomElement* cols = obj.find(kTagColumns);
    const DicomElement* bits = obj.find(kTagBitsAllocated);
    if (!rows || !cols) throw MalformedElement("missing Rows/Columns");
    obj.rows = read_us(*rows);
    obj.cols = read_us(*cols);
    obj.bits_allocated = bits ? read_us(*bits) : 8;
    if (obj.bits_allocated != 8 && obj.bits_allocated != 16)
        throw MalformedElement("only 8- and 16-bit allocations are supported");
    obj.frames = 1;
    std::string nf = obj.string_value(kTagNumberOfFrames);
    if (!nf.empty()) {
        std::size_t parsed = 0;
        try {
            parsed = static_cast<std::size_t>(std::stoul(nf));
        } catch (...) {
            throw MalformedElement("unparsable Number of Frames");
        }
        if (parsed == 0) throw MalformedElement("Number of Frames must be positive");
        obj.frames = parsed;
    }
}

inline void validate_pixel_length(const DicomObject& obj) {
    if (obj.pixel_index == DicomObject::kNoPixelElement) throw MissingPixelData("no Pixel Data element");
    if (obj.pixel_data().size() != obj.expected_pixel_bytes())
        throw InconsistentPixelLength("pixel buffer does not match rows*cols*depth*frames");
}

}  // namespace detail

inline DicomObject parse_dicom(std::span<const std::uint8_t> bytes) {
    DicomObject obj;
    std::size_t pos = 0;
    bool dataset_explicit = true;
    bool dataset_mode_known = false;

    if (bytes.size() >= 132 && std::memcmp(bytes.data() + 128, "DICM", 4) == 0) {
        obj.has_preamble = true;
        std::memcpy(obj.preamble.data(), bytes.data(), 128);
        pos = 132;
    } else {
        if (bytes.size() < 8) throw MalformedElement("stream too short");
        std::uint16_t group = detail::get_le<std::uint16_t>(bytes.data());
        switch (group) {
            case 0x0002: case 0x0008: case 0x0010: case 0x0018: case 0x0020: case 0x0028:
                break;
            default:
                throw MalformedElement("does not look like a DICOM stream");
        }
        std::array<char, 2> vr{static_cast<char>(bytes[4]), static_cast<char>(bytes[5])};
        dataset_explicit = detail::is_known_vr(vr);
        dataset_mode_known = true;
        obj.explicit_vr = dataset_explicit;
    }

    auto resolve_dataset_mode = [&] {
        if (dataset_mode_known) return;
        if (obj.transfer_syntax == kSyntaxImplicitLE) {
            dataset_explicit = false;
        } else if (obj.transfer_syntax == kSyntaxExplicitLE) {
            dataset_explicit = true;
        } else if (obj.transfer_syntax.empty()) {
            throw MalformedElement("file meta lacks a Transfer Syntax UID");
        } else {
            throw UnsupportedTransferSyntax("transfer syntax not supported: " + obj.transfer_syntax);
        }
        dataset_mode_known = true;
        obj.explicit_vr = dataset_explicit;
    };

    while (pos < bytes.size()) {
        if (bytes.size() - pos < 8) throw MalformedElement("truncated element header");
        DicomElement el;
        el.tag.group = detail::get_le<std::uint16_t>(bytes.data() + pos);
        el.tag.element = detail::get_le<std::uint16_t>(bytes.data() + pos + 2);
        pos += 4;
        bool use_explicit = el.tag.group == 0x0002 ? true : (resolve_dataset_mode(), dataset_explicit);
        std::uint64_t len = 0;
        if (use_explicit) {
            el.vr = {static_cast<char>(bytes[pos]), static_cast<char>(bytes[pos + 1])};
            if (!detail::is_known_vr(el.vr)) throw MalformedElement("unknown VR in explicit element");
            pos += 2;
            if (detail::is_long_form_vr(el.vr)) {
                if (bytes.size() - pos < 6) throw MalformedElement("truncated element header");
                pos += 2;  // reserved
                len = detail::get_le<std::uint32_t>(bytes.data() + pos);
                pos += 4;
            } else {
                if (bytes.size() - pos < 2) throw MalformedElement("truncated element header");
                len = detail::get_le<std::uint16_t>(bytes.data() + pos);
                pos += 2;
            }
        } else {
            len = detail::get_le<std::uint32_t>(bytes.data() + pos);
            pos += 4;
        }
        if (len == 0xFFFFFFFFu)
            throw MalformedElement("undefined-length elements are not supported");
        if (len > bytes.size() - pos) throw MalformedElement("element value exceeds stream");
        el.value.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                        bytes.begin() + static_cast<std::ptrdiff_t>(pos + len));
        pos += len;
        if (el.tag == kTagTransferSyntax) obj.transfer_syntax = detail::trim_padding(el.value);
        if (el.tag == kTagPixelData) obj.pixel_index = obj.elements.size();
        obj.elements.push_back(std::move(el));
    }

    if (!obj.transfer_syntax.empty() && obj.transfer_syntax != kSyntaxImplicitLE &&
        obj.transfer_syntax != kSyntaxExplicitLE)
        throw UnsupportedTransferSyntax("transfer syntax not supported: " + obj.transfer_syntax);
    if (!dataset_mode_known) resolve_dataset_mode();
    detail::extract_image_info(obj);
    detail::validate_pixel_length(obj);
    return obj;
}

inline std::vector<std::uint8_t> write_dicom(const DicomObject& obj) {
    detail::validate_pixel_length(obj);
    std::vector<std::uint8_t> out;
    if (obj.has_preamble) {
        out.insert(out.end(), obj.preamble.begin(), obj.preamble.end());
        out.insert(out.end(), {'D', 'I', 'C', 'M'});
    }
    for (const auto& el : obj.elements) {
        detail::put_le<std::uint16_t>(out, el.tag.group);
        detail::put_le<std::uint16_t>(out, el.tag.element);
        bool use_explicit = el.tag.group == 0x0002 || obj.explicit_vr;
        if (use_explicit) {
            out.push_back(static_cast<std::uint8_t>(el.vr[0]));
            out.push_back(static_cast<std::uint8_t>(el.vr[1]));
            if (detail::is_long_form_vr(el.vr)) {
                detail::put_le<std::uint16_t>(out, 0);
                detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(el.value.size()));
            } else {
                if (el.value.size() > 0xFFFF)
                    throw MalformedElement("value too long for short-form VR");
                detail::put_le<std::uint16_t>(out, static_cast<std::uint16_t>(el.value.size()));
            }
        } else {
            detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(el.value.size()));
        }
        out.insert(out.end(), el.value.begin(), el.value.end());
    }
    return out;
}

// --- metadata blob -----------------------------------------------------------
// Internal container for every non-pixel element (plus the bookkeeping needed
// to reinsert Pixel Data at its original position). This is what the envelope
// encrypts as "metadata".

inline std::vector<std::uint8_t> serialize_metadata(const DicomObject& obj) {
    std::vector<std::uint8_t> out;
    std::uint8_t flags = 0;
    if (obj.has_preamble) flags |= 1;
    if (obj.explicit_vr) flags |= 2;
    out.push_back(flags);
    if (obj.has_preamble) out.insert(out.end(), obj.preamble.begin(), obj.preamble.end());
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(obj.pixel_index));
    const auto& pixel = obj.elements[obj.pixel_index];
    out.push_back(static_cast<std::uint8_t>(pixel.vr[0]));
    out.push_back(static_cast<std::uint8_t>(pixel.vr[1]));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(obj.elements.size() - 1));
    for (std::size_t i = 0; i < obj.elements.size(); ++i) {
        if (i == obj.pixel_index) continue;
        const auto& el = obj.elements[i];
        detail::put_le<std::uint16_t>(out, el.tag.group);
        detail::put_le<std::uint16_t>(out, el.tag.element);
        out.push_back(static_cast<std::uint8_t>(el.vr[0]));
        out.push_back(static_cast<std::uint8_t>(el.vr[1]));
        detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(el.value.size()));
        out.insert(out.end(), el.value.begin(), el.value.end());
    }
    return out;
}

/// Rebuilds a DicomObject from a metadata blob and the plain pixel bytes.
inline DicomObject deserialize_metadata(std::span<const std::uint8_t> blob,
                                        std::vector<std::uint8_t> pixel_bytes) {
    detail::ByteReader r(blob);
    DicomObject obj;
    std::uint8_t flags = r.read_le<std::uint8_t>();
    obj.has_preamble = flags & 1;
    obj.explicit_vr = flags & 2;
    if (obj.has_preamble) {
        auto p = r.read_bytes(128);
        std::copy(p.begin(), p.end(), obj.preamble.begin());
    }
    std::size_t pixel_index = r.read_le<std::uint32_t>();
    DicomElement pixel;
    pixel.tag = kTagPixelData;
    pixel.vr = {static_cast<char>(r.read_le<std::uint8_t>()),
                static_cast<char>(r.read_le<std::uint8_t>())};
    pixel.value = std::move(pixel_bytes);
    std::size_t count = r.read_le<std::uint32_t>();
    obj.elements.reserve(count + 1);
    for (std::size_t i = 0; i < count; ++i) {
        DicomElement el;
        el.tag.group = r.read_le<std::uint16_t>();
        el.tag.element = r.read_le<std::uint16_t>();
        el.vr = {static_cast<char>(r.read_le<std::uint8_t>()),
                 static_cast<char>(r.read_le<std::uint8_t>())};
        std::size_t len = r.read_le<std::uint32_t>();
        el.value = r.read_vector(len);
        if (el.tag == kTagTransferSyntax) obj.transfer_syntax = detail::trim_padding(el.value);
        obj.elements.push_back(std::move(el));
    }
    if (pixel_index > obj.elements.size())
        throw LengthMismatch("pixel element position out of range in metadata blob");
    obj.elements.insert(obj.elements.begin() + static_cast<std::ptrdiff_t>(pixel_index),
                        std::move(pixel));
    obj.pixel_index = pixel_index;
    detail::extract_image_info(obj);
    detail::validate_pixel_length(obj);
    return obj;
}

}  // namespace hcme
