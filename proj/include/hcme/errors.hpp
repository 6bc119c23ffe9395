#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hcme {

// Base class for every error this library throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// chaos
struct ChaoticDivergence : Error {
    std::size_t step_index;
    explicit ChaoticDivergence(std::size_t step)
        : Error("orbit diverged at step " + std::to_string(step)), step_index(step) {}
};

// key schedule
struct InvalidKeyLength : Error { using Error::Error; };
struct InvalidSaltLength : Error { using Error::Error; };

// diffusion
struct KeystreamExhausted : Error { using Error::Error; };
struct InvalidSegmentWidth : Error { using Error::Error; };
struct NotSquare : Error { using Error::Error; };

// pipeline
struct NotAPermutation : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };

// dicom
struct UnsupportedTransferSyntax : Error { using Error::Error; };
struct MalformedElement : Error { using Error::Error; };
struct MissingPixelData : Error { using Error::Error; };
struct InconsistentPixelLength : Error { using Error::Error; };

// pgm
struct MalformedHeader : Error { using Error::Error; };
struct UnsupportedMaxval : Error { using Error::Error; };

// envelope
struct BadMagic : Error { using Error::Error; };
struct UnsupportedVersion : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct BadChecksum : Error { using Error::Error; };

// volume
struct InconsistentSeries : Error { using Error::Error; };
struct DuplicateOrderKey : Error { using Error::Error; };
struct RoiOutOfBounds : Error { using Error::Error; };

// captcha
struct DimensionTooSmall : Error { using Error::Error; };
struct CaptchaRejected : Error { using Error::Error; };

}  // namespace hcme
