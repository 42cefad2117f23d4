#pragma once

#include <cstdint>

#include "scatterkit/image.hpp"
#include "scatterkit/linalg.hpp"

namespace spk::media {

enum class MediumKind { linear, coherent };

const char* medium_kind_name(MediumKind k);

struct MediumSpec {
  MediumKind kind = MediumKind::linear;
  Dims in_dims;   // input plane (target side)
  Dims out_dims;  // output plane (speckle side)
  std::uint64_t seed = 0;

  // Both planes must be at least 2x2.
  void validate() const;
};

// Frozen random transmission matrix of shape out_pixels x in_pixels. The
// linear variant holds nonnegative real entries, the coherent one complex
// field factors.
struct TransmissionMedium {
  MediumSpec spec;
  Matrix real_matrix;     // linear
  CMatrix complex_matrix; // coherent

  std::size_t out_pixels() const { return spec.out_dims.pixels(); }
  std::size_t in_pixels() const { return spec.in_dims.pixels(); }
};

struct SpecklePattern {
  Image values;  // out_dims, nonnegative
  std::uint64_t medium_fingerprint = 0;
};

TransmissionMedium generate_medium(const MediumSpec& spec);

// Content hash over kind, matrix shape and entries. Regenerating from the
// same spec reproduces it, and it survives a save/load round trip, which a
// hash over the spec fields alone could not (the medium file stores no seed).
std::uint64_t medium_fingerprint(const TransmissionMedium& medium);

// Forward model. Linear: y = T x. Coherent: y_k = |(T x)_k|^2. The target
// must match in_dims and hold values in [0, 1].
SpecklePattern propagate(const TransmissionMedium& medium, const Image& target);

// Tikhonov-regularised pseudoinverse (T^t T + ridge I)^-1 T^t for linear
// media; the ground-truth inverse that learned mappings are judged against.
Matrix exact_inverse(const TransmissionMedium& medium, double ridge);

}  // namespace spk::media
