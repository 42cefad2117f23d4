#include "scatterkit/media.hpp"

#include <cmath>
#include <string>

#include "scatterkit/error.hpp"
#include "scatterkit/hash.hpp"
#include "scatterkit/rng.hpp"

namespace spk::media {

const char* medium_kind_name(MediumKind k) {
  return k == MediumKind::linear ? "linear" : "coherent";
}

void MediumSpec::validate() const {
  if (in_dims.h < 2 || in_dims.w < 2 || out_dims.h < 2 || out_dims.w < 2) {
    raise(Errc::invalid_spec, "medium planes must be at least 2x2");
  }
}

TransmissionMedium generate_medium(const MediumSpec& spec) {
  spec.validate();
  TransmissionMedium m;
  m.spec = spec;
  const std::size_t rows = spec.out_dims.pixels();
  const std::size_t cols = spec.in_dims.pixels();
  Rng rng(spec.seed);
  if (spec.kind == MediumKind::linear) {
    // |N(0,1)| / in_pixels keeps propagated outputs O(1).
    m.real_matrix = Matrix(rows, cols);
    const double scale = 1.0 / static_cast<double>(cols);
    for (std::size_t i = 0; i < rows; ++i) {
      double* r = m.real_matrix.row(i);
      for (std::size_t j = 0; j < cols; ++j) {
        r[j] = std::abs(rng.normal()) * scale;
      }
    }
  } else {
    // Circular complex Gaussian with E|t|^2 = 1/in_pixels.
    m.complex_matrix = CMatrix(rows, cols);
    const double sd = std::sqrt(1.0 / (2.0 * static_cast<double>(cols)));
    for (std::size_t i = 0; i < rows; ++i) {
      std::complex<double>* r = m.complex_matrix.row(i);
      for (std::size_t j = 0; j < cols; ++j) {
        const double re = rng.normal() * sd;
        const double im = rng.normal() * sd;
        r[j] = {re, im};
      }
    }
  }
  return m;
}

std::uint64_t medium_fingerprint(const TransmissionMedium& medium) {
  Fnv1a64 h;
  const bool coherent = medium.spec.kind == MediumKind::coherent;
  h.update_u8(coherent ? 1 : 0);
  if (!coherent) {
    h.update_u32(static_cast<std::uint32_t>(medium.real_matrix.rows()));
    h.update_u32(static_cast<std::uint32_t>(medium.real_matrix.cols()));
    for (double v : medium.real_matrix.values()) h.update_f64(v);
  } else {
    h.update_u32(static_cast<std::uint32_t>(medium.complex_matrix.rows()));
    h.update_u32(static_cast<std::uint32_t>(medium.complex_matrix.cols()));
    for (const auto& v : medium.complex_matrix.values()) {
      h.update_f64(v.real());
      h.update_f64(v.imag());
    }
  }
  return h.digest();
}

SpecklePattern propagate(const TransmissionMedium& medium,
                         const Image& target) {
  if (!(target.dims() == medium.spec.in_dims)) {
    raise(Errc::shape, "propagate: target dims do not match the medium input plane");
  }
  if (!in_unit_range(target)) {
    raise(Errc::invalid_argument, "propagate: target values must lie in [0, 1]");
  }
  SpecklePattern out;
  out.medium_fingerprint = medium_fingerprint(medium);
  out.values = Image(medium.spec.out_dims);
  if (medium.spec.kind == MediumKind::linear) {
    const std::vector<double> y = matvec(medium.real_matrix, target.values());
    out.values.values() = y;
  } else {
    const std::vector<std::complex<double>> field =
        matvec(medium.complex_matrix, target.values());
    for (std::size_t k = 0; k < field.size(); ++k) {
      out.values.values()[k] = std::norm(field[k]);
    }
  }
  return out;
}

Matrix exact_inverse(const TransmissionMedium& medium, double ridge) {
  if (medium.spec.kind != MediumKind::linear) {
    raise(Errc::unsupported_kind,
          "exact_inverse: only linear media have a linear inverse");
  }
  if (ridge < 0.0) {
    raise(Errc::invalid_argument, "exact_inverse: ridge must be >= 0");
  }
  const Matrix& T = medium.real_matrix;
  const std::size_t n = T.cols();
  // Gram matrix T^t T + ridge I.
  Matrix G(n, n, 0.0);
  for (std::size_t s = 0; s < T.rows(); ++s) {
    const double* r = T.row(s);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = r[i];
      if (a == 0.0) continue;
      double* g = G.row(i);
      for (std::size_t j = i; j < n; ++j) g[j] += a * r[j];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) G.at(i, j) = G.at(j, i);
    G.at(i, i) += ridge;
  }
  const CholeskyFactor chol(std::move(G));
  return chol.solve_many(transpose(T));
}

}  // namespace spk::media
