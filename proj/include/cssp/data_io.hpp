#pragma once

#include <cstdint>
#include <filesystem>
#include <variant>
#include <vector>

#include "cssp/linalg.hpp"
#include "cssp/rng.hpp"

namespace cssp {

/// sigma_i = i^(-exponent), i = 1, 2, ...
struct PowerLaw {
  double exponent = 0.3;
};
/// sigma_i = exp((1 - i) * rate), i = 1, 2, ...
struct Exponential {
  double rate = 0.1;
};
/// sigma given explicitly; entries past its length are zero.
struct ExplicitSpectrum {
  std::vector<double> sigma;
};

using Spectrum = std::variant<PowerLaw, Exponential, ExplicitSpectrum>;

struct SyntheticSpec {
  Index m = 0;
  Index n = 0;
  Spectrum spectrum = Exponential{};
  std::uint64_t seed = 0;

  void validate() const;
  /// The min(m, n) target singular values, non-increasing.
  Vector singular_values() const;
};

/// A = U diag(sigma) V^T with U, V the orthonormal QR factors of seeded
/// standard-Gaussian matrices.
Matrix generate_synthetic(const SyntheticSpec& spec);

/// Reads a rectangular numeric CSV. A first row containing any non-numeric
/// cell is taken as a header. Empty cells, "NA" and "NaN" load as NaN (the
/// missing-value sentinel); any other unparsable cell, a ragged row, or
/// +/-inf is a ParseError carrying its 1-based row and column.
Matrix load_csv(const std::filesystem::path& path);

/// Writes one row per line, values with 17 significant digits; NaN as "NA".
void save_csv(const Matrix& A, const std::filesystem::path& path);

/// Binary layout: "CSSPMAT1", m and n as little-endian uint64, then m*n
/// little-endian IEEE-754 doubles in row-major order.
Matrix load_binary(const std::filesystem::path& path);
void save_binary(const Matrix& A, const std::filesystem::path& path);

/// Dispatches on extension: ".bin" is binary, anything else CSV.
Matrix load_matrix(const std::filesystem::path& path);
void save_matrix(const Matrix& A, const std::filesystem::path& path);

struct TernaryFill {
  Matrix matrix;
  std::size_t filled = 0;
  /// Non-missing entries outside {-1, 0, +1}; left untouched.
  std::size_t off_alphabet = 0;
};

/// Replaces every NaN with an i.i.d. uniform draw from {-1, 0, +1}.
TernaryFill fill_missing_ternary(const Matrix& A, RngStream& rng);

}  // namespace cssp
