#include "cssp/data_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <string_view>

#include "cssp/errors.hpp"

namespace cssp {

namespace {

constexpr std::array<char, 8> kMagic = {'C', 'S', 'S', 'P', 'M', 'A', 'T', '1'};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

bool is_missing(std::string_view cell) {
  return cell.empty() || cell == "NA" || cell == "na" || cell == "NaN" || cell == "nan";
}

enum class CellKind { Number, Missing, Text };

CellKind parse_cell(std::string_view cell, double& value) {
  cell = trim(cell);
  if (is_missing(cell)) {
    value = std::numeric_limits<double>::quiet_NaN();
    return CellKind::Missing;
  }
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) return CellKind::Text;
  return CellKind::Number;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cells;
}

void put_u64(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b.data(), 8);
}

std::uint64_t get_u64(std::istream& is) {
  std::array<unsigned char, 8> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), 8)) throw ParseError("truncated binary matrix");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
  return v;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (m < 1 || n < 1) throw ParameterError("synthetic matrix needs m >= 1 and n >= 1");
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PowerLaw>) {
          if (!(s.exponent > 0.0)) throw ParameterError("power-law exponent must be > 0");
        } else if constexpr (std::is_same_v<T, Exponential>) {
          if (!(s.rate > 0.0)) throw ParameterError("exponential rate must be > 0");
        } else {
          if (s.sigma.empty()) throw ParameterError("explicit spectrum is empty");
          if (static_cast<Index>(s.sigma.size()) > std::min(m, n)) {
            throw ParameterError("explicit spectrum longer than min(m, n)");
          }
          for (std::size_t i = 0; i < s.sigma.size(); ++i) {
            if (!(s.sigma[i] > 0.0) || !std::isfinite(s.sigma[i]) ||
                (i > 0 && s.sigma[i] > s.sigma[i - 1])) {
              throw ParameterError("explicit spectrum must be positive and non-increasing");
            }
          }
        }
      },
      spectrum);
}

Vector SyntheticSpec::singular_values() const {
  validate();
  const Index p = std::min(m, n);
  Vector sigma = Vector::Zero(p);
  for (Index i = 0; i < p; ++i) {
    const double idx = static_cast<double>(i + 1);
    if (const auto* pl = std::get_if<PowerLaw>(&spectrum)) {
      sigma(i) = std::pow(idx, -pl->exponent);
    } else if (const auto* ex = std::get_if<Exponential>(&spectrum)) {
      sigma(i) = std::exp((1.0 - idx) * ex->rate);
    } else {
      const auto& s = std::get<ExplicitSpectrum>(spectrum).sigma;
      if (static_cast<std::size_t>(i) < s.size()) sigma(i) = s[static_cast<std::size_t>(i)];
    }
  }
  return sigma;
}

Matrix generate_synthetic(const SyntheticSpec& spec) {
  const Vector sigma = spec.singular_values();
  const Index p = sigma.size();

  RngStream rng(spec.seed, hash_label("synthetic"));
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gaussian = [&](Index rows, Index cols) {
    Matrix G(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) G(i, j) = normal(rng.engine());
    return G;
  };
  auto orthonormal = [&](Index rows) {
    Eigen::HouseholderQR<Matrix> qr(gaussian(rows, p));
    return Matrix(qr.householderQ() * Matrix::Identity(rows, p));
  };
  const Matrix U = orthonormal(spec.m);
  const Matrix V = orthonormal(spec.n);
  return U * sigma.asDiagonal() * V.transpose();
}

Matrix load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());

  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    std::vector<double> row(cells.size());
    std::size_t first_text = 0;
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (parse_cell(cells[j], row[j]) == CellKind::Text && first_text == 0) first_text = j + 1;
    }
    if (first_text != 0) {
      if (rows == 0 && cols == 0 && values.empty() && line_no == 1) {
        cols = cells.size();  // header row
        continue;
      }
      throw ParseError("non-numeric cell '" + std::string(trim(cells[first_text - 1])) + "'",
                       line_no, first_text);
    }
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (std::isinf(row[j])) throw ParseError("infinite value", line_no, j + 1);
    }
    if (cols == 0) cols = row.size();
    if (row.size() != cols) {
      throw ParseError("ragged row: expected " + std::to_string(cols) + " cells, found " +
                           std::to_string(row.size()),
                       line_no);
    }
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0) throw ParseError("no numeric rows in " + path.string());

  Matrix A(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      A(static_cast<Index>(i), static_cast<Index>(j)) = values[i * cols + j];
  return A;
}

void save_csv(const Matrix& A, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  std::array<char, 64> buf{};
  for (Index i = 0; i < A.rows(); ++i) {
    for (Index j = 0; j < A.cols(); ++j) {
      if (j > 0) out.put(',');
      const double v = A(i, j);
      if (std::isnan(v)) {
        out << "NA";
        continue;
      }
      const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                     std::chars_format::general, 17);
      out.write(buf.data(), res.ptr - buf.data());
    }
    out.put('\n');
  }
  if (!out) throw Error("failed writing " + path.string());
}

Matrix load_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), 8) || magic != kMagic) throw ParseError("bad magic in binary matrix");
  const std::uint64_t m = get_u64(in);
  const std::uint64_t n = get_u64(in);
  if (m == 0 || n == 0) throw ParseError("binary matrix has a zero dimension");
  Matrix A(static_cast<Index>(m), static_cast<Index>(n));
  for (std::uint64_t i = 0; i < m; ++i)
    for (std::uint64_t j = 0; j < n; ++j)
      A(static_cast<Index>(i), static_cast<Index>(j)) = std::bit_cast<double>(get_u64(in));
  if (in.peek() != std::char_traits<char>::eof()) throw ParseError("trailing bytes in binary matrix");
  return A;
}

void save_binary(const Matrix& A, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(kMagic.data(), kMagic.size());
  put_u64(out, static_cast<std::uint64_t>(A.rows()));
  put_u64(out, static_cast<std::uint64_t>(A.cols()));
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < A.cols(); ++j) put_u64(out, std::bit_cast<std::uint64_t>(A(i, j)));
  if (!out) throw Error("failed writing " + path.string());
}

Matrix load_matrix(const std::filesystem::path& path) {
  return path.extension() == ".bin" ? load_binary(path) : load_csv(path);
}

void save_matrix(const Matrix& A, const std::filesystem::path& path) {
  if (path.extension() == ".bin") {
    save_binary(A, path);
  } else {
    save_csv(A, path);
  }
}

TernaryFill fill_missing_ternary(const Matrix& A, RngStream& rng) {
  TernaryFill out{A, 0, 0};
  std::uniform_int_distribution<int> pick(-1, 1);
  // Column-major walk so the draw order matches Eigen's storage.
  for (Index j = 0; j < A.cols(); ++j) {
    for (Index i = 0; i < A.rows(); ++i) {
      double& v = out.matrix(i, j);
      if (std::isnan(v)) {
        v = static_cast<double>(pick(rng.engine()));
        ++out.filled;
      } else if (v != -1.0 && v != 0.0 && v != 1.0) {
        ++out.off_alphabet;
      }
    }
  }
  return out;
}

}  // namespace cssp
