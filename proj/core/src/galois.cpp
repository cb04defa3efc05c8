#include "tpbats/galois.hpp"

#include <algorithm>
#include <array>
#include <cassert>

#include "tpbats/errors.hpp"

namespace tpbats::gf {
namespace {

struct Tables {
  std::array<std::uint8_t, 512> exp{};
  std::array<std::uint8_t, 256> log{};
  std::array<std::array<std::uint8_t, 256>, 256> mul{};
};

// 0x03 generates the multiplicative group modulo 0x11B.
constexpr Tables make_tables() {
  Tables t;
  unsigned x = 1;
  for (unsigned i = 0; i < 255; ++i) {
    t.exp[i] = static_cast<std::uint8_t>(x);
    t.log[x] = static_cast<std::uint8_t>(i);
    unsigned doubled = x << 1;
    if (doubled & 0x100) doubled ^= kPolynomial;
    x = (doubled ^ x) & 0xFF;
  }
  for (unsigned i = 255; i < 512; ++i) t.exp[i] = t.exp[i - 255];
  for (unsigned a = 1; a < 256; ++a) {
    for (unsigned b = 1; b < 256; ++b) {
      t.mul[a][b] = t.exp[t.log[a] + t.log[b]];
    }
  }
  return t;
}

constexpr Tables kTables = make_tables();

}  // namespace

std::uint8_t mul(std::uint8_t a, std::uint8_t b) noexcept {
  return kTables.mul[a][b];
}

std::uint8_t inv(std::uint8_t a) {
  if (a == 0) throw DomainError("gf::inv: zero has no multiplicative inverse");
  return kTables.exp[255 - kTables.log[a]];
}

const std::uint8_t* mul_row(std::uint8_t c) noexcept {
  return kTables.mul[c].data();
}

Element Element::inverse() const { return Element(gf::inv(value_)); }

Element operator*(Element a, Element b) {
  return Element(gf::mul(a.value_, b.value_));
}

Element operator/(Element a, Element b) { return a * b.inverse(); }

Element add(Element a, Element b) { return a + b; }
Element mul(Element a, Element b) { return a * b; }
Element inv(Element a) { return a.inverse(); }

void mul_add(std::span<std::uint8_t> dst, std::span<const std::uint8_t> src,
             std::uint8_t c) noexcept {
  assert(dst.size() == src.size());
  if (c == 0) return;
  std::uint8_t* d = dst.data();
  const std::uint8_t* s = src.data();
  const std::size_t n = dst.size();
  if (c == 1) {
    for (std::size_t i = 0; i < n; ++i) d[i] ^= s[i];
    return;
  }
  const std::uint8_t* t = mul_row(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const std::uint8_t a0 = t[s[i]];
    const std::uint8_t a1 = t[s[i + 1]];
    const std::uint8_t a2 = t[s[i + 2]];
    const std::uint8_t a3 = t[s[i + 3]];
    d[i] ^= a0;
    d[i + 1] ^= a1;
    d[i + 2] ^= a2;
    d[i + 3] ^= a3;
  }
  for (; i < n; ++i) d[i] ^= t[s[i]];
}

void scale(std::span<std::uint8_t> row, std::uint8_t c) noexcept {
  if (c == 1) return;
  const std::uint8_t* t = mul_row(c);
  for (auto& x : row) x = t[x];
}

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw std::invalid_argument("gf::Matrix: data size does not match shape");
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
  return m;
}

Matrix Matrix::random(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (auto& x : m.data_) x = random_byte(rng);
  return m;
}

void Matrix::swap_rows(std::size_t a, std::size_t b) {
  if (a == b) return;
  std::swap_ranges(row(a).begin(), row(a).end(), row(b).begin());
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t.at(c, r) = at(r, c);
  return t;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("gf::Matrix: shape mismatch in product");
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k)
      mul_add(out.row(i), b.row(k), a.at(i, k));
  return out;
}

std::size_t rank(Matrix m) {
  std::size_t r = 0;
  for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
    std::size_t pivot = r;
    while (pivot < m.rows() && m.at(pivot, c) == 0) ++pivot;
    if (pivot == m.rows()) continue;
    m.swap_rows(pivot, r);
    const std::uint8_t scale_by = inv(m.at(r, c));
    scale(m.row(r).subspan(c), scale_by);
    for (std::size_t i = r + 1; i < m.rows(); ++i) {
      if (const std::uint8_t f = m.at(i, c); f != 0) {
        mul_add(m.row(i).subspan(c), m.row(r).subspan(c), f);
      }
    }
    ++r;
  }
  return r;
}

Matrix solve(Matrix coeffs, Matrix rhs) {
  const std::size_t eqs = coeffs.rows();
  const std::size_t unknowns = coeffs.cols();
  if (rhs.rows() != eqs) {
    throw std::invalid_argument("gf::solve: rhs row count differs from coeffs");
  }
  if (eqs < unknowns) {
    throw UnsolvableSystem("gf::solve: fewer equations than unknowns");
  }
  // Forward elimination with first-nonzero pivoting.
  for (std::size_t c = 0; c < unknowns; ++c) {
    std::size_t pivot = c;
    while (pivot < eqs && coeffs.at(pivot, c) == 0) ++pivot;
    if (pivot == eqs) {
      throw UnsolvableSystem("gf::solve: coefficient matrix is rank deficient");
    }
    coeffs.swap_rows(pivot, c);
    rhs.swap_rows(pivot, c);
    const std::uint8_t s = inv(coeffs.at(c, c));
    scale(coeffs.row(c).subspan(c), s);
    scale(rhs.row(c), s);
    for (std::size_t i = c + 1; i < eqs; ++i) {
      if (const std::uint8_t f = coeffs.at(i, c); f != 0) {
        mul_add(coeffs.row(i).subspan(c), coeffs.row(c).subspan(c), f);
        mul_add(rhs.row(i), rhs.row(c), f);
      }
    }
  }
  for (std::size_t i = unknowns; i < eqs; ++i) {
    const auto r = rhs.row(i);
    if (std::any_of(r.begin(), r.end(), [](std::uint8_t x) { return x != 0; })) {
      throw UnsolvableSystem("gf::solve: inconsistent overdetermined system");
    }
  }
  // Back substitution.
  for (std::size_t c = unknowns; c-- > 0;) {
    for (std::size_t i = 0; i < c; ++i) {
      if (const std::uint8_t f = coeffs.at(i, c); f != 0) {
        coeffs.at(i, c) = 0;
        mul_add(rhs.row(i), rhs.row(c), f);
      }
    }
  }
  Matrix out(unknowns, rhs.cols());
  for (std::size_t i = 0; i < unknowns; ++i) {
    std::copy(rhs.row(i).begin(), rhs.row(i).end(), out.row(i).begin());
  }
  return out;
}

}  // namespace tpbats::gf
