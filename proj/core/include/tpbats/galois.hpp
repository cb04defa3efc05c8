#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tpbats/random.hpp"

// Arithmetic over GF(2^8) with reduction polynomial x^8 + x^4 + x^3 + x + 1
// (0x11B), plus the dense matrix routines the codec needs.
namespace tpbats::gf {

inline constexpr unsigned kPolynomial = 0x11B;

class Element {
 public:
  constexpr Element() = default;
  constexpr explicit Element(std::uint8_t value) : value_(value) {}

  constexpr std::uint8_t value() const { return value_; }

  /// Throws DomainError for zero.
  Element inverse() const;

  friend constexpr bool operator==(Element, Element) = default;

  friend constexpr Element operator+(Element a, Element b) {
    return Element(static_cast<std::uint8_t>(a.value_ ^ b.value_));
  }
  friend constexpr Element operator-(Element a, Element b) { return a + b; }
  friend Element operator*(Element a, Element b);
  friend Element operator/(Element a, Element b);

  Element& operator+=(Element o) { return *this = *this + o; }
  Element& operator*=(Element o) { return *this = *this * o; }

 private:
  std::uint8_t value_ = 0;
};

Element add(Element a, Element b);
Element mul(Element a, Element b);
/// Throws DomainError for zero.
Element inv(Element a);

// Raw byte versions for inner loops.
std::uint8_t mul(std::uint8_t a, std::uint8_t b) noexcept;
std::uint8_t inv(std::uint8_t a);

/// Row of the multiplication table: mul_row(c)[x] == mul(c, x).
const std::uint8_t* mul_row(std::uint8_t c) noexcept;

/// dst[i] ^= c * src[i]. Sizes must match.
void mul_add(std::span<std::uint8_t> dst, std::span<const std::uint8_t> src,
             std::uint8_t c) noexcept;
/// row[i] = c * row[i].
void scale(std::span<std::uint8_t> row, std::uint8_t c) noexcept;

/// Dense row-major matrix over GF(2^8).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);
  Matrix(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> data);

  static Matrix identity(std::size_t n);
  static Matrix random(std::size_t rows, std::size_t cols, Rng& rng);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  std::uint8_t& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  std::uint8_t at(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<std::uint8_t> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const std::uint8_t> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  const std::vector<std::uint8_t>& data() const { return data_; }

  void swap_rows(std::size_t a, std::size_t b);
  Matrix transposed() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);

/// Row-echelon rank.
std::size_t rank(Matrix m);

/// Solves coeffs * X = rhs for X, where coeffs is (equations x unknowns)
/// with full column rank and rhs is (equations x payload length). Extra
/// equations must be consistent. Throws UnsolvableSystem otherwise.
Matrix solve(Matrix coeffs, Matrix rhs);

}  // namespace tpbats::gf
