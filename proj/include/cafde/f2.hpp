// Bit-packed GF(2) vectors and matrices: just enough dense linear algebra to
// extract code generators and sample null-space vectors at large block length.
#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "cafde/rng.hpp"

namespace cafde {

class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(int size) : size_(size), words_((size + 63) / 64, 0) {}

  int size() const { return size_; }
  bool get(int i) const { return (words_[i >> 6] >> (i & 63)) & 1; }
  void set(int i, bool v) {
    const std::uint64_t mask = std::uint64_t(1) << (i & 63);
    if (v)
      words_[i >> 6] |= mask;
    else
      words_[i >> 6] &= ~mask;
  }
  void flip(int i) { words_[i >> 6] ^= std::uint64_t(1) << (i & 63); }
  void clear() { std::fill(words_.begin(), words_.end(), 0); }

  void xor_with(const BitVector& other) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] ^= other.words_[w];
  }

  int popcount() const {
    int n = 0;
    for (std::uint64_t w : words_) n += std::popcount(w);
    return n;
  }

  std::uint64_t* data() { return words_.data(); }
  const std::uint64_t* data() const { return words_.data(); }
  int words() const { return static_cast<int>(words_.size()); }

  friend bool operator==(const BitVector&, const BitVector&) = default;

  // lexicographic by coordinate (index 0 most significant)
  bool lex_less(const BitVector& other) const {
    for (int i = 0; i < size_ && i < other.size_; ++i) {
      const bool a = get(i), b = other.get(i);
      if (a != b) return b;
    }
    return size_ < other.size_;
  }

 private:
  int size_ = 0;
  std::vector<std::uint64_t> words_;
};

class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(int rows, int cols)
      : rows_(rows), cols_(cols), wpr_((cols + 63) / 64), words_(std::size_t(rows) * wpr_, 0) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int words_per_row() const { return wpr_; }

  bool get(int r, int c) const { return (row(r)[c >> 6] >> (c & 63)) & 1; }
  void set(int r, int c, bool v) {
    const std::uint64_t mask = std::uint64_t(1) << (c & 63);
    if (v)
      row(r)[c >> 6] |= mask;
    else
      row(r)[c >> 6] &= ~mask;
  }
  void flip(int r, int c) { row(r)[c >> 6] ^= std::uint64_t(1) << (c & 63); }

  std::uint64_t* row(int r) { return words_.data() + std::size_t(r) * wpr_; }
  const std::uint64_t* row(int r) const { return words_.data() + std::size_t(r) * wpr_; }

  void xor_rows(int dst, int src) {
    std::uint64_t* d = row(dst);
    const std::uint64_t* s = row(src);
    for (int w = 0; w < wpr_; ++w) d[w] ^= s[w];
  }

  void swap_rows(int a, int b) {
    if (a == b) return;
    std::uint64_t* ra = row(a);
    std::uint64_t* rb = row(b);
    for (int w = 0; w < wpr_; ++w) std::swap(ra[w], rb[w]);
  }

  // parity of <row r, v>, v must have cols() coordinates
  bool row_dot(int r, const BitVector& v) const {
    const std::uint64_t* a = row(r);
    const std::uint64_t* b = v.data();
    std::uint64_t acc = 0;
    for (int w = 0; w < wpr_; ++w) acc ^= a[w] & b[w];
    return std::popcount(acc) & 1;
  }

 private:
  int rows_ = 0, cols_ = 0, wpr_ = 0;
  std::vector<std::uint64_t> words_;
};

// Row echelon form of a matrix, produced by in-place forward elimination with
// column order 0..cols-1. Rows are reordered so that pivot rows come first.
struct EchelonForm {
  BitMatrix mat;               // echelon rows (pivot rows 0..rank-1)
  std::vector<int> pivot_col;  // pivot column of row r, strictly increasing
  std::vector<int> free_cols;  // non-pivot columns
  int rank = 0;

  // Uniform null-space sample: free coordinates drawn from rng, pivots back-solved.
  BitVector sample_nullspace(Rng& rng) const;

  // Null-space basis vector with free coordinate free_cols[j] set and the other
  // free coordinates zero (one generator row per free column).
  BitVector basis_vector(int j) const;
};

// Forward elimination; multithreaded over rows for large matrices.
EchelonForm echelon_form(BitMatrix m);

}  // namespace cafde
