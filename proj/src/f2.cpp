#include "cafde/f2.hpp"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cafde {

EchelonForm echelon_form(BitMatrix m) {
  const int rows = m.rows();
  const int cols = m.cols();
  EchelonForm out;
  out.pivot_col.reserve(std::min(rows, cols));

  int next_row = 0;
  for (int col = 0; col < cols && next_row < rows; ++col) {
    int pivot = -1;
    for (int r = next_row; r < rows; ++r) {
      if (m.get(r, col)) {
        pivot = r;
        break;
      }
    }
    if (pivot < 0) continue;
    m.swap_rows(next_row, pivot);

    const std::uint64_t* prow = m.row(next_row);
    const int wpr = m.words_per_row();
    const int word0 = col >> 6;  // nothing to the left of the pivot below this row
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (rows - next_row > 512)
#endif
    for (int r = next_row + 1; r < rows; ++r) {
      if (!m.get(r, col)) continue;
      std::uint64_t* dst = m.row(r);
      for (int w = word0; w < wpr; ++w) dst[w] ^= prow[w];
    }
    out.pivot_col.push_back(col);
    ++next_row;
  }

  out.rank = next_row;
  out.free_cols.reserve(cols - out.rank);
  {
    std::size_t p = 0;
    for (int c = 0; c < cols; ++c) {
      if (p < out.pivot_col.size() && out.pivot_col[p] == c)
        ++p;
      else
        out.free_cols.push_back(c);
    }
  }
  out.mat = std::move(m);
  return out;
}

BitVector EchelonForm::sample_nullspace(Rng& rng) const {
  BitVector v(mat.cols());
  for (int f : free_cols)
    if (rng.bit()) v.set(f, true);
  // reverse back-substitution: row r constrains v[pivot_col[r]] given all
  // coordinates to its right
  for (int r = rank - 1; r >= 0; --r) {
    if (mat.row_dot(r, v)) v.set(pivot_col[r], true);
  }
  return v;
}

BitVector EchelonForm::basis_vector(int j) const {
  BitVector v(mat.cols());
  v.set(free_cols[j], true);
  for (int r = rank - 1; r >= 0; --r) {
    if (mat.row_dot(r, v)) v.set(pivot_col[r], true);
  }
  return v;
}

}  // namespace cafde
