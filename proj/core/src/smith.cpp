#include "tiledeform/smith.hpp"

#include <algorithm>

namespace tiledeform {

namespace {

class SmithReducer {
 public:
  SmithReducer(const ZMatrix& m, bool track) : d_(m), track_(track) {
    if (track_) {
      u_ = ZMatrix::identity(m.rows());
      v_ = ZMatrix::identity(m.cols());
    }
  }

  void run() {
    const std::size_t n = std::min(d_.rows(), d_.cols());
    for (std::size_t t = 0; t < n; ++t) {
      if (!move_smallest_to(t)) break;
      for (;;) {
        bool dirty = clear_column(t);
        dirty = clear_row(t) || dirty;
        if (dirty) {
          move_smallest_in_cross(t);
          continue;
        }
        if (!fix_divisibility(t)) break;
      }
      if (d_(t, t) < 0) negate_row(t);
    }
  }

  ZMatrix d_;
  ZMatrix u_;
  ZMatrix v_;

 private:
  bool move_smallest_to(std::size_t t) {
    bool found = false;
    std::size_t bi = t, bj = t;
    mpz_class best;
    for (std::size_t i = t; i < d_.rows(); ++i)
      for (std::size_t j = t; j < d_.cols(); ++j) {
        if (d_(i, j) == 0) continue;
        mpz_class a = abs(d_(i, j));
        if (!found || a < best) {
          found = true;
          best = a;
          bi = i;
          bj = j;
        }
      }
    if (!found) return false;
    swap_rows(t, bi);
    swap_cols(t, bj);
    return true;
  }

  void move_smallest_in_cross(std::size_t t) {
    std::size_t bi = t, bj = t;
    mpz_class best = abs(d_(t, t));
    for (std::size_t i = t + 1; i < d_.rows(); ++i)
      if (d_(i, t) != 0 && (best == 0 || abs(d_(i, t)) < best)) {
        best = abs(d_(i, t));
        bi = i;
        bj = t;
      }
    for (std::size_t j = t + 1; j < d_.cols(); ++j)
      if (d_(t, j) != 0 && (best == 0 || abs(d_(t, j)) < best)) {
        best = abs(d_(t, j));
        bi = t;
        bj = j;
      }
    swap_rows(t, bi);
    swap_cols(t, bj);
  }

  // Returns true when a nonzero remainder was left in the column.
  bool clear_column(std::size_t t) {
    bool dirty = false;
    for (std::size_t i = t + 1; i < d_.rows(); ++i) {
      if (d_(i, t) == 0) continue;
      mpz_class q;
      mpz_fdiv_q(q.get_mpz_t(), d_(i, t).get_mpz_t(), d_(t, t).get_mpz_t());
      add_row(i, t, -q);
      if (d_(i, t) != 0) dirty = true;
    }
    return dirty;
  }

  bool clear_row(std::size_t t) {
    bool dirty = false;
    for (std::size_t j = t + 1; j < d_.cols(); ++j) {
      if (d_(t, j) == 0) continue;
      mpz_class q;
      mpz_fdiv_q(q.get_mpz_t(), d_(t, j).get_mpz_t(), d_(t, t).get_mpz_t());
      add_col(j, t, -q);
      if (d_(t, j) != 0) dirty = true;
    }
    return dirty;
  }

  // If some entry of the trailing block is not divisible by the pivot,
  // add its row into row t and report that another pass is needed.
  bool fix_divisibility(std::size_t t) {
    for (std::size_t i = t + 1; i < d_.rows(); ++i)
      for (std::size_t j = t + 1; j < d_.cols(); ++j)
        if (d_(i, j) % d_(t, t) != 0) {
          add_row(t, i, 1);
          return true;
        }
    return false;
  }

  void swap_rows(std::size_t a, std::size_t b) {
    if (a == b) return;
    d_.swap_rows(a, b);
    if (track_) u_.swap_rows(a, b);
  }

  void swap_cols(std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t i = 0; i < d_.rows(); ++i) std::swap(d_(i, a), d_(i, b));
    if (track_)
      for (std::size_t i = 0; i < v_.rows(); ++i) std::swap(v_(i, a), v_(i, b));
  }

  // row_dst += k * row_src
  void add_row(std::size_t dst, std::size_t src, const mpz_class& k) {
    for (std::size_t j = 0; j < d_.cols(); ++j)
      if (d_(src, j) != 0) d_(dst, j) += k * d_(src, j);
    if (track_)
      for (std::size_t j = 0; j < u_.cols(); ++j)
        if (u_(src, j) != 0) u_(dst, j) += k * u_(src, j);
  }

  // col_dst += k * col_src
  void add_col(std::size_t dst, std::size_t src, const mpz_class& k) {
    for (std::size_t i = 0; i < d_.rows(); ++i)
      if (d_(i, src) != 0) d_(i, dst) += k * d_(i, src);
    if (track_)
      for (std::size_t i = 0; i < v_.rows(); ++i)
        if (v_(i, src) != 0) v_(i, dst) += k * v_(i, src);
  }

  void negate_row(std::size_t t) {
    for (std::size_t j = 0; j < d_.cols(); ++j) d_(t, j) = -d_(t, j);
    if (track_)
      for (std::size_t j = 0; j < u_.cols(); ++j) u_(t, j) = -u_(t, j);
  }

  bool track_;
};

}  // namespace

std::vector<mpz_class> SmithDecomposition::diagonal() const {
  std::vector<mpz_class> out;
  for (std::size_t i = 0; i < std::min(d.rows(), d.cols()); ++i) out.push_back(d(i, i));
  return out;
}

std::size_t SmithDecomposition::rank() const {
  std::size_t r = 0;
  for (const auto& x : diagonal())
    if (x != 0) ++r;
  return r;
}

std::vector<mpz_class> SmithDecomposition::torsion() const {
  std::vector<mpz_class> out;
  for (const auto& x : diagonal())
    if (x > 1) out.push_back(x);
  return out;
}

SmithDecomposition smith_normal_form(const ZMatrix& m) {
  SmithReducer r(m, true);
  r.run();
  return SmithDecomposition{std::move(r.u_), std::move(r.v_), std::move(r.d_)};
}

std::vector<mpz_class> smith_diagonal(const ZMatrix& m) {
  SmithReducer r(m, false);
  r.run();
  std::vector<mpz_class> out;
  for (std::size_t i = 0; i < std::min(m.rows(), m.cols()); ++i) out.push_back(r.d_(i, i));
  return out;
}

mpz_class determinant(const ZMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("determinant: matrix not square");
  // Bareiss fraction-free elimination.
  ZMatrix a = m;
  const std::size_t n = a.rows();
  if (n == 0) return 1;
  int sign = 1;
  mpz_class prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a(k, k) == 0) {
      std::size_t p = k + 1;
      while (p < n && a(p, k) == 0) ++p;
      if (p == n) return 0;
      a.swap_rows(k, p);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) {
        a(i, j) = a(i, j) * a(k, k) - a(i, k) * a(k, j);
        mpz_divexact(a(i, j).get_mpz_t(), a(i, j).get_mpz_t(), prev.get_mpz_t());
      }
    prev = a(k, k);
  }
  return sign * a(n - 1, n - 1);
}

}  // namespace tiledeform
