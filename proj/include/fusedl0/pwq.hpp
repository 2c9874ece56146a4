#pragma once

#include <cstddef>
#include <iosfwd>
#include <utility>
#include <vector>

namespace fusedl0 {

// One closed piece of a piecewise linear-quadratic function:
// value(x) = a*x^2 + b*x + c on [lo, hi]. lo == hi encodes a singleton;
// lo/hi may be -inf/+inf. The tag records the changepoint branch that
// generated the piece.
struct Piece {
  double lo = 0.0;
  double hi = 0.0;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  int tag = 0;

  double value(double x) const { return (a * x + b) * x + c; }
  bool is_singleton() const { return lo == hi; }
  bool contains(double x) const { return lo <= x && x <= hi; }
};

struct MinPoint {
  double alpha = 0.0;
  double value = 0.0;
  int tag = 0;
};

// Lower semicontinuous piecewise linear-quadratic function, stored as the
// pointwise minimum of closed pieces. Off-domain the value is +inf.
// Pieces may overlap: a lower singleton at 0 realizes the jump of
// lambda2*|x|_0, which keeps every piece closed and the min automatically lsc.
// Values are immutable; every operation returns a new function.
class PiecewiseQuadratic {
 public:
  PiecewiseQuadratic() = default;

  static PiecewiseQuadratic single(double a, double b, double c, double lo,
                                   double hi, int tag);
  static PiecewiseQuadratic from_pieces(std::vector<Piece> pieces);

  // min over covering pieces, +inf when no piece contains x
  double eval(double x) const;
  // value plus the tag of the attaining piece (ties: lower tag wins)
  std::pair<double, int> eval_with_tag(double x) const;

  // pointwise sum with a*x^2 + b*x + c on the existing domain
  PiecewiseQuadratic add_quadratic(double a, double b, double c) const;

  // adds lambda2*|x|_0 + indicator of [lo, hi]: restricts the domain,
  // shifts every piece by lambda2 and, when lambda2 > 0 and 0 is in the
  // current domain and in [lo, hi], inserts a singleton at 0 carrying the
  // pre-shift value so that eval(0) is unchanged
  PiecewiseQuadratic add_l0_box(double lambda2, double lo, double hi) const;

  // pointwise min with the constant c taken on all of R; regions where the
  // constant is strictly smaller carry tag_new, boundary ties stay with the
  // original piece
  PiecewiseQuadratic min_with_constant(double c, int tag_new) const;

  // global minimum; ties resolved to the smallest alpha, then smallest tag
  MinPoint global_min() const;

  const std::vector<Piece>& pieces() const { return pieces_; }
  std::size_t size() const { return pieces_.size(); }
  bool empty_domain() const { return pieces_.empty(); }

  // one piece per line: "lo hi a b c tag"
  void dump(std::ostream& os) const;

 private:
  std::vector<Piece> pieces_;  // sorted by (lo, hi, tag)

  void normalize();
};

}  // namespace fusedl0
