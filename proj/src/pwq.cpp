#include "fusedl0/pwq.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace fusedl0 {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCoefTol = 1e-12;   // coefficient agreement for merging
constexpr double kSliverTol = 1e-14; // crossing slivers below this width go
constexpr double kSnapRel = 1e-12;   // root-to-endpoint snapping

bool coef_close(double x, double y) {
  return std::abs(x - y) <= kCoefTol * std::max({1.0, std::abs(x), std::abs(y)});
}

bool same_shape(const Piece& p, const Piece& q) {
  return p.tag == q.tag && coef_close(p.a, q.a) && coef_close(p.b, q.b) &&
         coef_close(p.c, q.c);
}

bool piece_order(const Piece& p, const Piece& q) {
  if (p.lo != q.lo) return p.lo < q.lo;
  if (p.hi != q.hi) return p.hi < q.hi;
  return p.tag < q.tag;
}

double snap(double r, double lo, double hi) {
  const double width = hi - lo;
  const double tol =
      kSnapRel * (std::isfinite(width) ? std::max(width, 1.0)
                                       : std::max(1.0, std::abs(r)));
  if (std::isfinite(lo) && std::abs(r - lo) <= tol) return lo;
  if (std::isfinite(hi) && std::abs(r - hi) <= tol) return hi;
  return r;
}

// interval(s) of [p.lo, p.hi] where p.value <= c
void keep_below(const Piece& p, double c, std::vector<Piece>& out) {
  const double m = p.c - c;  // p.value - c = a x^2 + b x + m
  auto emit = [&](double lo, double hi) {
    lo = snap(lo, p.lo, p.hi);
    hi = snap(hi, p.lo, p.hi);
    lo = std::max(lo, p.lo);
    hi = std::min(hi, p.hi);
    if (lo > hi) return;
    out.push_back(Piece{lo, hi, p.a, p.b, p.c, p.tag});
  };

  if (p.is_singleton()) {
    if (p.value(p.lo) <= c) out.push_back(p);
    return;
  }
  if (p.a == 0.0 && p.b == 0.0) {
    if (m <= 0.0) out.push_back(p);
    return;
  }
  if (p.a == 0.0) {
    const double r = -m / p.b;
    if (p.b > 0.0)
      emit(p.lo, r);
    else
      emit(r, p.hi);
    return;
  }

  const double disc = p.b * p.b - 4.0 * p.a * m;
  if (p.a > 0.0) {
    if (disc < 0.0) return;  // strictly above c everywhere
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (p.b + std::copysign(sq, p.b));
    double r1, r2;
    if (q == 0.0) {
      r1 = r2 = -p.b / (2.0 * p.a);
    } else {
      r1 = q / p.a;
      r2 = m / q;
    }
    if (r1 > r2) std::swap(r1, r2);
    emit(r1, r2);
  } else {
    // concave: below c outside the roots
    if (disc < 0.0) {
      out.push_back(p);  // below c everywhere
      return;
    }
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (p.b + std::copysign(sq, p.b));
    double r1 = q / p.a;
    double r2 = (q == 0.0) ? r1 : m / q;
    if (r1 > r2) std::swap(r1, r2);
    emit(p.lo, r1);
    emit(r2, p.hi);
  }
}

}  // namespace

PiecewiseQuadratic PiecewiseQuadratic::single(double a, double b, double c,
                                              double lo, double hi, int tag) {
  if (lo > hi) throw std::invalid_argument("pwq: piece with lo > hi");
  PiecewiseQuadratic f;
  f.pieces_.push_back(Piece{lo, hi, a, b, c, tag});
  return f;
}

PiecewiseQuadratic PiecewiseQuadratic::from_pieces(std::vector<Piece> pieces) {
  for (const Piece& p : pieces)
    if (p.lo > p.hi) throw std::invalid_argument("pwq: piece with lo > hi");
  PiecewiseQuadratic f;
  f.pieces_ = std::move(pieces);
  f.normalize();
  return f;
}

void PiecewiseQuadratic::normalize() {
  std::erase_if(pieces_, [](const Piece& p) { return p.lo > p.hi; });
  std::sort(pieces_.begin(), pieces_.end(), piece_order);

  // duplicate singletons at the same point: keep the lowest (value, tag)
  std::vector<Piece> kept;
  kept.reserve(pieces_.size());
  for (const Piece& p : pieces_) {
    if (!kept.empty() && p.is_singleton() && kept.back().is_singleton() &&
        kept.back().lo == p.lo) {
      const double vk = kept.back().value(p.lo), vp = p.value(p.lo);
      if (vp < vk || (vp == vk && p.tag < kept.back().tag)) kept.back() = p;
      continue;
    }
    kept.push_back(p);
  }
  pieces_ = std::move(kept);

  // drop singletons strictly dominated by another covering piece
  std::vector<char> dominated(pieces_.size(), 0);
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const Piece& s = pieces_[i];
    if (!s.is_singleton()) continue;
    const double v = s.value(s.lo);
    for (std::size_t j = 0; j < pieces_.size(); ++j) {
      if (j == i || !pieces_[j].contains(s.lo)) continue;
      if (pieces_[j].value(s.lo) < v) {
        dominated[i] = 1;
        break;
      }
    }
  }
  std::size_t w = 0;
  for (std::size_t i = 0; i < pieces_.size(); ++i)
    if (!dominated[i]) pieces_[w++] = pieces_[i];
  pieces_.resize(w);

  // merge adjacent pieces with matching coefficients and tag
  std::vector<Piece> merged;
  merged.reserve(pieces_.size());
  for (const Piece& p : pieces_) {
    if (!merged.empty()) {
      Piece& q = merged.back();
      const double touch = kCoefTol * std::max(1.0, std::abs(q.hi));
      if (same_shape(q, p) && p.lo <= q.hi + touch) {
        q.hi = std::max(q.hi, p.hi);
        continue;
      }
    }
    merged.push_back(p);
  }
  pieces_ = std::move(merged);
}

double PiecewiseQuadratic::eval(double x) const {
  double best = kInf;
  for (const Piece& p : pieces_) {
    if (p.lo > x) break;
    if (x <= p.hi) best = std::min(best, p.value(x));
  }
  return best;
}

std::pair<double, int> PiecewiseQuadratic::eval_with_tag(double x) const {
  double best = kInf;
  int tag = -1;
  for (const Piece& p : pieces_) {
    if (p.lo > x) break;
    if (x > p.hi) continue;
    const double v = p.value(x);
    if (v < best || (v == best && p.tag < tag)) {
      best = v;
      tag = p.tag;
    }
  }
  return {best, tag};
}

PiecewiseQuadratic PiecewiseQuadratic::add_quadratic(double a, double b,
                                                     double c) const {
  PiecewiseQuadratic f(*this);
  for (Piece& p : f.pieces_) {
    p.a += a;
    p.b += b;
    p.c += c;
  }
  return f;
}

PiecewiseQuadratic PiecewiseQuadratic::add_l0_box(double lambda2, double lo,
                                                  double hi) const {
  if (lo > hi) throw std::invalid_argument("pwq: add_l0_box with lo > hi");
  if (lambda2 < 0.0)
    throw std::invalid_argument("pwq: add_l0_box with negative lambda2");

  const bool zero_in_box = lo <= 0.0 && 0.0 <= hi;
  double v0 = kInf;
  int tag0 = -1;
  if (lambda2 > 0.0 && zero_in_box) std::tie(v0, tag0) = eval_with_tag(0.0);

  PiecewiseQuadratic f;
  f.pieces_.reserve(pieces_.size() + 1);
  for (Piece p : pieces_) {
    p.lo = std::max(p.lo, lo);
    p.hi = std::min(p.hi, hi);
    if (p.lo > p.hi) continue;
    p.c += lambda2;
    f.pieces_.push_back(p);
  }
  if (lambda2 > 0.0 && zero_in_box && std::isfinite(v0))
    f.pieces_.push_back(Piece{0.0, 0.0, 0.0, 0.0, v0, tag0});
  f.normalize();
  return f;
}

PiecewiseQuadratic PiecewiseQuadratic::min_with_constant(double c,
                                                         int tag_new) const {
  if (!std::isfinite(c))
    throw std::invalid_argument("pwq: min_with_constant with non-finite c");

  std::vector<Piece> kept;
  kept.reserve(pieces_.size() + 4);
  for (const Piece& p : pieces_) keep_below(p, c, kept);

  // crossing slivers: drop only when the value there matches the constant
  std::erase_if(kept, [&](const Piece& p) {
    const double w = p.hi - p.lo;
    if (w <= 0.0 || w >= kSliverTol) return false;
    const double mid = 0.5 * (p.lo + p.hi);
    return std::abs(p.value(mid) - c) <= 1e-9 * (1.0 + std::abs(c));
  });

  // union of the kept non-singleton intervals, then its closed complement
  std::vector<std::pair<double, double>> covered;
  for (const Piece& p : kept)
    if (!p.is_singleton()) covered.emplace_back(p.lo, p.hi);
  std::sort(covered.begin(), covered.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& iv : covered) {
    if (!merged.empty() && iv.first <= merged.back().second)
      merged.back().second = std::max(merged.back().second, iv.second);
    else
      merged.push_back(iv);
  }

  std::vector<Piece> result = std::move(kept);
  auto add_const = [&](double a, double b) {
    if (a > b) return;
    result.push_back(Piece{a, b, 0.0, 0.0, c, tag_new});
  };
  if (merged.empty()) {
    add_const(-kInf, kInf);
  } else {
    if (merged.front().first > -kInf) add_const(-kInf, merged.front().first);
    for (std::size_t i = 0; i + 1 < merged.size(); ++i)
      add_const(merged[i].second, merged[i + 1].first);
    if (merged.back().second < kInf) add_const(merged.back().second, kInf);
  }

  PiecewiseQuadratic f;
  f.pieces_ = std::move(result);
  f.normalize();
  return f;
}

MinPoint PiecewiseQuadratic::global_min() const {
  if (pieces_.empty())
    throw std::domain_error("pwq: global_min of an empty domain");

  bool found = false;
  MinPoint best{};
  auto offer = [&](double alpha, double value, int tag) {
    if (!found || value < best.value ||
        (value == best.value &&
         (alpha < best.alpha || (alpha == best.alpha && tag < best.tag)))) {
      best = MinPoint{alpha, value, tag};
      found = true;
    }
  };

  for (const Piece& p : pieces_) {
    if (p.is_singleton()) {
      offer(p.lo, p.value(p.lo), p.tag);
      continue;
    }
    if (p.a > 0.0) {
      const double v = std::clamp(-p.b / (2.0 * p.a), p.lo, p.hi);
      offer(v, p.value(v), p.tag);
      continue;
    }
    if (p.a == 0.0 && p.b == 0.0) {
      const double alpha =
          std::isfinite(p.lo) ? p.lo : std::clamp(0.0, p.lo, p.hi);
      offer(alpha, p.c, p.tag);
      continue;
    }
    // linear or concave: minimum sits on an endpoint
    if ((p.a < 0.0 || p.b > 0.0) && !std::isfinite(p.lo))
      throw std::domain_error("pwq: unbounded below");
    if ((p.a < 0.0 || p.b < 0.0) && !std::isfinite(p.hi))
      throw std::domain_error("pwq: unbounded below");
    const double vlo = p.value(p.lo), vhi = p.value(p.hi);
    if (vlo <= vhi)
      offer(p.lo, vlo, p.tag);
    else
      offer(p.hi, vhi, p.tag);
  }
  return best;
}

void PiecewiseQuadratic::dump(std::ostream& os) const {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(17);
  for (const Piece& p : pieces_)
    os << p.lo << ' ' << p.hi << ' ' << p.a << ' ' << p.b << ' ' << p.c << ' '
       << p.tag << '\n';
  os.flags(flags);
  os.precision(prec);
}

}  // namespace fusedl0
