#ifndef STDD_VEC_HPP
#define STDD_VEC_HPP

#include <cmath>

namespace stdd {

/// Point or vector in the plane. One-dimensional problems leave y at zero.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  Vec2& operator*=(double a) {
    x *= a;
    y *= a;
    return *this;
  }
};

inline Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
inline Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
inline Vec2 operator*(double a, Vec2 v) { return v *= a; }
inline Vec2 operator*(Vec2 v, double a) { return v *= a; }
inline Vec2 operator-(const Vec2& v) { return {-v.x, -v.y}; }

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
inline bool is_finite(const Vec2& a) { return std::isfinite(a.x) && std::isfinite(a.y); }

/// Row-major 2x2 matrix.
struct Mat2 {
  double xx = 0.0;
  double xy = 0.0;
  double yx = 0.0;
  double yy = 0.0;

  static Mat2 identity(double d = 1.0) { return {d, 0.0, 0.0, d}; }
};

inline Vec2 operator*(const Mat2& m, const Vec2& v) {
  return {m.xx * v.x + m.xy * v.y, m.yx * v.x + m.yy * v.y};
}

}  // namespace stdd

#endif  // STDD_VEC_HPP
