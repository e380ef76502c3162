#pragma once

#include <array>
#include <cmath>

#include "dcg/dual.hpp"

namespace dcg {

// Small fixed-size vector in R^4, templated so geometry code can run on duals.
template <class T>
struct V4 {
  std::array<T, 4> c{};

  V4() : c{T(0), T(0), T(0), T(0)} {}
  V4(T a, T b, T d, T e) : c{a, b, d, e} {}

  T& operator[](int i) { return c[i]; }
  const T& operator[](int i) const { return c[i]; }

  V4& operator+=(const V4& o) {
    for (int i = 0; i < 4; ++i) c[i] += o.c[i];
    return *this;
  }
  V4& operator-=(const V4& o) {
    for (int i = 0; i < 4; ++i) c[i] -= o.c[i];
    return *this;
  }
  V4& operator*=(const T& s) {
    for (int i = 0; i < 4; ++i) c[i] *= s;
    return *this;
  }
  friend V4 operator+(V4 a, const V4& b) { return a += b; }
  friend V4 operator-(V4 a, const V4& b) { return a -= b; }
  friend V4 operator-(const V4& a) { return V4(-a[0], -a[1], -a[2], -a[3]); }
  friend V4 operator*(V4 a, const T& s) { return a *= s; }
  friend V4 operator*(const T& s, V4 a) { return a *= s; }
  friend V4 operator/(const V4& a, const T& s) { return V4(a[0] / s, a[1] / s, a[2] / s, a[3] / s); }
};

using Vec4 = V4<double>;

template <class T>
inline T dot(const V4<T>& a, const V4<T>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

template <class T>
inline T norm(const V4<T>& a) {
  using std::sqrt;
  return sqrt(dot(a, a));
}

template <class T>
inline V4<T> to_dual_vec(const Vec4& v);

template <>
inline V4<double> to_dual_vec<double>(const Vec4& v) {
  return v;
}

template <>
inline V4<Dual> to_dual_vec<Dual>(const Vec4& v) {
  return V4<Dual>(Dual(v[0]), Dual(v[1]), Dual(v[2]), Dual(v[3]));
}

inline Vec4 value_of(const V4<Dual>& v) { return Vec4(v[0].v, v[1].v, v[2].v, v[3].v); }
inline Vec4 value_of(const Vec4& v) { return v; }

// Generalized cross product: <cross4(a,b,c), d> = det[a,b,c,d].
template <class T>
inline V4<T> cross4(const V4<T>& a, const V4<T>& b, const V4<T>& c) {
  auto m3 = [&](int i, int j, int k) {
    return a[i] * (b[j] * c[k] - b[k] * c[j]) - a[j] * (b[i] * c[k] - b[k] * c[i]) +
           a[k] * (b[i] * c[j] - b[j] * c[i]);
  };
  // Expansion of det[a,b,c,e_l] along the last column.
  return V4<T>(-m3(1, 2, 3), m3(0, 2, 3), -m3(0, 1, 3), m3(0, 1, 2));
}

template <class T>
inline T det4(const V4<T>& a, const V4<T>& b, const V4<T>& c, const V4<T>& d) {
  return dot(cross4(a, b, c), d);
}

}  // namespace dcg
