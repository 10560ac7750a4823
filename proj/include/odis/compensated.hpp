#pragma once

#include <cmath>

namespace odis {

// Error-free transformations and a small double-double type.
//
// The constraint-tracking recursion carries values of order 1e6 while the
// identity it must preserve is checked at 1e-9 absolute. Accumulating the
// consensus products and increments in plain binary64 lets per-step storage
// rounding (~eps * |y|) random-walk past that gate over a few hundred steps,
// so the tracking state is kept as an unevaluated (hi, lo) pair and rounded
// only when recorded.

struct DD {
    double hi = 0.0;
    double lo = 0.0;

    DD() = default;
    explicit DD(double v) : hi(v), lo(0.0) {}
    DD(double h, double l) : hi(h), lo(l) {}

    double value() const { return hi; }
};

/// Knuth two-sum: a + b = s + err exactly.
inline DD two_sum(double a, double b) {
    const double s = a + b;
    const double bp = s - a;
    const double err = (a - (s - bp)) + (b - bp);
    return {s, err};
}

/// Dekker two-prod via fma: a * b = p + err exactly.
inline DD two_prod(double a, double b) {
    const double p = a * b;
    const double err = std::fma(a, b, -p);
    return {p, err};
}

inline DD dd_add(DD a, double b) {
    DD s = two_sum(a.hi, b);
    s.lo += a.lo;
    DD r = two_sum(s.hi, s.lo);
    return r;
}

inline DD dd_add(DD a, DD b) {
    DD s = two_sum(a.hi, b.hi);
    s.lo += a.lo + b.lo;
    DD r = two_sum(s.hi, s.lo);
    return r;
}

inline DD dd_sub(DD a, DD b) { return dd_add(a, DD{-b.hi, -b.lo}); }

/// a * b for double-double a, double b.
inline DD dd_mul(DD a, double b) {
    DD p = two_prod(a.hi, b);
    p.lo += a.lo * b;
    DD r = two_sum(p.hi, p.lo);
    return r;
}

}  // namespace odis
