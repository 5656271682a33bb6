#pragma once

#include <cstddef>
#include <vector>

namespace ckrf {

// Compensated double-double scalar: value = hi + lo, |lo| <= ulp(hi)/2.
// Potentials live on [-30,30] where curvature content decays like e^{-|s|}
// down to ~1e-13 of the stored O(1) values; plain doubles lose the second
// difference entirely there, so the stored unknowns carry a compensation term.
struct dd {
    double hi = 0.0;
    double lo = 0.0;

    dd() = default;
    dd(double h) : hi(h), lo(0.0) {}
    dd(double h, double l) : hi(h), lo(l) {}

    double value() const { return hi + lo; }
};

inline dd two_sum(double a, double b) {
    double s = a + b;
    double bb = s - a;
    double err = (a - (s - bb)) + (b - bb);
    return {s, err};
}

// |a| >= |b| assumed.
inline dd quick_two_sum(double a, double b) {
    double s = a + b;
    return {s, b - (s - a)};
}

inline dd add(const dd& a, double b) {
    dd s = two_sum(a.hi, b);
    return quick_two_sum(s.hi, s.lo + a.lo);
}

inline dd add(const dd& a, const dd& b) {
    dd s = two_sum(a.hi, b.hi);
    return quick_two_sum(s.hi, s.lo + a.lo + b.lo);
}

inline dd sub(const dd& a, const dd& b) {
    dd s = two_sum(a.hi, -b.hi);
    return quick_two_sum(s.hi, s.lo + a.lo - b.lo);
}

inline dd scale2(const dd& a) { return {2.0 * a.hi, 2.0 * a.lo}; } // exact

// Vector of compensated values.
struct DDVec {
    std::vector<dd> v;

    DDVec() = default;
    explicit DDVec(std::size_t n, double init = 0.0) : v(n, dd(init)) {}
    std::size_t size() const { return v.size(); }
    dd& operator[](std::size_t i) { return v[i]; }
    const dd& operator[](std::size_t i) const { return v[i]; }

    std::vector<double> values() const {
        std::vector<double> out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].value();
        return out;
    }

    void add_inplace(const std::vector<double>& delta) {
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = add(v[i], delta[i]);
    }

    static DDVec from_values(const std::vector<double>& hi) {
        DDVec out(hi.size());
        for (std::size_t i = 0; i < hi.size(); ++i) out.v[i] = dd(hi[i]);
        return out;
    }

    static DDVec from_parts(const std::vector<double>& hi, const std::vector<double>& lo) {
        DDVec out(hi.size());
        for (std::size_t i = 0; i < hi.size(); ++i) out.v[i] = dd(hi[i], lo[i]);
        return out;
    }
};

} // namespace ckrf
