#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ncdl {

// Exact rational over 128-bit integers. Every finite double converts exactly (it is
// a dyadic rational), which is what the tile checks rely on.
class Rational {
public:
    using i128 = __int128;
    Rational() = default;
    Rational(int64_t n) : n_(n), d_(1) {}  // NOLINT(google-explicit-constructor)
    Rational(i128 n, i128 d);
    static Rational from_double(double x);

    Rational operator+(const Rational& o) const;
    Rational operator-(const Rational& o) const;
    Rational operator*(const Rational& o) const;
    Rational operator/(const Rational& o) const;
    Rational operator-() const { return Rational(-n_, d_); }
    bool operator==(const Rational& o) const { return n_ == o.n_ && d_ == o.d_; }
    bool operator<(const Rational& o) const;
    bool operator<=(const Rational& o) const { return !(o < *this); }
    double to_double() const { return static_cast<double>(n_) / static_cast<double>(d_); }
    std::string str() const;

private:
    i128 n_ = 0, d_ = 1;
};

}  // namespace ncdl
