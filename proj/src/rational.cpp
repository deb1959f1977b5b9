#include "ncdl/rational.hpp"

#include <limits>

namespace ncdl {

namespace {

using i128 = Rational::i128;

i128 gcd128(i128 a, i128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        const i128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

i128 mul_checked(i128 a, i128 b) {
    i128 r;
    if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("Rational: 128-bit overflow");
    return r;
}

i128 add_checked(i128 a, i128 b) {
    i128 r;
    if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("Rational: 128-bit overflow");
    return r;
}

std::string to_string(i128 v) {
    if (v == 0) return "0";
    const bool neg = v < 0;
    std::string s;
    while (v != 0) {
        const int digit = static_cast<int>(v % 10);
        s.insert(s.begin(), static_cast<char>('0' + (neg ? -digit : digit)));
        v /= 10;
    }
    return neg ? "-" + s : s;
}

}  // namespace

Rational::Rational(i128 n, i128 d) {
    if (d == 0) throw std::domain_error("Rational: zero denominator");
    if (d < 0) {
        n = -n;
        d = -d;
    }
    const i128 g = gcd128(n, d);
    n_ = g ? n / g : 0;
    d_ = g ? d / g : 1;
}

Rational Rational::from_double(double x) {
    if (!std::isfinite(x)) throw std::domain_error("Rational: non-finite value");
    int e = 0;
    const double m = std::frexp(x, &e);  // x = m 2^e, |m| in [0.5, 1)
    const auto mant = static_cast<i128>(std::ldexp(m, 53));
    e -= 53;
    if (e >= 0) {
        if (e > 70) throw std::overflow_error("Rational: exponent too large");
        return Rational(mant * (static_cast<i128>(1) << e), 1);
    }
    if (-e > 120) throw std::overflow_error("Rational: exponent too small");
    return Rational(mant, static_cast<i128>(1) << (-e));
}

Rational Rational::operator+(const Rational& o) const {
    const i128 g = gcd128(d_, o.d_);
    const i128 d = mul_checked(d_ / g, o.d_);
    return Rational(add_checked(mul_checked(n_, o.d_ / g), mul_checked(o.n_, d_ / g)), d);
}

Rational Rational::operator-(const Rational& o) const { return *this + (-o); }

Rational Rational::operator*(const Rational& o) const {
    const i128 g1 = gcd128(n_, o.d_), g2 = gcd128(o.n_, d_);
    const i128 a = g1 ? n_ / g1 : 0, b = g1 ? o.d_ / g1 : o.d_;
    const i128 c = g2 ? o.n_ / g2 : 0, d = g2 ? d_ / g2 : d_;
    return Rational(mul_checked(a, c), mul_checked(d, b));
}

Rational Rational::operator/(const Rational& o) const {
    if (o.n_ == 0) throw std::domain_error("Rational: division by zero");
    return *this * Rational(o.d_, o.n_);
}

bool Rational::operator<(const Rational& o) const { return (*this - o).n_ < 0; }

std::string Rational::str() const { return d_ == 1 ? to_string(n_) : to_string(n_) + "/" + to_string(d_); }

}  // namespace ncdl
