#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace plcert {

/// Exact arbitrary-precision rational, always in lowest terms with a
/// positive denominator. Thin value wrapper around GMP's mpq_class.
class Rational {
public:
    Rational() = default;
    Rational(int v) : q_(v) {}                 // NOLINT(google-explicit-constructor)
    Rational(long v) : q_(v) {}                // NOLINT(google-explicit-constructor)
    Rational(long long v) : q_(mpz_class(std::to_string(v))) {}  // NOLINT
    Rational(const mpz_class& num, const mpz_class& den);
    Rational(long num, long den);
    explicit Rational(mpq_class q);

    /// Parses `<int>` or `<int>/<posint>`. Throws std::invalid_argument.
    static Rational parse(std::string_view text);

    mpz_class numerator() const { return q_.get_num(); }
    mpz_class denominator() const { return q_.get_den(); }
    const mpq_class& raw() const { return q_; }

    bool is_integer() const;
    int sign() const { return sgn(q_); }
    Rational abs() const;

    /// Larger of the numerator and denominator bit lengths.
    std::size_t bits() const;

    /// Always "num/den", including "n/1" for integers.
    std::string str() const;
    /// "n" for integers, "num/den" otherwise.
    std::string short_str() const;
    double to_double() const { return q_.get_d(); }

    Rational& operator+=(const Rational& o);
    Rational& operator-=(const Rational& o);
    Rational& operator*=(const Rational& o);
    Rational& operator/=(const Rational& o);

    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
    friend Rational operator-(const Rational& a) { return Rational(mpq_class(-a.q_)); }

    friend bool operator==(const Rational& a, const Rational& b) { return cmp(a.q_, b.q_) == 0; }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        const int c = cmp(a.q_, b.q_);
        return c < 0 ? std::strong_ordering::less
                     : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r);

private:
    mpq_class q_;
};

Rational min(const Rational& a, const Rational& b);
Rational max(const Rational& a, const Rational& b);
Rational pow2(unsigned exponent);

}  // namespace plcert

template <>
struct std::hash<plcert::Rational> {
    std::size_t operator()(const plcert::Rational& r) const noexcept {
        return std::hash<std::string>{}(r.str());
    }
};
