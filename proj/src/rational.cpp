#include "plcert/rational.hpp"

#include <cctype>
#include <ostream>
#include <stdexcept>

namespace plcert {

Rational::Rational(const mpz_class& num, const mpz_class& den) : q_(num, den) {
    if (den == 0) {
        throw std::invalid_argument("zero denominator");
    }
    q_.canonicalize();
}

Rational::Rational(long num, long den) : Rational(mpz_class(num), mpz_class(den)) {}

Rational::Rational(mpq_class q) : q_(std::move(q)) {
    if (q_.get_den() == 0) {
        throw std::invalid_argument("zero denominator");
    }
    q_.canonicalize();
}

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) {
        return false;
    }
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) {
            return false;
        }
    }
    return true;
}

}  // namespace

Rational Rational::parse(std::string_view text) {
    std::string_view body = text;
    bool negative = false;
    if (!body.empty() && body.front() == '-') {
        negative = true;
        body.remove_prefix(1);
    }
    const auto slash = body.find('/');
    const std::string_view num = body.substr(0, slash);
    const std::string_view den = slash == std::string_view::npos ? std::string_view{} : body.substr(slash + 1);
    if (!all_digits(num) || (slash != std::string_view::npos && !all_digits(den))) {
        throw std::invalid_argument("malformed rational literal '" + std::string(text) + "'");
    }
    mpz_class n(std::string(num), 10);
    mpz_class d = slash == std::string_view::npos ? mpz_class(1) : mpz_class(std::string(den), 10);
    if (d == 0) {
        throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    }
    if (negative) {
        n = -n;
    }
    return Rational(n, d);
}

bool Rational::is_integer() const { return q_.get_den() == 1; }

Rational Rational::abs() const { return Rational(mpq_class(::abs(q_))); }

std::size_t Rational::bits() const {
    const std::size_t nb = q_.get_num() == 0 ? 1 : mpz_sizeinbase(q_.get_num_mpz_t(), 2);
    const std::size_t db = mpz_sizeinbase(q_.get_den_mpz_t(), 2);
    return nb > db ? nb : db;
}

std::string Rational::str() const {
    return q_.get_num().get_str() + "/" + q_.get_den().get_str();
}

std::string Rational::short_str() const {
    return is_integer() ? q_.get_num().get_str() : str();
}

Rational& Rational::operator+=(const Rational& o) {
    q_ += o.q_;
    return *this;
}

Rational& Rational::operator-=(const Rational& o) {
    q_ -= o.q_;
    return *this;
}

Rational& Rational::operator*=(const Rational& o) {
    q_ *= o.q_;
    return *this;
}

Rational& Rational::operator/=(const Rational& o) {
    if (o.q_ == 0) {
        throw std::domain_error("division by zero");
    }
    q_ /= o.q_;
    return *this;
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.short_str(); }

Rational min(const Rational& a, const Rational& b) { return b < a ? b : a; }
Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

Rational pow2(unsigned exponent) {
    mpz_class p;
    mpz_ui_pow_ui(p.get_mpz_t(), 2, exponent);
    return Rational(p, mpz_class(1));
}

}  // namespace plcert
