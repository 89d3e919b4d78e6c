#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace marlab {

/// Error type for all domain-level failures (bad constructions, violated
/// preconditions, undefined quantities). Parse errors carry line numbers
/// via ParseError in model_io.hpp.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Exact rational number backed by GMP. Always canonical: lowest terms,
/// positive denominator. Probabilities, means and their differences are
/// all carried as Rational; probability range checks happen at the
/// call sites that require them.
class Rational {
public:
    Rational() : v_(0) {}
    Rational(long n) : v_(n) {}               // NOLINT: implicit by design
    Rational(int n) : v_(n) {}                // NOLINT
    Rational(long num, long den);
    explicit Rational(mpq_class v) : v_(std::move(v)) { v_.canonicalize(); }

    /// Accepts "p/q" or a bare integer, with optional leading '-'.
    /// Requires q > 0. Returns nullopt on malformed input.
    static std::optional<Rational> parse(std::string_view text);

    /// Canonical text form: "p/q", or just "p" when the denominator is 1.
    std::string str() const;

    std::string numerator_str() const { return v_.get_num().get_str(); }
    std::string denominator_str() const { return v_.get_den().get_str(); }

    int sign() const { return sgn(v_); }
    bool is_zero() const { return sgn(v_) == 0; }
    bool is_probability() const { return sgn(v_) >= 0 && v_ <= 1; }

    /// Lossy conversion used only for figure geometry, never for decisions.
    double to_double() const { return v_.get_d(); }

    const mpq_class& raw() const { return v_; }

    Rational operator-() const { return Rational(mpq_class(-v_)); }
    Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
    Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
    Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
    Rational& operator/=(const Rational& o);

    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

    friend bool operator==(const Rational& a, const Rational& b) {
        return mpq_cmp(a.v_.get_mpq_t(), b.v_.get_mpq_t()) == 0;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return mpq_cmp(a.v_.get_mpq_t(), b.v_.get_mpq_t()) < 0;
    }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

private:
    mpq_class v_;
};

}  // namespace marlab
