#include "core/rational.hpp"

#include <cctype>

namespace marlab {

Rational::Rational(long num, long den) {
    if (den == 0) throw Error("rational with zero denominator");
    v_ = mpq_class(num, den);
    v_.canonicalize();
}

Rational& Rational::operator/=(const Rational& o) {
    if (o.is_zero()) throw Error("division by zero");
    v_ /= o.v_;
    return *this;
}

namespace {

bool is_integer_token(std::string_view s) {
    if (s.empty()) return false;
    size_t i = (s[0] == '-') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

}  // namespace

std::optional<Rational> Rational::parse(std::string_view text) {
    const size_t slash = text.find('/');
    if (slash == std::string_view::npos) {
        if (!is_integer_token(text)) return std::nullopt;
        return Rational(mpq_class(mpz_class(std::string(text), 10)));
    }
    const std::string_view num = text.substr(0, slash);
    const std::string_view den = text.substr(slash + 1);
    if (!is_integer_token(num) || !is_integer_token(den)) return std::nullopt;
    if (den[0] == '-') return std::nullopt;  // grammar requires q > 0
    mpz_class d(std::string(den), 10);
    if (d == 0) return std::nullopt;
    mpq_class q(mpz_class(std::string(num), 10), d);
    q.canonicalize();
    return Rational(std::move(q));
}

std::string Rational::str() const {
    if (v_.get_den() == 1) return v_.get_num().get_str();
    return v_.get_num().get_str() + "/" + v_.get_den().get_str();
}

}  // namespace marlab
