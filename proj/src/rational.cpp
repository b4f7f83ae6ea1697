#include "emdp/rational.hpp"

#include <cctype>
#include <stdexcept>

namespace emdp {

namespace {

bool is_integer_literal(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = (s.front() == '-' || s.front() == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

nlohmann::json integer_to_json(const mpz_class& z) {
  if (z.fits_slong_p()) return static_cast<std::int64_t>(z.get_si());
  return z.get_str();
}

mpz_class integer_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) return mpz_class(std::to_string(j.get<std::int64_t>()));
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (!is_integer_literal(s)) throw std::invalid_argument("bad integer: " + s);
    return mpz_class(s[0] == '+' ? s.substr(1) : s);
  }
  throw std::invalid_argument("expected integer in rational");
}

}  // namespace

std::optional<Rational> parse_rational(std::string_view text) {
  const auto slash = text.find('/');
  const auto num = text.substr(0, slash);
  if (!is_integer_literal(num)) return std::nullopt;
  mpz_class n(std::string(num[0] == '+' ? num.substr(1) : num));
  mpz_class d(1);
  if (slash != std::string_view::npos) {
    const auto den = text.substr(slash + 1);
    if (!is_integer_literal(den) || den[0] == '-' || den[0] == '+') return std::nullopt;
    d = mpz_class(std::string(den));
    if (d == 0) return std::nullopt;
  }
  Rational q(n, d);
  q.canonicalize();
  return q;
}

std::string to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Rational make_rational(std::int64_t num, std::int64_t den) {
  Rational q(mpz_class(std::to_string(num)), mpz_class(std::to_string(den)));
  q.canonicalize();
  return q;
}

mpz_class floor_div(const Rational& q) {
  mpz_class r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

mpz_class ceil_div(const Rational& q) {
  mpz_class r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

std::int64_t to_int64(const mpz_class& z) {
  if (!z.fits_slong_p()) throw std::overflow_error("integer exceeds 64 bits: " + z.get_str());
  return z.get_si();
}

double to_double(const Rational& q) { return q.get_d(); }

nlohmann::json rational_to_json(const Rational& q) {
  return {{"num", integer_to_json(q.get_num())}, {"den", integer_to_json(q.get_den())}};
}

Rational rational_from_json(const nlohmann::json& j) {
  Rational q(integer_from_json(j.at("num")), integer_from_json(j.at("den")));
  if (q.get_den() == 0) throw std::invalid_argument("zero denominator");
  q.canonicalize();
  return q;
}

}  // namespace emdp
