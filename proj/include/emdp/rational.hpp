#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace emdp {

using Rational = mpq_class;

// Accepts "a", "-a" or "a/b" with b > 0. Returns nullopt on malformed text.
std::optional<Rational> parse_rational(std::string_view text);

// "a" for integers, "a/b" otherwise.
std::string to_string(const Rational& q);

Rational make_rational(std::int64_t num, std::int64_t den = 1);

mpz_class floor_div(const Rational& q);
mpz_class ceil_div(const Rational& q);

// Narrowing helpers; throw std::overflow_error when the value does not fit.
std::int64_t to_int64(const mpz_class& z);

double to_double(const Rational& q);

// {"num": .., "den": ..}; integers when they fit in int64, decimal strings otherwise.
nlohmann::json rational_to_json(const Rational& q);
Rational rational_from_json(const nlohmann::json& j);

}  // namespace emdp
