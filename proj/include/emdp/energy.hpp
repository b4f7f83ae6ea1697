#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "emdp/model.hpp"
#include "emdp/strategy.hpp"

namespace emdp {

// A non-negative energy level or infinity.
class Level {
 public:
  constexpr Level() = default;
  constexpr explicit Level(std::int64_t v) : value_(v) {}
  static constexpr Level infinity() {
    Level l;
    l.value_.reset();
    return l;
  }

  constexpr bool is_finite() const { return value_.has_value(); }
  constexpr std::int64_t value() const { return *value_; }

  friend constexpr bool operator==(const Level&, const Level&) = default;
  friend constexpr std::strong_ordering operator<=>(const Level& a, const Level& b) {
    if (a.is_finite() && b.is_finite()) return a.value() <=> b.value();
    if (a.is_finite()) return std::strong_ordering::less;
    if (b.is_finite()) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

 private:
  std::optional<std::int64_t> value_{0};
};

using LevelMap = std::vector<Level>;

std::string to_string(const Level& l);  // "inf" for infinity

// Least n with s(n) safe, treating stochastic states as adversarial.
LevelMap min_safe(const Emdp& e);

// Memoryless deterministic strategy keeping min_safe(s) + E(s,t) >= min_safe(t).
MachinePtr safe_strategy(const Emdp& e);
MachinePtr safe_strategy(const Emdp& e, const LevelMap& safe_levels);

// Least n with s(n) pumpable.
LevelMap min_pump(const Emdp& e);

// Memoryless strategy pumping from every pumpable configuration.
MachinePtr pumping_strategy(const Emdp& e);
MachinePtr pumping_strategy(const Emdp& e, const LevelMap& pump_levels);

// Model in which every transition e = (s, s') is routed through a stochastic state that
// either loops with update max_update(e) + 1 or continues to s', each with probability 1/2.
Emdp safety_gadget(const Emdp& e);

// The detour construction used by min_pump. Each transition e = (s, t) becomes
// s -> s_e (carrying E, r, Prob of e), s_e -> t, and the decrement pair s_e -> s'_e -> s_e
// with updates -1 and 0. States 0..|S|-1 are the original ones.
struct PumpGadget {
  Emdp model;
  std::vector<bool> buchi;  // the s'_e states
};
PumpGadget pump_gadget(const Emdp& e);

// Lifting of safety thresholds on an arbitrary game, starting from `floor` (values can only
// grow) and clamping anything above `cap` to infinity.
LevelMap lift_safe_levels(const Emdp& e, LevelMap floor, std::int64_t cap);

}  // namespace emdp
