#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "emdp/energy.hpp"
#include "emdp/graphs.hpp"
#include "emdp/model.hpp"

namespace emdp::testing {

Emdp load_fixture(const std::string& name);
std::string fixture_path(const std::string& name);

struct RandomParams {
  std::size_t max_states = 4;
  std::int64_t max_update = 2;
  std::int64_t max_reward = 3;
  std::size_t max_out = 3;
};

// A valid random model. Probabilities have denominators up to 6.
Emdp random_emdp(std::mt19937_64& rng, const RandomParams& p = {});

// Every maximal end component, found by checking all state subsets.
std::vector<Mec> brute_force_mecs(const Emdp& e);

// Minimal safe levels from an explicit game on counters 0..cap (upward moves saturate).
LevelMap oracle_min_safe(const Emdp& e, std::int64_t cap);

// Minimal pumping levels from an explicit almost-sure Buchi game on the detour gadget
// over counters 0..cap.
LevelMap oracle_min_pump(const Emdp& e, std::int64_t cap);

}  // namespace emdp::testing
