#include <doctest.h>

#include <random>

#include "emdp/digraph.hpp"
#include "emdp/finmdp.hpp"
#include "support.hpp"

using namespace emdp;
using emdp::testing::load_fixture;

namespace {

FiniteMdp drop_counter(const Emdp& e) {
  std::vector<MdpTransition> ts;
  for (const auto& tr : e.transitions()) ts.push_back({tr.src, tr.dst, tr.reward, tr.prob});
  return FiniteMdp(e.states(), ts);
}

// Best gain per state over every memoryless deterministic policy.
std::vector<Rational> brute_force_values(const FiniteMdp& m) {
  Policy policy = default_policy(m);
  std::vector<std::size_t> digit(m.num_states(), 0);
  std::optional<std::vector<Rational>> best;
  while (true) {
    for (std::size_t s = 0; s < m.num_states(); ++s) policy[s] = m.out(s)[digit[s]];
    const auto gain = analyze_chain(policy_chain(m, policy), false).gain;
    if (!best) {
      best = gain;
    } else {
      for (std::size_t s = 0; s < gain.size(); ++s) (*best)[s] = std::max((*best)[s], gain[s]);
    }
    std::size_t s = 0;
    while (s < m.num_states()) {
      const std::size_t width = m.is_stochastic(s) ? 1 : m.out(s).size();
      if (++digit[s] < width) break;
      digit[s++] = 0;
    }
    if (s == m.num_states()) break;
  }
  return *best;
}

double policy_count(const FiniteMdp& m) {
  double c = 1;
  for (std::size_t s = 0; s < m.num_states(); ++s) {
    if (!m.is_stochastic(s)) c *= static_cast<double>(m.out(s).size());
  }
  return c;
}

void check_solution(const FiniteMdp& m, const MeanPayoffResult& r) {
  CHECK(analyze_chain(policy_chain(m, r.policy), false).gain == r.value);
  for (std::size_t s = 0; s < m.num_states(); ++s) {
    if (m.is_stochastic(s)) continue;
    const auto& d = r.strategy->next(s, {});
    CHECK(d == Distribution::dirac(r.policy[s]));
  }
}

}  // namespace

TEST_CASE("single loop has its reward as value") {
  const auto m = drop_counter(load_fixture("single"));
  const auto r = solve_mean_payoff(m);
  CHECK(r.value == std::vector<Rational>{3});
  CHECK(mean_payoff_values_lp(m) == r.value);
}

TEST_CASE("two loops joined by zero edges") {
  const auto e = parse_emdp(
      "state a controllable\nstate b controllable\n"
      "trans a -> a update=0 reward=1\ntrans a -> b update=0 reward=0\n"
      "trans b -> b update=0 reward=4\ntrans b -> a update=0 reward=0\n");
  const auto m = drop_counter(e);
  const auto r = solve_mean_payoff(m);
  CHECK(r.value == std::vector<Rational>{4, 4});
  CHECK(brute_force_values(m) == r.value);
  check_solution(m, r);
}

TEST_CASE("loop against a fair gamble") {
  // Through t the cycle s -> t -> s pays (0 + (10 - 10) / 2) / 2 = 0, the same as s's loop.
  const auto e = parse_emdp(
      "state s controllable\nstate t stochastic\n"
      "trans s -> s update=0 reward=0\ntrans s -> t update=0 reward=0\n"
      "trans t -> s update=0 reward=10 prob=1/2\ntrans t -> s update=0 reward=-10 prob=1/2\n");
  const auto m = drop_counter(e);
  CHECK(solve_mean_payoff(m).value == std::vector<Rational>{0, 0});

  // Tilting the gamble makes the cycle pay (0 + 2) / 2 = 1.
  const auto tilted = parse_emdp(
      "state s controllable\nstate t stochastic\n"
      "trans s -> s update=0 reward=0\ntrans s -> t update=0 reward=0\n"
      "trans t -> s update=0 reward=10 prob=1/2\ntrans t -> s update=0 reward=-6 prob=1/2\n");
  const auto r = solve_mean_payoff(drop_counter(tilted));
  CHECK(r.value == std::vector<Rational>{1, 1});
  CHECK(r.policy[0] == 1);
}

TEST_CASE("validation of finite MDPs") {
  FiniteMdp bad({{"x", StateKind::Controllable}, {"y", StateKind::Stochastic}},
                {{0, 1, Rational(0), std::nullopt}, {1, 0, Rational(0), Rational(3, 4)}});
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  FiniteMdp dead({{"x", StateKind::Controllable}}, {});
  CHECK_THROWS_AS(dead.validate(), ValidationError);
  CHECK_THROWS_AS(FiniteMdp({{"x", StateKind::Controllable}}, {{0, 3, Rational(0), std::nullopt}}),
                  ValidationError);
}

TEST_CASE("fig3 unfolded on [0, 2]") {
  const auto fig3 = load_fixture("fig3");
  const auto u = unfold(fig3, 0, 2, Rational(-1));
  CHECK(u.mdp.num_states() == 7);
  CHECK(u.sink == 6);
  const auto r = solve_mean_payoff(u.mdp);
  const StateId s = fig3.state_id("s"), t = fig3.state_id("t");
  for (std::int64_t k = 0; k <= 2; ++k) CHECK(r.value[*u.index({s, k})] == 0);
  CHECK(r.value[*u.index({t, 1})] == 0);
  // t(0) and t(2) leave the band with probability 1/2.
  CHECK(r.value[*u.index({t, 0})] == Rational(-1, 2));
  CHECK(r.value[*u.index({t, 2})] == Rational(-1, 2));
  CHECK(r.value[u.sink] == -1);
  CHECK(u.configuration(*u.index({t, 2})) == Configuration{t, 2});
}

TEST_CASE("unfold bounds") {
  const auto fig3 = load_fixture("fig3");
  CHECK_THROWS_AS(unfold(fig3, 3, 2, Rational(-1)), BadBounds);
  CHECK_THROWS_AS(unfold(fig3, 0, 2, Rational(0)), BadBounds);
  CHECK_FALSE(unfold(fig3, 0, 2, Rational(-1)).index({0, 3}).has_value());
}

TEST_CASE("zero updates collapse the counter") {
  const auto e = parse_emdp(
      "state a controllable\nstate b stochastic\n"
      "trans a -> a update=0 reward=1\ntrans a -> b update=0 reward=0\n"
      "trans b -> a update=0 reward=7 prob=1/3\ntrans b -> b update=0 reward=2 prob=2/3\n");
  const auto u = unfold(e, 0, 0, Rational(-5));
  const auto flat = solve_mean_payoff(drop_counter(e)).value;
  const auto r = solve_mean_payoff(u.mdp).value;
  for (StateId s = 0; s < e.num_states(); ++s) CHECK(r[*u.index({s, 0})] == flat[s]);
}

TEST_CASE("fig2L unfolded on [0, 4] stays below 5") {
  const auto fig2l = load_fixture("fig2L");
  const auto u = unfold(fig2l, 0, 4, Rational(-1));
  CHECK(u.mdp.num_states() == 21);
  const auto r = solve_mean_payoff(u.mdp);
  CHECK(mean_payoff_values_lp(u.mdp) == r.value);
  check_solution(u.mdp, r);
  CHECK(brute_force_values(u.mdp) == r.value);
  for (std::size_t i = 0; i < u.sink; ++i) CHECK(r.value[i] < 5);
  // Every drain from the top risks t(0), where only t's 0-loop stays in the band.
  CHECK(r.value[*u.index({fig2l.state_id("s"), 0})] == 0);
}

TEST_CASE("fig2R condensation") {
  const auto fig2r = load_fixture("fig2R");
  const auto ms = mecs(fig2r);
  REQUIRE(ms.size() == 3);
  const auto c = condensation(fig2r, {Rational(0), Rational(5), Rational(0)});
  // r_a, b, c, r_d, r_e
  CHECK(c.mdp.num_states() == 5);
  const StateId a = fig2r.state_id("a");
  CHECK(c.hat[a] == c.r_state[0]);
  const auto r = solve_mean_payoff(c.mdp);
  CHECK(r.value[c.hat[a]] == 5);
  CHECK(r.value[c.hat[fig2r.state_id("e")]] == 0);
  CHECK(mean_payoff_values_lp(c.mdp) == r.value);
  CHECK(c.origin[c.loop[1]] == npos);
  CHECK(c.mdp.transition(c.loop[1]).reward == 5);
}

TEST_CASE("condensation of a strongly connected model") {
  const auto fig2l = load_fixture("fig2L");
  const auto c = condensation(fig2l, {Rational(5)});
  CHECK(c.mdp.num_states() == 1);
  CHECK(c.mdp.num_transitions() == 1);
  CHECK(solve_mean_payoff(c.mdp).value == std::vector<Rational>{5});
}

TEST_CASE("condensation keeps isolated MECs apart") {
  const auto e = parse_emdp(
      "state x controllable\nstate y controllable\n"
      "trans x -> x update=1 reward=0\ntrans y -> y update=-1 reward=2\n");
  const auto c = condensation(e, {Rational(1), Rational(7)});
  const auto r = solve_mean_payoff(c.mdp);
  CHECK(r.value[c.hat[0]] == 1);
  CHECK(r.value[c.hat[1]] == 7);
}

TEST_CASE("condensation without a value needs an exit") {
  const auto e = parse_emdp(
      "state x controllable\nstate y controllable\n"
      "trans x -> x update=-1 reward=0\ntrans x -> y update=0 reward=0\n"
      "trans y -> y update=1 reward=2\n");
  const auto ms = mecs(e);
  REQUIRE(ms.size() == 2);
  const auto c = condensation(e, ms, {std::nullopt, Rational(2)});
  CHECK(c.loop[0] == npos);
  CHECK(solve_mean_payoff(c.mdp).value[c.hat[0]] == 2);
  CHECK_THROWS_AS(condensation(e, ms, {Rational(0), std::nullopt}), std::logic_error);
}

TEST_CASE("cut unfolding keeps only safe moves") {
  const auto fig2l = load_fixture("fig2L");
  const auto ms = min_safe(fig2l);
  const auto u = cut_unfold(fig2l, ms, 3, std::vector<Rational>(4, Rational(5)));
  u.mdp.validate();
  // v(0) must leave its -1 loop.
  const std::size_t v0 = u.at(fig2l.state_id("v"), 0);
  REQUIRE(v0 != npos);
  CHECK(u.mdp.out(v0).size() == 1);
  const auto r = solve_mean_payoff(u.mdp);
  // s climbs above the cut, where the cut loop pays 5.
  CHECK(r.value[u.at(fig2l.state_id("s"), 0)] == 5);
}

TEST_CASE("property: policy iteration matches enumeration and the LP") {
  std::mt19937_64 rng(77);
  for (int iter = 0; iter < 300; ++iter) {
    emdp::testing::RandomParams p;
    p.max_states = 5;
    const auto m = drop_counter(emdp::testing::random_emdp(rng, p));
    const auto r = solve_mean_payoff(m);
    CHECK(brute_force_values(m) == r.value);
    CHECK(mean_payoff_values_lp(m) == r.value);
    check_solution(m, r);
  }
}

TEST_CASE("property: unfoldings agree with enumeration and step semantics") {
  std::mt19937_64 rng(78);
  int checked = 0;
  for (int iter = 0; iter < 150; ++iter) {
    emdp::testing::RandomParams p;
    p.max_states = 3;
    const auto e = emdp::testing::random_emdp(rng, p);
    const std::int64_t high = std::uniform_int_distribution<std::int64_t>(0, 2)(rng);
    const auto u = unfold(e, 0, high, min_reward(e) - 1);
    u.mdp.validate();
    const auto r = solve_mean_payoff(u.mdp);
    check_solution(u.mdp, r);
    if (policy_count(u.mdp) <= 20000) {
      CHECK(brute_force_values(u.mdp) == r.value);
      ++checked;
    }
    // Random walks on e with the counter match the unfolded transition function.
    for (int walk = 0; walk < 5; ++walk) {
      Configuration c{std::uniform_int_distribution<std::size_t>(0, e.num_states() - 1)(rng),
                      std::uniform_int_distribution<std::int64_t>(0, high)(rng)};
      for (int step = 0; step < 10; ++step) {
        const auto out = e.out(c.state);
        const TransitionId t =
            out[std::uniform_int_distribution<std::size_t>(0, out.size() - 1)(rng)];
        const auto from = *u.index(c);
        const auto k = static_cast<std::size_t>(
            std::find(out.begin(), out.end(), t) - out.begin());
        const auto& ft = u.mdp.transition(u.mdp.out(from)[k]);
        CHECK(u.origin[u.mdp.out(from)[k]] == t);
        CHECK(ft.reward == e.transition(t).reward);
        const Configuration next{e.transition(t).dst, c.counter + e.transition(t).update};
        const auto idx = u.index(next);
        CHECK(ft.dst == idx.value_or(u.sink));
        if (!idx) break;
        c = next;
      }
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("property: condensation values lie between reachable and global limits") {
  std::mt19937_64 rng(79);
  for (int iter = 0; iter < 200; ++iter) {
    const auto e = emdp::testing::random_emdp(rng);
    const auto ms = mecs(e);
    std::vector<Rational> values;
    for (std::size_t i = 0; i < ms.size(); ++i) {
      values.push_back(Rational(std::uniform_int_distribution<int>(-3, 3)(rng)));
    }
    const auto c = condensation(e, values);
    c.mdp.validate();
    const auto r = solve_mean_payoff(c.mdp);
    const Rational top = *std::max_element(values.begin(), values.end());
    for (StateId s = 0; s < e.num_states(); ++s) {
      CHECK(r.value[c.hat[s]] <= top);
      // Staying in one's own MEC is always possible.
      for (std::size_t i = 0; i < ms.size(); ++i) {
        if (std::binary_search(ms[i].states.begin(), ms[i].states.end(), s)) {
          CHECK(r.value[c.hat[s]] >= values[i]);
        }
      }
    }
  }
}
