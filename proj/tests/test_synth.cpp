#include <doctest.h>

#include <random>

#include "emdp/digraph.hpp"
#include "emdp/machines.hpp"
#include "emdp/sim.hpp"
#include "emdp/synth.hpp"
#include "support.hpp"

using namespace emdp;
using emdp::testing::load_fixture;

namespace {

// a pumps by 1, b drains by 1 paying 10: the best mean payoff 5 needs mixing both loops.
const char* kMix =
    "state a controllable\nstate b controllable\n"
    "trans a -> a update=1 reward=0\ntrans a -> b update=0 reward=0\n"
    "trans b -> b update=-1 reward=10\ntrans b -> a update=0 reward=0\n";

// Strongly connected, but only x is ever safe: y can drain the counter without bound.
const char* kIsland =
    "state x controllable\nstate y stochastic\n"
    "trans x -> x update=1 reward=0\ntrans x -> y update=0 reward=-1\n"
    "trans y -> y update=-2 reward=3 prob=1/2\ntrans y -> x update=0 reward=0 prob=1/2\n";

const char* kZeroLoop = "state x controllable\ntrans x -> x update=0 reward=3\n";

Emdp pump2_with_reward() {
  return parse_emdp(
      "state s controllable\nstate t stochastic\n"
      "trans s -> s update=1 reward=1\ntrans s -> t update=0 reward=0\n"
      "trans t -> s update=1 reward=0 prob=1/2\ntrans t -> s update=-1 reward=0 prob=1/2\n");
}

void check_round_trip(const Emdp& e, const MachinePtr& m, const Configuration& cfg) {
  const auto j = m->to_json();
  const auto back = machine_from_json(j);
  CHECK(back->to_json() == j);
  std::ostringstream a, b;
  write_trace_jsonl(a, e, run_trace(e, *m, cfg, 2000, 11));
  write_trace_jsonl(b, e, run_trace(e, *back, cfg, 2000, 11));
  CHECK(a.str() == b.str());
}

}  // namespace

TEST_CASE("classification of the fixtures") {
  CHECK(classify(load_fixture("single")) == Classification::SpEmdp);
  CHECK(classify(load_fixture("pump2")) == Classification::SpEmdp);
  CHECK(classify(load_fixture("fig2L")) == Classification::StronglyConnectedNotPumpable);
  CHECK(classify(load_fixture("fig3")) == Classification::StronglyConnectedNotPumpable);
  CHECK(classify(load_fixture("fig2R")) == Classification::NotStronglyConnected);
  CHECK(classify(parse_emdp(kMix)) == Classification::SpEmdp);
  CHECK(classify(parse_emdp(kIsland)) == Classification::StronglyConnectedNotPumpable);
  CHECK(classify(load_fixture("fig1")) == Classification::StronglyConnectedNotPumpable);
  CHECK(to_string(Classification::NotStronglyConnected) == "NotStronglyConnected");
}

TEST_CASE("sp_value") {
  CHECK(sp_value(load_fixture("single")) == 3);
  CHECK(sp_value(pump2_with_reward()) == 1);
  CHECK(sp_value(parse_emdp(kMix)) == 5);
  CHECK_THROWS_AS(sp_value(load_fixture("fig2L")), NotSpEmdp);
  CHECK_THROWS_AS(sp_value(load_fixture("fig1")), NotSpEmdp);
}

TEST_CASE("type I strategy switches between pumping and mu") {
  const auto e = load_fixture("single");
  const auto core = find_core(e, solve_flow(e, ProgramKind::Payoff));
  REQUIRE(std::holds_alternative<TypeICore>(core));
  const auto tp = threshold_params(e, min_pump(e));
  CHECK(tp.low == 1);
  CHECK(tp.high == 4);

  const auto m = type1_strategy(e, std::get<TypeICore>(core));
  const auto& sw = dynamic_cast<const SwitchingMachine&>(*m);
  auto mem = sw.initial_memory(0, 0);
  CHECK(mem[0] == 1);
  sw.observe(mem, 0, 3);
  CHECK(mem[0] == 1);
  sw.observe(mem, 0, 5);
  CHECK(mem[0] == 0);
  sw.observe(mem, 0, 2);
  CHECK(mem[0] == 0);
  sw.observe(mem, 0, 1);
  CHECK(mem[0] == 1);
  check_round_trip(e, m, {0, 0});
}

TEST_CASE("type II parameters and stage schedule") {
  const auto e = parse_emdp(kMix);
  const auto core = find_core(e, solve_flow(e, ProgramKind::Payoff));
  REQUIRE(std::holds_alternative<TypeIICore>(core));
  const auto& two = std::get<TypeIICore>(core);
  const auto p = type2_params(e, two, min_pump(e));
  CHECK(p.p1 == Rational(1, 2));
  CHECK(p.p2 == Rational(1, 2));
  CHECK(p.period == 2);
  CHECK(p.threshold == 1);
  CHECK(p.pump_target(1) == 1 + 2);   // ceil(2^(3/4)) = 2
  CHECK(p.pump_target(8) == 1 + 8);   // 16^(3/4) = 8

  const auto m = type2_strategy(e, two);
  const auto& staged = dynamic_cast<const StagedMachine&>(*m);
  CHECK_FALSE(staged.params().stage_cap);
  CHECK(staged.params().steps1 == 1);
  CHECK(staged.params().steps2 == 1);

  // Stage 1 from a(5): one step of each component, back to the anchor, then pump to 3.
  auto mem = staged.initial_memory(p.anchor, 5);
  CHECK(mem == std::vector<MemoryCell>{1, StagedMachine::Mu1, 1});
  const auto trace = run_trace(e, *m, {p.anchor, 5}, 400, 1);
  CHECK(trace.safe());

  // Stage 3 with the level scripted below the threshold: straight to pumping toward the
  // stage-3 target, then stage 4 once it is reached.
  mem = {3, StagedMachine::Mu2, 2};
  staged.observe(mem, p.anchor, 0);
  CHECK(mem == std::vector<MemoryCell>{3, StagedMachine::Pump, p.pump_target(3)});
  staged.observe(mem, p.anchor, p.pump_target(3) - 1);
  CHECK(mem[1] == StagedMachine::Pump);
  staged.observe(mem, p.anchor, p.pump_target(3));
  CHECK(mem == std::vector<MemoryCell>{4, StagedMachine::Mu1, 4 * staged.params().steps1});
  check_round_trip(e, m, {p.anchor, 5});
}

TEST_CASE("stage caps grow as epsilon shrinks") {
  const auto e = parse_emdp(kMix);
  const auto two = std::get<TypeIICore>(find_core(e, solve_flow(e, ProgramKind::Payoff)));
  std::int64_t previous = 0;
  for (const Rational& eps : {Rational(2), Rational(1), Rational(1, 2), Rational(1, 4)}) {
    const auto cap = stage_cap(e, two, eps);
    CHECK(cap >= 1);
    CHECK(cap >= previous);
    previous = cap;
  }
  CHECK_THROWS_AS(stage_cap(e, two, Rational(0)), std::invalid_argument);
}

TEST_CASE("capped type II strategy reaches the value within epsilon") {
  const auto e = parse_emdp(kMix);
  const Configuration start{e.state_id("a"), 0};
  const auto m = sp_epsilon_strategy(e, start, Rational(1));
  CHECK(m->to_json()["kind"] == "staged");
  const auto r = estimate_mp(e, *m, start, 4, 50000, 3);
  CHECK(r.safety_violations == 0);
  CHECK(r.mean >= 4.0);
  CHECK_THROWS_AS(sp_epsilon_strategy(e, {0, -1}, Rational(1)), UnsafeStart);
}

TEST_CASE("case A") {
  SUBCASE("fig1 has positive trend but nothing safe") {
    const auto e = load_fixture("fig1");
    CHECK(case_a_plan(e, Rational(1, 2)).g_star > 0);
    CHECK_THROWS_AS(caseA_strategy(e, Rational(1, 2)), NoSafeState);
  }
  SUBCASE("fig2L mixes the pumping loop with the paying loop") {
    const auto e = load_fixture("fig2L");
    const Rational eps(1, 2);
    const auto plan = case_a_plan(e, eps);
    CHECK(plan.f_star == 5);
    CHECK(plan.g_star == 1);
    CHECK(plan.mp >= plan.f_star - eps / 2);
    CHECK(plan.trend > 0);
    Rational mass = 0;
    std::int64_t block = 0;
    for (std::size_t j = 0; j < plan.alpha.size(); ++j) {
      mass += plan.alpha[j];
      block += plan.counts[j];
      CHECK(plan.alpha[j] > 0);
    }
    CHECK(mass == 1);
    CHECK(block == plan.block);

    const auto a = caseA_strategy(e, eps);
    const Configuration start{e.state_id("s"), a.safe_start_level};
    const auto r = estimate_mp(e, *a.machine, start, 4, 50000, 5);
    CHECK(r.safety_violations == 0);
    CHECK(r.mean >= 4.5 - 0.1);
    check_round_trip(e, a.machine, start);
  }
  SUBCASE("not applicable") {
    CHECK_THROWS_AS(case_a_plan(load_fixture("fig3"), Rational(1)), NotApplicable);
    CHECK_THROWS_AS(case_a_plan(load_fixture("fig2R"), Rational(1)), NotApplicable);
  }
}

TEST_CASE("case B values") {
  const auto fig3 = load_fixture("fig3");
  const auto r = caseB_value(fig3);
  REQUIRE(r.value);
  CHECK(*r.value == 0);
  CHECK(r.band == 2);

  const auto changed = parse_emdp(
      "state s controllable\nstate t stochastic\n"
      "trans s -> s update=0 reward=2\ntrans s -> t update=0 reward=0\n"
      "trans t -> s update=-1 reward=10 prob=1/2\ntrans t -> s update=1 reward=10 prob=1/2\n");
  CHECK(caseB_value(changed).value == Rational(2));
  CHECK(caseB_value(parse_emdp(kZeroLoop)).value == Rational(3));
  CHECK_THROWS_AS(caseB_value(load_fixture("fig2L")), NotApplicable);
}

TEST_CASE("limit values") {
  const auto fig2R = load_fixture("fig2R");
  const auto la = analyze_limits(fig2R);
  CHECK(la.value[fig2R.state_id("a")] == Rational(5));
  CHECK(la.value[fig2R.state_id("e")] == Rational(0));
  CHECK(la.mecs.size() == 3);

  const auto fig2L = load_fixture("fig2L");
  CHECK(limit_value(fig2L, fig2L.state_id("s")) == Rational(5));
  const auto fig3 = load_fixture("fig3");
  CHECK(limit_value(fig3, fig3.state_id("s")) == Rational(0));
  CHECK_FALSE(limit_value(load_fixture("fig1"), 0));
  CHECK(limit_value(load_fixture("single"), 0) == Rational(3));
}

TEST_CASE("approximate values") {
  const auto fig3 = load_fixture("fig3");
  const auto high = approx_value(fig3, {fig3.state_id("s"), 100}, Rational(1, 2));
  CHECK(high.value == Rational(0));
  CHECK(high.kind == ValueKind::Approximate);

  const auto fig1 = load_fixture("fig1");
  const auto unsafe = approx_value(fig1, {0, 3}, Rational(1, 2));
  CHECK_FALSE(unsafe.value);
  CHECK(unsafe.kind == ValueKind::Exact);

  const auto fig2L = load_fixture("fig2L");
  const ValueApproximator approx(fig2L, Rational(1, 2));
  const auto low = approx.value({fig2L.state_id("s"), 0});
  REQUIRE(low.value);
  CHECK(*low.value >= Rational(9, 2));
  CHECK(*low.value <= 5);
  CHECK(approx.value({fig2L.state_id("s"), 100000}).value == Rational(5));
  CHECK(approx.height() <= 256);
}

TEST_CASE("epsilon strategies") {
  SUBCASE("SP models delegate") {
    const auto e = load_fixture("single");
    CHECK(epsilon_strategy(e, {0, 0}, Rational(1))->to_json()["kind"] == "type1");
    CHECK_THROWS_AS(epsilon_strategy(load_fixture("fig1"), {0, 4}, Rational(1)), UnsafeStart);
  }
  SUBCASE("fig2R hands over to d or e") {
    const auto e = load_fixture("fig2R");
    const Configuration start{e.state_id("a"), 0};
    const auto m = epsilon_strategy(e, start, Rational(1, 2));
    const auto& parts = dynamic_cast<const CompositeMachine&>(*m).parts();
    CHECK(parts.targets.size() == 2);
    CHECK(parts.target_of[e.state_id("d")] != npos);
    CHECK(parts.target_of[e.state_id("e")] != npos);
    CHECK(parts.target_of[e.state_id("a")] == npos);
    const auto r = estimate_mp(e, *m, start, 10, 20000, 9);
    CHECK(r.safety_violations == 0);
    CHECK(r.mean >= 4.5 - 0.1);
    check_round_trip(e, m, start);
  }
  SUBCASE("fig2L from s(0)") {
    const auto e = load_fixture("fig2L");
    const Configuration start{e.state_id("s"), 0};
    const auto m = epsilon_strategy(e, start, Rational(1));
    const auto r = estimate_mp(e, *m, start, 4, 50000, 9);
    CHECK(r.safety_violations == 0);
    CHECK(r.mean >= 4.0);
    check_round_trip(e, m, start);
  }
}

TEST_CASE("epsilon strategy stays away from states that are never safe") {
  const auto e = parse_emdp(kIsland);
  const Configuration cfg{e.state_id("x"), 0};
  CHECK(approx_value(e, cfg, Rational(1, 2)).value == 0);
  const auto r = estimate_mp(e, *epsilon_strategy(e, cfg, Rational(1, 2)), cfg, 5, 5000, 3);
  CHECK(r.safety_violations == 0);
}

TEST_CASE("property: epsilon strategies are safe from safe starts") {
  std::mt19937_64 rng(20261016);
  for (int round = 0; round < 40; ++round) {
    const auto e = emdp::testing::random_emdp(rng);
    const auto ms = min_safe(e);
    for (StateId s = 0; s < e.num_states(); ++s) {
      if (!ms[s].is_finite()) continue;
      const Configuration start{s, ms[s].value()};
      const auto m = epsilon_strategy(e, start, Rational(1, 2));
      const auto r = estimate_mp(e, *m, start, 3, 3000, static_cast<std::uint64_t>(round));
      CHECK(r.safety_violations == 0);
      break;
    }
  }
}
