// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "emdp/cli.hpp"
#include "emdp/finmdp.hpp"
#include "emdp/flows.hpp"
#include "emdp/ratlp.hpp"
#include "emdp/sim.hpp"
#include "emdp/synth.hpp"
#include "support.hpp"

using namespace emdp;
using emdp::testing::load_fixture;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned budgets and tolerances.
constexpr std::uint64_t kFigEpisodes = 200;
constexpr std::uint64_t kFigSteps = 100000;
constexpr std::uint64_t kFigSeed = 2024;
constexpr double kStderrs = 3.0;
constexpr double kFigSeconds = 120;

constexpr int kRandomModels = 200;
constexpr std::uint64_t kSafetyEpisodes = 50;
constexpr std::uint64_t kSafetySteps = 10000;
constexpr double kOraclePolicyBudget = 5000;
constexpr std::int64_t kOracleMaxCap = 4;
constexpr double kInvariantSeconds = 600;

constexpr int kMonotoneConfigs = 50;

struct Outcome {
  bool pass = true;
  std::ostringstream notes;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes << " [failed: " << what << "]";
    }
  }
};

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

void report(int id, const std::string& title, const Outcome& o, bool& all) {
  std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << title
            << o.notes.str() << std::endl;
  all = all && o.pass;
}

Outcome fig1() {
  Outcome o;
  const auto e = load_fixture("fig1");
  const auto lp = build_payoff_lp(e);
  const std::vector<Rational> quarter(e.num_transitions(), Rational(1, 4));
  o.require(is_feasible(lp, quarter), "1/4 flow feasible");
  const auto ms = min_safe(e);
  o.require(!ms[e.state_id("s")].is_finite() && !ms[e.state_id("t")].is_finite(),
            "min_safe infinite at s and t");
  o.notes << " quarter flow feasible, min_safe(s)=" << to_string(ms[0])
          << " min_safe(t)=" << to_string(ms[1]);
  return o;
}

Outcome fig3() {
  Outcome o;
  const auto e = load_fixture("fig3");
  const auto f = solve_flow(e, ProgramKind::Payoff).objective_value;
  const auto g = solve_flow(e, ProgramKind::Trend).objective_value;
  const auto b = caseB_value(e).value;
  const auto l = limit_value(e, e.state_id("s"));
  o.require(f == 5, "f* = 5");
  o.require(g == 0, "g* = 0");
  o.require(b && *b == 0, "case B value 0");
  o.require(l && *l == 0, "limit value 0");
  o.notes << " f*=" << to_string(f) << " g*=" << to_string(g)
          << " caseB=" << (b ? to_string(*b) : "-inf") << " limit(s)=" << (l ? to_string(*l) : "-inf");
  return o;
}

void simulate_fixture(Outcome& o, const Emdp& e, const Configuration& start, const Rational& eps,
                      double floor) {
  const auto t0 = Clock::now();
  const auto m = epsilon_strategy(e, start, eps);
  const auto r = estimate_mp(e, *m, start, kFigEpisodes, kFigSteps, kFigSeed);
  const double elapsed = seconds_since(t0);
  o.require(r.mean >= floor - kStderrs * r.stderr_mean, "mean above the floor");
  o.require(r.safety_violations == 0, "no safety violations");
  o.require(elapsed < kFigSeconds, "runtime budget");
  o.notes << " sim " << kFigEpisodes << "x" << kFigSteps << ": mean=" << r.mean
          << " stderr=" << r.stderr_mean << " (floor " << floor << ") violations="
          << r.safety_violations << " time=" << elapsed << "s";
}

Outcome fig2L() {
  Outcome o;
  const auto e = load_fixture("fig2L");
  const auto cls = classify(e);
  const auto mp = min_pump(e);
  const auto l = limit_value(e, e.state_id("s"));
  o.require(cls == Classification::StronglyConnectedNotPumpable, "classification");
  o.require(!mp[e.state_id("t")].is_finite(), "min_pump(t) infinite");
  o.require(l && *l == 5, "limit value 5");
  o.notes << " " << to_string(cls) << ", min_pump(t)=" << to_string(mp[e.state_id("t")])
          << ", limit(s)=" << (l ? to_string(*l) : "-inf") << ",";
  simulate_fixture(o, e, {e.state_id("s"), 0}, Rational(1), 4.0);
  return o;
}

Outcome fig2R() {
  Outcome o;
  const auto e = load_fixture("fig2R");
  const auto cls = classify(e);
  std::vector<std::vector<StateId>> sets;
  for (const auto& m : mecs(e)) sets.push_back(m.states);
  std::sort(sets.begin(), sets.end());
  const std::vector<std::vector<StateId>> expected{
      {e.state_id("a")}, {e.state_id("d")}, {e.state_id("e")}};
  const auto l = limit_value(e, e.state_id("a"));
  o.require(cls == Classification::NotStronglyConnected, "classification");
  o.require(sets == expected, "MECs {a},{d},{e}");
  o.require(l && *l == 5, "limit value 5");
  o.notes << " " << to_string(cls) << ", " << sets.size()
          << " MECs, limit(a)=" << (l ? to_string(*l) : "-inf") << ",";
  simulate_fixture(o, e, {e.state_id("a"), 0}, Rational(1, 2), 4.2);
  return o;
}

// Component statistics recomputed from the flow vector.
bool core_holds(const Emdp& e, const FlowSolution& fs, const Core& core) {
  const auto stats = [&](const Component& c) {
    Rational freq = 0, trend = 0, pay = 0;
    for (TransitionId t = 0; t < e.num_transitions(); ++t) {
      if (!std::binary_search(c.states.begin(), c.states.end(), e.transition(t).src)) continue;
      freq += fs.f[t];
      trend += fs.f[t] * e.transition(t).update;
      pay += fs.f[t] * e.transition(t).reward;
    }
    return std::array<Rational, 3>{freq, trend, pay};
  };
  const Rational& f_star = fs.objective_value;
  if (const auto* one = std::get_if<TypeICore>(&core)) {
    const auto [freq, trend, pay] = stats(one->c);
    return freq > 0 && trend > 0 && pay / freq >= f_star;
  }
  const auto& two = std::get<TypeIICore>(core);
  const auto [f1, t1, p1] = stats(two.c1);
  const auto [f2, t2, p2] = stats(two.c2);
  if (f1 <= 0 || f2 <= 0 || t1 < 0 || t2 > 0) return false;
  if (two.c1.states == two.c2.states) return t1 >= 0 && p1 >= f_star;
  return t1 + t2 >= 0 && p1 + p2 >= f_star;
}

bool lp_certified(const LinearProgram& lp) {
  const auto out = solve_lp(lp);
  if (const auto* opt = std::get_if<LpOptimal>(&out)) {
    return duality_gap(lp, *opt) == 0 && verify_optimal(lp, *opt);
  }
  if (const auto* inf = std::get_if<LpInfeasible>(&out)) return verify_infeasible(lp, *inf);
  return verify_unbounded(lp, std::get<LpUnbounded>(out));
}

// Largest cap up to kOracleMaxCap whose strategy count bound fits the budget.
std::int64_t oracle_cap(const Emdp& e) {
  std::int64_t cap = 0;
  for (std::int64_t c = 1; c <= kOracleMaxCap; ++c) {
    double bound = 1;
    for (StateId s = 0; s < e.num_states(); ++s) {
      if (e.is_controllable(s)) bound *= std::pow(static_cast<double>(e.out(s).size()), c + 1);
    }
    if (bound <= kOraclePolicyBudget) cap = c;
  }
  return cap;
}

Outcome invariants() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(5);
  int bad_a = 0, bad_b = 0, bad_c = 0, bad_d = 0, bad_e = 0, bad_f = 0;
  int oracle_runs = 0, safety_runs = 0, cores = 0, lps = 0;
  std::int64_t cap_sum = 0;
  for (int k = 0; k < kRandomModels; ++k) {
    const auto e = emdp::testing::random_emdp(rng);
    const auto n = static_cast<std::int64_t>(e.num_states());
    const std::int64_t me = max_update(e);

    // (a) and (b)
    const auto ms = min_safe(e);
    const auto mp = min_pump(e);
    if (ms != emdp::testing::oracle_min_safe(e, 4 * n * me + 4)) ++bad_a;
    for (const auto& l : mp) {
      if (l.is_finite() && l.value() > 3 * n * me) ++bad_b;
    }

    // (c)
    const std::int64_t cap = oracle_cap(e);
    const Configuration probe{static_cast<StateId>(rng() % e.num_states()), cap / 2};
    const auto u = unfold(e, 0, cap, min_reward(e) - 1);
    try {
      if (solve_mean_payoff(u.mdp).value[*u.index(probe)] != oracle_value(e, probe, cap)) ++bad_c;
      ++oracle_runs;
      cap_sum += cap;
    } catch (const TooLarge&) {
    }

    // (d): every synthesized strategy from a start meeting its precondition.
    for (StateId s = 0; s < e.num_states(); ++s) {
      if (!ms[s].is_finite()) continue;
      const Configuration safe_start{s, ms[s].value()};
      std::vector<std::pair<MachinePtr, Configuration>> runs{
          {safe_strategy(e, ms), safe_start},
          {epsilon_strategy(e, safe_start, Rational(1, 2)), safe_start}};
      if (mp[s].is_finite()) runs.emplace_back(pumping_strategy(e, mp), Configuration{s, mp[s].value()});
      for (const auto& [m, start] : runs) {
        const auto r = estimate_mp(e, *m, start, kSafetyEpisodes, kSafetySteps,
                                   static_cast<std::uint64_t>(k));
        if (r.safety_violations != 0) ++bad_d;
        ++safety_runs;
      }
      break;
    }

    // (e) and (f)
    for (const auto kind : {ProgramKind::Payoff, ProgramKind::Trend}) {
      const auto lp = kind == ProgramKind::Payoff ? build_payoff_lp(e) : build_trend_lp(e);
      if (!lp_certified(lp)) ++bad_f;
      ++lps;
    }
    try {
      const auto fs = solve_flow(e, ProgramKind::Payoff);
      if (!core_holds(e, fs, find_core(e, fs))) ++bad_e;
      ++cores;
    } catch (const InfeasibleFlow&) {
    } catch (const NoCore&) {
      ++bad_e;
    }
  }
  const double elapsed = seconds_since(t0);
  o.require(bad_a == 0, "(a) min_safe vs oracle");
  o.require(bad_b == 0, "(b) min_pump bound");
  o.require(bad_c == 0 && oracle_runs > 0, "(c) unfold vs oracle_value");
  o.require(bad_d == 0, "(d) zero safety violations");
  o.require(bad_e == 0 && cores > 0, "(e) core inequalities");
  o.require(bad_f == 0, "(f) duality gap zero");
  o.require(elapsed < kInvariantSeconds, "runtime budget");
  o.notes << " " << kRandomModels << " models: (a) " << bad_a << " mismatches, (b) " << bad_b
          << " over bound, (c) " << bad_c << "/" << oracle_runs << " oracle mismatches (mean cap "
          << static_cast<double>(cap_sum) / std::max(oracle_runs, 1) << "), (d) "
          << bad_d << "/" << safety_runs << " unsafe runs of " << kSafetyEpisodes << "x"
          << kSafetySteps << ", (e) " << bad_e << "/" << cores << " bad cores, (f) " << bad_f
          << "/" << lps << " uncertified LPs, time=" << elapsed << "s";
  return o;
}

Outcome monotone() {
  Outcome o;
  const Rational eps(1, 10);
  std::mt19937_64 rng(6);
  int checked = 0, bad = 0;
  while (checked < kMonotoneConfigs) {
    const auto e = emdp::testing::random_emdp(rng);
    const ValueApproximator approx(e, eps);
    for (int j = 0; j < 5 && checked < kMonotoneConfigs; ++j, ++checked) {
      const StateId s = rng() % e.num_states();
      const std::int64_t n = static_cast<std::int64_t>(rng() % 12);
      const auto lo = approx.value({s, n}).value;
      const auto hi = approx.value({s, n + 5}).value;
      if (lo && (!hi || *lo > *hi + 2 * eps)) ++bad;
    }
  }
  o.require(bad == 0, "monotone within 2 epsilon");
  o.notes << " " << checked << " configurations, " << bad << " violations";
  return o;
}

Outcome reproducible() {
  Outcome o;
  const auto dir = std::filesystem::temp_directory_path() / "emdp_acceptance";
  std::filesystem::create_directories(dir);
  const std::string model = emdp::testing::fixture_path("fig2R");
  const std::string strategy = (dir / "fig2R.json").string();
  std::ostringstream out, err;
  o.require(emdp::cli::run({"synth", model, "--config", "a(0)", "--epsilon", "1/2", "--out",
                            strategy},
                           out, err) == 0,
            "synth");
  std::vector<std::string> dumps;
  for (const char* name : {"first.jsonl", "second.jsonl"}) {
    const std::string path = (dir / name).string();
    o.require(emdp::cli::run({"simulate", model, strategy, "--episodes", "2", "--steps", "20000",
                              "--seed", "99", "--out", path},
                             out, err) == 0,
              "simulate");
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    dumps.push_back(ss.str());
  }
  o.require(!dumps[0].empty() && dumps[0] == dumps[1], "byte-identical dumps");
  o.notes << " two runs with seed 99: " << dumps[0].size() << " bytes each, "
          << (dumps[0] == dumps[1] ? "identical" : "different");
  return o;
}

}  // namespace

int main() {
  bool all = true;
  report(1, "fig1", fig1(), all);
  report(2, "fig3", fig3(), all);
  report(3, "fig2L", fig2L(), all);
  report(4, "fig2R", fig2R(), all);
  report(5, "invariants on random EMDPs", invariants(), all);
  report(6, "value monotone in the counter", monotone(), all);
  report(7, "simulate reproducibility", reproducible(), all);
  return all ? 0 : 1;
}
