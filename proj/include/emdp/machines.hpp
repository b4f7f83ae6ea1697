#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "emdp/strategy.hpp"

namespace emdp {

// The switching strategy for a type I core: pumps while the low flag is set, plays mu
// otherwise. The flag is set when the level is at most low and cleared once it exceeds high.
// Memory: [low flag].
class SwitchingMachine final : public StrategyMachine {
 public:
  SwitchingMachine(DistributionTable pump, DistributionTable mu, std::int64_t low,
                   std::int64_t high);
  std::size_t memory_size() const override { return 1; }
  void start(MemorySpan memory, StateId state, std::int64_t level) const override;
  void observe(MemorySpan memory, StateId state, std::int64_t level) const override;
  const Distribution& next(StateId state, MemoryView memory) const override;
  nlohmann::json to_json() const override;
  MachinePtr lift(const SubModel& sub) const override;
  static MachinePtr from_json(const nlohmann::json& j);

  std::int64_t low() const { return low_; }
  std::int64_t high() const { return high_; }

 private:
  DistributionTable pump_;
  DistributionTable mu_;
  std::int64_t low_;
  std::int64_t high_;
};

// Stage-based mixing of two components with progressive pumping.
// Stage i plays mu1 for steps1 * i steps, mu2 for steps2 * i steps, kappa until the anchor
// is reached, then the pumping strategy until the level reaches threshold + ceil((i N)^(3/4)).
// A level below threshold outside the pumping phase jumps straight to pumping.
// Memory: [stage, phase, left], where left counts steps or holds the pumping target.
class StagedMachine final : public StrategyMachine {
 public:
  enum Phase : MemoryCell { Mu1 = 0, Mu2 = 1, Kappa = 2, Pump = 3 };

  struct Params {
    std::int64_t steps1 = 0;  // p1 * N
    std::int64_t steps2 = 0;  // p2 * N
    std::int64_t period = 1;  // N
    StateId anchor = 0;
    std::int64_t threshold = 0;
    std::optional<std::int64_t> stage_cap;
  };

  StagedMachine(DistributionTable mu1, DistributionTable mu2, DistributionTable kappa,
                DistributionTable pump, Params params);
  std::size_t memory_size() const override { return 3; }
  void start(MemorySpan memory, StateId state, std::int64_t level) const override;
  void observe(MemorySpan memory, StateId state, std::int64_t level) const override;
  const Distribution& next(StateId state, MemoryView memory) const override;
  nlohmann::json to_json() const override;
  MachinePtr lift(const SubModel& sub) const override;
  static MachinePtr from_json(const nlohmann::json& j);

  const Params& params() const { return params_; }
  std::int64_t pump_target(std::int64_t stage) const;

 private:
  void settle(MemorySpan memory, StateId state, std::int64_t level) const;

  DistributionTable mu1_;
  DistributionTable mu2_;
  DistributionTable kappa_;
  DistributionTable pump_;
  Params params_;
};

// threshold + ceil((stage * period)^(3/4)), exact.
std::int64_t progressive_target(std::int64_t threshold, std::int64_t stage, std::int64_t period);

// Cycles through the tables, playing table k for counts[k] steps.
// Memory: [phase, steps left].
class TimeShareMachine final : public StrategyMachine {
 public:
  TimeShareMachine(std::vector<DistributionTable> tables, std::vector<std::int64_t> counts);
  std::size_t memory_size() const override { return 2; }
  void start(MemorySpan memory, StateId state, std::int64_t level) const override;
  void observe(MemorySpan memory, StateId state, std::int64_t level) const override;
  const Distribution& next(StateId state, MemoryView memory) const override;
  nlohmann::json to_json() const override;
  MachinePtr lift(const SubModel& sub) const override;
  static MachinePtr from_json(const nlohmann::json& j);

  const std::vector<std::int64_t>& counts() const { return counts_; }

 private:
  std::vector<DistributionTable> tables_;
  std::vector<std::int64_t> counts_;
};

// Runs the inner machine until the level is at most danger, then the safe table forever.
// Memory: [tripped, inner memory...].
class GuardMachine final : public StrategyMachine {
 public:
  GuardMachine(MachinePtr inner, DistributionTable safe, std::int64_t danger);
  std::size_t memory_size() const override { return 1 + inner_->memory_size(); }
  void start(MemorySpan memory, StateId state, std::int64_t level) const override;
  void observe(MemorySpan memory, StateId state, std::int64_t level) const override;
  const Distribution& next(StateId state, MemoryView memory) const override;
  nlohmann::json to_json() const override;
  MachinePtr lift(const SubModel& sub) const override;
  static MachinePtr from_json(const nlohmann::json& j);

  std::int64_t danger() const { return danger_; }
  const MachinePtr& inner() const { return inner_; }

 private:
  MachinePtr inner_;
  DistributionTable safe_;
  std::int64_t danger_;
};

// Reaches the reference state, then replays a bounded-counter policy with the level shifted
// so that the reference sits at its reference level. Leaving the band restarts the approach.
// Memory: [phase, offset, virtual level].
class ReplayMachine final : public StrategyMachine {
 public:
  // replay has (band + 1) * num_states entries indexed by level * num_states + state.
  ReplayMachine(DistributionTable reach, DistributionTable replay, std::size_t num_states,
                StateId reference, std::int64_t reference_level, std::int64_t band);
  std::size_t memory_size() const override { return 3; }
  void start(MemorySpan memory, StateId state, std::int64_t level) const override;
  void observe(MemorySpan memory, StateId state, std::int64_t level) const override;
  const Distribution& next(StateId state, MemoryView memory) const override;
  nlohmann::json to_json() const override;
  MachinePtr lift(const SubModel& sub) const override;
  static MachinePtr from_json(const nlohmann::json& j);

 private:
  void anchor(MemorySpan memory, std::int64_t level) const;

  DistributionTable reach_;
  DistributionTable replay_;
  std::size_t num_states_;
  StateId reference_;
  std::int64_t reference_level_;
  std::int64_t band_;
};

// The composite strategy for general models. Below the climb level it follows a
// level-indexed table (the top row is reused above its height). From the climb level on it
// follows a memoryless transient table until a target state is entered, then hands over to
// that target's machine for good. Dropping to the danger level in the transient part, or
// entering a target below its floor, switches to the safe table for good.
// Memory: [mode, level, target, target memory...].
class CompositeMachine final : public StrategyMachine {
 public:
  enum Mode : MemoryCell { Low = 0, Transient = 1, Target = 2, Safe = 3 };

  struct TargetEntry {
    MachinePtr machine;
    std::int64_t floor = 0;
  };

  struct Parts {
    std::size_t num_states = 0;
    std::int64_t low_height = 0;
    DistributionTable low;  // (low_height + 1) * num_states entries
    std::int64_t climb = 0;
    std::int64_t danger = 0;
    DistributionTable transient;
    std::vector<std::size_t> target_of;  // npos outside targets
    std::vector<TargetEntry> targets;
    DistributionTable safe;
  };

  explicit CompositeMachine(Parts parts);
  std::size_t memory_size() const override { return 3 + target_memory_; }
  void start(MemorySpan memory, StateId state, std::int64_t level) const override;
  void observe(MemorySpan memory, StateId state, std::int64_t level) const override;
  const Distribution& next(StateId state, MemoryView memory) const override;
  nlohmann::json to_json() const override;
  MachinePtr lift(const SubModel& sub) const override;
  static MachinePtr from_json(const nlohmann::json& j);

  const Parts& parts() const { return parts_; }

 private:
  void enter_high(MemorySpan memory, StateId state, std::int64_t level) const;

  Parts parts_;
  std::size_t target_memory_ = 0;
};

}  // namespace emdp
