#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <json.hpp>

#include "emdp/model.hpp"

namespace emdp {

struct Choice {
  TransitionId transition = 0;
  Rational prob;

  friend bool operator==(const Choice&, const Choice&) = default;
};

// A finite distribution over transitions with a cached cumulative table for sampling.
class Distribution {
 public:
  Distribution() = default;
  explicit Distribution(std::vector<Choice> choices);
  static Distribution dirac(TransitionId t);

  bool empty() const { return choices_.empty(); }
  std::span<const Choice> choices() const { return choices_; }
  // u in [0, 1).
  TransitionId sample(double u) const;
  // Transition with the largest probability (first on ties).
  TransitionId mode() const;

  nlohmann::json to_json() const;
  static Distribution from_json(const nlohmann::json& j);

  friend bool operator==(const Distribution& a, const Distribution& b) {
    return a.choices_ == b.choices_;
  }

 private:
  std::vector<Choice> choices_;
  std::vector<double> cumulative_;
};

using MemoryCell = std::int64_t;
using MemoryView = std::span<const MemoryCell>;
using MemorySpan = std::span<MemoryCell>;

// An executable strategy. Memory is a fixed-size array of integers owned by the caller.
// start() observes the initial configuration; observe() is called after every step with
// the configuration reached. next() is queried only at controllable states.
class StrategyMachine {
 public:
  virtual ~StrategyMachine() = default;

  virtual std::size_t memory_size() const = 0;
  virtual void start(MemorySpan memory, StateId state, std::int64_t level) const = 0;
  virtual void observe(MemorySpan memory, StateId state, std::int64_t level) const = 0;
  virtual const Distribution& next(StateId state, MemoryView memory) const = 0;

  virtual nlohmann::json to_json() const = 0;
  // Re-expresses a machine built on a sub-model in the parent's state and transition ids.
  virtual std::shared_ptr<const StrategyMachine> lift(const SubModel& sub) const = 0;

  std::vector<MemoryCell> initial_memory(StateId state, std::int64_t level) const;
};

using MachinePtr = std::shared_ptr<const StrategyMachine>;

using DistributionTable = std::vector<Distribution>;

DistributionTable lift_table(const DistributionTable& table, const SubModel& sub);
nlohmann::json table_to_json(const DistributionTable& table);
DistributionTable table_from_json(const nlohmann::json& j);

// Memoryless strategy: one distribution per state (empty where undefined).
class TableMachine final : public StrategyMachine {
 public:
  explicit TableMachine(DistributionTable table) : table_(std::move(table)) {}

  std::size_t memory_size() const override { return 0; }
  void start(MemorySpan, StateId, std::int64_t) const override {}
  void observe(MemorySpan, StateId, std::int64_t) const override {}
  const Distribution& next(StateId state, MemoryView) const override;
  nlohmann::json to_json() const override;
  MachinePtr lift(const SubModel& sub) const override;

  const DistributionTable& table() const { return table_; }

 private:
  DistributionTable table_;
};

// Memoryless deterministic strategy from a per-state transition choice.
MachinePtr make_deterministic(std::size_t num_states,
                              const std::vector<std::optional<TransitionId>>& choice);

// Reconstructs any machine produced by this library from its JSON description.
MachinePtr machine_from_json(const nlohmann::json& j);

}  // namespace emdp
