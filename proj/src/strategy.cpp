#include "emdp/strategy.hpp"

#include <algorithm>
#include <stdexcept>

namespace emdp {

Distribution::Distribution(std::vector<Choice> choices) : choices_(std::move(choices)) {
  Rational acc = 0;
  cumulative_.reserve(choices_.size());
  for (const auto& c : choices_) {
    acc += c.prob;
    cumulative_.push_back(to_double(acc));
  }
  if (!cumulative_.empty()) cumulative_.back() = 1.0;
}

Distribution Distribution::dirac(TransitionId t) { return Distribution({{t, Rational(1)}}); }

TransitionId Distribution::sample(double u) const {
  for (std::size_t i = 0; i + 1 < cumulative_.size(); ++i) {
    if (u < cumulative_[i]) return choices_[i].transition;
  }
  return choices_.back().transition;
}

TransitionId Distribution::mode() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < choices_.size(); ++i) {
    if (choices_[i].prob > choices_[best].prob) best = i;
  }
  return choices_.at(best).transition;
}

nlohmann::json Distribution::to_json() const {
  auto out = nlohmann::json::array();
  for (const auto& c : choices_) {
    out.push_back({{"transition", c.transition}, {"prob", rational_to_json(c.prob)}});
  }
  return out;
}

Distribution Distribution::from_json(const nlohmann::json& j) {
  std::vector<Choice> choices;
  for (const auto& c : j) {
    choices.push_back({c.at("transition").get<TransitionId>(), rational_from_json(c.at("prob"))});
  }
  return Distribution(std::move(choices));
}

std::vector<MemoryCell> StrategyMachine::initial_memory(StateId state, std::int64_t level) const {
  std::vector<MemoryCell> memory(memory_size(), 0);
  start(memory, state, level);
  return memory;
}

DistributionTable lift_table(const DistributionTable& table, const SubModel& sub) {
  DistributionTable lifted(sub.parent_states);
  for (StateId s = 0; s < table.size(); ++s) {
    if (table[s].empty()) continue;
    std::vector<Choice> choices;
    for (const auto& c : table[s].choices()) {
      choices.push_back({sub.transition_to_parent.at(c.transition), c.prob});
    }
    lifted[sub.state_to_parent.at(s)] = Distribution(std::move(choices));
  }
  return lifted;
}

nlohmann::json table_to_json(const DistributionTable& table) {
  auto out = nlohmann::json::array();
  for (const auto& d : table) out.push_back(d.to_json());
  return out;
}

DistributionTable table_from_json(const nlohmann::json& j) {
  DistributionTable table;
  table.reserve(j.size());
  for (const auto& d : j) table.push_back(Distribution::from_json(d));
  return table;
}

const Distribution& TableMachine::next(StateId state, MemoryView) const {
  if (state >= table_.size() || table_[state].empty()) {
    throw std::logic_error("strategy undefined at state index " + std::to_string(state));
  }
  return table_[state];
}

nlohmann::json TableMachine::to_json() const {
  return {{"kind", "table"}, {"table", table_to_json(table_)}};
}

MachinePtr TableMachine::lift(const SubModel& sub) const {
  return std::make_shared<TableMachine>(lift_table(table_, sub));
}

MachinePtr make_deterministic(std::size_t num_states,
                              const std::vector<std::optional<TransitionId>>& choice) {
  DistributionTable table(num_states);
  for (StateId s = 0; s < choice.size(); ++s) {
    if (choice[s]) table[s] = Distribution::dirac(*choice[s]);
  }
  return std::make_shared<TableMachine>(std::move(table));
}

}  // namespace emdp
