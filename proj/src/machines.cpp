#include "emdp/machines.hpp"

#include <algorithm>
#include <stdexcept>

#include "emdp/digraph.hpp"

namespace emdp {

namespace {

const Distribution& pick(const DistributionTable& table, std::size_t index, StateId state) {
  if (index >= table.size() || table[index].empty()) {
    throw std::logic_error("strategy undefined at state index " + std::to_string(state));
  }
  return table[index];
}

// Lifts a table with `levels` rows of `sub.model.num_states()` entries each.
DistributionTable lift_rows(const DistributionTable& table, std::size_t levels,
                            const SubModel& sub) {
  const std::size_t nc = sub.model.num_states();
  const std::size_t np = sub.parent_states;
  DistributionTable out(levels * np);
  for (std::size_t l = 0; l < levels; ++l) {
    DistributionTable row(table.begin() + static_cast<std::ptrdiff_t>(l * nc),
                          table.begin() + static_cast<std::ptrdiff_t>((l + 1) * nc));
    auto lifted = lift_table(row, sub);
    std::move(lifted.begin(), lifted.end(), out.begin() + static_cast<std::ptrdiff_t>(l * np));
  }
  return out;
}

std::int64_t clamp_index(std::int64_t v, std::int64_t hi) { return std::clamp<std::int64_t>(v, 0, hi); }

}  // namespace

// ---------------------------------------------------------------------------------------

SwitchingMachine::SwitchingMachine(DistributionTable pump, DistributionTable mu,
                                   std::int64_t low, std::int64_t high)
    : pump_(std::move(pump)), mu_(std::move(mu)), low_(low), high_(high) {}

void SwitchingMachine::start(MemorySpan memory, StateId, std::int64_t level) const {
  memory[0] = level <= low_ ? 1 : 0;
}

void SwitchingMachine::observe(MemorySpan memory, StateId, std::int64_t level) const {
  if (level <= low_) {
    memory[0] = 1;
  } else if (level > high_) {
    memory[0] = 0;
  }
}

const Distribution& SwitchingMachine::next(StateId state, MemoryView memory) const {
  return pick(memory[0] ? pump_ : mu_, state, state);
}

nlohmann::json SwitchingMachine::to_json() const {
  return {{"kind", "type1"},
          {"low", low_},
          {"high", high_},
          {"pump", table_to_json(pump_)},
          {"mu", table_to_json(mu_)}};
}

MachinePtr SwitchingMachine::lift(const SubModel& sub) const {
  return std::make_shared<SwitchingMachine>(lift_table(pump_, sub), lift_table(mu_, sub), low_,
                                            high_);
}

MachinePtr SwitchingMachine::from_json(const nlohmann::json& j) {
  return std::make_shared<SwitchingMachine>(table_from_json(j.at("pump")),
                                            table_from_json(j.at("mu")),
                                            j.at("low").get<std::int64_t>(),
                                            j.at("high").get<std::int64_t>());
}

// ---------------------------------------------------------------------------------------

std::int64_t progressive_target(std::int64_t threshold, std::int64_t stage, std::int64_t period) {
  const mpz_class base = mpz_class(stage) * period;
  const mpz_class cube = base * base * base;
  mpz_class root;
  mpz_root(root.get_mpz_t(), cube.get_mpz_t(), 4);
  mpz_class fourth = root * root;
  fourth *= fourth;
  if (fourth < cube) ++root;
  return threshold + to_int64(root);
}

StagedMachine::StagedMachine(DistributionTable mu1, DistributionTable mu2,
                             DistributionTable kappa, DistributionTable pump, Params params)
    : mu1_(std::move(mu1)),
      mu2_(std::move(mu2)),
      kappa_(std::move(kappa)),
      pump_(std::move(pump)),
      params_(params) {
  if (params_.steps1 < 0 || params_.steps2 < 0 || params_.steps1 + params_.steps2 <= 0) {
    throw std::invalid_argument("staged machine needs a positive stage length");
  }
}

std::int64_t StagedMachine::pump_target(std::int64_t stage) const {
  return progressive_target(params_.threshold, stage, params_.period);
}

void StagedMachine::settle(MemorySpan memory, StateId state, std::int64_t level) const {
  MemoryCell& stage = memory[0];
  MemoryCell& phase = memory[1];
  MemoryCell& left = memory[2];
  while (true) {
    if (phase != Pump && level < params_.threshold) {
      phase = Pump;
      left = pump_target(stage);
    } else if (phase == Mu1 && left <= 0) {
      phase = Mu2;
      left = params_.steps2 * stage;
    } else if (phase == Mu2 && left <= 0) {
      phase = Kappa;
    } else if (phase == Kappa && state == params_.anchor) {
      phase = Pump;
      left = pump_target(stage);
    } else if (phase == Pump && level >= left) {
      if (!params_.stage_cap || stage < *params_.stage_cap) ++stage;
      phase = Mu1;
      left = params_.steps1 * stage;
    } else {
      return;
    }
  }
}

void StagedMachine::start(MemorySpan memory, StateId state, std::int64_t level) const {
  memory[0] = 1;
  memory[1] = Mu1;
  memory[2] = params_.steps1;
  settle(memory, state, level);
}

void StagedMachine::observe(MemorySpan memory, StateId state, std::int64_t level) const {
  if (memory[1] == Mu1 || memory[1] == Mu2) --memory[2];
  settle(memory, state, level);
}

const Distribution& StagedMachine::next(StateId state, MemoryView memory) const {
  switch (memory[1]) {
    case Mu1: return pick(mu1_, state, state);
    case Mu2: return pick(mu2_, state, state);
    case Kappa: return pick(kappa_, state, state);
    default: return pick(pump_, state, state);
  }
}

nlohmann::json StagedMachine::to_json() const {
  nlohmann::json j = {{"kind", "staged"},
                      {"steps1", params_.steps1},
                      {"steps2", params_.steps2},
                      {"period", params_.period},
                      {"anchor", params_.anchor},
                      {"threshold", params_.threshold},
                      {"stage_cap", nullptr},
                      {"mu1", table_to_json(mu1_)},
                      {"mu2", table_to_json(mu2_)},
                      {"kappa", table_to_json(kappa_)},
                      {"pump", table_to_json(pump_)}};
  if (params_.stage_cap) j["stage_cap"] = *params_.stage_cap;
  return j;
}

MachinePtr StagedMachine::lift(const SubModel& sub) const {
  Params p = params_;
  p.anchor = sub.state_to_parent.at(p.anchor);
  return std::make_shared<StagedMachine>(lift_table(mu1_, sub), lift_table(mu2_, sub),
                                         lift_table(kappa_, sub), lift_table(pump_, sub), p);
}

MachinePtr StagedMachine::from_json(const nlohmann::json& j) {
  Params p;
  p.steps1 = j.at("steps1").get<std::int64_t>();
  p.steps2 = j.at("steps2").get<std::int64_t>();
  p.period = j.at("period").get<std::int64_t>();
  p.anchor = j.at("anchor").get<StateId>();
  p.threshold = j.at("threshold").get<std::int64_t>();
  if (!j.at("stage_cap").is_null()) p.stage_cap = j.at("stage_cap").get<std::int64_t>();
  return std::make_shared<StagedMachine>(table_from_json(j.at("mu1")), table_from_json(j.at("mu2")),
                                         table_from_json(j.at("kappa")),
                                         table_from_json(j.at("pump")), p);
}

// ---------------------------------------------------------------------------------------

TimeShareMachine::TimeShareMachine(std::vector<DistributionTable> tables,
                                   std::vector<std::int64_t> counts)
    : tables_(std::move(tables)), counts_(std::move(counts)) {
  if (tables_.empty() || tables_.size() != counts_.size() ||
      std::none_of(counts_.begin(), counts_.end(), [](std::int64_t c) { return c > 0; }) ||
      std::any_of(counts_.begin(), counts_.end(), [](std::int64_t c) { return c < 0; })) {
    throw std::invalid_argument("time share needs non-negative counts with a positive one");
  }
}

void TimeShareMachine::start(MemorySpan memory, StateId, std::int64_t) const {
  memory[0] = 0;
  memory[1] = counts_[0];
  while (memory[1] == 0) {
    memory[0] = (memory[0] + 1) % static_cast<MemoryCell>(counts_.size());
    memory[1] = counts_[static_cast<std::size_t>(memory[0])];
  }
}

void TimeShareMachine::observe(MemorySpan memory, StateId, std::int64_t) const {
  --memory[1];
  while (memory[1] <= 0) {
    memory[0] = (memory[0] + 1) % static_cast<MemoryCell>(counts_.size());
    memory[1] = counts_[static_cast<std::size_t>(memory[0])];
  }
}

const Distribution& TimeShareMachine::next(StateId state, MemoryView memory) const {
  return pick(tables_[static_cast<std::size_t>(memory[0])], state, state);
}

nlohmann::json TimeShareMachine::to_json() const {
  auto tables = nlohmann::json::array();
  for (const auto& t : tables_) tables.push_back(table_to_json(t));
  return {{"kind", "time_share"}, {"counts", counts_}, {"tables", tables}};
}

MachinePtr TimeShareMachine::lift(const SubModel& sub) const {
  std::vector<DistributionTable> tables;
  for (const auto& t : tables_) tables.push_back(lift_table(t, sub));
  return std::make_shared<TimeShareMachine>(std::move(tables), counts_);
}

MachinePtr TimeShareMachine::from_json(const nlohmann::json& j) {
  std::vector<DistributionTable> tables;
  for (const auto& t : j.at("tables")) tables.push_back(table_from_json(t));
  return std::make_shared<TimeShareMachine>(std::move(tables),
                                            j.at("counts").get<std::vector<std::int64_t>>());
}

// ---------------------------------------------------------------------------------------

GuardMachine::GuardMachine(MachinePtr inner, DistributionTable safe, std::int64_t danger)
    : inner_(std::move(inner)), safe_(std::move(safe)), danger_(danger) {}

void GuardMachine::start(MemorySpan memory, StateId state, std::int64_t level) const {
  memory[0] = level <= danger_ ? 1 : 0;
  if (!memory[0]) inner_->start(memory.subspan(1), state, level);
}

void GuardMachine::observe(MemorySpan memory, StateId state, std::int64_t level) const {
  if (memory[0]) return;
  if (level <= danger_) {
    memory[0] = 1;
    return;
  }
  inner_->observe(memory.subspan(1), state, level);
}

const Distribution& GuardMachine::next(StateId state, MemoryView memory) const {
  if (memory[0]) return pick(safe_, state, state);
  return inner_->next(state, memory.subspan(1));
}

nlohmann::json GuardMachine::to_json() const {
  return {{"kind", "guard"},
          {"danger", danger_},
          {"safe", table_to_json(safe_)},
          {"inner", inner_->to_json()}};
}

MachinePtr GuardMachine::lift(const SubModel& sub) const {
  return std::make_shared<GuardMachine>(inner_->lift(sub), lift_table(safe_, sub), danger_);
}

MachinePtr GuardMachine::from_json(const nlohmann::json& j) {
  return std::make_shared<GuardMachine>(machine_from_json(j.at("inner")),
                                        table_from_json(j.at("safe")),
                                        j.at("danger").get<std::int64_t>());
}

// ---------------------------------------------------------------------------------------

ReplayMachine::ReplayMachine(DistributionTable reach, DistributionTable replay,
                             std::size_t num_states, StateId reference,
                             std::int64_t reference_level, std::int64_t band)
    : reach_(std::move(reach)),
      replay_(std::move(replay)),
      num_states_(num_states),
      reference_(reference),
      reference_level_(reference_level),
      band_(band) {
  if (replay_.size() != static_cast<std::size_t>(band_ + 1) * num_states_) {
    throw std::invalid_argument("replay table has the wrong size");
  }
}

void ReplayMachine::anchor(MemorySpan memory, std::int64_t level) const {
  const std::int64_t offset = std::max<std::int64_t>(0, level - reference_level_);
  memory[0] = 1;
  memory[1] = offset;
  memory[2] = level - offset;
}

void ReplayMachine::start(MemorySpan memory, StateId state, std::int64_t level) const {
  memory[0] = 0;
  memory[1] = 0;
  memory[2] = 0;
  if (state == reference_) anchor(memory, level);
}

void ReplayMachine::observe(MemorySpan memory, StateId state, std::int64_t level) const {
  if (memory[0] == 1) {
    const std::int64_t v = level - memory[1];
    if (v >= 0 && v <= band_) {
      memory[2] = v;
      return;
    }
    memory[0] = 0;
  }
  if (state == reference_) anchor(memory, level);
}

const Distribution& ReplayMachine::next(StateId state, MemoryView memory) const {
  if (memory[0] == 0) return pick(reach_, state, state);
  return pick(replay_, static_cast<std::size_t>(memory[2]) * num_states_ + state, state);
}

nlohmann::json ReplayMachine::to_json() const {
  return {{"kind", "case_b"},
          {"states", num_states_},
          {"reference", reference_},
          {"reference_level", reference_level_},
          {"band", band_},
          {"reach", table_to_json(reach_)},
          {"replay", table_to_json(replay_)}};
}

MachinePtr ReplayMachine::lift(const SubModel& sub) const {
  return std::make_shared<ReplayMachine>(
      lift_table(reach_, sub), lift_rows(replay_, static_cast<std::size_t>(band_ + 1), sub),
      sub.parent_states, sub.state_to_parent.at(reference_), reference_level_, band_);
}

MachinePtr ReplayMachine::from_json(const nlohmann::json& j) {
  return std::make_shared<ReplayMachine>(
      table_from_json(j.at("reach")), table_from_json(j.at("replay")),
      j.at("states").get<std::size_t>(), j.at("reference").get<StateId>(),
      j.at("reference_level").get<std::int64_t>(), j.at("band").get<std::int64_t>());
}

// ---------------------------------------------------------------------------------------

CompositeMachine::CompositeMachine(Parts parts) : parts_(std::move(parts)) {
  const std::size_t n = parts_.num_states;
  if (parts_.low.size() != static_cast<std::size_t>(parts_.low_height + 1) * n ||
      parts_.transient.size() != n || parts_.target_of.size() != n || parts_.safe.size() != n) {
    throw std::invalid_argument("composite machine parts have inconsistent sizes");
  }
  for (const auto& t : parts_.targets) {
    target_memory_ = std::max(target_memory_, t.machine->memory_size());
  }
}

void CompositeMachine::enter_high(MemorySpan memory, StateId state, std::int64_t level) const {
  const std::size_t k = parts_.target_of[state];
  if (k != npos) {
    if (level < parts_.targets[k].floor) {
      memory[0] = Safe;
      return;
    }
    memory[0] = Target;
    memory[2] = static_cast<MemoryCell>(k);
    parts_.targets[k].machine->start(memory.subspan(3), state, level);
    return;
  }
  memory[0] = level <= parts_.danger ? Safe : Transient;
}

void CompositeMachine::start(MemorySpan memory, StateId state, std::int64_t level) const {
  std::fill(memory.begin(), memory.end(), 0);
  memory[1] = level;
  if (level < parts_.climb) {
    memory[0] = Low;
  } else {
    enter_high(memory, state, level);
  }
}

void CompositeMachine::observe(MemorySpan memory, StateId state, std::int64_t level) const {
  memory[1] = level;
  switch (memory[0]) {
    case Low:
      if (level >= parts_.climb) enter_high(memory, state, level);
      return;
    case Transient:
      enter_high(memory, state, level);
      return;
    case Target:
      parts_.targets[static_cast<std::size_t>(memory[2])].machine->observe(memory.subspan(3),
                                                                           state, level);
      return;
    default:
      return;
  }
}

const Distribution& CompositeMachine::next(StateId state, MemoryView memory) const {
  switch (memory[0]) {
    case Low: {
      const auto row = static_cast<std::size_t>(clamp_index(memory[1], parts_.low_height));
      return pick(parts_.low, row * parts_.num_states + state, state);
    }
    case Transient: return pick(parts_.transient, state, state);
    case Target:
      return parts_.targets[static_cast<std::size_t>(memory[2])].machine->next(
          state, memory.subspan(3));
    default: return pick(parts_.safe, state, state);
  }
}

nlohmann::json CompositeMachine::to_json() const {
  auto targets = nlohmann::json::array();
  for (const auto& t : parts_.targets) {
    targets.push_back({{"floor", t.floor}, {"machine", t.machine->to_json()}});
  }
  auto target_of = nlohmann::json::array();
  for (std::size_t k : parts_.target_of) {
    target_of.push_back(k == npos ? nlohmann::json(nullptr) : nlohmann::json(k));
  }
  return {{"kind", "epsilon"},
          {"states", parts_.num_states},
          {"low_height", parts_.low_height},
          {"low", table_to_json(parts_.low)},
          {"climb", parts_.climb},
          {"danger", parts_.danger},
          {"transient", table_to_json(parts_.transient)},
          {"target_of", target_of},
          {"targets", targets},
          {"safe", table_to_json(parts_.safe)}};
}

MachinePtr CompositeMachine::lift(const SubModel& sub) const {
  Parts p;
  p.num_states = sub.parent_states;
  p.low_height = parts_.low_height;
  p.low = lift_rows(parts_.low, static_cast<std::size_t>(parts_.low_height + 1), sub);
  p.climb = parts_.climb;
  p.danger = parts_.danger;
  p.transient = lift_table(parts_.transient, sub);
  p.target_of.assign(sub.parent_states, npos);
  for (StateId s = 0; s < parts_.num_states; ++s) {
    p.target_of[sub.state_to_parent.at(s)] = parts_.target_of[s];
  }
  for (const auto& t : parts_.targets) p.targets.push_back({t.machine->lift(sub), t.floor});
  p.safe = lift_table(parts_.safe, sub);
  return std::make_shared<CompositeMachine>(std::move(p));
}

MachinePtr CompositeMachine::from_json(const nlohmann::json& j) {
  Parts p;
  p.num_states = j.at("states").get<std::size_t>();
  p.low_height = j.at("low_height").get<std::int64_t>();
  p.low = table_from_json(j.at("low"));
  p.climb = j.at("climb").get<std::int64_t>();
  p.danger = j.at("danger").get<std::int64_t>();
  p.transient = table_from_json(j.at("transient"));
  for (const auto& k : j.at("target_of")) p.target_of.push_back(k.is_null() ? npos : k.get<std::size_t>());
  for (const auto& t : j.at("targets")) {
    p.targets.push_back({machine_from_json(t.at("machine")), t.at("floor").get<std::int64_t>()});
  }
  p.safe = table_from_json(j.at("safe"));
  return std::make_shared<CompositeMachine>(std::move(p));
}

// ---------------------------------------------------------------------------------------

MachinePtr machine_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "table") return std::make_shared<TableMachine>(table_from_json(j.at("table")));
  if (kind == "type1") return SwitchingMachine::from_json(j);
  if (kind == "staged") return StagedMachine::from_json(j);
  if (kind == "time_share") return TimeShareMachine::from_json(j);
  if (kind == "guard") return GuardMachine::from_json(j);
  if (kind == "case_b") return ReplayMachine::from_json(j);
  if (kind == "epsilon") return CompositeMachine::from_json(j);
  throw std::invalid_argument("unknown strategy kind '" + kind + "'");
}

}  // namespace emdp
