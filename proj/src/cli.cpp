#include "emdp/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "emdp/energy.hpp"
#include "emdp/graphs.hpp"
#include "emdp/model.hpp"
#include "emdp/sim.hpp"
#include "emdp/synth.hpp"

namespace emdp::cli {

namespace {

using Json = nlohmann::ordered_json;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string model;
  std::string strategy;
  std::string config;
  std::string state;
  std::string epsilon = "1/10";
  std::string out_path;
  std::uint64_t seed = 0;
  std::uint64_t episodes = 100;
  std::uint64_t steps = 10000;
  bool json = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw InputError("cannot write '" + path + "'");
}

Emdp load_model(const std::string& path) {
  try {
    auto e = parse_emdp(read_file(path));
    validate(e);
    return e;
  } catch (const SyntaxError& ex) {
    throw InputError(path + ":" + std::to_string(ex.line()) + ":" + std::to_string(ex.column()) +
                     ": syntax error: " + ex.message());
  } catch (const ValidationError& ex) {
    throw InputError(path + ": validation error " + ex.what());
  }
}

Configuration load_config(const Emdp& e, const std::string& text) {
  if (text.empty()) throw InputError("--config is required");
  try {
    return parse_configuration(e, text);
  } catch (const SyntaxError& ex) {
    throw InputError("bad configuration '" + text + "': " + ex.message());
  }
}

Rational load_epsilon(const std::string& text) {
  const auto eps = parse_rational(text);
  if (!eps || *eps <= 0) throw InputError("epsilon must be a positive rational, got '" + text + "'");
  return *eps;
}

Json rational(const Rational& q) { return Json(rational_to_json(q)); }

Json optional_rational(const std::optional<Rational>& q) {
  return q ? rational(*q) : Json(nullptr);
}

Json level(const Level& l) { return l.is_finite() ? Json(l.value()) : Json(nullptr); }

std::string text_of(const Json& v) {
  if (v.is_null()) return "-inf";
  return to_string(rational_from_json(v));
}

// --- commands -------------------------------------------------------------------------

struct Result {
  Json doc;
  std::string text;
  int code = kOk;
};

Result cmd_info(const Options& o) {
  const auto e = load_model(o.model);
  Json ms = Json::array();
  std::string listed;
  for (const auto& m : mecs(e)) {
    Json ids = Json::array();
    std::string names;
    for (StateId s : m.states) {
      ids.push_back(e.state(s).id);
      names += (names.empty() ? "" : ",") + e.state(s).id;
    }
    ms.push_back(ids);
    listed += " {" + names + "}";
  }
  const bool sc = is_strongly_connected(e);
  const auto cls = to_string(classify(e));
  Result r;
  r.doc = {{"command", "info"},
           {"states", e.num_states()},
           {"transitions", e.num_transitions()},
           {"max_update", max_update(e)},
           {"strongly_connected", sc},
           {"mecs", ms},
           {"classification", cls}};
  std::ostringstream t;
  t << "states: " << e.num_states() << "\ntransitions: " << e.num_transitions()
    << "\nmax update: " << max_update(e) << "\nstrongly connected: " << (sc ? "yes" : "no")
    << "\nMECs (" << ms.size() << "):" << listed << "\nclassification: " << cls << "\n";
  r.text = t.str();
  return r;
}

Result cmd_levels(const Options& o, const std::string& name) {
  const auto e = load_model(o.model);
  const auto levels = name == "safety" ? min_safe(e) : min_pump(e);
  Result r;
  Json rows = Json::array();
  std::ostringstream t;
  for (StateId s = 0; s < e.num_states(); ++s) {
    rows.push_back({{"state", e.state(s).id}, {"level", level(levels[s])}});
    t << e.state(s).id << ' ' << to_string(levels[s]) << '\n';
  }
  r.doc = {{"command", name}, {"levels", rows}};
  r.text = t.str();
  return r;
}

Result cmd_classify(const Options& o) {
  const auto e = load_model(o.model);
  Result r;
  r.doc = {{"command", "classify"}, {"classification", to_string(classify(e))}};
  r.text = to_string(classify(e)) + "\n";
  return r;
}

Result cmd_value(const Options& o) {
  const auto e = load_model(o.model);
  const auto cfg = load_config(e, o.config);
  const auto eps = load_epsilon(o.epsilon);
  const auto report = approx_value(e, cfg, eps);
  Result r;
  r.doc = {{"command", "value"},
           {"config", format_configuration(e, cfg)},
           {"epsilon", rational(eps)},
           {"value", optional_rational(report.value)},
           {"kind", to_string(report.kind)}};
  r.text = "value " + format_configuration(e, cfg) + " = " + text_of(r.doc["value"]) + " (" +
           to_string(report.kind) + ", epsilon " + to_string(eps) + ")\n";
  if (!report.value) r.code = kNegative;
  return r;
}

Result cmd_limit(const Options& o) {
  const auto e = load_model(o.model);
  const auto s = e.find_state(o.state);
  if (!s) throw InputError("unknown state '" + o.state + "'");
  const auto v = limit_value(e, *s);
  Result r;
  r.doc = {{"command", "limit-value"}, {"state", o.state}, {"value", optional_rational(v)}};
  r.text = "limit value " + o.state + " = " + text_of(r.doc["value"]) + "\n";
  if (!v) r.code = kNegative;
  return r;
}

Result cmd_synth(const Options& o) {
  const auto e = load_model(o.model);
  const auto cfg = load_config(e, o.config);
  const auto eps = load_epsilon(o.epsilon);
  Result r;
  MachinePtr machine;
  try {
    machine = epsilon_strategy(e, cfg, eps);
  } catch (const UnsafeStart& ex) {
    r.doc = {{"command", "synth"}, {"config", format_configuration(e, cfg)}, {"epsilon", rational(eps)},
             {"unsafe", true}};
    r.text = std::string("unsafe start: ") + ex.what() + "\n";
    r.code = kNegative;
    return r;
  }
  const Json file = {{"format", "emdp-strategy"},
                     {"config", format_configuration(e, cfg)},
                     {"epsilon", rational(eps)},
                     {"machine", machine->to_json()}};
  const std::string kind = machine->to_json().at("kind");
  r.doc = {{"command", "synth"},
           {"config", format_configuration(e, cfg)},
           {"epsilon", rational(eps)},
           {"unsafe", false},
           {"kind", kind},
           {"memory_size", machine->memory_size()}};
  if (o.out_path.empty()) {
    r.doc["strategy"] = file;
    r.text = file.dump(2) + "\n";
  } else {
    write_file(o.out_path, file.dump() + "\n");
    r.doc["out"] = o.out_path;
    r.text = "wrote " + kind + " strategy for " + format_configuration(e, cfg) + " to " +
             o.out_path + "\n";
  }
  return r;
}

Result cmd_simulate(const Options& o) {
  const auto e = load_model(o.model);
  Json file;
  MachinePtr machine;
  try {
    file = Json::parse(read_file(o.strategy));
    machine = machine_from_json(file.contains("machine") ? file.at("machine") : file);
  } catch (const InputError&) {
    throw;
  } catch (const std::exception& ex) {
    throw InputError("bad strategy file '" + o.strategy + "': " + ex.what());
  }
  std::string config = o.config;
  if (config.empty() && file.contains("config")) config = file.at("config").get<std::string>();
  const auto cfg = load_config(e, config);
  if (o.episodes == 0 || o.steps == 0) throw InputError("episodes and steps must be positive");

  SimReport report;
  std::ostringstream dump;
  try {
    report = estimate_mp(e, *machine, cfg, o.episodes, o.steps, o.seed);
    if (!o.out_path.empty()) {
      write_trace_jsonl(dump, e, run_trace(e, *machine, cfg, o.steps, episode_seed(o.seed, 0)));
    }
  } catch (const std::logic_error& ex) {
    // Out-of-range ids or missing choices: the strategy was built for another model.
    throw InputError("strategy does not fit the model: " + std::string(ex.what()));
  }
  if (!o.out_path.empty()) write_file(o.out_path, dump.str());
  Json means = Json::array();
  for (const auto& m : report.episode_means) means.push_back(rational(m));
  Result r;
  r.doc = {{"command", "simulate"},
           {"config", format_configuration(e, cfg)},
           {"episodes", report.episodes},
           {"steps", report.steps},
           {"seed", o.seed},
           {"mean", report.mean},
           {"stderr", report.stderr_mean},
           {"safety_violations", report.safety_violations},
           {"max_level", report.max_level},
           {"episode_means", means}};
  std::ostringstream t;
  t << std::setprecision(6) << "episodes: " << report.episodes << "\nsteps: " << report.steps
    << "\nmean: " << report.mean << "\nstderr: " << report.stderr_mean
    << "\nsafety violations: " << report.safety_violations << "\nmax level: " << report.max_level
    << "\n";
  if (!o.out_path.empty()) t << "trace of episode 0 written to " << o.out_path << "\n";
  r.text = t.str();
  if (report.safety_violations > 0) r.code = kNegative;
  return r;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Energy MDP analysis and strategy synthesis", "emdp"};
  app.require_subcommand(1);
  app.add_flag("--json", o.json, "Print a JSON report");

  const auto model = [&](CLI::App* c) {
    c->add_option("model", o.model, "Model file")->required();
    c->fallthrough();
  };
  auto* info = app.add_subcommand("info", "Model size, MECs and classification");
  model(info);
  auto* safety = app.add_subcommand("safety", "Minimal safe levels");
  model(safety);
  auto* pump = app.add_subcommand("pump", "Minimal pumping levels");
  model(pump);
  auto* cls = app.add_subcommand("classify", "SP-EMDP classification");
  model(cls);
  auto* value = app.add_subcommand("value", "Value of a configuration within epsilon");
  model(value);
  value->add_option("--config", o.config, "Configuration, e.g. 's(5)'")->required();
  value->add_option("--epsilon", o.epsilon, "Precision (rational)")->capture_default_str();
  auto* limit = app.add_subcommand("limit-value", "Limit value of a state");
  model(limit);
  limit->add_option("state", o.state, "State id")->required();
  auto* synth = app.add_subcommand("synth", "Synthesize an epsilon-optimal strategy");
  model(synth);
  synth->add_option("--config", o.config, "Start configuration")->required();
  synth->add_option("--epsilon", o.epsilon, "Precision (rational)")->capture_default_str();
  synth->add_option("--out", o.out_path, "Write the strategy file here");
  auto* simulate = app.add_subcommand("simulate", "Simulate a strategy file");
  model(simulate);
  simulate->add_option("strategy", o.strategy, "Strategy file from synth")->required();
  simulate->add_option("--config", o.config, "Start configuration (default: the synth one)");
  simulate->add_option("--seed", o.seed, "Base seed")->capture_default_str();
  simulate->add_option("--episodes", o.episodes, "Episodes")->capture_default_str();
  simulate->add_option("--steps", o.steps, "Steps per episode")->capture_default_str();
  simulate->add_option("--out", o.out_path, "Write the JSON lines trace of episode 0 here");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    return kInputError;
  }

  try {
    Result r;
    if (info->parsed()) r = cmd_info(o);
    if (safety->parsed()) r = cmd_levels(o, "safety");
    if (pump->parsed()) r = cmd_levels(o, "pump");
    if (cls->parsed()) r = cmd_classify(o);
    if (value->parsed()) r = cmd_value(o);
    if (limit->parsed()) r = cmd_limit(o);
    if (synth->parsed()) r = cmd_synth(o);
    if (simulate->parsed()) r = cmd_simulate(o);
    out << (o.json ? r.doc.dump(2) + "\n" : r.text);
    return r.code;
  } catch (const InputError& ex) {
    err << "error: " << ex.what() << "\n";
    return kInputError;
  }
}

}  // namespace emdp::cli
