#include "experiments/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace ccfr::experiments {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Reads fields from one JSON object and remembers which keys were used.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  template <class T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = raw(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where(key) + " has the wrong type");
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) throw ConfigError("unknown key " + where(key));
    }
  }

  std::string where(const std::string& key = {}) const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

SequenceRef parse_sequence(const json& j, const std::string& path) {
  SequenceRef ref;
  if (j.is_string()) {
    ref.label = j.get<std::string>();
  } else if (j.is_number_integer()) {
    ref.index = j.get<std::int32_t>();
    if (ref.index < 0) throw ConfigError(path + " must be a nonnegative index");
  } else {
    throw ConfigError(path + " must be a sequence label or index");
  }
  return ref;
}

std::vector<TermSpec> parse_terms(Reader& r, const std::string& key, bool squared) {
  std::vector<TermSpec> terms;
  if (!r.has(key)) return terms;
  const json& arr = r.raw(key);
  if (!arr.is_array()) throw ConfigError(r.where(key) + " must be an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    Reader t(arr[i], r.where(key) + "[" + std::to_string(i) + "]");
    TermSpec term;
    if (!t.has("sequence")) throw ConfigError(t.where() + " needs a sequence");
    term.sequence = parse_sequence(t.raw("sequence"), t.where("sequence"));
    if (squared) {
      t.get("target", term.target);
      t.get("weight", term.weight);
    } else {
      t.get("coefficient", term.coefficient);
    }
    t.finish();
    terms.push_back(term);
  }
  return terms;
}

ConstraintSpec parse_constraint(const json& j, const std::string& path) {
  Reader r(j, path);
  ConstraintSpec c;
  r.get("type", c.type);
  r.get("label", c.label);
  if (c.type == "linear") {
    r.get("sense", c.sense);
    if (c.sense != "at_most" && c.sense != "at_least") {
      throw ConfigError(r.where("sense") + " must be at_most or at_least");
    }
    c.terms = parse_terms(r, "terms", false);
    r.get("bound", c.bound);
  } else if (c.type == "max_of_linear") {
    if (!r.has("pieces") || !r.raw("pieces").is_array()) throw ConfigError(r.where("pieces") + " must be an array");
    const json& arr = r.raw("pieces");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Reader p(arr[i], r.where("pieces") + "[" + std::to_string(i) + "]");
      PieceSpec piece;
      piece.terms = parse_terms(p, "terms", false);
      p.get("offset", piece.offset);
      p.finish();
      c.pieces.push_back(std::move(piece));
    }
  } else if (c.type == "squared_distance") {
    c.terms = parse_terms(r, "terms", true);
    r.get("radius", c.radius);
  } else if (c.type == "risk") {
    r.get("bound", c.bound);
  } else {
    throw ConfigError(r.where("type") + ": unknown constraint type '" + c.type + "'");
  }
  r.finish();
  return c;
}

GameSpec parse_game(const json& j, const std::string& path) {
  Reader r(j, path);
  GameSpec g;
  r.get("kind", g.kind);
  if (g.kind == "file") {
    r.get("path", g.path);
    if (g.path.empty()) throw ConfigError(r.where("path") + " is required for file games");
  } else if (g.kind == "transit") {
    auto& t = g.transit;
    r.get("width", t.width);
    r.get("failure", t.failure);
    r.get("encounter", t.encounter);
    r.get("escape", t.escape);
    r.get("step_cost", t.step_cost);
    r.get("base_row", t.base_row);
    r.get("base_column", t.base_column);
  } else if (g.kind != "kuhn" && g.kind != "leduc") {
    throw ConfigError(r.where("kind") + ": unknown game '" + g.kind + "' (kuhn, leduc, file, transit)");
  }
  r.finish();
  return g;
}

SolverSpec parse_solver(const json& j, const std::string& path, SolverSpec s) {
  Reader r(j, path);
  auto& c = s.config;
  r.get("algorithm", s.algorithm);
  if (s.algorithm != "ccfr" && s.algorithm != "cfr") throw ConfigError(r.where("algorithm") + " must be ccfr or cfr");
  r.get("iterations", c.iterations);
  if (r.has("beta")) {
    const json& b = r.raw("beta");
    if (b.is_string() && b.get<std::string>() == "auto") {
      c.beta = -1.0;
    } else if (b.is_number()) {
      c.beta = b.get<double>();
      if (c.beta < 0.0) throw ConfigError(r.where("beta") + " must be nonnegative or \"auto\"");
    } else {
      throw ConfigError(r.where("beta") + " must be a number or \"auto\"");
    }
  }
  r.get("clamp", c.clamp);
  std::string rule = to_string(c.step_rule);
  r.get("step_rule", rule);
  try {
    c.step_rule = step_rule_from_string(rule);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(r.where("step_rule") + ": " + e.what());
  }
  r.get("step", c.step);
  int constrained = c.constrained == Player::One ? 1 : 2;
  r.get("constrained", constrained);
  if (constrained != 1 && constrained != 2) throw ConfigError(r.where("constrained") + " must be 1 or 2");
  c.constrained = constrained == 1 ? Player::One : Player::Two;
  r.get("beta_doubling", c.beta_doubling);
  r.get("doubling_threshold", c.doubling_threshold);
  r.get("doubling_cap", c.doubling_cap);
  r.get("checkpoints", c.checkpoints);
  r.get("exploitability", c.exploitability);
  r.finish();
  try {
    validate(c);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(r.where() + ": " + e.what());
  }
  return s;
}

SweepSpec parse_sweep(const json& j, const std::string& path) {
  Reader r(j, path);
  SweepSpec s;
  r.get("bounds", s.bounds);
  r.get("unconstrained", s.unconstrained);
  r.get("max_width", s.max_width);
  r.finish();
  for (double b : s.bounds) {
    if (!(b >= 0.0 && b <= 1.0)) throw ConfigError(r.where("bounds") + " entries must lie in [0, 1]");
  }
  return s;
}

OpponentSpec parse_opponent(const json& j, const std::string& path) {
  Reader r(j, path);
  OpponentSpec o;
  r.get("game", o.game);
  if (o.game != "kuhn" && o.game != "leduc") throw ConfigError(r.where("game") + " must be kuhn or leduc");
  r.get("abstraction", o.abstraction);
  r.get("target_iterations", o.target_iterations);
  r.get("observations", o.observations);
  r.get("confidences", o.confidences);
  r.get("seeds", o.seeds);
  r.get("exact", o.exact);
  r.get("reach", o.reach);
  r.finish();
  if (o.reach != "empirical" && o.reach != "known") throw ConfigError(r.where("reach") + " must be empirical or known");
  if (o.target_iterations < 1) throw ConfigError(r.where("target_iterations") + " must be positive");
  if (o.seeds < 1) throw ConfigError(r.where("seeds") + " must be positive");
  for (auto n : o.observations) {
    if (n < 1) throw ConfigError(r.where("observations") + " entries must be positive");
  }
  for (double g : o.confidences) {
    if (!(g > 0.0 && g < 1.0)) throw ConfigError(r.where("confidences") + " entries must lie in (0, 1)");
  }
  return o;
}

ordered_json sequence_json(const SequenceRef& s) {
  if (!s.label.empty()) return s.label;
  return s.index;
}

ordered_json terms_json(const std::vector<TermSpec>& terms, bool squared) {
  auto a = ordered_json::array();
  for (const auto& t : terms) {
    ordered_json j;
    j["sequence"] = sequence_json(t.sequence);
    if (squared) {
      j["target"] = t.target;
      j["weight"] = t.weight;
    } else {
      j["coefficient"] = t.coefficient;
    }
    a.push_back(j);
  }
  return a;
}

}  // namespace

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::Solve:
      return "solve";
    case Experiment::TransitSweep:
      return "transit_sweep";
    case Experiment::LpCompare:
      return "lp_compare";
    case Experiment::OpponentModel:
      return "opponent_model";
    case Experiment::BoundAudit:
      return "bound_audit";
  }
  return "solve";
}

Experiment experiment_from_string(const std::string& name) {
  std::string n = name;
  for (auto& ch : n) {
    if (ch == '-') ch = '_';
  }
  for (auto e : {Experiment::Solve, Experiment::TransitSweep, Experiment::LpCompare, Experiment::OpponentModel,
                 Experiment::BoundAudit}) {
    if (to_string(e) == n) return e;
  }
  throw ConfigError("unknown experiment '" + name + "'");
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Reader r(doc, "");
  ExperimentConfig cfg;
  std::string kind = "solve";
  r.get("experiment", kind);
  cfg.experiment = experiment_from_string(kind);
  r.get("seed", cfg.seed);
  r.get("override_scale_guard", cfg.override_scale_guard);

  const auto e = cfg.experiment;
  if (e == Experiment::TransitSweep) cfg.game.kind = "transit";
  if (e != Experiment::OpponentModel && r.has("game")) cfg.game = parse_game(r.raw("game"), "game");
  if (e == Experiment::TransitSweep && cfg.game.kind != "transit") {
    throw ConfigError("game.kind must be transit for transit_sweep");
  }
  if (e != Experiment::OpponentModel && e != Experiment::TransitSweep && r.has("constraints")) {
    const json& arr = r.raw("constraints");
    if (!arr.is_array()) throw ConfigError("constraints must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      cfg.constraints.push_back(parse_constraint(arr[i], "constraints[" + std::to_string(i) + "]"));
    }
  }
  if (e == Experiment::TransitSweep) cfg.solver.config.constrained = Player::Two;
  if (e == Experiment::OpponentModel) {
    cfg.solver.config.step_rule = StepRule::Decaying;
    cfg.solver.config.step = 1000.0;
    cfg.solver.config.exploitability = false;
  }
  if (r.has("solver")) cfg.solver = parse_solver(r.raw("solver"), "solver", cfg.solver);
  if (e == Experiment::TransitSweep) {
    if (cfg.solver.config.constrained != Player::Two) {
      throw ConfigError("solver.constrained must be 2 (the patroller) for transit_sweep");
    }
    if (r.has("sweep")) cfg.sweep = parse_sweep(r.raw("sweep"), "sweep");
  }
  if (e == Experiment::OpponentModel) {
    if (r.has("opponent")) cfg.opponent = parse_opponent(r.raw("opponent"), "opponent");
  }
  if (cfg.solver.algorithm == "cfr" && e != Experiment::Solve) {
    throw ConfigError("solver.algorithm cfr is only available for solve");
  }
  r.finish();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

ordered_json to_json(const ExperimentConfig& cfg) {
  ordered_json j;
  const auto e = cfg.experiment;
  j["experiment"] = to_string(e);
  j["seed"] = cfg.seed;
  j["override_scale_guard"] = cfg.override_scale_guard;
  if (e != Experiment::OpponentModel) {
    ordered_json g;
    g["kind"] = cfg.game.kind;
    if (cfg.game.kind == "file") g["path"] = cfg.game.path;
    if (cfg.game.kind == "transit") {
      const auto& t = cfg.game.transit;
      g["width"] = t.width;
      g["failure"] = t.failure;
      g["encounter"] = t.encounter;
      g["escape"] = t.escape;
      g["step_cost"] = t.step_cost;
      g["base_row"] = t.base_row;
      g["base_column"] = t.base_column;
    }
    j["game"] = g;
  }
  if (e != Experiment::OpponentModel && e != Experiment::TransitSweep) {
    auto cons = ordered_json::array();
    for (const auto& c : cfg.constraints) {
      ordered_json cj;
      cj["type"] = c.type;
      if (!c.label.empty()) cj["label"] = c.label;
      if (c.type == "linear") {
        cj["sense"] = c.sense;
        cj["terms"] = terms_json(c.terms, false);
        cj["bound"] = c.bound;
      } else if (c.type == "max_of_linear") {
        auto pieces = ordered_json::array();
        for (const auto& p : c.pieces) pieces.push_back({{"terms", terms_json(p.terms, false)}, {"offset", p.offset}});
        cj["pieces"] = pieces;
      } else if (c.type == "squared_distance") {
        cj["terms"] = terms_json(c.terms, true);
        cj["radius"] = c.radius;
      } else {
        cj["bound"] = c.bound;
      }
      cons.push_back(cj);
    }
    j["constraints"] = cons;
  }
  const auto& c = cfg.solver.config;
  ordered_json s;
  s["algorithm"] = cfg.solver.algorithm;
  s["iterations"] = c.iterations;
  if (c.beta < 0.0) {
    s["beta"] = "auto";
  } else {
    s["beta"] = c.beta;
  }
  s["clamp"] = c.clamp;
  s["step_rule"] = to_string(c.step_rule);
  s["step"] = c.step;
  s["constrained"] = c.constrained == Player::One ? 1 : 2;
  s["beta_doubling"] = c.beta_doubling;
  s["doubling_threshold"] = c.doubling_threshold;
  s["doubling_cap"] = c.doubling_cap;
  s["checkpoints"] = c.checkpoints;
  s["exploitability"] = c.exploitability;
  j["solver"] = s;
  if (e == Experiment::TransitSweep) {
    j["sweep"] = {{"bounds", cfg.sweep.bounds},
                  {"unconstrained", cfg.sweep.unconstrained},
                  {"max_width", cfg.sweep.max_width}};
  }
  if (e == Experiment::OpponentModel) {
    const auto& o = cfg.opponent;
    j["opponent"] = {{"game", o.game},
                     {"abstraction", o.abstraction},
                     {"target_iterations", o.target_iterations},
                     {"observations", o.observations},
                     {"confidences", o.confidences},
                     {"seeds", o.seeds},
                     {"exact", o.exact},
                     {"reach", o.reach}};
  }
  return j;
}

std::string echo(const ExperimentConfig& config) { return to_json(config).dump(); }

}  // namespace ccfr::experiments
