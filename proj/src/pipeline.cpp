// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dol/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <type_traits>

namespace dol {

std::string method_name(Method m) {
  switch (m) {
    case Method::kDol:
      return "dol";
    case Method::kTwoStage:
      return "two-stage";
    case Method::kRandom:
      return "random";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  if (name == "dol") return Method::kDol;
  if (name == "two-stage") return Method::kTwoStage;
  if (name == "random") return Method::kRandom;
  return std::nullopt;
}

void DataGenConfig::validate() const {
  if (repeats == 0) throw InvalidArgument("repeats must be at least 1");
  if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) {
    throw InvalidArgument("train_fraction must lie in [0, 1]");
  }
  fit.validate();
}

void EvalConfig::validate() const {
  if (rollouts == 0) throw InvalidArgument("rollouts must be at least 1");
}

void DemoSettings::validate() const {
  if (n_samples < 2) throw InvalidArgument("demo n_samples must be at least 2");
  if (seeds == 0) throw InvalidArgument("demo seeds must be at least 1");
  train.validate();
}

void DolSchedule::validate() const {
  if (epochs == 0) throw InvalidArgument("dol epochs must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidArgument("dol learning_rate must be positive and finite");
  }
}

void PipelineConfig::validate() const {
  world.validate();
  data.validate();
  train.validate();
  dol.validate();
  eval.validate();
  demo.validate();
}

PipelineConfig default_pipeline_config() {
  PipelineConfig c;
  c.train.optimizer.learning_rate = 3e-3;
  c.train.regularizer.epsilon = 0.5;
  c.train.sg_trials = 100;
  return c;
}

// ---------------------------------------------------------------------------
// JSON text positions

namespace {

std::string escape_pointer_token(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

}  // namespace

std::vector<std::pair<std::string, std::size_t>> json_pointer_lines(std::string_view t) {
  struct Frame {
    bool object = false;
    std::string pointer;
    std::size_t index = 0;
    bool want_key = true;
    std::string pending;  // pointer of the value after the current key
  };
  std::vector<std::pair<std::string, std::size_t>> out;
  std::vector<Frame> stack;
  std::size_t line = 1;

  auto value_start = [&]() -> std::string {
    if (stack.empty()) {
      out.emplace_back("", line);
      return "";
    }
    Frame& f = stack.back();
    if (f.object) return f.pending;
    std::string p = f.pointer + "/" + std::to_string(f.index);
    out.emplace_back(p, line);
    return p;
  };

  for (std::size_t i = 0; i < t.size(); ++i) {
    const char c = t[i];
    if (c == '\n') {
      ++line;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (c == '"') {
      std::string s;
      for (++i; i < t.size() && t[i] != '"'; ++i) {
        if (t[i] == '\\' && i + 1 < t.size()) ++i;
        s += t[i];
      }
      if (!stack.empty() && stack.back().object && stack.back().want_key) {
        Frame& f = stack.back();
        f.pending = f.pointer + "/" + escape_pointer_token(s);
        out.emplace_back(f.pending, line);
        f.want_key = false;
      } else {
        value_start();
      }
      continue;
    }
    if (c == '{' || c == '[') {
      std::string p = value_start();
      Frame f;
      f.object = c == '{';
      f.pointer = std::move(p);
      stack.push_back(std::move(f));
      continue;
    }
    if (c == '}' || c == ']') {
      if (!stack.empty()) stack.pop_back();
      continue;
    }
    if (c == ':') continue;
    if (c == ',') {
      if (!stack.empty()) {
        Frame& f = stack.back();
        if (f.object) {
          f.want_key = true;
        } else {
          ++f.index;
        }
      }
      continue;
    }
    // Number or literal.
    value_start();
    while (i + 1 < t.size() && !std::isspace(static_cast<unsigned char>(t[i + 1])) &&
           t[i + 1] != ',' && t[i + 1] != ']' && t[i + 1] != '}') {
      ++i;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Config reading

namespace {

class ConfigSource {
 public:
  ConfigSource(std::string name, std::string_view text) : name_(std::move(name)) {
    for (auto& [pointer, line] : json_pointer_lines(text)) lines_.emplace(pointer, line);
  }

  [[noreturn]] void fail(const std::string& pointer, const std::string& message) const {
    std::string where = name_;
    // Walk up to the closest ancestor with a known line.
    std::string p = pointer;
    for (;;) {
      auto it = lines_.find(p);
      if (it != lines_.end()) {
        where += ":" + std::to_string(it->second);
        break;
      }
      if (p.empty()) break;
      p.erase(p.rfind('/'));
    }
    const std::string at = pointer.empty() ? "" : " (at " + pointer + ")";
    throw ConfigError(where + ": " + message + at);
  }

 private:
  std::string name_;
  std::map<std::string, std::size_t> lines_;
};

class Reader {
 public:
  Reader(const nlohmann::json* node, std::string pointer, const ConfigSource& src)
      : node_(node), pointer_(std::move(pointer)), src_(src) {
    if (node_ && !node_->is_object()) src_.fail(pointer_, "expected an object");
  }

  const std::string& pointer() const { return pointer_; }
  const ConfigSource& source() const { return src_; }

  Reader child(const char* key) {
    const nlohmann::json* v = find(key);
    return Reader(v, pointer_ + "/" + key, src_);
  }

  void get(const char* key, double& out) {
    if (const auto* v = find(key)) {
      if (!v->is_number()) src_.fail(at(key), "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) src_.fail(at(key), "expected a finite number");
    }
  }
  template <typename T>
    requires std::is_unsigned_v<T> && (!std::is_same_v<T, bool>)
  void get(const char* key, T& out) {
    if (const auto* v = find(key)) {
      if (!v->is_number_unsigned()) src_.fail(at(key), "expected a non-negative integer");
      out = v->get<T>();
    }
  }
  void get(const char* key, bool& out) {
    if (const auto* v = find(key)) {
      if (!v->is_boolean()) src_.fail(at(key), "expected true or false");
      out = v->get<bool>();
    }
  }
  void get(const char* key, std::string& out) {
    if (const auto* v = find(key)) {
      if (!v->is_string()) src_.fail(at(key), "expected a string");
      out = v->get<std::string>();
    }
  }
  void get(const char* key, std::vector<double>& out) {
    if (const auto* v = find(key)) {
      if (!v->is_array()) src_.fail(at(key), "expected an array of numbers");
      std::vector<double> values;
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_number()) {
          src_.fail(at(key) + "/" + std::to_string(i), "expected a number");
        }
        values.push_back((*v)[i].get<double>());
      }
      out = std::move(values);
    }
  }
  void get(const char* key, Range& out) {
    if (const auto* v = find(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
        src_.fail(at(key), "expected [lo, hi]");
      }
      out = Range{(*v)[0].get<double>(), (*v)[1].get<double>()};
      try {
        out.validate(key);
      } catch (const InvalidArgument& e) {
        src_.fail(at(key), e.what());
      }
    }
  }

  // Runs a validation callback and maps its failure to this object's line.
  template <typename F>
  void check(F&& f) const {
    try {
      f();
    } catch (const ConfigError&) {
      throw;
    } catch (const InvalidArgument& e) {
      src_.fail(pointer_, e.what());
    }
  }

  // Rejects keys that were never read.
  void finish() const {
    if (!node_) return;
    for (auto it = node_->begin(); it != node_->end(); ++it) {
      if (!seen_.contains(it.key())) src_.fail(at(it.key().c_str()), "unknown key");
    }
  }

 private:
  const nlohmann::json* find(const char* key) {
    seen_.insert(key);
    if (!node_) return nullptr;
    auto it = node_->find(key);
    return it == node_->end() ? nullptr : &*it;
  }
  std::string at(const char* key) const { return pointer_ + "/" + escape_pointer_token(key); }

  const nlohmann::json* node_;
  std::string pointer_;
  const ConfigSource& src_;
  std::set<std::string> seen_;
};

void read_world(Reader r, WorldConfig& w) {
  r.get("grid_rows", w.grid_rows);
  r.get("grid_cols", w.grid_cols);
  r.get("spacing", w.spacing);
  r.get("route_count", w.route_count);
  r.get("removal_fraction", w.removal_fraction);
  r.get("partitions", w.partitions);
  r.get("gammas", w.gammas);
  r.get("n_uavs", w.n_uavs);
  r.get("routes_to_select", w.routes_to_select);
  r.get("duration", w.duration);
  r.get("map_seed", w.map_seed);

  Reader uav = r.child("uav");
  uav.get("waypoint_count", w.uav.waypoint_count);
  uav.get("speed", w.uav.speed);
  uav.get("battery_capacity", w.uav.battery_capacity);
  uav.get("recharge_threshold", w.uav.recharge_threshold);
  uav.finish();

  Reader energy = r.child("energy");
  energy.get("mass", w.energy.mass);
  energy.get("g", w.energy.g);
  energy.get("rho", w.energy.rho);
  energy.get("area", w.energy.area);
  energy.get("drag_coeff", w.energy.drag_coeff);
  energy.finish();
  energy.check([&] { w.energy.validate(); });

  Reader ctx = r.child("contexts");
  ctx.get("center_x", w.ranges.center_x);
  ctx.get("center_y", w.ranges.center_y);
  ctx.get("radius", w.ranges.radius);
  ctx.get("wind_a", w.ranges.wind_a);
  ctx.get("wind_b", w.ranges.wind_b);
  ctx.get("wind_direction", w.ranges.wind_direction);
  ctx.get("cluster_window", w.ranges.cluster_window);
  ctx.finish();
  ctx.check([&] { w.ranges.validate(); });

  r.finish();
  r.check([&] { w.validate(); });
}

void read_data(Reader r, DataGenConfig& d) {
  r.get("n_samples", d.n_samples);
  r.get("repeats", d.repeats);
  r.get("train_fraction", d.train_fraction);
  Reader plan = r.child("plan");
  plan.get("max_pairs", d.plan.max_pairs);
  plan.get("random_subsets", d.plan.random_subsets);
  plan.get("include_empty", d.plan.include_empty);
  plan.finish();
  Reader fit = r.child("fit");
  fit.get("xi", d.fit.xi);
  fit.get("tolerance", d.fit.tolerance);
  fit.get("max_iterations", d.fit.max_iterations);
  fit.finish();
  fit.check([&] { d.fit.validate(); });
  r.finish();
  r.check([&] { d.validate(); });
}

void read_train(Reader r, TrainConfig& t, BaselineMode& baseline, DolSchedule& dol) {
  r.get("epochs", t.epochs);
  r.get("batch_size", t.batch_size);
  r.get("hidden", t.hidden);
  std::string optimizer = t.optimizer.kind == OptimizerConfig::Kind::kAdam ? "adam" : "sgd";
  r.get("optimizer", optimizer);
  if (optimizer == "adam") {
    t.optimizer.kind = OptimizerConfig::Kind::kAdam;
  } else if (optimizer == "sgd") {
    t.optimizer.kind = OptimizerConfig::Kind::kSgd;
  } else {
    r.source().fail(r.pointer() + "/optimizer", "optimizer must be \"adam\" or \"sgd\"");
  }
  r.get("learning_rate", t.optimizer.learning_rate);
  r.get("beta1", t.optimizer.beta1);
  r.get("beta2", t.optimizer.beta2);
  r.get("adam_epsilon", t.optimizer.adam_epsilon);
  r.get("epsilon", t.regularizer.epsilon);
  r.get("sg_trials", t.sg_trials);
  std::string mode = baseline == BaselineMode::kNone ? "none" : "label_greedy_mean";
  r.get("baseline", mode);
  if (mode == "none") {
    baseline = BaselineMode::kNone;
  } else if (mode == "label_greedy_mean") {
    baseline = BaselineMode::kLabelGreedyMean;
  } else {
    r.source().fail(r.pointer() + "/baseline",
                    "baseline must be \"none\" or \"label_greedy_mean\"");
  }
  r.get("dol_warm_start", dol.warm_start);
  r.get("dol_epochs", dol.epochs);
  r.get("dol_learning_rate", dol.learning_rate);
  r.finish();
  r.check([&] {
    t.validate();
    dol.validate();
  });
}

void read_eval(Reader r, EvalConfig& e) {
  r.get("rollouts", e.rollouts);
  r.finish();
  r.check([&] { e.validate(); });
}

void read_demo(Reader r, DemoSettings& d) {
  r.get("n_samples", d.n_samples);
  r.get("seeds", d.seeds);
  r.get("epsilon", d.train.epsilon);
  r.get("sg_trials", d.train.sg_trials);
  r.get("epochs", d.train.epochs);
  r.get("learning_rate", d.train.learning_rate);
  r.finish();
  r.check([&] { d.validate(); });
}

nlohmann::json range_json(const Range& r) { return nlohmann::json::array({r.lo, r.hi}); }

}  // namespace

PipelineConfig parse_pipeline_config(const std::string& text, const std::string& source) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(end), '\n');
    throw ConfigError(source + ":" + std::to_string(line) + ": invalid JSON: " + e.what());
  }
  const ConfigSource src(source, text);
  PipelineConfig c = default_pipeline_config();
  Reader root(&j, "", src);
  root.get("seed", c.seed);
  read_world(root.child("world"), c.world);
  read_data(root.child("data"), c.data);
  read_train(root.child("train"), c.train, c.baseline, c.dol);
  read_eval(root.child("eval"), c.eval);
  read_demo(root.child("demo"), c.demo);
  root.finish();
  return c;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_pipeline_config(buf.str(), path);
}

nlohmann::json to_json(const PipelineConfig& c) {
  const WorldConfig& w = c.world;
  nlohmann::json world = {
      {"grid_rows", w.grid_rows},
      {"grid_cols", w.grid_cols},
      {"spacing", w.spacing},
      {"route_count", w.route_count},
      {"removal_fraction", w.removal_fraction},
      {"partitions", w.partitions},
      {"gammas", w.gammas},
      {"n_uavs", w.n_uavs},
      {"routes_to_select", w.routes_to_select},
      {"duration", w.duration},
      {"map_seed", w.map_seed},
      {"uav",
       {{"waypoint_count", w.uav.waypoint_count},
        {"speed", w.uav.speed},
        {"battery_capacity", w.uav.battery_capacity},
        {"recharge_threshold", w.uav.recharge_threshold}}},
      {"energy",
       {{"mass", w.energy.mass},
        {"g", w.energy.g},
        {"rho", w.energy.rho},
        {"area", w.energy.area},
        {"drag_coeff", w.energy.drag_coeff}}},
      {"contexts",
       {{"center_x", range_json(w.ranges.center_x)},
        {"center_y", range_json(w.ranges.center_y)},
        {"radius", range_json(w.ranges.radius)},
        {"wind_a", range_json(w.ranges.wind_a)},
        {"wind_b", range_json(w.ranges.wind_b)},
        {"wind_direction", range_json(w.ranges.wind_direction)},
        {"cluster_window", w.ranges.cluster_window}}}};
  const DataGenConfig& d = c.data;
  nlohmann::json data = {{"n_samples", d.n_samples},
                         {"repeats", d.repeats},
                         {"train_fraction", d.train_fraction},
                         {"plan",
                          {{"max_pairs", d.plan.max_pairs},
                           {"random_subsets", d.plan.random_subsets},
                           {"include_empty", d.plan.include_empty}}},
                         {"fit",
                          {{"xi", d.fit.xi},
                           {"tolerance", d.fit.tolerance},
                           {"max_iterations", d.fit.max_iterations}}}};
  const TrainConfig& t = c.train;
  nlohmann::json train = {
      {"epochs", t.epochs},
      {"batch_size", t.batch_size},
      {"hidden", t.hidden},
      {"optimizer", t.optimizer.kind == OptimizerConfig::Kind::kAdam ? "adam" : "sgd"},
      {"learning_rate", t.optimizer.learning_rate},
      {"beta1", t.optimizer.beta1},
      {"beta2", t.optimizer.beta2},
      {"adam_epsilon", t.optimizer.adam_epsilon},
      {"epsilon", t.regularizer.epsilon},
      {"sg_trials", t.sg_trials},
      {"baseline", c.baseline == BaselineMode::kNone ? "none" : "label_greedy_mean"},
      {"dol_warm_start", c.dol.warm_start},
      {"dol_epochs", c.dol.epochs},
      {"dol_learning_rate", c.dol.learning_rate}};
  nlohmann::json demo = {{"n_samples", c.demo.n_samples},
                         {"seeds", c.demo.seeds},
                         {"epsilon", c.demo.train.epsilon},
                         {"sg_trials", c.demo.train.sg_trials},
                         {"epochs", c.demo.train.epochs},
                         {"learning_rate", c.demo.train.learning_rate}};
  return {{"seed", c.seed},
          {"world", world},
          {"data", data},
          {"train", train},
          {"eval", {{"rollouts", c.eval.rollouts}}},
          {"demo", demo}};
}

// ---------------------------------------------------------------------------
// Data, training and evaluation

GeneratedData generate_dataset(const World& world, const DataGenConfig& config,
                               std::uint64_t seed) {
  config.validate();
  GeneratedData out;
  Rng context_rng = make_stream(seed, 0);
  const auto contexts = generate_contexts(config.n_samples, world.config.n_uavs,
                                          world.config.ranges, context_rng);
  Rng plan_rng = make_stream(seed, 1);
  const std::vector<Selection> plan = make_selection_plan(
      world.config.route_count, world.config.routes_to_select, config.plan, plan_rng);
  out.plan_size = plan.size();
  out.plan_too_small = plan.size() < world.weight_rows() * world.weight_cols();
  out.raw.reserve(contexts.size());
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    out.raw.push_back(
        rollout_raw_data(world, contexts[i], plan, config.repeats, make_stream(seed, 2, i)()));
  }
  out.dataset = assemble_dataset(out.raw, *world.objective, config.fit, config.train_fraction,
                                 make_stream(seed, 3)());
  return out;
}

double label_greedy_baseline(std::span<const DatasetSample> samples, const Problem& problem) {
  if (samples.empty()) return 0.0;
  double total = 0.0;
  for (const DatasetSample& s : samples) {
    total += problem.f().value(run_deterministic_greedy(problem.f(), s.w, problem.system), s.w);
  }
  return total / static_cast<double>(samples.size());
}

TrainConfig resolve_train_config(const PipelineConfig& config,
                                 std::span<const DatasetSample> train, const Problem& problem,
                                 std::uint64_t seed) {
  TrainConfig t = config.train;
  t.seed = seed;
  t.baseline.reset();
  if (config.baseline == BaselineMode::kLabelGreedyMean) {
    t.baseline = label_greedy_baseline(train, problem);
  }
  return t;
}

TrainResult train_method(const PipelineConfig& config, std::span<const DatasetSample> train,
                         const Problem& problem, Method method, std::uint64_t seed) {
  const TrainConfig tc = resolve_train_config(config, train, problem, seed);
  switch (method) {
    case Method::kTwoStage:
      return train_two_stage(train, tc);
    case Method::kDol: {
      TrainConfig dc = tc;
      dc.epochs = config.dol.epochs;
      dc.optimizer.learning_rate = config.dol.learning_rate;
      if (!config.dol.warm_start) return train_dol(train, problem, dc);
      const TrainResult start = train_two_stage(train, tc);
      return train_dol(train, problem, dc, &start.model);
    }
    case Method::kRandom:
      break;
  }
  throw InvalidArgument("random selection has nothing to train");
}

Selection random_selection(const Problem& problem, Rng& rng) {
  const std::size_t n = problem.f().ground_size();
  Selection s;
  for (;;) {
    const std::vector<RouteId> candidates = addable_elements(s, problem.system, n);
    if (candidates.empty()) break;
    s.push_back(candidates[uniform_index(rng, candidates.size())]);
  }
  return s;
}

const MethodScore& EvaluationTable::row(const std::string& method) const {
  for (const MethodScore& r : rows) {
    if (r.method == method) return r;
  }
  throw InvalidArgument("no evaluation row for method " + method);
}

void EvaluationTable::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write " + path);
  out << "method,mean,std,missions\n";
  for (const MethodScore& r : rows) {
    out << r.method << ',' << format_number(r.mean) << ',' << format_number(r.std) << ','
        << r.missions << '\n';
  }
  if (!out) throw RuntimeError("write failed for " + path);
}

std::string EvaluationTable::pretty() const {
  std::size_t width = 6;
  for (const MethodScore& r : rows) width = std::max(width, r.method.size());
  std::ostringstream os;
  os << "UAVs recharged over " << contexts << " contexts x " << rollouts << " rollouts\n";
  for (const MethodScore& r : rows) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f +- %.2f", r.mean, r.std);
    os << "  " << r.method << std::string(width - r.method.size() + 2, ' ') << buf << '\n';
  }
  return os.str();
}

EvaluationTable evaluate_methods(const World& world,
                                 std::span<const std::vector<double>> contexts,
                                 std::span<const NamedModel> methods, std::size_t rollouts,
                                 std::uint64_t seed) {
  if (rollouts == 0) throw InvalidArgument("rollouts must be at least 1");
  for (const NamedModel& m : methods) {
    if (m.model && (m.model->params.out_rows() != world.weight_rows() ||
                    m.model->params.out_cols() != world.weight_cols() ||
                    m.model->params.input_dim() != context_dim(world.config.n_uavs))) {
      throw InvalidArgument("model " + m.name + " does not match the world's shapes");
    }
  }
  std::vector<std::vector<double>> values(methods.size());
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    const Scenario scenario = apply_context(world, contexts[i]);
    std::vector<Selection> chosen(methods.size());
    for (std::size_t m = 0; m < methods.size(); ++m) {
      if (methods[m].model) chosen[m] = select_routes(*methods[m].model, contexts[i], world.problem);
    }
    for (std::size_t r = 0; r < rollouts; ++r) {
      const MissionOutcome outcome = simulate(scenario, make_stream(seed, 2 * i, r)());
      for (std::size_t m = 0; m < methods.size(); ++m) {
        Selection pick = chosen[m];
        if (!methods[m].model) {
          Rng rng = make_stream(seed, 2 * i + 1, r);
          pick = random_selection(world.problem, rng);
        }
        values[m].push_back(
            static_cast<double>(evaluate_selection(pick, outcome, scenario.routes)));
      }
    }
  }

  EvaluationTable table;
  table.contexts = contexts.size();
  table.rollouts = rollouts;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    const std::vector<double>& v = values[m];
    MethodScore s;
    s.method = methods[m].name;
    s.missions = v.size();
    if (!v.empty()) {
      double sum = 0.0;
      for (double x : v) sum += x;
      s.mean = sum / static_cast<double>(v.size());
      if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - s.mean) * (x - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
      }
    }
    table.rows.push_back(std::move(s));
  }
  return table;
}

// ---------------------------------------------------------------------------
// Manifests

nlohmann::json RunManifest::to_json() const {
  return {{"command", command},
          {"config_path", config_path},
          {"config", config},
          {"seed", seed},
          {"git_describe", git_describe},
          {"output_dir", output_dir},
          {"started_at", started_at},
          {"finished_at", finished_at},
          {"outputs", outputs}};
}

void RunManifest::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write " + path);
  out << to_json().dump(2) << '\n';
  if (!out) throw RuntimeError("write failed for " + path);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace dol
