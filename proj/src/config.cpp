#include "tvopt/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "tvopt/errors.hpp"
#include "tvopt/problem.hpp"

namespace tvopt {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty())
    throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty())
    throw ConfigError("key '" + key + "': expected a nonnegative integer, got '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + value + "'");
}

Vector parse_vector(const std::string& key, const std::string& value) {
  if (value.empty()) return {};
  const auto parts = split(value, ',');
  Vector v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = parse_double(key, parts[i]);
  return v;
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"experiment.id", [](auto& c, auto&, auto& v) { c.experiment_id = v; }},
      {"problem.id", [](auto& c, auto&, auto& v) { c.problem_id = v; }},
      {"window.k", [](auto& c, auto& k, auto& v) { c.k = parse_u64(k, v); }},
      {"window.auto_shrink", [](auto& c, auto& k, auto& v) { c.auto_shrink_window = parse_bool(k, v); }},
      {"window.method",
       [](auto& c, auto& k, auto& v) {
         if (v == "qr") c.gm_method = GaussMarkovMethod::kWhitenedQr;
         else if (v == "cholesky") c.gm_method = GaussMarkovMethod::kCholesky;
         else throw ConfigError("key '" + k + "': expected qr or cholesky");
       }},
      {"horizon.N_values",
       [](auto& c, auto& k, auto& v) {
         c.n_values.clear();
         for (const auto& part : split(v, ',')) c.n_values.push_back(parse_u64(k, part));
       }},
      {"horizon.N_track", [](auto& c, auto& k, auto& v) { c.n_track = parse_u64(k, v); }},
      {"horizon.T", [](auto& c, auto& k, auto& v) { c.horizon_T = parse_u64(k, v); }},
      {"horizon.T_eval", [](auto& c, auto& k, auto& v) { c.t_eval = parse_u64(k, v); }},
      {"noise.sigma_m", [](auto& c, auto& k, auto& v) { c.sigma_m = parse_double(k, v); }},
      {"noise.sigma_p", [](auto& c, auto& k, auto& v) { c.sigma_p = parse_double(k, v); }},
      {"explore.policy",
       [](auto& c, auto& k, auto& v) {
         try {
           c.exploration.kind = parse_exploration_kind(v);
         } catch (const ArgumentError& e) {
           throw ConfigError("key '" + k + "': " + e.what());
         }
       }},
      {"explore.eta", [](auto& c, auto& k, auto& v) { c.exploration.eta = parse_double(k, v); }},
      {"explore.x0", [](auto& c, auto& k, auto& v) { c.exploration.x0 = parse_vector(k, v); }},
      {"explore.box_lo", [](auto& c, auto& k, auto& v) { c.exploration.box_lo = parse_vector(k, v); }},
      {"explore.box_hi", [](auto& c, auto& k, auto& v) { c.exploration.box_hi = parse_vector(k, v); }},
      {"explore.sequence",
       [](auto& c, auto& k, auto& v) {
         c.exploration.sequence.clear();
         for (const auto& point : split(v, ';'))
           if (!point.empty()) c.exploration.sequence.push_back(parse_vector(k, point));
       }},
      {"truth.eig_lo", [](auto& c, auto& k, auto& v) { c.eig_lo = parse_double(k, v); }},
      {"truth.eig_hi", [](auto& c, auto& k, auto& v) { c.eig_hi = parse_double(k, v); }},
      {"truth.fixed_A", [](auto& c, auto& k, auto& v) { c.fixed_a = parse_bool(k, v); }},
      {"truth.theta_mean", [](auto& c, auto& k, auto& v) { c.theta_mean = parse_vector(k, v); }},
      {"truth.theta0", [](auto& c, auto& k, auto& v) { c.theta0 = parse_vector(k, v); }},
      {"ident.epsilon", [](auto& c, auto& k, auto& v) { c.epsilon = parse_double(k, v); }},
      {"solver.mu_floor", [](auto& c, auto& k, auto& v) { c.mu_floor = parse_double(k, v); }},
      {"mc.trials", [](auto& c, auto& k, auto& v) { c.trials = parse_u64(k, v); }},
      {"mc.seed", [](auto& c, auto& k, auto& v) { c.seed = parse_u64(k, v); }},
      {"mc.workers", [](auto& c, auto& k, auto& v) { c.workers = static_cast<unsigned>(parse_u64(k, v)); }},
      {"output.dir", [](auto& c, auto&, auto& v) { c.output_dir = v; }},
  };
  return table;
}

}  // namespace

int ExperimentConfig::n() const { return problem_dimension_n(problem_id); }
int ExperimentConfig::p() const { return problem_dimension_p(problem_id); }

std::size_t ExperimentConfig::track_n() const {
  if (n_track) return *n_track;
  if (n_values.empty()) throw ConfigError("horizon.N_values is empty");
  return *std::max_element(n_values.begin(), n_values.end());
}

std::size_t ExperimentConfig::window_for(std::size_t n_collect) const {
  const auto pp = static_cast<std::size_t>(p());
  if (n_collect >= 2 * k + pp) return k;
  if (!auto_shrink_window)
    throw ConfigError("training horizon N = " + std::to_string(n_collect) +
                      " violates N >= 2k + p = " + std::to_string(2 * k + pp));
  const std::size_t min_k = (pp + static_cast<std::size_t>(n()) - 1) / static_cast<std::size_t>(n());
  const std::size_t shrunk = n_collect > pp ? (n_collect - pp) / 2 : 0;
  if (shrunk < min_k)
    throw ConfigError("training horizon N = " + std::to_string(n_collect) +
                      " too short for any admissible window");
  return shrunk;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [key, setter] : setters()) keys.push_back(key);
  return keys;
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig config;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    const std::string value = trim(std::string_view(stripped).substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end())
      throw ConfigError("unknown config key '" + key + "' on line " + std::to_string(line_no));
    if (!seen.insert(key).second) throw ConfigError("config key '" + key + "' given twice");
    it->second(config, key, value);
  }
  if (!seen.count("experiment.id")) throw ConfigError("missing required key 'experiment.id'");
  if (!seen.count("problem.id")) throw ConfigError("missing required key 'problem.id'");
  validate(config);
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

void validate(const ExperimentConfig& c) {
  const auto& problems = registered_problems();
  if (std::find(problems.begin(), problems.end(), c.problem_id) == problems.end())
    throw ConfigError("problem.id: unknown problem '" + c.problem_id + "'");
  if (c.experiment_id.empty()) throw ConfigError("experiment.id must not be empty");
  if (c.experiment_id.find_first_of(",\"\n") != std::string::npos)
    throw ConfigError("experiment.id must not contain commas, quotes or newlines");
  const auto n = static_cast<std::size_t>(c.n());
  const auto p = static_cast<std::size_t>(c.p());
  if (c.k == 0 || c.k * n < p)
    throw ConfigError("window.k: need k * n >= p (k = " + std::to_string(c.k) + ", n = " +
                      std::to_string(n) + ", p = " + std::to_string(p) + ")");
  if (c.n_values.empty()) throw ConfigError("horizon.N_values must list at least one N");
  for (std::size_t value : c.n_values) c.window_for(value);
  if (c.n_track) c.window_for(*c.n_track);
  const std::size_t n_max = std::max(c.track_n(), *std::max_element(c.n_values.begin(), c.n_values.end()));
  if (c.t_eval < n_max) throw ConfigError("horizon.T_eval must be >= every training horizon N");
  if (c.horizon_T < c.t_eval) throw ConfigError("horizon.T must be >= horizon.T_eval");
  if (!(c.sigma_m >= 0.0)) throw ConfigError("noise.sigma_m must be >= 0");
  if (!(c.sigma_p >= 0.0)) throw ConfigError("noise.sigma_p must be >= 0");
  if (!(0.0 < c.eig_lo && c.eig_lo <= c.eig_hi && c.eig_hi < 1.0))
    throw ConfigError("truth.eig_lo/eig_hi must satisfy 0 < lo <= hi < 1");
  if (c.theta_mean.size() != 0 && static_cast<std::size_t>(c.theta_mean.size()) != p)
    throw ConfigError("truth.theta_mean must have p = " + std::to_string(p) + " entries");
  if (c.theta0.size() != 0 && static_cast<std::size_t>(c.theta0.size()) != p)
    throw ConfigError("truth.theta0 must have p = " + std::to_string(p) + " entries");
  if (c.sigma_p == 0.0 && c.theta0.size() == 0)
    throw ConfigError("noise.sigma_p = 0 needs an explicit truth.theta0 (the stationary law is a point mass)");
  if (!(c.epsilon > 0.0 && c.epsilon <= 0.1)) throw ConfigError("ident.epsilon must lie in (0, 0.1]");
  if (!(c.mu_floor > 0.0)) throw ConfigError("solver.mu_floor must be > 0");
  if (c.trials == 0) throw ConfigError("mc.trials must be >= 1");
  const auto& ex = c.exploration;
  if (static_cast<std::size_t>(ex.box_lo.size()) != n || static_cast<std::size_t>(ex.box_hi.size()) != n)
    throw ConfigError("explore.box_lo and explore.box_hi must have n = " + std::to_string(n) + " entries");
  if ((ex.box_hi - ex.box_lo).minCoeff() <= 0.0)
    throw ConfigError("explore.box_hi must exceed explore.box_lo in every coordinate");
  switch (ex.kind) {
    case ExplorationKind::kStaticGradientDescent:
      if (static_cast<std::size_t>(ex.x0.size()) != n)
        throw ConfigError("explore.x0 must have n = " + std::to_string(n) + " entries");
      if (!(ex.eta >= 0.0)) throw ConfigError("explore.eta must be >= 0");
      break;
    case ExplorationKind::kFixedSequence:
      if (ex.sequence.empty()) throw ConfigError("explore.sequence needs at least one point");
      for (const auto& point : ex.sequence)
        if (static_cast<std::size_t>(point.size()) != n)
          throw ConfigError("explore.sequence points must have n entries");
      break;
    case ExplorationKind::kRandomBox:
      break;
  }
}

ExperimentConfig exact_recovery_config() {
  ExperimentConfig c;
  c.experiment_id = "exact-recovery";
  c.problem_id = std::string(IsotropicProbeProblem::kId);
  c.k = 1;
  c.n_values = {50};
  c.horizon_T = 100;
  c.t_eval = 50;
  c.sigma_m = 0.0;
  c.sigma_p = 0.0;
  c.exploration.kind = ExplorationKind::kRandomBox;
  c.exploration.box_lo = Vector::Constant(3, -2.0);
  c.exploration.box_hi = Vector::Constant(3, 2.0);
  c.eig_lo = 0.5;
  c.eig_hi = 0.95;
  c.theta0 = (Vector(3) << 1.0, 0.4, -0.3).finished();
  c.trials = 1;
  c.seed = 2024;
  validate(c);
  return c;
}

}  // namespace tvopt
