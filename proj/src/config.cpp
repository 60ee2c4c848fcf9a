/*
 Copyright 2026 The lcsac Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include "lcsac/config.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "lcsac/io.hpp"

namespace lcsac::experiment {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string unquote(std::string s) {
  s = trim(std::move(s));
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') &&
      s.back() == s.front()) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

// Drops "# ..." outside quotes.
std::string strip_inline_comment(const std::string& line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#' && i > 0) {
      return line.substr(0, i);
    }
  }
  return line;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    return io::parse_double(unquote(v));
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

long to_long(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d) || std::abs(d) > 9.0e15) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  return static_cast<long>(d);
}

std::vector<std::string> to_list(const std::string& key, const std::string& v) {
  std::string s = trim(v);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') {
    throw ConfigError(key + ": expected a list like [a, b], got '" + v + "'");
  }
  s = trim(s.substr(1, s.size() - 2));
  std::vector<std::string> out;
  if (s.empty()) return out;
  for (auto& item : io::split_csv_line(s)) out.push_back(trim(item));
  return out;
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < xs.size(); ++i) out << (i ? ", " : "") << xs[i];
  out << ']';
  return out.str();
}

struct Field {
  std::string section;
  std::string key;
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

std::vector<Field> fields(ExperimentConfig& c) {
  std::vector<Field> f;
  auto real = [&f](std::string sec, std::string key, double& ref) {
    const std::string name = sec + "." + key;
    f.push_back({sec, key, [&ref, name](const std::string& v) { ref = to_double(name, v); },
                 [&ref] { return io::format_double(ref); }});
  };
  auto integer = [&f](std::string sec, std::string key, auto& ref) {
    const std::string name = sec + "." + key;
    f.push_back({sec, key,
                 [&ref, name](const std::string& v) {
                   const long x = to_long(name, v);
                   using T = std::remove_reference_t<decltype(ref)>;
                   if (std::is_unsigned_v<T> && x < 0) {
                     throw ConfigError(name + ": must be non-negative");
                   }
                   ref = static_cast<T>(x);
                 },
                 [&ref] { return std::to_string(ref); }});
  };

  f.push_back({"env", "trajectory",
               [&c](const std::string& v) {
                 try {
                   c.env.trajectory.kind = sim::parse_trajectory(unquote(v));
                 } catch (const std::invalid_argument& e) {
                   throw ConfigError(std::string("env.trajectory: ") + e.what());
                 }
               },
               [&c] { return "\"" + sim::to_string(c.env.trajectory.kind) + "\""; }});
  real("env", "scale", c.env.trajectory.scale);
  real("env", "period", c.env.trajectory.period);
  real("env", "center_z", c.env.trajectory.center_z);
  integer("env", "episode_steps", c.env.max_steps);
  real("env", "dt", c.env.params.dt);
  real("env", "w_p", c.env.reward.w_p);
  real("env", "w_u", c.env.reward.w_u);
  real("env", "c_alive", c.env.reward.c_alive);
  real("env", "init_noise", c.env.init_noise_scale);

  real("pid", "kp_x", c.pid.kp_x);
  real("pid", "kd_x", c.pid.kd_x);
  real("pid", "kp_z", c.pid.kp_z);
  real("pid", "kd_z", c.pid.kd_z);
  real("pid", "kp_theta", c.pid.kp_theta);
  real("pid", "kd_theta", c.pid.kd_theta);
  real("pid", "max_tilt", c.pid.max_tilt);

  integer("edmd", "seed", c.edmd.seed);
  integer("edmd", "dataset_size", c.edmd.dataset_size);
  real("edmd", "action_noise", c.edmd.action_noise);
  integer("edmd", "n_rbf", c.edmd.n_rbf);
  f.push_back({"edmd", "bandwidth",
               [&c](const std::string& v) {
                 const std::string s = unquote(v);
                 if (s == "median") {
                   c.edmd.bandwidth.reset();
                 } else {
                   c.edmd.bandwidth = to_double("edmd.bandwidth", s);
                 }
               },
               [&c] {
                 return c.edmd.bandwidth ? io::format_double(*c.edmd.bandwidth)
                                         : std::string("\"median\"");
               }});
  real("edmd", "tikhonov", c.edmd.tikhonov);
  real("edmd", "train_fraction", c.edmd.train_fraction);
  integer("edmd", "block_size", c.edmd.block_size);
  integer("edmd", "horizon", c.edmd.horizon);
  real("edmd", "rmse_threshold", c.edmd.rmse_threshold);

  real("dare", "state_weight", c.dare.state_weight);
  real("dare", "rbf_weight", c.dare.rbf_weight);
  real("dare", "control_weight", c.dare.control_weight);
  real("dare", "eta", c.dare.eta);
  real("dare", "tol", c.dare.tol);
  integer("dare", "max_iter", c.dare.max_iter);
  real("dare", "chi_reg", c.dare.chi_reg);

  f.push_back({"agent", "lr",
               [&c](const std::string& v) {
                 const double lr = to_double("agent.lr", v);
                 c.agent.sac.actor_lr = c.agent.sac.critic_lr = c.agent.sac.alpha_lr = lr;
               },
               [&c] { return io::format_double(c.agent.sac.actor_lr); }});
  real("agent", "actor_lr", c.agent.sac.actor_lr);
  real("agent", "critic_lr", c.agent.sac.critic_lr);
  real("agent", "alpha_lr", c.agent.sac.alpha_lr);
  integer("agent", "batch_size", c.agent.batch_size);
  real("agent", "gamma", c.agent.sac.gamma);
  integer("agent", "buffer_size", c.agent.buffer_size);
  real("agent", "tau", c.agent.sac.tau);
  real("agent", "init_alpha", c.agent.sac.init_alpha);
  real("agent", "target_entropy", c.agent.sac.target_entropy);
  f.push_back({"agent", "hidden",
               [&c](const std::string& v) {
                 std::vector<int> h;
                 for (const auto& s : to_list("agent.hidden", v)) {
                   h.push_back(static_cast<int>(to_long("agent.hidden", s)));
                 }
                 c.agent.sac.hidden = h;
               },
               [&c] { return join(c.agent.sac.hidden); }});
  integer("agent", "warmup", c.agent.warmup);
  integer("agent", "updates_per_step", c.agent.updates_per_step);
  real("agent", "final_actor_scale", c.agent.sac.final_actor_scale);

  real("lcsac", "zeta", c.lcsac.zeta);
  real("lcsac", "beta_lambda", c.lcsac.beta_lambda);
  real("lcsac", "lambda_max", c.lcsac.lambda_max);
  real("lcsac", "cvar_fraction", c.lcsac.cvar_fraction);

  f.push_back({"run", "seeds",
               [&c](const std::string& v) {
                 std::vector<std::uint64_t> seeds;
                 for (const auto& s : to_list("run.seeds", v)) {
                   const long x = to_long("run.seeds", s);
                   if (x < 0) throw ConfigError("run.seeds: must be non-negative");
                   seeds.push_back(static_cast<std::uint64_t>(x));
                 }
                 c.run.seeds = seeds;
               },
               [&c] { return join(c.run.seeds); }});
  integer("run", "total_steps", c.run.total_steps);
  integer("run", "eval_interval", c.run.eval_interval);
  integer("run", "eval_episodes", c.run.eval_episodes);
  return f;
}

Field& find_field(std::vector<Field>& fs, const std::string& section,
                  const std::string& key) {
  for (auto& f : fs) {
    if (f.section == section && f.key == key) return f;
  }
  throw ConfigError("unknown config key '" + section + "." + key + "'");
}

}  // namespace

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  try {
    env.validate();
    agent.sac.validate();
    lcsac.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  require(edmd.dataset_size > 0, "edmd.dataset_size must be positive");
  require(edmd.action_noise >= 0.0, "edmd.action_noise must be >= 0");
  require(edmd.n_rbf >= 0, "edmd.n_rbf must be >= 0");
  require(!edmd.bandwidth || *edmd.bandwidth > 0.0, "edmd.bandwidth must be > 0");
  require(edmd.tikhonov >= 0.0, "edmd.tikhonov must be >= 0");
  require(edmd.train_fraction > 0.0 && edmd.train_fraction < 1.0,
          "edmd.train_fraction must lie in (0, 1)");
  require(edmd.block_size > 0, "edmd.block_size must be positive");
  require(edmd.horizon > 0, "edmd.horizon must be positive");
  require(edmd.rmse_threshold > 0.0, "edmd.rmse_threshold must be > 0");
  require(dare.state_weight >= 0.0 && dare.rbf_weight >= 0.0,
          "dare weights must be >= 0");
  require(dare.control_weight > 0.0, "dare.control_weight must be > 0");
  require(dare.eta >= 0.0 && dare.eta < 1.0, "dare.eta must lie in [0, 1)");
  require(dare.tol > 0.0 && dare.max_iter > 0, "dare.tol and dare.max_iter must be > 0");
  require(dare.chi_reg >= 0.0, "dare.chi_reg must be >= 0");
  require(agent.batch_size > 0, "agent.batch_size must be positive");
  require(agent.buffer_size >= static_cast<std::size_t>(agent.batch_size),
          "agent.buffer_size must hold at least one batch");
  require(agent.warmup >= 0, "agent.warmup must be >= 0");
  require(agent.updates_per_step >= 0, "agent.updates_per_step must be >= 0");
  require(!run.seeds.empty(), "run.seeds must not be empty");
  require(run.total_steps >= 0, "run.total_steps must be >= 0");
  require(run.eval_interval > 0, "run.eval_interval must be positive");
  require(run.eval_episodes > 0, "run.eval_episodes must be positive");
  require(pid.max_tilt > 0.0 && pid.max_tilt < 1.5, "pid.max_tilt must lie in (0, 1.5)");
}

std::string ExperimentConfig::model_config_hash() const {
  ExperimentConfig copy = *this;
  std::ostringstream out;
  for (const auto& f : fields(copy)) {
    const bool reward_key = f.key.rfind("w_", 0) == 0 || f.key == "c_alive";
    if ((f.section == "env" && !reward_key) || f.section == "pid" ||
        f.section == "edmd") {
      out << f.section << '.' << f.key << '=' << f.get() << '\n';
    }
  }
  return io::fnv1a_hex(out.str());
}

ExperimentConfig parse_config(const std::string& text,
                              const std::vector<std::string>& overrides) {
  std::istringstream lines(text);
  std::ostringstream cleaned;
  std::string line;
  while (std::getline(lines, line)) cleaned << strip_inline_comment(line) << '\n';

  boost::property_tree::ptree tree;
  try {
    std::istringstream in(cleaned.str());
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }

  ExperimentConfig config;
  auto fs = fields(config);
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw ConfigError("config key '" + section + "' must live in a [section]");
    }
    for (const auto& [key, value] : body) {
      find_field(fs, section, key).set(value.get_value<std::string>());
    }
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    const auto dot = o.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
      throw ConfigError("override must look like section.key=value: '" + o + "'");
    }
    find_field(fs, trim(o.substr(0, dot)), trim(o.substr(dot + 1, eq - dot - 1)))
        .set(o.substr(eq + 1));
  }
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides) {
  std::string text;
  try {
    text = io::read_text_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text, overrides);
}

std::string to_config_text(const ExperimentConfig& config) {
  ExperimentConfig copy = config;
  std::ostringstream out;
  std::string section;
  for (const auto& f : fields(copy)) {
    if (f.key == "lr") continue;  // covered by the three explicit rates
    if (f.section != section) {
      out << (section.empty() ? "" : "\n") << '[' << f.section << "]\n";
      section = f.section;
    }
    out << f.key << " = " << f.get() << '\n';
  }
  return out.str();
}

}  // namespace lcsac::experiment
