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
#include "lcsac/planar_quad.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace lcsac::sim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Corner radius of the square as a fraction of its half side.
constexpr double kSquareCornerFraction = 0.25;

StateVector derivative(const StateVector& s, double total_thrust,
                       double torque, const QuadParams& p) {
  StateVector d;
  d(0) = s(1);
  d(1) = total_thrust * std::sin(s(4)) / p.mass;
  d(2) = s(3);
  d(3) = total_thrust * std::cos(s(4)) / p.mass - p.gravity;
  d(4) = s(5);
  d(5) = torque / p.inertia_yy;
  return d;
}

ReferencePoint make_point(double x, double x_dot, double z, double z_dot) {
  ReferencePoint r;
  r.x = x;
  r.x_dot = x_dot;
  r.z = z;
  r.z_dot = z_dot;
  return r;
}

// Rounded square traversed counter-clockwise at constant speed, starting at
// the middle of the right edge.
ReferencePoint square_point(double t, double scale, double period,
                            double center_z) {
  const double r = kSquareCornerFraction * scale;
  const double edge = 2.0 * (scale - r);
  const double arc = 0.5 * std::numbers::pi * r;
  const double perimeter = 4.0 * edge + 4.0 * arc;
  const double speed = perimeter / period;

  double s = std::fmod(t, period);
  if (s < 0.0) s += period;
  s *= speed;

  struct Corner {
    double cx, cz, phi0;
  };
  const Corner corners[4] = {
      {scale - r, center_z + scale - r, 0.0},
      {-scale + r, center_z + scale - r, 0.5 * std::numbers::pi},
      {-scale + r, center_z - scale + r, std::numbers::pi},
      {scale - r, center_z - scale + r, 1.5 * std::numbers::pi},
  };
  // Edge after corner i starts at the corner's end point and heads along the
  // corner's end tangent.
  const double edge_dir[4][2] = {{-1, 0}, {0, -1}, {1, 0}, {0, 1}};

  const double first = 0.5 * edge;
  if (s < first) {
    return make_point(scale, 0.0, center_z + s, speed);
  }
  s -= first;
  for (int i = 0; i < 4; ++i) {
    const Corner& c = corners[i];
    if (s < arc) {
      const double phi = c.phi0 + s / r;
      return make_point(c.cx + r * std::cos(phi), -speed * std::sin(phi),
                        c.cz + r * std::sin(phi), speed * std::cos(phi));
    }
    s -= arc;
    const double len = (i == 3) ? 0.5 * edge : edge;
    if (s < len || i == 3) {
      const double phi_end = c.phi0 + 0.5 * std::numbers::pi;
      const double x0 = c.cx + r * std::cos(phi_end);
      const double z0 = c.cz + r * std::sin(phi_end);
      const double dx = edge_dir[i][0];
      const double dz = edge_dir[i][1];
      return make_point(x0 + dx * s, speed * dx, z0 + dz * s, speed * dz);
    }
    s -= len;
  }
  return make_point(scale, 0.0, center_z, speed);  // unreachable
}

}  // namespace

StateVector QuadState::to_vector() const {
  StateVector v;
  v << x, x_dot, z, z_dot, theta, theta_dot;
  return v;
}

QuadState QuadState::from_vector(const StateVector& v) {
  return QuadState{v(0), v(1), v(2), v(3), v(4), v(5)};
}

bool QuadState::is_finite() const { return to_vector().allFinite(); }

void QuadParams::validate() const {
  if (!(mass > 0.0) || !(inertia_yy > 0.0) || !(arm_length > 0.0) ||
      !(dt > 0.0)) {
    throw std::invalid_argument(
        "QuadParams: mass, inertia_yy, arm_length and dt must be positive");
  }
  if (!(thrust_min >= 0.0) || !(thrust_max > thrust_min)) {
    throw std::invalid_argument(
        "QuadParams: require 0 <= thrust_min < thrust_max");
  }
  if (!std::isfinite(gravity)) {
    throw std::invalid_argument("QuadParams: gravity must be finite");
  }
}

void RewardConfig::validate() const {
  if (!(w_p >= 0.0) || !(w_u >= 0.0) || !std::isfinite(c_alive)) {
    throw std::invalid_argument("RewardConfig: weights must be >= 0");
  }
}

TrajectoryKind parse_trajectory(std::string_view name) {
  if (name == "figure8" || name == "figure-8" || name == "figure_8") {
    return TrajectoryKind::kFigure8;
  }
  if (name == "circle") return TrajectoryKind::kCircle;
  if (name == "square") return TrajectoryKind::kSquare;
  throw std::invalid_argument("unknown trajectory '" + std::string(name) +
                              "' (expected figure8, circle or square)");
}

std::string to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::kFigure8:
      return "figure8";
    case TrajectoryKind::kCircle:
      return "circle";
    case TrajectoryKind::kSquare:
      return "square";
  }
  return "unknown";
}

StateVector tracking_error(const QuadState& state, const ReferencePoint& ref) {
  return state.to_vector() - ref.to_vector();
}

Eigen::Vector2d action_to_thrust(const ActionVector& action,
                                 const QuadParams& params) {
  Eigen::Vector2d thrust;
  for (int i = 0; i < 2; ++i) {
    const double a = std::clamp(action(i), -1.0, 1.0);
    const double t = params.thrust_min +
                     0.5 * (a + 1.0) * (params.thrust_max - params.thrust_min);
    thrust(i) = std::clamp(t, params.thrust_min, params.thrust_max);
  }
  return thrust;
}

ActionVector thrust_to_action(const Eigen::Vector2d& thrust,
                              const QuadParams& params) {
  const double span = params.thrust_max - params.thrust_min;
  return ((thrust.array() - params.thrust_min) * (2.0 / span) - 1.0).matrix();
}

QuadState step(const QuadState& state, const ActionVector& action,
               const QuadParams& params) {
  if (!state.is_finite()) {
    throw std::invalid_argument("step: non-finite state");
  }
  if (!action.allFinite()) {
    throw std::invalid_argument("step: non-finite action");
  }
  const Eigen::Vector2d thrust = action_to_thrust(action, params);
  const double total = thrust(0) + thrust(1);
  const double torque = params.arm_length * (thrust(1) - thrust(0));

  const double h = params.dt;
  const StateVector s0 = state.to_vector();
  const StateVector k1 = derivative(s0, total, torque, params);
  const StateVector k2 = derivative(s0 + 0.5 * h * k1, total, torque, params);
  const StateVector k3 = derivative(s0 + 0.5 * h * k2, total, torque, params);
  const StateVector k4 = derivative(s0 + h * k3, total, torque, params);
  return QuadState::from_vector(s0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

ReferencePoint reference(TrajectoryKind kind, double t, double scale,
                         double period, double center_z) {
  if (!(period > 0.0)) {
    throw std::invalid_argument("reference: period must be positive");
  }
  const double w = kTwoPi / period;
  switch (kind) {
    case TrajectoryKind::kCircle: {
      const double c = std::cos(w * t);
      const double s = std::sin(w * t);
      return make_point(scale * c, -scale * w * s, center_z + scale * s,
                        scale * w * c);
    }
    case TrajectoryKind::kFigure8: {
      // Lemniscate of Gerono: crosses itself at the start point every half
      // period.
      return make_point(scale * std::sin(w * t), scale * w * std::cos(w * t),
                        center_z + 0.5 * scale * std::sin(2.0 * w * t),
                        scale * w * std::cos(2.0 * w * t));
    }
    case TrajectoryKind::kSquare:
      return square_point(t, scale, period, center_z);
  }
  throw std::invalid_argument("reference: unknown trajectory kind");
}

ReferencePoint reference(std::string_view kind, double t, double scale,
                         double period, double center_z) {
  return reference(parse_trajectory(kind), t, scale, period, center_z);
}

ReferencePoint reference(const TrajectorySpec& spec, double t) {
  return reference(spec.kind, t, spec.scale, spec.period, spec.center_z);
}

double reward(const QuadState& state, const ReferencePoint& ref,
              const ActionVector& action, const RewardConfig& cfg) {
  const double ex = state.x - ref.x;
  const double ez = state.z - ref.z;
  const double r = -cfg.w_p * (ex * ex + ez * ez) -
                   cfg.w_u * action.squaredNorm() + cfg.c_alive;
  if (!std::isfinite(r)) {
    throw std::invalid_argument("reward: non-finite input");
  }
  return r;
}

bool out_of_bounds(const QuadState& state, const TerminalBounds& bounds) {
  return !(state.x >= bounds.x_min && state.x <= bounds.x_max &&
           state.z >= bounds.z_min && state.z <= bounds.z_max &&
           std::abs(state.theta) <= bounds.theta_limit);
}

bool is_terminal(const QuadState& state, int t_step,
                 const TerminalBounds& bounds, int max_steps) {
  return t_step >= max_steps || out_of_bounds(state, bounds);
}

QuadState reset(const ReferencePoint& start, std::uint64_t seed,
                double init_noise_scale) {
  StateVector v = start.to_vector();
  if (init_noise_scale > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, init_noise_scale);
    for (int i = 0; i < kStateDim; ++i) v(i) += normal(rng);
  }
  return QuadState::from_vector(v);
}

void EnvConfig::validate() const {
  params.validate();
  reward.validate();
  if (!(trajectory.period > 0.0) || !(trajectory.scale > 0.0)) {
    throw std::invalid_argument("trajectory scale and period must be > 0");
  }
  if (max_steps <= 0) {
    throw std::invalid_argument("max_steps must be positive");
  }
  if (!(init_noise_scale >= 0.0)) {
    throw std::invalid_argument("init_noise_scale must be >= 0");
  }
}

PlanarQuadEnv::PlanarQuadEnv(EnvConfig config) : config_(std::move(config)) {
  config_.validate();
  state_ = QuadState::from_vector(reference(config_.trajectory, 0.0).to_vector());
}

QuadState PlanarQuadEnv::reset(std::uint64_t seed) {
  t_step_ = 0;
  state_ = sim::reset(reference(config_.trajectory, 0.0), seed,
                      config_.init_noise_scale);
  return state_;
}

ReferencePoint PlanarQuadEnv::current_reference() const {
  return reference(config_.trajectory, t_step_ * config_.params.dt);
}

StateVector PlanarQuadEnv::observation() const {
  return tracking_error(state_, current_reference());
}

StepResult PlanarQuadEnv::step(const ActionVector& action) {
  StepResult out;
  Transition& tr = out.transition;
  tr.state = state_;
  tr.reference = current_reference();
  tr.action = action.cwiseMax(-1.0).cwiseMin(1.0);
  tr.next_state = sim::step(state_, tr.action, config_.params);
  ++t_step_;
  tr.next_reference = current_reference();
  tr.reward = sim::reward(tr.next_state, tr.next_reference, tr.action,
                          config_.reward);
  tr.done = out_of_bounds(tr.next_state, config_.bounds);
  out.terminal = is_terminal(tr.next_state, t_step_, config_.bounds,
                             config_.max_steps);
  state_ = tr.next_state;
  return out;
}

}  // namespace lcsac::sim
