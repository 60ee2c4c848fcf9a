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
#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace lcsac::sim {

inline constexpr int kStateDim = 6;
inline constexpr int kActionDim = 2;

using StateVector = Eigen::Matrix<double, kStateDim, 1>;
using ActionVector = Eigen::Vector2d;

// Planar (X-Z) quadrotor state. Vector order is the field order below and is
// shared by every error-state consumer (policy input, EDMD, Lyapunov).
struct QuadState {
  double x = 0.0;
  double x_dot = 0.0;
  double z = 0.0;
  double z_dot = 0.0;
  double theta = 0.0;
  double theta_dot = 0.0;

  StateVector to_vector() const;
  static QuadState from_vector(const StateVector& v);
  bool is_finite() const;
};

// Reference sample of a trajectory; pitch and pitch rate are always zero.
struct ReferencePoint : QuadState {};

struct QuadParams {
  double mass = 0.027;
  double inertia_yy = 1.4e-5;
  double arm_length = 0.0397;
  double gravity = 9.81;
  double thrust_min = 0.0;
  // Per rotor. mass * gravity puts hover thrust at normalized action 0.
  double thrust_max = 0.027 * 9.81;
  double dt = 0.02;

  void validate() const;
};

struct RewardConfig {
  double w_p = 1.0;
  double w_u = 1e-4;
  double c_alive = 1.0;

  void validate() const;
};

struct TerminalBounds {
  double x_min = -2.5;
  double x_max = 2.5;
  double z_min = 0.0;
  double z_max = 3.0;
  double theta_limit = 1.5707963267948966;
};

enum class TrajectoryKind { kFigure8, kCircle, kSquare };

TrajectoryKind parse_trajectory(std::string_view name);
std::string to_string(TrajectoryKind kind);

struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::kFigure8;
  double scale = 1.0;
  double period = 10.0;
  double center_z = 1.5;
};

struct Transition {
  QuadState state;
  ReferencePoint reference;
  ReferencePoint next_reference;
  ActionVector action = ActionVector::Zero();
  double reward = 0.0;
  QuadState next_state;
  // Failure termination only; time-limit truncation keeps the bootstrap.
  bool done = false;
};

/// e = x - x_ref in StateVector order.
StateVector tracking_error(const QuadState& state, const ReferencePoint& ref);

/// Per-rotor thrusts (T1, T2) for a normalized action, after clipping the
/// action to [-1, 1] and the thrusts to [thrust_min, thrust_max].
Eigen::Vector2d action_to_thrust(const ActionVector& action,
                                 const QuadParams& params);

/// Inverse of action_to_thrust for thrusts inside the actuator range.
ActionVector thrust_to_action(const Eigen::Vector2d& thrust,
                              const QuadParams& params);

/// One RK4 step of length params.dt with zero-order-hold thrust.
///
/// Throws std::invalid_argument for a non-finite state or action. Leaving the
/// flight envelope is not an error here; see is_terminal().
QuadState step(const QuadState& state, const ActionVector& action,
               const QuadParams& params);

/// Analytic reference sample. Velocities are exact time derivatives of the
/// positions; the square uses quarter-circle corners so the velocity is
/// continuous.
ReferencePoint reference(TrajectoryKind kind, double t, double scale,
                         double period, double center_z = 1.5);
ReferencePoint reference(std::string_view kind, double t, double scale,
                         double period, double center_z = 1.5);
ReferencePoint reference(const TrajectorySpec& spec, double t);

/// -w_p |e_p|^2 - w_u |u|^2 + c_alive, e_p the X-Z position error.
double reward(const QuadState& state, const ReferencePoint& ref,
              const ActionVector& action, const RewardConfig& cfg);

bool out_of_bounds(const QuadState& state, const TerminalBounds& bounds);

bool is_terminal(const QuadState& state, int t_step,
                 const TerminalBounds& bounds, int max_steps);

/// Start state: `start` plus isotropic Gaussian noise of the given scale on
/// every field, drawn from a generator seeded with `seed`.
QuadState reset(const ReferencePoint& start, std::uint64_t seed,
                double init_noise_scale);

struct EnvConfig {
  QuadParams params;
  TrajectorySpec trajectory;
  RewardConfig reward;
  TerminalBounds bounds;
  int max_steps = 600;
  double init_noise_scale = 0.05;

  void validate() const;
};

struct StepResult {
  Transition transition;
  bool terminal = false;
};

/// Episode wrapper over the pure functions above. Holds only the current
/// state and step counter.
class PlanarQuadEnv {
 public:
  explicit PlanarQuadEnv(EnvConfig config);

  QuadState reset(std::uint64_t seed);
  StepResult step(const ActionVector& action);

  const QuadState& state() const { return state_; }
  ReferencePoint current_reference() const;
  StateVector observation() const;
  int t_step() const { return t_step_; }
  const EnvConfig& config() const { return config_; }

 private:
  EnvConfig config_;
  QuadState state_;
  int t_step_ = 0;
};

}  // namespace lcsac::sim
