#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace cohaptics {

using Vector3 = Eigen::Vector3d;
using JointVector = Eigen::Matrix<double, 6, 1>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Twist = Eigen::Matrix<double, 6, 1>;

constexpr double kPi = 3.14159265358979323846;

// Behavior-tree state of the controller. Exactly one is active per step.
enum class ControlMode { PositionControl, CollisionI, CollisionII, FreeDrive };

inline constexpr ControlMode kAllModes[] = {
    ControlMode::PositionControl, ControlMode::CollisionI,
    ControlMode::CollisionII, ControlMode::FreeDrive};

std::string_view to_string(ControlMode mode);
// Throws ConfigError on an unknown name.
ControlMode parse_control_mode(std::string_view name);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

class NonMonotonicTime : public Error {
 public:
  using Error::Error;
};

class EmptyTrace : public Error {
 public:
  EmptyTrace() : Error("trace is empty") {}
};

// Faults raised while advancing a simulation; carry the failing sim time.
class SimulationFault : public Error {
 public:
  SimulationFault(const std::string& what, double t)
      : Error(what), time_(t) {}
  double time() const { return time_; }

 private:
  double time_;
};

class Collision : public SimulationFault {
 public:
  explicit Collision(double t)
      : SimulationFault("collision: TCP reached the obstacle", t) {}
};

class NumericFault : public SimulationFault {
 public:
  NumericFault(const std::string& what, double t) : SimulationFault(what, t) {}
};

inline bool all_finite(const Vector3& v) { return v.allFinite(); }

}  // namespace cohaptics
