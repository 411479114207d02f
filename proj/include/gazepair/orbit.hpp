#pragma once

#include "gazepair/types.hpp"

namespace gazepair {

// Angle (degrees) of an orbit at time t. With y pointing down, increasing
// angle sweeps clockwise on screen.
inline double orbit_angle_deg(const OrbitSpec& orbit, TimeMs t_ms) {
  const double swept = orbit.angular_speed_deg_s * static_cast<double>(t_ms) / 1000.0;
  return orbit.direction == OrbitDirection::clockwise ? orbit.initial_phase_deg + swept
                                                      : orbit.initial_phase_deg - swept;
}

// Position of the small circle orbiting `target` at time t (ms since the
// stream started). Phase 0 is to the right of the center, 90 directly below.
inline Point orbit_position(const TargetSpec& target, TimeMs t_ms) {
  if (!target.orbit) throw UsageError("orbit_position: target '" + target.id + "' has no orbit");
  const double theta = orbit_angle_deg(*target.orbit, t_ms) * kPi / 180.0;
  const double r = target.orbit->radius_pt;
  return {target.center.x + r * std::cos(theta), target.center.y + r * std::sin(theta)};
}

// Seconds per revolution.
inline double orbit_period_s(const OrbitSpec& orbit) { return 360.0 / orbit.angular_speed_deg_s; }

}  // namespace gazepair
