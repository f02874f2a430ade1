#pragma once

#include <stdexcept>
#include <string>

#include "gtamp/world.hpp"

namespace gtamp {

/// Input error with a location ("file:line" for syntax errors, "file: key.path"
/// for schema errors).
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses the JSON scenario format. Unknown keys are rejected at every level.
///
///   workspace {min:[x,y], max:[x,y]}
///   fixed[] / movable[] {name, shape:{type:"circle",radius} | {type:"rect",half_w,half_h}, pose:[x,y]}
///   regions[] {name, center:[x,y], half_w, half_h}
///   robots[] {name, base:[x,y], reach_radius, body_radius}
///   grasps[] {object, robot, approach_angle, tolerance}
///   goal[] {object, region}
///   clearance (optional, default 0.01), handovers (optional, default true)
WorldState parse_scenario(const std::string& text, const std::string& source = "<scenario>");
WorldState load_scenario(const std::string& path);

/// Canonical pretty-printed JSON; parse_scenario(serialize_scenario(w)) == w.
std::string serialize_scenario(const WorldState& world);

}  // namespace gtamp
