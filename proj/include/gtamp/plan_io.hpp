#pragma once

#include <stdexcept>
#include <string>

#include "gtamp/grounding.hpp"

namespace gtamp {

class PlanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Plan file: per step, per robot slot, the action tuple, placement and every
/// corridor (endpoints and half-width). Enough to re-validate externally.
std::string serialize_plan(const Plan& plan, const WorldState& world);

/// Throws PlanError on syntax errors or names unknown to `world`.
Plan parse_plan(const std::string& text, const WorldState& world, const std::string& source = "<plan>");
Plan load_plan(const std::string& path, const WorldState& world);

}  // namespace gtamp
