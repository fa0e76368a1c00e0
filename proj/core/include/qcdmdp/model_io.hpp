#pragma once

#include <iosfwd>
#include <string>

#include "qcdmdp/inventory.hpp"
#include "qcdmdp/mdp.hpp"

namespace qcdmdp {

/// What `solve` computes for an inventory instance.
struct SolutionSummary {
  inventory::Params params;
  double beta = 0.99;
  StationaryPolicy pi0;
  StationaryPolicy pi1;
  StationaryPolicy pi_kl;
  StationaryPolicy pi_max;  // maximizer of the information number
  double info_pi0 = 0.0;
  double info_pi_kl = 0.0;
  double info_max = 0.0;
};

/// Solves both regimes of the inventory instance and its information numbers.
SolutionSummary solve_inventory(const inventory::Params& params, double beta,
                                double vi_tol = 1e-8);

/// JSON text for a model (states, actions, feasibility, kernel, cost).
std::string model_to_json(const TabularMdp& mdp);
TabularMdp model_from_json(const std::string& text);

std::string solution_to_json(const SolutionSummary& solution);
/// Throws ArgumentError on malformed input.
SolutionSummary solution_from_json(const std::string& text);

}  // namespace qcdmdp
