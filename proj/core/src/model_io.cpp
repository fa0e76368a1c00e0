#include "qcdmdp/model_io.hpp"

#include "json.hpp"
#include "qcdmdp/error.hpp"
#include "qcdmdp/information.hpp"
#include "qcdmdp/solvers.hpp"
#include "qcdmdp/switching.hpp"

namespace qcdmdp {

using nlohmann::json;

SolutionSummary solve_inventory(const inventory::Params& params, double beta, double vi_tol) {
  params.validate();
  const auto pre = inventory::build_inventory_mdp(params, inventory::Demand::poisson(params.lambda));
  const auto post = inventory::build_inventory_mdp(params, inventory::Demand::uniform(params.u_max));
  SolutionSummary out;
  out.params = params;
  out.beta = beta;
  out.pi0 = value_iteration(pre, beta, vi_tol).policy;
  out.pi1 = value_iteration(post, beta, vi_tol).policy;
  out.pi_kl = kl_policy(pre, post);
  out.info_pi0 = info_number(pre, post, out.pi0);
  out.info_pi_kl = info_number(pre, post, out.pi_kl);
  const auto best = max_info_number(pre, post);
  out.info_max = best.value;
  out.pi_max = best.policy;
  return out;
}

std::string model_to_json(const TabularMdp& mdp) {
  json feasible = json::array();
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    const auto acts = mdp.feasible_actions(s);
    feasible.push_back(std::vector<std::size_t>(acts.begin(), acts.end()));
  }
  json j{{"n_states", mdp.n_states()},
         {"n_actions", mdp.n_actions()},
         {"feasible_actions", feasible},
         {"kernel", mdp.kernel_data()},
         {"cost", mdp.cost_data()}};
  return j.dump(1);
}

TabularMdp model_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    return TabularMdp(j.at("n_states").get<std::size_t>(), j.at("n_actions").get<std::size_t>(),
                      j.at("feasible_actions").get<std::vector<std::vector<std::size_t>>>(),
                      j.at("kernel").get<std::vector<double>>(),
                      j.at("cost").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("malformed model file: ") + e.what());
  }
}

std::string solution_to_json(const SolutionSummary& s) {
  json j{{"params",
          {{"capacity", s.params.capacity},
           {"order_cost", s.params.order_cost},
           {"holding_cost", s.params.holding_cost},
           {"penalty", s.params.penalty},
           {"lambda", s.params.lambda},
           {"u_max", s.params.u_max}}},
         {"beta", s.beta},
         {"pi0", s.pi0.action},
         {"pi1", s.pi1.action},
         {"pi_kl", s.pi_kl.action},
         {"pi_max", s.pi_max.action},
         {"info_pi0", s.info_pi0},
         {"info_pi_kl", s.info_pi_kl},
         {"info_max", s.info_max}};
  return j.dump(1) + "\n";
}

SolutionSummary solution_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    SolutionSummary s;
    const auto& p = j.at("params");
    s.params.capacity = p.at("capacity").get<std::size_t>();
    s.params.order_cost = p.at("order_cost").get<double>();
    s.params.holding_cost = p.at("holding_cost").get<double>();
    s.params.penalty = p.at("penalty").get<double>();
    s.params.lambda = p.at("lambda").get<double>();
    s.params.u_max = p.at("u_max").get<std::size_t>();
    s.beta = j.at("beta").get<double>();
    s.pi0.action = j.at("pi0").get<std::vector<std::size_t>>();
    s.pi1.action = j.at("pi1").get<std::vector<std::size_t>>();
    s.pi_kl.action = j.at("pi_kl").get<std::vector<std::size_t>>();
    s.pi_max.action = j.at("pi_max").get<std::vector<std::size_t>>();
    s.info_pi0 = j.at("info_pi0").get<double>();
    s.info_pi_kl = j.at("info_pi_kl").get<double>();
    s.info_max = j.at("info_max").get<double>();
    return s;
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("malformed solution file: ") + e.what());
  }
}

}  // namespace qcdmdp
