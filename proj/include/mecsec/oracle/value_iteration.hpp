#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "mecsec/oracle/mdp.hpp"

namespace mecsec::oracle {

using Policy = std::vector<std::size_t>;

struct ValueIterationResult {
  std::vector<double> values;
  Policy policy;
  std::size_t iterations = 0;
  std::vector<double> sweep_deltas;  // sup-norm change of each sweep
};

// Q(s, a) = R(s, a) + gamma * sum_s' P(s, a, s') V(s')
inline double backup(const ExplicitMdp& mdp, const std::vector<double>& v, std::size_t s, std::size_t a) {
  const auto row = mdp.row(s, a);
  double acc = 0.0;
  for (std::size_t sn = 0; sn < mdp.num_states; ++sn)
    if (row[sn] != 0.0) acc += row[sn] * v[sn];
  return mdp.r(s, a) + mdp.gamma * acc;
}

// Greedy policy with respect to v; ties resolve to the lowest action index.
inline Policy greedy_policy(const ExplicitMdp& mdp, const std::vector<double>& v) {
  Policy pi(mdp.num_states, 0);
  for (std::size_t s = 0; s < mdp.num_states; ++s) {
    double best = backup(mdp, v, s, 0);
    for (std::size_t a = 1; a < mdp.num_actions; ++a) {
      const double q = backup(mdp, v, s, a);
      if (q > best) {
        best = q;
        pi[s] = a;
      }
    }
  }
  return pi;
}

// Iterates the Bellman optimality operator (Jacobi sweeps) until the sup-norm
// change drops below tol. Afterwards ||V - V*|| <= tol * gamma / (1 - gamma).
inline ValueIterationResult value_iteration(const ExplicitMdp& mdp, double tol = 1e-9,
                                            std::size_t max_iterations = 1'000'000) {
  mdp.validate();
  if (!(tol > 0.0)) throw ContractViolation("value_iteration: tol must be > 0");
  ValueIterationResult res;
  std::vector<double> v(mdp.num_states, 0.0), next(mdp.num_states, 0.0);
  while (res.iterations < max_iterations) {
    double delta = 0.0;
    for (std::size_t s = 0; s < mdp.num_states; ++s) {
      double best = backup(mdp, v, s, 0);
      for (std::size_t a = 1; a < mdp.num_actions; ++a) best = std::max(best, backup(mdp, v, s, a));
      next[s] = best;
      delta = std::max(delta, std::abs(best - v[s]));
    }
    v.swap(next);
    ++res.iterations;
    res.sweep_deltas.push_back(delta);
    if (delta < tol) break;
  }
  res.values = std::move(v);
  res.policy = greedy_policy(mdp, res.values);
  return res;
}

// Value of a fixed deterministic policy by iterating its linear fixed point.
inline std::vector<double> policy_value(const ExplicitMdp& mdp, const Policy& pi, double tol = 1e-9,
                                        std::size_t max_iterations = 1'000'000) {
  mdp.validate();
  if (!(tol > 0.0)) throw ContractViolation("policy_value: tol must be > 0");
  if (pi.size() != mdp.num_states) throw ContractViolation("policy_value: policy length != state count");
  for (auto a : pi)
    if (a >= mdp.num_actions) throw ContractViolation("policy_value: action out of range");
  std::vector<double> v(mdp.num_states, 0.0), next(mdp.num_states, 0.0);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    double delta = 0.0;
    for (std::size_t s = 0; s < mdp.num_states; ++s) {
      next[s] = backup(mdp, v, s, pi[s]);
      delta = std::max(delta, std::abs(next[s] - v[s]));
    }
    v.swap(next);
    if (delta < tol) break;
  }
  return v;
}

// States reachable from the start support when following pi (walk over P support).
inline std::vector<std::size_t> reachable_states(const ExplicitMdp& mdp, const Policy& pi) {
  std::vector<char> seen(mdp.num_states, 0);
  std::vector<std::size_t> stack = mdp.starts(), out;
  for (auto s : stack) seen[s] = 1;
  while (!stack.empty()) {
    const std::size_t s = stack.back();
    stack.pop_back();
    out.push_back(s);
    const auto row = mdp.row(s, pi[s]);
    for (std::size_t sn = 0; sn < mdp.num_states; ++sn)
      if (row[sn] > 0.0 && !seen[sn]) {
        seen[sn] = 1;
        stack.push_back(sn);
      }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline double policy_match(const Policy& p1, const Policy& p2, const std::vector<std::size_t>& restrict_to) {
  if (p1.size() != p2.size()) throw ContractViolation("policy_match: policy lengths differ");
  if (restrict_to.empty()) return 1.0;
  std::size_t same = 0;
  for (auto s : restrict_to) {
    if (s >= p1.size()) throw ContractViolation("policy_match: restricted state out of range");
    if (p1[s] == p2[s]) ++same;
  }
  return static_cast<double>(same) / static_cast<double>(restrict_to.size());
}

// Default restriction: states reachable under p1.
inline double policy_match(const ExplicitMdp& mdp, const Policy& p1, const Policy& p2) {
  return policy_match(p1, p2, reachable_states(mdp, p1));
}

}  // namespace mecsec::oracle
