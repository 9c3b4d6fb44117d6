// Randomized checks of the Cartan relations, shared by the unit tests and the acceptance binary.
#pragma once

#include "logsymp/calculus.hpp"
#include "random_objects.hpp"

#include <string>
#include <vector>

namespace testing_support {

using namespace logsymp;

inline Section random_section(int rank, int vars, int max_degree = 2) {
  Section s(rank);
  for (auto& c : s) c = random_polynomial(vars, max_degree, 2);
  return s;
}

inline Form random_form(int rank, int degree, int vars, int max_degree = 2) {
  Form f(rank, degree);
  for (Blade b : blades(rank, degree)) f.add(b, random_polynomial(vars, max_degree, 2));
  return f;
}

inline MultiSection random_multisection(int rank, int degree, int vars, int max_degree = 2) {
  MultiSection f(rank, degree);
  for (Blade b : blades(rank, degree)) f.add(b, random_polynomial(vars, max_degree, 2));
  return f;
}

struct CartanOutcome {
  int instances = 0;
  std::vector<std::string> failures;
};

/// (L_s alpha)(t_1..t_k) = s . alpha(t..) - sum_i alpha(.., [s, t_i], ..), independent of L = i d + d i.
inline Scalar lie_derivative_by_definition(const Algebroid& a, const Section& s, const Form& alpha,
                                           const std::vector<Section>& args) {
  Scalar v = a.derive(s, evaluate_on(alpha, args));
  for (std::size_t i = 0; i < args.size(); ++i) {
    auto moved = args;
    moved[i] = a.bracket(s, args[i]);
    v -= evaluate_on(alpha, moved);
  }
  return v;
}

/// Runs the six relations [d,d] = 0, [i_s,i_t] = 0, [i_s,d] = L_s, [L_s,d] = 0,
/// [L_s,i_t] = i_[s,t] and [L_s,L_t] = L_[s,t] on `count` random instances.
inline CartanOutcome run_cartan_suite(const Algebroid& a, int count) {
  CartanOutcome out;
  const int r = a.rank(), n = a.dim();
  for (int trial = 0; trial < count; ++trial) {
    const int k = trial % (r + 1);
    Form alpha = random_form(r, k, n);
    Section s = random_section(r, n), t = random_section(r, n);
    auto fail = [&](const std::string& what) { out.failures.push_back(what + " (instance " + std::to_string(trial) + ")"); };
    if (!d(a, d(a, alpha)).is_zero()) fail("[d,d] = 0");
    if (k >= 2 && !(contract(s, contract(t, alpha)) + contract(t, contract(s, alpha))).is_zero())
      fail("[i_s,i_t] = 0");
    std::vector<Section> args;
    for (int i = 0; i < k; ++i) args.push_back(random_section(r, n, 1));
    if (evaluate_on(lie_derivative(a, s, alpha), args) != lie_derivative_by_definition(a, s, alpha, args))
      fail("[i_s,d] = L_s");
    if (k < r && !(lie_derivative(a, s, d(a, alpha)) - d(a, lie_derivative(a, s, alpha))).is_zero())
      fail("[L_s,d] = 0");
    if (k >= 1) {
      Form lhs = lie_derivative(a, s, contract(t, alpha)) - contract(t, lie_derivative(a, s, alpha));
      if (lhs != contract(a.bracket(s, t), alpha)) fail("[L_s,i_t] = i_[s,t]");
    }
    Form ll = lie_derivative(a, s, lie_derivative(a, t, alpha)) - lie_derivative(a, t, lie_derivative(a, s, alpha));
    if (ll != lie_derivative(a, a.bracket(s, t), alpha)) fail("[L_s,L_t] = L_[s,t]");
    ++out.instances;
  }
  return out;
}

}  // namespace testing_support
