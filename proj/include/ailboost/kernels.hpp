#pragma once

#include <span>

namespace ailboost {

/// Selects the OpenMP path or the single-thread path of a kernel. Both paths
/// run the same per-state body in the same summation order, so results agree
/// bitwise.
enum class Exec { serial, parallel };

/// Dense tabular kernels. Transition layout: P[(s * A + a) * S + s'].
/// Every kernel writes disjoint outputs per state, so the parallel loops need
/// no reductions.
namespace kernels {

struct Dims {
    int states;
    int actions;
};

/// out[s * S + s'] = sum_a pi(a|s) P(s'|s,a).
void policy_transition(Dims dims, std::span<const double> transition, std::span<const double> policy,
                       std::span<double> out, Exec exec);

/// q(s,a) = r(s,a) + discount * sum_s' P(s'|s,a) v(s').
void q_backup(Dims dims, std::span<const double> transition, std::span<const double> reward,
              double discount, std::span<const double> v, std::span<double> q, Exec exec);

/// v(s) = max_a q(s,a); argmax takes the lowest index on ties.
void max_reduce(Dims dims, std::span<const double> q, std::span<double> v, std::span<int> argmax,
                Exec exec);

/// v(s) = tau * log sum_a exp(q(s,a) / tau), evaluated with a max shift.
void soft_reduce(Dims dims, std::span<const double> q, double temperature, std::span<double> v,
                 Exec exec);

/// One application of the state-flow map:
/// rho_out(s') = (1 - discount) mu0(s') + discount * sum_s P_pi(s, s') rho_in(s).
void occupancy_sweep(int states, std::span<const double> policy_transition, std::span<const double> mu0,
                     double discount, std::span<const double> rho_in, std::span<double> rho_out,
                     Exec exec);

}  // namespace kernels

/// Straightforward single-threaded implementations of the kernels above,
/// written without shared helpers. Kept as the test reference and the
/// benchmark baseline.
namespace reference {

void policy_transition(kernels::Dims dims, std::span<const double> transition,
                       std::span<const double> policy, std::span<double> out);
void q_backup(kernels::Dims dims, std::span<const double> transition, std::span<const double> reward,
              double discount, std::span<const double> v, std::span<double> q);
void max_reduce(kernels::Dims dims, std::span<const double> q, std::span<double> v, std::span<int> argmax);
void soft_reduce(kernels::Dims dims, std::span<const double> q, double temperature, std::span<double> v);
void occupancy_sweep(int states, std::span<const double> policy_transition, std::span<const double> mu0,
                     double discount, std::span<const double> rho_in, std::span<double> rho_out);

}  // namespace reference

}  // namespace ailboost
