#include <cmath>

#include "ailboost/kernels.hpp"

namespace ailboost::reference {

void policy_transition(kernels::Dims dims, std::span<const double> transition,
                       std::span<const double> policy, std::span<double> out) {
    const int S = dims.states;
    const int A = dims.actions;
    for (int s = 0; s < S; ++s) {
        for (int next = 0; next < S; ++next) {
            double p = 0.0;
            for (int a = 0; a < A; ++a) {
                p += policy[s * A + a] * transition[(s * A + a) * S + next];
            }
            out[s * S + next] = p;
        }
    }
}

void q_backup(kernels::Dims dims, std::span<const double> transition, std::span<const double> reward,
              double discount, std::span<const double> v, std::span<double> q) {
    const int S = dims.states;
    const int A = dims.actions;
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            double expected = 0.0;
            for (int next = 0; next < S; ++next) {
                expected += transition[(s * A + a) * S + next] * v[next];
            }
            q[s * A + a] = reward[s * A + a] + discount * expected;
        }
    }
}

void max_reduce(kernels::Dims dims, std::span<const double> q, std::span<double> v, std::span<int> argmax) {
    const int A = dims.actions;
    for (int s = 0; s < dims.states; ++s) {
        int best = 0;
        for (int a = 1; a < A; ++a) {
            if (q[s * A + a] > q[s * A + best]) {
                best = a;
            }
        }
        v[s] = q[s * A + best];
        if (!argmax.empty()) {
            argmax[s] = best;
        }
    }
}

void soft_reduce(kernels::Dims dims, std::span<const double> q, double temperature, std::span<double> v) {
    const int A = dims.actions;
    for (int s = 0; s < dims.states; ++s) {
        double shift = q[s * A];
        for (int a = 1; a < A; ++a) {
            shift = std::fmax(shift, q[s * A + a]);
        }
        double acc = 0.0;
        for (int a = 0; a < A; ++a) {
            acc += std::exp((q[s * A + a] - shift) / temperature);
        }
        v[s] = shift + temperature * std::log(acc);
    }
}

void occupancy_sweep(int states, std::span<const double> policy_transition, std::span<const double> mu0,
                     double discount, std::span<const double> rho_in, std::span<double> rho_out) {
    for (int next = 0; next < states; ++next) {
        double inflow = 0.0;
        for (int s = 0; s < states; ++s) {
            inflow += policy_transition[s * states + next] * rho_in[s];
        }
        rho_out[next] = (1.0 - discount) * mu0[next] + discount * inflow;
    }
}

}  // namespace ailboost::reference
