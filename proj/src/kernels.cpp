#include "ailboost/kernels.hpp"

#include <cmath>
#include <cstddef>

namespace ailboost::kernels {

namespace {

// Plain int loop index keeps the OpenMP canonical form.
template <typename Body>
void for_each_state(int states, Exec exec, Body&& body) {
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (int s = 0; s < states; ++s) {
            body(s);
        }
    } else {
        for (int s = 0; s < states; ++s) {
            body(s);
        }
    }
}

}  // namespace

void policy_transition(Dims dims, std::span<const double> transition, std::span<const double> policy,
                       std::span<double> out, Exec exec) {
    const std::size_t S = dims.states;
    const std::size_t A = dims.actions;
    for_each_state(dims.states, exec, [&](int s) {
        double* dst = out.data() + s * S;
        for (std::size_t next = 0; next < S; ++next) {
            dst[next] = 0.0;
        }
        for (std::size_t a = 0; a < A; ++a) {
            const double w = policy[s * A + a];
            if (w == 0.0) {
                continue;
            }
            const double* row = transition.data() + (s * A + a) * S;
            for (std::size_t next = 0; next < S; ++next) {
                dst[next] += w * row[next];
            }
        }
    });
}

void q_backup(Dims dims, std::span<const double> transition, std::span<const double> reward,
              double discount, std::span<const double> v, std::span<double> q, Exec exec) {
    const std::size_t S = dims.states;
    const std::size_t A = dims.actions;
    for_each_state(dims.states, exec, [&](int s) {
        for (std::size_t a = 0; a < A; ++a) {
            const double* row = transition.data() + (s * A + a) * S;
            double expected = 0.0;
            for (std::size_t next = 0; next < S; ++next) {
                expected += row[next] * v[next];
            }
            q[s * A + a] = reward[s * A + a] + discount * expected;
        }
    });
}

void max_reduce(Dims dims, std::span<const double> q, std::span<double> v, std::span<int> argmax,
                Exec exec) {
    const std::size_t A = dims.actions;
    for_each_state(dims.states, exec, [&](int s) {
        const double* row = q.data() + s * A;
        int best = 0;
        for (std::size_t a = 1; a < A; ++a) {
            if (row[a] > row[best]) {
                best = static_cast<int>(a);
            }
        }
        v[s] = row[best];
        if (!argmax.empty()) {
            argmax[s] = best;
        }
    });
}

void soft_reduce(Dims dims, std::span<const double> q, double temperature, std::span<double> v,
                 Exec exec) {
    const std::size_t A = dims.actions;
    for_each_state(dims.states, exec, [&](int s) {
        const double* row = q.data() + s * A;
        double shift = row[0];
        for (std::size_t a = 1; a < A; ++a) {
            shift = std::fmax(shift, row[a]);
        }
        double acc = 0.0;
        for (std::size_t a = 0; a < A; ++a) {
            acc += std::exp((row[a] - shift) / temperature);
        }
        v[s] = shift + temperature * std::log(acc);
    });
}

void occupancy_sweep(int states, std::span<const double> policy_transition, std::span<const double> mu0,
                     double discount, std::span<const double> rho_in, std::span<double> rho_out,
                     Exec exec) {
    const std::size_t S = states;
    // Gather by destination state so each output is owned by one iteration.
    for_each_state(states, exec, [&](int next) {
        double inflow = 0.0;
        for (std::size_t s = 0; s < S; ++s) {
            inflow += policy_transition[s * S + next] * rho_in[s];
        }
        rho_out[next] = (1.0 - discount) * mu0[next] + discount * inflow;
    });
}

}  // namespace ailboost::kernels
