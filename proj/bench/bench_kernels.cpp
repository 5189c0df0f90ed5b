// Times the OpenMP kernels against their serial path and the reference loops.
// Usage: bench_kernels [states] [actions] [repetitions]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

#include "ailboost/envs.hpp"
#include "ailboost/kernels.hpp"

namespace {

using namespace ailboost;

double time_ms(int reps, const std::function<void()>& body) {
    body();
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) {
        body();
    }
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count() / reps;
}

void report(const char* name, double parallel, double serial, double reference) {
    std::printf("%-18s parallel %9.3f ms  serial %9.3f ms  reference %9.3f ms  speedup %5.2fx\n", name, parallel,
                serial, reference, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
    const int S = argc > 1 ? std::atoi(argv[1]) : 400;
    const int A = argc > 2 ? std::atoi(argv[2]) : 4;
    const int reps = argc > 3 ? std::atoi(argv[3]) : 20;
    if (S <= 0 || A <= 0 || reps <= 0) {
        std::fprintf(stderr, "states, actions and repetitions must be positive\n");
        return 1;
    }
    std::printf("S=%d A=%d reps=%d threads=%d\n", S, A, reps, omp_get_max_threads());

    Rng rng(1);
    const auto mdp = random_mdp(S, A, 0.99, rng);
    const auto pi = random_policy(S, A, rng);
    const kernels::Dims dims{S, A};
    std::vector<double> reward(mdp.env_reward->values().begin(), mdp.env_reward->values().end());
    std::vector<double> v(S, 0.5);
    std::vector<double> q(static_cast<std::size_t>(S) * A);
    std::vector<double> p_pi(static_cast<std::size_t>(S) * S);
    std::vector<double> rho(S, 1.0 / S);
    std::vector<double> rho_out(S);
    std::vector<int> argmax(S);
    const auto probs = pi.probs.values();

    report("policy_transition",
           time_ms(reps, [&] { kernels::policy_transition(dims, mdp.transition, probs, p_pi, Exec::parallel); }),
           time_ms(reps, [&] { kernels::policy_transition(dims, mdp.transition, probs, p_pi, Exec::serial); }),
           time_ms(reps, [&] { reference::policy_transition(dims, mdp.transition, probs, p_pi); }));
    report("q_backup",
           time_ms(reps, [&] { kernels::q_backup(dims, mdp.transition, reward, 0.99, v, q, Exec::parallel); }),
           time_ms(reps, [&] { kernels::q_backup(dims, mdp.transition, reward, 0.99, v, q, Exec::serial); }),
           time_ms(reps, [&] { reference::q_backup(dims, mdp.transition, reward, 0.99, v, q); }));
    report("max_reduce", time_ms(reps, [&] { kernels::max_reduce(dims, q, v, argmax, Exec::parallel); }),
           time_ms(reps, [&] { kernels::max_reduce(dims, q, v, argmax, Exec::serial); }),
           time_ms(reps, [&] { reference::max_reduce(dims, q, v, argmax); }));
    report("soft_reduce", time_ms(reps, [&] { kernels::soft_reduce(dims, q, 0.05, v, Exec::parallel); }),
           time_ms(reps, [&] { kernels::soft_reduce(dims, q, 0.05, v, Exec::serial); }),
           time_ms(reps, [&] { reference::soft_reduce(dims, q, 0.05, v); }));
    report("occupancy_sweep",
           time_ms(reps,
                   [&] { kernels::occupancy_sweep(S, p_pi, mdp.init_dist, 0.99, rho, rho_out, Exec::parallel); }),
           time_ms(reps, [&] { kernels::occupancy_sweep(S, p_pi, mdp.init_dist, 0.99, rho, rho_out, Exec::serial); }),
           time_ms(reps, [&] { reference::occupancy_sweep(S, p_pi, mdp.init_dist, 0.99, rho, rho_out); }));
    return 0;
}
