#include <math.h>
#include <stdio.h>
#include "simdiag.h"

#define CHECK(call)                                                        \
    do {                                                                   \
        SimdiagStatus st_ = (call);                                        \
        if (st_ != SIMDIAG_STATUS_OK) {                                    \
            fprintf(stderr, "%s -> %d: %s\n", #call, (int)st_,             \
                    simdiag_last_error());                                 \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    SimdiagHamiltonian *h = NULL;
    SimdiagGrouped *g = NULL;
    SimdiagState *a = NULL, *b = NULL;
    double f = 0.0, amps[2 * 16];

    CHECK(simdiag_hamiltonian_tfim(4, 3, &h));
    CHECK(simdiag_grouped_build(h, &g));
    CHECK(simdiag_state_random(4, 1, &a));
    CHECK(simdiag_state_random(4, 1, &b));
    CHECK(simdiag_evolve_grouped(g, a, 0.5, 5));
    CHECK(simdiag_evolve_baseline(h, b, 0.5, 5, true));
    CHECK(simdiag_state_fidelity(a, b, &f));
    CHECK(simdiag_state_amplitudes(a, amps, 32));

    if (simdiag_hamiltonian_parse("1 XQ", &h) != SIMDIAG_STATUS_PARSE) {
        fprintf(stderr, "expected parse error\n");
        return 1;
    }
    printf("groups=%zu fidelity=%.15f\n", simdiag_grouped_n_groups(g), f);

    simdiag_state_free(a);
    simdiag_state_free(b);
    simdiag_grouped_free(g);
    simdiag_hamiltonian_free(h);
    return fabs(1.0 - f) < 1e-10 ? 0 : 1;
}
