// Timing comparison of the OpenMP likelihood/gradient kernels against their
// serial reference implementations on simulated normal data.
#include "gmlm/experiments.hpp"
#include "gmlm/model.hpp"
#include "gmlm/normal.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>

using namespace gmlm;

namespace {

template <typename F>
double time_best_of(int reps, F&& f) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        const double s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (s < best) best = s;
    }
    return best;
}

}  // namespace

int main() {
    std::printf("threads=%d\n", omp_get_max_threads());
    std::printf("setting,n,kernel,serial_seconds,parallel_seconds,speedup\n");

    const NormalFamily family;
    for (const std::size_t n : {200, 1000, 5000}) {
        const experiments::SimData sim = experiments::generate("1b", n, 7);
        const GmlmParams params = normal::initialize(sim.data);

        double sink = 0.0;
        const double ll_ser = time_best_of(3, [&] {
            sink += log_likelihood_serial(params, sim.data, family);
        });
        const double ll_par = time_best_of(3, [&] {
            sink += log_likelihood(params, sim.data, family);
        });
        std::printf("1b,%zu,log_likelihood,%.6f,%.6f,%.2f\n", n, ll_ser, ll_par,
                    ll_ser / ll_par);

        const double gr_ser = time_best_of(3, [&] {
            sink += gradients_serial(params, sim.data, family).eta_bar[0];
        });
        const double gr_par = time_best_of(3, [&] {
            sink += gradients(params, sim.data, family).eta_bar[0];
        });
        std::printf("1b,%zu,gradients,%.6f,%.6f,%.2f\n", n, gr_ser, gr_par, gr_ser / gr_par);
        if (sink == 12345.6789) std::printf("#\n");  // keep the kernels from being elided
    }
    return 0;
}
