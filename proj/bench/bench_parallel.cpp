// Compares the OpenMP kernels against their serial reference implementations
// on workloads large enough to engage the parallel paths, and checks that the
// outputs are bit-identical. Usage: bench_parallel [scale]
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dwmtj/crossbar.hpp"
#include "dwmtj/linalg.hpp"
#include "dwmtj/netsim.hpp"

using namespace dwmtj;

namespace {

template <class F>
double best_of_ms(int reps, F&& f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        const double ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
        if (ms < best) best = ms;
    }
    return best;
}

void report(const char* name, double serial_ms, double parallel_ms, bool identical) {
    std::printf("%-28s serial %9.2f ms   parallel %9.2f ms   speedup %5.2fx   %s\n",
                name, serial_ms, parallel_ms, serial_ms / parallel_ms,
                identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    const int scale = (argc > 1) ? std::atoi(argv[1]) : 1;
#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (built without OpenMP)\n");
#endif

    std::mt19937 rng(5150);
    bool all_identical = true;

    {
        // Crossbar readout on a large conductance matrix.
        const std::size_t n = 768 * scale;
        Matrix g(n, n);
        std::uniform_real_distribution<double> cond(1e-5, 5e-5);
        for (double& x : g.data) x = cond(rng);
        std::vector<double> v(n);
        std::uniform_real_distribution<double> volt(0.0, 0.1);
        for (double& x : v) x = volt(rng);

        std::vector<double> out_serial;
        std::vector<double> out_parallel;
        const double serial_ms =
            best_of_ms(5, [&] { out_serial = ideal_layer_currents_serial(v, g); });
        const double parallel_ms =
            best_of_ms(5, [&] { out_parallel = ideal_layer_currents(v, g); });
        const bool identical = out_serial == out_parallel;
        all_identical = all_identical && identical;
        report("crossbar readout 768x768", serial_ms, parallel_ms, identical);
    }

    {
        // Direct solve of a dense diagonally dominant system, the same shape
        // the nodal mesh assembly produces.
        const std::size_t n = 640 * scale;
        Matrix a(n, n);
        std::uniform_real_distribution<double> entry(-1.0, 1.0);
        for (double& x : a.data) x = entry(rng);
        for (std::size_t i = 0; i < n; ++i) a(i, i) += static_cast<double>(n);
        std::vector<double> b(n);
        for (double& x : b) x = entry(rng);

        std::vector<double> x_serial;
        std::vector<double> x_parallel;
        const double serial_ms = best_of_ms(3, [&] { x_serial = lu_solve_serial(a, b); });
        const double parallel_ms = best_of_ms(3, [&] { x_parallel = lu_solve(a, b); });
        const bool identical = x_serial == x_parallel;
        all_identical = all_identical && identical;
        report("dense solve 640x640", serial_ms, parallel_ms, identical);
    }

    {
        // One layer of many independent neurons stepped over many time steps.
        const std::size_t count = 20000 * scale;
        NeuronDevice neuron;
        neuron.leak = DipolarField{5.0};
        std::vector<NeuronDevice> devices(count, neuron);
        std::vector<NeuronState> init(count);
        std::vector<double> currents(count);
        std::uniform_real_distribution<double> cur(0.0, 2e-4);
        std::uniform_real_distribution<double> pos(0.0, 1e-6);
        for (std::size_t j = 0; j < count; ++j) {
            init[j].dw_position_m = pos(rng);
            currents[j] = cur(rng);
        }
        std::vector<std::uint8_t> fired(count);
        const int steps = 200;

        std::vector<NeuronState> serial_states;
        std::vector<NeuronState> parallel_states;
        const double serial_ms = best_of_ms(3, [&] {
            serial_states = init;
            for (int k = 0; k < steps; ++k) {
                step_layer_serial(devices, serial_states, currents, k * 1e-9, 1e-9, fired);
            }
        });
        const double parallel_ms = best_of_ms(3, [&] {
            parallel_states = init;
            for (int k = 0; k < steps; ++k) {
                step_layer(devices, parallel_states, currents, k * 1e-9, 1e-9, fired);
            }
        });
        bool identical = true;
        for (std::size_t j = 0; j < count; ++j) {
            if (serial_states[j].dw_position_m != parallel_states[j].dw_position_m ||
                serial_states[j].mtj_state != parallel_states[j].mtj_state) {
                identical = false;
            }
        }
        all_identical = all_identical && identical;
        report("neuron layer 20k x 200", serial_ms, parallel_ms, identical);
    }

    if (!all_identical) {
        std::printf("parallel kernels diverged from the serial reference\n");
        return 1;
    }
    return 0;
}
