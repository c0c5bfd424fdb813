// Timing comparison of the serial reference kernels against the (possibly
// OpenMP-parallel) production kernels. Usage: bench_kernels [size] [reps]

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "snop/matrix.hpp"
#include "snop/random_env.hpp"

using namespace snop;

namespace {

ComplexMatrix random_matrix(Rng& rng, std::size_t r, std::size_t c) {
    ComplexMatrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = rng.gaussian();
    return m;
}

template <typename F>
double time_ms(int reps, F&& fn) {
    // one warmup
    fn();
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
    const std::size_t n = argc > 1 ? static_cast<std::size_t>(std::atoll(argv[1])) : 256;
    const int reps = argc > 2 ? std::atoi(argv[2]) : 5;
    Rng rng(1);

    const ComplexMatrix a = random_matrix(rng, n, n);
    const ComplexMatrix b = random_matrix(rng, n, n);
    const std::size_t kn = n / 16 + 2;
    const ComplexMatrix ka = random_matrix(rng, kn, kn);
    const ComplexMatrix kb = random_matrix(rng, n / kn + 16, n / kn + 16);

    std::printf("matmul %zux%zu (%d reps)\n", n, n, reps);
    const double mm_serial = time_ms(reps, [&] { (void)matmul_serial(a, b); });
    const double mm_par = time_ms(reps, [&] { (void)matmul(a, b); });
    std::printf("  serial   %10.3f ms\n  parallel %10.3f ms  (speedup %.2fx)\n", mm_serial,
                mm_par, mm_serial / mm_par);
    if (!(matmul(a, b) == matmul_serial(a, b))) {
        std::printf("  MISMATCH between serial and parallel matmul!\n");
        return 1;
    }

    std::printf("kron %zux%zu (x) %zux%zu (%d reps)\n", ka.rows(), ka.cols(), kb.rows(),
                kb.cols(), reps);
    const double kr_serial = time_ms(reps, [&] { (void)kron_serial(ka, kb); });
    const double kr_par = time_ms(reps, [&] { (void)kron(ka, kb); });
    std::printf("  serial   %10.3f ms\n  parallel %10.3f ms  (speedup %.2fx)\n", kr_serial,
                kr_par, kr_serial / kr_par);
    if (!(kron(ka, kb) == kron_serial(ka, kb))) {
        std::printf("  MISMATCH between serial and parallel kron!\n");
        return 1;
    }
    return 0;
}
