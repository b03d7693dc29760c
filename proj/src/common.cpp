#include "geomhom/common.hpp"

#include <cmath>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace geomhom {

namespace {
int g_thread_cap = 0;
}

double det_sum(const std::vector<double>& v) {
    // fixed 1024-element chunks summed in order, then combined in order
    const std::size_t chunk = 1024;
    double total = 0.0;
    for (std::size_t base = 0; base < v.size(); base += chunk) {
        const std::size_t end = std::min(v.size(), base + chunk);
        double s = 0.0;
        for (std::size_t i = base; i < end; ++i) s += v[i];
        total += s;
    }
    return total;
}

double det_max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

void set_thread_cap(int threads) {
    g_thread_cap = threads;
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif
}

int thread_cap() { return g_thread_cap; }

}  // namespace geomhom
