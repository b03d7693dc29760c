#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace geomhom {

// Bad arguments, malformed files, violated preconditions. CLI maps this to exit 2.
struct InvalidInput : std::invalid_argument {
    explicit InvalidInput(const std::string& msg) : std::invalid_argument(msg) {}
};

// A solve that ran but did not reach its contract (divergence, non-convergence).
// CLI maps this to exit 1.
struct NumericalFailure : std::runtime_error {
    explicit NumericalFailure(const std::string& msg) : std::runtime_error(msg) {}
};

// Deterministic reductions: row-chunked so results do not depend on thread count.
double det_sum(const std::vector<double>& v);
double det_max_abs(const std::vector<double>& v);

void set_thread_cap(int threads);  // <=0 restores the hardware default
int thread_cap();

}  // namespace geomhom
