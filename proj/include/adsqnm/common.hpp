// Shared aliases, error types and small utilities used across the library.
#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace adsqnm {

using Complex = std::complex<double>;
using namespace std::complex_literals;

constexpr double PI = 3.14159265358979323846;

// All domain errors derive from this so callers can catch one family.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct NoHorizonError : Error { using Error::Error; };
struct DegenerateHorizonError : Error { using Error::Error; };
struct OutsideChartError : Error { using Error::Error; };
struct QuadratureFailureError : Error { using Error::Error; };
struct AmbiguousClassificationError : Error { using Error::Error; };
struct InvalidCountsError : Error { using Error::Error; };
struct AssemblyFailureError : Error { using Error::Error; };
struct LinearizationFailureError : Error { using Error::Error; };
struct NoEigenvaluesInRegionError : Error { using Error::Error; };
struct NoTrappedModesError : Error { using Error::Error; };
struct CutoffTooSharpError : Error { using Error::Error; };
struct InsufficientResolutionError : Error { using Error::Error; };
struct MissingStageOutputError : Error { using Error::Error; };
struct ConfigInvalidError : Error { using Error::Error; };

// Deterministic parallel map: results are gathered by index regardless of
// completion order, so output does not depend on the worker count.
inline void parallel_for(std::size_t n, unsigned workers,
                         const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned t = 0; t < workers; ++t) {
        std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

inline unsigned default_workers() {
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : std::min(hc, 8u);
}

}  // namespace adsqnm
