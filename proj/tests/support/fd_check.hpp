#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <vector>

namespace testutil {

struct FdResult {
    double max_rel = 0.0;   // worst relative error over coordinates with a usable scale
    double max_abs = 0.0;   // worst absolute error over near-zero-gradient coordinates
    int checked = 0;
};

// Central-difference check. f() re-evaluates the objective from the current
// parameter storage; coords are pointers into that storage with matching
// analytic gradient values. Coordinates where both gradients are tiny are
// held to an absolute bound instead of a relative one (the relative error of
// two numbers at the finite-difference noise floor is meaningless).
inline FdResult fd_check(const std::function<double()>& f, const std::vector<double*>& coords,
                         const std::vector<double>& analytic, double step = 1e-4, double zero_scale = 1e-3) {
    FdResult r;
    for (size_t i = 0; i < coords.size(); ++i) {
        double* p = coords[i];
        const double saved = *p;
        *p = saved + step;
        const double fp = f();
        *p = saved - step;
        const double fm = f();
        *p = saved;
        const double numeric = (fp - fm) / (2.0 * step);
        const double a = analytic[i];
        const double scale = std::max(std::abs(a), std::abs(numeric));
        if (scale >= zero_scale)
            r.max_rel = std::max(r.max_rel, std::abs(a - numeric) / scale);
        else
            r.max_abs = std::max(r.max_abs, std::abs(a - numeric));
        ++r.checked;
    }
    return r;
}

// Evenly subsamples up to max_coords coordinates of a buffer.
inline void collect_coords(std::vector<double>& storage, const std::vector<double>& grads,
                           std::vector<double*>& coords, std::vector<double>& analytic, int max_coords) {
    const size_t n = storage.size();
    const size_t stride = n <= static_cast<size_t>(max_coords) ? 1 : n / max_coords;
    for (size_t i = 0; i < n; i += stride) {
        coords.push_back(&storage[i]);
        analytic.push_back(grads[i]);
    }
}

}  // namespace testutil
