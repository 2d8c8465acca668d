#pragma once

#include "errors.hpp"

namespace oscphase {

// Solver parameters.  The defaults (k = 16, eps = 1e-12, thresh = 10) are the
// values used throughout the experiments; thresh may need retuning if k
// changes.
struct SolverConfig {
    int k = 16;
    double eps = 1.0e-12;
    double thresh = 10.0;
    int max_newton = 20;
    int max_depth = 60;

    void validate() const {
        if (k < 4) throw InvalidConfig("SolverConfig: k must be >= 4");
        if (!(eps > 0.0 && eps < 1.0)) throw InvalidConfig("SolverConfig: eps must lie in (0,1)");
        if (!(thresh > 0.0)) throw InvalidConfig("SolverConfig: thresh must be positive");
        if (max_newton < 1) throw InvalidConfig("SolverConfig: max_newton must be positive");
        if (max_depth < 1) throw InvalidConfig("SolverConfig: max_depth must be positive");
    }
};

}  // namespace oscphase
