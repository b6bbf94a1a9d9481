#pragma once

#include "psbrm/types.hpp"

#include <limits>
#include <string_view>
#include <vector>

namespace psbrm {

enum class Termination {
    GradientTolerance,
    ResidualTolerance,
    FixedPointTolerance,
    MaxIterations,
    Diverged,
};

std::string_view to_string(Termination t) noexcept;

/// One iterate of a solver run. Error fields are NaN when no reference Q* was supplied.
struct IterationRecord {
    int iteration = 0;
    Vector theta;
    double f_p = 0.0;
    double J_p = 0.0;
    double J_inf = 0.0;
    double err_pw = std::numeric_limits<double>::quiet_NaN();
    double err_linf = std::numeric_limits<double>::quiet_NaN();
    double err_l2u = std::numeric_limits<double>::quiet_NaN();
    double grad_norm = std::numeric_limits<double>::quiet_NaN();
};

/// Contiguous per-iteration records (iteration 0, 1, ...) plus why the run stopped.
struct RunTrajectory {
    std::vector<IterationRecord> records;
    Termination termination = Termination::MaxIterations;
    bool diverged = false;

    const IterationRecord& final() const { return records.back(); }
};

} // namespace psbrm
