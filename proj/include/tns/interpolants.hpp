// Time interpolants of a discrete trajectory: v (piecewise linear through the
// nodal values), u (piecewise constant midpoint values) and p (piecewise
// constant pressures).
#pragma once

#include "tns/steppers.hpp"

namespace tns {

enum class Interpolant { V, U, P };

class InterpolantSet {
public:
    InterpolantSet(const DiscreteTrajectory& traj, const FESpaces& spaces);

    /// Right-continuous on [t_{m-1}, t_m); at t = T the last interval is used.
    /// Throws std::out_of_range outside [0, T].
    [[nodiscard]] Vector evaluate(Interpolant which, double t) const;

    /// Index m with t in [t_{m-1}, t_m) (m = N at t = T).
    [[nodiscard]] int interval(double t) const;

    /// integral over [0, T] of |u - v|_2^2, by exact integration of the
    /// quadratic-in-time integrand on each step.
    [[nodiscard]] double gap_l2() const;

    /// sum_m |u^m - u^{m-1}|_2^2.
    [[nodiscard]] double increment_sum() const;

private:
    const DiscreteTrajectory* traj_;
    const FESpaces* spaces_;
};

}  // namespace tns
