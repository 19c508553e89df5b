#include "tns/interpolants.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tns {

InterpolantSet::InterpolantSet(const DiscreteTrajectory& traj, const FESpaces& spaces)
    : traj_(&traj), spaces_(&spaces) {
    if (traj.steps() < 1) throw std::invalid_argument("InterpolantSet: trajectory has no steps");
}

int InterpolantSet::interval(double t) const {
    const double T = traj_->times.back();
    const int N = traj_->steps();
    if (!(t >= 0.0 && t <= T)) throw std::out_of_range("time " + std::to_string(t) + " outside [0, T]");
    const auto it = std::upper_bound(traj_->times.begin(), traj_->times.end(), t);
    const int m = static_cast<int>(it - traj_->times.begin());
    return std::clamp(m, 1, N);
}

Vector InterpolantSet::evaluate(Interpolant which, double t) const {
    const int m = interval(t);
    switch (which) {
        case Interpolant::V: {
            if (t == traj_->times.back()) return traj_->velocity.back();
            const double s = (t - traj_->times[m - 1]) / traj_->dt();
            return traj_->velocity[m - 1] + s * (traj_->velocity[m] - traj_->velocity[m - 1]);
        }
        case Interpolant::U: return traj_->midpoint(m);
        case Interpolant::P:
            if (traj_->pressure.empty()) throw std::logic_error("trajectory carries no pressures");
            return traj_->pressure[m - 1];
    }
    return {};
}

double InterpolantSet::gap_l2() const {
    // On step m, u - v = a + s b with s in [0, 1]:
    // a = u^{m,1/2} - u^{m-1}, b = -(u^m - u^{m-1}).
    double total = 0.0;
    const double dt = traj_->dt();
    for (int m = 1; m <= traj_->steps(); ++m) {
        const Vector a = traj_->midpoint(m) - traj_->velocity[m - 1];
        const Vector b = traj_->velocity[m - 1] - traj_->velocity[m];
        const double aa = spaces_->velocity_l2_sq(a);
        const double ab = spaces_->velocity_dot_l2(a, b);
        const double bb = spaces_->velocity_l2_sq(b);
        total += dt * (aa + ab + bb / 3.0);
    }
    return total;
}

double InterpolantSet::increment_sum() const {
    double total = 0.0;
    for (int m = 1; m <= traj_->steps(); ++m)
        total += spaces_->velocity_l2_sq(traj_->velocity[m] - traj_->velocity[m - 1]);
    return total;
}

}  // namespace tns
