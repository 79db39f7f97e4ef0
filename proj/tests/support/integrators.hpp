#pragma once

// Test-only fixed-step integrators for the held-gradient flow
//   dz1/dt = -grad L(z2),  z2 constant.
// These stay independent of the closed-form flow in the library; they are
// the oracle the exactness tests compare against.

#include <hybridgd/objective.hpp>

namespace testsupport {

// Classical RK4 with fixed step. The derivative callback sees the current
// z1 even though the held-gradient field does not depend on it.
template <class Objective>
hybridgd::Vector rk4_flow(const Objective& obj, const hybridgd::Vector& z1_start,
                          const hybridgd::Vector& z2_held, double duration, double step) {
    const auto deriv = [&](const hybridgd::Vector& /*z1*/) {
        return (-obj.gradient(z2_held)).eval();
    };
    hybridgd::Vector z = z1_start;
    double remaining = duration;
    while (remaining > 0.0) {
        const double h = std::min(step, remaining);
        const hybridgd::Vector k1 = deriv(z);
        const hybridgd::Vector k2 = deriv(z + 0.5 * h * k1);
        const hybridgd::Vector k3 = deriv(z + 0.5 * h * k2);
        const hybridgd::Vector k4 = deriv(z + h * k3);
        z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        remaining -= h;
    }
    return z;
}

template <class Objective>
hybridgd::Vector euler_flow(const Objective& obj, const hybridgd::Vector& z1_start,
                            const hybridgd::Vector& z2_held, double duration, double step) {
    hybridgd::Vector z = z1_start;
    const hybridgd::Vector g = obj.gradient(z2_held);
    double remaining = duration;
    while (remaining > 0.0) {
        const double h = std::min(step, remaining);
        z -= h * g;
        remaining -= h;
    }
    return z;
}

} // namespace testsupport
