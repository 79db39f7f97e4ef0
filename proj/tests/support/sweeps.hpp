#pragma once

// Shared seeded scenario generator for the verification sweeps: random
// well-conditioned quadratics, valid timer windows with either reset
// policy, and equal or arbitrary initializations.

#include <cstdint>
#include <random>
#include <vector>

#include <hybridgd/hybrid.hpp>
#include <hybridgd/objective.hpp>

namespace testsupport {

struct Scenario {
    hybridgd::SpectrumSpec spectrum;
    hybridgd::TimerConfig timer;
};

enum class InitStyle {
    equal,          // z1(0,0) = z2(0,0), random
    arbitrary,      // both random, unequal
    memory_at_star, // z2(0,0) = x*, z1 random (Trial-2 style)
    state_at_star   // z1(0,0) = x*, z2 random
};

inline std::mt19937_64 scenario_rng(std::uint64_t seed) {
    return std::mt19937_64(seed * 6364136223846793005ULL + 1442695040888963407ULL);
}

inline Scenario make_scenario(std::uint64_t seed, hybridgd::Index n, bool uniform_policy) {
    using namespace hybridgd;
    auto rng = scenario_rng(seed);
    std::uniform_real_distribution<double> beta_pick(0.5, 2.5);
    std::uniform_real_distribution<double> ratio_pick(1.0, 3.0);
    std::uniform_real_distribution<double> frac(0.0, 1.0);

    Scenario sc;
    const double beta = beta_pick(rng);
    const double K = n == 1 ? beta : beta * ratio_pick(rng);
    sc.spectrum = SpectrumSpec::linear(n, beta, K, seed);

    const double limit = beta * beta / (3.0 * K * K * K);
    sc.timer.tau_max = limit * (0.5 + 0.4 * frac(rng));
    sc.timer.tau_min = sc.timer.tau_max * 0.5;
    sc.timer.reset = uniform_policy ? ResetPolicy::uniform(seed ^ 0x9e3779b97f4a7c15ULL)
                                    : ResetPolicy::fixed_value(sc.timer.tau_max);
    return sc;
}

inline hybridgd::HybridState make_init(std::uint64_t seed, InitStyle style,
                                       const hybridgd::QuadraticObjective& obj, double tau0) {
    using namespace hybridgd;
    auto rng = scenario_rng(seed ^ 0xd1b54a32d192ed03ULL);
    std::uniform_real_distribution<double> coord(-3.0, 3.0);
    const Index n = obj.dimension();

    Vector z1(n), z2(n);
    for (Index i = 0; i < n; ++i) z1(i) = coord(rng);
    switch (style) {
        case InitStyle::equal:
            z2 = z1;
            break;
        case InitStyle::arbitrary:
            for (Index i = 0; i < n; ++i) z2(i) = coord(rng);
            break;
        case InitStyle::memory_at_star:
            z2 = obj.minimizer();
            break;
        case InitStyle::state_at_star:
            for (Index i = 0; i < n; ++i) z2(i) = coord(rng);
            z1 = obj.minimizer();
            break;
    }
    return HybridState{std::move(z1), std::move(z2), tau0};
}

} // namespace testsupport
