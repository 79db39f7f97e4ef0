#pragma once

#include <cmath>
#include <sstream>

#include <hybridgd/errors.hpp>

namespace hybridgd {

// Constants certified for a (beta, K, tau window) choice:
//
//   B             = 1 - 2 tau_max K                  in (0,1)
//   A             = beta^2 B - tau_max K^3           > 0
//   rate          = beta A B / (8 K^2)
//   prop_prefactor = sqrt(K/beta) * 8^(1/4)          equal-init envelope
//   thm_prefactor  = (8/3) * 2^(1/4) * sqrt(K/beta)  arbitrary init, j >= 1
//   escape_growth  = 8192 K^2 / (81 beta^2)          cap on V relative to V(0,0)
//
// All require tau_max < beta^2 / (3 K^3); under it B and A are automatically
// in range, which we assert rather than assume.
struct ConvergenceCertificate {
    double beta = 0.0;
    double lipschitz = 0.0;
    double tau_min = 0.0;
    double tau_max = 0.0;
    double B = 0.0;
    double A_const = 0.0;
    double rate = 0.0;
    double prop_prefactor = 0.0;
    double thm_prefactor = 0.0;
    double escape_growth = 0.0;
};

inline ConvergenceCertificate make_certificate(double beta, double lipschitz,
                                               double tau_min, double tau_max) {
    if (!(beta > 0.0))
        throw config_error("certificate: beta must be positive");
    if (!(lipschitz >= beta))
        throw config_error("certificate: lipschitz constant K must satisfy K >= beta");
    if (!(tau_min > 0.0) || !(tau_min <= tau_max)) {
        std::ostringstream msg;
        msg << "certificate: need 0 < tau_min <= tau_max, got tau_min=" << tau_min
            << " tau_max=" << tau_max;
        throw config_error(msg.str());
    }
    const double K = lipschitz;
    const double limit = beta * beta / (3.0 * K * K * K);
    if (!(tau_max < limit)) {
        std::ostringstream msg;
        msg << "certificate: tau_max=" << tau_max
            << " violates tau_max < beta^2/(3 K^3) = " << limit;
        throw bound_violation_error(msg.str());
    }

    ConvergenceCertificate cert;
    cert.beta = beta;
    cert.lipschitz = K;
    cert.tau_min = tau_min;
    cert.tau_max = tau_max;
    cert.B = 1.0 - 2.0 * tau_max * K;
    cert.A_const = beta * beta * cert.B - tau_max * K * K * K;
    cert.rate = beta * cert.A_const * cert.B / (8.0 * K * K);
    cert.prop_prefactor = std::sqrt(K / beta) * std::pow(8.0, 0.25);
    cert.thm_prefactor = (8.0 / 3.0) * std::pow(2.0, 0.25) * std::sqrt(K / beta);
    cert.escape_growth = 8192.0 * K * K / (81.0 * beta * beta);

    if (!(cert.B > 0.0 && cert.B < 1.0))
        throw numerical_error("certificate: B fell outside (0,1) despite the tau bound");
    if (!(cert.A_const > 0.0))
        throw numerical_error("certificate: A is not positive despite the tau bound");
    return cert;
}

} // namespace hybridgd
