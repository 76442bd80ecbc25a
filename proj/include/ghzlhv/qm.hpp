#pragma once

// Quantum-mechanical reference predictions for the three-photon GHZ state
// in the eight x/y measurement contexts. The state is fixed as
// (|HHH> + |VVV>)/sqrt(2); together with the analyzer conventions below it
// satisfies the sign relations yyx = yxy = xyy = -1 and xxx = +1, which is
// the binding contract (a different local-phase convention would only
// permute outcome labels).

#include "ghzlhv/model.hpp"
#include "ghzlhv/polarization.hpp"

#include <array>
#include <cmath>
#include <complex>

namespace ghzlhv {

// Three-photon state in the H/V product basis; amplitude index bit i is 1
// when photon i is V (H = 0), photon 1 as the most significant bit.
struct StateVector {
    std::array<std::complex<double>, 8> amps{};

    double squared_norm() const {
        double n = 0;
        for (const auto& a : amps) n += std::norm(a);
        return n;
    }
};

inline StateVector ghz_state() {
    StateVector psi;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    psi.amps[0b000] = inv_sqrt2;
    psi.amps[0b111] = inv_sqrt2;
    return psi;
}

// Single-photon analyzer eigenvector in the H/V basis:
//   H' = (H+V)/sqrt(2)   V' = (H-V)/sqrt(2)
//   R  = (H+iV)/sqrt(2)  L  = (H-iV)/sqrt(2)
struct AnalyzerVector {
    Basis basis;
    Pol value;
    std::array<std::complex<double>, 2> components{};  // (H, V)
};

inline AnalyzerVector analyzer_vector(Basis basis, Pol value) {
    if (pol_basis(value) != basis) {
        throw ValidationError(std::string("value ") + std::string(pol_label(value)) +
                              " does not belong to basis " + basis_letter(basis));
    }
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    AnalyzerVector v{basis, value, {inv_sqrt2, 0.0}};
    switch (value) {
        case Pol::HPrime: v.components[1] = inv_sqrt2; break;
        case Pol::VPrime: v.components[1] = -inv_sqrt2; break;
        case Pol::R: v.components[1] = {0.0, inv_sqrt2}; break;
        case Pol::L: v.components[1] = {0.0, -inv_sqrt2}; break;
    }
    return v;
}

// Probability of each outcome triple: |<o1 o2 o3|psi>|^2 via the triple
// tensor contraction.
inline RealOutcomeDistribution qm_outcome_distribution(Context ctx, const StateVector& psi) {
    RealOutcomeDistribution d;
    d.context = ctx;
    for (int out = 0; out < 8; ++out) {
        Outcome o(ctx, out);
        std::array<AnalyzerVector, 3> an = {analyzer_vector(ctx.basis(0), o.value(0)),
                                            analyzer_vector(ctx.basis(1), o.value(1)),
                                            analyzer_vector(ctx.basis(2), o.value(2))};
        std::complex<double> amp = 0;
        for (int hv = 0; hv < 8; ++hv) {
            std::complex<double> proj = 1;
            for (int photon = 0; photon < 3; ++photon) {
                int component = (hv >> (2 - photon)) & 1;
                proj *= std::conj(an[photon].components[component]);
            }
            amp += proj * psi.amps[hv];
        }
        d.probs[out] = std::norm(amp);
    }
    return d;
}

inline RealOutcomeDistribution qm_outcome_distribution(Context ctx) {
    return qm_outcome_distribution(ctx, ghz_state());
}

// Expectation of the three-reading sign product under the GHZ prediction.
inline double expectation_product(Context ctx, const StateVector& psi) {
    RealOutcomeDistribution d = qm_outcome_distribution(ctx, psi);
    double e = 0;
    for (int out = 0; out < 8; ++out) {
        e += Outcome(ctx, out).product() * d.probs[out];
    }
    return e;
}

inline double expectation_product(Context ctx) { return expectation_product(ctx, ghz_state()); }

}  // namespace ghzlhv
