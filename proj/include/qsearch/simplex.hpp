#pragma once

namespace qsearch {

// Scanning-stage posterior: P(both F1) and P(exactly one F1) for the pair
// currently observed. The remaining mass p00 is implied.
struct ScanBelief {
    double p11 = 0.0;
    double pmix = 0.0;

    double p00() const noexcept {
        const double r = 1.0 - p11 - pmix;
        return r > 0.0 ? r : 0.0;
    }

    friend bool operator==(const ScanBelief&, const ScanBelief&) = default;
};

// Refinement-stage posterior over the labels of (s^a, s^b): (F1,F1), (F1,F0)
// and (F0,F1). r00 is implied.
struct RefineBelief {
    double r11 = 0.0;
    double r10 = 0.0;
    double r01 = 0.0;

    double r00() const noexcept {
        const double r = 1.0 - r11 - r10 - r01;
        return r > 0.0 ? r : 0.0;
    }

    friend bool operator==(const RefineBelief&, const RefineBelief&) = default;
};

}  // namespace qsearch
