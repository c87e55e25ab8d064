#pragma once

#include <cmath>
#include <limits>

namespace mch {

inline constexpr double kInfiniteEll = std::numeric_limits<double>::infinity();

// Fixed scalars of one problem instance: dispersion k, wave speed c,
// integration constant g, spatial period ell (finite or infinite).
struct ModelParams {
    double k = 0.0;
    double c = 0.0;
    double g = 0.0;
    double ell = kInfiniteEll;

    bool periodic() const { return std::isfinite(ell); }

    // Canonical form has g >= 0; the phi -> -phi symmetry maps g to -g.
    // Returns the normalized params; `flipped` records whether outputs must
    // be mirrored back.
    ModelParams normalized(bool& flipped) const {
        flipped = g < 0.0;
        ModelParams out = *this;
        if (flipped) out.g = -g;
        return out;
    }
};

struct PhasePoint {
    double phi = 0.0;
    double v = 0.0;
};

} // namespace mch
