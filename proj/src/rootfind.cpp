#include "mch/rootfind.hpp"

#include <algorithm>
#include <cmath>

namespace mch::roots {

std::vector<double> depressed_cubic_roots(double p, double q) {
    std::vector<double> out;
    if (p == 0.0 && q == 0.0) {
        out.push_back(0.0);
        return out;
    }
    const double disc = -(4.0 * p * p * p + 27.0 * q * q);
    if (disc > 0.0) {
        // three real roots; trigonometric form (p < 0 here)
        const double m = 2.0 * std::sqrt(-p / 3.0);
        const double arg = 3.0 * q / (p * m);
        const double acos_arg = std::clamp(arg, -1.0, 1.0);
        const double t = std::acos(acos_arg) / 3.0;
        for (int j = 0; j < 3; ++j)
            out.push_back(m * std::cos(t - 2.0 * M_PI * j / 3.0));
    } else {
        // one real root (Cardano, numerically stable via cbrt)
        const double d = std::sqrt(std::max(0.0, q * q / 4.0 + p * p * p / 27.0));
        const double u = std::cbrt(-q / 2.0 + d);
        const double w = std::cbrt(-q / 2.0 - d);
        out.push_back(u + w);
        if (disc == 0.0 && p != 0.0) out.push_back(-(u + w) / 2.0);
    }
    // Newton polish and sort
    for (double& x : out) {
        for (int it = 0; it < 4; ++it) {
            const double f = (x * x + p) * x + q;
            const double df = 3.0 * x * x + p;
            if (df != 0.0) x -= f / df;
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [](double a, double b) {
                              return std::fabs(a - b) <=
                                     1e-12 * (std::fabs(a) + std::fabs(b) + 1.0);
                          }),
              out.end());
    return out;
}

} // namespace mch::roots
