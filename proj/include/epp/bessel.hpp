#pragma once

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

namespace epp {

// Bessel function of the first kind, integer order.  Miller's downward
// recurrence normalized with the even-order sum identity
//   J_0(x) + 2 * sum_{k>=1} J_{2k}(x) = 1,
// which is stable for the high orders needed by ring-image lattice sums.
// Negative orders/arguments via J_{-n}(x) = (-1)^n J_n(x), J_n(-x) = (-1)^n J_n(x).
inline double bessel_j(int order, double x) {
    if (std::abs(order) > 10000) throw std::invalid_argument("bessel_j: |order| > 1e4");
    if (std::abs(x) > 1000.0) throw std::invalid_argument("bessel_j: |x| > 1e3");
    double sign = 1.0;
    if (order < 0) {
        order = -order;
        if (order & 1) sign = -sign;
    }
    if (x < 0) {
        x = -x;
        if (order & 1) sign = -sign;
    }
    if (x == 0.0) return order == 0 ? 1.0 : 0.0;

    const int n = order;
    // start high enough that the downward recurrence converges to J to ~1e-16
    const int start = std::max(n, static_cast<int>(std::ceil(x))) + 16 +
                      2 * static_cast<int>(std::ceil(std::sqrt(std::max<double>(n, x))));
    double jp1 = 0.0;              // y_{m+1}
    double jm = 1e-300;            // y_m  (arbitrary tiny seed)
    double target = 0.0;           // y_n, rescaled along with everything else
    double even_sum = 0.0;         // y_0 + 2 * sum y_{2k}
    for (int m = start; m >= 0; --m) {
        if (m == n) target = jm;
        if (m % 2 == 0) even_sum += (m == 0) ? jm : 2.0 * jm;
        if (m > 0) {
            double jm1 = (2.0 * m / x) * jm - jp1;
            jp1 = jm;
            jm = jm1;
            if (std::abs(jm) > 1e250) {  // rescale to dodge overflow
                jm *= 1e-250;
                jp1 *= 1e-250;
                target *= 1e-250;
                even_sum *= 1e-250;
            }
        }
    }
    return sign * target / even_sum;
}

}  // namespace epp
