#include "ckrf/quadrature.hpp"

#include <array>
#include <cmath>

namespace ckrf {

namespace {

// 20-point Gauss-Legendre nodes/weights on [-1,1] (symmetric half stored).
constexpr std::array<double, 10> kNodes = {
    0.0765265211334973, 0.2277858511416451, 0.3737060887154195, 0.5108670019508271,
    0.6360536807265150, 0.7463319064601508, 0.8391169718222188, 0.9122344282513259,
    0.9639719272779138, 0.9931285991850949};
constexpr std::array<double, 10> kWeights = {
    0.1527533871307258, 0.1491729864726037, 0.1420961093183820, 0.1316886384491766,
    0.1181945319615184, 0.1019301198172404, 0.0832767415767048, 0.0626720483341091,
    0.0406014298003869, 0.0176140071391521};

} // namespace

double gauss_legendre(const std::function<double(double)>& f, double a, double b, int n_panels) {
    const double w = (b - a) / n_panels;
    double total = 0.0;
    for (int p = 0; p < n_panels; ++p) {
        const double lo = a + p * w;
        const double mid = lo + 0.5 * w;
        const double half = 0.5 * w;
        double panel = 0.0;
        for (int k = 0; k < 10; ++k)
            panel += kWeights[static_cast<std::size_t>(k)] *
                     (f(mid - half * kNodes[static_cast<std::size_t>(k)]) +
                      f(mid + half * kNodes[static_cast<std::size_t>(k)]));
        total += panel * half;
    }
    return total;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol, int max_panels) {
    if (a == b) return 0.0;
    int panels = 4;
    double prev = gauss_legendre(f, a, b, panels);
    while (panels < max_panels) {
        panels *= 2;
        double cur = gauss_legendre(f, a, b, panels);
        double scale = std::max({std::abs(cur), std::abs(prev), 1e-300});
        if (std::abs(cur - prev) <= rel_tol * scale) return cur;
        prev = cur;
    }
    return prev;
}

} // namespace ckrf
