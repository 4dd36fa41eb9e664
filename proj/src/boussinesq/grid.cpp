#include "ews/boussinesq/grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ews::bouss {

Grid2D build_grid(int M, int N, double L) {
    if (M < 3 || N < 3) throw std::invalid_argument("grid needs at least three interior points per direction");
    if (!(L > 0.0)) throw std::invalid_argument("basin length must be positive");
    Grid2D g;
    g.M = M;
    g.N = N;
    g.L = L;
    g.H = 1.0;
    g.z.resize(static_cast<std::size_t>(M) + 2);
    g.x.resize(static_cast<std::size_t>(N) + 2);
    const double t = std::tanh(1.5);
    for (int i = 0; i <= M + 1; ++i) {
        const double y = -1.0 + static_cast<double>(i) / (M + 1);
        g.z[static_cast<std::size_t>(i)] = -0.5 - std::tanh(-3.0 * (y + 0.5)) / (2.0 * t);
    }
    g.z.front() = -1.0;
    g.z.back() = 0.0;
    g.dx2 = L / (N + 1);
    for (int j = 0; j <= N + 1; ++j) g.x[static_cast<std::size_t>(j)] = j * g.dx2;

    auto widths = [](const std::vector<double>& c) {
        std::vector<double> w(c.size());
        const std::size_t n = c.size();
        w[0] = 0.5 * (c[1] - c[0]);
        w[n - 1] = 0.5 * (c[n - 1] - c[n - 2]);
        for (std::size_t k = 1; k + 1 < n; ++k) w[k] = 0.5 * (c[k + 1] - c[k - 1]);
        return w;
    };
    g.w1 = widths(g.z);
    g.w2 = widths(g.x);
    return g;
}

SurfaceForcing forcing_profiles(double x2, double L) {
    if (x2 < 0.0 || x2 > L) throw std::out_of_range("x2 outside the basin");
    using std::numbers::pi;
    const double s = x2 / L - 0.5;
    SurfaceForcing f;
    f.QS = 3.0 * std::cos(2.0 * pi * s);
    f.VS = -std::sin(pi * s);
    f.TS = 0.5 * (std::cos(2.0 * pi * s) + 1.0);
    return f;
}

}  // namespace ews::bouss
