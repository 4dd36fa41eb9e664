#pragma once

/// Stretched vertex grid on [-H, 0] x [0, L] with vertex-centred cells.
///
/// Node (i, j) sits at (z_i, x_j) with i = 0..M+1 (vertical, x1) and
/// j = 0..N+1 (horizontal, x2); indices 0 and M+1 (N+1) are wall nodes. Each
/// node owns the cell bounded by the midpoints to its neighbours, truncated at
/// the walls, so wall nodes own half cells.

#include <vector>

namespace ews::bouss {

struct Grid2D {
    int M = 0;
    int N = 0;
    double L = 0.0;
    double H = 1.0;
    std::vector<double> z;   ///< x1 coordinates, size M+2
    std::vector<double> x;   ///< x2 coordinates, size N+2
    std::vector<double> w1;  ///< cell extent in x1
    std::vector<double> w2;  ///< cell extent in x2
    double dx2 = 0.0;

    double cell_area(int i, int j) const { return w1[static_cast<std::size_t>(i)] * w2[static_cast<std::size_t>(j)]; }
    /// Spacing z_{i+1} - z_i.
    double h1(int i) const { return z[static_cast<std::size_t>(i) + 1] - z[static_cast<std::size_t>(i)]; }
};

Grid2D build_grid(int M, int N, double L);

struct SurfaceForcing {
    double QS = 0.0;
    double VS = 0.0;
    double TS = 0.0;
};

SurfaceForcing forcing_profiles(double x2, double L);

}  // namespace ews::bouss
