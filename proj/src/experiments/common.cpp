#include <cmath>
#include <stdexcept>

#include "ews/experiments.hpp"

namespace ews::exp {

void SeedRange::validate() const {
    if (last < first) throw std::invalid_argument("seed range is empty");
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("fit needs equally many x and y values");
    if (x.size() < 2) throw std::invalid_argument("fit needs at least two points");
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (!std::isfinite(x[k]) || !std::isfinite(y[k])) throw std::domain_error("fit input is not finite");
        mx += x[k] / n;
        my += y[k] / n;
    }
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
    }
    if (!(sxx > 0.0)) throw std::domain_error("fit needs at least two distinct x values");
    LineFit f;
    f.slope = sxy / sxx;
    f.offset = my - f.slope * mx;
    double ss = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) ss += std::pow(y[k] - f.slope * x[k] - f.offset, 2);
    f.rms = std::sqrt(ss / n);
    return f;
}

}  // namespace ews::exp
