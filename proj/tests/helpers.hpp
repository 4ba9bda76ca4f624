#pragma once

#include <cmath>
#include <functional>
#include <random>

#include "nlsys/grid.hpp"
#include "nlsys/model.hpp"

namespace testutil {

using nlsys::complex;
using nlsys::Field;
using nlsys::GridSpec;
using nlsys::Pair;

inline GridSpec grid1(double extent, int points) { return GridSpec{1, extent, points}; }

/// Samples f(x) (1D) or f(|x|) radially in higher dimensions.
inline Field sample(const GridSpec& g, const std::function<complex(double)>& f) {
    Field out(g);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto idx = g.multi_index(i);
        if (g.dim == 1) {
            out[i] = f(g.coordinate(idx[0]));
        } else {
            double r2 = 0.0;
            for (int d = 0; d < g.dim; ++d) r2 += g.coordinate(idx[d]) * g.coordinate(idx[d]);
            out[i] = f(std::sqrt(r2));
        }
    }
    return out;
}

inline Field gaussian(const GridSpec& g, double width, double centre = 0.0) {
    return sample(g, [&](double x) { return complex(std::exp(-(x - centre) * (x - centre) / (2 * width * width))); });
}

/// A sech(Bx) with B = mu a / 4 and A^2 = 2 B^2 / mu: mass a, energy -mu^2 a^3 / 96.
inline Field sech_soliton(const GridSpec& g, double mu, double a) {
    const double b = mu * a / 4.0;
    const double amp = std::sqrt(2.0 * b * b / mu);
    return sample(g, [&](double x) { return complex(amp / std::cosh(b * x)); });
}

/// Sum of a few Gaussian bumps with random centres, widths and complex amplitudes.
inline Field random_smooth(const GridSpec& g, std::mt19937_64& rng, int bumps = 3) {
    std::uniform_real_distribution<double> centre(-g.extent / 8, g.extent / 8);
    std::uniform_real_distribution<double> width(0.8, 2.0);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    Field out(g);
    for (int b = 0; b < bumps; ++b) {
        std::array<double, 3> c{centre(rng), centre(rng), centre(rng)};
        const double w = width(rng);
        const complex a(amp(rng), amp(rng));
        for (std::size_t i = 0; i < out.size(); ++i) {
            const auto idx = g.multi_index(i);
            double r2 = 0.0;
            for (int d = 0; d < g.dim; ++d) {
                const double x = g.coordinate(idx[d]) - c[d];
                r2 += x * x;
            }
            out[i] += a * std::exp(-r2 / (2 * w * w));
        }
    }
    return out;
}

inline Field random_noise(const GridSpec& g, std::mt19937_64& rng, bool nonnegative = false) {
    std::uniform_real_distribution<double> u(nonnegative ? 0.0 : -1.0, 1.0);
    Field out(g);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = nonnegative ? complex(u(rng)) : complex(u(rng), u(rng));
    return out;
}

inline nlsys::ModelParams benchmark() { return nlsys::ModelParams{}; }

inline nlsys::ModelParams single(double a) { return nlsys::ModelParams{}.with_masses(a, 0.0); }

inline double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

}  // namespace testutil
