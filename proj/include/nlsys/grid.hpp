#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace nlsys {

using complex = std::complex<double>;

/// Periodic box [-L/2, L/2)^dim sampled with `points` lattice points per axis.
struct GridSpec {
    int dim = 1;
    double extent = 32.0;
    int points = 512;

    /// Throws Error(domain) unless dim in {1,2,3}, points >= 8 and extent > 0.
    void validate() const;

    std::size_t size() const noexcept;
    double spacing() const noexcept { return extent / points; }
    double cell_volume() const noexcept;

    /// Coordinate of lattice index j along any axis.
    double coordinate(int j) const noexcept { return -0.5 * extent + j * spacing(); }

    /// Row-major multi-index of a flat cell index (unused axes are 0).
    std::array<int, 3> multi_index(std::size_t flat) const noexcept;
    std::size_t flat_index(const std::array<int, 3>& idx) const noexcept;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// One complex field sampled on a grid, row-major, last axis fastest.
class Field {
public:
    Field() = default;
    explicit Field(const GridSpec& grid);
    Field(const GridSpec& grid, std::vector<complex> values);

    const GridSpec& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }

    std::span<const complex> values() const noexcept { return values_; }
    std::span<complex> values() noexcept { return values_; }
    complex operator[](std::size_t i) const noexcept { return values_[i]; }
    complex& operator[](std::size_t i) noexcept { return values_[i]; }

    bool all_finite() const noexcept;
    bool is_zero() const noexcept;

    Field& operator+=(const Field& other);
    Field& operator-=(const Field& other);
    Field& operator*=(complex factor) noexcept;

    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(complex c, Field a) { return a *= c; }

private:
    GridSpec grid_{};
    std::vector<complex> values_;
};

/// Two-component state (u1, u2); both components live on the same grid.
struct Pair {
    Field first;
    Field second;

    Pair() = default;
    Pair(Field a, Field b);
    explicit Pair(const GridSpec& grid) : first(grid), second(grid) {}

    const GridSpec& grid() const noexcept { return first.grid(); }
    const Field& component(int i) const noexcept { return i == 0 ? first : second; }
    Field& component(int i) noexcept { return i == 0 ? first : second; }
    bool all_finite() const noexcept { return first.all_finite() && second.all_finite(); }
};

/// Deterministic pairwise summation.
double pairwise_sum(std::span<const double> terms);

// -- quadrature and norms ----------------------------------------------------

double mass(const Field& f);
double grad_norm_sq(const Field& f);
double lp_norm(const Field& f, double p);
/// Sum over cells of |f|^p times the cell volume, i.e. lp_norm(f, p)^p without the root.
double lp_integral(const Field& f, double p);
/// Re of the L2 inner product sum(conj(a) b) h^N.
double real_inner(const Field& a, const Field& b);

// -- spectral machinery ------------------------------------------------------

/// |k|^2 on the symmetric lattice (2 pi / L) {-n/2, ..., n/2 - 1}, FFT order.
std::span<const double> wavenumber_sq(const GridSpec& grid);

/// Unnormalized forward DFT.
std::vector<complex> forward_transform(const Field& f);
/// Inverse DFT including the 1/n^N factor.
Field inverse_transform(const GridSpec& grid, std::vector<complex> spectrum);

Field apply_multiplier(const Field& f, std::span<const double> multiplier);
Field apply_multiplier(const Field& f, std::span<const complex> multiplier);

/// -Laplacian applied spectrally.
Field neg_laplacian(const Field& f);

/// Spectral-side mass sum |F_k|^2 h^N / n^N (equals mass() by Parseval).
double spectral_mass(const Field& f);

// -- symmetries ----------------------------------------------------------------

using LatticeShift = std::array<int, 3>;

/// Cyclic shift: out[x + shift] = in[x].
Field translate(const Field& f, const LatticeShift& shift);
Pair translate(const Pair& p, const LatticeShift& shift);

/// H1 inner product sum conj(A)B (1 + |k|^2) h^N / n^N (complex-valued).
complex h1_inner(const Field& a, const Field& b);
double h1_norm_sq(const Field& f);
double h1_distance(const Pair& a, const Pair& b);

struct Alignment {
    LatticeShift shift{};                 ///< applied to the state
    std::array<double, 2> phase{};        ///< applied per component as e^{i phase}
    std::array<double, 3> subcell{};      ///< spectral shift in cells, applied after `shift`
    double distance = 0.0;                ///< minimized H1 distance
};

/// Minimizes the H1 distance between `reference` and translated, phase-rotated
/// copies of `state`. The shift is seeded from the peak of the cross-correlation
/// of the moduli and refined exhaustively in a +-2 cell window, then by a
/// continuous spectral shift of at most one cell per axis (kept only if it
/// lowers the distance).
Alignment align(const Pair& reference, const Pair& state);

void require_same_grid(const Field& a, const Field& b);

}  // namespace nlsys
