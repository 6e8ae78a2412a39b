// model.hpp — Spin-star Hamiltonians, the orthogonal initial-state pair and
// the Bell/GHZ/W target states.
//
// Basis convention: qubit 0 is the leftmost (most significant) tensor
// factor; central spins occupy sites 0..m-1, environment sites m..n-1;
// |0> is the spin-up eigenstate of sigma_z (eigenvalue +1).

#pragma once

#include "starctl/linalg.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace starctl::model {

using linalg::Complex;
using linalg::Matrix;
using linalg::Vector;

enum class CouplingMode { Unscaled, Scaled };
enum class TargetKind { Bell, GHZ, W };

inline std::string to_string(CouplingMode m) {
    return m == CouplingMode::Scaled ? "scaled" : "unscaled";
}

inline std::string to_string(TargetKind k) {
    switch (k) {
        case TargetKind::Bell: return "bell";
        case TargetKind::GHZ: return "ghz";
        default: return "w";
    }
}

inline CouplingMode coupling_mode_from_string(const std::string& s) {
    if (s == "scaled") return CouplingMode::Scaled;
    if (s == "unscaled") return CouplingMode::Unscaled;
    throw std::invalid_argument("unknown coupling mode: " + s);
}

inline TargetKind target_kind_from_string(const std::string& s) {
    if (s == "bell") return TargetKind::Bell;
    if (s == "ghz") return TargetKind::GHZ;
    if (s == "w") return TargetKind::W;
    throw std::invalid_argument("unknown target kind: " + s);
}

struct SpinStarModel {
    int central = 1;                               // m
    int total = 2;                                 // n
    double omega0 = 1.0;                           // energy splitting, units of omega0
    double coupling = 0.0;                         // A, units of omega0
    CouplingMode mode = CouplingMode::Unscaled;
    int control_site = 0;

    void validate() const {
        // m == n (empty bath) is admitted as the trivial closed-system limit
        if (central < 1 || central > total || total > 12)
            throw std::invalid_argument("SpinStarModel: need 1 <= m <= n <= 12");
        if (central == total && mode == CouplingMode::Scaled)
            throw std::invalid_argument("SpinStarModel: scaled coupling needs a non-empty bath");
        if (omega0 <= 0.0) throw std::invalid_argument("SpinStarModel: omega0 must be positive");
        if (coupling < 0.0) throw std::invalid_argument("SpinStarModel: coupling must be nonnegative");
        if (control_site != 0) throw std::invalid_argument("SpinStarModel: control site is fixed to 0");
    }

    int environment() const { return total - central; }

    double effective_coupling() const {
        return mode == CouplingMode::Scaled ? coupling / std::sqrt(static_cast<double>(environment()))
                                            : coupling;
    }

    Eigen::Index dim() const { return Eigen::Index{1} << total; }
    Eigen::Index open_dim() const { return Eigen::Index{1} << central; }
};

namespace detail {

inline std::uint64_t site_bit(int site, int n) {
    return std::uint64_t{1} << (n - 1 - site);
}

// sigma_y entry for a single bit transition (row, col) with row = col ^ 1:
// (1,0) -> +i, (0,1) -> -i.
inline Complex sigma_y_factor(bool row_bit) {
    return row_bit ? Complex(0.0, 1.0) : Complex(0.0, -1.0);
}

}  // namespace detail

// H0 = sum_{l<m} (omega0/2) sigma_z^(l)
//    + sum_{l<m} sum_{m<=k<n} A_eff (sx sx + sy sy + sz sz)^(l,k)
inline Matrix free_hamiltonian(const SpinStarModel& model) {
    model.validate();
    const int n = model.total;
    const int m = model.central;
    const double a = model.effective_coupling();
    const Eigen::Index d = model.dim();
    Matrix h = Matrix::Zero(d, d);

    for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(d); ++i) {
        double diag = 0.0;
        for (int l = 0; l < m; ++l)
            diag += (i & detail::site_bit(l, n)) ? -model.omega0 / 2 : model.omega0 / 2;
        for (int l = 0; l < m; ++l) {
            const std::uint64_t bl = detail::site_bit(l, n);
            for (int k = m; k < n; ++k) {
                const std::uint64_t bk = detail::site_bit(k, n);
                const bool il = (i & bl) != 0, ik = (i & bk) != 0;
                // zz contribution is diagonal
                diag += a * ((il == ik) ? 1.0 : -1.0);
                // xx + yy flips both bits; nonzero only for antialigned pairs,
                // where the amplitude is 2a
                if (il != ik) {
                    const std::uint64_t j = i ^ (bl | bk);
                    h(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) += 2.0 * a;
                }
            }
        }
        h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += diag;
    }
    return h;
}

// lambda-independent control generator: sigma_y on the control site,
// identity elsewhere.
inline Matrix control_generator(const SpinStarModel& model) {
    model.validate();
    const int n = model.total;
    const std::uint64_t bit = detail::site_bit(model.control_site, n);
    const Eigen::Index d = model.dim();
    Matrix h = Matrix::Zero(d, d);
    for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(d); ++i) {
        const std::uint64_t j = i ^ bit;
        h(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
            detail::sigma_y_factor((j & bit) != 0);
    }
    return h;
}

// The orthogonal pair: |psi_{1,2}(0)> = (x) _{l<m} (|0> +- |1>)/sqrt(2)
// on the centrals, all environment spins in |1>.
inline std::pair<Vector, Vector> initial_state_pair(const SpinStarModel& model) {
    model.validate();
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    Vector plus(2), minus(2), down(2);
    plus << inv_sqrt2, inv_sqrt2;
    minus << inv_sqrt2, -inv_sqrt2;
    down << 0.0, 1.0;

    Vector psi1 = Vector::Ones(1), psi2 = Vector::Ones(1);
    for (int l = 0; l < model.central; ++l) {
        psi1 = linalg::kron(psi1, plus);
        psi2 = linalg::kron(psi2, minus);
    }
    for (int k = model.central; k < model.total; ++k) {
        psi1 = linalg::kron(psi1, down);
        psi2 = linalg::kron(psi2, down);
    }
    return {std::move(psi1), std::move(psi2)};
}

inline Vector target_state(TargetKind kind, int m) {
    if (kind == TargetKind::Bell && m != 2)
        throw std::invalid_argument("target_state: Bell requires m = 2");
    if (m < 2) throw std::invalid_argument("target_state: need m >= 2");
    const Eigen::Index d = Eigen::Index{1} << m;
    Vector psi = Vector::Zero(d);
    if (kind == TargetKind::W) {
        const double amp = 1.0 / std::sqrt(static_cast<double>(m));
        for (int l = 0; l < m; ++l) psi(Eigen::Index{1} << l) = amp;
    } else {
        // Bell is GHZ at m = 2
        psi(0) = psi(d - 1) = 1.0 / std::sqrt(2.0);
    }
    return psi;
}

}  // namespace starctl::model
