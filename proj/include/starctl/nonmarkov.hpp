// nonmarkov.hpp — BLP non-Markovianity of the free (lambda = 0) evolution
// over a finite window, using the orthogonal initial-state pair.

#pragma once

#include "starctl/linalg.hpp"
#include "starctl/model.hpp"

#include <stdexcept>
#include <utility>
#include <vector>

namespace starctl::nonmarkov {

using linalg::Complex;
using linalg::Matrix;
using linalg::Vector;

struct NmResult {
    double value = 0.0;                  // sum of positive increments of D(t)
    std::vector<double> d_trajectory;    // D(rho1(t), rho2(t)) samples
    std::vector<double> sample_times;
};

namespace detail {

// Reduced state of a pure state over the leading (most significant) m qubits:
// rho(s,s') = sum_e psi(s,e) conj(psi(s',e)) with index = s*2^(n-m) + e.
inline Matrix reduced_leading(const Vector& psi, int m, int n) {
    const Eigen::Index ds = Eigen::Index{1} << m;
    const Eigen::Index de = Eigen::Index{1} << (n - m);
    Eigen::Map<const Matrix> block(psi.data(), de, ds);  // column s holds psi(s, :)
    return block.transpose() * block.conjugate();
}

struct FreeEvolver {
    linalg::RealVector evals;
    Matrix evecs;
    Vector coeffs1, coeffs2;  // pair expanded in the H0 eigenbasis
    int m = 0, n = 0;

    explicit FreeEvolver(const model::SpinStarModel& mod) {
        mod.validate();
        auto eig = linalg::herm_eig(model::free_hamiltonian(mod));
        evals = std::move(eig.values);
        evecs = std::move(eig.vectors);
        auto [psi1, psi2] = model::initial_state_pair(mod);
        coeffs1 = evecs.adjoint() * psi1;
        coeffs2 = evecs.adjoint() * psi2;
        m = mod.central;
        n = mod.total;
    }

    // trace distance between the reduced pair at time t
    double distance_at(double t) const {
        Vector c1(coeffs1.size()), c2(coeffs2.size());
        for (Eigen::Index i = 0; i < coeffs1.size(); ++i) {
            const Complex ph = std::exp(Complex(0.0, -evals(i) * t));
            c1(i) = ph * coeffs1(i);
            c2(i) = ph * coeffs2(i);
        }
        const Vector s1 = evecs * c1;
        const Vector s2 = evecs * c2;
        return linalg::trace_distance(reduced_leading(s1, m, n), reduced_leading(s2, m, n));
    }
};

}  // namespace detail

inline constexpr int kDefaultNmSamples = 2000;

// N = sum_i max(0, D(t_{i+1}) - D(t_i)) over n_samples uniform intervals,
// a left-Riemann realization of the sigma > 0 integral.
inline NmResult blp_measure(const model::SpinStarModel& model, double total_time,
                            int n_samples = kDefaultNmSamples) {
    if (total_time <= 0.0) throw std::invalid_argument("blp_measure: total_time must be positive");
    if (n_samples < 100) throw std::invalid_argument("blp_measure: need n_samples >= 100");
    detail::FreeEvolver ev(model);

    NmResult res;
    res.sample_times.reserve(static_cast<std::size_t>(n_samples) + 1);
    res.d_trajectory.reserve(static_cast<std::size_t>(n_samples) + 1);
    for (int i = 0; i <= n_samples; ++i) {
        const double t = total_time * static_cast<double>(i) / static_cast<double>(n_samples);
        res.sample_times.push_back(t);
        res.d_trajectory.push_back(ev.distance_at(t));
    }
    for (int i = 0; i < n_samples; ++i) {
        const double inc = res.d_trajectory[static_cast<std::size_t>(i) + 1] -
                           res.d_trajectory[static_cast<std::size_t>(i)];
        if (inc > 0.0) res.value += inc;
    }
    return res;
}

// (T_j, N(T_j)) for nested windows T_j = j * t_max / n_windows, accumulated
// on one shared grid of samples_per_window intervals per window so the curve
// is monotone by construction. N(T_j) equals
// blp_measure(model, T_j, j * samples_per_window).value exactly.
inline std::vector<std::pair<double, double>> nm_window_curve(const model::SpinStarModel& model,
                                                              double t_max, int n_windows,
                                                              int samples_per_window = 200) {
    if (t_max <= 0.0) throw std::invalid_argument("nm_window_curve: t_max must be positive");
    if (n_windows < 1) throw std::invalid_argument("nm_window_curve: need n_windows >= 1");
    if (samples_per_window < 1)
        throw std::invalid_argument("nm_window_curve: need samples_per_window >= 1");
    detail::FreeEvolver ev(model);

    const int total = n_windows * samples_per_window;
    std::vector<std::pair<double, double>> curve;
    curve.reserve(static_cast<std::size_t>(n_windows));
    double acc = 0.0;
    double d_prev = ev.distance_at(0.0);
    for (int i = 1; i <= total; ++i) {
        const double t = t_max * static_cast<double>(i) / static_cast<double>(total);
        const double d = ev.distance_at(t);
        if (d > d_prev) acc += d - d_prev;
        d_prev = d;
        if (i % samples_per_window == 0) curve.emplace_back(t, acc);
    }
    return curve;
}

}  // namespace starctl::nonmarkov
