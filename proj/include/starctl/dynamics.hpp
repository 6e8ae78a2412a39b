// dynamics.hpp — Piecewise-constant Schrödinger propagation under
// H0 + lambda_k * Hc and reduced open-system trajectories.

#pragma once

#include "starctl/linalg.hpp"
#include "starctl/model.hpp"

#include <numeric>
#include <stdexcept>
#include <vector>

namespace starctl::dynamics {

using linalg::Complex;
using linalg::Matrix;
using linalg::Vector;

// Piecewise-constant field: lambda_k holds on [(k-1) dt, k dt), dt = T/K.
struct ControlProtocol {
    double total_time = 10.0;
    std::vector<double> amplitudes;

    void validate() const {
        if (total_time <= 0.0) throw std::invalid_argument("ControlProtocol: total_time must be positive");
        if (amplitudes.empty()) throw std::invalid_argument("ControlProtocol: need at least one slice");
    }

    int slices() const { return static_cast<int>(amplitudes.size()); }
    double dt() const { return total_time / static_cast<double>(amplitudes.size()); }

    static ControlProtocol constant(double total_time, int slices, double value = 0.0) {
        ControlProtocol p;
        p.total_time = total_time;
        p.amplitudes.assign(static_cast<std::size_t>(slices), value);
        return p;
    }
};

struct Trajectory {
    std::vector<double> times;    // K+1 slice boundaries 0, dt, ..., T
    std::vector<Vector> states;   // full-system states at those times
};

// Eigendecomposition of one slice generator H0 + lambda_k Hc; kept so the
// gradient code can reuse the basis.
struct SliceDecomp {
    linalg::RealVector values;
    Matrix vectors;

    Vector apply_forward(const Vector& psi, double dt) const {
        Vector c = vectors.adjoint() * psi;
        for (Eigen::Index i = 0; i < c.size(); ++i)
            c(i) *= std::exp(Complex(0.0, -values(i) * dt));
        return vectors * c;
    }

    Vector apply_backward(const Vector& psi, double dt) const {
        Vector c = vectors.adjoint() * psi;
        for (Eigen::Index i = 0; i < c.size(); ++i)
            c(i) *= std::exp(Complex(0.0, values(i) * dt));
        return vectors * c;
    }
};

inline std::vector<SliceDecomp> slice_decomps(const Matrix& h0, const Matrix& hc,
                                              const ControlProtocol& protocol) {
    protocol.validate();
    if (h0.rows() != hc.rows() || h0.cols() != hc.cols())
        throw std::invalid_argument("slice_decomps: generator dimension mismatch");
    std::vector<SliceDecomp> out;
    out.reserve(protocol.amplitudes.size());
    for (double lambda : protocol.amplitudes) {
        auto eig = linalg::herm_eig(h0 + lambda * hc);
        out.push_back({std::move(eig.values), std::move(eig.vectors)});
    }
    return out;
}

// U_k = exp(-i (H0 + lambda_k Hc) dt), one per slice.
inline std::vector<Matrix> slice_propagators(const Matrix& h0, const Matrix& hc,
                                             const ControlProtocol& protocol) {
    const double dt = protocol.dt();
    std::vector<Matrix> out;
    out.reserve(protocol.amplitudes.size());
    for (const SliceDecomp& d : slice_decomps(h0, hc, protocol)) {
        Vector phases(d.values.size());
        for (Eigen::Index i = 0; i < phases.size(); ++i)
            phases(i) = std::exp(Complex(0.0, -d.values(i) * dt));
        out.push_back(d.vectors * phases.asDiagonal() * d.vectors.adjoint());
    }
    return out;
}

inline Trajectory evolve(const Matrix& h0, const Matrix& hc, const ControlProtocol& protocol,
                         const Vector& psi0) {
    protocol.validate();
    if (psi0.size() != h0.rows())
        throw std::invalid_argument("evolve: state dimension mismatch");
    const double dt = protocol.dt();
    Trajectory traj;
    traj.times.reserve(protocol.amplitudes.size() + 1);
    traj.states.reserve(protocol.amplitudes.size() + 1);
    traj.times.push_back(0.0);
    traj.states.push_back(psi0);
    Vector psi = psi0;
    int k = 1;
    for (const SliceDecomp& d : slice_decomps(h0, hc, protocol)) {
        psi = d.apply_forward(psi, dt);
        traj.times.push_back(dt * k++);
        traj.states.push_back(psi);
    }
    return traj;
}

inline std::vector<Matrix> reduced_trajectory(const Trajectory& traj,
                                              const model::SpinStarModel& m) {
    m.validate();
    std::vector<int> keep(static_cast<std::size_t>(m.central));
    std::iota(keep.begin(), keep.end(), 0);
    std::vector<Matrix> out;
    out.reserve(traj.states.size());
    for (const Vector& psi : traj.states) {
        if (psi.size() != m.dim())
            throw std::invalid_argument("reduced_trajectory: state dimension mismatch");
        out.push_back(linalg::partial_trace(linalg::pure_density(psi), m.total, keep));
    }
    return out;
}

}  // namespace starctl::dynamics
