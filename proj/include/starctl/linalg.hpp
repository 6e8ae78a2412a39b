// linalg.hpp — Dense complex kernels: Kronecker products, Hermitian
// eigendecomposition, propagators, partial trace, trace distance, fidelity.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace starctl::linalg {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Tolerances used across the library. Global phase is never compared
// anywhere; only moduli and fidelities.
inline constexpr double kHermTol = 1e-12;
inline constexpr double kHermRejectTol = 1e-9;
inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kTraceTol = 1e-12;

inline bool is_power_of_two(Eigen::Index d) {
    return d >= 2 && (d & (d - 1)) == 0;
}

inline int log2_dim(Eigen::Index d) {
    if (!is_power_of_two(d)) throw std::invalid_argument("dimension is not a power of 2");
    int n = 0;
    while ((Eigen::Index{1} << n) < d) ++n;
    return n;
}

inline double hermiticity_defect(const Matrix& a) {
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const Matrix& a, double tol = kHermTol) {
    return a.rows() == a.cols() && hermiticity_defect(a) < tol;
}

// Kronecker product, row-major block convention:
// out[(i*db+k),(j*db+l)] = a(i,j)*b(k,l).
inline Matrix kron(const Matrix& a, const Matrix& b) {
    const Eigen::Index ar = a.rows(), ac = a.cols();
    const Eigen::Index br = b.rows(), bc = b.cols();
    Matrix out(ar * br, ac * bc);
    for (Eigen::Index i = 0; i < ar; ++i)
        for (Eigen::Index j = 0; j < ac; ++j)
            out.block(i * br, j * bc, br, bc) = a(i, j) * b;
    return out;
}

inline Vector kron(const Vector& a, const Vector& b) {
    Vector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

struct EigResult {
    RealVector values;   // ascending
    Matrix vectors;      // columns are eigenvectors, unitary
};

// Eigendecomposition of a Hermitian matrix. Rejects input whose
// anti-Hermitian part exceeds 1e-9 in max norm.
inline EigResult herm_eig(const Matrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("herm_eig: matrix not square");
    if (hermiticity_defect(a) >= kHermRejectTol)
        throw std::invalid_argument("herm_eig: matrix not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("herm_eig: eigensolver failed to converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

// U = exp(-i h dt) for Hermitian h, built in the eigenbasis.
inline Matrix propagator(const Matrix& h, double dt) {
    const EigResult eig = herm_eig(h);
    const Eigen::Index d = h.rows();
    Vector phases(d);
    for (Eigen::Index i = 0; i < d; ++i)
        phases(i) = std::exp(Complex(0.0, -eig.values(i) * dt));
    return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

// Partial trace over the qubits not listed in `keep`. Qubit 0 is the
// leftmost (most significant) tensor factor. The reduced index orders its
// bits as `keep` orders its qubits.
inline Matrix partial_trace(const Matrix& rho, int n_total, const std::vector<int>& keep) {
    if (n_total < 1 || rho.rows() != rho.cols() || rho.rows() != (Eigen::Index{1} << n_total))
        throw std::invalid_argument("partial_trace: dimension does not match qubit count");
    if (keep.empty()) throw std::invalid_argument("partial_trace: empty keep set");
    std::vector<bool> seen(static_cast<std::size_t>(n_total), false);
    for (int q : keep) {
        if (q < 0 || q >= n_total) throw std::invalid_argument("partial_trace: keep index out of range");
        if (seen[static_cast<std::size_t>(q)]) throw std::invalid_argument("partial_trace: duplicate keep index");
        seen[static_cast<std::size_t>(q)] = true;
    }
    std::vector<int> drop;
    for (int q = 0; q < n_total; ++q)
        if (!seen[static_cast<std::size_t>(q)]) drop.push_back(q);

    const auto bit_of = [n_total](int qubit) {
        return std::uint64_t{1} << (n_total - 1 - qubit);
    };
    const int nk = static_cast<int>(keep.size());
    const int nd = static_cast<int>(drop.size());
    const std::uint64_t dk = std::uint64_t{1} << nk;
    const std::uint64_t dd = std::uint64_t{1} << nd;

    // full index assembled from a reduced index r and an environment index e
    const auto full_index = [&](std::uint64_t r, std::uint64_t e) {
        std::uint64_t idx = 0;
        for (int b = 0; b < nk; ++b)
            if (r & (std::uint64_t{1} << (nk - 1 - b))) idx |= bit_of(keep[static_cast<std::size_t>(b)]);
        for (int b = 0; b < nd; ++b)
            if (e & (std::uint64_t{1} << (nd - 1 - b))) idx |= bit_of(drop[static_cast<std::size_t>(b)]);
        return static_cast<Eigen::Index>(idx);
    };

    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
    for (std::uint64_t r = 0; r < dk; ++r)
        for (std::uint64_t c = 0; c < dk; ++c) {
            Complex acc = 0.0;
            for (std::uint64_t e = 0; e < dd; ++e)
                acc += rho(full_index(r, e), full_index(c, e));
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = acc;
        }
    return out;
}

// D(r1, r2) = (1/2) tr |r1 - r2|, via the spectrum of the Hermitian difference.
inline double trace_distance(const Matrix& r1, const Matrix& r2) {
    if (r1.rows() != r2.rows() || r1.cols() != r2.cols())
        throw std::invalid_argument("trace_distance: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(r1 - r2, Eigen::EigenvaluesOnly);
    return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

// <target| rho |target>, clamped to [0, 1].
inline double fidelity_pure(const Vector& target, const Matrix& rho) {
    if (target.size() != rho.rows() || rho.rows() != rho.cols())
        throw std::invalid_argument("fidelity_pure: dimension mismatch");
    const double f = std::real(target.dot(rho * target));
    return std::clamp(f, 0.0, 1.0);
}

inline Matrix pure_density(const Vector& psi) {
    return psi * psi.adjoint();
}

}  // namespace starctl::linalg
