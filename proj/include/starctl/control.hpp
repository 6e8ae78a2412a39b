// control.hpp — GRAPE-style gradient ascent on the piecewise-constant field,
// maximizing the overlap of the reduced state at time T with a pure target.

#pragma once

#include "starctl/dynamics.hpp"
#include "starctl/linalg.hpp"
#include "starctl/model.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace starctl::control {

using dynamics::ControlProtocol;
using dynamics::SliceDecomp;
using linalg::Complex;
using linalg::Matrix;
using linalg::Vector;

enum class StepRule { Fixed, Backtracking };

struct OptimizationConfig {
    int restarts = 10;
    int max_iters = 500;
    double grad_tol = 1e-8;
    double init_amplitude = 1.0;
    StepRule step_rule = StepRule::Backtracking;
    std::uint64_t seed = 0;
    double fixed_step = 0.05;  // only used with StepRule::Fixed

    void validate() const {
        if (restarts < 1) throw std::invalid_argument("OptimizationConfig: restarts >= 1");
        if (max_iters < 1) throw std::invalid_argument("OptimizationConfig: max_iters >= 1");
        if (grad_tol <= 0.0) throw std::invalid_argument("OptimizationConfig: grad_tol > 0");
        if (init_amplitude < 0.0) throw std::invalid_argument("OptimizationConfig: init_amplitude >= 0");
    }
};

struct OptimizationResult {
    double best_fidelity = 0.0;
    ControlProtocol best_protocol;
    int iterations_used = 0;
    int restart_index = 0;
    std::vector<double> fidelity_history;  // of the winning restart
};

namespace detail {

// Fidelity and exact gradient for one (model, target) problem. The slice
// eigenbases from the forward pass are kept and reused by the gradient.
class FidelityProblem {
  public:
    FidelityProblem(const model::SpinStarModel& mod, const Vector& target)
        : model_(mod), target_(target) {
        mod.validate();
        if (target.size() != mod.open_dim())
            throw std::invalid_argument("state_fidelity: target dimension must be 2^m");
        h0_ = model::free_hamiltonian(mod);
        hc_ = model::control_generator(mod);
        psi0_ = model::initial_state_pair(mod).first;
        env_dim_ = Eigen::Index{1} << mod.environment();
    }

    const Matrix& h0() const { return h0_; }
    const Matrix& hc() const { return hc_; }

    struct Evaluation {
        double fidelity = 0.0;
        std::vector<SliceDecomp> decomps;
        std::vector<Vector> states;  // psi_0 .. psi_K
    };

    Evaluation evaluate(const ControlProtocol& protocol) const {
        protocol.validate();
        const double dt = protocol.dt();
        Evaluation ev;
        ev.decomps = dynamics::slice_decomps(h0_, hc_, protocol);
        ev.states.reserve(ev.decomps.size() + 1);
        ev.states.push_back(psi0_);
        for (const SliceDecomp& d : ev.decomps)
            ev.states.push_back(d.apply_forward(ev.states.back(), dt));
        ev.fidelity = fidelity_of(ev.states.back());
        return ev;
    }

    double fidelity_of(const Vector& psi_final) const {
        return env_overlaps(psi_final).squaredNorm();
    }

    // gradient d fidelity / d lambda_k via the slice-eigenbasis Frechet
    // derivative, reusing forward states and a single backward sweep
    std::vector<double> gradient(const ControlProtocol& protocol, const Evaluation& ev) const {
        const double dt = protocol.dt();
        const int K = protocol.slices();
        const Eigen::Index d = h0_.rows();
        std::vector<double> grad(static_cast<std::size_t>(K), 0.0);

        Vector chi = project_target(ev.states.back());
        Vector phases(d);
        for (int k = K; k >= 1; --k) {
            const SliceDecomp& sd = ev.decomps[static_cast<std::size_t>(k - 1)];
            const Vector a = sd.vectors.adjoint() * ev.states[static_cast<std::size_t>(k - 1)];
            const Vector b = sd.vectors.adjoint() * chi;
            const Matrix w = sd.vectors.adjoint() * hc_ * sd.vectors;
            for (Eigen::Index i = 0; i < d; ++i)
                phases(i) = std::exp(Complex(0.0, -sd.values(i) * dt));
            // [dU]_{ij} in the slice eigenbasis is w_{ij} * f(e_i, e_j) with the
            // divided-difference f and its degenerate limit -i dt e^{-i e_i dt}
            Complex acc = 0.0;
            for (Eigen::Index i = 0; i < d; ++i) {
                Complex row = 0.0;
                for (Eigen::Index j = 0; j < d; ++j) {
                    const double gap = sd.values(i) - sd.values(j);
                    const Complex f = std::abs(gap) < 1e-10
                                          ? Complex(0.0, -dt) * phases(i)
                                          : (phases(i) - phases(j)) / gap;
                    row += f * w(i, j) * a(j);
                }
                acc += std::conj(b(i)) * row;
            }
            grad[static_cast<std::size_t>(k - 1)] = 2.0 * std::real(acc);
            if (k > 1) chi = sd.apply_backward(chi, dt);
        }
        return grad;
    }

  private:
    // o_e = <target | psi(:, e)>; fidelity = sum_e |o_e|^2
    Vector env_overlaps(const Vector& psi) const {
        Eigen::Map<const Matrix> block(psi.data(), env_dim_, target_.size());
        return block * target_.conjugate();
    }

    // (P_target (x) I_env) psi
    Vector project_target(const Vector& psi) const {
        const Vector o = env_overlaps(psi);
        Vector out(psi.size());
        for (Eigen::Index s = 0; s < target_.size(); ++s)
            out.segment(s * env_dim_, env_dim_) = target_(s) * o;
        return out;
    }

    model::SpinStarModel model_;
    Vector target_;
    Matrix h0_, hc_;
    Vector psi0_;
    Eigen::Index env_dim_;
};

}  // namespace detail

// Evolves the "+" branch of the initial pair under H0 + lambda(t) Hc and
// returns <target| rho_S(T) |target> on the reduced open system.
inline double state_fidelity(const ControlProtocol& protocol, const model::SpinStarModel& model,
                             const Vector& target) {
    detail::FidelityProblem problem(model, target);
    return problem.evaluate(protocol).fidelity;
}

inline std::vector<double> fidelity_gradient(const ControlProtocol& protocol,
                                             const model::SpinStarModel& model,
                                             const Vector& target) {
    detail::FidelityProblem problem(model, target);
    const auto ev = problem.evaluate(protocol);
    return problem.gradient(protocol, ev);
}

inline constexpr int kDefaultSlices = 200;

inline OptimizationResult optimize(const model::SpinStarModel& model, const Vector& target,
                                   double total_time, const OptimizationConfig& config,
                                   int slices = kDefaultSlices) {
    config.validate();
    if (total_time <= 0.0) throw std::invalid_argument("optimize: total_time must be positive");
    if (slices < 1) throw std::invalid_argument("optimize: need at least one slice");
    detail::FidelityProblem problem(model, target);

    constexpr double kArmijo = 1e-4;
    constexpr double kShrink = 0.5;
    constexpr double kMinStep = 1e-14;

    OptimizationResult best;
    best.best_fidelity = -1.0;

    for (int r = 0; r < config.restarts; ++r) {
        std::mt19937_64 rng(config.seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(r + 1));
        std::uniform_real_distribution<double> uni(-config.init_amplitude, config.init_amplitude);
        ControlProtocol protocol;
        protocol.total_time = total_time;
        protocol.amplitudes.resize(static_cast<std::size_t>(slices));
        for (double& a : protocol.amplitudes) a = uni(rng);

        auto ev = problem.evaluate(protocol);
        std::vector<double> history{ev.fidelity};
        double step = 1.0;
        int iters = 0;
        for (; iters < config.max_iters; ++iters) {
            const std::vector<double> grad = problem.gradient(protocol, ev);
            double gnorm_sq = 0.0;
            for (double g : grad) gnorm_sq += g * g;
            if (std::sqrt(gnorm_sq) < config.grad_tol) break;

            if (config.step_rule == StepRule::Fixed) {
                for (int k = 0; k < slices; ++k)
                    protocol.amplitudes[static_cast<std::size_t>(k)] +=
                        config.fixed_step * grad[static_cast<std::size_t>(k)];
                ev = problem.evaluate(protocol);
            } else {
                step = std::min(step * 2.0, 1e6);
                ControlProtocol trial = protocol;
                detail::FidelityProblem::Evaluation trial_ev;
                bool accepted = false;
                while (step >= kMinStep) {
                    for (int k = 0; k < slices; ++k)
                        trial.amplitudes[static_cast<std::size_t>(k)] =
                            protocol.amplitudes[static_cast<std::size_t>(k)] +
                            step * grad[static_cast<std::size_t>(k)];
                    trial_ev = problem.evaluate(trial);
                    if (trial_ev.fidelity >= ev.fidelity + kArmijo * step * gnorm_sq) {
                        accepted = true;
                        break;
                    }
                    step *= kShrink;
                }
                if (!accepted) break;  // no ascent direction left at machine scale
                protocol.amplitudes = trial.amplitudes;
                ev = std::move(trial_ev);
            }
            history.push_back(ev.fidelity);
        }

        if (ev.fidelity > best.best_fidelity) {
            best.best_fidelity = ev.fidelity;
            best.best_protocol = protocol;
            best.iterations_used = iters;
            best.restart_index = r;
            best.fidelity_history = std::move(history);
        }
    }
    return best;
}

}  // namespace starctl::control
