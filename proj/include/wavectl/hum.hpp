// HUM control synthesis. The operator Lambda is never materialized: its
// quadratic form equals the observation Gram, so the minimizer of
//   J(phi) = 1/2 int |B* phi|^2 + <phi, target>
// solves a symmetric positive-definite linear system per Gram block. The
// system is solved by conjugate gradient in whitened coordinates; the
// control is kept as an exact sum of complex exponentials, so costs and
// Duhamel integrals are closed-form.
//
// Sign conventions (pinned by the end-to-end annihilation tests):
//   interval:  v(t) =  B* phi~(t),   modal forcing f_n = +w_n v(t)
//   square:    g(t) = -B* phi~(t),   modal forcing f_k = -w_k g_{k2}(t)

#pragma once

#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wavectl/observability.hpp"
#include "wavectl/spectral.hpp"

namespace wavectl {

struct ExpTerm {
    std::complex<double> amp;
    double freq = 0.0;
};

// Control as a finite sum of complex exponentials per boundary channel.
// SquareLeftEdge has one channel per k2; IntervalPoint has a single scalar
// channel. Terms come in conjugate pairs, so sampled values are real.
struct ControlSignal {
    ObservationKind kind = ObservationKind::IntervalPoint;
    double horizon = 0.0;
    std::vector<std::vector<ExpTerm>> channels;

    double sample(int channel, double t) const {
        std::complex<double> acc = 0.0;
        for (const ExpTerm& e : channels[channel])
            acc += e.amp * std::exp(std::complex<double>(0.0, e.freq * t));
        return acc.real();
    }

    // L^2(0,T) norm over all channels, via closed-form exponential integrals.
    double cost() const {
        double acc = 0.0;
        for (const auto& ch : channels)
            for (const ExpTerm& a : ch)
                for (const ExpTerm& b : ch)
                    acc += (std::conj(a.amp) * b.amp * exp_integral(b.freq - a.freq, horizon)).real();
        return std::sqrt(std::max(acc, 0.0));
    }
};

struct HumSolution {
    ModalState minimizer;
    ControlSignal control;
    double residual = 0.0;  // relative residual in whitened coordinates
    int iterations = 0;
};

class NotObservableError : public std::runtime_error {
  public:
    NotObservableError(std::string msg, ModalState null_dir)
        : std::runtime_error(std::move(msg)), null_direction(std::move(null_dir)) {}
    ModalState null_direction;
};

class MaxIterError : public std::runtime_error {
  public:
    MaxIterError(std::string msg, double res)
        : std::runtime_error(std::move(msg)), residual(res) {}
    double residual;
};

inline double evaluate_J(const ModalState& candidate, const ModalState& target,
                         const ObservationGram& gram) {
    if (!(candidate.domain == target.domain))
        throw std::invalid_argument("evaluate_J: domain mismatch");
    return 0.5 * observed_energy(candidate, gram) + dual_pairing(candidate, target);
}

namespace detail {

// Plain CG for a dense SPD system; returns (iterations, relative residual).
inline std::pair<int, double> conjugate_gradient(const Eigen::MatrixXd& A,
                                                 const Eigen::VectorXd& b,
                                                 Eigen::VectorXd& x, double tol,
                                                 int max_iter) {
    x.setZero(b.size());
    const double bnorm = b.norm();
    if (bnorm == 0.0) return {0, 0.0};
    Eigen::VectorXd r = b, p = b;
    double rr = r.squaredNorm();
    int it = 0;
    while (it < max_iter && std::sqrt(rr) > tol * bnorm) {
        ++it;
        const Eigen::VectorXd Ap = A * p;
        const double alpha = rr / p.dot(Ap);
        x += alpha * p;
        r -= alpha * Ap;
        const double rr_new = r.squaredNorm();
        p = r + (rr_new / rr) * p;
        rr = rr_new;
    }
    return {it, std::sqrt(rr) / bnorm};
}

}  // namespace detail

inline ControlSignal synthesize_control(const ModalState& minimizer,
                                        const ObservationGram& gram);

// Minimize J: solve Q x = -r blockwise, where r is the gradient of the dual
// pairing against the target, in whitened coordinates of `pair`.
inline HumSolution solve_hum(const ModalState& target, const ObservationGram& gram,
                             double tol = 1e-10, int max_iter = 0,
                             SobolevPair pair = SobolevPair::weak()) {
    if (!(target.domain == gram.domain))
        throw std::invalid_argument("solve_hum: domain mismatch");
    HumSolution sol;
    sol.minimizer = ModalState::zero(gram.domain);
    double res_num = 0.0, res_den = 0.0;
    for (const GramBlock& b : gram.blocks) {
        const int m = b.size();
        const Eigen::MatrixXd S = b.whitened(pair);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("solve_hum: eigensolver failed in PD check");
        const double emin = es.eigenvalues()[0], emax = es.eigenvalues()[m * 2 - 1];
        if (emin <= 1e-10 * std::max(emax, 1e-300)) {
            const Eigen::VectorXd d = b.norm_weights(pair).cwiseSqrt().cwiseInverse();
            ModalState null_dir = ModalState::zero(gram.domain);
            b.scatter(d.asDiagonal() * es.eigenvectors().col(0), null_dir);
            throw NotObservableError(
                "observation Gram numerically singular at this truncation", null_dir);
        }

        // rhs: gradient of <phi, target> is (target.vel, -target.pos).
        Eigen::VectorXd r(2 * m);
        for (int i = 0; i < m; ++i) {
            r[i] = target.vel[b.modes[i]];
            r[m + i] = -target.pos[b.modes[i]];
        }
        const Eigen::VectorXd dinv = b.norm_weights(pair).cwiseSqrt().cwiseInverse();
        const Eigen::VectorXd rhs = -(dinv.asDiagonal() * r).eval();
        const int iters = max_iter > 0 ? max_iter : 4 * 2 * m;
        Eigen::VectorXd y;
        auto [it, rel] = detail::conjugate_gradient(S, rhs, y, tol, iters);
        sol.iterations += it;
        res_num += rel * rel * rhs.squaredNorm();
        res_den += rhs.squaredNorm();
        if (rel > tol && rhs.norm() > 0.0)
            throw MaxIterError("solve_hum: CG did not converge", rel);
        b.scatter(dinv.asDiagonal() * y, sol.minimizer);
    }
    sol.residual = res_den > 0.0 ? std::sqrt(res_num / res_den) : 0.0;
    sol.control = synthesize_control(sol.minimizer, gram);
    return sol;
}

// Control from the minimizer: the (signed) observed trace of its free
// evolution, written as exponential terms.
inline ControlSignal synthesize_control(const ModalState& minimizer,
                                        const ObservationGram& gram) {
    const double sign = gram.geometry.kind == ObservationKind::SquareLeftEdge ? -1.0 : 1.0;
    ControlSignal ctl;
    ctl.kind = gram.geometry.kind;
    ctl.horizon = gram.geometry.horizon;
    const TravelingWaveCoeffs tw = to_traveling_wave(minimizer);
    for (const GramBlock& b : gram.blocks) {
        std::vector<ExpTerm> terms;
        terms.reserve(2 * b.size());
        for (int i = 0; i < b.size(); ++i) {
            const int flat = b.modes[i];
            terms.push_back({sign * b.weight[i] * tw.plus[flat], b.omega[i]});
            terms.push_back({sign * b.weight[i] * tw.minus[flat], -b.omega[i]});
        }
        ctl.channels.push_back(std::move(terms));
    }
    return ctl;
}

namespace detail {

// int_0^T sin(w (T-s)) e^{i mu s} ds and its cos counterpart, closed form.
inline std::pair<std::complex<double>, std::complex<double>>
duhamel_kernels(double mu, double w, double T) {
    const std::complex<double> ep = std::exp(std::complex<double>(0.0, w * T));
    const std::complex<double> em = std::conj(ep);
    const std::complex<double> a = exp_integral(mu - w, T);
    const std::complex<double> b = exp_integral(mu + w, T);
    const std::complex<double> i2(0.0, 2.0);
    return {(ep * a - em * b) / i2, (ep * a + em * b) / 2.0};
}

}  // namespace detail

// Exact Duhamel evolution of the controlled system over the full horizon.
inline ModalState simulate_controlled(const ModalState& initial, const ControlSignal& control,
                                      const ObservationGram& gram) {
    if (std::abs(control.horizon - gram.geometry.horizon) > 1e-12)
        throw std::invalid_argument("simulate_controlled: horizon mismatch");
    const double T = control.horizon;
    const double sign = control.kind == ObservationKind::SquareLeftEdge ? -1.0 : 1.0;
    ModalState out = evolve_free(initial, T);
    for (size_t ib = 0; ib < gram.blocks.size(); ++ib) {
        const GramBlock& b = gram.blocks[ib];
        const auto& terms = control.channels.at(ib);
        for (int i = 0; i < b.size(); ++i) {
            const double w = b.omega[i];
            const double coupling = sign * b.weight[i];
            std::complex<double> dp = 0.0, dv = 0.0;
            for (const ExpTerm& e : terms) {
                auto [ksin, kcos] = detail::duhamel_kernels(e.freq, w, T);
                dp += e.amp * ksin / w;
                dv += e.amp * kcos;
            }
            out.pos[b.modes[i]] += coupling * dp.real();
            out.vel[b.modes[i]] += coupling * dv.real();
        }
    }
    return out;
}

struct CostReport {
    bool applicable = false;
    double cost = 0.0;
    double target_norm = 0.0;
    double ratio = 0.0;
};

// Empirical constant of the cost bound ||control|| <= C ||target||_pair.
inline CostReport verify_cost_bound(const HumSolution& solution, const ModalState& target,
                                    SobolevPair pair) {
    CostReport rep;
    rep.cost = solution.control.cost();
    rep.target_norm = state_norm(target, pair);
    if (rep.target_norm == 0.0) return rep;  // 0/0: not applicable
    rep.applicable = true;
    rep.ratio = rep.cost / rep.target_norm;
    return rep;
}

struct TransferValue {
    std::complex<double> value;
    double tail_estimate = 0.0;
};

// H(lambda) = lambda sum_n e_n(xi)^2 / (lambda^2 + (n pi)^2), truncated at N,
// with an integral estimate of the dropped tail (average of e_n(xi)^2 is 1).
inline TransferValue transfer_function(std::complex<double> lambda, double xi, int n_modes) {
    if (lambda.real() <= 0.0)
        throw std::invalid_argument("transfer_function: Re(lambda) must be positive");
    TransferValue tv;
    std::complex<double> acc = 0.0;
    const std::complex<double> l2 = lambda * lambda;
    for (int n = 1; n <= n_modes; ++n) {
        const double s = std::sin(n * kPi * xi);
        acc += 2.0 * s * s / (l2 + (n * kPi) * (n * kPi));
    }
    tv.value = lambda * acc;

    const double d2 = lambda.real() * lambda.real();
    const double y2 = lambda.imag() * lambda.imag();
    const double Npi = n_modes * kPi;
    double tail_int;
    if (y2 <= d2) {
        const double s = std::sqrt(d2 - y2 + 1e-300);
        tail_int = (kPi / 2.0 - std::atan(Npi / s)) / (kPi * s);
    } else {
        const double s = std::sqrt(y2 - d2);
        if (Npi <= s)
            throw std::invalid_argument("transfer_function: truncation too small for tail bound");
        tail_int = std::log((Npi + s) / (Npi - s)) / (2.0 * kPi * s);
    }
    tv.tail_estimate = std::abs(lambda) * tail_int;
    return tv;
}

struct TransferScan {
    double sup = 0.0;
    double arg_imag = 0.0;
    double tail_at_sup = 0.0;
};

// Sample sup |H| over Im(lambda) in [-M, M] on the line Re = delta.
inline TransferScan transfer_scan(double xi, int n_modes, double delta, double max_imag,
                                  int samples = 4001) {
    TransferScan scan;
    for (int i = 0; i < samples; ++i) {
        const double y = -max_imag + 2.0 * max_imag * i / (samples - 1);
        const TransferValue tv = transfer_function({delta, y}, xi, n_modes);
        if (std::abs(tv.value) > scan.sup) {
            scan.sup = std::abs(tv.value);
            scan.arg_imag = y;
            scan.tail_at_sup = tv.tail_estimate;
        }
    }
    return scan;
}

}  // namespace wavectl
