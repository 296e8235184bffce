// Exact time-Gram quadratic form of the observed trace and the derived
// observability / admissibility constants.
//
// Two observation operators are supported:
//   - SquareLeftEdge: normal derivative on {0} x (0,1). With the conventions
//     of spectral.hpp a mode (k1,k2) contributes the coefficient k1*pi to the
//     boundary mode k2, and different k2 never couple, so the Gram is block
//     diagonal per k2.
//   - IntervalPoint: pointwise trace at xi, coefficient e_n(xi) = sqrt(2) sin(n pi xi).
//
// Gram entries are closed-form integrals of products of complex exponentials;
// quadrature exists only as a test oracle.

#pragma once

#include <algorithm>
#include <complex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "wavectl/spectral.hpp"

namespace wavectl {

enum class ObservationKind { SquareLeftEdge, IntervalPoint };

struct ObservationGeometry {
    ObservationKind kind = ObservationKind::SquareLeftEdge;
    double xi = 0.0;  // IntervalPoint only
    double horizon = 1.0;

    static ObservationGeometry square_left_edge(double T) {
        if (T <= 0) throw std::invalid_argument("horizon must be positive");
        return {ObservationKind::SquareLeftEdge, 0.0, T};
    }
    static ObservationGeometry interval_point(double xi, double T) {
        if (T <= 0) throw std::invalid_argument("horizon must be positive");
        if (!(xi > 0.0 && xi < 1.0)) throw std::invalid_argument("xi must lie in (0,1)");
        return {ObservationKind::IntervalPoint, xi, T};
    }
};

// int_0^T e^{i d t} dt, with the near-resonant branch expanded to second order.
inline std::complex<double> exp_integral(double delta, double T) {
    if (std::abs(delta) < 1e-12) {
        const double dT = delta * T;
        return {T - dT * dT * T / 6.0, dT * T / 2.0};
    }
    const std::complex<double> i_delta(0.0, delta);
    return (std::exp(i_delta * T) - 1.0) / i_delta;
}

// One Gram block: a set of flat modes whose traces interact. Coordinates are
// traveling-wave amplitudes ordered (plus_0..plus_{m-1}, minus_0..minus_{m-1});
// real_form is the same quadratic form over (pos_0..pos_{m-1}, vel_0..vel_{m-1}).
struct GramBlock {
    std::vector<int> modes;     // flat indices into the domain
    Eigen::VectorXd omega;      // mode frequencies
    Eigen::VectorXd weight;     // trace coefficient of each mode
    Eigen::VectorXd lambda;
    Eigen::MatrixXcd tw;        // Hermitian form over traveling-wave coords
    Eigen::MatrixXd real_form;  // symmetric form over (pos, vel)

    int size() const { return int(modes.size()); }

    // Diagonal of the pair norm in (pos, vel) coordinates.
    Eigen::VectorXd norm_weights(SobolevPair pair) const {
        const int m = size();
        Eigen::VectorXd d(2 * m);
        for (int i = 0; i < m; ++i) {
            d[i] = std::pow(lambda[i], 2.0 * pair.a);
            d[m + i] = std::pow(lambda[i], 2.0 * pair.a - 1.0);
        }
        return d;
    }

    // Whitened form D^{-1/2} Q D^{-1/2} for the given pair.
    Eigen::MatrixXd whitened(SobolevPair pair) const {
        const Eigen::VectorXd d = norm_weights(pair).cwiseSqrt().cwiseInverse();
        return d.asDiagonal() * real_form * d.asDiagonal();
    }

    // Gather the block's (pos, vel) coordinates from a full state.
    Eigen::VectorXd gather(const ModalState& s) const {
        const int m = size();
        Eigen::VectorXd x(2 * m);
        for (int i = 0; i < m; ++i) {
            x[i] = s.pos[modes[i]];
            x[m + i] = s.vel[modes[i]];
        }
        return x;
    }

    void scatter(const Eigen::VectorXd& x, ModalState& s) const {
        const int m = size();
        for (int i = 0; i < m; ++i) {
            s.pos[modes[i]] = x[i];
            s.vel[modes[i]] = x[m + i];
        }
    }
};

struct ObservationGram {
    ObservationGeometry geometry;
    DomainSpec domain;
    std::vector<GramBlock> blocks;
};

namespace detail {

inline GramBlock make_block(const DomainSpec& domain, std::vector<int> modes,
                            const Eigen::VectorXd& weight, double T) {
    GramBlock b;
    b.modes = std::move(modes);
    const int m = b.size();
    b.omega.resize(m);
    b.lambda.resize(m);
    for (int i = 0; i < m; ++i) {
        b.lambda[i] = domain.lambda(b.modes[i]);
        b.omega[i] = std::sqrt(b.lambda[i]);
    }
    b.weight = weight;

    // Signed frequencies: +omega for the plus half, -omega for the minus half.
    Eigen::VectorXd mu(2 * m), ww(2 * m);
    for (int i = 0; i < m; ++i) {
        mu[i] = b.omega[i];
        mu[m + i] = -b.omega[i];
        ww[i] = ww[m + i] = b.weight[i];
    }
    b.tw.resize(2 * m, 2 * m);
    for (int j = 0; j < 2 * m; ++j)
        for (int l = j; l < 2 * m; ++l) {
            const std::complex<double> e = ww[j] * ww[l] * exp_integral(mu[l] - mu[j], T);
            b.tw(j, l) = e;
            b.tw(l, j) = std::conj(e);  // Hermitian symmetry enforced exactly
        }

    // Transfer to real (pos, vel) coordinates through
    // plus = (pos - i vel/omega)/2, minus = (pos + i vel/omega)/2.
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(2 * m, 2 * m);
    for (int i = 0; i < m; ++i) {
        const std::complex<double> half(0.5, 0.0), ih(0.0, 0.5 / b.omega[i]);
        M(i, i) = half;
        M(i, m + i) = -ih;
        M(m + i, i) = half;
        M(m + i, m + i) = ih;
    }
    const Eigen::MatrixXcd Qc = M.adjoint() * b.tw * M;
    b.real_form = 0.5 * (Qc.real() + Qc.real().transpose());
    return b;
}

}  // namespace detail

inline ObservationGram assemble_gram(const ObservationGeometry& geometry,
                                     const DomainSpec& domain) {
    ObservationGram g{geometry, domain, {}};
    const double T = geometry.horizon;
    if (geometry.kind == ObservationKind::SquareLeftEdge) {
        if (domain.kind != DomainKind::Square)
            throw std::invalid_argument("SquareLeftEdge observation needs a square domain");
        for (int k2 = 1; k2 <= domain.n2; ++k2) {
            std::vector<int> modes(domain.n1);
            Eigen::VectorXd w(domain.n1);
            for (int k1 = 1; k1 <= domain.n1; ++k1) {
                modes[k1 - 1] = domain.flat_of(k1, k2);
                w[k1 - 1] = k1 * kPi;
            }
            g.blocks.push_back(detail::make_block(domain, std::move(modes), w, T));
        }
    } else {
        if (domain.kind != DomainKind::Interval)
            throw std::invalid_argument("IntervalPoint observation needs an interval domain");
        std::vector<int> modes(domain.n1);
        Eigen::VectorXd w(domain.n1);
        for (int n = 1; n <= domain.n1; ++n) {
            modes[n - 1] = n - 1;
            w[n - 1] = std::sqrt(2.0) * std::sin(n * kPi * geometry.xi);
        }
        g.blocks.push_back(detail::make_block(domain, std::move(modes), w, T));
    }
    return g;
}

// Quadratic form of the Gram on a state: the observed energy
// int_0^T |B* phi(t)|^2 dt.
inline double observed_energy(const ModalState& state, const ObservationGram& gram) {
    if (!(state.domain == gram.domain))
        throw std::invalid_argument("observed_energy: domain mismatch");
    double acc = 0.0;
    for (const GramBlock& b : gram.blocks) {
        const Eigen::VectorXd x = b.gather(state);
        acc += x.dot(b.real_form * x);
    }
    return std::max(acc, 0.0);
}

struct QuotientResult {
    double value = 0.0;
    ModalState argmin;
};

// Smallest generalized eigenvalue of (Gram, pair norm): the truncated
// observability constant. Solved per block by symmetric whitening.
inline QuotientResult min_quotient(const ObservationGram& gram, SobolevPair pair) {
    QuotientResult best;
    best.value = std::numeric_limits<double>::infinity();
    best.argmin = ModalState::zero(gram.domain);
    for (const GramBlock& b : gram.blocks) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.whitened(pair));
        if (es.info() != Eigen::Success)
            throw std::runtime_error("min_quotient: eigensolver failed");
        if (es.eigenvalues()[0] < best.value) {
            best.value = es.eigenvalues()[0];
            const Eigen::VectorXd d = b.norm_weights(pair).cwiseSqrt().cwiseInverse();
            const Eigen::VectorXd x = d.asDiagonal() * es.eigenvectors().col(0);
            best.argmin = ModalState::zero(gram.domain);
            b.scatter(x, best.argmin);
        }
    }
    return best;
}

// Largest generalized eigenvalue: the truncated admissibility constant.
inline double max_quotient(const ObservationGram& gram, SobolevPair pair) {
    double best = 0.0;
    for (const GramBlock& b : gram.blocks) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.whitened(pair));
        if (es.info() != Eigen::Success)
            throw std::runtime_error("max_quotient: eigensolver failed");
        best = std::max(best, es.eigenvalues().maxCoeff());
    }
    return best;
}

// CSV export of all blocks as (row, col, re, im) in global traveling-wave
// numbering: block offsets accumulate, plus half before minus half.
inline void export_gram_csv(const ObservationGram& gram, std::ostream& os) {
    os << "row,col,re,im\n";
    int offset = 0;
    for (const GramBlock& b : gram.blocks) {
        for (int j = 0; j < 2 * b.size(); ++j)
            for (int l = 0; l < 2 * b.size(); ++l)
                os << offset + j << ',' << offset + l << ','
                   << b.tw(j, l).real() << ',' << b.tw(j, l).imag() << '\n';
        offset += 2 * b.size();
    }
}

}  // namespace wavectl
