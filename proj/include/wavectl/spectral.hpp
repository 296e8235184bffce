// Spectral representation of wave states on the unit interval and unit
// square: Dirichlet eigenbasis, Sobolev-scale norms, duality pairing and
// exact free evolution.
//
// Conventions used throughout the library:
//   - Interval: lambda_n = (n pi)^2, e_n(x) = sqrt(2) sin(n pi x).
//   - Square:   lambda_k = pi^2 (k1^2 + k2^2), e_k = 2 sin(k1 pi x1) sin(k2 pi x2).
//   - Square modes are flattened k2-major: flat = (k2-1)*K1 + (k1-1),
//     so all modes sharing k2 are contiguous.
//   - A state-space pair is (H_a, H_{a-1/2}); the norm uses spectral weights
//     lambda^{2a} on position and lambda^{2a-1} on velocity.

#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace wavectl {

inline constexpr double kPi = 3.14159265358979323846;

enum class DomainKind { Interval, Square };

struct DomainSpec {
    DomainKind kind = DomainKind::Interval;
    int n1 = 1;  // N for the interval, K1 for the square
    int n2 = 1;  // unused for the interval, K2 for the square

    static DomainSpec interval(int n_modes) {
        if (n_modes < 1) throw std::invalid_argument("interval truncation must be >= 1");
        return {DomainKind::Interval, n_modes, 1};
    }
    static DomainSpec square(int k1_max, int k2_max) {
        if (k1_max < 1 || k2_max < 1) throw std::invalid_argument("square truncation must be >= 1");
        return {DomainKind::Square, k1_max, k2_max};
    }

    int mode_count() const {
        return kind == DomainKind::Interval ? n1 : n1 * n2;
    }

    // Mode numbers of a flat index. Interval modes report k2 = 0.
    std::pair<int, int> mode_of(int flat) const {
        if (kind == DomainKind::Interval) return {flat + 1, 0};
        return {flat % n1 + 1, flat / n1 + 1};
    }

    int flat_of(int k1, int k2) const {
        return kind == DomainKind::Interval ? k1 - 1 : (k2 - 1) * n1 + (k1 - 1);
    }

    double lambda(int flat) const {
        auto [k1, k2] = mode_of(flat);
        return kPi * kPi * (double(k1) * k1 + double(k2) * k2);
    }

    double omega(int flat) const { return std::sqrt(lambda(flat)); }

    bool operator==(const DomainSpec&) const = default;
};

// omega = sqrt(lambda) for every retained mode, in canonical flat order.
inline Eigen::VectorXd eigen_frequencies(const DomainSpec& domain) {
    Eigen::VectorXd w(domain.mode_count());
    for (int i = 0; i < w.size(); ++i) w[i] = domain.omega(i);
    return w;
}

// Exponent a of the state-space pair (H_a, H_{a-1/2}).
struct SobolevPair {
    double a = 0.0;
    static constexpr SobolevPair energy() { return {0.5}; }  // H^1_0 x L^2
    static constexpr SobolevPair weak() { return {0.0}; }    // L^2 x H^-1
};

struct ModalState {
    DomainSpec domain;
    Eigen::VectorXd pos;  // position coefficients in the orthonormal basis
    Eigen::VectorXd vel;  // velocity coefficients

    static ModalState zero(const DomainSpec& d) {
        return {d, Eigen::VectorXd::Zero(d.mode_count()), Eigen::VectorXd::Zero(d.mode_count())};
    }

    // Unit position coefficient on a single flat mode.
    static ModalState position_mode(const DomainSpec& d, int flat) {
        ModalState s = zero(d);
        s.pos[flat] = 1.0;
        return s;
    }

    static ModalState random(const DomainSpec& d, std::mt19937_64& rng) {
        std::normal_distribution<double> gauss(0.0, 1.0);
        ModalState s = zero(d);
        for (int i = 0; i < d.mode_count(); ++i) {
            s.pos[i] = gauss(rng);
            s.vel[i] = gauss(rng);
        }
        return s;
    }

    void check_valid() const {
        if (pos.size() != domain.mode_count() || vel.size() != domain.mode_count())
            throw std::invalid_argument("coefficient length does not match truncation");
        if (!pos.allFinite() || !vel.allFinite())
            throw std::invalid_argument("non-finite state coefficient");
    }
};

// Amplitudes of the exponential representation: mode coefficient
// c_k(t) = plus_k e^{i w t} + minus_k e^{-i w t}. For real states
// minus = conj(plus) by construction.
struct TravelingWaveCoeffs {
    DomainSpec domain;
    Eigen::VectorXcd plus;
    Eigen::VectorXcd minus;
};

inline TravelingWaveCoeffs to_traveling_wave(const ModalState& s) {
    const int m = s.domain.mode_count();
    TravelingWaveCoeffs tw{s.domain, Eigen::VectorXcd(m), Eigen::VectorXcd(m)};
    for (int i = 0; i < m; ++i) {
        const double w = s.domain.omega(i);
        const std::complex<double> iv(0.0, s.vel[i] / w);
        tw.plus[i] = 0.5 * (s.pos[i] - iv);
        tw.minus[i] = 0.5 * (s.pos[i] + iv);
    }
    return tw;
}

inline ModalState from_traveling_wave(const TravelingWaveCoeffs& tw) {
    const int m = tw.domain.mode_count();
    ModalState s = ModalState::zero(tw.domain);
    for (int i = 0; i < m; ++i) {
        const double w = tw.domain.omega(i);
        s.pos[i] = (tw.plus[i] + tw.minus[i]).real();
        s.vel[i] = (std::complex<double>(0.0, w) * (tw.plus[i] - tw.minus[i])).real();
    }
    return s;
}

// sqrt( sum lambda^{2a} pos^2 + sum lambda^{2a-1} vel^2 ) for the pair
// (H_a, H_{a-1/2}).
inline double state_norm(const ModalState& s, SobolevPair pair) {
    double acc = 0.0;
    for (int i = 0; i < s.domain.mode_count(); ++i) {
        const double lam = s.domain.lambda(i);
        acc += std::pow(lam, 2.0 * pair.a) * s.pos[i] * s.pos[i];
        acc += std::pow(lam, 2.0 * pair.a - 1.0) * s.vel[i] * s.vel[i];
    }
    return std::sqrt(acc);
}

// Spectral realization of <a0, b1> - <a1, b0>.
inline double dual_pairing(const ModalState& a, const ModalState& b) {
    if (!(a.domain == b.domain)) throw std::invalid_argument("dual_pairing: truncation mismatch");
    return a.pos.dot(b.vel) - a.vel.dot(b.pos);
}

// Exact solution of the homogeneous equation: each mode rotates with its
// own frequency.
inline ModalState evolve_free(const ModalState& s, double t) {
    ModalState out = s;
    for (int i = 0; i < s.domain.mode_count(); ++i) {
        const double w = s.domain.omega(i);
        const double c = std::cos(w * t), sn = std::sin(w * t);
        out.pos[i] = s.pos[i] * c + s.vel[i] / w * sn;
        out.vel[i] = -w * s.pos[i] * sn + s.vel[i] * c;
    }
    return out;
}

// --- JSON serialization ----------------------------------------------------

inline nlohmann::json to_json(const DomainSpec& d) {
    if (d.kind == DomainKind::Interval) return {{"kind", "interval"}, {"N", d.n1}};
    return {{"kind", "square"}, {"K1", d.n1}, {"K2", d.n2}};
}

inline DomainSpec domain_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind");
    if (kind == "interval") return DomainSpec::interval(j.at("N").get<int>());
    if (kind == "square") return DomainSpec::square(j.at("K1").get<int>(), j.at("K2").get<int>());
    throw std::invalid_argument("unknown domain kind: " + kind);
}

inline nlohmann::json to_json(const ModalState& s) {
    return {{"domain", to_json(s.domain)},
            {"pos", std::vector<double>(s.pos.begin(), s.pos.end())},
            {"vel", std::vector<double>(s.vel.begin(), s.vel.end())}};
}

inline ModalState state_from_json(const nlohmann::json& j) {
    ModalState s;
    s.domain = domain_from_json(j.at("domain"));
    const auto pos = j.at("pos").get<std::vector<double>>();
    const auto vel = j.at("vel").get<std::vector<double>>();
    s.pos = Eigen::Map<const Eigen::VectorXd>(pos.data(), long(pos.size()));
    s.vel = Eigen::Map<const Eigen::VectorXd>(vel.data(), long(vel.size()));
    s.check_valid();
    return s;
}

}  // namespace wavectl
