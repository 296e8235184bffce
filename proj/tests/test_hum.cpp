#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "wavectl/hum.hpp"

using namespace wavectl;

namespace {

// Dense direct-solve oracle for the HUM system: LDLT per block, no CG.
ModalState direct_hum_minimizer(const ModalState& target, const ObservationGram& gram,
                                SobolevPair pair) {
    ModalState minimizer = ModalState::zero(gram.domain);
    for (const GramBlock& b : gram.blocks) {
        const int m = b.size();
        Eigen::VectorXd r(2 * m);
        for (int i = 0; i < m; ++i) {
            r[i] = target.vel[b.modes[i]];
            r[m + i] = -target.pos[b.modes[i]];
        }
        const Eigen::VectorXd dinv = b.norm_weights(pair).cwiseSqrt().cwiseInverse();
        const Eigen::MatrixXd S = b.whitened(pair);
        const Eigen::VectorXd y = S.ldlt().solve((-(dinv.asDiagonal() * r)).eval());
        b.scatter(dinv.asDiagonal() * y, minimizer);
    }
    return minimizer;
}

}  // namespace

TEST_CASE("CG solution matches a dense direct solve") {
    const DomainSpec d = DomainSpec::interval(16);
    const auto gram =
        assemble_gram(ObservationGeometry::interval_point(std::sqrt(2.0) - 1.0, 3.0), d);
    std::mt19937_64 rng(21);
    for (int rep = 0; rep < 5; ++rep) {
        const ModalState target = ModalState::random(d, rng);
        const HumSolution sol = solve_hum(target, gram);
        const ModalState direct = direct_hum_minimizer(target, gram, SobolevPair::weak());
        const double scale = direct.pos.norm() + direct.vel.norm();
        CHECK((sol.minimizer.pos - direct.pos).norm() < 1e-6 * scale);
        CHECK((sol.minimizer.vel - direct.vel).norm() < 1e-6 * scale);
        CHECK(sol.residual <= 1e-10);
    }
}

TEST_CASE("evaluate_J basics") {
    const DomainSpec d = DomainSpec::square(3, 3);
    const auto gram = assemble_gram(ObservationGeometry::square_left_edge(9.0), d);
    std::mt19937_64 rng(4);
    const ModalState target = ModalState::random(d, rng);
    CHECK(evaluate_J(ModalState::zero(d), target, gram) == 0.0);

    const ModalState cand = ModalState::random(d, rng);
    CHECK(evaluate_J(cand, ModalState::zero(d), gram) ==
          doctest::Approx(0.5 * observed_energy(cand, gram)));

    // at the minimizer, J = -1/2 observed energy
    const HumSolution sol = solve_hum(target, gram);
    CHECK(evaluate_J(sol.minimizer, target, gram) ==
          doctest::Approx(-0.5 * observed_energy(sol.minimizer, gram)).epsilon(1e-8));
}

TEST_CASE("zero target yields the zero solution") {
    const DomainSpec d = DomainSpec::square(3, 3);
    const auto gram = assemble_gram(ObservationGeometry::square_left_edge(9.0), d);
    const HumSolution sol = solve_hum(ModalState::zero(d), gram);
    CHECK(sol.minimizer.pos.norm() == 0.0);
    CHECK(sol.minimizer.vel.norm() == 0.0);
    CHECK(sol.residual == 0.0);
    CHECK(sol.iterations == 0);
    CHECK(sol.control.cost() == 0.0);
}

TEST_CASE("single-mode target converges quickly") {
    const DomainSpec d = DomainSpec::square(8, 8);
    const auto gram = assemble_gram(ObservationGeometry::square_left_edge(9.0), d);
    const ModalState target = ModalState::position_mode(d, d.flat_of(1, 1));
    const HumSolution sol = solve_hum(target, gram);
    CHECK(sol.residual <= 1e-8);
    CHECK(sol.iterations <= 2 * d.mode_count());
    const ModalState fin = simulate_controlled(target, sol.control, gram);
    CHECK(state_norm(fin, SobolevPair::weak()) < 1e-6);
}

TEST_CASE("single-mode control is one conjugate exponential pair") {
    const DomainSpec d = DomainSpec::square(2, 2);
    const double T = 9.0;
    const auto gram = assemble_gram(ObservationGeometry::square_left_edge(T), d);
    const ModalState one = ModalState::position_mode(d, d.flat_of(1, 1));
    const ControlSignal ctl = synthesize_control(one, gram);
    REQUIRE(ctl.channels.size() == 2);
    int nonzero = 0;
    for (const ExpTerm& e : ctl.channels[0])
        if (std::abs(e.amp) > 0) ++nonzero;
    CHECK(nonzero == 2);
    for (const ExpTerm& e : ctl.channels[1]) CHECK(std::abs(e.amp) == 0.0);

    // L^2 cost of the single cosine w*cos(w t) in closed form
    const double w = d.omega(d.flat_of(1, 1));
    const double expect2 = kPi * kPi * (T / 2.0 + std::sin(2 * w * T) / (4 * w));
    CHECK(ctl.cost() * ctl.cost() == doctest::Approx(expect2).epsilon(1e-12));
}

TEST_CASE("zero control reduces to free evolution") {
    const DomainSpec d = DomainSpec::interval(5);
    const auto gram = assemble_gram(ObservationGeometry::interval_point(0.3, 2.0), d);
    std::mt19937_64 rng(14);
    const ModalState s = ModalState::random(d, rng);
    const ControlSignal zero = synthesize_control(ModalState::zero(d), gram);
    const ModalState out = simulate_controlled(s, zero, gram);
    const ModalState free = evolve_free(s, 2.0);
    CHECK((out.pos - free.pos).norm() == 0.0);
    CHECK((out.vel - free.vel).norm() == 0.0);
}

TEST_CASE("minimizer satisfies the first-order optimality identity") {
    // at the minimum, <Lambda phi, phi> = -<phi, target>, i.e.
    // observed_energy(minimizer) = -dual_pairing(minimizer, target)
    const DomainSpec d = DomainSpec::square(4, 4);
    const auto gram = assemble_gram(ObservationGeometry::square_left_edge(9.0), d);
    std::mt19937_64 rng(3);
    const ModalState target = ModalState::random(d, rng);
    const HumSolution sol = solve_hum(target, gram);
    const double obs = observed_energy(sol.minimizer, gram);
    CHECK(dual_pairing(sol.minimizer, target) == doctest::Approx(-obs).epsilon(1e-8));

    // J at the minimizer is below J at nearby perturbations
    const double J0 = evaluate_J(sol.minimizer, target, gram);
    for (int rep = 0; rep < 10; ++rep) {
        ModalState pert = ModalState::random(d, rng);
        pert.pos = sol.minimizer.pos + 1e-3 * pert.pos;
        pert.vel = sol.minimizer.vel + 1e-3 * pert.vel;
        CHECK(evaluate_J(pert, target, gram) >= J0 - 1e-12 * std::abs(J0));
    }
}

TEST_CASE("control cost identity") {
    // ||g||_{L^2}^2 = int |B* phi~|^2 = observed energy of the minimizer
    const DomainSpec d = DomainSpec::square(4, 4);
    const auto gram = assemble_gram(ObservationGeometry::square_left_edge(9.0), d);
    std::mt19937_64 rng(5);
    const ModalState target = ModalState::random(d, rng);
    const HumSolution sol = solve_hum(target, gram);
    const double c = sol.control.cost();
    CHECK(c * c == doctest::Approx(observed_energy(sol.minimizer, gram)).epsilon(1e-10));

    // closed-form cost matches trapezoid quadrature of the samples
    const double T = sol.control.horizon;
    const int steps = 20000;
    double acc = 0.0;
    for (int i = 0; i <= steps; ++i) {
        const double t = T * i / steps;
        double v2 = 0.0;
        for (size_t ch = 0; ch < sol.control.channels.size(); ++ch) {
            const double v = sol.control.sample(int(ch), t);
            v2 += v * v;
        }
        acc += (i == 0 || i == steps) ? 0.5 * v2 : v2;
    }
    acc *= T / steps;
    CHECK(std::sqrt(acc) == doctest::Approx(c).epsilon(1e-6));
}

TEST_CASE("controlled evolution annihilates the target") {
    std::mt19937_64 rng(17);

    SUBCASE("square edge, T = 9") {
        const DomainSpec d = DomainSpec::square(4, 4);
        const auto gram = assemble_gram(ObservationGeometry::square_left_edge(9.0), d);
        const ModalState target = ModalState::random(d, rng);
        const HumSolution sol = solve_hum(target, gram);
        const ModalState fin = simulate_controlled(target, sol.control, gram);
        CHECK(state_norm(fin, SobolevPair::weak()) <
              1e-6 * state_norm(target, SobolevPair::weak()));
    }
    SUBCASE("interval point, xi = sqrt(2)-1, T = 3") {
        const DomainSpec d = DomainSpec::interval(16);
        const auto gram =
            assemble_gram(ObservationGeometry::interval_point(std::sqrt(2.0) - 1.0, 3.0), d);
        const SobolevPair pair{-0.5};
        const ModalState target = ModalState::random(d, rng);
        const HumSolution sol = solve_hum(target, gram, 1e-12, 0, pair);
        const ModalState fin = simulate_controlled(target, sol.control, gram);
        CHECK(state_norm(fin, pair) < 1e-6 * state_norm(target, pair));
    }
}

TEST_CASE("Duhamel closed form matches RK4") {
    const DomainSpec d = DomainSpec::interval(8);
    const auto gram =
        assemble_gram(ObservationGeometry::interval_point(std::sqrt(2.0) - 1.0, 3.0), d);
    std::mt19937_64 rng(31);
    const ModalState target = ModalState::random(d, rng);
    const HumSolution sol = solve_hum(target, gram, 1e-12);
    const ModalState exact = simulate_controlled(target, sol.control, gram);
    const ModalState rk4 = oracles::rk4_simulate(target, sol.control, gram, 10000);
    const double scale = state_norm(target, SobolevPair::energy());
    CHECK((exact.pos - rk4.pos).norm() + (exact.vel - rk4.vel).norm() < 1e-6 * scale);
}

TEST_CASE("unobservable truncation is rejected") {
    const DomainSpec d = DomainSpec::interval(8);
    const auto gram = assemble_gram(ObservationGeometry::interval_point(0.5, 3.0), d);
    std::mt19937_64 rng(1);
    const ModalState target = ModalState::random(d, rng);
    try {
        solve_hum(target, gram);
        FAIL("expected NotObservableError");
    } catch (const NotObservableError& e) {
        // the reported null direction really is invisible to the observation
        const double nrm = state_norm(e.null_direction, SobolevPair::weak());
        CHECK(observed_energy(e.null_direction, gram) < 1e-10 * nrm * nrm);
    }
}

TEST_CASE("iteration cap failure is reported") {
    const DomainSpec d = DomainSpec::square(4, 4);
    const auto gram = assemble_gram(ObservationGeometry::square_left_edge(9.0), d);
    std::mt19937_64 rng(2);
    const ModalState target = ModalState::random(d, rng);
    CHECK_THROWS_AS(solve_hum(target, gram, 1e-14, 1), MaxIterError);
}

TEST_CASE("cost bound report") {
    const DomainSpec d = DomainSpec::square(4, 4);
    const auto gram = assemble_gram(ObservationGeometry::square_left_edge(9.0), d);
    std::mt19937_64 rng(9);
    const ModalState target = ModalState::random(d, rng);
    const HumSolution sol = solve_hum(target, gram);
    const CostReport rep = verify_cost_bound(sol, target, SobolevPair::energy());
    CHECK(rep.applicable);
    CHECK(rep.ratio == doctest::Approx(rep.cost / rep.target_norm));

    const CostReport zero = verify_cost_bound(sol, ModalState::zero(d), SobolevPair::energy());
    CHECK_FALSE(zero.applicable);
}

TEST_CASE("transfer function") {
    const double xi = std::sqrt(2.0) - 1.0;

    SUBCASE("one-term closed form at xi = 1/2") {
        for (double l : {0.5, 1.0, 4.0}) {
            const TransferValue tv = transfer_function({l, 0.0}, 0.5, 1);
            CHECK(tv.value.real() == doctest::Approx(2 * l / (l * l + kPi * kPi)).epsilon(1e-14));
            CHECK(tv.value.imag() == 0.0);
        }
    }
    SUBCASE("Re(lambda) <= 0 is rejected") {
        CHECK_THROWS_AS(transfer_function({0.0, 1.0}, xi, 64), std::invalid_argument);
        CHECK_THROWS_AS(transfer_function({-1.0, 0.0}, xi, 64), std::invalid_argument);
    }
    SUBCASE("truncation error is within the tail estimates") {
        for (double y : {0.0, 10.0, 60.0}) {
            const TransferValue lo = transfer_function({1.0, y}, xi, 64);
            const TransferValue hi = transfer_function({1.0, y}, xi, 4096);
            CHECK(std::abs(lo.value - hi.value) <= lo.tail_estimate + hi.tail_estimate);
            CHECK(hi.tail_estimate < lo.tail_estimate);
        }
    }
    SUBCASE("conjugate symmetry") {
        const TransferValue a = transfer_function({1.0, 17.0}, xi, 256);
        const TransferValue b = transfer_function({1.0, -17.0}, xi, 256);
        CHECK(std::abs(a.value - std::conj(b.value)) < 1e-12);
    }
    SUBCASE("scan returns the grid supremum") {
        const TransferScan scan = transfer_scan(xi, 256, 1.0, 30.0, 601);
        CHECK(scan.sup > 0.0);
        CHECK(std::abs(scan.arg_imag) <= 30.0);
        const TransferValue at = transfer_function({1.0, scan.arg_imag}, xi, 256);
        CHECK(std::abs(at.value) == doctest::Approx(scan.sup));
        CHECK(at.tail_estimate == doctest::Approx(scan.tail_at_sup));
    }
}
