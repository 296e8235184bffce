#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "wavectl/spectral.hpp"

using namespace wavectl;

TEST_CASE("eigen frequencies") {
    CHECK(eigen_frequencies(DomainSpec::interval(1))[0] == doctest::Approx(kPi).epsilon(1e-14));

    const DomainSpec sq = DomainSpec::square(3, 4);
    CHECK(sq.omega(sq.flat_of(3, 4)) == doctest::Approx(5 * kPi).epsilon(1e-14));
    CHECK(sq.omega(sq.flat_of(1, 1)) == doctest::Approx(kPi * std::sqrt(2.0)).epsilon(1e-14));

    const Eigen::VectorXd w = eigen_frequencies(sq);
    CHECK(w.size() == 12);
    CHECK(w.minCoeff() > 0.0);
    // k2-major flattening: flat 0..2 are k2=1
    CHECK(w[0] == doctest::Approx(kPi * std::sqrt(2.0)));
    CHECK(w[3] == doctest::Approx(kPi * std::sqrt(5.0)));
}

TEST_CASE("traveling wave representation") {
    const DomainSpec d = DomainSpec::interval(4);

    SUBCASE("cosine mode") {
        const ModalState s = ModalState::position_mode(d, 2);
        const TravelingWaveCoeffs tw = to_traveling_wave(s);
        CHECK(tw.plus[2] == std::complex<double>(0.5, 0.0));
        CHECK(tw.minus[2] == std::complex<double>(0.5, 0.0));
    }
    SUBCASE("sine mode") {
        ModalState s = ModalState::zero(d);
        s.vel[1] = d.omega(1);
        const TravelingWaveCoeffs tw = to_traveling_wave(s);
        CHECK(std::abs(tw.plus[1] - std::complex<double>(0.0, -0.5)) < 1e-15);
        CHECK(std::abs(tw.minus[1] - std::complex<double>(0.0, 0.5)) < 1e-15);
    }
    SUBCASE("round trip and conjugacy on random states") {
        std::mt19937_64 rng(123);
        for (int rep = 0; rep < 20; ++rep) {
            const ModalState s = ModalState::random(DomainSpec::square(3, 5), rng);
            const TravelingWaveCoeffs tw = to_traveling_wave(s);
            for (int i = 0; i < s.domain.mode_count(); ++i)
                CHECK(tw.minus[i] == std::conj(tw.plus[i]));
            const ModalState back = from_traveling_wave(tw);
            CHECK((back.pos - s.pos).norm() < 1e-13 * s.pos.norm());
            CHECK((back.vel - s.vel).norm() < 1e-13 * s.vel.norm());
        }
    }
}

TEST_CASE("state norms") {
    const DomainSpec d = DomainSpec::interval(4);
    const ModalState e1 = ModalState::position_mode(d, 0);
    CHECK(state_norm(e1, SobolevPair::energy()) == doctest::Approx(kPi).epsilon(1e-14));
    CHECK(state_norm(e1, SobolevPair::weak()) == doctest::Approx(1.0).epsilon(1e-14));

    const DomainSpec sq = DomainSpec::square(4, 4);
    ModalState v = ModalState::zero(sq);
    v.vel[sq.flat_of(3, 4)] = 1.0;
    CHECK(state_norm(v, SobolevPair::weak()) ==
          doctest::Approx(1.0 / (5 * kPi)).epsilon(1e-13));
}

TEST_CASE("dual pairing") {
    const DomainSpec d = DomainSpec::interval(6);
    std::mt19937_64 rng(7);
    const ModalState a = ModalState::random(d, rng), b = ModalState::random(d, rng);

    CHECK(dual_pairing(a, a) == 0.0);
    CHECK(std::abs(dual_pairing(a, b) + dual_pairing(b, a)) < 1e-14);

    ModalState ea = ModalState::position_mode(d, 0);
    ModalState eb = ModalState::zero(d);
    eb.vel[0] = 1.0;
    CHECK(dual_pairing(ea, eb) == doctest::Approx(1.0));

    CHECK_THROWS_AS(dual_pairing(a, ModalState::zero(DomainSpec::interval(5))),
                    std::invalid_argument);

    // bilinearity
    ModalState c = ModalState::random(d, rng);
    ModalState apc = a;
    apc.pos += 2.0 * c.pos;
    apc.vel += 2.0 * c.vel;
    CHECK(dual_pairing(apc, b) ==
          doctest::Approx(dual_pairing(a, b) + 2.0 * dual_pairing(c, b)).epsilon(1e-12));
}

TEST_CASE("free evolution") {
    const DomainSpec d = DomainSpec::interval(5);
    std::mt19937_64 rng(99);
    const ModalState s = ModalState::random(d, rng);

    SUBCASE("t = 0 is the identity") {
        const ModalState out = evolve_free(s, 0.0);
        CHECK((out.pos - s.pos).norm() == 0.0);
        CHECK((out.vel - s.vel).norm() == 0.0);
    }
    SUBCASE("mode 1 has period 2") {
        const ModalState e1 = ModalState::position_mode(d, 0);
        const ModalState out = evolve_free(e1, 2.0);
        CHECK((out.pos - e1.pos).norm() < 1e-12);
        CHECK((out.vel - e1.vel).norm() < 1e-12);
    }
    SUBCASE("ENERGY and WEAK norms conserved") {
        for (double t : {0.3, 1.7, 4.0, 100.0}) {
            const ModalState out = evolve_free(s, t);
            CHECK(state_norm(out, SobolevPair::energy()) ==
                  doctest::Approx(state_norm(s, SobolevPair::energy())).epsilon(1e-12));
            CHECK(state_norm(out, SobolevPair::weak()) ==
                  doctest::Approx(state_norm(s, SobolevPair::weak())).epsilon(1e-12));
        }
    }
}

TEST_CASE("json round trip") {
    std::mt19937_64 rng(5);
    const ModalState s = ModalState::random(DomainSpec::square(2, 3), rng);
    const ModalState back = state_from_json(to_json(s));
    CHECK(back.domain == s.domain);
    CHECK((back.pos - s.pos).norm() == 0.0);
    CHECK((back.vel - s.vel).norm() == 0.0);
}
