// Reproducible experiment runner: JSON scenario configs, the full
// assemble -> quotient scan -> solve -> synthesize -> simulate -> verify
// pipeline, and CSV/JSON artifact output. All randomness is seeded from the
// config, and results.json is byte-deterministic for identical configs.

#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavectl/diophantine.hpp"
#include "wavectl/hum.hpp"
#include "wavectl/observability.hpp"
#include "wavectl/spectral.hpp"

namespace wavectl {

class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) throw ConfigError("unknown field '" + it.key() + "' in " + where);
    }
}

inline SobolevPair pair_from_json(const nlohmann::json& j, const std::string& where) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "weak") return SobolevPair::weak();
        if (s == "energy") return SobolevPair::energy();
        throw ConfigError("unknown pair name '" + s + "' in " + where);
    }
    require_keys(j, {"alpha"}, where);
    return {j.at("alpha").get<double>()};
}

inline RealSpec realspec_from_json(const nlohmann::json& j) {
    if (j.is_number()) {
        // plain numbers become decimals through their shortest representation
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", j.get<double>());
        std::string s(buf);
        const auto dot = s.find('.');
        if (dot == std::string::npos || s.find('e') != std::string::npos ||
            s.front() == '-' || s.front() != '0')
            throw ConfigError("numeric xi must be given as 0.xxx; use rational/surd otherwise");
        return DecimalSpec{s.substr(dot + 1)};
    }
    require_keys(j, {"rational", "surd", "decimal"}, "xi");
    if (j.contains("rational")) {
        const auto v = j.at("rational").get<std::vector<long long>>();
        if (v.size() != 2) throw ConfigError("rational xi needs [p, q]");
        return Rational{BigInt(v[0]), BigInt(v[1])};
    }
    if (j.contains("surd")) {
        const auto v = j.at("surd").get<std::vector<long long>>();
        if (v.size() != 4) throw ConfigError("surd xi needs [a, b, c, d] for (a+b*sqrt(d))/c");
        return QuadraticSurd{BigInt(v[0]), BigInt(v[1]), BigInt(v[2]), BigInt(v[3])};
    }
    return DecimalSpec{j.at("decimal").get<std::string>()};
}

}  // namespace detail

struct ScenarioConfig {
    std::string name;
    DomainSpec domain;
    ObservationGeometry geometry;
    std::optional<RealSpec> xi_spec;  // exact form of xi when given
    SobolevPair pair = SobolevPair::weak();
    SobolevPair cost_pair = SobolevPair::energy();
    bool target_random = true;
    std::uint64_t seed = 0;
    std::vector<double> target_pos, target_vel;
    double tol = 1e-10;
    int max_iter = 0;
    double annihilation_tol = 1e-6;
    double dt = 0.0;  // CSV sampling step; 0 means horizon/1000

    static ScenarioConfig from_json(const nlohmann::json& j) {
        detail::require_keys(j,
                             {"name", "domain", "geometry", "pair", "cost_pair", "target", "tol",
                              "max_iter", "annihilation_tol", "dt"},
                             "scenario");
        ScenarioConfig c;
        c.name = j.at("name").get<std::string>();
        try {
            c.domain = domain_from_json(j.at("domain"));
        } catch (const std::exception& e) {
            throw ConfigError(std::string("bad domain: ") + e.what());
        }

        const auto& g = j.at("geometry");
        detail::require_keys(g, {"kind", "T", "xi"}, "geometry");
        const std::string kind = g.at("kind").get<std::string>();
        const double T = g.at("T").get<double>();
        if (T <= 0) throw ConfigError("geometry.T must be positive");
        if (kind == "square_left_edge") {
            c.geometry = ObservationGeometry::square_left_edge(T);
        } else if (kind == "interval_point") {
            try {
                c.xi_spec = detail::realspec_from_json(g.at("xi"));
                const double xi = to_double(*c.xi_spec);
                if (!(xi > 0 && xi < 1)) throw std::invalid_argument("xi must lie in (0,1)");
                c.geometry = ObservationGeometry::interval_point(xi, T);
            } catch (const ConfigError&) {
                throw;
            } catch (const std::exception& e) {
                throw ConfigError(std::string("bad xi: ") + e.what());
            }
        } else {
            throw ConfigError("unknown geometry kind '" + kind + "'");
        }

        if (j.contains("pair")) c.pair = detail::pair_from_json(j.at("pair"), "pair");
        if (j.contains("cost_pair"))
            c.cost_pair = detail::pair_from_json(j.at("cost_pair"), "cost_pair");

        const auto& t = j.at("target");
        detail::require_keys(t, {"type", "seed", "pos", "vel"}, "target");
        const std::string tt = t.at("type").get<std::string>();
        if (tt == "random") {
            c.target_random = true;
            c.seed = t.at("seed").get<std::uint64_t>();
        } else if (tt == "inline") {
            c.target_random = false;
            c.target_pos = t.at("pos").get<std::vector<double>>();
            c.target_vel = t.at("vel").get<std::vector<double>>();
        } else {
            throw ConfigError("target.type must be 'random' or 'inline'");
        }

        if (j.contains("tol")) c.tol = j.at("tol").get<double>();
        if (j.contains("max_iter")) c.max_iter = j.at("max_iter").get<int>();
        if (j.contains("annihilation_tol"))
            c.annihilation_tol = j.at("annihilation_tol").get<double>();
        if (j.contains("dt")) c.dt = j.at("dt").get<double>();
        return c;
    }

    ModalState make_target() const {
        if (target_random) {
            std::mt19937_64 rng(seed);
            return ModalState::random(domain, rng);
        }
        ModalState s = ModalState::zero(domain);
        if (int(target_pos.size()) != domain.mode_count() ||
            int(target_vel.size()) != domain.mode_count())
            throw ConfigError("inline target length does not match truncation");
        for (int i = 0; i < domain.mode_count(); ++i) {
            s.pos[i] = target_pos[i];
            s.vel[i] = target_vel[i];
        }
        return s;
    }
};

struct ScenarioResult {
    nlohmann::json results;
    bool passed = false;
};

// Full pipeline; writes results.json, control.csv and trace.csv to out_dir.
inline ScenarioResult run_scenario(const ScenarioConfig& config,
                                   const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    const ObservationGram gram = assemble_gram(config.geometry, config.domain);
    const ModalState target = config.make_target();
    const QuotientResult minq = min_quotient(gram, config.pair);
    const double maxq = max_quotient(gram, config.pair);

    const HumSolution sol = solve_hum(target, gram, config.tol, config.max_iter, config.pair);
    const ModalState final_state = simulate_controlled(target, sol.control, gram);
    const CostReport cost = verify_cost_bound(sol, target, config.cost_pair);

    const double target_norm = state_norm(target, config.pair);
    const double final_norm = state_norm(final_state, config.pair);
    const double annihilation_rel = target_norm > 0 ? final_norm / target_norm : 0.0;
    const double observed = observed_energy(sol.minimizer, gram);
    const double cost_identity = observed > 0
        ? std::abs(sol.control.cost() * sol.control.cost() - observed) / observed
        : 0.0;

    nlohmann::json checks = nlohmann::json::array();
    auto check = [&checks](const std::string& name, double value, double threshold) {
        checks.push_back({{"name", name},
                          {"value", value},
                          {"threshold", threshold},
                          {"pass", value <= threshold}});
    };
    check("solver_residual", sol.residual, config.tol);
    check("annihilation_relative", annihilation_rel, config.annihilation_tol);
    check("cost_identity_relative", cost_identity, 1e-10);

    bool passed = true;
    for (const auto& c : checks) passed = passed && c.at("pass").get<bool>();

    ScenarioResult res;
    res.passed = passed;
    res.results = {{"name", config.name},
                   {"domain", to_json(config.domain)},
                   {"horizon", config.geometry.horizon},
                   {"min_quotient", minq.value},
                   {"max_quotient", maxq},
                   {"hum",
                    {{"residual", sol.residual},
                     {"iterations", sol.iterations},
                     {"cost", sol.control.cost()}}},
                   {"cost_bound",
                    {{"applicable", cost.applicable},
                     {"ratio", cost.ratio},
                     {"target_norm", cost.target_norm}}},
                   {"annihilation",
                    {{"target_norm", target_norm},
                     {"final_norm", final_norm},
                     {"relative", annihilation_rel}}},
                   {"checks", checks},
                   {"pass", passed}};

    {
        std::ofstream f(out_dir / "results.json");
        f << res.results.dump(2) << '\n';
    }
    const double T = config.geometry.horizon;
    const double dt = config.dt > 0 ? config.dt : T / 1000.0;
    const double trace_sign =
        config.geometry.kind == ObservationKind::SquareLeftEdge ? -1.0 : 1.0;
    {
        std::ofstream f(out_dir / "control.csv");
        f << "t";
        for (size_t c = 0; c < sol.control.channels.size(); ++c) f << ",g" << c + 1;
        f << '\n';
        for (double t = 0.0; t <= T + dt / 2; t += dt) {
            f << t;
            for (size_t c = 0; c < sol.control.channels.size(); ++c)
                f << ',' << sol.control.sample(int(c), std::min(t, T));
            f << '\n';
        }
    }
    {
        // observed trace of the minimizer's free evolution (B* phi~)
        std::ofstream f(out_dir / "trace.csv");
        f << "t";
        for (size_t c = 0; c < sol.control.channels.size(); ++c) f << ",y" << c + 1;
        f << '\n';
        for (double t = 0.0; t <= T + dt / 2; t += dt) {
            f << t;
            for (size_t c = 0; c < sol.control.channels.size(); ++c)
                f << ',' << trace_sign * sol.control.sample(int(c), std::min(t, T));
            f << '\n';
        }
    }
    return res;
}

// Grid of min/max quotients over horizons and truncations, as CSV.
inline void scan_observability(const ScenarioConfig& base, const std::vector<double>& horizons,
                               const std::vector<int>& truncations, std::ostream& os) {
    os << "truncation,T,min_quotient,max_quotient\n";
    for (int n : truncations) {
        const DomainSpec domain = base.domain.kind == DomainKind::Square
                                      ? DomainSpec::square(n, n)
                                      : DomainSpec::interval(n);
        for (double T : horizons) {
            ObservationGeometry geo = base.geometry;
            geo.horizon = T;
            const ObservationGram gram = assemble_gram(geo, domain);
            os << n << ',' << T << ',' << min_quotient(gram, base.pair).value << ','
               << max_quotient(gram, base.pair) << '\n';
        }
    }
}

// JSON descriptor of a control: exact exponential-sum terms per channel.
inline nlohmann::json to_json(const ControlSignal& c) {
    nlohmann::json channels = nlohmann::json::array();
    for (const auto& ch : c.channels) {
        nlohmann::json terms = nlohmann::json::array();
        for (const ExpTerm& e : ch)
            terms.push_back({{"amplitude_re", e.amp.real()},
                             {"amplitude_im", e.amp.imag()},
                             {"frequency", e.freq}});
        channels.push_back(terms);
    }
    return {{"horizon", c.horizon},
            {"kind", c.kind == ObservationKind::SquareLeftEdge ? "square_left_edge"
                                                               : "interval_point"},
            {"channels", channels}};
}

}  // namespace wavectl
