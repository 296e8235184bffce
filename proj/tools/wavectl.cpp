// wavectl command line: observability constants, HUM control synthesis,
// quotient scans, continued fractions and transfer-function scans.
//
// Exit codes: 0 success, 1 usage/config error, 2 mathematical infeasibility
// (e.g. unobservable truncation), 3 solver failure.

#include <complex>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wavectl/diophantine.hpp"
#include "wavectl/hum.hpp"
#include "wavectl/observability.hpp"
#include "wavectl/scenario.hpp"
#include "wavectl/spectral.hpp"

#ifndef WAVECTL_PRESET_DIR
#define WAVECTL_PRESET_DIR "presets"
#endif

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw wavectl::ConfigError("cannot open " + path);
    json j;
    f >> j;
    return j;
}

wavectl::ScenarioConfig load_config(const std::string& config_path,
                                    const std::string& preset) {
    if (!config_path.empty()) return wavectl::ScenarioConfig::from_json(load_json(config_path));
    if (!preset.empty())
        return wavectl::ScenarioConfig::from_json(
            load_json(std::string(WAVECTL_PRESET_DIR) + "/" + preset + ".json"));
    throw wavectl::ConfigError("either --config or --preset is required");
}

wavectl::RealSpec parse_realspec(const std::string& rational, const std::string& surd,
                                 const std::string& decimal) {
    if (!rational.empty()) {
        const auto slash = rational.find('/');
        if (slash == std::string::npos)
            throw wavectl::ConfigError("--rational expects p/q");
        return wavectl::Rational{wavectl::BigInt(rational.substr(0, slash)),
                                 wavectl::BigInt(rational.substr(slash + 1))};
    }
    if (!surd.empty()) {
        std::vector<wavectl::BigInt> parts;
        std::stringstream ss(surd);
        std::string tok;
        while (std::getline(ss, tok, ',')) parts.emplace_back(tok);
        if (parts.size() != 4)
            throw wavectl::ConfigError("--surd expects a,b,c,d for (a+b*sqrt(d))/c");
        return wavectl::QuadraticSurd{parts[0], parts[1], parts[2], parts[3]};
    }
    if (!decimal.empty()) return wavectl::DecimalSpec{decimal};
    throw wavectl::ConfigError("one of --rational, --surd, --decimal is required");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral wave observability and HUM control toolkit"};
    app.require_subcommand(1);

    std::string config_path, preset, out_dir = "out", out_file, gram_csv;

    auto* observe = app.add_subcommand("observe", "assemble the Gram and report quotients");
    observe->add_option("--config", config_path, "scenario config JSON");
    observe->add_option("--preset", preset, "named preset");
    observe->add_option("--out", out_dir, "output directory");
    observe->add_option("--gram-csv", gram_csv, "also export the Gram entries as CSV");

    auto* control = app.add_subcommand("control", "run the full HUM pipeline");
    control->add_option("--config", config_path, "scenario config JSON");
    control->add_option("--preset", preset, "named preset");
    control->add_option("--out", out_dir, "output directory");

    std::vector<double> horizons;
    std::vector<int> truncations;
    auto* scan = app.add_subcommand("scan", "min/max quotient grid over T and truncation");
    scan->add_option("--config", config_path, "scenario config JSON");
    scan->add_option("--preset", preset, "named preset");
    scan->add_option("--T", horizons, "horizons to scan");
    scan->add_option("--trunc", truncations, "truncations to scan (per-axis)");
    scan->add_option("--out", out_file, "output CSV (default stdout)");

    std::string rational, surd, decimal;
    int max_terms = 40, depth = 20;
    long gap_n = 0;
    auto* cf = app.add_subcommand("cf", "continued fraction expansion and S membership");
    cf->add_option("--rational", rational, "p/q");
    cf->add_option("--surd", surd, "a,b,c,d for (a+b*sqrt(d))/c");
    cf->add_option("--decimal", decimal, "fractional digits of a value in (0,1)");
    cf->add_option("--max-terms", max_terms, "expansion length cap");
    cf->add_option("--depth", depth, "membership inspection depth");
    cf->add_option("--gap-scan", gap_n, "also report min n|sin(n pi xi)| for n <= N");

    double delta = 1.0, max_imag = 100.0;
    int modes = 256, samples = 4001;
    auto* transfer = app.add_subcommand("transfer", "transfer function scan on Re = delta");
    transfer->add_option("--rational", rational, "p/q");
    transfer->add_option("--surd", surd, "a,b,c,d");
    transfer->add_option("--decimal", decimal, "fractional digits");
    transfer->add_option("--delta", delta, "real part of lambda");
    transfer->add_option("--max-imag", max_imag, "scan |Im lambda| up to this");
    transfer->add_option("--modes", modes, "truncation");
    transfer->add_option("--samples", samples, "scan samples");

    CLI11_PARSE(app, argc, argv);

    try {
        if (observe->parsed()) {
            const auto cfg = load_config(config_path, preset);
            const auto gram = wavectl::assemble_gram(cfg.geometry, cfg.domain);
            const auto minq = wavectl::min_quotient(gram, cfg.pair);
            const double maxq = wavectl::max_quotient(gram, cfg.pair);
            std::filesystem::create_directories(out_dir);
            json j = {{"name", cfg.name},
                      {"min_quotient", minq.value},
                      {"max_quotient", maxq},
                      {"argmin", wavectl::to_json(minq.argmin)}};
            std::ofstream(out_dir + "/observe.json") << j.dump(2) << '\n';
            if (!gram_csv.empty()) {
                std::ofstream f(gram_csv);
                wavectl::export_gram_csv(gram, f);
            }
            std::cout << "min_quotient " << minq.value << "  max_quotient " << maxq << '\n';
            return 0;
        }
        if (control->parsed()) {
            const auto cfg = load_config(config_path, preset);
            const auto res = wavectl::run_scenario(cfg, out_dir);
            std::cout << res.results.dump(2) << '\n';
            return res.passed ? 0 : 3;
        }
        if (scan->parsed()) {
            const auto cfg = load_config(config_path, preset);
            if (!out_file.empty()) {
                std::ofstream f(out_file);
                wavectl::scan_observability(cfg, horizons, truncations, f);
            } else {
                wavectl::scan_observability(cfg, horizons, truncations, std::cout);
            }
            return 0;
        }
        if (cf->parsed()) {
            const auto x = parse_realspec(rational, surd, decimal);
            json j;
            try {
                j["expansion"] = wavectl::to_json(wavectl::continued_fraction(x, max_terms));
            } catch (const wavectl::PrecisionExhausted& e) {
                j["expansion"] = wavectl::to_json(e.partial);
                j["expansion"]["precision_exhausted"] = true;
            }
            j["membership"] = wavectl::to_json(wavectl::is_in_S(x, depth));
            if (gap_n > 0) {
                const auto rep = wavectl::sine_gap_scan(x, gap_n);
                j["sine_gap"] = {{"min", rep.min_value}, {"argmin", rep.argmin}};
            }
            std::cout << j.dump(2) << '\n';
            return 0;
        }
        if (transfer->parsed()) {
            const auto x = parse_realspec(rational, surd, decimal);
            const double xi = wavectl::to_double(x);
            const auto scan_res = wavectl::transfer_scan(xi, modes, delta, max_imag, samples);
            json j = {{"sup", scan_res.sup},
                      {"arg_imag", scan_res.arg_imag},
                      {"tail_estimate", scan_res.tail_at_sup},
                      {"delta", delta},
                      {"modes", modes}};
            std::cout << j.dump(2) << '\n';
            return 0;
        }
    } catch (const wavectl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const wavectl::NotObservableError& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return 2;
    } catch (const wavectl::MaxIterError& e) {
        std::cerr << "solver failure: " << e.what() << " (residual " << e.residual << ")\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
