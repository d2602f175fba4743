// surge_lab command-line driver. Each subcommand is one library call plus serialization.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "surge_lab/json_io.hpp"

namespace sl = surge_lab;
namespace sj = surge_lab::json_io;

namespace {

constexpr int kConfigExit = 2;
constexpr int kNumericExit = 3;

struct Flags {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    double horizon = 1e4;
    std::string policy = "accept-all";
    std::optional<double> r1, r2;
    bool fix_nonsurge = false;
    std::optional<double> tol;
};

void emit(const std::string& text, const std::string& out) {
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw sl::ConfigError("cannot write '" + out + "'");
    f << text;
}

void emit_json(const sj::json& j, const std::string& out) { emit(j.dump(2) + "\n", out); }

/// "SPEC" applies to both states, "SPEC;SPEC" sets sigma_1 and sigma_2.
sl::PolicyPair parse_policy_pair(const std::string& text) {
    const auto semi = text.find(';');
    if (semi == std::string::npos) return sl::PolicyPair::both(sl::parse_policy(text));
    return {sl::parse_policy(text.substr(0, semi)), sl::parse_policy(text.substr(semi + 1))};
}

std::vector<double> default_t_grid(const sl::ModelPrimitives& p) {
    std::vector<double> g;
    const double top = p.dist_2.truncation_point();
    for (int k = 0; k <= 80; ++k) g.push_back(top * k / 80.0);
    return g;
}

int run(const std::string& cmd, const Flags& f) {
    const auto cfg = sj::read_file(f.config);
    if (cmd == "sweep") {
        auto sweep = sj::sweep_config_from_json(cfg);
        if (f.tol) sweep.search.delta = *f.tol;
        const auto rows = sl::run_sweep(sweep);
        emit(sl::sweep_csv(sweep, rows), f.out.empty() ? sweep.output_path : f.out);
        return 0;
    }
    const auto p = sj::primitives_from_json(cfg);
    if (cmd == "eval") {
        emit_json(sj::to_json(sl::dynamic_rate(p, parse_policy_pair(f.policy))), f.out);
    } else if (cmd == "best-response") {
        sl::SearchOptions opt;
        if (f.tol) opt.delta = *f.tol;
        emit_json(sj::to_json(sl::dynamic_best_response(p, f.fix_nonsurge, opt)), f.out);
    } else if (cmd == "ic-construct") {
        if (!f.r1 || !f.r2) throw sl::ConfigError("ic-construct needs --r1 and --r2");
        emit_json(sj::to_json(sl::construct_ic_prices(p, *f.r1, *f.r2)), f.out);
    } else if (cmd == "certify") {
        sl::CertificateOptions opt;
        if (f.seed) opt.seed = *f.seed;
        emit_json(sj::to_json(sl::ic_certificate(p, opt)), f.out);
    } else if (cmd == "simulate") {
        sl::SimConfig sc;
        sc.seed = *f.seed;
        sc.horizon_hours = f.horizon;
        emit_json(sj::to_json(sl::simulate(p, parse_policy_pair(f.policy), sc)), f.out);
    } else if (cmd == "mu-curve") {
        const auto grid = cfg.contains("t_grid") ? sj::values_from_json(cfg.at("t_grid")) : default_t_grid(p);
        emit(sl::mu_curve_csv(sl::run_mu_curve(p, grid)), f.out);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-state dynamic driver pricing lab"};
    app.require_subcommand(1, 1);
    Flags f;

    struct Sub {
        const char* name;
        const char* help;
    };
    const Sub subs[] = {
        {"eval", "earnings breakdown of a policy pair"},
        {"best-response", "driver best response by structural-form search"},
        {"ic-construct", "incentive-compatible prices for target rates"},
        {"certify", "derivative-sign certificate for the configured pricing"},
        {"simulate", "Monte Carlo estimate of rate and occupancy"},
        {"sweep", "parameter sweep to CSV"},
        {"mu-curve", "surge occupancy against a surge lower threshold"},
    };
    for (const auto& s : subs) {
        auto* sc = app.add_subcommand(s.name, s.help);
        sc->add_option("--config", f.config, "JSON config path")->required()->check(CLI::ExistingFile);
        sc->add_option("--out", f.out, "output path (default stdout)");
        auto* seed = sc->add_option("--seed", f.seed, "random seed");
        if (std::string(s.name) == "simulate") seed->required();
        sc->add_option("--horizon", f.horizon, "simulated hours")->check(CLI::PositiveNumber);
        sc->add_option("--policy", f.policy, "policy literal, or SPEC;SPEC for the two states");
        sc->add_option("--r1", f.r1, "target non-surge rate");
        sc->add_option("--r2", f.r2, "target surge rate");
        sc->add_option("--fix-nonsurge", f.fix_nonsurge, "pin the non-surge policy to accept-all");
        sc->add_option("--tol", f.tol, "relative rate tolerance for the accept-all tie-break");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigExit;
    }

    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        return run(cmd, f);
    } catch (const sl::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kNumericExit;
    } catch (const sl::Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigExit;
    } catch (const sj::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigExit;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kNumericExit;
    }
}
