#include "robpen/errors.hpp"
#include "robpen/experiment.hpp"
#include "robpen/parallel.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>

namespace {

constexpr int kExitNumerical = 1;
constexpr int kExitConfig = 2;

std::string one_line(std::string s)
{
    for (char& c : s)
        if (c == '\n' || c == '\r')
            c = ' ';
    return s;
}

int fail(const char* kind, int code, const std::string& msg)
{
    std::cerr << "error kind=" << kind << " code=" << code << " message=\"" << one_line(msg) << "\"\n";
    return code;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Penalized robust regression functionals: experiments and verification"};
    app.require_subcommand(1);
    unsigned threads = 1;
    std::string out;
    app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 1024u));
    app.add_option("--out", out, "output directory (overrides experiment.output)");

    std::string config;
    auto* run = app.add_subcommand("run", "run the experiment described by a config file");
    run->add_option("config", config, "config file")->required();
    auto* verify = app.add_subcommand("verify", "run the verification suite");
    verify->add_option("config", config, "config file")->required();
    for (auto* sub : {run, verify}) {
        sub->add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 1024u));
        sub->add_option("--out", out, "output directory");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0)
            return app.exit(e);
        return fail("usage", kExitConfig, e.what());
    }

    try {
        robpen::set_thread_count(threads);
        robpen::ExperimentConfig cfg = robpen::load_config(config);
        if (verify->parsed() && cfg.experiment != robpen::ExperimentKind::verify)
            throw robpen::ConfigError("verify expects a config with experiment.type = verify");
        const std::string dir = out.empty() ? cfg.output : out;
        const auto report = robpen::run_experiment(cfg, dir, config);
        for (const auto& c : report.checks)
            std::cout << robpen::format_line(c) << '\n';
        std::cout << "wrote " << report.files.size() << " file(s) to " << dir << '\n';
        if (!report.all_passed)
            return fail("verification", kExitNumerical, "one or more criteria failed");
        return 0;
    } catch (const robpen::ConfigError& e) {
        return fail("config", kExitConfig, e.what());
    } catch (const robpen::NumericalError& e) {
        return fail("numerical", kExitNumerical, e.what());
    } catch (const std::invalid_argument& e) {
        return fail("config", kExitConfig, e.what());
    } catch (const std::exception& e) {
        return fail("numerical", kExitNumerical, e.what());
    }
}
