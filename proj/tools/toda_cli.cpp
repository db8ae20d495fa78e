#include "toda/pipeline.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace toda;

namespace {

// "a,b" → two numbers
template <class T>
std::pair<T, T> pair_of(const std::string& s, const char* flag) {
    std::istringstream is(s);
    T a{}, b{};
    char comma = 0;
    if (!(is >> a >> comma >> b) || comma != ',' || !is.eof())
        throw Error(ErrorKind::Validation, std::string(flag) + " expects two comma-separated values, got '" + s + "'");
    return {a, b};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Theta-function Toda solutions and their su(N) immersions"};
    app.require_subcommand(1);
    std::string config, out, lambda, grid;
    bool verbose = false, inject = false;
    auto common = [&](CLI::App* c, bool needs_config) {
        auto* o = c->add_option("--config", config, "config file (key = value with [sections])");
        if (needs_config) o->required();
        c->add_option("--out", out, "output directory (overrides output.dir)");
        c->add_option("--lambda", lambda, "spectral parameter RE,IM on the unit circle");
        c->add_option("--grid", grid, "grid size NX,NY");
        c->add_flag("--verbose", verbose, "stage log on stderr");
    };
    auto* curve = app.add_subcommand("curve", "spectral-curve data and admissible divisor");
    auto* solve = app.add_subcommand("solve", "theta-function jets and the Toda residual");
    auto* surface = app.add_subcommand("surface", "immersion, geometry report and mesh");
    auto* check = app.add_subcommand("check", "invariant suite, JSON summary on stdout");
    common(curve, true);
    common(solve, true);
    common(surface, true);
    common(check, false);
    check->add_flag("--inject-fault", inject, "perturb the L2 coefficient of the su(2) m = 2 Lax matrix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    std::ostringstream sink;
    std::ostream& log = verbose ? std::cerr : static_cast<std::ostream&>(sink);
    std::string stage = app.get_subcommands().front()->get_name();
    try {
        if (stage == "check") {
            auto items = run_check_suite(inject);
            std::string js = check_json(items);
            std::cout << js << '\n';
            if (!out.empty()) {
                std::filesystem::create_directories(out);
                std::ofstream(std::filesystem::path(out) / "check.json") << js << '\n';
            }
            for (auto& it : items)
                if (!it.pass()) {
                    std::cerr << "check: " << it.name << " = " << fmt17(it.value) << " (tolerance " << fmt17(it.tolerance)
                              << ")\n";
                    return 3;
                }
            return 0;
        }
        RunConfig cfg = load_config(config);
        if (!out.empty()) cfg.out_dir = out;
        if (!lambda.empty()) {
            auto [re, im] = pair_of<double>(lambda, "--lambda");
            cfg.lambda = {re, im};
        }
        if (!grid.empty()) std::tie(cfg.nx, cfg.ny) = pair_of<int>(grid, "--grid");
        if (stage == "curve") cmd_curve(cfg, log);
        if (stage == "solve") cmd_solve(cfg, log);
        if (stage == "surface") cmd_surface(cfg, log);
        std::cerr << stage << ": ok\n";
        return 0;
    } catch (const Error& e) {
        std::cerr << stage << " failed: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << stage << " failed: " << e.what() << '\n';
        return 3;
    }
}
