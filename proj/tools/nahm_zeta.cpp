#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
    using namespace nahm;
    CLI::App app{"One-loop correction for the reduced Yang-Mills-Nahm finite-gap model"};
    app.set_help_all_flag("--help-all");

    std::string command, config_path, route, format, out, plot_dir, mutate;
    double b, hbar, tol;
    int d, panels, order, fourier_n, theta_n;
    std::vector<double> s;
    bool free = false, sweep = false;

    app.add_option("command", command, "verify-classical | solve-hermite | band-structure | zeta | mass | theta-check")
        ->required()
        ->check(CLI::IsMember({"verify-classical", "solve-hermite", "band-structure", "zeta", "mass", "theta-check"}));
    app.add_option("--config", config_path, "JSON config file (default: $NAHM_ZETA_CONFIG)");
    auto* ob = app.add_option("--b", b, "elliptic scale b > 0");
    auto* oh = app.add_option("--hbar", hbar, "Planck constant");
    auto* od = app.add_option("--d", d, "spacetime dimension of the field (1 + transverse)");
    auto* orr = app.add_option("--route", route, "hyperelliptic | spectral | both")
                    ->check(CLI::IsMember({"hyperelliptic", "spectral", "both"}));
    auto* os = app.add_option("--s", s, "zeta arguments")->delimiter(',');
    auto* ot = app.add_option("--tol", tol, "quadrature tolerance");
    auto* op = app.add_option("--panels", panels, "quadrature panels");
    auto* oo = app.add_option("--order", order, "Gauss nodes per panel");
    auto* of = app.add_option("--fourier-n", fourier_n, "Hill truncation");
    auto* oth = app.add_option("--theta-n", theta_n, "theta series radius");
    auto* oout = app.add_option("--out", out, "output file (default stdout)");
    auto* ofmt = app.add_option("--format", format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
    auto* opd = app.add_option("--plot-dir", plot_dir, "directory for CSV plot data");
    auto* om = app.add_option("--mutate", mutate, "negative control: perturb a coefficient (P1)")
                   ->check(CLI::IsMember({"P1"}));
    auto* ofr = app.add_flag("--free", free, "free potential u = 0");
    auto* osw = app.add_flag("--sweep", sweep, "b-sweep over {1/2, 1, 2} with scaling fit");

    CLI11_PARSE(app, argc, argv);

    try {
        cli::RunConfig c;
        if (config_path.empty())
            if (const char* env = std::getenv("NAHM_ZETA_CONFIG")) config_path = env;
        if (!config_path.empty()) c = cli::load_config(config_path);
        if (ob->count()) c.b = b;
        if (oh->count()) c.hbar = hbar;
        if (od->count()) c.d = d;
        if (orr->count()) c.route = route;
        if (os->count()) c.s = s;
        if (ot->count()) c.tol = tol;
        if (op->count()) c.panels = panels;
        if (oo->count()) c.order = order;
        if (of->count()) c.fourier_n = fourier_n;
        if (oth->count()) c.theta_n = theta_n;
        if (oout->count()) c.out = out;
        if (ofmt->count()) c.format = format;
        if (opd->count()) c.plot_dir = plot_dir;
        if (om->count()) c.mutate = mutate;
        if (ofr->count()) c.free = free;
        if (osw->count()) c.sweep = sweep;

        auto report = cli::run(command, c);
        auto text = cli::render(report, c.format);
        if (c.out.empty()) {
            std::cout << text;
        } else {
            std::ofstream f(c.out);
            if (!f) throw DomainError("cannot write " + c.out);
            f << text;
        }
        if (!c.plot_dir.empty()) {
            std::filesystem::create_directories(c.plot_dir);
            for (auto& [name, table] : report.plots) {
                std::ofstream f(std::filesystem::path(c.plot_dir) / name);
                if (!f) throw DomainError("cannot write plot data " + name);
                f << table.str();
            }
        }
        return report.exit_code;
    } catch (const nahm::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
