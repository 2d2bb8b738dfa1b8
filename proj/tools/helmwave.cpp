#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "helmwave/harness.hpp"
#include "helmwave/hierarchy.hpp"

using namespace helmwave;

namespace {

struct RunArgs {
    std::string method = "pwls";
    std::string omega = "20pi";
    int p = 10;
    int nx = 32;
    int ny = 32;
    std::string precond = "B";
    int m0 = 1;
    double theta0 = 1.0;
    bool one_element = false;
    std::string scope = "level";
    double damping = 0.0;
    bool multiplicity = false;
    std::string example = "analytic";
    int k = 10;
    double tol = 1e-6;
    int maxit = 500;
    std::string out;
    std::string format = "csv";
};

CaseConfig to_config(const RunArgs& a) {
    nlohmann::json j;
    j["method"] = a.method;
    j["omega"] = a.omega;
    j["p"] = a.p;
    j["nx"] = a.nx;
    j["ny"] = a.ny;
    j["precond"] = a.precond;
    j["m0"] = a.m0;
    j["theta0"] = a.theta0;
    j["overlap"] = a.one_element ? "one-element" : "fraction";
    j["scope"] = a.scope;
    j["damping"] = a.damping;
    j["weight_by_multiplicity"] = a.multiplicity;
    j["example"] = a.example;
    j["k"] = a.k;
    j["tol"] = a.tol;
    j["maxit"] = a.maxit;
    return case_from_json(j);
}

void print_row(const CaseResult& r) {
    const auto& c = r.config;
    std::cerr << to_string(c.method) << ' ' << format_omega(c.omega) << " p=" << c.p << ' ' << c.nx << 'x' << c.ny
              << ' ' << to_string(c.precond.kind) << " m0=" << c.precond.m0 << "  N_iter=" << r.n_iter
              << (r.converged ? "" : " (maxit)") << "  err=" << r.err << "  setup=" << r.setup_s
              << "s solve=" << r.solve_s << "s\n";
}

int finish(std::vector<CaseResult>& results, const std::string& out, const std::string& format) {
    fill_rho(results);
    const auto fmt = parse_output_format(format);
    if (out.empty()) {
        if (fmt == OutputFormat::CSV) {
            std::cout << results_to_csv(results);
        } else {
            std::cout << results_to_json(results).dump(2) << '\n';
        }
    } else {
        emit_results(results, fmt, out);
    }
    for (const auto& r : results) {
        if (!r.converged) return 2;
    }
    return 0;
}

int run_batch(const std::string& path, std::string out, std::string format) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read '" + path + "'");
    const auto cfg = nlohmann::json::parse(f);
    nlohmann::json cases = cfg;
    nlohmann::json defaults = nlohmann::json::object();
    if (cfg.is_object()) {
        cases = cfg.at("cases");
        defaults = cfg.value("defaults", nlohmann::json::object());
        if (out.empty()) out = cfg.value("out", std::string());
        if (cfg.contains("format")) format = cfg.at("format").get<std::string>();
    }
    if (!cases.is_array() || cases.empty()) throw InvalidArgument("batch: 'cases' must be a nonempty array");
    std::vector<CaseResult> results;
    for (const auto& c : cases) {
        nlohmann::json merged = defaults;
        merged.update(c);
        results.push_back(run_case(case_from_json(merged)));
        print_row(results.back());
    }
    return finish(results, out, format);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multilevel overlapping preconditioners for plane-wave Helmholtz discretizations"};
    app.require_subcommand(1);

    RunArgs ra;
    auto* run = app.add_subcommand("run", "Solve one case and print or write a result row");
    run->add_option("--method", ra.method, "pwls or pwdg")->check(CLI::IsMember({"pwls", "pwdg"}, CLI::ignore_case));
    run->add_option("--omega", ra.omega, "wave number, e.g. 20pi or 62.83");
    run->add_option("--p", ra.p, "plane-wave directions per element");
    run->add_option("--nx", ra.nx, "elements along x");
    run->add_option("--ny", ra.ny, "elements along y");
    run->add_option("--precond", ra.precond,
                    "B|Bs|M1|M2|M3|mg-jacobi|mg-schwarz|dd-non|dd-small|dd-large|B-small|B-half");
    run->add_option("--m0", ra.m0, "smoothing steps");
    run->add_option("--theta0", ra.theta0, "overlap fraction in (0, 1]");
    run->add_flag("--one-element", ra.one_element, "grow subdomains by one element instead of theta0");
    run->add_option("--scope", ra.scope, "smoother scope: level or subdomain");
    run->add_option("--damping", ra.damping, "level smoother damping, 0 for automatic");
    run->add_flag("--multiplicity", ra.multiplicity, "weight subspaces by how often they are generated");
    run->add_option("--example", ra.example, "analytic or xy");
    run->add_option("--k", ra.k, "mode number of the analytic example");
    run->add_option("--tol", ra.tol, "relative residual tolerance");
    run->add_option("--maxit", ra.maxit, "iteration limit");
    run->add_option("--out", ra.out, "output file (stdout when omitted)");
    run->add_option("--format", ra.format, "csv or json")->check(CLI::IsMember({"csv", "json"}, CLI::ignore_case));

    std::string batch_file, batch_out, batch_format = "csv";
    auto* batch = app.add_subcommand("batch", "Run every case of a JSON configuration file");
    batch->add_option("config", batch_file, "JSON file: an array of cases or {\"cases\": [...]}")->required();
    batch->add_option("--out", batch_out, "output file");
    batch->add_option("--format", batch_format, "csv or json");

    int hx = 32, hy = 32;
    double htheta = 1.0;
    bool hone = false, hrects = false;
    std::string hout;
    auto* dump = app.add_subcommand("dump-hierarchy", "Print the subdomain hierarchy of a grid as JSON");
    dump->add_option("--nx", hx, "elements along x");
    dump->add_option("--ny", hy, "elements along y");
    dump->add_option("--theta0", htheta, "overlap fraction in (0, 1]");
    dump->add_flag("--one-element", hone, "one-element overlap");
    dump->add_flag("--rects", hrects, "include every rectangle");
    dump->add_option("--out", hout, "output file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            std::vector<CaseResult> results{run_case(to_config(ra))};
            print_row(results.back());
            return finish(results, ra.out, ra.format);
        }
        if (*batch) return run_batch(batch_file, batch_out, batch_format);
        if (*dump) {
            HierarchyOptions o;
            o.overlap = hone ? Overlap::one_element() : Overlap::fraction(htheta);
            const auto j = to_json(build_hierarchy(hx, hy, o), hrects).dump(2);
            if (hout.empty()) {
                std::cout << j << '\n';
            } else {
                std::ofstream f(hout);
                if (!(f << j << '\n')) throw std::runtime_error("cannot write '" + hout + "'");
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
