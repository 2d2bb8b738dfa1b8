#include "helmwave/harness.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace helmwave {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

Method parse_method(const std::string& s) {
    const auto l = lower(s);
    if (l == "pwls") return Method::PWLS;
    if (l == "pwdg") return Method::PWDG;
    throw InvalidArgument("unknown method '" + s + "'");
}

double parse_number(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw InvalidArgument("not a number: '" + s + "'");
    }
    if (used != s.size()) throw InvalidArgument("not a number: '" + s + "'");
    return v;
}

}  // namespace

std::vector<PlaneWave> AnalyticSolution::waves() const {
    const double ky = k * kPi;
    const Complex h1 = 0.5 * a1;
    const Complex h2 = 0.5 * a2;
    return {{h1, {-omega_x / omega, ky / omega}},
            {h1, {-omega_x / omega, -ky / omega}},
            {h2, {omega_x / omega, ky / omega}},
            {h2, {omega_x / omega, -ky / omega}}};
}

Complex AnalyticSolution::value(Point2 x) const {
    return std::cos(k * kPi * x.y) * (a1 * std::exp(-kI * omega_x * x.x) + a2 * std::exp(kI * omega_x * x.x));
}

AnalyticSolution analytic_solution(double omega, int k) {
    const double ky = k * kPi;
    if (!(omega > ky)) throw InvalidArgument("analytic solution needs omega > k*pi");
    AnalyticSolution s;
    s.omega = omega;
    s.k = k;
    s.omega_x = std::sqrt(omega * omega - ky * ky);
    const double wx = s.omega_x;
    const Complex m11 = wx, m12 = -wx;
    const Complex m21 = (omega - wx) * std::exp(-2.0 * kI * wx);
    const Complex m22 = (omega + wx) * std::exp(2.0 * kI * wx);
    const Complex det = m11 * m22 - m12 * m21;
    const Complex r1 = -kI;
    s.a1 = m22 * r1 / det;
    s.a2 = -m21 * r1 / det;
    return s;
}

const char* to_string(Example e) {
    return e == Example::Analytic ? "analytic" : "xy";
}

Example parse_example(const std::string& s) {
    const auto l = lower(s);
    if (l == "analytic") return Example::Analytic;
    if (l == "xy") return Example::XY;
    throw InvalidArgument("unknown example '" + s + "'");
}

double parse_omega(const std::string& text) {
    std::string s;
    for (char c : lower(text)) {
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    }
    if (s.empty()) throw InvalidArgument("empty omega");
    double v = 0.0;
    if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
        std::string head = s.substr(0, s.size() - 2);
        if (!head.empty() && head.back() == '*') head.pop_back();
        v = head.empty() ? kPi : parse_number(head) * kPi;
    } else {
        v = parse_number(s);
    }
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("omega must be positive: '" + text + "'");
    return v;
}

std::string format_omega(double omega) {
    const double n = omega / kPi;
    const double r = std::round(n);
    if (r >= 1.0 && r * kPi == omega) {
        std::ostringstream os;
        os << static_cast<long long>(r) << "pi";
        return os.str();
    }
    std::ostringstream os;
    os << std::setprecision(17) << omega;
    return os.str();
}

void CaseConfig::validate() const {
    if (!(omega > 0.0)) throw InvalidArgument("omega must be positive");
    if (p < 1) throw InvalidArgument("p must be positive");
    if (nx < 1 || ny < 1) throw InvalidArgument("nx and ny must be positive");
    if (!(tol > 0.0)) throw InvalidArgument("tol must be positive");
    if (maxit < 1) throw InvalidArgument("maxit must be positive");
    if (precond.m0 < 1) throw InvalidArgument("m0 must be positive");
    if (!(precond.damping >= 0.0)) throw InvalidArgument("damping must be non-negative");
    if (!(theta0() > 0.0) && precond.hierarchy.overlap.mode == Overlap::Mode::Fraction) {
        throw InvalidArgument("theta0 must be positive");
    }
    if (k < 0) throw InvalidArgument("k must be non-negative");
    if (quadrature_points < 1) throw InvalidArgument("quadrature points must be positive");
}

CoVector reference_solve(const BlockMatrix& a, const CoVector& b) {
    if (b.size() != a.rows()) throw InvalidArgument("reference_solve: size mismatch");
    const int bs = a.block_size();
    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(static_cast<std::size_t>(a.nnz_blocks()) * bs * bs);
    for (int r = 0; r < a.n_blocks(); ++r) {
        for (int pos = a.row_begin(r); pos < a.row_end(r); ++pos) {
            const int c = a.col_at(pos);
            const auto blk = a.block_at(pos);
            for (int j = 0; j < bs; ++j) {
                for (int i = 0; i < bs; ++i) trip.emplace_back(r * bs + i, c * bs + j, blk(i, j));
            }
        }
    }
    Eigen::SparseMatrix<Complex> s(a.rows(), a.rows());
    s.setFromTriplets(trip.begin(), trip.end());
    s.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu;
    lu.compute(s);
    if (lu.info() != Eigen::Success) throw NumericalError("reference_solve: singular matrix");
    CoVector x = lu.solve(b);
    if (lu.info() != Eigen::Success || !x.allFinite()) throw NumericalError("reference_solve: solve failed");
    return x;
}

double compute_rho(int n1, int n2, double omega1, double omega2) {
    if (n1 <= 0 || n2 <= 0 || !(omega1 > 0.0) || !(omega2 > 0.0) || omega1 == omega2) {
        throw InvalidArgument("compute_rho: needs positive counts and distinct positive frequencies");
    }
    return std::log(static_cast<double>(n2) / n1) / std::log(omega2 / omega1);
}

double l2_error(const BlockMatrix& mass, const CoVector& x, const CoVector& x_ref) {
    if (x.size() != x_ref.size() || x.size() != mass.rows()) throw InvalidArgument("l2_error: size mismatch");
    const double ref = x_ref.dot(mass.apply(x_ref)).real();
    if (!(ref > 0.0)) throw InvalidArgument("l2_error: zero reference norm");
    const CoVector d = x_ref - x;
    const double e = d.dot(mass.apply(d)).real();
    return std::sqrt(std::max(e, 0.0) / ref);
}

double analytic_l2_error(const Mesh& mesh, const PlaneWaveBasis& basis, const BlockMatrix& mass,
                         const AnalyticSolution& u, const CoVector& x) {
    const int p = basis.p();
    if (x.size() != static_cast<Eigen::Index>(mesh.num_elements()) * p) {
        throw InvalidArgument("analytic_l2_error: size mismatch");
    }
    const double w = basis.omega();
    const auto waves = u.waves();
    const Box domain{mesh.grid_x(0), mesh.grid_x(mesh.nx()), mesh.grid_y(0), mesh.grid_y(mesh.ny())};
    Complex uu = 0.0;
    for (const auto& a : waves) {
        for (const auto& b : waves) uu += a.amplitude * std::conj(b.amplitude) * area_moment(domain, a.direction - b.direction, w);
    }
    Complex cross = 0.0;
    for (int k = 0; k < mesh.num_elements(); ++k) {
        const Box e = mesh.element(k);
        for (int l = 0; l < p; ++l) {
            Complex c = 0.0;
            for (const auto& a : waves) c += a.amplitude * area_moment(e, a.direction - basis.direction(l), w);
            cross += std::conj(x(k * p + l)) * c;
        }
    }
    const double hh = x.dot(mass.apply(x)).real();
    const double ref = uu.real();
    if (!(ref > 0.0)) throw InvalidArgument("analytic_l2_error: zero reference norm");
    const double e = ref - 2.0 * cross.real() + hh;
    return std::sqrt(std::max(e, 0.0) / ref);
}

CaseResult run_case(const CaseConfig& config) {
    config.validate();
    CaseResult res;
    res.config = config;
    const auto t0 = Clock::now();
    const Mesh mesh = build_uniform_mesh(0.0, 2.0, 0.0, 1.0, config.nx, config.ny);
    const PlaneWaveBasis basis(config.omega, config.p);
    FormParams params = config.method == Method::PWLS ? FormParams::pwls(config.omega) : FormParams::pwdg();
    params.quadrature_points = config.quadrature_points;
    std::optional<AnalyticSolution> exact;
    BoundaryData g = BoundaryData::from_function([](Point2 x) { return Complex(x.x * x.y, 0.0); });
    if (config.example == Example::Analytic) {
        exact = analytic_solution(config.omega, config.k);
        g = BoundaryData::trace_of(exact->waves());
    }
    const Assembled sys = assemble(mesh, basis, params, g);
    const BlockMatrix mass = assemble_mass(mesh, basis);
    res.n_dof = static_cast<long long>(sys.matrix.rows());
    res.assembly_s = seconds_since(t0);

    const auto t1 = Clock::now();
    const auto pre = setup_preconditioner(sys.matrix, mesh, basis, config.precond);
    res.setup_s = seconds_since(t1);

    const LinearOperator op = [&](const CoVector& v) { return sys.matrix.apply(v); };
    const LinearOperator m = [&](const CoVector& v) { return pre->apply(v); };
    KrylovOptions ko;
    ko.tol = config.tol;
    ko.maxit = config.maxit;
    const auto t2 = Clock::now();
    auto [x, rep] = config.method == Method::PWLS ? pcg(op, m, sys.load, ko) : pgmres(op, m, sys.load, ko);
    res.solve_s = seconds_since(t2);
    res.n_iter = rep.iterations;
    res.converged = rep.converged;
    res.final_residual = rep.final_residual;

    if (exact) {
        res.err = analytic_l2_error(mesh, basis, mass, *exact, x);
        res.reference = "analytic";
    } else {
        res.err = l2_error(mass, x, reference_solve(sys.matrix, sys.load));
        res.reference = "sparse-lu";
    }
    return res;
}

namespace {

bool same_series(const CaseConfig& a, const CaseConfig& b) {
    return a.method == b.method && a.precond.kind == b.precond.kind && a.precond.m0 == b.precond.m0 &&
           a.theta0() == b.theta0() && a.example == b.example;
}

}  // namespace

void fill_rho(std::vector<CaseResult>& results) {
    for (std::size_t i = 0; i < results.size(); ++i) {
        results[i].rho.reset();
        for (std::size_t j = i; j-- > 0;) {
            const auto& prev = results[j];
            if (!same_series(prev.config, results[i].config)) continue;
            if (prev.config.omega < results[i].config.omega && prev.n_iter > 0 && results[i].n_iter > 0) {
                results[i].rho = compute_rho(prev.n_iter, results[i].n_iter, prev.config.omega, results[i].config.omega);
            }
            break;
        }
    }
}

OutputFormat parse_output_format(const std::string& s) {
    const auto l = lower(s);
    if (l == "csv") return OutputFormat::CSV;
    if (l == "json") return OutputFormat::JSON;
    throw InvalidArgument("unknown output format '" + s + "'");
}

std::string results_to_csv(const std::vector<CaseResult>& results) {
    std::ostringstream os;
    os << "omega,p,n_h,precond,m0,N_iter,rho,err,setup_s,solve_s,method,example,nx,ny,theta0,converged\n";
    os << std::setprecision(10);
    for (const auto& r : results) {
        const auto& c = r.config;
        os << format_omega(c.omega) << ',' << c.p << ',' << c.nx * c.ny << ',' << to_string(c.precond.kind) << ','
           << c.precond.m0 << ',' << r.n_iter << ',';
        if (r.rho) os << std::fixed << std::setprecision(4) << *r.rho << std::defaultfloat << std::setprecision(10);
        os << ',' << std::scientific << std::setprecision(3) << r.err << std::defaultfloat << std::setprecision(6)
           << ',' << r.setup_s << ',' << r.solve_s << ',' << to_string(c.method) << ',' << to_string(c.example) << ','
           << c.nx << ',' << c.ny << ',' << c.theta0() << ',' << (r.converged ? 1 : 0) << '\n';
    }
    return os.str();
}

nlohmann::json case_to_json(const CaseConfig& c) {
    nlohmann::json j;
    j["method"] = to_string(c.method);
    j["omega"] = c.omega;
    j["omega_label"] = format_omega(c.omega);
    j["p"] = c.p;
    j["nx"] = c.nx;
    j["ny"] = c.ny;
    j["precond"] = to_string(c.precond.kind);
    j["m0"] = c.precond.m0;
    j["scope"] = to_string(c.precond.scope);
    j["damping"] = c.precond.damping;
    j["weight_by_multiplicity"] = c.precond.weight_by_multiplicity;
    j["mg_ratio"] = c.precond.mg_ratio;
    j["overlap"] = c.precond.hierarchy.overlap.mode == Overlap::Mode::OneElement ? "one-element" : "fraction";
    j["theta0"] = c.theta0();
    j["tol"] = c.tol;
    j["maxit"] = c.maxit;
    j["example"] = to_string(c.example);
    j["k"] = c.k;
    j["quadrature_points"] = c.quadrature_points;
    return j;
}

CaseConfig case_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw InvalidArgument("case must be a JSON object");
    CaseConfig c;
    if (j.contains("method")) c.method = parse_method(j.at("method").get<std::string>());
    if (j.contains("omega")) {
        const auto& w = j.at("omega");
        c.omega = w.is_string() ? parse_omega(w.get<std::string>()) : w.get<double>();
    }
    if (j.contains("p")) c.p = j.at("p").get<int>();
    if (j.contains("nx")) c.nx = j.at("nx").get<int>();
    if (j.contains("ny")) c.ny = j.at("ny").get<int>();
    if (j.contains("precond")) c.precond.kind = parse_precond_kind(j.at("precond").get<std::string>());
    if (j.contains("m0")) c.precond.m0 = j.at("m0").get<int>();
    if (j.contains("scope")) c.precond.scope = parse_smoother_scope(j.at("scope").get<std::string>());
    if (j.contains("damping")) c.precond.damping = j.at("damping").get<double>();
    if (j.contains("weight_by_multiplicity")) {
        c.precond.weight_by_multiplicity = j.at("weight_by_multiplicity").get<bool>();
    }
    if (j.contains("mg_ratio")) c.precond.mg_ratio = j.at("mg_ratio").get<int>();
    const std::string overlap = j.value("overlap", std::string("fraction"));
    if (overlap == "one-element") {
        c.precond.hierarchy.overlap = Overlap::one_element();
    } else if (overlap == "fraction") {
        c.precond.hierarchy.overlap = Overlap::fraction(j.value("theta0", 1.0));
    } else {
        throw InvalidArgument("unknown overlap '" + overlap + "'");
    }
    if (j.contains("tol")) c.tol = j.at("tol").get<double>();
    if (j.contains("maxit")) c.maxit = j.at("maxit").get<int>();
    if (j.contains("example")) c.example = parse_example(j.at("example").get<std::string>());
    if (j.contains("k")) c.k = j.at("k").get<int>();
    if (j.contains("quadrature_points")) c.quadrature_points = j.at("quadrature_points").get<int>();
    c.validate();
    return c;
}

nlohmann::json results_to_json(const std::vector<CaseResult>& results) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : results) {
        nlohmann::json j = case_to_json(r.config);
        j["n_h"] = r.config.nx * r.config.ny;
        j["N_iter"] = r.n_iter;
        j["rho"] = r.rho ? nlohmann::json(*r.rho) : nlohmann::json(nullptr);
        j["err"] = r.err;
        j["setup_s"] = r.setup_s;
        j["solve_s"] = r.solve_s;
        j["assembly_s"] = r.assembly_s;
        j["converged"] = r.converged;
        j["final_residual"] = r.final_residual;
        j["N_dof"] = r.n_dof;
        j["reference"] = r.reference;
        rows.push_back(std::move(j));
    }
    return rows;
}

std::vector<CaseResult> results_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw InvalidArgument("results must be a JSON array");
    std::vector<CaseResult> out;
    for (const auto& row : j) {
        CaseResult r;
        r.config = case_from_json(row);
        r.n_iter = row.at("N_iter").get<int>();
        if (!row.at("rho").is_null()) r.rho = row.at("rho").get<double>();
        r.err = row.at("err").get<double>();
        r.setup_s = row.at("setup_s").get<double>();
        r.solve_s = row.at("solve_s").get<double>();
        r.assembly_s = row.value("assembly_s", 0.0);
        r.converged = row.at("converged").get<bool>();
        r.final_residual = row.value("final_residual", 0.0);
        r.n_dof = row.at("N_dof").get<long long>();
        r.reference = row.value("reference", std::string());
        out.push_back(std::move(r));
    }
    return out;
}

void emit_results(const std::vector<CaseResult>& results, OutputFormat format, const std::string& path) {
    if (results.empty()) throw InvalidArgument("emit_results: no results");
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    if (format == OutputFormat::CSV) {
        f << results_to_csv(results);
    } else {
        f << results_to_json(results).dump(2) << '\n';
    }
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
}

bool operator==(const CaseConfig& a, const CaseConfig& b) {
    return case_to_json(a) == case_to_json(b);
}

bool operator==(const CaseResult& a, const CaseResult& b) {
    return a.config == b.config && a.n_iter == b.n_iter && a.converged == b.converged &&
           a.final_residual == b.final_residual && a.err == b.err && a.rho == b.rho && a.n_dof == b.n_dof &&
           a.assembly_s == b.assembly_s && a.setup_s == b.setup_s && a.solve_s == b.solve_s &&
           a.reference == b.reference;
}

}  // namespace helmwave
