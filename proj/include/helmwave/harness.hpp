#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "helmwave/assembly.hpp"
#include "helmwave/krylov.hpp"
#include "helmwave/precond.hpp"

namespace helmwave {

/// u = cos(k pi y) (A1 exp(-i wx x) + A2 exp(i wx x)) on [0,2]x[0,1].
struct AnalyticSolution {
    double omega = 0.0;
    int k = 0;
    double omega_x = 0.0;
    Complex a1, a2;

    /// The four plane waves whose sum is u.
    std::vector<PlaneWave> waves() const;
    Complex value(Point2 x) const;
};

/// Coefficients of the analytic example; throws for omega <= k pi.
AnalyticSolution analytic_solution(double omega, int k);

enum class Example {
    Analytic,  ///< Robin trace of the analytic solution
    XY         ///< g = x * y, compared with a direct solve
};

const char* to_string(Example e);
Example parse_example(const std::string& s);

/// Accepts "20pi", "20*pi", "pi", "2.5pi" or a plain number.
double parse_omega(const std::string& s);
/// "20pi" when omega is an integer multiple of pi, else the number.
std::string format_omega(double omega);

struct CaseConfig {
    Method method = Method::PWLS;
    double omega = 20.0 * kPi;
    int p = 10;
    int nx = 32;
    int ny = 32;
    PrecondConfig precond;
    double tol = 1e-6;
    int maxit = 500;
    Example example = Example::Analytic;
    int k = 10;
    int quadrature_points = 20;

    double theta0() const { return precond.hierarchy.overlap.theta; }
    /// Throws InvalidArgument on non-positive sizes or tolerances.
    void validate() const;
};

struct CaseResult {
    CaseConfig config;
    int n_iter = 0;
    bool converged = false;
    double final_residual = 0.0;
    double err = 0.0;
    std::optional<double> rho;
    long long n_dof = 0;
    double assembly_s = 0.0;
    double setup_s = 0.0;
    double solve_s = 0.0;
    /// Label of the reference path used for err.
    std::string reference;
};

CaseResult run_case(const CaseConfig& config);

/// Direct sparse LU solve of A x = b.
CoVector reference_solve(const BlockMatrix& a, const CoVector& b);

/// ln(n2 / n1) / ln(omega2 / omega1).
double compute_rho(int n1, int n2, double omega1, double omega2);

/// ||x_ref - x||_M / ||x_ref||_M.
double l2_error(const BlockMatrix& mass, const CoVector& x, const CoVector& x_ref);

/// ||u - u_h|| / ||u|| in L2 over the mesh for the analytic solution u,
/// with every integral in closed form.
double analytic_l2_error(const Mesh& mesh, const PlaneWaveBasis& basis, const BlockMatrix& mass,
                         const AnalyticSolution& u, const CoVector& x);

/// Fills rho for each row from the closest previous row with the same
/// method, preconditioner, m0, theta0 and example and a smaller omega.
void fill_rho(std::vector<CaseResult>& results);

enum class OutputFormat { CSV, JSON };
OutputFormat parse_output_format(const std::string& s);

std::string results_to_csv(const std::vector<CaseResult>& results);
nlohmann::json results_to_json(const std::vector<CaseResult>& results);
std::vector<CaseResult> results_from_json(const nlohmann::json& j);

/// Writes the results to path; throws std::runtime_error when the file
/// cannot be written.
void emit_results(const std::vector<CaseResult>& results, OutputFormat format, const std::string& path);

nlohmann::json case_to_json(const CaseConfig& c);
/// Missing keys keep their defaults.
CaseConfig case_from_json(const nlohmann::json& j);

bool operator==(const CaseConfig& a, const CaseConfig& b);
bool operator==(const CaseResult& a, const CaseResult& b);

}  // namespace helmwave
