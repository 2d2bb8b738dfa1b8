#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "helmwave/harness.hpp"
#include "oracles.hpp"

using namespace helmwave;

namespace {

CaseConfig small_case(Method method, PrecondKind kind) {
    CaseConfig c;
    c.method = method;
    c.omega = 8 * kPi;
    c.k = 2;
    c.p = 6;
    c.nx = 8;
    c.ny = 8;
    c.precond.kind = kind;
    c.precond.m0 = 3;
    return c;
}

CaseResult fake_row(double omega, int n_iter) {
    CaseResult r;
    r.config.omega = omega;
    r.n_iter = n_iter;
    r.err = 1e-3;
    r.converged = true;
    return r;
}

}  // namespace

TEST_CASE("analytic solution") {
    for (auto [omega, k] : {std::pair{20 * kPi, 10}, std::pair{40 * kPi, 10}, std::pair{80 * kPi, 10}, std::pair{8 * kPi, 2}}) {
        const AnalyticSolution s = analytic_solution(omega, k);
        const double wx = std::sqrt(omega * omega - k * k * kPi * kPi);
        CHECK(s.omega_x == doctest::Approx(wx).epsilon(1e-15));
        CHECK(std::abs(wx * s.a1 - wx * s.a2 + kI) < 1e-13);
        const Complex row2 = (omega - wx) * std::exp(-2.0 * kI * wx) * s.a1 + (omega + wx) * std::exp(2.0 * kI * wx) * s.a2;
        CHECK(std::abs(row2) < 1e-13);

        // Fourth-order central differences of the Helmholtz operator.
        std::mt19937_64 rng(static_cast<unsigned>(k) + 1);
        std::uniform_real_distribution<double> ux(0.05, 1.95), uy(0.05, 0.95);
        const double h = 1e-3 / omega * 20.0;
        for (int t = 0; t < 100; ++t) {
            const Point2 x{ux(rng), uy(rng)};
            auto d2 = [&](Point2 e) {
                return (-s.value(x + 2 * h * e) + 16.0 * s.value(x + h * e) - 30.0 * s.value(x) +
                        16.0 * s.value(x - h * e) - s.value(x - 2 * h * e)) /
                       (12.0 * h * h);
            };
            const Complex res = d2({1, 0}) + d2({0, 1}) + omega * omega * s.value(x);
            CHECK(std::abs(res) < 1e-6 * omega * omega * std::max(std::abs(s.value(x)), 1.0));
        }
        for (const Point2 x : {Point2{0.3, 0.7}, Point2{1.9, 0.1}}) {
            Complex sum = 0.0;
            for (const auto& w : s.waves()) sum += w.amplitude * std::exp(kI * omega * dot(w.direction, x));
            CHECK(std::abs(sum - s.value(x)) < 1e-12 * (1 + std::abs(sum)));
        }
        for (const auto& w : s.waves()) CHECK(norm(w.direction) == doctest::Approx(1.0).epsilon(1e-15));
    }
    CHECK_THROWS_AS(analytic_solution(10 * kPi, 10), InvalidArgument);
    CHECK_THROWS_AS(analytic_solution(5.0, 10), InvalidArgument);
}

TEST_CASE("robin trace of the analytic solution") {
    const AnalyticSolution s = analytic_solution(20 * kPi, 10);
    const auto g = BoundaryData::trace_of(s.waves());
    const double w = 20 * kPi, e = 1e-5;
    const std::pair<Point2, Point2> points[] = {{{2.0, 0.37}, {1, 0}}, {{0.0, 0.61}, {-1, 0}}, {{1.3, 1.0}, {0, 1}}, {{0.4, 0.0}, {0, -1}}};
    for (const auto& [x, n] : points) {
        const Complex dn = (s.value(x + e * n) - s.value(x - e * n)) / (2 * e);
        const Complex want = dn + kI * w * s.value(x);
        CHECK(std::abs(g.value(x, n, w) - want) < 1e-6 * w);
    }
    // No reflection at x = 2.
    CHECK(std::abs(g.value({2.0, 0.37}, {1, 0}, w)) < 1e-10);
}

TEST_CASE("omega notation") {
    CHECK(parse_omega("20pi") == 20 * kPi);
    CHECK(parse_omega("20*pi") == 20 * kPi);
    CHECK(parse_omega("pi") == kPi);
    CHECK(parse_omega(" 2.5PI ") == 2.5 * kPi);
    CHECK(parse_omega("62.8") == 62.8);
    CHECK(format_omega(20 * kPi) == "20pi");
    CHECK(format_omega(80 * kPi) == "80pi");
    CHECK(parse_omega(format_omega(40 * kPi)) == 40 * kPi);
    CHECK(parse_omega(format_omega(7.25)) == 7.25);
    CHECK_THROWS_AS(parse_omega(""), InvalidArgument);
    CHECK_THROWS_AS(parse_omega("-3pi"), InvalidArgument);
    CHECK_THROWS_AS(parse_omega("abc"), InvalidArgument);
}

TEST_CASE("growth rate") {
    CHECK(compute_rho(38, 47, 20 * kPi, 40 * kPi) == doctest::Approx(0.3067).epsilon(1e-3));
    CHECK(compute_rho(41, 51, 20 * kPi, 40 * kPi) == doctest::Approx(0.3149).epsilon(1e-3));
    CHECK(compute_rho(30, 30, 20 * kPi, 80 * kPi) == 0.0);
    CHECK_THROWS_AS(compute_rho(0, 3, 1.0, 2.0), InvalidArgument);
    CHECK_THROWS_AS(compute_rho(3, 3, 2.0, 2.0), InvalidArgument);

    std::vector<CaseResult> rows{fake_row(20 * kPi, 41), fake_row(40 * kPi, 51)};
    fill_rho(rows);
    CHECK(!rows[0].rho);
    REQUIRE(rows[1].rho);
    CHECK(*rows[1].rho == doctest::Approx(0.3149).epsilon(1e-3));
    const std::string csv = results_to_csv(rows);
    CHECK(csv.find(",0.3149,") != std::string::npos);

    std::vector<CaseResult> one{fake_row(20 * kPi, 41)};
    fill_rho(one);
    const std::string single = results_to_csv(one);
    const auto line = single.substr(single.find('\n') + 1);
    CHECK(line.rfind("20pi,10,1024,B,1,41,,", 0) == 0);

    std::vector<CaseResult> mixed{fake_row(20 * kPi, 41), fake_row(40 * kPi, 51)};
    mixed[1].config.precond.kind = PrecondKind::M3;
    fill_rho(mixed);
    CHECK(!mixed[1].rho);
}

TEST_CASE("relative errors in the mass norm") {
    const Mesh mesh = build_uniform_mesh(0, 2, 0, 1, 3, 3);
    const PlaneWaveBasis basis(9.0, 5);
    const BlockMatrix mass = assemble_mass(mesh, basis);
    std::mt19937_64 rng(3);
    const CoVector x = oracle::random_vector(rng, mass.rows());
    CHECK(l2_error(mass, x, x) == 0.0);
    CHECK(l2_error(mass, CoVector::Zero(x.size()), x) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(l2_error(mass, 2.0 * x, x) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(l2_error(mass, x, CoVector::Zero(x.size())), InvalidArgument);
    CHECK_THROWS_AS(l2_error(mass, x.head(5), x), InvalidArgument);
}

TEST_CASE("closed-form analytic error matches quadrature") {
    const double omega = 8 * kPi;
    const Mesh mesh = build_uniform_mesh(0, 2, 0, 1, 4, 4);
    const PlaneWaveBasis basis(omega, 6);
    const BlockMatrix mass = assemble_mass(mesh, basis);
    const AnalyticSolution s = analytic_solution(omega, 2);
    std::mt19937_64 rng(21);
    const CoVector x = 0.05 * oracle::random_vector(rng, mass.rows());
    const oracle::Field f{&mesh, omega, 6, x};
    double num = 0.0, den = 0.0;
    for (int k = 0; k < mesh.num_elements(); ++k) {
        num += oracle::box_integral(mesh.element(k), [&](Point2 pt) { return std::norm(s.value(pt) - f.value(k, pt)); }, 20).real();
        den += oracle::box_integral(mesh.element(k), [&](Point2 pt) { return std::norm(s.value(pt)); }, 20).real();
    }
    CHECK(analytic_l2_error(mesh, basis, mass, s, x) == doctest::Approx(std::sqrt(num / den)).epsilon(1e-9));
}

TEST_CASE("reference solve") {
    const Mesh mesh = build_uniform_mesh(0, 2, 0, 1, 4, 4);
    const PlaneWaveBasis basis(8 * kPi, 5);
    for (auto fp : {FormParams::pwls(8 * kPi), FormParams::pwdg()}) {
        const Assembled s = assemble(mesh, basis, fp, BoundaryData::from_function([](Point2 x) { return Complex(x.x * x.y); }));
        const CoVector x = reference_solve(s.matrix, s.load);
        const CoVector dense = s.matrix.to_dense().fullPivLu().solve(s.load);
        CHECK((x - dense).norm() < 1e-10 * dense.norm());
        CHECK((s.matrix.apply(x) - s.load).norm() < 1e-10 * s.load.norm());
    }
    BlockMatrix id(2, {{0}, {1}, {2}}, Symmetry::Hermitian);
    for (int k = 0; k < 3; ++k) id.block(k, k) = DenseMatrix::Identity(2, 2);
    std::mt19937_64 rng(1);
    const CoVector b = oracle::random_vector(rng, 6);
    CHECK((reference_solve(id, b) - b).norm() == 0.0);
    CHECK_THROWS_AS(reference_solve(id, b.head(3)), InvalidArgument);
}

TEST_CASE("configuration round trip and validation") {
    CaseConfig c = small_case(Method::PWDG, PrecondKind::M1);
    c.precond.damping = 0.25;
    c.precond.weight_by_multiplicity = true;
    c.precond.hierarchy.overlap = Overlap::fraction(0.5);
    c.example = Example::XY;
    c.tol = 1e-8;
    CHECK(case_from_json(case_to_json(c)) == c);
    CHECK(case_from_json(nlohmann::json::object()) == CaseConfig{});

    auto bad = [](auto mutate) {
        CaseConfig b;
        mutate(b);
        return b;
    };
    CHECK_THROWS_AS(bad([](CaseConfig& b) { b.p = 0; }).validate(), InvalidArgument);
    CHECK_THROWS_AS(bad([](CaseConfig& b) { b.tol = 0; }).validate(), InvalidArgument);
    CHECK_THROWS_AS(bad([](CaseConfig& b) { b.nx = 0; }).validate(), InvalidArgument);
    CHECK_THROWS_AS(bad([](CaseConfig& b) { b.precond.m0 = 0; }).validate(), InvalidArgument);
    CHECK_THROWS_AS(bad([](CaseConfig& b) { b.precond.damping = -1; }).validate(), InvalidArgument);
    CHECK_NOTHROW(CaseConfig{}.validate());
    CHECK(parse_example("xy") == Example::XY);
    CHECK_THROWS_AS(parse_example("sin"), InvalidArgument);
    CHECK_THROWS_AS(parse_output_format("xml"), InvalidArgument);
}

TEST_CASE("results round trip and emission") {
    std::vector<CaseResult> rows{fake_row(20 * kPi, 41), fake_row(40 * kPi, 51)};
    rows[0].n_dof = 10240;
    rows[1].reference = "analytic";
    rows[1].setup_s = 1.25;
    fill_rho(rows);
    CHECK(results_from_json(results_to_json(rows)) == rows);

    const auto dir = std::filesystem::temp_directory_path() / "helmwave_test_harness";
    std::filesystem::create_directories(dir);
    emit_results(rows, OutputFormat::JSON, (dir / "r.json").string());
    std::ifstream in(dir / "r.json");
    CHECK(results_from_json(nlohmann::json::parse(in)) == rows);
    emit_results(rows, OutputFormat::CSV, (dir / "r.csv").string());
    std::ifstream csv(dir / "r.csv");
    const std::string text((std::istreambuf_iterator<char>(csv)), std::istreambuf_iterator<char>());
    CHECK(text == results_to_csv(rows));
    CHECK_THROWS_AS(emit_results(rows, OutputFormat::CSV, (dir / "missing" / "r.csv").string()), std::runtime_error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("end-to-end runs are deterministic") {
    for (auto [method, kind] : {std::pair{Method::PWLS, PrecondKind::M3}, std::pair{Method::PWDG, PrecondKind::B}}) {
        const CaseResult a = run_case(small_case(method, kind));
        const CaseResult b = run_case(small_case(method, kind));
        CHECK(a.converged);
        CHECK(a.n_iter == b.n_iter);
        CHECK(a.err == b.err);
        CHECK(a.err > 0.0);
        CHECK(a.final_residual < 1e-6);
        CHECK(a.n_dof == 64 * 6);
        CHECK(a.reference == "analytic");
    }
    CaseConfig xy = small_case(Method::PWLS, PrecondKind::B);
    xy.example = Example::XY;
    const CaseResult r = run_case(xy);
    CHECK(r.reference == "sparse-lu");
    CHECK(r.err < 1e-4);
    CaseConfig evanescent = small_case(Method::PWLS, PrecondKind::B);
    evanescent.k = 8;
    CHECK_THROWS_AS(run_case(evanescent), InvalidArgument);
}

TEST_CASE("iterative solution lowers the least-squares functional") {
    const double omega = 8 * kPi;
    const Mesh mesh = build_uniform_mesh(0, 2, 0, 1, 8, 8);
    const PlaneWaveBasis basis(omega, 6);
    const FormParams fp = FormParams::pwls(omega);
    const auto g = BoundaryData::trace_of(analytic_solution(omega, 2).waves());
    const Assembled s = assemble(mesh, basis, fp, g);
    PrecondConfig pc;
    pc.kind = PrecondKind::B;
    const auto m = setup_preconditioner(s.matrix, mesh, basis, pc);
    const auto [x, rep] = pcg([&](const CoVector& v) { return s.matrix.apply(v); },
                              [&](const CoVector& v) { return m->apply(v); }, s.load);
    CHECK(rep.converged);
    const double j0 = evaluate_functional_J(mesh, basis, fp, g, CoVector::Zero(x.size()));
    CHECK(evaluate_functional_J(mesh, basis, fp, g, x) < j0);
}

TEST_CASE("error falls as directions are added") {
    const double omega = 20 * kPi;
    const Mesh mesh = build_uniform_mesh(0, 2, 0, 1, 32, 32);
    const AnalyticSolution u = analytic_solution(omega, 10);
    const auto g = BoundaryData::trace_of(u.waves());
    double previous = 1.0;
    for (int p : {8, 10, 12}) {
        const PlaneWaveBasis basis(omega, p);
        const Assembled s = assemble(mesh, basis, FormParams::pwls(omega), g);
        const double err = analytic_l2_error(mesh, basis, assemble_mass(mesh, basis), u, reference_solve(s.matrix, s.load));
        MESSAGE("p = " << p << " err = " << err);
        WARN(err < previous);
        previous = err;
    }
}
