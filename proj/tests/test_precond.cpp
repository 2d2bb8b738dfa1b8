#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "helmwave/assembly.hpp"
#include "helmwave/precond.hpp"
#include "oracles.hpp"

using namespace helmwave;

namespace {

struct Problem {
    Mesh mesh;
    PlaneWaveBasis basis;
    Assembled sys;
};

Problem make(Method method, int n, double omega, int p) {
    Mesh mesh = build_uniform_mesh(0, 2, 0, 1, n, n);
    PlaneWaveBasis basis(omega, p);
    const FormParams fp = method == Method::PWLS ? FormParams::pwls(omega) : FormParams::pwdg();
    Assembled sys = assemble(mesh, basis, fp, BoundaryData::global_plane_wave(basis, 1));
    return {std::move(mesh), std::move(basis), std::move(sys)};
}

PrecondConfig config(PrecondKind kind, int m0 = 1) {
    PrecondConfig c;
    c.kind = kind;
    c.m0 = m0;
    return c;
}

template <class F>
DenseMatrix columns(F&& f, Eigen::Index n) {
    DenseMatrix out(n, n);
    for (Eigen::Index c = 0; c < n; ++c) out.col(c) = f(CoVector::Unit(n, c));
    return out;
}

double rel(Complex a, Complex b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace

TEST_CASE("names") {
    for (auto k : {PrecondKind::B, PrecondKind::Bs, PrecondKind::M1, PrecondKind::M2, PrecondKind::M3,
                   PrecondKind::MGJacobi, PrecondKind::MGSchwarz, PrecondKind::DDNon, PrecondKind::DDSmall,
                   PrecondKind::DDLarge, PrecondKind::BSmall, PrecondKind::BHalf}) {
        CHECK(parse_precond_kind(to_string(k)) == k);
    }
    CHECK(parse_smoother_scope("level") == SmootherScope::Level);
    CHECK(parse_smoother_scope("subdomain") == SmootherScope::Subdomain);
    CHECK_THROWS_AS(parse_precond_kind("M4"), InvalidArgument);
    CHECK_THROWS_AS(parse_smoother_scope("global"), InvalidArgument);
}

TEST_CASE("B and M2 are hermitian") {
    const Problem pb = make(Method::PWLS, 8, 20 * kPi, 10);
    const auto& a = pb.sys.matrix;
    std::mt19937_64 rng(11);
    for (auto [kind, m0] : {std::pair{PrecondKind::B, 1}, std::pair{PrecondKind::M2, 3}, std::pair{PrecondKind::Bs, 3}}) {
        const auto m = setup_preconditioner(a, pb.mesh, pb.basis, config(kind, m0));
        double worst = 0.0, worst_a = 0.0;
        for (int t = 0; t < 20; ++t) {
            const CoVector x = oracle::random_vector(rng, a.rows()), y = oracle::random_vector(rng, a.rows());
            worst = std::max(worst, rel(y.dot(m->apply(x)), std::conj(x.dot(m->apply(y)))));
            // A-inner product of M^{-1} A.
            const CoVector ax = a.apply(x), ay = a.apply(y);
            const Complex lhs = ay.dot(m->apply(ax));
            const Complex rhs = m->apply(ay).dot(ax);
            worst_a = std::max(worst_a, rel(lhs, rhs));
        }
        CHECK(worst < 1e-10);
        CHECK(worst_a < 1e-10);
    }
}

TEST_CASE("multiplicity weights keep B hermitian") {
    const Problem pb = make(Method::PWLS, 8, 8 * kPi, 6);
    PrecondConfig c = config(PrecondKind::B);
    c.weight_by_multiplicity = true;
    const auto m = setup_preconditioner(pb.sys.matrix, pb.mesh, pb.basis, c);
    std::mt19937_64 rng(3);
    for (int t = 0; t < 20; ++t) {
        const CoVector x = oracle::random_vector(rng, pb.sys.matrix.rows());
        const CoVector y = oracle::random_vector(rng, pb.sys.matrix.rows());
        CHECK(rel(y.dot(m->apply(x)), std::conj(x.dot(m->apply(y)))) < 1e-10);
    }
}

TEST_CASE("error propagation of M1 and M3 is the product of the level factors") {
    const Problem pb = make(Method::PWLS, 8, 8 * kPi, 5);
    const auto& a = pb.sys.matrix;
    const DenseMatrix ad = a.to_dense();
    const Eigen::Index n = a.rows();
    const DenseMatrix id = DenseMatrix::Identity(n, n);
    const Hierarchy h = build_hierarchy(pb.mesh);
    for (auto [kind, m0] : {std::pair{PrecondKind::M1, 1}, std::pair{PrecondKind::M1, 2}, std::pair{PrecondKind::M3, 3}}) {
        const MultilevelPreconditioner m(a, pb.mesh, pb.basis, h, config(kind, m0));
        const int J = m.J();
        REQUIRE(J == 2);
        std::vector<DenseMatrix> factor;
        for (int j = 0; j <= J + 1; ++j) {
            factor.push_back(id - columns([&](const CoVector& x) { return m.apply_level(j, x); }, n) * ad);
        }
        DenseMatrix want = factor[0];
        if (kind == PrecondKind::M1) {
            for (int j = 1; j <= J + 1; ++j) want = want * factor[static_cast<std::size_t>(j)];
        } else {
            for (int j = 1; j <= J + 1; ++j) want = want * factor[static_cast<std::size_t>(j)];
            for (int j = J; j >= 1; --j) want = want * factor[static_cast<std::size_t>(j)];
        }
        const DenseMatrix got = id - columns([&](const CoVector& x) { return m.apply(x); }, n) * ad;
        CHECK((got - want).norm() < 1e-10 * want.norm());
    }
}

TEST_CASE("fine level calls per application") {
    const Problem pb = make(Method::PWLS, 8, 8 * kPi, 4);
    const Hierarchy h = build_hierarchy(pb.mesh);
    const CoVector x = CoVector::Ones(pb.sys.matrix.rows());
    for (auto [kind, calls] : {std::pair{PrecondKind::M3, 1}, std::pair{PrecondKind::M2, 2}, std::pair{PrecondKind::M1, 1},
                               std::pair{PrecondKind::B, 1}}) {
        const MultilevelPreconditioner m(pb.sys.matrix, pb.mesh, pb.basis, h, config(kind, 3));
        m.apply(x);
        m.apply(x);
        CHECK(m.fine_calls() == static_cast<std::size_t>(2 * calls));
    }
}

TEST_CASE("M1 ends with an exact coarsest correction") {
    const Problem pb = make(Method::PWLS, 8, 8 * kPi, 4);
    const auto m = setup_preconditioner(pb.sys.matrix, pb.mesh, pb.basis, config(PrecondKind::M1));
    std::mt19937_64 rng(4);
    const CoVector xi = oracle::random_vector(rng, pb.sys.matrix.rows());
    const CoVector r = xi - pb.sys.matrix.apply(m->apply(xi));
    const Decomposition d = decomposition_operation({0, 8, 0, 8});
    const Prolongation coarse(8, 8, 4, d.cells());
    CHECK(coarse.restrict(r).norm() < 1e-10 * coarse.restrict(xi).norm());
}

TEST_CASE("linear and reproducible") {
    const Problem pb = make(Method::PWLS, 8, 8 * kPi, 4);
    std::mt19937_64 rng(6);
    const CoVector x = oracle::random_vector(rng, pb.sys.matrix.rows()), y = oracle::random_vector(rng, pb.sys.matrix.rows());
    const Complex s(0.3, -1.7);
    for (auto kind : {PrecondKind::B, PrecondKind::Bs, PrecondKind::M1, PrecondKind::M2, PrecondKind::M3,
                      PrecondKind::MGJacobi, PrecondKind::MGSchwarz, PrecondKind::DDNon, PrecondKind::DDSmall,
                      PrecondKind::DDLarge, PrecondKind::BSmall, PrecondKind::BHalf}) {
        const auto m = setup_preconditioner(pb.sys.matrix, pb.mesh, pb.basis, config(kind, 2));
        const CoVector lin = m->apply(x + s * y), want = m->apply(x) + s * m->apply(y);
        CHECK((lin - want).norm() < 1e-10 * want.norm());
        const auto again = setup_preconditioner(pb.sys.matrix, pb.mesh, pb.basis, config(kind, 2));
        CHECK(again->apply(x) == m->apply(x));
    }
}

TEST_CASE("fine smoother is block Jacobi over the elements") {
    const Problem pb = make(Method::PWLS, 8, 8 * kPi, 4);
    const auto& a = pb.sys.matrix;
    const DenseMatrix ad = a.to_dense();
    const Hierarchy h = build_hierarchy(pb.mesh);
    for (int m0 : {1, 3}) {
        const MultilevelPreconditioner m(a, pb.mesh, pb.basis, h, config(PrecondKind::Bs, m0));
        const DenseMatrix got = columns([&](const CoVector& x) { return m.apply_level(m.J() + 1, x); }, a.rows());
        CHECK((got - block_jacobi_operator(ad, 4, m0)).norm() < 1e-10 * got.norm());
        for (const auto& s : m.stats()) {
            if (s.name == "coarsest") continue;
            CHECK(s.max_factor_dim == 4);
        }
    }
}

TEST_CASE("coarse smoother corrects each distinct cell with the coverage damping") {
    const Problem pb = make(Method::PWLS, 8, 8 * kPi, 4);
    const auto& a = pb.sys.matrix;
    const DenseMatrix ad = a.to_dense();
    const Hierarchy h = build_hierarchy(pb.mesh);
    const MultilevelPreconditioner m(a, pb.mesh, pb.basis, h, config(PrecondKind::Bs, 1));
    std::set<IndexRect> cells;
    for (const auto& d : h.sets[0]) {
        for (const auto& c : decomposition_operation(d).cells()) cells.insert(c);
    }
    std::vector<int> cover(64, 0);
    for (const auto& c : cells) {
        for (int j = c.j0; j < c.j1; ++j) {
            for (int i = c.i0; i < c.i1; ++i) ++cover[static_cast<std::size_t>(j * 8 + i)];
        }
    }
    const double damping = 1.0 / *std::max_element(cover.begin(), cover.end());
    DenseMatrix want = DenseMatrix::Zero(a.rows(), a.rows());
    for (const auto& c : cells) {
        const Prolongation pr(8, 8, 4, {c});
        DenseMatrix pm = DenseMatrix::Zero(a.rows(), 4);
        for (int l = 0; l < 4; ++l) pm.col(l) = pr.prolong(CoVector::Unit(4, l));
        want += damping * pm * (pm.adjoint() * ad * pm).inverse() * pm.adjoint();
    }
    const DenseMatrix got = columns([&](const CoVector& x) { return m.apply_level(1, x); }, a.rows());
    CHECK((got - want).norm() < 1e-10 * want.norm());

    PrecondConfig fixed = config(PrecondKind::Bs, 1);
    fixed.damping = 0.5;
    const MultilevelPreconditioner mf(a, pb.mesh, pb.basis, h, fixed);
    const DenseMatrix got_f = columns([&](const CoVector& x) { return mf.apply_level(1, x); }, a.rows());
    CHECK((got_f - (0.5 / damping) * want).norm() < 1e-10 * want.norm());
}

TEST_CASE("preconditioner structure") {
    const Problem pb = make(Method::PWLS, 8, 8 * kPi, 3);
    const auto& a = pb.sys.matrix;
    const MultigridPreconditioner mg(a, pb.mesh, pb.basis, config(PrecondKind::MGJacobi));
    REQUIRE(mg.partitions().size() == 2);
    CHECK(mg.partitions()[0].first == std::vector<int>{0, 2, 4, 6, 8});
    CHECK(mg.partitions()[1].first.size() == 9);
    CHECK(mg.stats().size() == 2);

    const OneLevelDD non(a, pb.mesh, pb.basis, config(PrecondKind::DDNon));
    const OneLevelDD large(a, pb.mesh, pb.basis, config(PrecondKind::DDLarge));
    CHECK(non.stats()[1].members == 16);
    CHECK(non.stats()[1].max_local_dim == 4 * 3);
    CHECK(large.stats()[1].max_local_dim == 36 * 3);
    CHECK(non.stats()[0].max_local_dim == 16 * 3);

    // Without overlap the subdomain part is the inverse of the block diagonal.
    const Decomposition d = decomposition_operation({0, 8, 0, 8});
    const DenseMatrix ad = a.to_dense();
    DenseMatrix want = DenseMatrix::Zero(a.rows(), a.rows());
    for (const auto& c : d.cells()) {
        std::vector<IndexRect> elements;
        element_cells()(c, elements);
        const Prolongation pr(8, 8, 3, elements);
        DenseMatrix pm(a.rows(), pr.dim());
        for (int t = 0; t < pr.dim(); ++t) pm.col(t) = pr.prolong(CoVector::Unit(pr.dim(), t));
        want += pm * (pm.adjoint() * ad * pm).inverse() * pm.adjoint();
    }
    const Prolongation pc(8, 8, 3, d.cells());
    DenseMatrix pcm(a.rows(), pc.dim());
    for (int t = 0; t < pc.dim(); ++t) pcm.col(t) = pc.prolong(CoVector::Unit(pc.dim(), t));
    want += pcm * (pcm.adjoint() * ad * pcm).inverse() * pcm.adjoint();
    const DenseMatrix got = columns([&](const CoVector& x) { return non.apply(x); }, a.rows());
    CHECK((got - want).norm() < 1e-10 * want.norm());

    const auto bs = hierarchy_options_for(config(PrecondKind::BSmall));
    CHECK(bs.overlap.mode == Overlap::Mode::OneElement);
    CHECK(hierarchy_options_for(config(PrecondKind::BHalf)).overlap.theta == 0.5);
    CHECK(hierarchy_options_for(config(PrecondKind::B)).overlap.theta == 1.0);
}

TEST_CASE("invalid configurations") {
    const Problem dg = make(Method::PWDG, 8, 8 * kPi, 3);
    CHECK_THROWS_AS(setup_preconditioner(dg.sys.matrix, dg.mesh, dg.basis, config(PrecondKind::M2)), InvalidArgument);
    CHECK_THROWS_AS(setup_preconditioner(dg.sys.matrix, dg.mesh, dg.basis, config(PrecondKind::M3)), InvalidArgument);
    CHECK_NOTHROW(setup_preconditioner(dg.sys.matrix, dg.mesh, dg.basis, config(PrecondKind::B)));
    const Problem pb = make(Method::PWLS, 8, 8 * kPi, 3);
    CHECK_THROWS_AS(setup_preconditioner(pb.sys.matrix, pb.mesh, pb.basis, config(PrecondKind::Bs, 0)), InvalidArgument);
    const Hierarchy other = build_hierarchy(16, 16);
    CHECK_THROWS_AS(MultilevelPreconditioner(pb.sys.matrix, pb.mesh, pb.basis, other, config(PrecondKind::B)),
                    InvalidArgument);
    const auto m = setup_preconditioner(pb.sys.matrix, pb.mesh, pb.basis, config(PrecondKind::B));
    CHECK_THROWS_AS(m->apply(CoVector::Zero(5)), InvalidArgument);
    const Mesh tiny = build_uniform_mesh(0, 2, 0, 1, 2, 2);
    const Assembled t = assemble(tiny, pb.basis, FormParams::pwls(8 * kPi), BoundaryData::global_plane_wave(pb.basis, 0));
    CHECK_THROWS_AS(setup_preconditioner(t.matrix, tiny, pb.basis, config(PrecondKind::DDNon)), InvalidArgument);
}
