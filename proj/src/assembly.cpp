#include "helmwave/assembly.hpp"

#include <array>

#include "helmwave/quadrature.hpp"

namespace helmwave {

const char* to_string(Method m) { return m == Method::PWLS ? "pwls" : "pwdg"; }

BoundaryData BoundaryData::trace_of(std::vector<PlaneWave> waves) { return BoundaryData(std::move(waves)); }

BoundaryData BoundaryData::global_plane_wave(const PlaneWaveBasis& basis, int l) {
    return trace_of({PlaneWave{Complex(1.0, 0.0), basis.direction(l)}});
}

BoundaryData BoundaryData::from_function(Function g) {
    if (!g) throw InvalidArgument("boundary data: empty function");
    return BoundaryData(std::move(g));
}

const std::vector<PlaneWave>& BoundaryData::waves() const {
    if (!has_closed_form()) throw InvalidArgument("boundary data: not a plane-wave trace");
    return std::get<std::vector<PlaneWave>>(source_);
}

Complex BoundaryData::value(Point2 x, Point2 normal, double omega) const {
    if (const auto* fn = std::get_if<Function>(&source_)) return (*fn)(x);
    Complex g{};
    for (const auto& w : waves()) {
        g += w.amplitude * kI * omega * (dot(w.direction, normal) + 1.0) *
             std::exp(kI * (omega * dot(w.direction, x)));
    }
    return g;
}

Complex BoundaryData::moment(const Face& face, Point2 d, double omega, int quadrature_points) const {
    if (has_closed_form()) {
        Complex sum{};
        for (const auto& w : waves()) {
            sum += w.amplitude * kI * omega * (dot(w.direction, face.normal) + 1.0) *
                   edge_moment(face.a, face.b, w.direction - d, omega);
        }
        return sum;
    }
    const GaussRule rule = gauss_legendre(quadrature_points);
    Complex sum{};
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const Point2 x = face.midpoint + (0.5 * face.length * rule.nodes[q]) * face.tangent;
        sum += rule.weights[q] * value(x, face.normal, omega) * std::exp(-kI * (omega * dot(d, x)));
    }
    return 0.5 * face.length * sum;
}

double BoundaryData::boundary_norm_squared(const Mesh& mesh, double omega, int quadrature_points) const {
    if (has_closed_form()) {
        // |g|^2 is again a superposition of plane waves on each straight face.
        double sum = 0.0;
        for (const auto& face : mesh.boundary_faces()) {
            Complex acc{};
            for (const auto& wi : waves()) {
                const Complex ci = wi.amplitude * kI * omega * (dot(wi.direction, face.normal) + 1.0);
                for (const auto& wj : waves()) {
                    const Complex cj = wj.amplitude * kI * omega * (dot(wj.direction, face.normal) + 1.0);
                    acc += ci * std::conj(cj) * edge_moment(face.a, face.b, wi.direction - wj.direction, omega);
                }
            }
            sum += acc.real();
        }
        return sum;
    }
    const GaussRule rule = gauss_legendre(quadrature_points);
    double sum = 0.0;
    for (const auto& face : mesh.boundary_faces()) {
        double acc = 0.0;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const Point2 x = face.midpoint + (0.5 * face.length * rule.nodes[q]) * face.tangent;
            acc += rule.weights[q] * std::norm(value(x, face.normal, omega));
        }
        sum += 0.5 * face.length * acc;
    }
    return sum;
}

std::vector<std::vector<int>> face_pattern(const Mesh& mesh) {
    std::vector<std::vector<int>> pattern(static_cast<std::size_t>(mesh.num_elements()));
    for (int k = 0; k < mesh.num_elements(); ++k) {
        auto& row = pattern[static_cast<std::size_t>(k)];
        row = mesh.neighbors(k);
        row.push_back(k);
    }
    return pattern;
}

namespace {

/// E(l, m) = integral over the face of y_m * conj(y_l).
DenseMatrix face_gram(const Face& face, const PlaneWaveBasis& basis) {
    const int p = basis.p();
    DenseMatrix e(p, p);
    for (int m = 0; m < p; ++m) {
        for (int l = 0; l < p; ++l) {
            e(l, m) = edge_moment(face.a, face.b, basis.direction(m) - basis.direction(l), basis.omega());
        }
    }
    return e;
}

std::vector<double> projections(const PlaneWaveBasis& basis, Point2 n) {
    std::vector<double> out(static_cast<std::size_t>(basis.p()));
    for (int l = 0; l < basis.p(); ++l) out[static_cast<std::size_t>(l)] = dot(basis.direction(l), n);
    return out;
}

void check_sizes(const Mesh& mesh, const PlaneWaveBasis& basis) {
    if (mesh.num_elements() < 1 || basis.p() < 1) throw InvalidArgument("assembly: empty space");
}

/// Shared driver: boundary faces first, then interior faces in index order,
/// so each block receives its contributions in a fixed order.
template <class BoundaryCoef, class InteriorCoef, class LoadCoef>
Assembled assemble_faces(const Mesh& mesh, const PlaneWaveBasis& basis, const BoundaryData& g,
                         int quadrature_points, Symmetry symmetry, BoundaryCoef boundary_coef,
                         InteriorCoef interior_coef, LoadCoef load_coef) {
    check_sizes(mesh, basis);
    const int p = basis.p();
    const double omega = basis.omega();
    Assembled out{BlockMatrix(p, face_pattern(mesh), symmetry), CoVector::Zero(mesh.num_elements() * p)};

    for (const auto& face : mesh.boundary_faces()) {
        const DenseMatrix e = face_gram(face, basis);
        const auto an = projections(basis, face.normal);
        auto blk = out.matrix.block(face.owner, face.owner);
        for (int m = 0; m < p; ++m) {
            for (int l = 0; l < p; ++l) {
                blk(l, m) += boundary_coef(an[static_cast<std::size_t>(l)], an[static_cast<std::size_t>(m)]) * e(l, m);
            }
        }
        for (int l = 0; l < p; ++l) {
            out.load(face.owner * p + l) += load_coef(an[static_cast<std::size_t>(l)]) *
                                            g.moment(face, basis.direction(l), omega, quadrature_points);
        }
    }

    for (const auto& face : mesh.interior_faces()) {
        const DenseMatrix e = face_gram(face, basis);
        const std::array<int, 2> elems{face.owner, face.neighbor};
        for (int test : elems) {
            const Point2 n_test = face.normal_of(test);
            const auto a_test = projections(basis, n_test);
            for (int trial : elems) {
                const Point2 n_trial = face.normal_of(trial);
                const auto a_trial = projections(basis, n_trial);
                const double nn = dot(n_trial, n_test);
                auto blk = out.matrix.block(test, trial);
                for (int m = 0; m < p; ++m) {
                    for (int l = 0; l < p; ++l) {
                        blk(l, m) += interior_coef(a_test[static_cast<std::size_t>(l)],
                                                   a_trial[static_cast<std::size_t>(m)], nn) *
                                     e(l, m);
                    }
                }
            }
        }
    }
    return out;
}

}  // namespace

Assembled assemble_pwls(const Mesh& mesh, const PlaneWaveBasis& basis, const FormParams& params,
                        const BoundaryData& g) {
    if (params.method != Method::PWLS) throw InvalidArgument("assemble_pwls: params are not PWLS");
    const double w = basis.omega();
    const double w2 = w * w;
    const double alpha = params.alpha * params.interface_weight;
    const double beta = params.beta * params.interface_weight;
    // (d_n + i w) y_m = i w (1 + alpha_m.n) y_m on a boundary face.
    auto boundary = [w2](double al, double am) { return Complex(w2 * (1.0 + am) * (1.0 + al), 0.0); };
    // nn = n_trial.n_test is +1 on the same side and -1 across the face, which
    // is exactly the product of the jump signs.
    auto interior = [alpha, beta, w2](double al, double am, double nn) {
        return Complex(alpha * nn + beta * w2 * am * al, 0.0);
    };
    auto load = [w](double al) { return -kI * w * (1.0 + al); };
    return assemble_faces(mesh, basis, g, params.quadrature_points, Symmetry::Hermitian, boundary, interior,
                          load);
}

Assembled assemble_pwdg(const Mesh& mesh, const PlaneWaveBasis& basis, const FormParams& params,
                        const BoundaryData& g) {
    if (params.method != Method::PWDG) throw InvalidArgument("assemble_pwdg: params are not PWDG");
    const double w = basis.omega();
    const double a = params.alpha;
    const double b = params.beta;
    const double d = params.delta;
    // Terms per boundary face, trial y_m and test y_l:
    //   (1-d) u conj(grad v.n)          -> (1-d)(-i w al)
    //   -(d/(i w)) grad u.n conj(grad v.n) -> i d w am al
    //   -d grad u.n conj(v)             -> -i d w am
    //   (1-d) i w u conj(v)             -> (1-d) i w
    auto boundary = [w, d](double al, double am) {
        return kI * w * (-(1.0 - d) * al + d * am * al - d * am + (1.0 - d));
    };
    // Interior: {u}[grad v] - (b/(i w))[grad u][grad v] - {grad u}.[v] + a i w [u].[v];
    // al and am are projections on the test and trial normals, so the
    // average of grad u meets the test normal as nn * am.
    auto interior = [w, a, b](double al, double am, double nn) {
        return kI * w * (-0.5 * al + b * am * al - 0.5 * nn * am + a * nn);
    };
    auto load = [d](double al) { return Complex(d * al + 1.0 - d, 0.0); };
    return assemble_faces(mesh, basis, g, params.quadrature_points, Symmetry::General, boundary, interior, load);
}

Assembled assemble(const Mesh& mesh, const PlaneWaveBasis& basis, const FormParams& params,
                   const BoundaryData& g) {
    return params.method == Method::PWLS ? assemble_pwls(mesh, basis, params, g)
                                         : assemble_pwdg(mesh, basis, params, g);
}

BlockMatrix assemble_mass(const Mesh& mesh, const PlaneWaveBasis& basis) {
    check_sizes(mesh, basis);
    const int p = basis.p();
    std::vector<std::vector<int>> pattern(static_cast<std::size_t>(mesh.num_elements()));
    for (int k = 0; k < mesh.num_elements(); ++k) pattern[static_cast<std::size_t>(k)] = {k};
    BlockMatrix mass(p, std::move(pattern), Symmetry::Hermitian);
    for (int k = 0; k < mesh.num_elements(); ++k) {
        const Box box = mesh.element(k);
        auto blk = mass.block(k, k);
        for (int m = 0; m < p; ++m) {
            for (int l = 0; l < p; ++l) {
                blk(l, m) = area_moment(box, basis.direction(m) - basis.direction(l), basis.omega());
            }
        }
    }
    return mass;
}

std::pair<Complex, Complex> trace_on_element(const PlaneWaveBasis& basis, const CoVector& x, int k, Point2 pt,
                                             Point2 normal) {
    const int p = basis.p();
    Complex value{};
    Complex dn{};
    for (int l = 0; l < p; ++l) {
        const Complex y = x(k * p + l) * basis.eval(l, pt);
        value += y;
        dn += kI * basis.omega() * dot(basis.direction(l), normal) * y;
    }
    return {value, dn};
}

double evaluate_functional_J(const Mesh& mesh, const PlaneWaveBasis& basis, const FormParams& params,
                             const BoundaryData& g, const CoVector& x) {
    if (params.method != Method::PWLS) throw InvalidArgument("functional J is defined for PWLS only");
    const GaussRule rule = gauss_legendre(params.quadrature_points);
    const double w = basis.omega();
    double total = 0.0;
    for (const auto& face : mesh.boundary_faces()) {
        double acc = 0.0;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const Point2 pt = face.midpoint + (0.5 * face.length * rule.nodes[q]) * face.tangent;
            const auto [v, dn] = trace_on_element(basis, x, face.owner, pt, face.normal);
            acc += rule.weights[q] * std::norm(dn + kI * w * v - g.value(pt, face.normal, w));
        }
        total += 0.5 * face.length * acc;
    }
    for (const auto& face : mesh.interior_faces()) {
        double acc = 0.0;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const Point2 pt = face.midpoint + (0.5 * face.length * rule.nodes[q]) * face.tangent;
            const auto [vk, dk] = trace_on_element(basis, x, face.owner, pt, face.normal);
            const auto [vj, dj] = trace_on_element(basis, x, face.neighbor, pt, -face.normal);
            acc += rule.weights[q] * (params.alpha * std::norm(vk - vj) + params.beta * std::norm(dk + dj));
        }
        total += params.interface_weight * 0.5 * face.length * acc;
    }
    return total;
}

}  // namespace helmwave
