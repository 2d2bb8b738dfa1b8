#pragma once

#include <functional>
#include <variant>
#include <vector>

#include "helmwave/basis.hpp"
#include "helmwave/block_matrix.hpp"
#include "helmwave/mesh.hpp"

namespace helmwave {

enum class Method { PWLS, PWDG };

const char* to_string(Method m);

/// Weights of the discrete forms. PWLS uses alpha (value jumps) and beta
/// (normal-flux jumps); PWDG uses alpha, beta and delta.
struct FormParams {
    Method method = Method::PWLS;
    double alpha = 0.0;
    double beta = 1.0;
    double delta = 0.5;
    /// Each interface enters the least-squares functional once per incident
    /// element (the sum runs over ordered pairs j != k).
    double interface_weight = 2.0;
    /// Gauss points per boundary edge for boundary data without a closed form.
    int quadrature_points = 20;

    static FormParams pwls(double omega) { return {Method::PWLS, omega * omega, 1.0, 0.0, 2.0, 20}; }
    static FormParams pwdg() { return {Method::PWDG, 0.5, 0.5, 0.5, 1.0, 20}; }
};

/// amplitude * exp(i*omega*direction.x) with |direction| = 1.
struct PlaneWave {
    Complex amplitude;
    Point2 direction;
};

/// Robin data g on the boundary, either the exact trace (d_n + i*omega)u
/// of a superposition of plane waves (integrated in closed form) or an
/// arbitrary function of position (integrated by Gauss-Legendre).
class BoundaryData {
public:
    using Function = std::function<Complex(Point2)>;

    static BoundaryData trace_of(std::vector<PlaneWave> waves);
    static BoundaryData global_plane_wave(const PlaneWaveBasis& basis, int l);
    static BoundaryData from_function(Function g);

    bool has_closed_form() const { return std::holds_alternative<std::vector<PlaneWave>>(source_); }
    const std::vector<PlaneWave>& waves() const;

    Complex value(Point2 x, Point2 normal, double omega) const;

    /// Integral over the face of g * conj(exp(i*omega*d.x)).
    Complex moment(const Face& face, Point2 d, double omega, int quadrature_points) const;

    /// Integral of |g|^2 over the whole boundary.
    double boundary_norm_squared(const Mesh& mesh, double omega, int quadrature_points) const;

private:
    explicit BoundaryData(std::variant<std::vector<PlaneWave>, Function> s) : source_(std::move(s)) {}
    std::variant<std::vector<PlaneWave>, Function> source_;
};

struct Assembled {
    BlockMatrix matrix;
    CoVector load;
};

/// Block pattern of the face-coupled stiffness matrices: each element with
/// itself and its edge neighbors.
std::vector<std::vector<int>> face_pattern(const Mesh& mesh);

Assembled assemble_pwls(const Mesh& mesh, const PlaneWaveBasis& basis, const FormParams& params,
                        const BoundaryData& g);
Assembled assemble_pwdg(const Mesh& mesh, const PlaneWaveBasis& basis, const FormParams& params,
                        const BoundaryData& g);
/// Dispatches on params.method.
Assembled assemble(const Mesh& mesh, const PlaneWaveBasis& basis, const FormParams& params,
                   const BoundaryData& g);

/// Block-diagonal L2 Gram matrix of the plane-wave space.
BlockMatrix assemble_mass(const Mesh& mesh, const PlaneWaveBasis& basis);

/// The least-squares functional evaluated directly by face quadrature.
double evaluate_functional_J(const Mesh& mesh, const PlaneWaveBasis& basis, const FormParams& params,
                             const BoundaryData& g, const CoVector& x);

/// Value and outward normal derivative of the plane-wave function with
/// coefficients x on element k at point pt.
std::pair<Complex, Complex> trace_on_element(const PlaneWaveBasis& basis, const CoVector& x, int k,
                                             Point2 pt, Point2 normal);

}  // namespace helmwave
