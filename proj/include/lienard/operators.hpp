#pragma once

// Operators of the fixed-point formulation for
//
//   (φ(x^Δ(t)))^Δ + h(x(t)) x^Δ(t) + g(x(t - r)) = p(t),   t ∈ 𝕋,
//
// on a mesh of one period: the Nemytskii operator N_f, the projectors P, Q,
// the integrator H and the homotopy operator
//
//   M(λ, x) = P(x) + Q(N_f(x)) + H(φ⁻¹[λ H(w) - Q_φ(λ H(w))]),
//   w = N_f(x) - Q(N_f(x)).
//
// All integrals use Quadrature::forward_sum so that H is the exact inverse of
// delta_derivative and periodicity is preserved to rounding.

#include <cstddef>
#include <functional>
#include <vector>

#include "lienard/phi.hpp"
#include "lienard/timescale.hpp"

namespace lienard {

using ScalarFunction = std::function<double(double)>;

/// Data (𝕋, T, r, φ, h, g, p) of the periodic problem.
class Problem {
 public:
  /// Re-centers p to mean zero (the removed constant is forcing_offset()),
  /// reduces r mod T and resolves the delay on the mesh. Throws ConfigError
  /// when r is incompatible with the mesh or p is not finite.
  Problem(MeshPtr mesh, PhiHomeomorphism phi, ScalarFunction h, ScalarFunction g,
          const GridFunction& p, double delay = 0.0);

  const MeshPtr& mesh_ptr() const { return mesh_; }
  const Mesh& mesh() const { return *mesh_; }
  double period() const { return mesh_->period(); }
  const PhiHomeomorphism& phi() const { return phi_; }
  const ScalarFunction& h() const { return h_; }
  const ScalarFunction& g() const { return g_; }
  const GridFunction& p() const { return p_; }
  double delay() const { return delay_; }
  const std::vector<std::size_t>& delay_map() const { return delay_map_; }
  double forcing_offset() const { return forcing_offset_; }

 private:
  MeshPtr mesh_;
  PhiHomeomorphism phi_;
  ScalarFunction h_;
  ScalarFunction g_;
  GridFunction p_;
  double delay_;
  std::vector<std::size_t> delay_map_;
  double forcing_offset_ = 0.0;
};

/// N_f(x)(t) = -h(x(t)) x^Δ(t) - g(x(t - r)) + p(t).
GridFunction nemytskii(const Problem& pb, const GridFunction& x, const GridFunction& xd);

/// Q(z) = (1/T) ∫_0^T z Δs.
double projector_Q(const GridFunction& z, Quadrature rule = Quadrature::forward_sum);

/// P(x) = x(0).
double projector_P(const GridFunction& x);

/// H(z)(t) = ∫_0^t z Δs at the nodes. Throws PreconditionError if
/// |Q(z)| > mean_tol * max(1, ‖z‖∞).
GridFunction integrator_H(const GridFunction& z, Quadrature rule = Quadrature::forward_sum,
                          double mean_tol = 1e-9);

/// Bookkeeping shared by every evaluation of M within one solve.
struct ApplyMStats {
  std::size_t evaluations = 0;
  /// Iterates with ‖y^Δ‖∞ >= a. Must stay zero.
  std::size_t bound_violations = 0;
  /// max over iterates of ‖y^Δ‖∞ / a.
  double max_derivative_ratio = 0.0;
};

struct MResult {
  GridFunction y;        ///< M(λ, x)
  GridFunction y_delta;  ///< φ⁻¹[λH(w) - Q_φ(λH(w))]
  double qnf = 0.0;      ///< Q(N_f(x))
  double qphi = 0.0;     ///< Q_φ(λH(w))
};

/// Evaluates M(λ, x). `stats`, when given, records the a-priori bound check
/// on y^Δ.
MResult apply_m(const Problem& pb, double lambda, const GridFunction& x, const GridFunction& xd,
                ApplyMStats* stats = nullptr);
/// Same, with xd = delta_derivative(x).
MResult apply_m(const Problem& pb, double lambda, const GridFunction& x,
                ApplyMStats* stats = nullptr);

/// ‖x‖₁ = sup |x| + sup |x^Δ|.
double c1_norm(const GridFunction& x);

/// sup over nodes of |(φ(x^Δ))^Δ - N_f(x)|. Throws DomainError naming the
/// node if |x^Δ| >= a somewhere.
double equation_residual(const Problem& pb, const GridFunction& x);

}  // namespace lienard
