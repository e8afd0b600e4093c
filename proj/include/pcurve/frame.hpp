#pragma once

#include <Eigen/Dense>

namespace pcurve {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// |sin(zeta_k)| below this value (k <= d-2) makes the angle chart singular.
inline constexpr double kSingularSine = 1e-6;

// Tangent direction in R^d encoded by d-1 spherical angles. The first d-2
// angles live in [0, pi]; the last one is periodic and normalized to
// [0, 2 pi) by `normalized`. Dynamics code keeps the raw (unwrapped) values.
struct SphericalAngles {
  Vector angles;

  SphericalAngles() = default;
  explicit SphericalAngles(Vector values) : angles(std::move(values)) {}

  int dim() const { return static_cast<int>(angles.size()) + 1; }

  // Checks the range invariants and wraps the last angle.
  static SphericalAngles normalized(const Vector& values);
};

// Orthonormal moving frame {T, N_1, ..., N_{d-1}} stored column-wise.
class Frame {
 public:
  Frame() = default;
  explicit Frame(Matrix columns);

  int dim() const { return static_cast<int>(columns_.rows()); }
  Vector tangent() const { return columns_.col(0); }
  Vector normal(int i) const { return columns_.col(i + 1); }
  // d x (d-1) block [N_1 ... N_{d-1}].
  Matrix normals() const { return columns_.rightCols(dim() - 1); }
  const Matrix& columns() const { return columns_; }

  // Largest deviation of columns^T columns from the identity.
  double orthonormality_error() const;

 private:
  Matrix columns_;
};

// Coordinates of T' in the normal frame, kappa_i = <T', N_i>.
struct Curvatures {
  Vector kappa;

  double total() const { return kappa.norm(); }
};

Vector tangent_from_angles(const SphericalAngles& z);

// Normalized partial derivatives of the tangent, N_i = T_{zeta_i} / |T_{zeta_i}|.
// Throws SingularAngles when some sin(zeta_k), k <= d-2, is below kSingularSine.
Frame frame_from_angles(const SphericalAngles& z);

// Same frame without the singularity check. The normalized recursion
// N_1 = (-sin z1, cos z1 T(xi)), N_k = (0, N_{k-1}(xi)) stays orthonormal on
// the singular set, so this is what traces use to express curvatures.
Frame normalized_frame(const SphericalAngles& z);

// (|T_{zeta_1}|, ..., |T_{zeta_{d-1}}|) = (1, sin z1, sin z1 sin z2, ...),
// the diagonal of D(s).
Vector tangent_partial_norms(const SphericalAngles& z);

// Inverse of tangent_from_angles. Trailing angles are 0 once the remaining
// components vanish.
SphericalAngles angles_from_tangent(const Vector& t);

Curvatures principal_curvatures(const Vector& t_prime, const Frame& f);

// Reassembles T' = sum kappa_i N_i.
Vector curvature_vector(const Curvatures& k, const Frame& f);

// One classical RK4 step of the Bishop system with frozen curvatures,
// followed by modified Gram-Schmidt starting at T.
Frame bishop_propagate(const Frame& f, const Curvatures& kappa, double ds);

// Modified Gram-Schmidt on the columns, in order.
Matrix gram_schmidt(const Matrix& columns);

// Proper rotation Q with Q * t = e_d (t unit). Used to move a tangent away
// from the singular set of the angle chart.
Matrix rotation_to_last_axis(const Vector& t);

bool is_angle_singular(const SphericalAngles& z, double threshold);

}  // namespace pcurve
