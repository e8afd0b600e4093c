#include "pcurve/frame.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pcurve/error.hpp"

namespace pcurve {

namespace {

void require_dim(const SphericalAngles& z) {
  if (z.angles.size() < 1) {
    throw Error(ErrorCode::DimensionMismatch,
                "spherical angles need at least one entry (d >= 2)");
  }
}

// Columns [T, N_1, ..., N_{n-1}] for the angle tail starting at `first`.
Matrix frame_recursive(const Vector& z, Eigen::Index first) {
  const Eigen::Index n = z.size() - first + 1;
  const double c = std::cos(z[first]);
  const double s = std::sin(z[first]);
  Matrix f = Matrix::Zero(n, n);
  if (n == 2) {
    f << c, -s,
         s, c;
    return f;
  }
  const Matrix tail = frame_recursive(z, first + 1);
  f(0, 0) = c;
  f.col(0).tail(n - 1) = s * tail.col(0);
  f(0, 1) = -s;
  f.col(1).tail(n - 1) = c * tail.col(0);
  for (Eigen::Index k = 2; k < n; ++k) {
    f.col(k).tail(n - 1) = tail.col(k - 1);
  }
  return f;
}

}  // namespace

SphericalAngles SphericalAngles::normalized(const Vector& values) {
  if (values.size() < 1) {
    throw Error(ErrorCode::DimensionMismatch,
                "spherical angles need at least one entry (d >= 2)");
  }
  constexpr double pi = std::numbers::pi;
  Vector out = values;
  for (Eigen::Index i = 0; i + 1 < out.size(); ++i) {
    if (!(out[i] >= -1e-12 && out[i] <= pi + 1e-12)) {
      throw Error(ErrorCode::InvalidArgument,
                  "polar angle outside [0, pi]");
    }
    out[i] = std::clamp(out[i], 0.0, pi);
  }
  double& last = out[out.size() - 1];
  last = std::fmod(last, 2.0 * pi);
  if (last < 0.0) last += 2.0 * pi;
  if (last >= 2.0 * pi) last = 0.0;
  return SphericalAngles(out);
}

Frame::Frame(Matrix columns) : columns_(std::move(columns)) {
  if (columns_.rows() != columns_.cols() || columns_.rows() < 2) {
    throw Error(ErrorCode::DimensionMismatch, "frame must be a square d x d matrix, d >= 2");
  }
  if (orthonormality_error() > 1e-9) {
    throw Error(ErrorCode::NonOrthogonal, "frame columns are not orthonormal");
  }
}

double Frame::orthonormality_error() const {
  const Matrix gram = columns_.transpose() * columns_;
  return (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

Vector tangent_from_angles(const SphericalAngles& z) {
  require_dim(z);
  const Eigen::Index m = z.angles.size();
  Vector t(m + 1);
  double prod = 1.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    t[i] = prod * std::cos(z.angles[i]);
    prod *= std::sin(z.angles[i]);
  }
  t[m] = prod;
  return t;
}

bool is_angle_singular(const SphericalAngles& z, double threshold) {
  for (Eigen::Index k = 0; k + 1 < z.angles.size(); ++k) {
    if (std::abs(std::sin(z.angles[k])) < threshold) return true;
  }
  return false;
}

Frame normalized_frame(const SphericalAngles& z) {
  require_dim(z);
  return Frame(frame_recursive(z.angles, 0));
}

Frame frame_from_angles(const SphericalAngles& z) {
  require_dim(z);
  if (is_angle_singular(z, kSingularSine)) {
    throw Error(ErrorCode::SingularAngles,
                "tangent partial derivative vanishes (sin(zeta_k) ~ 0)");
  }
  return normalized_frame(z);
}

Vector tangent_partial_norms(const SphericalAngles& z) {
  require_dim(z);
  const Eigen::Index m = z.angles.size();
  Vector norms(m);
  double prod = 1.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    norms[k] = prod;
    prod *= std::sin(z.angles[k]);
  }
  return norms;
}

SphericalAngles angles_from_tangent(const Vector& t) {
  const Eigen::Index d = t.size();
  if (d < 2) {
    throw Error(ErrorCode::DimensionMismatch, "tangent needs d >= 2");
  }
  const double norm = t.norm();
  if (!(norm > 1e-14)) {
    throw Error(ErrorCode::ZeroVector, "cannot take angles of a zero vector");
  }
  if (std::abs(norm - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "tangent is not a unit vector");
  }
  Vector z = Vector::Zero(d - 1);
  for (Eigen::Index k = 0; k + 2 < d; ++k) {
    const double rest = t.tail(d - k - 1).norm();
    if (rest == 0.0) {
      // Tail convention: the remaining angles stay 0.
      z[k] = t[k] < 0.0 ? std::numbers::pi : 0.0;
      return SphericalAngles(z);
    }
    z[k] = std::atan2(rest, t[k]);
  }
  double last = std::atan2(t[d - 1], t[d - 2]);
  if (last < 0.0) last += 2.0 * std::numbers::pi;
  z[d - 2] = last;
  return SphericalAngles(z);
}

Curvatures principal_curvatures(const Vector& t_prime, const Frame& f) {
  if (t_prime.size() != f.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "T' and frame dimension differ");
  }
  const double along = t_prime.dot(f.tangent());
  if (std::abs(along) > 1e-8 * std::max(1.0, t_prime.norm())) {
    throw Error(ErrorCode::NonOrthogonal, "T' has a component along T");
  }
  return Curvatures{f.normals().transpose() * t_prime};
}

Vector curvature_vector(const Curvatures& k, const Frame& f) {
  if (k.kappa.size() != f.dim() - 1) {
    throw Error(ErrorCode::DimensionMismatch, "curvature count must be d-1");
  }
  return f.normals() * k.kappa;
}

Matrix gram_schmidt(const Matrix& columns) {
  Matrix q = columns;
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
    }
    const double n = q.col(j).norm();
    if (!(n > 0.0)) {
      throw Error(ErrorCode::ZeroVector, "Gram-Schmidt hit a dependent column");
    }
    q.col(j) /= n;
  }
  return q;
}

Frame bishop_propagate(const Frame& f, const Curvatures& kappa, double ds) {
  const int d = f.dim();
  if (kappa.kappa.size() != d - 1) {
    throw Error(ErrorCode::DimensionMismatch, "curvature count must be d-1");
  }
  // F' = F A with A(i,0) = kappa_i and A(0,i) = -kappa_i.
  Matrix a = Matrix::Zero(d, d);
  for (int i = 1; i < d; ++i) {
    a(i, 0) = kappa.kappa[i - 1];
    a(0, i) = -kappa.kappa[i - 1];
  }
  const Matrix& y = f.columns();
  const Matrix k1 = y * a;
  const Matrix k2 = (y + 0.5 * ds * k1) * a;
  const Matrix k3 = (y + 0.5 * ds * k2) * a;
  const Matrix k4 = (y + ds * k3) * a;
  const Matrix next = y + ds / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  return Frame(gram_schmidt(next));
}

Matrix rotation_to_last_axis(const Vector& t) {
  const Eigen::Index d = t.size();
  Vector e = Vector::Zero(d);
  e[d - 1] = 1.0;
  const Vector v = t - e;
  const double vv = v.squaredNorm();
  if (vv < 1e-30) return Matrix::Identity(d, d);
  Matrix q = Matrix::Identity(d, d) - 2.0 * v * v.transpose() / vv;
  // Householder is a reflection; flipping the first row restores det = +1
  // without touching the image of t.
  q.row(0) *= -1.0;
  return q;
}

}  // namespace pcurve
