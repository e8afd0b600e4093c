#include "pcurve/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "pcurve/error.hpp"

namespace pcurve {

namespace {

constexpr double kPi = std::numbers::pi;

// Derivative of the packed state y = (x, zeta) plus T' for bookkeeping.
struct Derivative {
  Vector dy;
  Vector accel;
};

using Field = std::function<Derivative(const Vector&)>;

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

std::string reason_for(ErrorCode code) {
  if (code == ErrorCode::OutOfDomain || code == ErrorCode::EmptySection) return "boundary";
  return std::string(to_string(code));
}

Vector pack(const Vector& x, const Vector& zeta) {
  Vector y(x.size() + zeta.size());
  y << x, zeta;
  return y;
}

Field general_field(const Domain& working, int d) {
  return [working, d](const Vector& y) {
    const CurveState st{0.0, y.head(d), SphericalAngles(y.tail(d - 1))};
    const RhsValue r = rhs_general(working, st);
    const Frame f = normalized_frame(st.angles);
    return Derivative{pack(r.dposition, r.dangles), curvature_vector(r.kappa, f)};
  };
}

Derivative quadrant_derivative(const Vector& y) {
  const CurveState st{0.0, y.head(2), SphericalAngles(y.tail(1))};
  const Eigen::Vector3d r = rhs_quadrant(st);
  const double z = y[2];
  Vector accel(2);
  accel << -std::sin(z) * r[2], std::cos(z) * r[2];
  return Derivative{Vector(r), accel};
}

// Evaluates the field; a point sitting on the boundary is nudged along the
// tangent into the interior, where the section is non-degenerate.
Derivative evaluate(const Field& f, const Vector& y, int d, long& evals) {
  ++evals;
  try {
    return f(y);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptySection && e.code() != ErrorCode::OutOfDomain) throw;
    const SphericalAngles z(y.tail(d - 1));
    const Vector t = tangent_from_angles(z);
    const double eps = 1e-9 * (1.0 + y.head(d).norm());
    for (const double sign : {1.0, -1.0}) {
      Vector probe = y;
      probe.head(d) += sign * eps * t;
      try {
        ++evals;
        return f(probe);
      } catch (const Error&) {
      }
    }
    throw;
  }
}

}  // namespace

void validate_config(const SolverConfig& cfg) {
  if (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "solver tolerances must be positive");
  }
  if (!(cfg.max_length > 0.0)) throw Error(ErrorCode::InvalidArgument, "max_length must be positive");
  if (!(cfg.initial_step > 0.0) || !(cfg.max_step > 0.0) || !(cfg.min_step > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "step sizes must be positive");
  }
  if (!(cfg.singularity_threshold > kSingularSine && cfg.singularity_threshold < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "singularity threshold must lie in (1e-6, 1)");
  }
}

RhsValue rhs_general(const Domain& dom, const CurveState& state) {
  const int d = dom.dim();
  if (state.position.size() != d || state.angles.dim() != d) {
    throw Error(ErrorCode::DimensionMismatch, "state dimension differs from domain");
  }
  const Frame f = frame_from_angles(state.angles);
  const CrossSection section = cross_section(dom, state.position, f);
  const MomentSet m = section_moments(section);
  RhsValue out;
  out.kappa = gram_solve(m);
  out.dposition = f.tangent();
  out.dangles = out.kappa.kappa.cwiseQuotient(tangent_partial_norms(state.angles));
  return out;
}

Eigen::Vector3d rhs_quadrant(const CurveState& state) {
  if (state.position.size() != 2 || state.angles.angles.size() != 1) {
    throw Error(ErrorCode::DimensionMismatch, "quadrant state is (x1, x2, zeta)");
  }
  const double x1 = state.position[0];
  const double x2 = state.position[1];
  const double z = state.angles.angles[0];
  if (!(x1 > 0.0) || !(x2 >= 0.0) || !(z > 0.0 && z <= kPi / 2 + 1e-12)) {
    throw Error(ErrorCode::OutOfDomain, "quadrant state left x1 > 0, x2 >= 0, 0 < zeta <= pi/2");
  }
  Eigen::Vector3d out(std::cos(z), std::sin(z), 0.0);
  if (std::abs(x2) < 1e-10 && std::abs(z - kPi / 2) < 1e-8) {
    // Boundary limit: x2 / cos(zeta) -> -1 / zeta'(0); the self-consistent
    // root keeping the curve in the quadrant is zeta'(0) = -1 / (2 x1).
    out[2] = -0.5 / x1;
    return out;
  }
  const double up = x1 / std::sin(z);
  const double um = -x2 / std::cos(z);
  out[2] = 1.5 * (up + um) / (up * up + up * um + um * um);
  return out;
}

Curvatures curvature_from_stats(const TransverseStats& stats) {
  const Matrix a = stats.cov + stats.mean * stats.mean.transpose();
  return Curvatures{a.ldlt().solve(stats.mean)};
}

CurveTrace integrate(const Domain& dom, const CurveState& init, const SolverConfig& cfg) {
  validate_config(cfg);
  const int d = dom.dim();
  if (init.position.size() != d || init.angles.dim() != d) {
    throw Error(ErrorCode::DimensionMismatch, "initial state dimension differs from domain");
  }
  if (!contains(dom, init.position, 1e-9 * (1.0 + init.position.norm()))) {
    throw Error(ErrorCode::InadmissibleStart, "initial point is outside the domain", init.s);
  }
  const bool quadrant = std::holds_alternative<Quadrant2D>(dom.shape());

  CurveTrace trace;
  // World -> working rotation and the matching field.
  Matrix q = Matrix::Identity(d, d);
  Field field;
  Vector y;
  auto set_scene = [&](const Matrix& rotation, const Vector& x_world, const Vector& t_world,
                       double s) {
    q = rotation;
    const Vector t = q * t_world;
    y = pack(q * x_world, angles_from_tangent(t.normalized()).angles);
    if (quadrant) {
      field = quadrant_derivative;
    } else {
      field = general_field(dom.rotated(q), d);
    }
    trace.restarts.push_back(Restart{s, q});
  };

  const Vector t0 = tangent_from_angles(init.angles);
  if (quadrant) {
    q = dom.rotation().transpose();
    y = pack(q * init.position, init.angles.angles);
    if (!dom.rotation().isIdentity(0.0)) {
      y.tail(1) = angles_from_tangent(q * t0).angles;
      trace.restarts.push_back(Restart{init.s, q});
    }
    field = quadrant_derivative;
  } else {
    y = pack(init.position, init.angles.angles);
    field = general_field(dom, d);
    if (is_angle_singular(init.angles, cfg.singularity_threshold)) {
      set_scene(rotation_to_last_axis(t0), init.position, t0, init.s);
    }
  }

  SolverStats& stats = trace.meta;
  Derivative k1;
  try {
    k1 = evaluate(field, y, d, stats.rhs_evals);
  } catch (const Error& e) {
    throw Error(ErrorCode::InadmissibleStart,
                std::string("cross-section at the start failed: ") + e.what(), init.s);
  }

  auto record = [&](double s, const Vector& yy, const Vector& accel_working) {
    const Matrix qt = q.transpose();
    const Vector x = qt * yy.head(d);
    const Vector t = qt * tangent_from_angles(SphericalAngles(yy.tail(d - 1)));
    const SphericalAngles* hint = trace.states.empty() ? nullptr : &trace.states.back().angles;
    CurveState st{s, x, unwrapped_angles(t, hint)};
    if (trace.states.empty()) {
      // Keep the caller's angle representative where it encodes the same tangent.
      if ((tangent_from_angles(init.angles) - t.normalized()).norm() < 1e-12) st.angles = init.angles;
    }
    const Frame f = normalized_frame(st.angles);
    const Vector accel = qt * accel_working;
    trace.append(st, principal_curvatures(accel - accel.dot(f.tangent()) * f.tangent(), f));
  };
  record(init.s, y, k1.accel);

  const double s_end = init.s + cfg.max_length;
  double s = init.s;
  double h = std::min({cfg.initial_step, cfg.max_step, cfg.max_length});
  double err_old = 1e-4;
  constexpr double safe = 0.9, beta = 0.04, expo1 = 0.2 - beta * 0.75;
  constexpr double facc1 = 1.0 / 0.2, facc2 = 1.0 / 10.0;

  while (s < s_end) {
    if (stats.accepted + stats.rejected >= cfg.max_steps) {
      stats.stop_reason = "max_steps";
      stats.stop_message = "step budget exhausted";
      break;
    }
    bool last = false;
    if (s + h >= s_end - 1e-14 * (1.0 + std::abs(s_end))) {
      h = s_end - s;
      last = true;
    }
    Vector y_new;
    Derivative k7;
    Vector err_vec;
    try {
      const Vector& f1 = k1.dy;
      const Vector f2 = evaluate(field, y + h * (a21 * f1), d, stats.rhs_evals).dy;
      const Vector f3 = evaluate(field, y + h * (a31 * f1 + a32 * f2), d, stats.rhs_evals).dy;
      const Vector f4 =
          evaluate(field, y + h * (a41 * f1 + a42 * f2 + a43 * f3), d, stats.rhs_evals).dy;
      const Vector f5 = evaluate(field, y + h * (a51 * f1 + a52 * f2 + a53 * f3 + a54 * f4), d,
                                 stats.rhs_evals)
                            .dy;
      const Vector f6 = evaluate(field,
                                 y + h * (a61 * f1 + a62 * f2 + a63 * f3 + a64 * f4 + a65 * f5), d,
                                 stats.rhs_evals)
                            .dy;
      y_new = y + h * (a71 * f1 + a73 * f3 + a74 * f4 + a75 * f5 + a76 * f6);
      k7 = evaluate(field, y_new, d, stats.rhs_evals);
      err_vec = h * (e1 * f1 + e3 * f3 + e4 * f4 + e5 * f5 + e6 * f6 + e7 * k7.dy);
    } catch (const Error& e) {
      // A stage left the admissible region: shrink and retry, so the stop is
      // located to within min_step.
      ++stats.rejected;
      h *= 0.5;
      if (h < cfg.min_step) {
        stats.stop_reason = reason_for(e.code());
        stats.stop_message = e.what();
        if (stats.stop_reason == "boundary" && !cfg.stop_on_boundary) {
          stats.stop_reason = "OutOfDomain";
        }
        break;
      }
      continue;
    }
    double err = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double sk = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      err += (err_vec[i] / sk) * (err_vec[i] / sk);
    }
    err = std::sqrt(err / static_cast<double>(y.size()));
    const double fac11 = std::pow(err, expo1);
    if (!(err <= 1.0)) {
      ++stats.rejected;
      h /= std::min(facc1, fac11 / safe);
      if (h < cfg.min_step) {
        stats.stop_reason = std::string(to_string(ErrorCode::StepSizeUnderflow));
        stats.stop_message = "step size fell below min_step";
        break;
      }
      continue;
    }
    ++stats.accepted;
    double fac = fac11 / std::pow(err_old, beta);
    fac = std::max(facc2, std::min(facc1, fac / safe));
    err_old = std::max(err, 1e-4);
    s = last ? s_end : s + h;
    y = y_new;
    k1 = k7;
    record(s, y, k1.accel);
    h = std::min(h / fac, cfg.max_step);

    if (!quadrant && d >= 3 && !last) {
      const SphericalAngles z(y.tail(d - 1));
      if (is_angle_singular(z, cfg.singularity_threshold)) {
        const Matrix qt = q.transpose();
        const Vector x_world = qt * y.head(d);
        const Vector t_world = qt * tangent_from_angles(z);
        set_scene(rotation_to_last_axis(t_world), x_world, t_world, s);
        try {
          k1 = evaluate(field, y, d, stats.rhs_evals);
        } catch (const Error& e) {
          stats.stop_reason = reason_for(e.code());
          stats.stop_message = e.what();
          break;
        }
      }
    }
  }
  stats.stop_s = s;
  return trace;
}

std::pair<CurveTrace, Domain> rotate_scene(const CurveTrace& trace, const Domain& dom,
                                           const Matrix& rotation) {
  const int d = dom.dim();
  if (rotation.rows() != d || rotation.cols() != d) {
    throw Error(ErrorCode::DimensionMismatch, "rotation size differs from domain");
  }
  if ((rotation.transpose() * rotation - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error(ErrorCode::NonOrthogonalRotation, "scene rotation is not orthogonal");
  }
  CurveTrace out;
  out.meta = trace.meta;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const Vector t = rotation * trace.tangent(k);
    const Vector a = rotation * trace.accel(k);
    const SphericalAngles* hint = out.states.empty() ? nullptr : &out.states.back().angles;
    CurveState st{trace.states[k].s, rotation * trace.states[k].position, unwrapped_angles(t, hint)};
    const Frame f = normalized_frame(st.angles);
    out.append(st, principal_curvatures(a - a.dot(f.tangent()) * f.tangent(), f));
  }
  for (const Restart& r : trace.restarts) {
    out.restarts.push_back(Restart{r.s, r.rotation * rotation.transpose()});
  }
  return {std::move(out), dom.rotated(rotation)};
}

}  // namespace pcurve
