#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <stdexcept>

namespace patternlab {

// Tolerances shared across the group layer.
inline constexpr double kOrthoTol = 1e-12;    // r r^T = I drift before re-projection
inline constexpr double kDetTol = 1e-9;       // |det r| - 1
inline constexpr double kGroupEqTol = 1e-9;   // element equality under group_distance
inline constexpr double kJsonOrthoTol = 1e-6; // accepted drift on deserialization

struct GroupMetricParams {
    double translation_weight = 1.0;
    double rotation_weight = 1.0;
};

/// Element (v, r) of Iso(E^d) = R^d x O(d), d = 2 or 3.
///
/// Stored uniformly as a 3x3 orthogonal matrix and a 3-vector; for d = 2 the
/// third row/column is the identity and the third vector entry is zero. This
/// keeps one code path for proper and improper elements in both dimensions.
/// Composition: (v1, r1)(v2, r2) = (v1 + r1 v2, r1 r2).
class Isometry {
  public:
    /// Neutral element of Iso(E^2); use identity(dim) for explicit dimension.
    Isometry();

    /// Neutral element (0, I_d).
    static Isometry identity(int dim);

    /// Pure translation by a d-vector.
    static Isometry translation(const Eigen::VectorXd& v);

    /// Proper rotation by angle about the origin (d = 2).
    static Isometry rotation2d(double angle);

    /// Reflection across the line at `axis_angle` through the origin (d = 2).
    static Isometry reflection2d(double axis_angle);

    /// Proper rotation about `axis` by `angle` (d = 3).
    static Isometry rotation3d(const Eigen::Vector3d& axis, double angle);

    /// General constructor from a d x d orthogonal matrix and a d-vector.
    /// Re-orthonormalizes when the drift is below `max_drift`, throws beyond.
    static Isometry from_parts(const Eigen::MatrixXd& r, const Eigen::VectorXd& v,
                               double max_drift = kOrthoTol * 1e3);

    int dim() const { return dim_; }
    Eigen::MatrixXd rotation() const { return r_.topLeftCorner(dim_, dim_); }
    Eigen::VectorXd translation_part() const { return v_.head(dim_); }
    double det_sector() const; // +1 or -1

    const Eigen::Matrix3d& rot3() const { return r_; }
    const Eigen::Vector3d& trans3() const { return v_; }

    double orthogonality_drift() const; // || r r^T - I ||_inf

    bool is_identity(double tol = kGroupEqTol) const;

  private:
    Isometry(int dim, const Eigen::Matrix3d& r, const Eigen::Vector3d& v);

    int dim_;
    Eigen::Matrix3d r_;
    Eigen::Vector3d v_;

    friend Isometry compose(const Isometry&, const Isometry&);
    friend Isometry inverse(const Isometry&);
};

/// (v1, r1)(v2, r2) = (v1 + r1 v2, r1 r2); re-orthonormalizes on drift.
Isometry compose(const Isometry& a, const Isometry& b);

/// (v, r)^{-1} = (-r^{-1} v, r^{-1}).
Isometry inverse(const Isometry& a);

/// Point action g.p = r p + v.
Eigen::VectorXd act_on_point(const Isometry& a, const Eigen::VectorXd& p);

/// Right action of the group on itself: g.x := x g^{-1}.
Isometry right_translate(const Isometry& g, const Isometry& x);

/// Weighted metric w_t ||v1 - v2|| + w_r ||r1 - r2||_HS.
/// Left-invariant and inversion-invariant; proper on each dimension sector.
double group_distance(const Isometry& a, const Isometry& b,
                      const GroupMetricParams& params = {});

/// Distance to the neutral element.
double distance_to_identity(const Isometry& a, const GroupMetricParams& params = {});

bool approx_equal(const Isometry& a, const Isometry& b, double tol = kGroupEqTol);

/// Nearest orthogonal matrix in Frobenius norm (polar projection).
Eigen::Matrix3d project_orthogonal(const Eigen::Matrix3d& m);

void to_json(nlohmann::json& j, const Isometry& a);
void from_json(const nlohmann::json& j, Isometry& a);

} // namespace patternlab
