#include "patternlab/isometry.hpp"

#include <cmath>

namespace patternlab {

namespace {

void check_dim(int dim) {
    if (dim != 2 && dim != 3) throw std::invalid_argument("Isometry: dim must be 2 or 3");
}

void check_same_dim(const Isometry& a, const Isometry& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("Isometry: dimension mismatch");
}

} // namespace

Isometry::Isometry() : Isometry(2, Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero()) {}

Isometry::Isometry(int dim, const Eigen::Matrix3d& r, const Eigen::Vector3d& v)
    : dim_(dim), r_(r), v_(v) {}

Isometry Isometry::identity(int dim) {
    check_dim(dim);
    return {dim, Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero()};
}

Isometry Isometry::translation(const Eigen::VectorXd& v) {
    const int dim = static_cast<int>(v.size());
    check_dim(dim);
    Eigen::Vector3d t = Eigen::Vector3d::Zero();
    t.head(dim) = v;
    return {dim, Eigen::Matrix3d::Identity(), t};
}

Isometry Isometry::rotation2d(double angle) {
    Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
    const double c = std::cos(angle), s = std::sin(angle);
    r(0, 0) = c;
    r(0, 1) = -s;
    r(1, 0) = s;
    r(1, 1) = c;
    return {2, r, Eigen::Vector3d::Zero()};
}

Isometry Isometry::reflection2d(double axis_angle) {
    // Reflection across the line through the origin at angle `axis_angle`.
    Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
    const double c = std::cos(2 * axis_angle), s = std::sin(2 * axis_angle);
    r(0, 0) = c;
    r(0, 1) = s;
    r(1, 0) = s;
    r(1, 1) = -c;
    return {2, r, Eigen::Vector3d::Zero()};
}

Isometry Isometry::rotation3d(const Eigen::Vector3d& axis, double angle) {
    const double n = axis.norm();
    if (n == 0.0) throw std::invalid_argument("rotation3d: zero axis");
    Eigen::Matrix3d r = Eigen::AngleAxisd(angle, axis / n).toRotationMatrix();
    return {3, r, Eigen::Vector3d::Zero()};
}

Isometry Isometry::from_parts(const Eigen::MatrixXd& r, const Eigen::VectorXd& v,
                              double max_drift) {
    const int dim = static_cast<int>(v.size());
    check_dim(dim);
    if (r.rows() != dim || r.cols() != dim)
        throw std::invalid_argument("Isometry: rotation block size mismatch");
    Eigen::Matrix3d r3 = Eigen::Matrix3d::Identity();
    r3.topLeftCorner(dim, dim) = r;
    Eigen::Vector3d v3 = Eigen::Vector3d::Zero();
    v3.head(dim) = v;

    const double drift = (r3 * r3.transpose() - Eigen::Matrix3d::Identity())
                             .cwiseAbs()
                             .maxCoeff();
    if (drift > max_drift)
        throw std::invalid_argument("Isometry: rotation block is not orthogonal");
    if (drift > kOrthoTol) r3 = project_orthogonal(r3);
    if (std::abs(std::abs(r3.determinant()) - 1.0) > kDetTol)
        throw std::invalid_argument("Isometry: determinant not in {+1, -1}");
    return {dim, r3, v3};
}

double Isometry::det_sector() const { return r_.determinant() < 0.0 ? -1.0 : 1.0; }

double Isometry::orthogonality_drift() const {
    return (r_ * r_.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
}

bool Isometry::is_identity(double tol) const {
    return distance_to_identity(*this) <= tol;
}

Eigen::Matrix3d project_orthogonal(const Eigen::Matrix3d& m) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().transpose();
}

Isometry compose(const Isometry& a, const Isometry& b) {
    check_same_dim(a, b);
    Eigen::Matrix3d r = a.r_ * b.r_;
    Eigen::Vector3d v = a.v_ + a.r_ * b.v_;
    Isometry out(a.dim_, r, v);
    if (out.orthogonality_drift() > kOrthoTol) out.r_ = project_orthogonal(out.r_);
    return out;
}

Isometry inverse(const Isometry& a) {
    Eigen::Matrix3d rinv = a.r_.transpose();
    Isometry out(a.dim_, rinv, -(rinv * a.v_));
    if (out.orthogonality_drift() > kOrthoTol) out.r_ = project_orthogonal(out.r_);
    return out;
}

Eigen::VectorXd act_on_point(const Isometry& a, const Eigen::VectorXd& p) {
    if (static_cast<int>(p.size()) != a.dim())
        throw std::invalid_argument("act_on_point: dimension mismatch");
    return a.rotation() * p + a.translation_part();
}

Isometry right_translate(const Isometry& g, const Isometry& x) {
    return compose(x, inverse(g));
}

double group_distance(const Isometry& a, const Isometry& b, const GroupMetricParams& params) {
    check_same_dim(a, b);
    const double dt = (a.trans3() - b.trans3()).norm();
    const double dr = (a.rot3() - b.rot3()).norm(); // Frobenius = Hilbert-Schmidt
    return params.translation_weight * dt + params.rotation_weight * dr;
}

double distance_to_identity(const Isometry& a, const GroupMetricParams& params) {
    return group_distance(a, Isometry::identity(a.dim()), params);
}

bool approx_equal(const Isometry& a, const Isometry& b, double tol) {
    return a.dim() == b.dim() && group_distance(a, b) <= tol;
}

void to_json(nlohmann::json& j, const Isometry& a) {
    const int d = a.dim();
    nlohmann::json rows = nlohmann::json::array();
    const Eigen::MatrixXd r = a.rotation();
    for (int i = 0; i < d; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int k = 0; k < d; ++k) row.push_back(r(i, k));
        rows.push_back(row);
    }
    nlohmann::json v = nlohmann::json::array();
    const Eigen::VectorXd t = a.translation_part();
    for (int i = 0; i < d; ++i) v.push_back(t(i));
    j = nlohmann::json{{"dim", d}, {"v", v}, {"r", rows}};
}

void from_json(const nlohmann::json& j, Isometry& a) {
    const int d = j.at("dim").get<int>();
    check_dim(d);
    const auto& jv = j.at("v");
    const auto& jr = j.at("r");
    if (static_cast<int>(jv.size()) != d || static_cast<int>(jr.size()) != d)
        throw std::invalid_argument("Isometry json: size mismatch");
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v(i) = jv.at(i).get<double>();
    Eigen::MatrixXd r(d, d);
    for (int i = 0; i < d; ++i) {
        if (static_cast<int>(jr.at(i).size()) != d)
            throw std::invalid_argument("Isometry json: row size mismatch");
        for (int k = 0; k < d; ++k) r(i, k) = jr.at(i).at(k).get<double>();
    }
    a = Isometry::from_parts(r, v, kJsonOrthoTol);
}

} // namespace patternlab
