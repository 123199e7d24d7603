#include "patternlab/algebra.hpp"

#include <algorithm>
#include <cmath>

namespace patternlab {

namespace {

bool is_zero(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff() == 0.0; }

void check_dof(const CouplingKernel& a, const CouplingKernel& b) {
    if (a.n_dof != b.n_dof) throw std::invalid_argument("kernel dof mismatch");
}

} // namespace

void TabulatedKernel::close_hermitian() {
    std::vector<bool> done(entries.size(), false);
    const std::size_t n = entries.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (done[i]) continue;
        const Isometry ginv = inverse(entries[i].first);
        if (group_distance(entries[i].first, ginv, metric) <= match_tolerance) {
            entries[i].second = ((entries[i].second + entries[i].second.adjoint()) / 2.0).eval();
            done[i] = true;
            continue;
        }
        bool paired = false;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (done[j]) continue;
            if (group_distance(entries[j].first, ginv, metric) <= match_tolerance) {
                entries[i].second =
                    ((entries[i].second + entries[j].second.adjoint()) / 2.0).eval();
                entries[j].second = entries[i].second.adjoint();
                done[i] = done[j] = true;
                paired = true;
                break;
            }
        }
        if (!paired) {
            entries.emplace_back(ginv, entries[i].second.adjoint());
            done[i] = true;
        }
    }
}

CouplingKernel TabulatedKernel::kernel() const {
    CouplingKernel k;
    k.n_dof = n_dof;
    k.coupling_range = coupling_range;
    k.metric = metric;
    const auto table = entries;
    const auto tol = match_tolerance;
    const auto metric_copy = metric;
    const int dof = n_dof;
    k.evaluate = [table, tol, metric_copy, dof](const Isometry& g, const Pattern&) {
        double best = tol;
        const ComplexMatrix* hit = nullptr;
        for (const auto& [gi, mi] : table) {
            const double d = group_distance(g, gi, metric_copy);
            if (d <= best) {
                best = d;
                hit = &mi;
            }
        }
        if (hit) return *hit;
        return ComplexMatrix(ComplexMatrix::Zero(dof, dof));
    };
    return k;
}

CouplingKernel delta_kernel(int n_dof) {
    CouplingKernel k;
    k.n_dof = n_dof;
    k.coupling_range = kGroupEqTol;
    k.evaluate = [n_dof](const Isometry& g, const Pattern&) {
        if (g.is_identity()) return ComplexMatrix(ComplexMatrix::Identity(n_dof, n_dof));
        return ComplexMatrix(ComplexMatrix::Zero(n_dof, n_dof));
    };
    return k;
}

CouplingKernel scale_kernel(std::complex<double> c, const CouplingKernel& f) {
    CouplingKernel k = f;
    const auto inner = f.evaluate;
    k.evaluate = [c, inner](const Isometry& g, const Pattern& L) {
        return ComplexMatrix(c * inner(g, L));
    };
    return k;
}

CouplingKernel convolve(const CouplingKernel& f1, const CouplingKernel& f2) {
    check_dof(f1, f2);
    CouplingKernel out;
    out.n_dof = f1.n_dof;
    out.coupling_range = f1.coupling_range + f2.coupling_range;
    out.metric = f1.metric;
    const CouplingKernel a = f1, b = f2;
    out.evaluate = [a, b](const Isometry& g, const Pattern& L) {
        ComplexMatrix acc = ComplexMatrix::Zero(a.n_dof, a.n_dof);
        for (const auto& gp : L.points) {
            // f2 support kills all terms beyond its range.
            if (distance_to_identity(gp, b.metric) > b.coupling_range + kGroupEqTol) continue;
            const ComplexMatrix m2 = b.evaluate(gp, L);
            if (is_zero(m2)) continue;
            const ComplexMatrix m1 =
                a.evaluate(compose(g, inverse(gp)), translate_pattern(gp, L));
            if (is_zero(m1)) continue;
            acc += m1 * m2;
        }
        return acc;
    };
    return out;
}

CouplingKernel star(const CouplingKernel& f) {
    CouplingKernel out = f;
    const CouplingKernel inner = f;
    out.evaluate = [inner](const Isometry& g, const Pattern& L) {
        return ComplexMatrix(
            inner.evaluate(inverse(g), translate_pattern(g, L)).adjoint());
    };
    return out;
}

ComplexMatrix restriction(const CouplingKernel& f, const Pattern& L) {
    if (!L.index_of_identity())
        throw std::invalid_argument("restriction: pattern does not contain the identity");
    return f.evaluate(Isometry::identity(L.dim), L);
}

ComplexMatrix inner_product(const CouplingKernel& f1, const CouplingKernel& f2,
                            const Pattern& L) {
    check_dof(f1, f2);
    if (!L.index_of_identity())
        throw std::invalid_argument("inner_product: pattern does not contain the identity");
    const double support = std::min(f1.coupling_range, f2.coupling_range) + kGroupEqTol;
    ComplexMatrix acc = ComplexMatrix::Zero(f1.n_dof, f1.n_dof);
    for (const auto& g : L.points) {
        if (distance_to_identity(g, f1.metric) > support) continue;
        acc += f1.evaluate(g, L).adjoint() * f2.evaluate(g, L);
    }
    return acc;
}

// The operator form pi(f)(alpha (x) |g'>) = sum_g f(g.(g', L)) alpha (x) |g>
// maps input slot g' to output slot g with coefficient f(g' g^{-1}, g.L), so
// row g carries the same expression as the dynamical-matrix block.
ComplexMatrix left_regular_matrix(const CouplingKernel& f, const Pattern& L) {
    if (!L.index_of_identity())
        throw std::invalid_argument("left_regular_matrix: pattern does not contain the identity");
    const int n = f.n_dof;
    const std::size_t sites = L.points.size();
    ComplexMatrix m = ComplexMatrix::Zero(n * sites, n * sites);
    for (std::size_t row = 0; row < sites; ++row) {
        const Pattern row_frame = translate_pattern(L.points[row], L);
        const Isometry row_inv = inverse(L.points[row]);
        for (std::size_t col = 0; col < sites; ++col) {
            const Isometry q = compose(L.points[col], row_inv);
            if (distance_to_identity(q, f.metric) > f.coupling_range + kGroupEqTol) continue;
            m.block(n * row, n * col, n, n) = f.evaluate(q, row_frame);
        }
    }
    return m;
}

double operator_norm(const ComplexMatrix& m) {
    if (m.rows() == 0) return 0.0;
    Eigen::JacobiSVD<ComplexMatrix> svd(m);
    return svd.singularValues()(0);
}

NormEstimate norm_estimate(const AlgebraElementSample& sample,
                           const std::vector<double>& window_sizes) {
    if (sample.transversal_sample.empty())
        throw std::invalid_argument("norm_estimate: empty transversal sample");
    NormEstimate out;
    std::vector<double> sizes = window_sizes;
    std::sort(sizes.begin(), sizes.end());
    for (const double w : sizes) {
        double worst = 0.0;
        for (const auto& L : sample.transversal_sample) {
            Pattern truncated = L;
            truncated.points.clear();
            for (const auto& x : L.points)
                if (x.trans3().norm() <= w) truncated.points.push_back(x);
            if (truncated.empty()) continue;
            worst = std::max(worst,
                             operator_norm(left_regular_matrix(sample.kernel, truncated)));
        }
        out.table.emplace_back(w, worst);
        out.value = worst;
    }
    return out;
}

double convolution_trusted_radius(const Pattern& L, const CouplingKernel& f1,
                                  const CouplingKernel& f2) {
    return L.window.trust_radius() - f1.coupling_range - f2.coupling_range;
}

void to_json(nlohmann::json& j, const TabulatedKernel& k) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [g, m] : k.entries) {
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index c = 0; c < m.cols(); ++c)
                row.push_back({m(r, c).real(), m(r, c).imag()});
            rows.push_back(row);
        }
        entries.push_back({{"g", g}, {"m", rows}});
    }
    j = nlohmann::json{{"n_dof", k.n_dof},
                       {"coupling_range", k.coupling_range},
                       {"match_tolerance", k.match_tolerance},
                       {"entries", entries}};
}

void from_json(const nlohmann::json& j, TabulatedKernel& k) {
    k.n_dof = j.at("n_dof").get<int>();
    k.coupling_range = j.at("coupling_range").get<double>();
    if (j.contains("match_tolerance")) k.match_tolerance = j.at("match_tolerance").get<double>();
    k.entries.clear();
    for (const auto& e : j.at("entries")) {
        const Isometry g = e.at("g").get<Isometry>();
        const auto& rows = e.at("m");
        const int n = static_cast<int>(rows.size());
        if (n != k.n_dof) throw std::invalid_argument("tabulated kernel: matrix size mismatch");
        ComplexMatrix m(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                m(r, c) = {rows.at(r).at(c).at(0).get<double>(),
                           rows.at(r).at(c).at(1).get<double>()};
        k.entries.emplace_back(g, m);
    }
}

} // namespace patternlab
