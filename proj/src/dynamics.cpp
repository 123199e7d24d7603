#include "patternlab/dynamics.hpp"

#include "patternlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace patternlab {

namespace {

std::vector<bool> interior_mask(const Pattern& p, double spatial_range) {
    std::vector<bool> mask(p.points.size(), false);
    for (std::size_t i = 0; i < p.points.size(); ++i) {
        const Isometry q = compose(p.points[i], inverse(p.window.center));
        mask[i] = p.window.radius_translation - q.trans3().norm() >= spatial_range;
    }
    return mask;
}

void enforce_hermitian(DynamicalMatrix& d, const AssembleOptions& options) {
    const double scale = std::max(1.0, d.matrix.cwiseAbs().maxCoeff());
    const double dev = (d.matrix - d.matrix.adjoint()).cwiseAbs().maxCoeff();
    if (dev > options.hermiticity_tol * scale) {
        if (!options.symmetrize) throw NonHermitianKernel(dev);
        d.symmetrized = true;
    }
    d.matrix = ((d.matrix + d.matrix.adjoint()) / 2.0).eval();
}

} // namespace

DynamicalMatrix assemble(const CouplingKernel& k, const Pattern& p,
                         const AssembleOptions& options) {
    DynamicalMatrix d;
    d.pattern = p;
    d.n_dof = k.n_dof;
    d.coupling_range = k.coupling_range;
    d.interior = interior_mask(p, k.coupling_range);
    const int n = k.n_dof;
    const std::size_t sites = p.points.size();
    d.matrix = ComplexMatrix::Zero(n * sites, n * sites);
    for (std::size_t i = 0; i < sites; ++i) {
        const Pattern row_frame = translate_pattern(p.points[i], p);
        const Isometry xi_inv = inverse(p.points[i]);
        for (std::size_t j = 0; j < sites; ++j) {
            const Isometry q = compose(p.points[j], xi_inv);
            if (distance_to_identity(q, k.metric) > k.coupling_range + kGroupEqTol) continue;
            d.matrix.block(n * i, n * j, n, n) = k.evaluate(q, row_frame);
        }
    }
    enforce_hermitian(d, options);
    return d;
}

DynamicalMatrix assemble_from_couplings(const CouplingMatrixSet& w, const SeedResonator& seed) {
    const Eigen::MatrixXd mhalf = matrix_inverse_sqrt(seed.mass);
    DynamicalMatrix d;
    d.pattern = w.pattern;
    d.n_dof = w.n_dof;
    d.coupling_range = w.coupling_range;
    d.interior = interior_mask(w.pattern, w.coupling_range);
    const int n = w.n_dof;
    const std::size_t sites = w.pattern.points.size();
    d.matrix = ComplexMatrix::Zero(n * sites, n * sites);
    for (const auto& [key, block] : w.blocks)
        d.matrix.block(n * key.first, n * key.second, n, n) =
            (mhalf * block * mhalf).cast<std::complex<double>>();
    enforce_hermitian(d, AssembleOptions{});
    return d;
}

DynamicalMatrix represent(const CouplingKernel& k, const Pattern& p) {
    if (!p.index_of_identity())
        throw std::invalid_argument("represent: pattern does not contain the identity");
    DynamicalMatrix d;
    d.pattern = p;
    d.n_dof = k.n_dof;
    d.coupling_range = k.coupling_range;
    d.interior = interior_mask(p, k.coupling_range);
    d.matrix = left_regular_matrix(k, p);
    return d;
}

SpectrumResult spectrum(const DynamicalMatrix& d, bool want_eigenvectors) {
    SpectrumResult out;
    if (d.rows() == 0) return out;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(
        d.matrix, want_eigenvectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
    out.eigenvalues = solver.eigenvalues();
    if (want_eigenvectors) {
        out.eigenvectors = solver.eigenvectors();
        const double scale = std::max(1.0, d.matrix.cwiseAbs().maxCoeff());
        double worst = 0.0;
        for (Eigen::Index i = 0; i < out.eigenvalues.size(); ++i) {
            const Eigen::VectorXcd v = out.eigenvectors->col(i);
            worst = std::max(worst,
                             (d.matrix * v - out.eigenvalues(i) * v).norm() / scale);
        }
        out.max_residual = worst;
    }
    return out;
}

std::vector<std::pair<Eigen::Index, int>> degeneracy_groups(const SpectrumResult& s,
                                                            double tol) {
    std::vector<std::pair<Eigen::Index, int>> groups;
    for (Eigen::Index i = 0; i < s.eigenvalues.size();) {
        Eigen::Index j = i + 1;
        while (j < s.eigenvalues.size() && s.eigenvalues(j) - s.eigenvalues(j - 1) <= tol) ++j;
        groups.emplace_back(i, static_cast<int>(j - i));
        i = j;
    }
    return groups;
}

SpectrumResult interior_spectrum(const DynamicalMatrix& d, double min_weight) {
    const SpectrumResult full = spectrum(d, true);
    SpectrumResult out;
    out.interior_filtered = true;
    out.max_residual = full.max_residual;
    std::vector<double> kept;
    const int n = d.n_dof;
    for (Eigen::Index col = 0; col < full.eigenvalues.size(); ++col) {
        const Eigen::VectorXcd v = full.eigenvectors->col(col);
        double interior_mass = 0.0;
        for (std::size_t site = 0; site < d.interior.size(); ++site)
            if (d.interior[site]) interior_mass += v.segment(n * site, n).squaredNorm();
        if (interior_mass >= min_weight) kept.push_back(full.eigenvalues(col));
    }
    out.eigenvalues = Eigen::Map<Eigen::VectorXd>(kept.data(), kept.size());
    return out;
}

ResponseResult respond(const DynamicalMatrix& d, const SeedResonator& seed,
                       const Eigen::VectorXcd& drive, double omega, double resonance_tol) {
    if (drive.size() != d.rows()) throw std::invalid_argument("respond: drive size mismatch");
    const double omega2 = omega * omega;
    const SpectrumResult s = spectrum(d, false);
    double nearest = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i)
        nearest = std::min(nearest, std::abs(s.eigenvalues(i) - omega2));
    if (nearest < resonance_tol) throw Resonant(nearest);

    const Eigen::MatrixXd mhalf = matrix_inverse_sqrt(seed.mass);
    const int n = d.n_dof;
    Eigen::VectorXcd rhs(drive.size());
    for (std::size_t site = 0; site * n < static_cast<std::size_t>(drive.size()); ++site)
        rhs.segment(n * site, n) = mhalf.cast<std::complex<double>>() * drive.segment(n * site, n);

    ComplexMatrix shifted = d.matrix;
    shifted.diagonal().array() -= omega2;
    ResponseResult out;
    out.xi = Eigen::PartialPivLU<ComplexMatrix>(shifted).solve(rhs);
    out.residual = (shifted * out.xi - rhs).norm() / std::max(1e-300, rhs.norm());
    return out;
}

BandProjection band_projection(const SpectrumResult& s, double a, double b,
                               double boundary_tol) {
    if (!s.eigenvectors) throw std::invalid_argument("band_projection needs eigenvectors");
    if (!(a < b)) throw std::invalid_argument("band_projection: empty interval");
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
        const double lambda = s.eigenvalues(i);
        if (std::abs(lambda - a) <= boundary_tol || std::abs(lambda - b) <= boundary_tol)
            throw GapViolation(lambda);
    }
    BandProjection out;
    out.gap_lo = a;
    out.gap_hi = b;
    const Eigen::Index dim = s.eigenvectors->rows();
    out.projector = ComplexMatrix::Zero(dim, dim);
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
        const double lambda = s.eigenvalues(i);
        if (lambda > a && lambda < b) {
            const Eigen::VectorXcd v = s.eigenvectors->col(i);
            out.projector += v * v.adjoint();
            ++out.rank;
        }
    }
    return out;
}

SweepResult sweep(const SweepSpec& spec) {
    if (spec.values.empty()) throw std::invalid_argument("sweep: empty grid");
    if (!spec.build) throw std::invalid_argument("sweep: missing factory");

    struct PointOutcome {
        std::vector<SweepRow> rows;
        std::string error;
    };
    std::vector<PointOutcome> outcomes(spec.values.size());
    parallel_for(spec.values.size(), spec.workers, [&](std::size_t i) {
        const double param = spec.values[i];
        try {
            const DynamicalMatrix d = spec.build(param);
            const SpectrumResult s = spectrum(d, false);
            outcomes[i].rows.reserve(s.eigenvalues.size());
            for (Eigen::Index k = 0; k < s.eigenvalues.size(); ++k)
                outcomes[i].rows.push_back({param, k, s.eigenvalues(k)});
        } catch (const std::exception& e) {
            outcomes[i].error = e.what();
        }
    });

    SweepResult out;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (!outcomes[i].error.empty())
            out.failures.emplace_back(spec.values[i], outcomes[i].error);
        out.rows.insert(out.rows.end(), outcomes[i].rows.begin(), outcomes[i].rows.end());
    }
    return out;
}

} // namespace patternlab
