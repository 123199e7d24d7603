#include "patternlab/coupling.hpp"

#include "patternlab/parallel.hpp"
#include "patternlab/rng.hpp"
#include "patternlab/transversal.hpp"

#include <cmath>
#include <limits>
#include <mutex>
#include <optional>

namespace patternlab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kDipoleSingularity = 1e-9;

// HS diameter of O(d); pads spatial cutoffs into group-metric support radii.
double rotation_slack(int dim, const GroupMetricParams& m = {}) {
    return m.rotation_weight * 2.0 * std::sqrt(static_cast<double>(dim));
}

Eigen::Vector3d pseudo_rotate(const Eigen::Matrix3d& r, const Eigen::Vector3d& m) {
    return r.determinant() * (r * m);
}

double point_dipole_term(const Eigen::Vector3d& p1, const Eigen::Vector3d& m1,
                         const Eigen::Vector3d& p2, const Eigen::Vector3d& m2) {
    const Eigen::Vector3d r = p2 - p1;
    const double dist = r.norm();
    if (dist < kDipoleSingularity) throw std::domain_error("coincident dipole positions");
    const Eigen::Vector3d rhat = r / dist;
    return (m1.dot(m2) - 3.0 * m1.dot(rhat) * m2.dot(rhat)) / (dist * dist * dist);
}

double spatial_quotient_distance(const Isometry& a, const Isometry& b) {
    return compose(b, inverse(a)).trans3().norm();
}

struct PairList {
    std::vector<std::pair<std::size_t, std::size_t>> pairs; // i < j, within range
    double nearest_neighbor = std::numeric_limits<double>::infinity();
};

PairList build_pairs(const Pattern& p, double spatial_range) {
    PairList out;
    for (std::size_t i = 0; i < p.points.size(); ++i) {
        for (std::size_t j = i + 1; j < p.points.size(); ++j) {
            const double d = spatial_quotient_distance(p.points[i], p.points[j]);
            out.nearest_neighbor = std::min(out.nearest_neighbor, d);
            if (d <= spatial_range) out.pairs.emplace_back(i, j);
        }
    }
    return out;
}

// Central-difference block derivatives of one pair energy in its 2N local
// displacement variables.
class PairStencil {
  public:
    PairStencil(const PairPotential& pot, const Isometry& x, const Isometry& xp, int n_dof,
                double h)
        : pot_(pot), x_(x), xp_(xp), n_(n_dof), h_(h) {}

    double energy(const Eigen::VectorXd& u) const {
        return pot_.energy(x_, xp_, u.head(n_), u.tail(n_));
    }

    Eigen::VectorXd gradient(const Eigen::VectorXd& u) const {
        Eigen::VectorXd g(2 * n_);
        Eigen::VectorXd e = u;
        for (int k = 0; k < 2 * n_; ++k) {
            e(k) = u(k) + h_;
            const double ep = energy(e);
            e(k) = u(k) - h_;
            const double em = energy(e);
            e(k) = u(k);
            g(k) = (ep - em) / (2.0 * h_);
        }
        return g;
    }

    Eigen::MatrixXd hessian(const Eigen::VectorXd& u) const {
        const int m = 2 * n_;
        Eigen::MatrixXd hess(m, m);
        const double e0 = energy(u);
        Eigen::VectorXd e = u;
        for (int k = 0; k < m; ++k) {
            e(k) = u(k) + h_;
            const double ep = energy(e);
            e(k) = u(k) - h_;
            const double em = energy(e);
            e(k) = u(k);
            hess(k, k) = (ep - 2.0 * e0 + em) / (h_ * h_);
        }
        for (int k = 0; k < m; ++k) {
            for (int l = k + 1; l < m; ++l) {
                e(k) = u(k) + h_;
                e(l) = u(l) + h_;
                const double epp = energy(e);
                e(l) = u(l) - h_;
                const double epm = energy(e);
                e(k) = u(k) - h_;
                const double emm = energy(e);
                e(l) = u(l) + h_;
                const double emp = energy(e);
                e(k) = u(k);
                e(l) = u(l);
                hess(k, l) = hess(l, k) = (epp - epm - emp + emm) / (4.0 * h_ * h_);
            }
        }
        return hess;
    }

  private:
    const PairPotential& pot_;
    Isometry x_, xp_;
    int n_;
    double h_;
};

} // namespace

int SeedResonator::n_dof() const {
    if (active_dofs.empty()) return chart_size();
    int count = 0;
    for (const bool b : active_dofs) count += b ? 1 : 0;
    return count;
}

void SeedResonator::validate() const {
    if (dim != 2 && dim != 3) throw std::invalid_argument("seed resonator: dim must be 2 or 3");
    if (!active_dofs.empty() && static_cast<int>(active_dofs.size()) != chart_size())
        throw std::invalid_argument("seed resonator: chart mask size mismatch");
    const int n = n_dof();
    if (n == 0) throw std::invalid_argument("seed resonator: all dofs frozen");
    auto check_spd = [n](const Eigen::MatrixXd& m, const char* name) {
        if (m.rows() != n || m.cols() != n)
            throw std::invalid_argument(std::string(name) + ": size mismatch");
        if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10)
            throw std::invalid_argument(std::string(name) + ": not symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
        if (es.eigenvalues().minCoeff() <= 0.0)
            throw std::invalid_argument(std::string(name) + ": not positive definite");
    };
    check_spd(mass, "mass matrix");
    check_spd(stiffness, "onsite stiffness");
}

Isometry seed_displacement(const SeedResonator& seed, const Eigen::VectorXd& q) {
    const int chart = seed.chart_size();
    Eigen::VectorXd full = Eigen::VectorXd::Zero(chart);
    if (seed.active_dofs.empty()) {
        full = q;
    } else {
        int slot = 0;
        for (int k = 0; k < chart; ++k)
            if (seed.active_dofs[k]) full(k) = q(slot++);
    }
    if (seed.dim == 2) {
        const Isometry t = Isometry::translation(Eigen::Vector2d{full(0), full(1)});
        return compose(t, Isometry::rotation2d(full(2)));
    }
    const Isometry t = Isometry::translation(Eigen::Vector3d{full(0), full(1), full(2)});
    const Eigen::Vector3d w{full(3), full(4), full(5)};
    const double angle = w.norm();
    if (angle == 0.0) return t;
    return compose(t, Isometry::rotation3d(w / angle, angle));
}

Isometry displaced_frame(const SeedResonator& seed, const Isometry& x, const Eigen::VectorXd& q) {
    return compose(inverse(x), seed_displacement(seed, q));
}

DipolePotential::DipolePotential(const SeedResonator& seed, double coupling_range,
                                 double strength)
    : seed_(seed), range_(coupling_range), strength_(strength) {
    if (seed_.dipoles.empty())
        throw std::invalid_argument("dipole potential: seed carries no dipoles");
}

double DipolePotential::energy(const Isometry& x, const Isometry& xp, const Eigen::VectorXd& q,
                               const Eigen::VectorXd& qp) const {
    if (spatial_quotient_distance(x, xp) > range_) return 0.0;
    const Isometry fa = displaced_frame(seed_, x, q);
    const Isometry fb = displaced_frame(seed_, xp, qp);
    const Isometry rel = compose(inverse(fa), fb); // partner placement seen from the seed frame
    double e = 0.0;
    for (const auto& da : seed_.dipoles) {
        for (const auto& db : seed_.dipoles) {
            const Eigen::Vector3d pb = rel.rot3() * db.offset + rel.trans3();
            const Eigen::Vector3d mb = pseudo_rotate(rel.rot3(), db.moment);
            e += point_dipole_term(da.offset, da.moment, pb, mb);
        }
    }
    return strength_ * e;
}

BrokenDipolePotential::BrokenDipolePotential(const SeedResonator& seed, double coupling_range,
                                             double strength, double field_strength,
                                             const Eigen::Vector3d& field_wavevector)
    : base_(seed, coupling_range, strength),
      seed_(seed),
      field_strength_(field_strength),
      field_wavevector_(field_wavevector) {}

double BrokenDipolePotential::energy(const Isometry& x, const Isometry& xp,
                                     const Eigen::VectorXd& q, const Eigen::VectorXd& qp) const {
    // Lab-frame field sampled at the absolute site positions; this is exactly
    // the kind of term that spoils Galilean equivariance.
    const auto site_term = [&](const Isometry& site, const Eigen::VectorXd& disp) {
        const Isometry frame = displaced_frame(seed_, site, disp);
        const double phase = field_wavevector_.dot(frame.trans3());
        return field_strength_ * std::sin(phase) * disp.squaredNorm();
    };
    return base_.energy(x, xp, q, qp) + site_term(x, q) + site_term(xp, qp);
}

TabulatedPairPotential::TabulatedPairPotential(
    int n_dof, double coupling_range, double match_tolerance,
    std::vector<std::pair<Isometry, Eigen::MatrixXd>> entries)
    : n_dof_(n_dof),
      range_(coupling_range),
      match_tolerance_(match_tolerance),
      entries_(std::move(entries)) {
    for (const auto& [g, k] : entries_)
        if (k.rows() != 2 * n_dof_ || k.cols() != 2 * n_dof_)
            throw std::invalid_argument("tabulated pair potential: block must be 2N x 2N");
}

double TabulatedPairPotential::energy(const Isometry& x, const Isometry& xp,
                                      const Eigen::VectorXd& q, const Eigen::VectorXd& qp) const {
    if (spatial_quotient_distance(x, xp) > range_) return 0.0;
    const Isometry rel = compose(xp, inverse(x));
    double best = match_tolerance_;
    const Eigen::MatrixXd* hit = nullptr;
    for (const auto& [g, k] : entries_) {
        const double d = group_distance(rel, g);
        if (d <= best) {
            best = d;
            hit = &k;
        }
    }
    if (!hit) return 0.0;
    Eigen::VectorXd u(2 * n_dof_);
    u.head(n_dof_) = q;
    u.tail(n_dof_) = qp;
    return 0.5 * u.dot(*hit * u);
}

double dipole_pair_energy(const SeedResonator& seed, const Isometry& x, const Isometry& xp,
                          const Eigen::VectorXd& q, const Eigen::VectorXd& qp, double strength) {
    if (approx_equal(x, xp)) throw std::invalid_argument("dipole pair: sites must be distinct");
    const DipolePotential pot(seed, std::numeric_limits<double>::infinity(), strength);
    return pot.energy(x, xp, q, qp);
}

namespace {

struct Workspace {
    PairList pairs;
    double h = 1e-4;
    double trust = std::numeric_limits<double>::infinity();
    int n = 0;
    int workers = 1;
};

Workspace make_workspace(const Pattern& p, const SeedResonator& seed, const PairPotential& pot,
                         const EquilibriumOptions& opts) {
    Workspace ws;
    ws.n = seed.n_dof();
    ws.pairs = build_pairs(p, pot.range());
    const double char_len =
        std::isfinite(ws.pairs.nearest_neighbor) ? ws.pairs.nearest_neighbor : 1.0;
    ws.h = opts.fd_step_factor * char_len;
    ws.trust = opts.trust_radius_factor * char_len;
    ws.workers = opts.workers;
    return ws;
}

// Per-pair stencil results land in preassigned slots, so the parallel run
// merges deterministically.
template <typename Local>
std::vector<Local> map_pairs(const Workspace& ws,
                             const std::function<Local(std::size_t, std::size_t)>& fn) {
    std::vector<Local> slots(ws.pairs.pairs.size());
    parallel_for(ws.pairs.pairs.size(), ws.workers, [&](std::size_t idx) {
        const auto& [i, j] = ws.pairs.pairs[idx];
        slots[idx] = fn(i, j);
    });
    return slots;
}

double total_energy(const Pattern& p, const SeedResonator& seed, const PairPotential& pot,
                    const Workspace& ws, const Eigen::VectorXd& q) {
    const int n = ws.n;
    double e = 0.0;
    for (std::size_t i = 0; i < p.points.size(); ++i) {
        const auto qi = q.segment(n * i, n);
        e += 0.5 * qi.dot(seed.stiffness * qi);
    }
    for (const auto& [i, j] : ws.pairs.pairs)
        e += pot.energy(p.points[i], p.points[j], q.segment(n * i, n), q.segment(n * j, n));
    return e;
}

void accumulate_pair_gradient(const Pattern& p, const PairPotential& pot, const Workspace& ws,
                              const Eigen::VectorXd& q, Eigen::VectorXd& grad) {
    const int n = ws.n;
    const auto locals = map_pairs<Eigen::VectorXd>(ws, [&](std::size_t i, std::size_t j) {
        PairStencil stencil(pot, p.points[i], p.points[j], n, ws.h);
        Eigen::VectorXd u(2 * n);
        u.head(n) = q.segment(n * i, n);
        u.tail(n) = q.segment(n * j, n);
        return stencil.gradient(u);
    });
    for (std::size_t idx = 0; idx < locals.size(); ++idx) {
        const auto& [i, j] = ws.pairs.pairs[idx];
        grad.segment(n * i, n) += locals[idx].head(n);
        grad.segment(n * j, n) += locals[idx].tail(n);
    }
}

Eigen::VectorXd total_gradient(const Pattern& p, const SeedResonator& seed,
                               const PairPotential& pot, const Workspace& ws,
                               const Eigen::VectorXd& q) {
    const int n = ws.n;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(q.size());
    for (std::size_t i = 0; i < p.points.size(); ++i)
        grad.segment(n * i, n) = seed.stiffness * q.segment(n * i, n);
    accumulate_pair_gradient(p, pot, ws, q, grad);
    return grad;
}

Eigen::MatrixXd total_hessian(const Pattern& p, const SeedResonator& seed,
                              const PairPotential& pot, const Workspace& ws,
                              const Eigen::VectorXd& q) {
    const int n = ws.n;
    const std::size_t sites = p.points.size();
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(n * sites, n * sites);
    for (std::size_t i = 0; i < sites; ++i)
        hess.block(n * i, n * i, n, n) = seed.stiffness;
    const auto locals = map_pairs<Eigen::MatrixXd>(ws, [&](std::size_t i, std::size_t j) {
        PairStencil stencil(pot, p.points[i], p.points[j], n, ws.h);
        Eigen::VectorXd u(2 * n);
        u.head(n) = q.segment(n * i, n);
        u.tail(n) = q.segment(n * j, n);
        return stencil.hessian(u);
    });
    for (std::size_t idx = 0; idx < locals.size(); ++idx) {
        const auto& [i, j] = ws.pairs.pairs[idx];
        const Eigen::MatrixXd& h = locals[idx];
        hess.block(n * i, n * i, n, n) += h.topLeftCorner(n, n);
        hess.block(n * j, n * j, n, n) += h.bottomRightCorner(n, n);
        hess.block(n * i, n * j, n, n) += h.topRightCorner(n, n);
        hess.block(n * j, n * i, n, n) += h.bottomLeftCorner(n, n);
    }
    return hess;
}

} // namespace

std::vector<Eigen::VectorXd> find_equilibrium(const Pattern& p, const SeedResonator& seed,
                                              const PairPotential& pot,
                                              const EquilibriumOptions& opts) {
    seed.validate();
    const Workspace ws = make_workspace(p, seed, pot, opts);
    const int n = ws.n;
    Eigen::VectorXd q = Eigen::VectorXd::Zero(n * p.points.size());
    double e = total_energy(p, seed, pot, ws, q);

    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        const Eigen::VectorXd grad = total_gradient(p, seed, pot, ws, q);
        // Max-norm: the finite-difference noise floor of the 2-norm grows
        // with system size and would make a fixed tolerance unreachable.
        const double gnorm = grad.lpNorm<Eigen::Infinity>();
        if (gnorm <= opts.gradient_tolerance) break;
        if (iter == opts.max_iterations - 1) throw NonConvergence(gnorm);

        const Eigen::MatrixXd hess = total_hessian(p, seed, pot, ws, q);
        Eigen::LDLT<Eigen::MatrixXd> solver(hess);
        Eigen::VectorXd step = -solver.solve(grad);
        if (solver.info() != Eigen::Success || !step.allFinite())
            step = -grad; // fall back to steepest descent

        if (gnorm <= 1e-6) {
            // Endgame: energy differences are below the resolution of the
            // Armijo test here, so take plain Newton steps and require the
            // gradient itself to contract.
            const Eigen::VectorXd trial = q + step;
            const double gtrial =
                total_gradient(p, seed, pot, ws, trial).lpNorm<Eigen::Infinity>();
            if (gtrial >= gnorm) throw NonConvergence(gnorm);
            q = trial;
            e = total_energy(p, seed, pot, ws, q);
        } else {
            // Armijo backtracking.
            double alpha = 1.0;
            const double slope = grad.dot(step);
            bool accepted = false;
            for (int bt = 0; bt < 40; ++bt) {
                const Eigen::VectorXd trial = q + alpha * step;
                const double et = total_energy(p, seed, pot, ws, trial);
                if (et <= e + 1e-4 * alpha * slope) {
                    q = trial;
                    e = et;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted) throw NonConvergence(gnorm);
        }

        for (std::size_t i = 0; i < p.points.size(); ++i)
            if (q.segment(n * i, n).norm() > ws.trust)
                throw EscapedBasin(q.segment(n * i, n).norm());
    }

    std::vector<Eigen::VectorXd> out;
    out.reserve(p.points.size());
    for (std::size_t i = 0; i < p.points.size(); ++i) out.push_back(q.segment(n * i, n));
    return out;
}

const Eigen::MatrixXd* CouplingMatrixSet::block(std::size_t i, std::size_t j) const {
    const auto it = blocks.find({i, j});
    return it == blocks.end() ? nullptr : &it->second;
}

CouplingMatrixSet coupling_matrices(const Pattern& p, const SeedResonator& seed,
                                    const PairPotential& pot, const EquilibriumOptions& opts) {
    const auto offsets = find_equilibrium(p, seed, pot, opts);
    const Workspace ws = make_workspace(p, seed, pot, opts);
    const int n = ws.n;

    CouplingMatrixSet out;
    out.pattern = p;
    out.n_dof = n;
    out.coupling_range = pot.range();
    out.equilibrium_offsets = offsets;
    for (std::size_t i = 0; i < p.points.size(); ++i)
        out.blocks[{i, i}] = seed.stiffness;

    const auto locals = map_pairs<Eigen::MatrixXd>(ws, [&](std::size_t i, std::size_t j) {
        PairStencil stencil(pot, p.points[i], p.points[j], n, ws.h);
        Eigen::VectorXd u(2 * n);
        u.head(n) = offsets[i];
        u.tail(n) = offsets[j];
        return stencil.hessian(u);
    });
    for (std::size_t idx = 0; idx < locals.size(); ++idx) {
        const auto& [i, j] = ws.pairs.pairs[idx];
        const Eigen::MatrixXd& h = locals[idx];
        if (idx == 0) {
            PairStencil coarse(pot, p.points[i], p.points[j], n, 2.0 * ws.h);
            Eigen::VectorXd u(2 * n);
            u.head(n) = offsets[i];
            u.tail(n) = offsets[j];
            out.fd_error_estimate = (h - coarse.hessian(u)).cwiseAbs().maxCoeff() / 3.0;
        }
        out.blocks[{i, i}] += h.topLeftCorner(n, n);
        out.blocks[{j, j}] += h.bottomRightCorner(n, n);
        out.blocks[{i, j}] = h.topRightCorner(n, n);
        out.blocks[{j, i}] = h.bottomLeftCorner(n, n);
    }
    return out;
}

CouplingKernel reduce(const CouplingMatrixSet& w, const SeedResonator& seed) {
    seed.validate();
    if (w.n_dof != seed.n_dof())
        throw std::invalid_argument("reduce: dof mismatch between couplings and seed");

    struct State {
        Pattern base;
        std::map<std::pair<std::size_t, std::size_t>, ComplexMatrix> blocks;
        double spatial_range = 0.0;
        double match_tol = 1e-6;
        int n = 0;
    };
    auto state = std::make_shared<State>();
    state->base = w.pattern;
    state->n = w.n_dof;
    state->spatial_range = w.coupling_range;

    const Eigen::MatrixXd mhalf = matrix_inverse_sqrt(seed.mass);
    for (const auto& [key, block] : w.blocks)
        state->blocks[key] = (mhalf * block * mhalf).cast<std::complex<double>>();

    CouplingKernel k;
    k.n_dof = w.n_dof;
    k.coupling_range = w.coupling_range + rotation_slack(w.pattern.dim);
    // Arguments are right-translates base . x_a^{-1}; translate_pattern keeps
    // the point order, so the anchor a is the slot holding the identity and
    // slot correspondence is exact. That keeps the kernel hermitian to the
    // bit: the (g^{-1}, g.L) value is the stored transpose block.
    k.evaluate = [state](const Isometry& g, const Pattern& L) {
        const int n = state->n;
        if (g.trans3().norm() > state->spatial_range + kGroupEqTol)
            return ComplexMatrix(ComplexMatrix::Zero(n, n));

        const auto anchor = L.index_of_identity(state->match_tol);
        if (L.size() != state->base.size() || !anchor)
            throw std::domain_error(
                "reduced kernel: pattern is not a translate of the base pattern");
        const Isometry xa = state->base.points[*anchor];
        const std::size_t probe = state->base.size() / 2;
        if (group_distance(L.points[probe],
                           right_translate(xa, state->base.points[probe])) >
            state->match_tol)
            throw std::domain_error(
                "reduced kernel: pattern is not a translate of the base pattern");

        for (std::size_t b = 0; b < L.size(); ++b) {
            if (group_distance(L.points[b], g) <= state->match_tol) {
                const auto it = state->blocks.find({*anchor, b});
                if (it == state->blocks.end()) break;
                return it->second;
            }
        }
        return ComplexMatrix(ComplexMatrix::Zero(n, n));
    };
    return k;
}

PairCoupling coupling_from_potential(const SeedResonator& seed,
                                     std::shared_ptr<const PairPotential> pot,
                                     const EquilibriumOptions& opts) {
    struct Cache {
        std::mutex lock;
        std::optional<Pattern> pattern;
        std::optional<CouplingMatrixSet> blocks;
    };
    auto cache = std::make_shared<Cache>();
    const SeedResonator seed_copy = seed;
    return [cache, seed_copy, pot, opts](const Isometry& x, const Isometry& xp,
                                         const Pattern& L) {
        std::scoped_lock guard(cache->lock);
        bool fresh = !cache->pattern || cache->pattern->size() != L.size();
        if (!fresh)
            for (std::size_t i = 0; i < L.size(); ++i)
                if (group_distance(L.points[i], cache->pattern->points[i]) > 1e-12) {
                    fresh = true;
                    break;
                }
        if (fresh) {
            cache->blocks = coupling_matrices(L, seed_copy, *pot, opts);
            cache->pattern = L;
        }
        std::optional<std::size_t> ix, ixp;
        for (std::size_t i = 0; i < L.size(); ++i) {
            if (!ix && approx_equal(L.points[i], x)) ix = i;
            if (!ixp && approx_equal(L.points[i], xp)) ixp = i;
        }
        if (!ix || !ixp) throw std::invalid_argument("pair coupling: sites not in pattern");
        const Eigen::MatrixXd* block = cache->blocks->block(*ix, *ixp);
        const int n = cache->blocks->n_dof;
        return block ? *block : Eigen::MatrixXd::Zero(n, n).eval();
    };
}

namespace {

Isometry random_motion(CounterRng& rng, int dim) {
    const double radius = 1.5 * rng.next_double();
    if (dim == 2) {
        const double phi = rng.uniform(0.0, kTwoPi);
        const Isometry rot = rng.next_double() < 0.5
                                 ? Isometry::rotation2d(rng.uniform(0.0, kTwoPi))
                                 : Isometry::reflection2d(rng.uniform(0.0, kTwoPi));
        return compose(Isometry::translation(
                           Eigen::Vector2d{radius * std::cos(phi), radius * std::sin(phi)}),
                       rot);
    }
    Eigen::Vector3d axis{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    if (axis.norm() < 1e-6) axis = {1, 0, 0};
    Isometry rot = Isometry::rotation3d(axis, rng.uniform(0.0, kTwoPi));
    if (rng.next_double() < 0.5)
        rot = Isometry::from_parts((-rot.rotation()).eval(), Eigen::Vector3d::Zero());
    const Eigen::Vector3d v{rng.uniform(-radius, radius), rng.uniform(-radius, radius),
                            rng.uniform(-radius, radius)};
    return compose(Isometry::translation(v), rot);
}

} // namespace

double check_equivariance(const PairCoupling& w, const Pattern& p, int trials,
                          std::uint64_t rng_seed) {
    CounterRng rng(rng_seed, 0x9d70f);
    const std::size_t sites = p.size();
    std::vector<Eigen::MatrixXd> base;
    base.reserve(sites * sites);
    for (std::size_t i = 0; i < sites; ++i)
        for (std::size_t j = 0; j < sites; ++j) base.push_back(w(p.points[i], p.points[j], p));

    double dev = 0.0;
    for (int t = 0; t < trials; ++t) {
        const Isometry g = t == 0 ? Isometry::identity(p.dim) : random_motion(rng, p.dim);
        const Pattern moved = translate_pattern(g, p);
        for (std::size_t i = 0; i < sites; ++i)
            for (std::size_t j = 0; j < sites; ++j) {
                const Eigen::MatrixXd transported = w(moved.points[i], moved.points[j], moved);
                dev = std::max(dev,
                               (base[i * sites + j] - transported).cwiseAbs().maxCoeff());
            }
    }
    return dev;
}

Eigen::MatrixXd matrix_inverse_sqrt(const Eigen::MatrixXd& spd) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(spd);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
        throw std::invalid_argument("matrix_inverse_sqrt: matrix is not positive definite");
    return es.eigenvectors() *
           es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
           es.eigenvectors().transpose();
}

void to_json(nlohmann::json& j, const SeedResonator& s) {
    auto matrix_json = [](const Eigen::MatrixXd& m) {
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
            rows.push_back(row);
        }
        return rows;
    };
    nlohmann::json dipoles = nlohmann::json::array();
    for (const auto& d : s.dipoles)
        dipoles.push_back({{"offset", {d.offset.x(), d.offset.y(), d.offset.z()}},
                           {"moment", {d.moment.x(), d.moment.y(), d.moment.z()}}});
    j = nlohmann::json{{"dim", s.dim},
                       {"mass", matrix_json(s.mass)},
                       {"stiffness", matrix_json(s.stiffness)},
                       {"dipoles", dipoles}};
    if (!s.active_dofs.empty()) {
        std::vector<bool> frozen;
        frozen.reserve(s.active_dofs.size());
        for (const bool active : s.active_dofs) frozen.push_back(!active);
        j["frozen"] = frozen;
    }
}

void from_json(const nlohmann::json& j, SeedResonator& s) {
    s.dim = j.at("dim").get<int>();
    auto matrix_from = [](const nlohmann::json& rows) {
        const int n = static_cast<int>(rows.size());
        Eigen::MatrixXd m(n, n);
        for (int r = 0; r < n; ++r) {
            if (static_cast<int>(rows.at(r).size()) != n)
                throw std::invalid_argument("seed resonator: ragged matrix");
            for (int c = 0; c < n; ++c) m(r, c) = rows.at(r).at(c).get<double>();
        }
        return m;
    };
    s.mass = matrix_from(j.at("mass"));
    s.stiffness = matrix_from(j.at("stiffness"));
    s.dipoles.clear();
    if (j.contains("dipoles"))
        for (const auto& d : j.at("dipoles")) {
            Dipole dip;
            for (int k = 0; k < 3; ++k) {
                if (k < static_cast<int>(d.at("offset").size()))
                    dip.offset(k) = d.at("offset").at(k).get<double>();
                if (k < static_cast<int>(d.at("moment").size()))
                    dip.moment(k) = d.at("moment").at(k).get<double>();
            }
            s.dipoles.push_back(dip);
        }
    s.active_dofs.clear();
    if (j.contains("frozen")) {
        const auto frozen = j.at("frozen").get<std::vector<bool>>();
        s.active_dofs.reserve(frozen.size());
        for (const bool f : frozen) s.active_dofs.push_back(!f);
    }
    s.validate();
}

} // namespace patternlab
