#include "otfs/analysis.hpp"

#include "otfs/detector.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <numbers>

namespace otfs {

const char* se_variant_name(SeVariant v) {
    switch (v) {
        case SeVariant::exact: return "se_exact";
        case SeVariant::tin: return "se_tin";
        case SeVariant::genie: return "se_genie";
    }
    throw std::logic_error("se_variant_name: bad variant");
}

double se_posterior_time(double v_a_time, const BlockChannel& blocks, double n0,
                         SeVariant variant) {
    const FrameGeometry geom = blocks.geom;
    geom.validate();
    if (geom.N < 2) throw std::invalid_argument("se_posterior_time: needs at least two blocks");
    if (!(v_a_time > 0.0) || !std::isfinite(v_a_time)) {
        throw std::domain_error("se_posterior_time: input variance must be positive");
    }
    if (!(n0 > 0.0)) throw std::domain_error("se_posterior_time: noise variance must be positive");

    // Interference variance seen by the Gram matrix: the detector's current
    // prior (exact), the full symbol energy (tin), or none (genie).
    double v_int = 0.0;
    switch (variant) {
        case SeVariant::exact: v_int = v_a_time; break;
        case SeVariant::tin: v_int = kVarCeil; break;
        case SeVariant::genie: v_int = 0.0; break;
    }

    const int m_sz = geom.M;
    double trace_sum = 0.0;
    CMat g(2 * m_sz, 2 * m_sz);
    for (int i = 0; i < geom.N; ++i) {
        const int next = (i + 1) % geom.N;
        const CMat& a = blocks.obs_blocks[i];

        g.setZero();
        g.selfadjointView<Eigen::Lower>().rankUpdate(a, v_a_time);
        if (v_int > 0.0) {
            g.topLeftCorner(m_sz, m_sz)
                .selfadjointView<Eigen::Lower>()
                .rankUpdate(blocks.sub_blocks[i], v_int);
            g.bottomRightCorner(m_sz, m_sz)
                .selfadjointView<Eigen::Lower>()
                .rankUpdate(blocks.diag_blocks[next], v_int);
        }
        g.diagonal().array() += n0;

        Eigen::LLT<CMat> llt(g);
        if (llt.info() != Eigen::Success) {
            throw std::runtime_error("se_posterior_time: Gram matrix factorization failed");
        }
        const CMat x = llt.solve(a);
        for (int m = 0; m < m_sz; ++m) {
            trace_sum += a.col(m).dot(x.col(m)).real();  // a_m^H G^{-1} a_m
        }
    }

    const double v_p = v_a_time - v_a_time * v_a_time * trace_sum / geom.size();
    return clamp_var(v_p);
}

namespace {

// Nodes and weights for integrating f(t) exp(-t^2) dt: eigen-decomposition
// of the symmetric tridiagonal recurrence matrix (off-diagonal sqrt(k/2));
// the weight of node i is sqrt(pi) times the squared first component of its
// eigenvector.
void gauss_hermite(int n, RVec& nodes, RVec& weights) {
    RMat j = RMat::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        j(k, k - 1) = j(k - 1, k) = std::sqrt(k / 2.0);
    }
    Eigen::SelfAdjointEigenSolver<RMat> es(j);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("gauss_hermite: eigensolver failed");
    }
    nodes = es.eigenvalues();
    weights.resize(n);
    const double root_pi = std::sqrt(std::numbers::pi);
    for (int i = 0; i < n; ++i) {
        const double v0 = es.eigenvectors()(0, i);
        weights(i) = root_pi * v0 * v0;
    }
}

}  // namespace

double se_demapper(double v_a_dd, const Constellation& c, int quad_points) {
    if (!(v_a_dd > 0.0) || !std::isfinite(v_a_dd)) {
        throw std::domain_error("se_demapper: input variance must be positive");
    }
    if (quad_points < 1) throw std::invalid_argument("se_demapper: need at least one node");

    RVec t, w;
    gauss_hermite(quad_points, t, w);

    // E over x uniform and z = x + CN(0, v): substituting the CN density
    // turns the two real integrals into Gauss-Hermite form with a 1/pi
    // prefactor.
    const double s = std::sqrt(v_a_dd);
    double acc = 0.0;
    for (const Complex& x : c.points) {
        for (int i = 0; i < quad_points; ++i) {
            for (int j = 0; j < quad_points; ++j) {
                const Complex z = x + s * Complex(t(i), t(j));
                acc += w(i) * w(j) * symbol_posterior(z, v_a_dd, c).var;
            }
        }
    }
    return acc / (std::numbers::pi * c.order());
}

StateTrajectory run_state_evolution(const BlockChannel& blocks, double n0,
                                    const Constellation& c, int iters,
                                    SeVariant variant) {
    if (iters < 1) throw std::invalid_argument("run_state_evolution: iters must be >= 1");

    StateTrajectory traj;
    traj.variant = variant;
    double v_a_t = kVarCeil;
    for (int l = 0; l < iters; ++l) {
        const double v_p_t = se_posterior_time(v_a_t, blocks, n0, variant);
        const double v_a_dd =
            v_p_t >= v_a_t ? kVarCeil : clamp_var(v_p_t * v_a_t / (v_a_t - v_p_t));
        const double v_p_dd = se_demapper(v_a_dd, c);
        const double v_a_t_next =
            v_p_dd >= v_a_dd ? kVarCeil : clamp_var(v_p_dd * v_a_dd / (v_a_dd - v_p_dd));

        traj.v_a_time.push_back(v_a_t);
        traj.v_p_time.push_back(v_p_t);
        traj.v_a_dd.push_back(v_a_dd);
        traj.v_p_dd.push_back(v_p_dd);
        v_a_t = v_a_t_next;
    }
    return traj;
}

std::string trajectories_csv(const std::vector<StateTrajectory>& trajs) {
    std::string out = "variant,iter,v_a_time,v_p_time,v_a_dd,v_p_dd\n";
    char line[256];
    for (const StateTrajectory& tr : trajs) {
        for (int l = 0; l < tr.iters(); ++l) {
            std::snprintf(line, sizeof(line), "%s,%d,%.12g,%.12g,%.12g,%.12g\n",
                          se_variant_name(tr.variant), l + 1, tr.v_a_time[l], tr.v_p_time[l],
                          tr.v_a_dd[l], tr.v_p_dd[l]);
            out += line;
        }
    }
    return out;
}

}  // namespace otfs
