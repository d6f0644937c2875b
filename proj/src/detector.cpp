#include "otfs/detector.hpp"

#include "otfs/transforms.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>

namespace otfs {

namespace {

void check_prior(const GaussianMessage& prior, int expected) {
    prior.check_consistent();
    if (prior.size() != expected) {
        throw std::invalid_argument("lmmse: prior length does not match the frame");
    }
    if (!prior.var.allFinite() || (prior.var.array() < 0.0).any()) {
        throw std::domain_error("lmmse: prior variances must be finite and non-negative");
    }
}

// Posterior variance of entry m given the solved filter: the prior variance
// shrunk by the realized filter gain Re{(W A)(m, m)}, clamped.
RVec shrink_variances(const RVec& v_a, const CMat& x_solved, const CMat& a) {
    RVec v_p(v_a.size());
    for (Eigen::Index m = 0; m < v_a.size(); ++m) {
        const double gain = x_solved.col(m).dot(a.col(m)).real();  // conj(x)^T a
        v_p(m) = clamp_var(v_a(m) * (1.0 - gain));
    }
    return v_p;
}

}  // namespace

GaussianMessage block_lmmse(const BlockChannel& blocks, const CVec& r,
                            const GaussianMessage& prior, double n0,
                            FlopLog* flops) {
    const FrameGeometry geom = blocks.geom;
    geom.validate();
    if (geom.N < 2) {
        throw std::invalid_argument("block_lmmse: needs at least two blocks");
    }
    if (r.size() != geom.size()) throw std::invalid_argument("block_lmmse: r length mismatch");
    check_prior(prior, geom.size());
    if (!(n0 > 0.0)) throw std::domain_error("block_lmmse: noise variance must be positive");

    const int m_sz = geom.M;
    const int n_blocks = geom.N;

    GaussianMessage post;
    post.mean.resize(geom.size());
    post.var.resize(geom.size());

    CMat g(2 * m_sz, 2 * m_sz);
    for (int i = 0; i < n_blocks; ++i) {
        const int prev = (i - 1 + n_blocks) % n_blocks;
        const int next = (i + 1) % n_blocks;

        const CMat& a = blocks.obs_blocks[i];          // [H0_i; H1_next]
        const CMat& h1_own = blocks.sub_blocks[i];     // carries block prev into r_i
        const CMat& h0_next = blocks.diag_blocks[next];  // carries block next into r_next

        const auto v_a = prior.var.segment(i * m_sz, m_sz);
        const auto v_prev = prior.var.segment(prev * m_sz, m_sz);
        const auto v_next = prior.var.segment(next * m_sz, m_sz);
        const auto m_a = prior.mean.segment(i * m_sz, m_sz);
        const auto m_prev = prior.mean.segment(prev * m_sz, m_sz);
        const auto m_next = prior.mean.segment(next * m_sz, m_sz);

        // Gram matrix of the stacked observation: signal part plus the two
        // uncancelled interference covariances plus the noise floor.
        g.setZero();
        const CMat u_sig = a * v_a.cwiseSqrt().asDiagonal();
        g.selfadjointView<Eigen::Lower>().rankUpdate(u_sig);
        const CMat u_prev = h1_own * v_prev.cwiseSqrt().asDiagonal();
        g.topLeftCorner(m_sz, m_sz)
            .selfadjointView<Eigen::Lower>()
            .rankUpdate(u_prev);
        const CMat u_next = h0_next * v_next.cwiseSqrt().asDiagonal();
        g.bottomRightCorner(m_sz, m_sz)
            .selfadjointView<Eigen::Lower>()
            .rankUpdate(u_next);
        g.diagonal().array() += n0;  // the factorization reads only the lower triangle

        if (flops) {
            flops->scale(2 * m_sz, m_sz);
            flops->herk(2 * m_sz, m_sz);
            flops->scale(m_sz, m_sz);
            flops->herk(m_sz, m_sz);
            flops->scale(m_sz, m_sz);
            flops->herk(m_sz, m_sz);
            flops->cholesky(2 * m_sz);
        }

        Eigen::LLT<CMat> llt(g);
        if (llt.info() != Eigen::Success) {
            throw std::runtime_error("block_lmmse: Gram matrix factorization failed");
        }

        // X = G^{-1} A C_a, so the Wiener filter is W = C_a A^H G^{-1} = X^H.
        const CMat a_scaled = a * v_a.asDiagonal();
        const CMat x = llt.solve(a_scaled);
        if (flops) {
            flops->scale(2 * m_sz, m_sz);
            flops->tri_solve(2 * m_sz, m_sz);
            flops->tri_solve(2 * m_sz, m_sz);
        }

        // Stacked residual with the neighbours' prior means cancelled.
        CVec resid(2 * m_sz);
        resid.head(m_sz) = r.segment(i * m_sz, m_sz) - h1_own * m_prev;
        resid.tail(m_sz) = r.segment(next * m_sz, m_sz) - h0_next * m_next;
        resid -= a * m_a;
        if (flops) {
            flops->gemm(m_sz, m_sz, 1);
            flops->gemm(m_sz, m_sz, 1);
            flops->gemm(2 * m_sz, m_sz, 1);
        }

        post.mean.segment(i * m_sz, m_sz) = m_a + x.adjoint() * resid;
        post.var.segment(i * m_sz, m_sz) = shrink_variances(v_a, x, a);
        if (flops) {
            flops->gemm(m_sz, 2 * m_sz, 1);
            flops->scale(2 * m_sz, m_sz);
        }
    }
    return post;
}

GaussianMessage full_lmmse_baseline(const CMat& h_dense, const CVec& r,
                                    const GaussianMessage& prior, double n0,
                                    FlopLog* flops) {
    const Eigen::Index size = h_dense.rows();
    if (h_dense.cols() != size) throw std::invalid_argument("full_lmmse: square channel expected");
    if (r.size() != size) throw std::invalid_argument("full_lmmse: r length mismatch");
    check_prior(prior, static_cast<int>(size));
    if (!(n0 > 0.0)) throw std::domain_error("full_lmmse: noise variance must be positive");

    CMat g(size, size);
    g.setZero();
    const CMat u = h_dense * prior.var.cwiseSqrt().asDiagonal();
    g.selfadjointView<Eigen::Lower>().rankUpdate(u);
    g.diagonal().array() += n0;  // the factorization reads only the lower triangle
    if (flops) {
        flops->scale(size, size);
        flops->herk(size, size);
        flops->cholesky(size);
    }

    Eigen::LLT<CMat> llt(g);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("full_lmmse: Gram matrix factorization failed");
    }

    const CMat h_scaled = h_dense * prior.var.asDiagonal();
    const CMat x = llt.solve(h_scaled);
    if (flops) {
        flops->scale(size, size);
        flops->tri_solve(size, size);
        flops->tri_solve(size, size);
    }

    const CVec resid = r - h_dense * prior.mean;
    GaussianMessage post;
    post.mean = prior.mean + x.adjoint() * resid;
    post.var = shrink_variances(prior.var, x, h_dense);
    if (flops) {
        flops->gemm(size, size, 1);
        flops->gemm(size, size, 1);
        flops->scale(size, size);
    }
    return post;
}

GaussianMessage extrinsic(const GaussianMessage& post, const GaussianMessage& prior) {
    post.check_consistent();
    prior.check_consistent();
    if (post.size() != prior.size()) throw std::invalid_argument("extrinsic: length mismatch");

    GaussianMessage ext;
    ext.mean.resize(post.size());
    ext.var.resize(post.size());
    for (int m = 0; m < post.size(); ++m) {
        const double v_p = post.var(m);
        const double v_a = prior.var(m);
        if (v_p >= v_a) {
            // No information gained on this entry; pass the posterior mean
            // through with an uninformative variance.
            ext.var(m) = kVarCeil;
            ext.mean(m) = post.mean(m);
        } else {
            const double v_e = clamp_var(v_p * v_a / (v_a - v_p));
            ext.var(m) = v_e;
            ext.mean(m) = v_e * (post.mean(m) / v_p - prior.mean(m) / v_a);
        }
    }
    return ext;
}

SymbolPosterior symbol_posterior(Complex mean, double var, const Constellation& c) {
    const int order = c.order();
    const double v = var > kVarFloor ? var : kVarFloor;

    double d_min = std::numeric_limits<double>::infinity();
    int hard = 0;
    Eigen::ArrayXd d(order);
    for (int a = 0; a < order; ++a) {
        d(a) = std::norm(mean - c.points[a]);
        if (d(a) < d_min) {
            d_min = d(a);
            hard = a;
        }
    }

    // Max-normalized softmax; the winning point always has weight one.
    double w_sum = 0.0;
    Complex m_post(0.0, 0.0);
    double e2 = 0.0;
    for (int a = 0; a < order; ++a) {
        const double w = std::exp(-(d(a) - d_min) / v);
        w_sum += w;
        m_post += w * c.points[a];
        e2 += w * std::norm(c.points[a]);
    }
    SymbolPosterior out;
    if (!(w_sum > 0.0) || !std::isfinite(w_sum)) {
        // Degenerate input: collapse onto the nearest point.
        out.hard = c.nearest(mean);
        out.mean = c.points[out.hard];
        out.var = kVarFloor;
        return out;
    }
    out.mean = m_post / w_sum;
    out.var = clamp_var(e2 / w_sum - std::norm(out.mean));
    out.hard = hard;
    return out;
}

DemapResult dd_demap(const GaussianMessage& prior, const Constellation& c) {
    prior.check_consistent();
    DemapResult res;
    res.post.mean.resize(prior.size());
    res.post.var.resize(prior.size());
    res.hard.resize(prior.size());
    for (int m = 0; m < prior.size(); ++m) {
        const SymbolPosterior sp = symbol_posterior(prior.mean(m), prior.var(m), c);
        res.post.mean(m) = sp.mean;
        res.post.var(m) = sp.var;
        res.hard[m] = sp.hard;
    }
    return res;
}

GaussianMessage dd_domain_pass(
    const GaussianMessage& ext_time, FrameGeometry geom,
    const std::function<GaussianMessage(const GaussianMessage&)>& demap) {
    ext_time.check_consistent();
    if (ext_time.size() != geom.size()) {
        throw std::invalid_argument("dd_domain_pass: message length mismatch");
    }

    // Forward: the mean goes through the exact unitary transform; the
    // variance profile carries over entrywise.
    GaussianMessage dd;
    dd.mean = time_to_dd(ext_time.mean, geom);
    dd.var = ext_time.var;

    const GaussianMessage dd_post = demap(dd);
    dd_post.check_consistent();
    if (dd_post.size() != geom.size()) {
        throw std::invalid_argument("dd_domain_pass: demap changed the message length");
    }

    // Backward: exact transform for the mean, lane-averaged variances.
    GaussianMessage back;
    back.mean = dd_to_time(dd_post.mean, geom);
    back.var = variance_dd_to_time(dd_post.var, geom);

    return extrinsic(back, ext_time);
}

namespace {

using Estimator = std::function<GaussianMessage(const GaussianMessage&)>;

DetectionResult run_schedule(const Estimator& estimate, FrameGeometry geom,
                             const Constellation& c, const DetectorConfig& cfg,
                             const CVec* truth_time) {
    if (cfg.max_iters < 1) throw std::invalid_argument("detector: max_iters must be >= 1");
    if (cfg.damping < 0.0 || cfg.damping >= 1.0) {
        throw std::invalid_argument("detector: damping must lie in [0, 1)");
    }

    const int size = geom.size();
    GaussianMessage prior = GaussianMessage::uninformative(size);
    DemapResult last_demap;
    DetectionResult out;

    for (int it = 0; it < cfg.max_iters; ++it) {
        const GaussianMessage post = estimate(prior);
        if (truth_time) {
            out.mse_per_iter.push_back((post.mean - *truth_time).squaredNorm() / size);
        }
        out.post_var_per_iter.push_back(post.var.mean());

        const GaussianMessage ext = extrinsic(post, prior);
        const auto demap_fn = [&](const GaussianMessage& g) {
            last_demap = dd_demap(g, c);
            return last_demap.post;
        };
        GaussianMessage next = dd_domain_pass(ext, geom, demap_fn);

        if (cfg.damping > 0.0 && it > 0) {
            const double d = cfg.damping;
            next.mean = (1.0 - d) * next.mean + d * prior.mean;
            next.var = (1.0 - d) * next.var + d * prior.var;
        }

        const double denom = std::max(prior.mean.norm(), 1e-30);
        const double delta = (next.mean - prior.mean).norm() / denom;
        prior = std::move(next);
        out.iters_run = it + 1;
        if (cfg.stop_tol > 0.0 && delta < cfg.stop_tol) break;
    }

    out.hard_bits = bits_of_indices(last_demap.hard, c);
    out.hard_symbols.resize(size);
    for (int m = 0; m < size; ++m) out.hard_symbols(m) = c.points[last_demap.hard[m]];
    return out;
}

}  // namespace

DetectionResult detect_cross_domain(const BlockChannel& blocks, const CVec& r,
                                    double n0, const Constellation& c,
                                    const DetectorConfig& cfg,
                                    const CVec* truth_time, FlopLog* flops) {
    const Estimator estimate = [&](const GaussianMessage& prior) {
        return block_lmmse(blocks, r, prior, n0, flops);
    };
    return run_schedule(estimate, blocks.geom, c, cfg, truth_time);
}

DetectionResult detect_cross_domain_full(const CMat& h_dense, FrameGeometry geom,
                                         const CVec& r, double n0,
                                         const Constellation& c,
                                         const DetectorConfig& cfg,
                                         const CVec* truth_time, FlopLog* flops) {
    geom.validate();
    if (h_dense.rows() != geom.size() || h_dense.cols() != geom.size()) {
        throw std::invalid_argument("detect_cross_domain_full: channel/geometry mismatch");
    }
    const Estimator estimate = [&](const GaussianMessage& prior) {
        return full_lmmse_baseline(h_dense, r, prior, n0, flops);
    };
    return run_schedule(estimate, geom, c, cfg, truth_time);
}

CVec brute_force_map(const CMat& h_dense, const CVec& r, double n0,
                     const Constellation& c, FrameGeometry geom) {
    geom.validate();
    (void)n0;  // uniform hypotheses: the ML metric is the plain distance
    const int size = geom.size();
    if (h_dense.rows() != size || h_dense.cols() != size || r.size() != size) {
        throw std::invalid_argument("brute_force_map: dimension mismatch");
    }
    const int order = c.order();
    double hyp_count = std::pow(static_cast<double>(order), size);
    if (hyp_count > static_cast<double>(1 << 20)) {
        throw std::invalid_argument("brute_force_map: hypothesis space exceeds 2^20");
    }

    // Effective map from grid symbols straight to noiseless observations.
    CMat h_eff(size, size);
    CVec unit = CVec::Zero(size);
    for (int col = 0; col < size; ++col) {
        unit(col) = 1.0;
        h_eff.col(col) = h_dense * dd_to_time(unit, geom);
        unit(col) = 0.0;
    }

    std::vector<int> digits(size, 0);
    CVec x(size);
    for (int m = 0; m < size; ++m) x(m) = c.points[0];

    CVec best_x = x;
    double best_metric = std::numeric_limits<double>::infinity();
    const std::uint64_t total = static_cast<std::uint64_t>(hyp_count);
    for (std::uint64_t h = 0; h < total; ++h) {
        const double metric = (r - h_eff * x).squaredNorm();
        if (metric < best_metric) {
            best_metric = metric;
            best_x = x;
        }
        // Odometer step: symbol 0 runs fastest.
        for (int pos = 0; pos < size; ++pos) {
            digits[pos] = (digits[pos] + 1) % order;
            x(pos) = c.points[digits[pos]];
            if (digits[pos] != 0) break;
        }
    }
    return best_x;
}

}  // namespace otfs
