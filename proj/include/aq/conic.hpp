#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "aq/errors.hpp"

namespace aq::conic {

// Standard-form primal-dual pair over a product of PSD blocks and a
// nonnegative orthant:
//   (P)  min <C, X>   s.t.  <A_i, X> = b_i,  X in K
//   (D)  max b^T y    s.t.  C - sum_i y_i A_i = S,  S in K
// Problems arrive on either side: LMI-style models (moment matrices) put
// their variables in y, linear programs put theirs in X.

struct Block {
    enum Kind { PSD, Nonneg } kind = PSD;
    int dim = 0; // matrix dimension, or number of nonnegative scalars
};

// Sparse symmetric coefficient: list of (block, row, col, value), row <= col.
struct CoeffEntry {
    int block = 0;
    int row = 0;
    int col = 0;
    double value = 0.0;
};

struct StandardForm {
    std::vector<Block> blocks;
    std::vector<std::vector<CoeffEntry>> rows; // A_i, one list per constraint row
    std::vector<double> b;
    std::vector<CoeffEntry> c_entries; // C
};

enum class Status { Optimal, Infeasible, Unbounded, MaxIterations };

inline const char* status_name(Status s) {
    switch (s) {
        case Status::Optimal: return "optimal";
        case Status::Infeasible: return "infeasible";
        case Status::Unbounded: return "unbounded";
        default: return "max_iterations";
    }
}

struct Settings {
    double gap_tol = 1e-9;        // relative duality gap
    double feas_tol = 1e-9;       // relative residual norms
    int max_iterations = 200;
    double step_fraction = 0.98;
    bool verbose = false;
};

struct Solution {
    Status status = Status::MaxIterations;
    double primal_objective = 0.0; // <C, X>
    double dual_objective = 0.0;   // b^T y
    std::vector<double> y;
    std::vector<Eigen::MatrixXd> X; // per block (Nonneg blocks as n x 1)
    std::vector<Eigen::MatrixXd> S;
    double duality_gap = 0.0;      // |<C,X> - b^T y|
    double primal_residual = 0.0;  // ||b - A(X)||_inf
    double dual_residual = 0.0;    // max block residual of C - A^T(y) - S
    int iterations = 0;
};

namespace detail {

struct BlockMats {
    std::vector<Eigen::MatrixXd> m; // PSD: dim x dim, Nonneg: dim x 1
};

inline BlockMats zeros_like(const std::vector<Block>& blocks) {
    BlockMats out;
    for (const auto& b : blocks)
        out.m.push_back(b.kind == Block::PSD ? Eigen::MatrixXd::Zero(b.dim, b.dim)
                                             : Eigen::MatrixXd::Zero(b.dim, 1));
    return out;
}

inline BlockMats identity_like(const std::vector<Block>& blocks, double scale) {
    BlockMats out;
    for (const auto& b : blocks)
        out.m.push_back(b.kind == Block::PSD
                            ? Eigen::MatrixXd(scale * Eigen::MatrixXd::Identity(b.dim, b.dim))
                            : Eigen::MatrixXd(Eigen::MatrixXd::Constant(b.dim, 1, scale)));
    return out;
}

inline void add_entries(BlockMats& mats, const std::vector<CoeffEntry>& entries, double scale) {
    for (const auto& e : entries) {
        if (mats.m[e.block].cols() == 1) {
            mats.m[e.block](e.row, 0) += scale * e.value;
        } else {
            mats.m[e.block](e.row, e.col) += scale * e.value;
            if (e.row != e.col) mats.m[e.block](e.col, e.row) += scale * e.value;
        }
    }
}

inline double dot_entries(const std::vector<CoeffEntry>& entries, const BlockMats& mats) {
    double t = 0.0;
    for (const auto& e : entries) {
        if (mats.m[e.block].cols() == 1)
            t += e.value * mats.m[e.block](e.row, 0);
        else
            t += e.value * mats.m[e.block](e.row, e.col) * (e.row == e.col ? 1.0 : 2.0);
    }
    return t;
}

inline double inner(const BlockMats& a, const BlockMats& b) {
    double t = 0.0;
    for (std::size_t k = 0; k < a.m.size(); ++k) t += a.m[k].cwiseProduct(b.m[k]).sum();
    return t;
}

// largest alpha in (0, 1] with M + alpha * D staying in the cone
inline double max_step(const Block& blk, const Eigen::MatrixXd& m, const Eigen::MatrixXd& d) {
    if (blk.kind == Block::Nonneg) {
        double alpha = 1.0;
        for (int i = 0; i < blk.dim; ++i)
            if (d(i, 0) < 0.0) alpha = std::min(alpha, -m(i, 0) / d(i, 0));
        return alpha;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) return 0.0;
    Eigen::MatrixXd l = llt.matrixL();
    Eigen::MatrixXd w = l.template triangularView<Eigen::Lower>().solve(d);
    Eigen::MatrixXd g =
        l.template triangularView<Eigen::Lower>().solve(w.transpose()).transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (g + g.transpose()),
                                                      Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin >= 0.0) return 1.0;
    return std::min(1.0, -1.0 / lmin);
}

} // namespace detail

// Primal-dual path-following interior point with NT scaling and a Mehrotra
// predictor-corrector step. Dense linear algebra; the Schur complement is
// built as Vmat^T Vmat with one scaled column per constraint row.
inline Solution solve(const StandardForm& p, const Settings& settings = {}) {
    using Eigen::MatrixXd;
    using Eigen::VectorXd;
    namespace det = detail;

    const int m = static_cast<int>(p.rows.size());
    const int nblocks = static_cast<int>(p.blocks.size());
    for (const auto& blk : p.blocks)
        if (blk.dim <= 0) throw solver_error("conic: empty block");

    int nu = 0;       // barrier degree
    int svec_len = 0; // stacked scaled-vec length
    std::vector<int> svec_off(nblocks, 0);
    for (int k = 0; k < nblocks; ++k) {
        const auto& blk = p.blocks[k];
        svec_off[k] = svec_len;
        nu += blk.dim;
        svec_len += blk.kind == Block::PSD ? blk.dim * (blk.dim + 1) / 2 : blk.dim;
    }

    det::BlockMats C = det::zeros_like(p.blocks);
    det::add_entries(C, p.c_entries, 1.0);
    double data_norm = 1.0;
    for (const auto& blk : C.m) data_norm = std::max(data_norm, blk.cwiseAbs().maxCoeff());
    for (double v : p.b) data_norm = std::max(data_norm, std::abs(v));

    det::BlockMats X = det::identity_like(p.blocks, std::max(1.0, data_norm));
    det::BlockMats S = det::identity_like(p.blocks, std::max(1.0, data_norm));
    VectorXd y = VectorXd::Zero(m);
    const VectorXd bvec = Eigen::Map<const VectorXd>(p.b.data(), m);

    Solution sol;
    sol.y.assign(m, 0.0);

    const double sqrt2 = std::sqrt(2.0);
    auto svec_into = [&](const det::BlockMats& mats, VectorXd& out) {
        int pos = 0;
        for (int k = 0; k < nblocks; ++k) {
            const MatrixXd& blk = mats.m[k];
            if (p.blocks[k].kind == Block::Nonneg) {
                out.segment(pos, p.blocks[k].dim) = blk.col(0);
                pos += p.blocks[k].dim;
            } else {
                const int d = p.blocks[k].dim;
                for (int i = 0; i < d; ++i) {
                    out(pos++) = blk(i, i);
                    for (int j = i + 1; j < d; ++j) out(pos++) = sqrt2 * blk(i, j);
                }
            }
        }
    };

    MatrixXd vmat(svec_len, m);
    VectorXd vcol(svec_len);

    auto apply_A = [&](const det::BlockMats& mats, VectorXd& out) {
        for (int i = 0; i < m; ++i) out(i) = det::dot_entries(p.rows[i], mats);
    };
    auto apply_At = [&](const VectorXd& z, det::BlockMats& out) {
        for (auto& blk : out.m) blk.setZero();
        for (int i = 0; i < m; ++i)
            if (z(i) != 0.0) det::add_entries(out, p.rows[i], z(i));
    };

    det::BlockMats Rd = det::zeros_like(p.blocks), Rc = det::zeros_like(p.blocks);
    det::BlockMats dX = det::zeros_like(p.blocks), dS = det::zeros_like(p.blocks);
    det::BlockMats dX2 = det::zeros_like(p.blocks), dS2 = det::zeros_like(p.blocks);
    det::BlockMats WRW = det::zeros_like(p.blocks), tmp = det::zeros_like(p.blocks);
    std::vector<MatrixXd> G(nblocks), Ginv(nblocks), Sinv(nblocks);
    std::vector<VectorXd> wdiag(nblocks);

    VectorXd rp(m), rhs(m), dy(m), dy2(m), ax(m);

    auto finalize = [&](Status st) {
        sol.status = st;
        apply_A(X, ax);
        sol.primal_residual = (bvec - ax).lpNorm<Eigen::Infinity>();
        sol.primal_objective = det::inner(C, X);
        sol.dual_objective = bvec.dot(y);
        sol.duality_gap = std::abs(sol.primal_objective - sol.dual_objective);
        double rd = 0.0;
        apply_At(y, tmp);
        for (int k = 0; k < nblocks; ++k) {
            MatrixXd r = C.m[k] - tmp.m[k] - S.m[k];
            rd = std::max(rd, r.cwiseAbs().maxCoeff());
        }
        sol.dual_residual = rd;
        for (int i = 0; i < m; ++i) sol.y[i] = y(i);
        sol.X = X.m;
        sol.S = S.m;
        return sol;
    };

    double best_progress = std::numeric_limits<double>::max();
    int stall = 0;

    for (int iter = 0; iter < settings.max_iterations; ++iter) {
        sol.iterations = iter;
        apply_A(X, ax);
        rp = bvec - ax;
        apply_At(y, Rd);
        for (int k = 0; k < nblocks; ++k) Rd.m[k] = C.m[k] - Rd.m[k] - S.m[k];

        const double mu = det::inner(X, S) / nu;
        const double pobj = det::inner(C, X), dobj = bvec.dot(y);
        const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
        const double rp_norm = rp.lpNorm<Eigen::Infinity>() / (1.0 + data_norm);
        double rd_norm = 0.0;
        for (const auto& blk : Rd.m) rd_norm = std::max(rd_norm, blk.cwiseAbs().maxCoeff());
        rd_norm /= 1.0 + data_norm;

        if (settings.verbose)
            std::fprintf(stderr, "it %3d mu %9.2e gap %9.2e rp %9.2e rd %9.2e\n", iter, mu, gap,
                         rp_norm, rd_norm);

        if (gap <= settings.gap_tol && rp_norm <= settings.feas_tol && rd_norm <= settings.feas_tol)
            return finalize(Status::Optimal);

        // divergence heuristics
        double xnorm = 0.0, ynorm = y.lpNorm<Eigen::Infinity>();
        for (const auto& blk : X.m) xnorm = std::max(xnorm, blk.cwiseAbs().maxCoeff());
        if (ynorm > 1e12 * data_norm || (std::abs(dobj) > 1e12 * data_norm && rd_norm < 1e-6))
            return finalize(Status::Unbounded); // dual objective diverges
        if (xnorm > 1e12 * data_norm && rp_norm < 1e-6)
            return finalize(Status::Infeasible); // primal ray behaviour

        const double progress = gap + rp_norm + rd_norm;
        if (progress < 0.8 * best_progress) {
            best_progress = progress;
            stall = 0;
        } else if (++stall > 12) {
            // no further progress; accept if we are near the targets
            if (gap <= 1e2 * settings.gap_tol && rp_norm <= 1e2 * settings.feas_tol &&
                rd_norm <= 1e2 * settings.feas_tol)
                return finalize(Status::Optimal);
            return finalize(Status::MaxIterations);
        }

        // NT scaling per block
        bool scaling_ok = true;
        for (int k = 0; k < nblocks; ++k) {
            const auto& blk = p.blocks[k];
            if (blk.kind == Block::Nonneg) {
                wdiag[k] = (X.m[k].col(0).cwiseQuotient(S.m[k].col(0))).cwiseSqrt();
                continue;
            }
            Eigen::LLT<MatrixXd> lx(X.m[k]), ls(S.m[k]);
            if (lx.info() != Eigen::Success || ls.info() != Eigen::Success) {
                scaling_ok = false;
                break;
            }
            MatrixXd Lx = lx.matrixL(), Ls = ls.matrixL();
            Eigen::JacobiSVD<MatrixXd> svd(Ls.transpose() * Lx,
                                           Eigen::ComputeThinU | Eigen::ComputeThinV);
            VectorXd sig = svd.singularValues().cwiseMax(1e-300);
            VectorXd si = sig.cwiseSqrt().cwiseInverse();
            G[k] = Lx * svd.matrixV() * si.asDiagonal();
            Ginv[k] = si.asDiagonal() * svd.matrixU().transpose() * Ls.transpose();
            Sinv[k] = Ls.transpose()
                          .template triangularView<Eigen::Upper>()
                          .solve(Ls.template triangularView<Eigen::Lower>()
                                     .solve(MatrixXd::Identity(blk.dim, blk.dim)));
        }
        if (!scaling_ok) return finalize(Status::MaxIterations);

        // Schur complement M = Vmat^T Vmat, column i = svec(G^T A_i G)
        for (int i = 0; i < m; ++i) {
            for (auto& blk : tmp.m) blk.setZero();
            det::add_entries(tmp, p.rows[i], 1.0);
            for (int k = 0; k < nblocks; ++k) {
                if (p.blocks[k].kind == Block::Nonneg)
                    tmp.m[k] = wdiag[k].cwiseProduct(tmp.m[k].col(0));
                else
                    tmp.m[k] = G[k].transpose() * tmp.m[k] * G[k];
            }
            svec_into(tmp, vcol);
            vmat.col(i) = vcol;
        }
        MatrixXd M = vmat.transpose() * vmat;
        Eigen::LLT<MatrixXd> mf(M);
        if (mf.info() != Eigen::Success) {
            M.diagonal().array() += 1e-12 * (1.0 + M.diagonal().maxCoeff());
            mf.compute(M);
            if (mf.info() != Eigen::Success) return finalize(Status::MaxIterations);
        }

        auto solve_direction = [&](const det::BlockMats& Rc_in, VectorXd& dy_out,
                                   det::BlockMats& dX_out, det::BlockMats& dS_out) {
            // A(W (Rd - A^T dy) W) + A(Rc) ... => M dy = rp - A(Rc) + A(W Rd W)
            for (int k = 0; k < nblocks; ++k) {
                if (p.blocks[k].kind == Block::Nonneg)
                    WRW.m[k] = wdiag[k].array().square().matrix().cwiseProduct(Rd.m[k].col(0));
                else
                    WRW.m[k] = G[k] * (G[k].transpose() * Rd.m[k] * G[k]) * G[k].transpose();
            }
            VectorXd a1(m), a2(m);
            apply_A(Rc_in, a1);
            apply_A(WRW, a2);
            rhs = rp - a1 + a2;
            dy_out = mf.solve(rhs);
            apply_At(dy_out, dS_out);
            for (int k = 0; k < nblocks; ++k) {
                dS_out.m[k] = Rd.m[k] - dS_out.m[k];
                if (p.blocks[k].kind == Block::Nonneg) {
                    dX_out.m[k] = Rc_in.m[k] -
                                  wdiag[k].array().square().matrix().cwiseProduct(dS_out.m[k].col(0));
                } else {
                    dX_out.m[k] =
                        Rc_in.m[k] - G[k] * (G[k].transpose() * dS_out.m[k] * G[k]) * G[k].transpose();
                    dX_out.m[k] = 0.5 * (dX_out.m[k] + dX_out.m[k].transpose()).eval();
                }
            }
        };

        // predictor
        for (int k = 0; k < nblocks; ++k) Rc.m[k] = -X.m[k];
        solve_direction(Rc, dy, dX, dS);
        double ap = 1.0, ad = 1.0;
        for (int k = 0; k < nblocks; ++k) {
            ap = std::min(ap, det::max_step(p.blocks[k], X.m[k], dX.m[k]));
            ad = std::min(ad, det::max_step(p.blocks[k], S.m[k], dS.m[k]));
        }
        double mu_aff = 0.0;
        {
            det::BlockMats Xa = X, Sa = S;
            for (int k = 0; k < nblocks; ++k) {
                Xa.m[k] += settings.step_fraction * ap * dX.m[k];
                Sa.m[k] += settings.step_fraction * ad * dS.m[k];
            }
            mu_aff = det::inner(Xa, Sa) / nu;
        }
        double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3.0);
        sigma = std::clamp(sigma, 1e-8, 1.0);

        // corrector: Rc = sigma*mu*S^-1 - X - G Sig^-1 sym(dXhat dShat) G^T
        for (int k = 0; k < nblocks; ++k) {
            const auto& blk = p.blocks[k];
            if (blk.kind == Block::Nonneg) {
                Rc.m[k] = (sigma * mu * S.m[k].col(0).cwiseInverse() - X.m[k].col(0) -
                           dX.m[k].col(0).cwiseProduct(dS.m[k].col(0)).cwiseQuotient(S.m[k].col(0)));
            } else {
                MatrixXd dxh = Ginv[k] * dX.m[k] * Ginv[k].transpose();
                MatrixXd dsh = G[k].transpose() * dS.m[k] * G[k];
                MatrixXd cross = dxh * dsh;
                cross = 0.5 * (cross + cross.transpose()).eval();
                // scaled space has Xhat = Shat = Sigma; divide by it on the left
                MatrixXd sig_x = Ginv[k] * X.m[k] * Ginv[k].transpose();
                Eigen::LLT<MatrixXd> sigl(sig_x);
                MatrixXd corr;
                if (sigl.info() == Eigen::Success)
                    corr = sigl.solve(cross);
                else
                    corr = cross;
                corr = 0.5 * (corr + corr.transpose()).eval();
                Rc.m[k] = sigma * mu * Sinv[k] - X.m[k] - G[k] * corr * G[k].transpose();
                Rc.m[k] = 0.5 * (Rc.m[k] + Rc.m[k].transpose()).eval();
            }
        }
        solve_direction(Rc, dy2, dX2, dS2);
        double ap2 = 1.0, ad2 = 1.0;
        for (int k = 0; k < nblocks; ++k) {
            ap2 = std::min(ap2, det::max_step(p.blocks[k], X.m[k], dX2.m[k]));
            ad2 = std::min(ad2, det::max_step(p.blocks[k], S.m[k], dS2.m[k]));
        }
        const bool use_corrector = ap2 + ad2 >= 0.7 * (ap + ad);
        const auto& ddX = use_corrector ? dX2 : dX;
        const auto& ddS = use_corrector ? dS2 : dS;
        const VectorXd& ddy = use_corrector ? dy2 : dy;
        const double fap = settings.step_fraction * (use_corrector ? ap2 : ap);
        const double fad = settings.step_fraction * (use_corrector ? ad2 : ad);

        for (int k = 0; k < nblocks; ++k) {
            X.m[k] += fap * ddX.m[k];
            S.m[k] += fad * ddS.m[k];
            if (p.blocks[k].kind == Block::PSD) {
                X.m[k] = 0.5 * (X.m[k] + X.m[k].transpose()).eval();
                S.m[k] = 0.5 * (S.m[k] + S.m[k].transpose()).eval();
            }
        }
        y += fad * ddy;
    }
    return finalize(Status::MaxIterations);
}

} // namespace aq::conic
