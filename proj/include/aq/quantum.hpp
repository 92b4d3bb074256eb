#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <random>

#include "aq/membership.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace aq {

// Reference data of the supra-quantum separation point: the Bell functional
// b, the distribution p, and its 9x9 certificate. Vectors are stored in the
// source ordering with joint entries ordered (0,0), (1,0), (0,1), (1,1); the
// internal Collins-Gisin order is (0,0), (0,1), (1,0), (1,1), related by
// kPaperCgOrder (source position -> internal position).
struct PaperConstants {
    std::array<double, 8> bell_b;
    std::array<double, 8> p_aq;
    Eigen::Matrix<double, 9, 9> gamma9;
    std::array<int, 8> cg_order;
};

inline const PaperConstants& paper_constants() {
    static const PaperConstants pc = [] {
        PaperConstants c;
        const double s2 = std::sqrt(2.0) / 9.0;
        const double s33 = std::sqrt(33.0) / 40.0;
        const double s71 = std::sqrt(71.0) / 100.0;
        c.bell_b = {-30.0 / 31.0, 167.0 / 9.0, 167.0 / 9.0, -30.0 / 31.0,
                    -174.0 / 11.0, -244.0 / 23.0, 74.0 / 11.0, -174.0 / 11.0};
        c.p_aq = {9.0 / 20.0, 2.0 / 11.0, 2.0 / 11.0, 9.0 / 20.0,
                  22.0 / 125.0, s2, 37.0 / 700.0, 22.0 / 125.0};
        c.cg_order = {0, 1, 2, 3, 4, 6, 5, 7};
        const double q = 17.0 / 155.0, r = 21.0 / 158.0, u = 4.0 / 53.0;
        const double p0 = 9.0 / 20.0, p1 = 2.0 / 11.0, j0 = 22.0 / 125.0, j2 = 37.0 / 700.0;
        c.gamma9 << 1, p0, p1, p1, p0, j0, s2, j2, j0,
                    p0, p0, q, j0, j2, j0, s33, j2, s71,
                    p1, q, p1, s2, j0, s33, s2, s71, j0,
                    p1, j0, s2, p1, q, j0, s2, s71, s33,
                    p0, j2, j0, q, p0, s71, s33, j2, j0,
                    j0, j0, s33, j0, s71, j0, s33, s71, r,
                    s2, s33, s2, s2, s33, s33, s2, u, s33,
                    j2, j2, s71, s71, j2, s71, u, j2, s71,
                    j0, s71, j0, s33, j0, r, s33, s71, j0;
        return c;
    }();
    return pc;
}

// Source-order CG coefficients -> internal order.
inline std::vector<double> reorder_paper_cg(const std::array<double, 8>& src) {
    const auto& order = paper_constants().cg_order;
    std::vector<double> out(8, 0.0);
    for (int i = 0; i < 8; ++i) out[order[i]] = src[i];
    return out;
}

inline BellFunctional paper_bell_functional(Sense sense = Sense::Minimize) {
    return functional_from_cg(Scenario({2, 2}, {2, 2}), reorder_paper_cg(paper_constants().bell_b),
                              sense);
}

inline Box paper_box() {
    CGVector cg;
    cg.scenario = Scenario({2, 2}, {2, 2});
    cg.coefficients = reorder_paper_cg(paper_constants().p_aq);
    return cg_to_box(cg);
}

// 9x9 certificate reordered to the internal event index.
inline Eigen::MatrixXd paper_certificate() {
    const auto& pc = paper_constants();
    std::array<int, 9> perm;
    perm[0] = 0;
    for (int i = 0; i < 8; ++i) perm[i + 1] = pc.cg_order[i] + 1;
    Eigen::MatrixXd g(9, 9);
    for (int i = 0; i < 9; ++i)
        for (int j = 0; j < 9; ++j) g(perm[i], perm[j]) = pc.gamma9(i, j);
    return g;
}

inline double paper_bell_value() {
    const auto& pc = paper_constants();
    double v = 0.0;
    for (int i = 0; i < 8; ++i) v += pc.bell_b[i] * pc.p_aq[i];
    return v;
}

struct QuantumScanConfig {
    int resolution = 512;     // grid points per axis over [0, 2pi)
    int refine_points = 101;  // refinement points per axis, 10x zoom
};

// Minimum eigenvalue of the Bell operator built from the two-qubit projector
// family |1><1|, |psi(theta)><psi(theta)| on each side, minimized over the
// (theta1, theta2) grid. A certified-to-grid lower bound on the quantum
// minimum of the functional.
inline double bell_operator_min(const BellFunctional& functional,
                                const QuantumScanConfig& config = {}) {
    const Scenario sc22({2, 2}, {2, 2});
    if (!(functional.scenario == sc22))
        throw structural_error("bell_operator_min: needs the 2-input 2-output scenario");
    if (config.resolution < 64) throw structural_error("bell_operator_min: resolution >= 64");

    // internal CG order: A(1|0) A(1|1) B(1|0) B(1|1) J00 J01 J10 J11
    std::vector<double> c(8, 0.0);
    {
        const std::vector<Event> basis = cg_basis(sc22);
        for (std::size_t i = 0; i < basis.size(); ++i) {
            auto it = functional.coefficients.find(basis[i]);
            if (it != functional.coefficients.end()) c[i] = it->second;
        }
    }

    auto eval = [&](double t1, double t2) {
        using M2 = Eigen::Matrix2d;
        M2 one = M2::Zero();
        one(1, 1) = 1.0;
        const Eigen::Vector2d psi1(std::cos(t1), std::sin(t1));
        const Eigen::Vector2d psi2(std::cos(t2), std::sin(t2));
        M2 pa1 = psi1 * psi1.transpose();
        M2 pa2 = psi2 * psi2.transpose();
        M2 id = M2::Identity();
        auto kron = [](const M2& a, const M2& b) {
            Eigen::Matrix4d k;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) k.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
            return k;
        };
        Eigen::Matrix4d e10 = kron(one, id), e11 = kron(pa1, id);
        Eigen::Matrix4d e20 = kron(id, one), e21 = kron(id, pa2);
        Eigen::Matrix4d m = functional.constant * Eigen::Matrix4d::Identity();
        m += c[0] * e10 + c[1] * e11 + c[2] * e20 + c[3] * e21;
        m += c[4] * e10 * e20 + c[5] * e10 * e21 + c[6] * e11 * e20 + c[7] * e11 * e21;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(0.5 * (m + m.transpose()),
                                                          Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    };

    const int res = config.resolution;
    const double step = 2.0 * M_PI / res;
    double best = std::numeric_limits<double>::infinity();
    int bi = 0, bj = 0;
#ifdef _OPENMP
#pragma omp parallel
    {
        double lbest = std::numeric_limits<double>::infinity();
        int lbi = 0, lbj = 0;
#pragma omp for schedule(static)
        for (int i = 0; i < res; ++i)
            for (int j = 0; j < res; ++j) {
                const double v = eval(i * step, j * step);
                if (v < lbest) {
                    lbest = v;
                    lbi = i;
                    lbj = j;
                }
            }
#pragma omp critical
        if (lbest < best) {
            best = lbest;
            bi = lbi;
            bj = lbj;
        }
    }
#else
    for (int i = 0; i < res; ++i)
        for (int j = 0; j < res; ++j) {
            const double v = eval(i * step, j * step);
            if (v < best) {
                best = v;
                bi = i;
                bj = j;
            }
        }
#endif
    // one refinement pass, 10x zoom around the best cell
    const double t1c = bi * step, t2c = bj * step;
    const int rp = config.refine_points;
    const double rstep = 2.0 * step / (rp - 1);
    for (int i = 0; i < rp; ++i)
        for (int j = 0; j < rp; ++j)
            best = std::min(best, eval(t1c - step + i * rstep, t2c - step + j * rstep));
    return best;
}

namespace detail {

// deterministic gaussians independent of library distributions
class SeededGaussian {
  public:
    explicit SeededGaussian(std::uint64_t seed) : rng_(seed) {}
    double operator()() {
        if (have_) {
            have_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_ = true;
        return u * f;
    }

  private:
    double uniform() {
        // 53-bit mantissa in (0, 1]
        return (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;
    }
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool have_ = false;
};

} // namespace detail

// Random two-qubit pure state measured with random projective qubit
// measurements, one per input. Deterministic per seed.
inline Box sample_quantum_box(const Scenario& sc, std::uint64_t seed) {
    if (sc.num_parties != 2 || sc.outputs != std::vector<int>{2, 2})
        throw structural_error("sample_quantum_box: needs a bipartite 2-output scenario");
    detail::SeededGaussian g(seed);

    Eigen::Vector4cd psi;
    for (int i = 0; i < 4; ++i) psi(i) = std::complex<double>(g(), g());
    psi.normalize();

    auto random_projector = [&]() {
        Eigen::Vector3d axis(g(), g(), g());
        axis.normalize();
        Eigen::Matrix2cd e;
        const std::complex<double> im(0.0, 1.0);
        e(0, 0) = 0.5 * (1.0 + axis(2));
        e(1, 1) = 0.5 * (1.0 - axis(2));
        e(0, 1) = 0.5 * (axis(0) - im * axis(1));
        e(1, 0) = 0.5 * (axis(0) + im * axis(1));
        return e; // rank-1 projector (I + n.sigma)/2
    };
    std::vector<Eigen::Matrix2cd> ea, eb;
    for (int x = 0; x < sc.inputs[0]; ++x) ea.push_back(random_projector());
    for (int y = 0; y < sc.inputs[1]; ++y) eb.push_back(random_projector());

    Box out = Box::zeros(sc);
    const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
    for (int x = 0; x < sc.inputs[0]; ++x)
        for (int y = 0; y < sc.inputs[1]; ++y)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    const Eigen::Matrix2cd ma = (a == 1) ? ea[x] : (id - ea[x]).eval();
                    const Eigen::Matrix2cd mb = (b == 1) ? eb[y] : (id - eb[y]).eval();
                    Eigen::Matrix4cd op;
                    for (int i = 0; i < 2; ++i)
                        for (int j = 0; j < 2; ++j) op.block<2, 2>(2 * i, 2 * j) = ma(i, j) * mb;
                    out.at({x, y}, {a, b}) = std::real(psi.dot(op * psi));
                }
    return out;
}

struct Section3Report {
    CertificateReport certificate;
    double bell_value = 0.0;
    bool bell_value_in_range = false;
    double quantum_scan_min = 0.0;
    bool quantum_min_above_minus_one = false;
    double psd_margin_value = 0.0;
    bool membership_ok = false;
    bool all_passed = false;
};

// End-to-end reproduction of the supra-quantum separation: certificate
// validation, the Bell value of the reference point, the quantum grid lower
// bound, and SDP membership of the reference box.
inline Section3Report repro_section3(const QuantumScanConfig& scan = {},
                                     const conic::Settings& settings = {}) {
    Section3Report rep;
    Box box = paper_box();
    rep.certificate = validate_certificate(paper_certificate(), box, Level::AlmostQuantum);

    rep.bell_value = paper_bell_value();
    rep.bell_value_in_range = rep.bell_value >= -1.053 && rep.bell_value <= -1.051;

    rep.quantum_scan_min = bell_operator_min(paper_bell_functional(), scan);
    rep.quantum_min_above_minus_one = rep.quantum_scan_min > -1.0;

    MomentProblem mp = build_moment_problem(box.scenario, Level::AlmostQuantum, FixedBox{box});
    rep.psd_margin_value = psd_margin(mp, settings).margin;
    rep.membership_ok = rep.psd_margin_value >= -kMembershipTol;

    rep.all_passed = rep.certificate.accepted && rep.bell_value_in_range &&
                     rep.quantum_min_above_minus_one && rep.membership_ok;
    return rep;
}

} // namespace aq
