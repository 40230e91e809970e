#pragma once

#include "hqe/series.hpp"

#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

namespace hqe {

/// Coefficient space H with its Poincare pairing.
///  - Point:  H = C*1, (a,b) = a0*b0
///  - CP1:    basis {1, P}, (1,P) = 1, (1,1) = (P,P) = 0
///  - Frame2: orthonormal basis {1_1, 1_2}, (1_i,1_j) = delta_ij
enum class HModel { Point, CP1, Frame2 };

inline int hdim(HModel m) { return m == HModel::Point ? 1 : 2; }

/// H-valued series: components along the declared basis.
struct CohVec {
    Series c[2];

    CohVec() = default;
    explicit CohVec(EnvPtr env) : c{Series::zero(env), Series::zero(std::move(env))} {}
    CohVec(Series a, Series b) : c{std::move(a), std::move(b)} {}

    bool is_zero() const { return c[0].is_zero() && c[1].is_zero(); }

    CohVec operator-() const { return CohVec(-c[0], -c[1]); }
    friend CohVec operator+(const CohVec& a, const CohVec& b) { return CohVec(a.c[0] + b.c[0], a.c[1] + b.c[1]); }
    friend CohVec operator-(const CohVec& a, const CohVec& b) { return CohVec(a.c[0] - b.c[0], a.c[1] - b.c[1]); }
    CohVec scaled(const Series& s) const { return CohVec(c[0] * s, c[1] * s); }
    CohVec scaled(const Scalar& s) const { return CohVec(c[0].scaled(s), c[1].scaled(s)); }
};

/// Poincare pairing (a, b).
inline Series pair_h(HModel m, const CohVec& a, const CohVec& b) {
    switch (m) {
        case HModel::Point: return a.c[0] * b.c[0];
        case HModel::CP1: return a.c[0] * b.c[1] + a.c[1] * b.c[0];
        case HModel::Frame2: return a.c[0] * b.c[0] + a.c[1] * b.c[1];
    }
    throw std::logic_error("pair_h");
}

/// Basis vector phi_a and its Poincare-dual phi^a.
inline CohVec basis_vec(HModel m, const EnvPtr& env, int a) {
    CohVec v(env);
    v.c[a] = Series::one(env);
    return v;
}
inline CohVec dual_basis_vec(HModel m, const EnvPtr& env, int a) {
    // (phi^a, phi_b) = delta^a_b
    if (m == HModel::CP1) return basis_vec(m, env, 1 - a);
    return basis_vec(m, env, a);
}

/// Element of H((z^-1)) stored on a finite z-window. The tail flags record
/// that the true object keeps going beyond the stored window.
class LoopVector {
  public:
    LoopVector() = default;
    LoopVector(HModel m, EnvPtr env) : model_(m), env_(std::move(env)) {}

    HModel model() const { return model_; }
    const EnvPtr& env() const { return env_; }
    const std::map<int, CohVec>& coeffs() const { return c_; }

    bool plus_tail_truncated = false;   ///< true content beyond stored z^max
    bool minus_tail_truncated = false;  ///< true content below stored z^min

    void set(int zpow, CohVec v) {
        if (v.is_zero()) { c_.erase(zpow); return; }
        c_[zpow] = std::move(v);
    }
    CohVec get(int zpow) const {
        auto it = c_.find(zpow);
        return it == c_.end() ? CohVec(env_) : it->second;
    }
    bool is_zero() const {
        for (auto& [k, v] : c_)
            if (!v.is_zero()) return false;
        return true;
    }

    LoopVector operator-() const {
        LoopVector r = *this;
        for (auto& [k, v] : r.c_) v = -v;
        return r;
    }
    friend LoopVector operator+(const LoopVector& a, const LoopVector& b) {
        LoopVector r = a;
        r.plus_tail_truncated |= b.plus_tail_truncated;
        r.minus_tail_truncated |= b.minus_tail_truncated;
        for (auto& [k, v] : b.c_) {
            auto it = r.c_.find(k);
            if (it == r.c_.end()) r.c_[k] = v;
            else {
                it->second = it->second + v;
                if (it->second.is_zero()) r.c_.erase(it);
            }
        }
        return r;
    }
    friend LoopVector operator-(const LoopVector& a, const LoopVector& b) { return a + (-b); }

    LoopVector scaled(const Series& s) const {
        LoopVector r(model_, env_);
        r.plus_tail_truncated = plus_tail_truncated;
        r.minus_tail_truncated = minus_tail_truncated;
        for (auto& [k, v] : c_) r.set(k, v.scaled(s));
        return r;
    }
    LoopVector scaled(const Scalar& s) const {
        LoopVector r(model_, env_);
        r.plus_tail_truncated = plus_tail_truncated;
        r.minus_tail_truncated = minus_tail_truncated;
        for (auto& [k, v] : c_) r.set(k, v.scaled(s));
        return r;
    }

    /// Projection onto H_+ = H[z] (powers >= 0) / H_- (powers < 0).
    LoopVector plus_part() const {
        LoopVector r(model_, env_);
        r.plus_tail_truncated = plus_tail_truncated;
        for (auto& [k, v] : c_)
            if (k >= 0) r.set(k, v);
        return r;
    }
    LoopVector minus_part() const {
        LoopVector r(model_, env_);
        r.minus_tail_truncated = minus_tail_truncated;
        for (auto& [k, v] : c_)
            if (k < 0) r.set(k, v);
        return r;
    }

    /// Coefficient b_k of phi-expansion f_- = sum_k b_k (-z)^(-1-k):
    /// b_k = (-1)^(k+1) * (z^(-1-k) coefficient).
    CohVec minus_coeff(int k) const {
        CohVec v = get(-1 - k);
        return (k % 2 == 0) ? -v : v;
    }
    /// Coefficient a_k of f_+ = sum_k a_k z^k.
    CohVec plus_coeff(int k) const { return get(k); }

  private:
    HModel model_ = HModel::Point;
    EnvPtr env_;
    std::map<int, CohVec> c_;
};

/// Symplectic pairing Omega(f,g) = Res_z (f(-z), g(z)) dz.
/// Errors when the stored windows cannot certify the full residue.
inline Series omega(const LoopVector& f, const LoopVector& g) {
    if (f.model() != g.model()) throw std::invalid_argument("omega: model mismatch");
    // Contributions pair z^k in f with z^(-1-k) in g. Missing-tail overlap
    // makes the residue undetermined.
    if ((f.plus_tail_truncated && g.minus_tail_truncated) ||
        (f.minus_tail_truncated && g.plus_tail_truncated))
        throw std::domain_error("omega: window too small for stored tails");
    Series r = Series::zero(f.env());
    for (auto& [k, fv] : f.coeffs()) {
        CohVec gv = g.get(-1 - k);
        if (gv.is_zero()) continue;
        Series term = pair_h(f.model(), fv, gv);
        if (k % 2 != 0) term = -term; // (-1)^k from f(-z)
        r = r + term;
    }
    return r;
}

struct Mat2 {
    Series m[2][2];

    Mat2() = default;
    explicit Mat2(EnvPtr env) {
        for (auto& row : m)
            for (auto& x : row) x = Series::zero(env);
    }
    static Mat2 identity(const EnvPtr& env) {
        Mat2 r(env);
        r.m[0][0] = Series::one(env);
        r.m[1][1] = Series::one(env);
        return r;
    }
    bool is_zero() const {
        for (auto& row : m)
            for (auto& x : row)
                if (!x.is_zero()) return false;
        return true;
    }
    friend Mat2 operator+(const Mat2& a, const Mat2& b) {
        Mat2 r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) r.m[i][j] = a.m[i][j] + b.m[i][j];
        return r;
    }
    friend Mat2 operator-(const Mat2& a, const Mat2& b) {
        Mat2 r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) r.m[i][j] = a.m[i][j] - b.m[i][j];
        return r;
    }
    Mat2 operator-() const {
        Mat2 r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) r.m[i][j] = -m[i][j];
        return r;
    }
    friend Mat2 operator*(const Mat2& a, const Mat2& b) {
        Mat2 r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                r.m[i][j] = a.m[i][0] * b.m[0][j] + a.m[i][1] * b.m[1][j];
            }
        return r;
    }
    Mat2 scaled(const Series& s) const {
        Mat2 r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) r.m[i][j] = m[i][j] * s;
        return r;
    }
    CohVec apply(const CohVec& v) const {
        return CohVec(m[0][0] * v.c[0] + m[0][1] * v.c[1], m[1][0] * v.c[0] + m[1][1] * v.c[1]);
    }
    /// Adjoint w.r.t. the Poincare pairing: (M* a, b) = (a, M b).
    Mat2 star(HModel h) const {
        Mat2 r;
        if (h == HModel::CP1) {
            // J = [[0,1],[1,0]]: M* = J M^T J
            r.m[0][0] = m[1][1];
            r.m[1][1] = m[0][0];
            r.m[0][1] = m[0][1];
            r.m[1][0] = m[1][0];
        } else {
            r.m[0][0] = m[0][0];
            r.m[1][1] = m[1][1];
            r.m[0][1] = m[1][0];
            r.m[1][0] = m[0][1];
        }
        return r;
    }
};

/// Twisted-loop-group element M(z) = 1 + M_1 z^{\pm 1} + ... on a finite
/// window of z-powers. Upper-triangular elements store non-negative powers,
/// lower-triangular non-positive ones.
class LoopMatrix {
  public:
    LoopMatrix() = default;
    LoopMatrix(HModel h, EnvPtr env, bool upper) : model_(h), env_(std::move(env)), upper_(upper) {}

    static LoopMatrix identity(HModel h, const EnvPtr& env, bool upper) {
        LoopMatrix r(h, env, upper);
        r.set(0, Mat2::identity(env));
        return r;
    }

    HModel model() const { return model_; }
    const EnvPtr& env() const { return env_; }
    bool upper() const { return upper_; }
    const std::map<int, Mat2>& coeffs() const { return c_; }

    void set(int zpow, Mat2 m) {
        if (m.is_zero()) { c_.erase(zpow); return; }
        c_[zpow] = std::move(m);
    }
    Mat2 get(int zpow) const {
        auto it = c_.find(zpow);
        return it == c_.end() ? Mat2(env_) : it->second;
    }
    int order() const { // largest |z power| stored
        int o = 0;
        for (auto& [k, m] : c_) o = std::max(o, std::abs(k));
        return o;
    }

    /// M(-z): negate odd powers.
    LoopMatrix at_minus_z() const {
        LoopMatrix r(model_, env_, upper_);
        for (auto& [k, m] : c_) r.set(k, (k % 2) ? -m : m);
        return r;
    }
    /// M*(z): entrywise adjoint.
    LoopMatrix star() const {
        LoopMatrix r(model_, env_, upper_);
        for (auto& [k, m] : c_) r.set(k, m.star(model_));
        return r;
    }

    friend LoopMatrix operator*(const LoopMatrix& a, const LoopMatrix& b) {
        LoopMatrix r(a.model_, a.env_, a.upper_ && b.upper_);
        for (auto& [k, ma] : a.c_)
            for (auto& [l, mb] : b.c_) {
                Mat2 prod = ma * mb;
                auto it = r.c_.find(k + l);
                if (it == r.c_.end()) r.c_[k + l] = prod;
                else it->second = it->second + prod;
            }
        for (auto it = r.c_.begin(); it != r.c_.end();) {
            if (it->second.is_zero()) it = r.c_.erase(it);
            else ++it;
        }
        return r;
    }

    /// Inverse of a triangular element (Neumann series), to the stored order.
    LoopMatrix inverse() const {
        if (c_.count(0) == 0) throw std::domain_error("LoopMatrix::inverse: no constant term");
        int ord = order();
        LoopMatrix r(model_, env_, upper_);
        r.set(0, Mat2::identity(env_));
        int dir = upper_ ? 1 : -1;
        for (int n = 1; n <= ord; ++n) {
            Mat2 acc(env_);
            for (int j = 1; j <= n; ++j) acc = acc - get(dir * j) * r.get(dir * (n - j));
            r.set(dir * n, acc);
        }
        return r;
    }

    /// Apply to a loop vector, clipping to the z window of the policy.
    LoopVector apply(const LoopVector& f, int z_lo, int z_hi) const {
        LoopVector r(model_, env_);
        r.plus_tail_truncated = f.plus_tail_truncated;
        r.minus_tail_truncated = f.minus_tail_truncated;
        std::map<int, CohVec> acc;
        for (auto& [k, m] : c_)
            for (auto& [l, v] : f.coeffs()) {
                int p = k + l;
                if (p < z_lo) { r.minus_tail_truncated = true; continue; }
                if (p > z_hi) { r.plus_tail_truncated = true; continue; }
                auto it = acc.find(p);
                if (it == acc.end()) acc.emplace(p, m.apply(v));
                else it->second = it->second + m.apply(v);
            }
        // A truncated source tail feeds finite powers through z^{\pm k} terms.
        if (!c_.empty()) {
            if (f.minus_tail_truncated && upper_) r.minus_tail_truncated = true;
            if (f.plus_tail_truncated && !upper_) r.plus_tail_truncated = true;
        }
        for (auto& [p, v] : acc) r.set(p, v);
        return r;
    }

  private:
    HModel model_ = HModel::CP1;
    EnvPtr env_;
    bool upper_ = true;
    std::map<int, Mat2> c_;
};

/// M*(-z) M(z) == 1 up to the jointly stored order. Returns the largest
/// order actually verified (negative when the constant term already fails).
inline int check_symplectic(const LoopMatrix& M) {
    LoopMatrix p = M.star().at_minus_z() * M;
    int ord = M.order();
    for (int n = 0; n <= ord; ++n) {
        Mat2 want = (n == 0) ? Mat2::identity(M.env()) : Mat2(M.env());
        int dir = M.upper() ? 1 : -1;
        Mat2 got = p.get(dir * n);
        if (!(got - want).is_zero()) return n - 1;
    }
    return ord;
}

/// Quadratic-form coefficient tables.
///
/// V (upper, from R):   sum V_{kl} w^k z^l = (1 - R(w) R*(z)) / (w + z)
/// W (lower, from S):   sum W_{kl} w^-k z^-l = (S*(w) S(z) - 1) / (w^-1 + z^-1)
/// Both solve the same staircase recursion V_{a-1,b} + V_{a,b-1} = N_{a,b}.
class QuadForm {
  public:
    QuadForm() = default;

    static QuadForm v_form(const LoopMatrix& R, int order) {
        QuadForm q;
        q.build(R, order, /*upper=*/true);
        return q;
    }
    static QuadForm w_form(const LoopMatrix& S, int order) {
        QuadForm q;
        q.build(S, order, /*upper=*/false);
        return q;
    }

    const Mat2& at(int k, int l) const {
        auto it = c_.find({k, l});
        if (it == c_.end()) throw std::out_of_range("QuadForm::at: order exhausted");
        return it->second;
    }
    bool has(int k, int l) const { return c_.count({k, l}) != 0; }
    int order() const { return order_; }
    HModel model() const { return model_; }
    const EnvPtr& env() const { return env_; }

  private:
    void build(const LoopMatrix& M, int order, bool upper) {
        env_ = M.env();
        model_ = M.model();
        order_ = order;
        int dir = upper ? 1 : -1;
        // N_{a,b}: coefficient of w^(dir*a) z^(dir*b) in 1 - M*(w)M(z) (upper)
        // or M*(w)M(z) - 1 (lower). Note upper uses M(w)M*(z).
        auto N = [&](int a, int b) -> Mat2 {
            Mat2 acc(env_);
            if (upper) {
                // 1 - R(w)R*(z)
                acc = acc - M.get(dir * a) * M.star().get(dir * b);
                if (a == 0 && b == 0) acc = acc + Mat2::identity(env_);
            } else {
                // S*(w)S(z) - 1
                acc = acc + M.star().get(dir * a) * M.get(dir * b);
                if (a == 0 && b == 0) acc = acc - Mat2::identity(env_);
            }
            return acc;
        };
        // Staircase recursion V_{a-1,b} + V_{a,b-1} = N_{a,b} with
        // V_{-1,*} = V_{*,-1} = 0 has the explicit solution
        // V_{k,l} = sum_{j>=0} (-1)^j N_{k+1+j, l-j}.
        for (int k = 0; k <= order; ++k)
            for (int l = 0; l <= order; ++l) {
                Mat2 acc(env_);
                for (int j = 0; j <= l; ++j) {
                    Mat2 n = N(k + 1 + j, l - j);
                    acc = (j % 2 == 0) ? acc + n : acc - n;
                }
                c_[{k, l}] = acc;
            }
    }

    EnvPtr env_;
    HModel model_ = HModel::CP1;
    int order_ = 0;
    std::map<std::pair<int, int>, Mat2> c_;
};

} // namespace hqe
