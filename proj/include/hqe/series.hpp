#pragma once

#include "hqe/scalar.hpp"
#include "hqe/varenv.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hqe {

/// Exact sparse truncated multivariate Laurent series.
///
/// Terms map exponent vectors (over the declared VarEnv) to exact scalars;
/// no zero coefficients are stored. Products falling outside a variable's
/// window are discarded, and the discard is recorded in per-variable
/// validity bounds: a stored coefficient is certified exact whenever each of
/// its exponents lies inside [valid_lo, valid_hi] for that variable.
/// Values are immutable in spirit: all operations return fresh series.
class Series {
  public:
    Series() = default;
    explicit Series(EnvPtr env) : env_(std::move(env)) { init_bounds(); }

    static Series zero(EnvPtr env) { return Series(std::move(env)); }

    static Series constant(EnvPtr env, Scalar c) {
        Series s(std::move(env));
        if (!c.is_zero()) s.terms_.emplace(ExpVec{}, std::move(c));
        return s;
    }
    static Series one(EnvPtr env) { return constant(std::move(env), Scalar(1)); }

    /// v^(num/denom-of-v); `power` counts whole powers for denom-1 variables
    /// and is given in stored units for half-exponent variables via
    /// `var_halfstep`.
    static Series var(const EnvPtr& env, const std::string& name, int power = 1) {
        int i = env->index_of(name);
        return monomial(env, i, power * env->var(i).denom, Scalar(1));
    }
    /// Monomial with the exponent given in stored units (half-units for
    /// half-exponent variables).
    static Series monomial(const EnvPtr& env, int vindex, int stored_exp, Scalar c) {
        Series s(env);
        if (c.is_zero()) return s;
        ExpVec e{};
        e[vindex] = (int16_t)stored_exp;
        if (!env->admissible(e)) {
            s.note_drop(e);
            return s;
        }
        s.terms_.emplace(e, std::move(c));
        return s;
    }

    static Series rat_mul(long k, const Series& s) { return s.scaled(Scalar(k)); }

    const EnvPtr& env() const { return env_; }
    bool is_zero() const { return terms_.empty(); }
    size_t nterms() const { return terms_.size(); }
    const std::map<ExpVec, Scalar>& terms() const { return terms_; }

    Scalar coeff(const ExpVec& e) const {
        auto it = terms_.find(e);
        return it == terms_.end() ? Scalar(0) : it->second;
    }
    Scalar constant_term() const { return coeff(ExpVec{}); }

    bool truncated() const {
        for (int i = 0; i < env_->nvars(); ++i)
            if (valid_lo_[i] != -kNoBound || valid_hi_[i] != kNoBound) return true;
        return false;
    }
    int valid_lo(int v) const { return valid_lo_[v]; }
    int valid_hi(int v) const { return valid_hi_[v]; }

    /// True when the coefficient at exponent vector e is certified exact.
    bool exact_at(const ExpVec& e) const {
        for (int i = 0; i < env_->nvars(); ++i)
            if (e[i] < valid_lo_[i] || e[i] > valid_hi_[i]) return false;
        return true;
    }

    /// Some stored term is nonzero inside the certified region.
    bool certified_nonzero() const {
        for (auto& [e, c] : terms_)
            if (exact_at(e)) return true;
        return false;
    }

    Series operator-() const {
        Series r = *this;
        for (auto& [e, c] : r.terms_) c = -c;
        return r;
    }

    friend Series operator+(const Series& a, const Series& b) {
        a.check_env(b);
        Series r = a;
        for (auto& [e, c] : b.terms_) {
            auto it = r.terms_.find(e);
            if (it == r.terms_.end()) {
                r.terms_.emplace(e, c);
            } else {
                it->second += c;
                if (it->second.is_zero()) r.terms_.erase(it);
            }
        }
        r.merge_bounds(b);
        return r;
    }
    friend Series operator-(const Series& a, const Series& b) { return a + (-b); }
    Series& operator+=(const Series& b) { *this = *this + b; return *this; }
    Series& operator-=(const Series& b) { *this = *this - b; return *this; }

    Series scaled(const Scalar& c) const {
        Series r(env_);
        r.valid_lo_ = valid_lo_;
        r.valid_hi_ = valid_hi_;
        if (c.is_zero()) return r;
        for (auto& [e, v] : terms_) r.terms_.emplace(e, v * c);
        return r;
    }

    friend Series operator*(const Series& a, const Series& b) {
        a.check_env(b);
        Series r(a.env_);
        const VarEnv& env = *a.env_;
        for (auto& [ea, ca] : a.terms_) {
            for (auto& [eb, cb] : b.terms_) {
                ExpVec e;
                for (int i = 0; i < env.nvars(); ++i) e[i] = (int16_t)(ea[i] + eb[i]);
                for (int i = env.nvars(); i < kMaxVars; ++i) e[i] = 0;
                if (!env.admissible(e)) {
                    r.note_drop(e);
                    continue;
                }
                Scalar c = ca * cb;
                if (c.is_zero()) continue;
                auto it = r.terms_.find(e);
                if (it == r.terms_.end()) {
                    r.terms_.emplace(e, std::move(c));
                } else {
                    it->second += c;
                    if (it->second.is_zero()) r.terms_.erase(it);
                }
            }
        }
        r.combine_mul_bounds(a, b);
        return r;
    }
    Series& operator*=(const Series& b) { *this = *this * b; return *this; }

    /// Smallest / largest stored exponent of variable v (stored units);
    /// 0 when the series is empty.
    int min_exp(int v) const {
        int m = 0;
        bool first = true;
        for (auto& [e, c] : terms_) {
            if (first || e[v] < m) m = e[v];
            first = false;
        }
        return m;
    }
    int max_exp(int v) const {
        int m = 0;
        bool first = true;
        for (auto& [e, c] : terms_) {
            if (first || e[v] > m) m = e[v];
            first = false;
        }
        return m;
    }

    Series pow(int n) const {
        if (n < 0) throw std::invalid_argument("Series::pow: negative power");
        Series r = one(env_);
        Series base = *this;
        while (n > 0) {
            if (n & 1) r = r * base;
            n >>= 1;
            if (n) base = base * base;
        }
        return r;
    }

    /// exp of a nilpotent argument: the partial sums must stabilize under the
    /// active windows; a non-terminating argument signals a modeling error.
    Series exp_series(int guard = 400) const {
        Series r = one(env_);
        Series inc = one(env_);
        for (int k = 1; k <= guard; ++k) {
            inc = (inc * *this).scaled(Scalar(Rat(1, k)));
            if (inc.is_zero()) return r;
            r = r + inc;
        }
        throw std::domain_error("Series::exp_series: argument not nilpotent under policy");
    }

    /// log(1 + u) for nilpotent u.
    Series log1p_series(int guard = 400) const {
        Series r = zero(env_);
        Series p = one(env_);
        for (int k = 1; k <= guard; ++k) {
            p = p * *this;
            if (p.is_zero()) return r;
            r = r + p.scaled(Scalar(Rat((k % 2) ? 1 : -1, k)));
        }
        throw std::domain_error("Series::log1p_series: argument not nilpotent under policy");
    }

    /// Geometric inverse: caller supplies the leading monomial lead (so that
    /// *this = lead * (1 + u) with u nilpotent under the windows).
    Series inverse_given_leading(const ExpVec& lead_exp, const Scalar& lead_coeff) const {
        Series lead_inv(env_);
        ExpVec ne{};
        for (int i = 0; i < env_->nvars(); ++i) ne[i] = (int16_t)(-lead_exp[i]);
        if (!env_->admissible(ne))
            throw std::domain_error("Series::inverse_given_leading: inverse leading exponent out of window");
        lead_inv.terms_.emplace(ne, lead_coeff.inverse());
        Series u = *this * lead_inv - one(env_);
        Series r = zero(env_);
        Series p = one(env_);
        for (int k = 0; k <= 400; ++k) {
            r = r + p.scaled(Scalar((k % 2) ? -1 : 1));
            p = p * u;
            if (p.is_zero()) return r * lead_inv;
        }
        throw std::domain_error("Series::inverse_given_leading: not invertible under policy");
    }
    Series inverse_given_leading(int vindex, int stored_exp, const Scalar& lead_coeff) const {
        ExpVec e{};
        e[vindex] = (int16_t)stored_exp;
        return inverse_given_leading(e, lead_coeff);
    }

    /// Term-by-term d/dv. Chain rules for composite symbols (dL/dlam etc.)
    /// live in the model layer.
    Series diff(int v) const {
        Series r(env_);
        int denom = env_->var(v).denom;
        for (auto& [e, c] : terms_) {
            if (e[v] == 0) continue;
            ExpVec ne = e;
            ne[v] = (int16_t)(e[v] - denom);
            Scalar nc = c * Scalar(Rat(e[v], denom));
            if (!env_->admissible(ne)) {
                r.note_drop(ne);
                continue;
            }
            r.add_term(ne, nc);
        }
        r.valid_lo_ = valid_lo_;
        r.valid_hi_ = valid_hi_;
        if (valid_lo_[v] != -kNoBound) r.valid_lo_[v] = valid_lo_[v] - denom;
        if (valid_hi_[v] != kNoBound) r.valid_hi_[v] = valid_hi_[v] - denom;
        return r;
    }
    Series diff(const std::string& name) const { return diff(env_->index_of(name)); }

    /// Term-by-term primitive with zero integration constants. A v^(-1) term
    /// has no primitive in the declared symbol set and raises.
    Series antidiff(int v) const {
        Series r(env_);
        int denom = env_->var(v).denom;
        for (auto& [e, c] : terms_) {
            if (e[v] == -denom)
                throw std::domain_error("Series::antidiff: v^-1 term needs a log symbol");
            ExpVec ne = e;
            ne[v] = (int16_t)(e[v] + denom);
            Scalar nc = c * Scalar(Rat(denom, ne[v]));
            if (!env_->admissible(ne)) {
                r.note_drop(ne);
                continue;
            }
            r.add_term(ne, nc);
        }
        r.valid_lo_ = valid_lo_;
        r.valid_hi_ = valid_hi_;
        if (valid_lo_[v] != -kNoBound) r.valid_lo_[v] = valid_lo_[v] + denom;
        if (valid_hi_[v] != kNoBound) r.valid_hi_[v] = valid_hi_[v] + denom;
        return r;
    }
    Series antidiff(const std::string& name) const { return antidiff(env_->index_of(name)); }

    /// Substitute variables by series (simultaneously). Stored exponents of a
    /// substituted variable must be non-negative multiples of its denom.
    Series substitute(const std::map<int, Series>& repl) const {
        for (auto& [v, g] : repl) {
            g.check_env(*this);
            (void)v;
        }
        Series r = zero(env_);
        std::map<int, std::vector<Series>> pow_cache; // v -> [g^0, g^1, ...]
        for (auto& [e, c] : terms_) {
            Series t = zero(env_);
            ExpVec rem = e;
            bool trivial = true;
            Series prod = one(env_);
            for (auto& [v, g] : repl) {
                int se = e[v];
                if (se == 0) continue;
                int denom = env_->var(v).denom;
                if (se < 0 || se % denom != 0)
                    throw std::domain_error("Series::substitute: negative/fractional power of substituted var");
                int k = se / denom;
                auto& cache = pow_cache[v];
                if (cache.empty()) cache.push_back(one(env_));
                while ((int)cache.size() <= k) cache.push_back(cache.back() * g);
                prod = prod * cache[k];
                rem[v] = 0;
                trivial = false;
            }
            Series mono(env_);
            if (env_->admissible(rem)) mono.add_term(rem, c);
            else mono.note_drop(rem);
            if (trivial) t = mono;
            else t = mono * prod;
            r = r + t;
        }
        return r;
    }
    Series substitute(const std::string& name, const Series& g) const {
        return substitute(std::map<int, Series>{{env_->index_of(name), g}});
    }

    /// Set a variable to zero: keep only terms with zero exponent of v.
    Series at_zero(const std::string& name) const {
        int v = env_->index_of(name);
        Series r(env_);
        r.valid_lo_ = valid_lo_;
        r.valid_hi_ = valid_hi_;
        for (auto& [e, c] : terms_)
            if (e[v] == 0) r.terms_.emplace(e, c);
        return r;
    }

    /// Decompose along powers of v: returns stored-exponent -> coefficient
    /// series (with v removed from the exponent).
    std::map<int, Series> slices(int v) const {
        std::map<int, Series> out;
        for (auto& [e, c] : terms_) {
            ExpVec ne = e;
            ne[v] = 0;
            auto it = out.find(e[v]);
            if (it == out.end()) {
                Series s(env_);
                s.valid_lo_ = valid_lo_;
                s.valid_hi_ = valid_hi_;
                s.terms_.emplace(ne, c);
                out.emplace(e[v], std::move(s));
            } else {
                it->second.add_term(ne, c);
            }
        }
        return out;
    }
    std::map<int, Series> slices(const std::string& name) const { return slices(env_->index_of(name)); }

    /// Coefficient of v^(stored/denom) as a series in the remaining variables.
    Series slice(const std::string& name, int stored_exp) const {
        int v = env_->index_of(name);
        Series r(env_);
        r.valid_lo_ = valid_lo_;
        r.valid_hi_ = valid_hi_;
        for (auto& [e, c] : terms_) {
            if (e[v] != stored_exp) continue;
            ExpVec ne = e;
            ne[v] = 0;
            r.terms_.emplace(ne, c);
        }
        return r;
    }

    /// Rebuild over another environment (match variables by name; absent
    /// variables must not occur).
    Series transplant(const EnvPtr& env2) const {
        std::vector<int> map2(env_->nvars(), -1);
        for (int i = 0; i < env_->nvars(); ++i)
            if (env2->has(env_->var(i).name)) map2[i] = env2->index_of(env_->var(i).name);
        Series r(env2);
        for (auto& [e, c] : terms_) {
            ExpVec ne{};
            for (int i = 0; i < env_->nvars(); ++i) {
                if (e[i] == 0) continue;
                if (map2[i] < 0)
                    throw std::domain_error("Series::transplant: variable " + env_->var(i).name +
                                            " missing in target env");
                ne[map2[i]] = e[i];
            }
            if (!env2->admissible(ne)) {
                r.note_drop(ne);
                continue;
            }
            r.add_term(ne, c);
        }
        // Conservative: import finite bounds by name.
        for (int i = 0; i < env_->nvars(); ++i) {
            if (map2[i] < 0) continue;
            r.valid_lo_[map2[i]] = valid_lo_[i];
            r.valid_hi_[map2[i]] = valid_hi_[i];
        }
        return r;
    }

    /// True if every coefficient is a plain rational.
    bool all_rational() const {
        for (auto& [e, c] : terms_)
            if (!c.is_rational()) return false;
        return true;
    }

    /// Spec text dump: one line per term, `exponent-vector TAB num/den`,
    /// exponents in declared variable order, terms in lexicographic order.
    std::string dump() const {
        std::ostringstream os;
        for (auto& [e, c] : terms_) {
            for (int i = 0; i < env_->nvars(); ++i) {
                if (i) os << ' ';
                int denom = env_->var(i).denom;
                if (e[i] % denom == 0) os << e[i] / denom;
                else os << e[i] << "/2";
            }
            os << '\t' << c.str() << '\n';
        }
        return os.str();
    }

    /// Human-readable form, e.g. "3/2*lam^-2*w + ...".
    std::string pretty() const {
        if (terms_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (auto& [e, c] : terms_) {
            if (!first) os << " + ";
            first = false;
            os << "(" << c.str() << ")";
            for (int i = 0; i < env_->nvars(); ++i) {
                if (e[i] == 0) continue;
                os << "*" << env_->var(i).name;
                int denom = env_->var(i).denom;
                if (e[i] != denom) {
                    os << "^";
                    if (e[i] % denom == 0) os << e[i] / denom;
                    else os << "(" << e[i] << "/2)";
                }
            }
        }
        return os.str();
    }

    friend std::ostream& operator<<(std::ostream& os, const Series& s) { return os << s.pretty(); }

    friend bool operator==(const Series& a, const Series& b) {
        a.check_env(b);
        return a.terms_ == b.terms_;
    }
    friend bool operator!=(const Series& a, const Series& b) { return !(a == b); }

    // Internal term insertion (assumes admissible exponent).
    void add_term(const ExpVec& e, const Scalar& c) {
        if (c.is_zero()) return;
        auto it = terms_.find(e);
        if (it == terms_.end()) terms_.emplace(e, c);
        else {
            it->second += c;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

  private:
    void init_bounds() {
        valid_lo_.assign(env_ ? env_->nvars() : 0, -kNoBound);
        valid_hi_.assign(env_ ? env_->nvars() : 0, kNoBound);
    }

    void check_env(const Series& b) const {
        if (env_.get() != b.env_.get())
            throw std::invalid_argument("Series: mismatched variable environments");
    }

    /// Record an out-of-window discard: narrow validity on each offending
    /// variable side. Group-cap discards (polynomial directions) cannot
    /// pollute in-cap coefficients, so per-variable window checks suffice.
    void note_drop(const ExpVec& e) {
        for (int i = 0; i < env_->nvars(); ++i) {
            const VarSpec& v = env_->var(i);
            if (e[i] < v.lo) valid_lo_[i] = std::max(valid_lo_[i], v.lo);
            if (e[i] > v.hi) valid_hi_[i] = std::min(valid_hi_[i], v.hi);
        }
    }

    void merge_bounds(const Series& b) {
        for (int i = 0; i < env_->nvars(); ++i) {
            valid_lo_[i] = std::max(valid_lo_[i], b.valid_lo_[i]);
            valid_hi_[i] = std::min(valid_hi_[i], b.valid_hi_[i]);
        }
    }

    /// Unknown mass of a at exponents < valid_lo_a convolved with stored mass
    /// of b up to max_exp_b pollutes products below valid_lo_a + max_exp_b.
    void combine_mul_bounds(const Series& a, const Series& b) {
        for (int i = 0; i < env_->nvars(); ++i) {
            int lo = valid_lo_[i];
            if (a.valid_lo_[i] != -kNoBound && !b.terms_.empty())
                lo = std::max(lo, a.valid_lo_[i] + b.max_exp(i));
            if (b.valid_lo_[i] != -kNoBound && !a.terms_.empty())
                lo = std::max(lo, b.valid_lo_[i] + a.max_exp(i));
            if (a.valid_lo_[i] != -kNoBound && b.valid_lo_[i] != -kNoBound)
                lo = std::max(lo, a.valid_lo_[i] + b.valid_lo_[i]);
            valid_lo_[i] = lo;

            int hi = valid_hi_[i];
            if (a.valid_hi_[i] != kNoBound && !b.terms_.empty())
                hi = std::min(hi, a.valid_hi_[i] + b.min_exp(i));
            if (b.valid_hi_[i] != kNoBound && !a.terms_.empty())
                hi = std::min(hi, b.valid_hi_[i] + a.min_exp(i));
            if (a.valid_hi_[i] != kNoBound && b.valid_hi_[i] != kNoBound)
                hi = std::min(hi, a.valid_hi_[i] + b.valid_hi_[i]);
            valid_hi_[i] = hi;
        }
    }

    EnvPtr env_;
    std::map<ExpVec, Scalar> terms_;
    std::vector<int32_t> valid_lo_, valid_hi_;
};

inline Series operator*(const Scalar& c, const Series& s) { return s.scaled(c); }

/// cosh / sinh of a series with no constant term.
inline Series cosh_series(const Series& v) {
    Series r = Series::one(v.env());
    Series p = Series::one(v.env());
    Series v2 = v * v;
    for (int k = 1; k <= 200; ++k) {
        p = (p * v2).scaled(Scalar(Rat(1, (2 * k - 1) * (2 * k))));
        if (p.is_zero()) return r;
        r = r + p;
    }
    throw std::domain_error("cosh_series: argument not nilpotent");
}
inline Series sinh_series(const Series& v) {
    Series r = v;
    Series p = v;
    Series v2 = v * v;
    for (int k = 1; k <= 200; ++k) {
        p = (p * v2).scaled(Scalar(Rat(1, (2 * k) * (2 * k + 1))));
        if (p.is_zero()) return r;
        r = r + p;
    }
    throw std::domain_error("sinh_series: argument not nilpotent");
}
/// log(1 + u)' companion: arsinh, and sqrt via binomial series, both for
/// nilpotent arguments.
inline Series sqrt1p_series(const Series& u) {
    // (1+u)^(1/2) = sum binom(1/2, k) u^k
    Series r = Series::one(u.env());
    Series p = Series::one(u.env());
    Rat coeff(1);
    for (int k = 1; k <= 200; ++k) {
        coeff *= rat(3 - 2 * k, 2 * k); // binom(1/2,k)/binom(1/2,k-1)
        p = p * u;
        if (p.is_zero()) return r;
        r = r + p.scaled(Scalar(coeff));
    }
    throw std::domain_error("sqrt1p_series: argument not nilpotent");
}

/// Solve f(x) = target for a series x by Newton iteration from a seed with
/// correct leading behavior; each step doubles the correct order. The caller
/// supplies f, f', and an inverter for f'(x) (leading-monomial division).
inline Series newton_solve(const std::function<Series(const Series&)>& f,
                           const std::function<Series(const Series&)>& fprime,
                           const std::function<Series(const Series&)>& invert_fprime,
                           const Series& target, Series x, int max_iter = 24) {
    for (int it = 0; it < max_iter; ++it) {
        Series resid = f(x) - target;
        // converged when no certified residual remains (window-margin junk
        // is recorded in the validity bounds and is allowed to persist)
        if (!resid.certified_nonzero()) return x;
        x = x - resid * invert_fprime(fprime(x));
    }
    throw std::domain_error("newton_solve: did not converge under policy windows");
}

} // namespace hqe
