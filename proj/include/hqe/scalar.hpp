#pragma once

#include <gmpxx.h>

#include <iosfwd>
#include <sstream>
#include <stdexcept>
#include <string>

namespace hqe {

using Rat = mpq_class;

/// mpq_class(num, den) does not canonicalize; always build rationals here.
inline Rat rat(long num, long den = 1) {
    Rat r(num, den);
    r.canonicalize();
    return r;
}

/// Element of Q(i, sqrt2) = Q(zeta_8), stored as a + b*sqrt2 + c*i + d*i*sqrt2.
///
/// Every verdict-level quantity of the engine is a plain rational; the two
/// extra generators are needed only by the normalized canonical frame of the
/// CP^1 mirror (1/sqrt(2s) and 1/sqrt(-2s) factors) and cancel from final
/// results. Arithmetic is exact throughout.
class Scalar {
  public:
    Scalar() : a_(0), b_(0), c_(0), d_(0) {}
    Scalar(long v) : a_(v), b_(0), c_(0), d_(0) {}
    Scalar(const Rat& v) : a_(v), b_(0), c_(0), d_(0) { a_.canonicalize(); }
    Scalar(Rat a, Rat b, Rat c, Rat d)
        : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)) {
        a_.canonicalize();
        b_.canonicalize();
        c_.canonicalize();
        d_.canonicalize();
    }

    static Scalar sqrt2() { return Scalar(0, 1, 0, 0); }
    static Scalar i() { return Scalar(0, 0, 1, 0); }

    const Rat& rational_part() const { return a_; }

    bool is_zero() const { return a_ == 0 && b_ == 0 && c_ == 0 && d_ == 0; }
    bool is_rational() const { return b_ == 0 && c_ == 0 && d_ == 0; }

    /// Throws unless the value lies in Q.
    Rat to_rational() const {
        if (!is_rational()) throw std::domain_error("Scalar: not rational: " + str());
        return a_;
    }

    Scalar operator-() const { return Scalar(-a_, -b_, -c_, -d_); }

    Scalar& operator+=(const Scalar& o) {
        a_ += o.a_; b_ += o.b_; c_ += o.c_; d_ += o.d_;
        return *this;
    }
    Scalar& operator-=(const Scalar& o) {
        a_ -= o.a_; b_ -= o.b_; c_ -= o.c_; d_ -= o.d_;
        return *this;
    }
    Scalar& operator*=(const Scalar& o) { *this = *this * o; return *this; }

    friend Scalar operator+(Scalar x, const Scalar& y) { x += y; return x; }
    friend Scalar operator-(Scalar x, const Scalar& y) { x -= y; return x; }

    // (a + b r + c i + d i r)(a' + b' r + c' i + d' i r), r^2 = 2, i^2 = -1.
    friend Scalar operator*(const Scalar& x, const Scalar& y) {
        Rat two(2);
        Rat a = x.a_ * y.a_ + two * x.b_ * y.b_ - x.c_ * y.c_ - two * x.d_ * y.d_;
        Rat b = x.a_ * y.b_ + x.b_ * y.a_ - x.c_ * y.d_ - x.d_ * y.c_;
        Rat c = x.a_ * y.c_ + x.c_ * y.a_ + two * (x.b_ * y.d_ + x.d_ * y.b_);
        Rat d = x.a_ * y.d_ + x.d_ * y.a_ + x.b_ * y.c_ + x.c_ * y.b_;
        return Scalar(a, b, c, d);
    }

    /// Multiplicative inverse via the two conjugations (i -> -i, sqrt2 -> -sqrt2).
    Scalar inverse() const {
        if (is_zero()) throw std::domain_error("Scalar: division by zero");
        Scalar ci(a_, b_, -c_, -d_);              // complex conjugate
        Scalar m = *this * ci;                    // in Q(sqrt2)
        Scalar cr(m.a_, -m.b_, m.c_, -m.d_);      // sqrt2 conjugate
        Scalar n = m * cr;                        // in Q
        if (!n.is_rational() || n.a_ == 0) throw std::domain_error("Scalar: bad norm");
        Rat inv = 1 / n.a_;
        Scalar res = ci * cr;
        return Scalar(res.a_ * inv, res.b_ * inv, res.c_ * inv, res.d_ * inv);
    }

    friend Scalar operator/(const Scalar& x, const Scalar& y) { return x * y.inverse(); }

    friend bool operator==(const Scalar& x, const Scalar& y) {
        return x.a_ == y.a_ && x.b_ == y.b_ && x.c_ == y.c_ && x.d_ == y.d_;
    }
    friend bool operator!=(const Scalar& x, const Scalar& y) { return !(x == y); }

    /// "p/q" for rationals, else sum of nonzero components with r2 / i markers.
    std::string str() const {
        if (is_rational()) return a_.get_str();
        std::ostringstream os;
        bool first = true;
        auto emit = [&](const Rat& v, const char* tag) {
            if (v == 0) return;
            if (!first && v > 0) os << "+";
            os << v.get_str() << tag;
            first = false;
        };
        emit(a_, "");
        emit(b_, "*r2");
        emit(c_, "*i");
        emit(d_, "*i*r2");
        return os.str();
    }

    friend std::ostream& operator<<(std::ostream& os, const Scalar& s);

  private:
    Rat a_, b_, c_, d_;
};

inline std::ostream& operator<<(std::ostream& os, const Scalar& s) { return os << s.str(); }

} // namespace hqe
