#include "steadystein/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace steadystein {
namespace detail {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, int max_depth) {
    struct Rec {
        const std::function<double(double)>& f;
        double operator()(double a, double fa, double b, double fb, double m, double fm,
                          double whole, double tol, int depth) const {
            const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
            const double flm = f(lm), frm = f(rm);
            const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
                return left + right + (left + right - whole) / 15.0;
            return (*this)(a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
                   (*this)(m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
        }
    };
    if (!(a < b)) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return Rec{f}(a, fa, b, fb, m, fm, whole, abs_tol, max_depth);
}

/**
 * A density piece on [lo, hi]: nu(x) = exp(logw + kappa_log) * shape(x),
 * where shape is the piece-local unnormalized form with shape anchored so
 * log_shape stays in a sane range.
 */
class Piece {
public:
    Piece(double lo, double hi) : lo_(lo), hi_(hi) {}
    virtual ~Piece() = default;

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    double logw = 0.0;

    virtual double log_shape(double x) const = 0;
    /// int_a^b x^j shape(x) dx with [a,b] inside [lo,hi]; a=-inf / b=+inf allowed
    /// where the piece extends that far.
    virtual double raw_partial(long j, double a, double b) const = 0;
    /// Largest value of log_shape on the piece (for negligibility pruning).
    virtual double max_log_shape() const = 0;
    /// Location of the shape maximum, clamped into [lo,hi].
    virtual double argmax() const = 0;

protected:
    double lo_, hi_;
};

/// shape(x) = exp(-(x-c)^2 / (2 s^2))
class GaussPiece final : public Piece {
public:
    GaussPiece(double lo, double hi, double c, double s) : Piece(lo, hi), c_(c), s_(s) {}

    double log_shape(double x) const override {
        const double t = (x - c_) / s_;
        return -0.5 * t * t;
    }
    double max_log_shape() const override { return log_shape(argmax()); }
    double argmax() const override { return std::clamp(c_, lo_, hi_); }

    double raw_partial(long j, double a, double b) const override {
        a = std::max(a, lo_);
        b = std::min(b, hi_);
        if (!(a < b)) return 0.0;
        // binomial expansion around the center
        const double u = a == -kInf ? -kInf : a - c_;
        const double v = b == kInf ? kInf : b - c_;
        std::vector<double> G(static_cast<size_t>(j) + 1);
        G[0] = central(0, u, v);
        if (j >= 1) G[1] = central(1, u, v);
        for (long i = 2; i <= j; ++i) G[static_cast<size_t>(i)] = central(i, u, v);
        double sum = 0.0, binom = 1.0;
        for (long i = 0; i <= j; ++i) {
            // C(j,i) * c^{j-i} * G_i
            sum += binom * std::pow(c_, static_cast<double>(j - i)) * G[static_cast<size_t>(i)];
            binom = binom * static_cast<double>(j - i) / static_cast<double>(i + 1);
        }
        return sum;
    }

private:
    double edge(double t, long pw) const { // t^{pw} e^{-t^2/2s^2}, 0 at +-inf
        if (t == kInf || t == -kInf) return 0.0;
        return std::pow(t, static_cast<double>(pw)) * std::exp(-0.5 * t * t / (s_ * s_));
    }
    double central(long i, double u, double v) const {
        if (i == 0) {
            const double ru = u == -kInf ? -kInf : u / (s_ * std::sqrt(2.0));
            const double rv = v == kInf ? kInf : v / (s_ * std::sqrt(2.0));
            const double pref = s_ * std::sqrt(M_PI / 2.0);
            if (ru >= 0.0)
                return pref * (std::erfc(ru) - (rv == kInf ? 0.0 : std::erfc(rv)));
            if (rv <= 0.0)
                return pref * (std::erfc(-rv) - (ru == -kInf ? 0.0 : std::erfc(-ru)));
            return pref * (std::erf(rv == kInf ? kInf : rv) - std::erf(ru));
        }
        if (i == 1) return s_ * s_ * (edge(u, 0) - edge(v, 0));
        return s_ * s_ * (edge(u, i - 1) - edge(v, i - 1)) +
               static_cast<double>(i - 1) * s_ * s_ * central(i - 2, u, v);
    }
    double c_, s_;
};

/// shape(x) = exp(-r (x - x0)), on [x0, inf)
class ExpPiece final : public Piece {
public:
    ExpPiece(double x0, double r) : Piece(x0, kInf), x0_(x0), r_(r) {}

    double log_shape(double x) const override { return -r_ * (x - x0_); }
    double max_log_shape() const override { return 0.0; }
    double argmax() const override { return lo_; }

    double raw_partial(long j, double a, double b) const override {
        a = std::max(a, lo_);
        if (!(a < b)) return 0.0;
        if (j == 0) {
            if (b == kInf) return std::exp(-r_ * (a - x0_)) / r_;
            return std::exp(-r_ * (a - x0_)) * (-std::expm1(-r_ * (b - a))) / r_;
        }
        if (j == 1 && b != kInf) {
            const double d = b - a;
            const double em = -std::expm1(-r_ * d); // 1 - e^{-r d}
            return std::exp(-r_ * (a - x0_)) *
                   ((a / r_ + 1.0 / (r_ * r_)) * em - (d / r_) * std::exp(-r_ * d));
        }
        return tail(j, a) - (b == kInf ? 0.0 : tail(j, b));
    }

private:
    double tail(long j, double a) const { // int_a^inf x^j e^{-r(x-x0)}
        double e = std::exp(-r_ * (a - x0_)) / r_;
        for (long i = 1; i <= j; ++i)
            e = (std::pow(a, static_cast<double>(i)) * std::exp(-r_ * (a - x0_)) +
                 static_cast<double>(i) * e) / r_;
        return e;
    }
    double x0_, r_;
};

/// Middle piece of the Erlang-C state-dependent density on [-1/delta, -zeta]:
/// shape(x) = (2/(2+delta x)) exp((4/delta^2) log1p(delta x/2) - 2x/delta),
/// anchored so log_shape(0) = 0.
class StateDepMidPiece final : public Piece {
public:
    StateDepMidPiece(double lo, double hi, double delta) : Piece(lo, hi), delta_(delta) {}

    double log_shape(double x) const override {
        const double l1 = std::log1p(0.5 * delta_ * x);
        return (4.0 / (delta_ * delta_)) * l1 - 2.0 * x / delta_ - l1;
    }
    double argmax() const override { return std::clamp(-0.5 * delta_, lo_, hi_); }
    double max_log_shape() const override { return log_shape(argmax()); }

    double raw_partial(long j, double a, double b) const override {
        a = std::max(a, lo_);
        b = std::min(b, hi_);
        if (!(a < b)) return 0.0;
        auto f = [&](double x) {
            return std::pow(x, static_cast<double>(j)) * std::exp(log_shape(x));
        };
        // split exactly at the interior knots so each panel is smooth
        std::vector<double> knots{a};
        for (double k : {argmax(), 0.0})
            if (k > a && k < b) knots.push_back(k);
        knots.push_back(b);
        std::sort(knots.begin(), knots.end());
        double total = 0.0;
        for (size_t i = 0; i + 1 < knots.size(); ++i)
            total += adaptive_simpson(f, knots[i], knots[i + 1], 1e-12);
        return total;
    }

private:
    double delta_;
};

} // namespace detail

using detail::Piece;

DensityCurve::DensityCurve(QueueParams params, DiffusionMode mode)
    : params_(params), mode_(mode) {}

DensityCurve::~DensityCurve() = default;
DensityCurve::DensityCurve(DensityCurve&&) noexcept = default;

DensityCurve::DensityCurve(const DensityCurve& o) : DensityCurve(build(o.params_, o.mode_)) {}

DensityCurve DensityCurve::build(const QueueParams& p, DiffusionMode mode) {
    DensityCurve c(p, mode);
    const double mu = p.mu();
    const double zeta = p.zeta();
    const double az = p.abs_zeta();

    if (mode == DiffusionMode::StateDependent) {
        if (!p.is_erlang_c())
            throw std::invalid_argument(
                "DensityCurve: state-dependent mode is defined for the Erlang-C model");
        const double delta = p.delta();
        const double left = -1.0 / delta;
        // left Gaussian: exponent -x^2  (variance 1/2)
        c.pieces_.push_back(std::make_unique<detail::GaussPiece>(
            -std::numeric_limits<double>::infinity(), left, 0.0, std::sqrt(0.5)));
        c.pieces_.push_back(std::make_unique<detail::StateDepMidPiece>(left, az, delta));
        c.pieces_.push_back(std::make_unique<detail::ExpPiece>(az, 2.0 * az / (2.0 + delta * az)));
        c.breakpoints_ = {left, az};
    } else if (p.is_erlang_c()) {
        // Gaussian left of -zeta, exponential right of it
        c.pieces_.push_back(std::make_unique<detail::GaussPiece>(
            -std::numeric_limits<double>::infinity(), az, 0.0, 1.0));
        c.pieces_.push_back(std::make_unique<detail::ExpPiece>(az, az));
        c.breakpoints_ = {az};
    } else {
        const double a = p.alpha();
        const double s2 = std::sqrt(mu / a);
        if (zeta <= 0.0) {
            // underloaded: N(0,1) left of -zeta = az, then a Gaussian with
            // center az + mu*zeta/alpha and sd sqrt(mu/alpha)
            c.pieces_.push_back(std::make_unique<detail::GaussPiece>(
                -std::numeric_limits<double>::infinity(), az, 0.0, 1.0));
            c.pieces_.push_back(std::make_unique<detail::GaussPiece>(
                az, std::numeric_limits<double>::infinity(), az + mu * zeta / a, s2));
            c.breakpoints_ = {az};
        } else {
            // overloaded: Gaussian(center zeta*(alpha/mu - 1), sd 1) left of
            // -zeta, Gaussian(0, sqrt(mu/alpha)) right of it
            c.pieces_.push_back(std::make_unique<detail::GaussPiece>(
                -std::numeric_limits<double>::infinity(), -zeta, -zeta + (a / mu) * zeta, 1.0));
            c.pieces_.push_back(std::make_unique<detail::GaussPiece>(
                -zeta, std::numeric_limits<double>::infinity(), 0.0, s2));
            c.breakpoints_ = {-zeta};
        }
    }

    // chain weights for continuity of nu at the piece boundaries
    // anchor: the piece containing 0 gets logw = 0
    size_t anchor = 0;
    for (size_t i = 0; i < c.pieces_.size(); ++i)
        if (c.pieces_[i]->lo() <= 0.0 && 0.0 <= c.pieces_[i]->hi()) anchor = i;
    c.pieces_[anchor]->logw = 0.0;
    for (size_t i = anchor; i-- > 0;) {
        const double b = c.pieces_[i]->hi();
        c.pieces_[i]->logw = c.pieces_[i + 1]->logw + c.pieces_[i + 1]->log_shape(b) -
                             c.pieces_[i]->log_shape(b);
    }
    for (size_t i = anchor + 1; i < c.pieces_.size(); ++i) {
        const double b = c.pieces_[i]->lo();
        c.pieces_[i]->logw = c.pieces_[i - 1]->logw + c.pieces_[i - 1]->log_shape(b) -
                             c.pieces_[i]->log_shape(b);
    }

    // normalization with negligible pieces pruned in log space
    double peak = -std::numeric_limits<double>::infinity();
    for (auto& pc : c.pieces_) peak = std::max(peak, pc->logw + pc->max_log_shape());
    double total = 0.0;
    std::vector<double> masses(c.pieces_.size(), 0.0);
    c.skip_.assign(c.pieces_.size(), 0);
    for (size_t i = 0; i < c.pieces_.size(); ++i) {
        auto& pc = c.pieces_[i];
        if (pc->logw + pc->max_log_shape() < peak - 600.0) {
            c.skip_[i] = 1; // piece mass < e^{-600}: exact zero for every functional here
            continue;
        }
        masses[i] = std::exp(pc->logw - peak) * pc->raw_partial(0, pc->lo(), pc->hi());
        total += masses[i];
    }
    if (!(total > 0.0) || !std::isfinite(total))
        throw std::runtime_error("DensityCurve: non-integrable configuration");
    c.log_kappa_ = -(peak + std::log(total));
    c.mass_below_.assign(c.pieces_.size() + 1, 0.0);
    for (size_t i = 0; i < c.pieces_.size(); ++i)
        c.mass_below_[i + 1] = c.mass_below_[i] + masses[i] / total;
    return c;
}

size_t DensityCurve::piece_index(double x) const {
    for (size_t i = 0; i + 1 < pieces_.size(); ++i)
        if (x <= pieces_[i]->hi()) return i;
    return pieces_.size() - 1;
}

double DensityCurve::log_pdf(double x) const {
    const auto& pc = pieces_[piece_index(x)];
    return pc->logw + pc->log_shape(x) + log_kappa_;
}

double DensityCurve::pdf(double x) const { return std::exp(log_pdf(x)); }

double DensityCurve::cdf(double x) const {
    const size_t i = piece_index(x);
    const auto& pc = pieces_[i];
    double within = 0.0;
    if (!skip_[i]) within = std::exp(pc->logw + log_kappa_) * pc->raw_partial(0, pc->lo(), x);
    return std::min(mass_below_[i] + within, 1.0);
}

double DensityCurve::sf(double x) const {
    const size_t i = piece_index(x);
    double s = 0.0;
    for (size_t k = i + 1; k < pieces_.size(); ++k)
        s += mass_below_[k + 1] - mass_below_[k];
    const auto& pc = pieces_[i];
    if (!skip_[i]) s += std::exp(pc->logw + log_kappa_) * pc->raw_partial(0, x, pc->hi());
    return std::min(s, 1.0);
}

double DensityCurve::moment(long m) const {
    if (m < 0 || m > 20) throw std::invalid_argument("moment: need 0 <= m <= 20");
    double s = 0.0;
    for (size_t i = 0; i < pieces_.size(); ++i) {
        if (skip_[i]) continue;
        s += std::exp(pieces_[i]->logw + log_kappa_) *
             pieces_[i]->raw_partial(m, pieces_[i]->lo(), pieces_[i]->hi());
    }
    return s;
}

double DensityCurve::partial_moment(long j, double x) const {
    const size_t i = piece_index(x);
    double s = 0.0;
    for (size_t k = 0; k < i; ++k) {
        if (skip_[k]) continue;
        s += std::exp(pieces_[k]->logw + log_kappa_) *
             pieces_[k]->raw_partial(j, pieces_[k]->lo(), pieces_[k]->hi());
    }
    if (!skip_[i])
        s += std::exp(pieces_[i]->logw + log_kappa_) *
             pieces_[i]->raw_partial(j, pieces_[i]->lo(), x);
    return s;
}

double DensityCurve::partial_moment_right(long j, double x) const {
    const size_t i = piece_index(x);
    double s = 0.0;
    for (size_t k = i + 1; k < pieces_.size(); ++k) {
        if (skip_[k]) continue;
        s += std::exp(pieces_[k]->logw + log_kappa_) *
             pieces_[k]->raw_partial(j, pieces_[k]->lo(), pieces_[k]->hi());
    }
    if (!skip_[i])
        s += std::exp(pieces_[i]->logw + log_kappa_) *
             pieces_[i]->raw_partial(j, x, pieces_[i]->hi());
    return s;
}

double DensityCurve::interval_prob(double lo, double hi) const {
    if (!(lo < hi)) return 0.0;
    double s = 0.0;
    for (size_t i = 0; i < pieces_.size(); ++i) {
        if (skip_[i]) continue;
        const double a = std::max(lo, pieces_[i]->lo());
        const double b = std::min(hi, pieces_[i]->hi());
        if (a < b) s += std::exp(pieces_[i]->logw + log_kappa_) * pieces_[i]->raw_partial(0, a, b);
    }
    return s;
}

double DensityCurve::interval_first_moment(double lo, double hi) const {
    if (!(lo < hi)) return 0.0;
    double s = 0.0;
    for (size_t i = 0; i < pieces_.size(); ++i) {
        if (skip_[i]) continue;
        const double a = std::max(lo, pieces_[i]->lo());
        const double b = std::min(hi, pieces_[i]->hi());
        if (a < b) s += std::exp(pieces_[i]->logw + log_kappa_) * pieces_[i]->raw_partial(1, a, b);
    }
    return s;
}

double DensityCurve::sup_density() const {
    double s = 0.0;
    for (const auto& pc : pieces_) { // pruned pieces evaluate to ~0 via log_pdf
        s = std::max(s, std::exp(pc->logw + pc->log_shape(pc->argmax()) + log_kappa_));
        if (std::isfinite(pc->lo())) s = std::max(s, pdf(pc->lo()));
        if (std::isfinite(pc->hi())) s = std::max(s, pdf(pc->hi()));
    }
    return s;
}

} // namespace steadystein
