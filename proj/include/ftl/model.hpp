#ifndef FTL_MODEL_HPP
#define FTL_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ftl/density.hpp"
#include "ftl/errors.hpp"

namespace ftl {

enum class CaseLabel { P1, P2, P3, P4 };

inline const char* to_string(CaseLabel c) {
    switch (c) {
        case CaseLabel::P1: return "P1";
        case CaseLabel::P2: return "P2";
        case CaseLabel::P3: return "P3";
        case CaseLabel::P4: return "P4";
    }
    return "?";
}

inline CaseLabel case_from_string(const std::string& s) {
    if (s == "P1") return CaseLabel::P1;
    if (s == "P2") return CaseLabel::P2;
    if (s == "P3") return CaseLabel::P3;
    if (s == "P4") return CaseLabel::P4;
    throw invalid_input("unknown case label: " + s);
}

// ---------------------------------------------------------------------------
// Velocity law v(rho): non-negative, non-increasing, Lipschitz, v(0)=v_max.
// Registered analytic families carry exact Lipschitz constants and cutoff
// information; tabulated laws declare theirs explicitly.
// ---------------------------------------------------------------------------

enum class VelocityForm { linear, reciprocal, table };

class VelocityModel {
public:
    /// v(rho) = v_max * (1 - rho/rho_ref)_+ ; vanishes at and above rho_ref,
    /// so the cutoff density is rho_ref itself.
    static VelocityModel linear(double v_max, double rho_ref) {
        if (!(v_max > 0.0) || !(rho_ref > 0.0))
            throw invalid_input("linear velocity: v_max and rho_ref must be positive");
        VelocityModel m;
        m.form_ = VelocityForm::linear;
        m.v_max_ = v_max;
        m.rho_ref_ = rho_ref;
        m.r_max_ = rho_ref;
        m.lip_ = v_max / rho_ref;
        return m;
    }

    /// Same formula as `linear` but named by its role as the (V*) family.
    static VelocityModel cutoff_linear(double v_max, double r_max) {
        return linear(v_max, r_max);
    }

    /// v(rho) = v_max / (1 + rho); strictly positive everywhere (no cutoff).
    static VelocityModel reciprocal(double v_max) {
        if (!(v_max > 0.0)) throw invalid_input("reciprocal velocity: v_max must be positive");
        VelocityModel m;
        m.form_ = VelocityForm::reciprocal;
        m.v_max_ = v_max;
        m.lip_ = v_max;
        return m;
    }

    /// Reciprocal law truncated at r_max and renormalized so v(0) = v_max:
    ///   v(rho) = v_max * (1+r)/r * ( 1/(1+rho) - 1/(1+r) )  for rho < r,
    ///   v(rho) = 0                                          for rho >= r.
    static VelocityModel reciprocal_cutoff(double v_max, double r_max) {
        if (!(v_max > 0.0) || !(r_max > 0.0))
            throw invalid_input("reciprocal velocity: v_max and r_max must be positive");
        VelocityModel m;
        m.form_ = VelocityForm::reciprocal;
        m.v_max_ = v_max;
        m.r_max_ = r_max;
        m.lip_ = v_max * (1.0 + r_max) / r_max;
        return m;
    }

    /// Monotone non-increasing table (rho_0=0 .. rho_k, v_0=v_max .. v_k),
    /// linearly interpolated, constant beyond the last node. The Lipschitz
    /// constant must be declared by the caller.
    static VelocityModel table(std::vector<double> rho, std::vector<double> v, double lip,
                               std::optional<double> r_max = std::nullopt) {
        if (rho.size() != v.size() || rho.size() < 2)
            throw invalid_input("table velocity: need matching rho/v arrays of size >= 2");
        if (rho.front() != 0.0)
            throw invalid_input("table velocity: first node must be rho = 0");
        for (std::size_t i = 0; i + 1 < rho.size(); ++i) {
            if (!(rho[i] < rho[i + 1]))
                throw invalid_input("table velocity: rho nodes must be strictly increasing");
            if (v[i + 1] > v[i])
                throw invalid_input("table velocity: v must be non-increasing");
        }
        for (double s : v)
            if (!(s >= 0.0)) throw invalid_input("table velocity: v must be non-negative");
        if (lip < 0.0) throw invalid_input("table velocity: Lipschitz constant must be >= 0");
        VelocityModel m;
        m.form_ = VelocityForm::table;
        m.v_max_ = v.front();
        m.lip_ = lip;
        m.r_max_ = r_max;
        m.tab_rho_ = std::move(rho);
        m.tab_v_ = std::move(v);
        m.validate_table_consistency();
        return m;
    }

    double operator()(double rho) const { return eval(rho); }

    double eval(double rho) const {
        if (rho < 0.0) throw domain_error("eval_velocity: negative density");
        switch (form_) {
            case VelocityForm::linear:
                return rho >= rho_ref_ ? 0.0 : v_max_ * (1.0 - rho / rho_ref_);
            case VelocityForm::reciprocal:
                if (r_max_) {
                    double r = *r_max_;
                    if (rho >= r) return 0.0;
                    return v_max_ * (1.0 + r) / r * (1.0 / (1.0 + rho) - 1.0 / (1.0 + r));
                }
                return v_max_ / (1.0 + rho);
            case VelocityForm::table: {
                if (rho >= tab_rho_.back()) return tab_v_.back();
                auto it = std::upper_bound(tab_rho_.begin(), tab_rho_.end(), rho);
                std::size_t j = static_cast<std::size_t>(it - tab_rho_.begin()) - 1;
                double w = (rho - tab_rho_[j]) / (tab_rho_[j + 1] - tab_rho_[j]);
                return tab_v_[j] + w * (tab_v_[j + 1] - tab_v_[j]);
            }
        }
        return 0.0;
    }

    VelocityForm form() const { return form_; }
    double v_max() const { return v_max_; }
    double lipschitz() const { return lip_; }
    std::optional<double> r_max() const { return r_max_; }
    double rho_ref() const { return rho_ref_; }

    /// Table nodes as (rho, v) pairs; empty for analytic families.
    std::vector<std::pair<double, double>> table_nodes() const {
        std::vector<std::pair<double, double>> out;
        out.reserve(tab_rho_.size());
        for (std::size_t i = 0; i < tab_rho_.size(); ++i) out.emplace_back(tab_rho_[i], tab_v_[i]);
        return out;
    }

    /// Sample-grid validation of the (V)/(V*) invariants on [0, rho_hi].
    void validate(double rho_hi, int samples = 10000) const {
        double prev = eval(0.0);
        if (std::abs(prev - v_max_) > 1e-12 * std::max(1.0, v_max_))
            throw configuration_error("velocity: v(0) != v_max");
        for (int i = 1; i <= samples; ++i) {
            double r0 = rho_hi * (i - 1) / samples;
            double r1 = rho_hi * i / samples;
            double v0 = eval(r0), v1 = eval(r1);
            if (v1 < 0.0) throw configuration_error("velocity: negative value");
            if (v1 > v0 + 1e-12 * std::max(1.0, v_max_))
                throw configuration_error("velocity: not non-increasing");
            if (std::abs(v1 - v0) > lip_ * (r1 - r0) + 1e-12 * std::max(1.0, v_max_))
                throw configuration_error("velocity: declared Lipschitz constant violated");
        }
        if (r_max_) {
            if (eval(*r_max_) != 0.0 || eval(*r_max_ * 2.0) != 0.0)
                throw configuration_error("velocity: cutoff declared but v(r_max) != 0");
            if (eval(*r_max_ * 0.999999) <= 0.0)
                throw configuration_error("velocity: cutoff declared but v vanishes below r_max");
        }
    }

private:
    VelocityModel() = default;

    void validate_table_consistency() const {
        if (r_max_) {
            if (eval(*r_max_) != 0.0)
                throw invalid_input("table velocity: declared r_max but v(r_max) != 0");
        }
    }

    VelocityForm form_ = VelocityForm::linear;
    double v_max_ = 1.0;
    double rho_ref_ = 1.0;
    double lip_ = 1.0;
    std::optional<double> r_max_;
    std::vector<double> tab_rho_, tab_v_;
};

/// eval_velocity(model, rho) -> speed in [0, v_max].
inline double eval_velocity(const VelocityModel& m, double rho) { return m.eval(rho); }

// ---------------------------------------------------------------------------
// External drift potential phi(x) with exact derivative and sup-norm data.
// ---------------------------------------------------------------------------

enum class PotentialForm { constant, sinusoid, rational_odd, power_abs, table };

class Potential {
public:
    /// phi(x) = a.
    static Potential constant(double a, CaseLabel cs, std::pair<double, double> window = {-10.0, 10.0}) {
        Potential p(PotentialForm::constant, cs, window);
        p.a_ = a;
        p.sup_phi_ = std::abs(a);
        p.sup_dphi_ = 0.0;
        p.sup_ddphi_ = 0.0;
        p.validate_case();
        return p;
    }

    /// phi(x) = a + b*sin(c*x).
    static Potential sinusoid(double a, double b, double c, CaseLabel cs,
                              std::pair<double, double> window = {-10.0, 10.0}) {
        Potential p(PotentialForm::sinusoid, cs, window);
        p.a_ = a;
        p.b_ = b;
        p.c_ = c;
        p.sup_phi_ = std::abs(a) + std::abs(b);
        p.sup_dphi_ = std::abs(b * c);
        p.sup_ddphi_ = std::abs(b * c * c);
        p.validate_case();
        return p;
    }

    /// phi(x) = b * x / (1 + x^2). Odd and saturating; b > 0 gives P3
    /// (repulsive), b < 0 gives P4 (attractive).
    static Potential rational_odd(double b, CaseLabel cs, std::pair<double, double> window = {-10.0, 10.0}) {
        Potential p(PotentialForm::rational_odd, cs, window);
        p.b_ = b;
        p.sup_phi_ = 0.5 * std::abs(b);
        p.sup_dphi_ = std::abs(b);
        // max |phi''| = |b| / (12 - 8*sqrt(2)), attained at x = sqrt(2)-1
        p.sup_ddphi_ = std::abs(b) / (12.0 - 8.0 * std::sqrt(2.0));
        p.validate_case();
        return p;
    }

    /// phi(x) = sign * sgn(x) * |x|^alpha with alpha in (0,1): the odd
    /// power-law drift (sign -1 attracts, +1 repels). Not W^{2,inf} across
    /// x = 0: the derivative sup-norms are reported as +inf on any window
    /// containing the origin and phi sup-norm is taken over the declared
    /// window. Used by the guarded attractive-case demonstrator.
    static Potential power_abs(double sign, double alpha, CaseLabel cs,
                               std::pair<double, double> window = {-10.0, 10.0}) {
        if (!(alpha > 0.0) || !(alpha < 1.0))
            throw invalid_input("power_abs potential: alpha must lie in (0,1)");
        if (sign != 1.0 && sign != -1.0)
            throw invalid_input("power_abs potential: sign must be +1 or -1");
        Potential p(PotentialForm::power_abs, cs, window);
        p.b_ = sign;
        p.alpha_ = alpha;
        double w = std::max(std::abs(window.first), std::abs(window.second));
        p.sup_phi_ = std::pow(w, alpha);
        const double inf = std::numeric_limits<double>::infinity();
        if (window.first <= 0.0 && window.second >= 0.0) {
            p.sup_dphi_ = inf;
            p.sup_ddphi_ = inf;
        } else {
            double m = std::min(std::abs(window.first), std::abs(window.second));
            p.sup_dphi_ = alpha * std::pow(m, alpha - 1.0);
            p.sup_ddphi_ = alpha * (1.0 - alpha) * std::pow(m, alpha - 2.0);
        }
        p.validate_case();
        return p;
    }

    /// Tabulated potential, linear interpolation, clamped beyond the end
    /// nodes. Sup-norms must be declared (they cannot be inferred).
    static Potential table(std::vector<double> x, std::vector<double> phi, double sup_phi,
                           double sup_dphi, double sup_ddphi, CaseLabel cs) {
        if (x.size() != phi.size() || x.size() < 2)
            throw invalid_input("table potential: need matching x/phi arrays of size >= 2");
        for (std::size_t i = 0; i + 1 < x.size(); ++i)
            if (!(x[i] < x[i + 1]))
                throw invalid_input("table potential: x nodes must be strictly increasing");
        Potential p(PotentialForm::table, cs, {x.front(), x.back()});
        p.tab_x_ = std::move(x);
        p.tab_phi_ = std::move(phi);
        p.sup_phi_ = sup_phi;
        p.sup_dphi_ = sup_dphi;
        p.sup_ddphi_ = sup_ddphi;
        p.validate_case();
        return p;
    }

    double operator()(double x) const { return eval(x); }

    double eval(double x) const {
        switch (form_) {
            case PotentialForm::constant: return a_;
            case PotentialForm::sinusoid: return a_ + b_ * std::sin(c_ * x);
            case PotentialForm::rational_odd: return b_ * x / (1.0 + x * x);
            case PotentialForm::power_abs:
                if (x == 0.0) return 0.0;
                return b_ * (x > 0.0 ? 1.0 : -1.0) * std::pow(std::abs(x), alpha_);
            case PotentialForm::table: {
                if (x <= tab_x_.front()) return tab_phi_.front();
                if (x >= tab_x_.back()) return tab_phi_.back();
                auto it = std::upper_bound(tab_x_.begin(), tab_x_.end(), x);
                std::size_t j = static_cast<std::size_t>(it - tab_x_.begin()) - 1;
                double w = (x - tab_x_[j]) / (tab_x_[j + 1] - tab_x_[j]);
                return tab_phi_[j] + w * (tab_phi_[j + 1] - tab_phi_[j]);
            }
        }
        return 0.0;
    }

    double deriv(double x) const {
        switch (form_) {
            case PotentialForm::constant: return 0.0;
            case PotentialForm::sinusoid: return b_ * c_ * std::cos(c_ * x);
            case PotentialForm::rational_odd: {
                double d = 1.0 + x * x;
                return b_ * (1.0 - x * x) / (d * d);
            }
            case PotentialForm::power_abs:
                if (x == 0.0) return 0.0;  // measure-zero point, diagnostics only
                return b_ * alpha_ * std::pow(std::abs(x), alpha_ - 1.0);
            case PotentialForm::table: {
                if (x <= tab_x_.front() || x >= tab_x_.back()) return 0.0;
                auto it = std::upper_bound(tab_x_.begin(), tab_x_.end(), x);
                std::size_t j = static_cast<std::size_t>(it - tab_x_.begin()) - 1;
                return (tab_phi_[j + 1] - tab_phi_[j]) / (tab_x_[j + 1] - tab_x_[j]);
            }
        }
        return 0.0;
    }

    PotentialForm form() const { return form_; }
    CaseLabel case_label() const { return case_label_; }
    double sup_phi() const { return sup_phi_; }
    double sup_dphi() const { return sup_dphi_; }
    double sup_ddphi() const { return sup_ddphi_; }
    std::pair<double, double> window() const { return {window_lo_, window_hi_}; }

    /// Whether assumption (P) (phi in W^{2,inf}) holds for this potential.
    bool satisfies_p() const {
        return std::isfinite(sup_phi_) && std::isfinite(sup_dphi_) && std::isfinite(sup_ddphi_);
    }

private:
    Potential(PotentialForm f, CaseLabel cs, std::pair<double, double> window)
        : form_(f), case_label_(cs), window_lo_(window.first), window_hi_(window.second) {
        if (!(window_lo_ < window_hi_)) throw invalid_input("potential: bad window");
    }

    // Sign condition of the declared case, checked on a sample grid over the
    // window, plus |phi| <= sup_phi at every sample.
    void validate_case(int samples = 10000) const {
        const double tol = 1e-12;
        for (int i = 0; i <= samples; ++i) {
            double x = window_lo_ + (window_hi_ - window_lo_) * i / samples;
            double v = eval(x);
            if (std::abs(v) > sup_phi_ * (1.0 + 1e-12) + tol)
                throw configuration_error("potential: |phi| exceeds declared sup norm");
            bool ok = true;
            switch (case_label_) {
                case CaseLabel::P1: ok = v >= -tol; break;
                case CaseLabel::P2: ok = v <= tol; break;
                case CaseLabel::P3: ok = x * v >= -tol; break;
                case CaseLabel::P4: ok = x * v <= tol; break;
            }
            if (!ok)
                throw configuration_error(std::string("potential: sign condition of case ") +
                                          to_string(case_label_) + " violated");
        }
    }

    PotentialForm form_;
    CaseLabel case_label_;
    double window_lo_, window_hi_;
    double a_ = 0.0, b_ = 0.0, c_ = 1.0, alpha_ = 0.5;
    double sup_phi_ = 0.0, sup_dphi_ = 0.0, sup_ddphi_ = 0.0;
    std::vector<double> tab_x_, tab_phi_;
};

/// eval_potential(pot, x) -> drift with |result| <= sup_phi.
inline double eval_potential(const Potential& p, double x) { return p.eval(x); }

// ---------------------------------------------------------------------------
// Derived constants consumed by every bound formula.
// ---------------------------------------------------------------------------

struct ProblemConstants {
    double big_l;        // L  = v_max * ||phi||_inf   (speed bound)
    double big_l_prime;  // L' = v_max * ||phi'||_inf  (exponential rate)
    double r_bar;        // initial sup norm of the density
    std::optional<double> r_max;  // cutoff density when (V*) holds
};

inline ProblemConstants derive_constants(const VelocityModel& vel, const Potential& pot,
                                         const PiecewiseConstantDensity& initial) {
    if (initial.values.empty())
        throw invalid_input("derive_constants: empty initial density");
    ProblemConstants c;
    c.big_l = vel.v_max() * pot.sup_phi();
    c.big_l_prime = vel.v_max() * pot.sup_dphi();
    c.r_bar = initial.max_value();
    c.r_max = vel.r_max();
    if (!(c.r_bar > 0.0))
        throw invalid_input("derive_constants: initial density is identically zero");
    if (pot.case_label() == CaseLabel::P4 && c.r_max && c.r_bar > *c.r_max)
        throw configuration_error("case P4 requires ||rho_bar||_inf <= R_max");
    return c;
}

} // namespace ftl

#endif
