#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdlab/dyadic.hpp"

namespace sdlab {

/// Weights w_1, ..., w_m on one grid, strictly positive, with product w.
class WeightVector {
public:
    explicit WeightVector(std::vector<GridFunction> w) : w_(std::move(w)) {
        if (w_.empty()) throw ConfigError("weight vector needs at least one weight");
        product_ = GridFunction::constant(w_.front().dim(), w_.front().depth(), 1.0);
        for (const auto& g : w_) {
            if (g.dim() != product_.dim() || g.depth() != product_.depth()) throw ConfigError("weights on different grids");
            for (std::size_t c = 0; c < g.size(); ++c) {
                if (!(g[c] > 0) || !std::isfinite(g[c])) throw DomainError("weights must be positive and finite");
                product_[c] *= g[c];
            }
        }
    }

    std::size_t size() const { return w_.size(); }
    const GridFunction& operator[](std::size_t j) const { return w_[j]; }
    const GridFunction& product() const { return product_; }

private:
    std::vector<GridFunction> w_;
    GridFunction product_;
};

/// Cell averages of x_1^a; exact, and for d = 2 a function of the first coordinate only.
inline GridFunction power_weight(int d, int L, double a) {
    if (!(a > -1)) throw DomainError("power weight exponent must exceed -1");
    GridFunction w(d, L);
    const std::size_t n = std::size_t{1} << L;
    const double h = std::ldexp(1.0, -L);
    for (std::size_t c = 0; c < w.size(); ++c) {
        const double x0 = static_cast<double>(c % n) * h, x1 = x0 + h;
        w[c] = a == 0 ? 1.0 : (std::pow(x1, a + 1) - std::pow(x0, a + 1)) / ((a + 1) * h);
    }
    return w;
}

namespace detail {

/// Mean of x^e over [lo, hi) ⊆ [0, 1).
inline double power_mean(double lo, double hi, double e) {
    if (!(e > -1)) throw DomainError("x^e is not locally integrable for e <= -1");
    if (e == 0) return 1.0;
    return (std::pow(hi, e + 1) - std::pow(lo, e + 1)) / ((e + 1) * (hi - lo));
}

/// ⟨x_1^a⟩_{ρ,Q} for the continuum weight, Q clipped to the unit cube.
inline double power_average(const DyadicCube& q, double a, Exponent rho) {
    const double lo = std::max(0.0, q.lower(0)), hi = std::min(1.0, q.upper(0));
    if (rho.is_infinite()) {
        if (a < 0 && lo == 0) return INFINITY;
        return std::pow(a >= 0 ? hi : lo, a);
    }
    return std::pow(power_mean(lo, hi, a * rho.value()), rho.reciprocal());
}

} // namespace detail

/// Per-cell (⟨x_1^a⟩_{p,cell}): with it, ‖f x_1^a‖_{L^p} is exact for every f constant on cells.
inline GridFunction power_weight_for(int d, int L, double a, Exponent p) {
    GridFunction w(d, L);
    for (std::size_t c = 0; c < w.size(); ++c) w[c] = detail::power_average(w.cell_cube(c), a, p);
    return w;
}

struct MuckenhouptValue {
    double value = 0;
    DyadicCube argmax{};
};

/// [w⃗]_{p⃗,(r⃗,s)} = max_Q Π⟨w_j^{-1}⟩_{1/(1/r_j−1/p_j),Q} · ⟨w⟩_{1/(1/p−1/s),Q} over the cubes of D.
inline MuckenhouptValue muckenhoupt_constant(const WeightVector& w, const Exponents& p, const Exponents& r, Exponent s,
                                             const CubeCollection& D) {
    const std::size_t m = w.size();
    if (p.size() != m || r.size() != m) throw ConfigError("need one exponent pair per weight");
    for (std::size_t j = 0; j < m; ++j)
        if (r[j].reciprocal() < p[j].reciprocal()) throw DomainError("need r_j <= p_j");
    const double pinv = harmonic_sum(p).reciprocal();
    if (pinv < s.reciprocal()) throw DomainError("need p <= s");
    if (D.dim() != w[0].dim() || D.depth() != w[0].depth()) throw ConfigError("weights and cubes on different grids");

    std::vector<double> value(D.size(), 1.0);
    for (std::size_t j = 0; j < m; ++j) {
        std::vector<double> inv(w[j].size());
        for (std::size_t c = 0; c < inv.size(); ++c) inv[c] = 1 / w[j][c];
        const auto a = D.averages(inv, Exponent::from_reciprocal(r[j].reciprocal() - p[j].reciprocal()));
        for (std::size_t i = 0; i < value.size(); ++i) value[i] *= a[i];
    }
    const auto a = D.averages(w.product().values(), Exponent::from_reciprocal(pinv - s.reciprocal()));
    MuckenhouptValue out;
    for (std::size_t i = 0; i < value.size(); ++i) {
        value[i] *= a[i];
        if (value[i] > out.value) out = {value[i], D.cube(i)};
    }
    return out;
}

struct StableMuckenhoupt {
    double value = 0;     ///< constant at the finer depth
    double coarse = 0;    ///< constant one level coarser
    bool stable = false;  ///< the two agree within 5%
};

/// Evaluates the constant at depths L−1 and L, weights regenerated at each depth.
template <class MakeWeights>
StableMuckenhoupt stable_muckenhoupt(MakeWeights make, int d, int L, const Exponents& p, const Exponents& r, Exponent s,
                                     bool all_shifts = true) {
    if (L < 1) throw ConfigError("stabilisation needs depth at least 1");
    auto at = [&](int depth) {
        const auto D = all_shifts ? CubeCollection::all_shifts(d, depth) : CubeCollection::of(build_grid(d, depth));
        return muckenhoupt_constant(make(depth), p, r, s, D).value;
    };
    StableMuckenhoupt out;
    out.coarse = at(L - 1);
    out.value = at(L);
    out.stable = std::abs(out.value - out.coarse) <= 0.05 * out.value;
    return out;
}

/// [w⃗] for the continuum power weights w_j = x_1^{a_j}, exact averages, over the cubes of D.
inline MuckenhouptValue power_muckenhoupt(const std::vector<double>& a, const Exponents& p, const Exponents& r,
                                          Exponent s, const CubeCollection& D) {
    const std::size_t m = a.size();
    if (p.size() != m || r.size() != m) throw ConfigError("need one exponent pair per weight");
    for (std::size_t j = 0; j < m; ++j)
        if (r[j].reciprocal() < p[j].reciprocal()) throw DomainError("need r_j <= p_j");
    const double pinv = harmonic_sum(p).reciprocal();
    if (pinv < s.reciprocal()) throw DomainError("need p <= s");
    double total = 0;
    for (double v : a) total += v;
    MuckenhouptValue out;
    for (std::size_t i = 0; i < D.size(); ++i) {
        const auto& q = D.cube(i);
        double v = detail::power_average(q, total, Exponent::from_reciprocal(pinv - s.reciprocal()));
        for (std::size_t j = 0; j < m; ++j)
            v *= detail::power_average(q, -a[j], Exponent::from_reciprocal(r[j].reciprocal() - p[j].reciprocal()));
        if (v > out.value) out = {v, q};
    }
    return out;
}

/// An exponent together with which of the two competing terms attains it.
struct Gamma {
    double value = 0;
    std::string binding; ///< "r-side" or "s-side"
};

inline nlohmann::json to_json(const Gamma& g) { return {{"gamma", g.value}, {"binding_term", g.binding}}; }

namespace detail {

inline void need_r_below_p(const Exponents& p, const Exponents& r) {
    if (p.size() != r.size() || p.empty()) throw ConfigError("p and r tuples must have equal positive length");
    for (std::size_t j = 0; j < p.size(); ++j)
        if (!(r[j].reciprocal() > p[j].reciprocal()))
            throw DomainError("violated r_" + std::to_string(j + 1) + " < p_" + std::to_string(j + 1));
}

inline double r_side(const Exponents& p, const Exponents& r, const Exponents* t = nullptr) {
    double g = 0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        const double num = r[j].reciprocal() - (t ? (*t)[j].reciprocal() : 0.0);
        g = std::max(g, num / (r[j].reciprocal() - p[j].reciprocal()));
    }
    return g;
}

inline Gamma pick(double rs, double ss) { return rs >= ss ? Gamma{rs, "r-side"} : Gamma{ss, "s-side"}; }

} // namespace detail

/// max_j (1/r_j)/(1/r_j − 1/p_j).
inline Gamma maximal_weighted_exponent(const Exponents& p, const Exponents& r) {
    detail::need_r_below_p(p, r);
    return {detail::r_side(p, r), "r-side"};
}

/// max{ (1/r_j)/(1/r_j − 1/p_j), (1/q − 1/s)/(1/p − 1/s) }.
inline Gamma transfer_exponent(const Exponents& p, Exponent q, const Exponents& r, Exponent s) {
    detail::need_r_below_p(p, r);
    const double pinv = harmonic_sum(p).reciprocal();
    if (!(pinv > s.reciprocal())) throw DomainError("violated p < s");
    if (q.reciprocal() < pinv) throw DomainError("violated q <= p");
    return detail::pick(detail::r_side(p, r), (q.reciprocal() - s.reciprocal()) / (pinv - s.reciprocal()));
}

/// max{ (1/r_j − 1/t_j)/(1/r_j − 1/p_j), (1/t − 1/s)/(1/p − 1/s) }.
inline Gamma extrapolation_exponent(const Exponents& p, const Exponents& t, const Exponents& r, Exponent s) {
    detail::need_r_below_p(p, r);
    if (t.size() != p.size()) throw ConfigError("t tuple has the wrong length");
    for (std::size_t j = 0; j < t.size(); ++j)
        if (t[j].reciprocal() > r[j].reciprocal()) throw DomainError("violated r_" + std::to_string(j + 1) + " <= t_" + std::to_string(j + 1));
    const double pinv = harmonic_sum(p).reciprocal(), tinv = harmonic_sum(t).reciprocal();
    if (!(pinv > s.reciprocal())) throw DomainError("violated p < s");
    if (tinv < s.reciprocal()) throw DomainError("violated t <= s");
    return detail::pick(detail::r_side(p, r, &t), (tinv - s.reciprocal()) / (pinv - s.reciprocal()));
}

/// The intermediate τ with 1/τ = (1/r − 1/s + 1/q)/(1/q), and t_j = r_j/τ.
struct Composition {
    double tau = 0;
    Exponents t;
};

inline Composition composition(Exponent q, const Exponents& r, Exponent s) {
    const double rinv = harmonic_sum(r).reciprocal();
    if (!(q.reciprocal() > s.reciprocal())) throw DomainError("violated q < s");
    if (!(rinv > s.reciprocal())) throw DomainError("violated r < s");
    Composition c;
    c.tau = q.reciprocal() / (rinv - s.reciprocal() + q.reciprocal());
    for (const auto& e : r) c.t.push_back(Exponent::from_reciprocal(c.tau * e.reciprocal()));
    return c;
}

/// The ℓ^t tensor-extension exponent for an operator with q₀-type pointwise sparse bounds.
inline Gamma ellt_exponent(const Exponents& p, const Exponents& r, Exponent q0, const Exponents& t) {
    detail::need_r_below_p(p, r);
    if (t.size() != p.size()) throw ConfigError("t tuple has the wrong length");
    for (std::size_t j = 0; j < t.size(); ++j)
        if (!(r[j].reciprocal() > t[j].reciprocal()))
            throw DomainError("violated r_" + std::to_string(j + 1) + " < t_" + std::to_string(j + 1));
    const double pinv = harmonic_sum(p).reciprocal(), tinv = harmonic_sum(t).reciprocal();
    if (pinv == 0) throw DomainError("violated p < inf");
    if (tinv == 0) throw DomainError("violated t < inf");
    if (!(harmonic_sum(r).reciprocal() > tinv)) throw DomainError("violated r < t");
    const double second = (tinv <= q0.reciprocal() ? q0.reciprocal() : tinv) / pinv;
    return detail::pick(detail::r_side(p, r), second);
}

struct BhtResult {
    bool member = false;
    double closed_form = 0;         ///< max{1/r₁,½} + max{1/r₂,½} + max{1/s′,½}
    std::array<double, 3> theta{};  ///< witness when member
};

/// Membership in the (r₁, r₂, s) region of the bilinear Hilbert transform sparse bounds.
inline BhtResult bht_region(double r1, double r2, double s) {
    for (double v : {r1, r2, s})
        if (!(v > 1) || !std::isfinite(v)) throw DomainError("violated 1 < r1, r2, s < inf");
    BhtResult out;
    out.closed_form = std::max(1 / r1, 0.5) + std::max(1 / r2, 0.5) + std::max(1 - 1 / s, 0.5);
    out.member = out.closed_form < 2;
    if (!out.member) return out;
    // θ₁ > 2/r₁ − 1, θ₂ > 2/r₂ − 1, θ₃ > 1 − 2/s, all in [0,1), summing to 1.
    const std::array<double, 3> low{std::max(2 / r1 - 1, 0.0), std::max(2 / r2 - 1, 0.0), std::max(1 - 2 / s, 0.0)};
    const double slack = (1 - low[0] - low[1] - low[2]) / 3;
    for (int i = 0; i < 3; ++i) out.theta[i] = low[i] + slack;
    return out;
}

/// Whether θ⃗ satisfies the three strict inequalities with θᵢ ∈ [0,1) and Σθᵢ = 1 (to 1e-12).
inline bool bht_witness_valid(double r1, double r2, double s, const std::array<double, 3>& th) {
    for (double t : th)
        if (t < 0 || t >= 1) return false;
    if (std::abs(th[0] + th[1] + th[2] - 1) > 1e-12) return false;
    return 1 / r1 < (1 + th[0]) / 2 && 1 / r2 < (1 + th[1]) / 2 && 1 / s > (1 - th[2]) / 2;
}

/// θ-existence by search: θ₁ on a grid of the given step, θ₂ solved as an interval, θ₃ = 1 − θ₁ − θ₂.
inline bool bht_search(double r1, double r2, double s, double step = 1e-3) {
    const double l1 = 2 / r1 - 1, l2 = 2 / r2 - 1, l3 = 1 - 2 / s;
    const int n = static_cast<int>(std::round(1 / step));
    for (int i = 0; i < n; ++i) {
        const double t1 = i * step;
        if (!(t1 > l1)) continue;
        // θ₂ ∈ [0,1), θ₂ > l2, and θ₃ = 1 − t1 − θ₂ ∈ [0,1) with θ₃ > l3.
        const double lo = std::max(0.0, l2);
        const double hi = std::min(1 - t1 - std::max(0.0, l3), 1.0);
        const bool lo_open = l2 >= 0 || t1 == 0; // θ₃ < 1
        const bool hi_open = l3 >= 0 || t1 == 0; // θ₂ < 1
        if (lo < hi || (lo == hi && !lo_open && !hi_open)) return true;
    }
    return false;
}

} // namespace sdlab
