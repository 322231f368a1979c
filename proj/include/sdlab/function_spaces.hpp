#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <memory>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdlab/error.hpp"
#include "sdlab/exponent.hpp"

namespace sdlab {

struct AtomicMeasure {
    std::vector<double> weights;

    AtomicMeasure() = default;
    explicit AtomicMeasure(std::vector<double> w) : weights(std::move(w)) {
        if (weights.empty()) throw ConfigError("atomic measure needs at least one atom");
        for (double x : weights)
            if (!(x > 0) || !std::isfinite(x)) throw ConfigError("atom weights must be positive and finite");
    }
    static AtomicMeasure unit(std::size_t n) { return AtomicMeasure(std::vector<double>(n, 1.0)); }
    std::size_t size() const { return weights.size(); }
    double total() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }
    friend bool operator==(const AtomicMeasure&, const AtomicMeasure&) = default;
};

/// Young function tabulated at nodes 0 < t_0 < ... with 0 < Φ_0 < ..., interpolated linearly in
/// (log t, log Φ) and extended by the end-segment power laws. Power functions are reproduced exactly.
class PhiTable {
public:
    PhiTable() = default;
    PhiTable(std::vector<double> t, std::vector<double> phi) : t_(std::move(t)), phi_(std::move(phi)) {
        if (t_.size() != phi_.size()) throw ConfigError("phi table columns differ in length");
        if (!t_.empty() && t_.front() == 0 && phi_.front() == 0) {
            t_.erase(t_.begin());
            phi_.erase(phi_.begin());
        }
        if (t_.size() < 2) throw ConfigError("phi table needs at least two positive nodes");
        for (std::size_t k = 0; k < t_.size(); ++k) {
            if (!(t_[k] > 0) || !(phi_[k] > 0) || !std::isfinite(t_[k]) || !std::isfinite(phi_[k]))
                throw ConfigError("phi table entries must be positive and finite");
            if (k > 0 && (!(t_[k] > t_[k - 1]) || !(phi_[k] > phi_[k - 1])))
                throw ConfigError("phi table is not strictly monotone at row " + std::to_string(k));
        }
    }

    /// Φ(t) = c t^p, exact under log-log interpolation.
    static PhiTable power(double p, double c = 1.0) {
        if (!(p > 0) || !(c > 0)) throw ConfigError("power Young function needs p, c > 0");
        std::vector<double> t{1e-3, 1.0, 1e3}, phi;
        for (double x : t) phi.push_back(c * std::pow(x, p));
        return PhiTable(t, phi);
    }

    double operator()(double x) const {
        if (!(x > 0)) return 0.0;
        const double lx = std::log(x);
        std::size_t k = std::upper_bound(t_.begin(), t_.end(), x) - t_.begin();
        k = std::clamp<std::size_t>(k, 1, t_.size() - 1);
        const double l0 = std::log(t_[k - 1]), l1 = std::log(t_[k]);
        const double p0 = std::log(phi_[k - 1]), p1 = std::log(phi_[k]);
        return std::exp(p0 + (p1 - p0) / (l1 - l0) * (lx - l0));
    }

    /// Φ^{-1}(y) by bisection.
    double inverse(double y) const {
        if (!(y > 0)) return 0.0;
        double lo = 1e-300, hi = 1.0;
        while ((*this)(hi) < y) hi *= 2;
        for (int it = 0; it < 2000 && hi / lo - 1 > 1e-15; ++it) {
            const double mid = std::sqrt(lo * hi);
            ((*this)(mid) < y ? lo : hi) = mid;
        }
        return std::sqrt(lo * hi);
    }

    /// Ψ(s) = Φ(s^{1/p}), tabulated at t_k^p.
    PhiTable rescaled(double p) const {
        std::vector<double> t;
        for (double x : t_) t.push_back(std::pow(x, p));
        return PhiTable(t, phi_);
    }

    const std::vector<double>& nodes() const { return t_; }
    const std::vector<double>& values() const { return phi_; }

    friend bool operator==(const PhiTable&, const PhiTable&) = default;

private:
    std::vector<double> t_, phi_;
};

inline void write_phi_csv(std::ostream& os, const PhiTable& phi) {
    os << "t,phi\n";
    os.precision(17);
    for (std::size_t k = 0; k < phi.nodes().size(); ++k) os << phi.nodes()[k] << ',' << phi.values()[k] << '\n';
}

inline PhiTable read_phi_csv(std::istream& is) {
    std::vector<double> t, v;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == 't' || line[0] == '#') continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ConfigError("phi csv rows must be t,phi");
        t.push_back(std::stod(line.substr(0, comma)));
        v.push_back(std::stod(line.substr(comma + 1)));
    }
    return PhiTable(t, v);
}

/// A finite-dimensional quasi-Banach function space over an atomic measure.
class SpaceSpec {
public:
    enum class Kind { Lebesgue, Lorentz, Orlicz, Iterated };

    static SpaceSpec lebesgue(Exponent t, AtomicMeasure mu) {
        SpaceSpec s(Kind::Lebesgue, std::move(mu));
        s.t_ = t;
        s.convexity_ = t.is_infinite() ? INFINITY : t.value();
        return s;
    }
    static SpaceSpec lebesgue(double t, std::size_t n) { return lebesgue(Exponent::of(t), AtomicMeasure::unit(n)); }

    static SpaceSpec lorentz(Exponent t, Exponent u, AtomicMeasure mu) {
        if (t.is_infinite()) throw DomainError("Lorentz space needs finite t");
        SpaceSpec s(Kind::Lorentz, std::move(mu));
        s.t_ = t;
        s.u_ = u;
        s.convexity_ = std::min(t.value(), u.value());
        return s;
    }

    static SpaceSpec orlicz(PhiTable phi, AtomicMeasure mu, double convexity = 1.0) {
        SpaceSpec s(Kind::Orlicz, std::move(mu));
        s.phi_ = std::move(phi);
        s.convexity_ = convexity;
        return s;
    }

    /// Outer norm of the vector of inner norms; atom (i, k) sits at i * inner.size() + k.
    static SpaceSpec iterated(const SpaceSpec& outer, const SpaceSpec& inner) {
        if (outer.kind_ == Kind::Iterated || inner.kind_ == Kind::Iterated)
            throw UnsupportedError("iterated spaces nest exactly one level");
        SpaceSpec s(Kind::Iterated, {});
        s.outer_ = std::make_shared<const SpaceSpec>(outer);
        s.inner_ = std::make_shared<const SpaceSpec>(inner);
        s.convexity_ = std::min(outer.convexity_, inner.convexity_);
        return s;
    }

    Kind kind() const { return kind_; }
    std::size_t size() const { return kind_ == Kind::Iterated ? outer_->size() * inner_->size() : mu_.size(); }
    /// Declared p-convexity exponent.
    double convexity() const { return convexity_; }
    const AtomicMeasure& measure() const { return mu_; }
    Exponent t() const { return t_; }
    Exponent u() const { return u_; }
    const PhiTable& phi() const { return phi_; }
    const SpaceSpec& outer() const { return *outer_; }
    const SpaceSpec& inner() const { return *inner_; }
    /// Weight of atom i (product weight for iterated spaces).
    double weight(std::size_t i) const {
        if (kind_ != Kind::Iterated) return mu_.weights[i];
        return outer_->weight(i / inner_->size()) * inner_->weight(i % inner_->size());
    }
    bool same_measure(const SpaceSpec& o) const {
        if (size() != o.size()) return false;
        for (std::size_t i = 0; i < size(); ++i)
            if (weight(i) != o.weight(i)) return false;
        return true;
    }

    std::string describe() const {
        switch (kind_) {
        case Kind::Lebesgue: return "l^" + t_.str();
        case Kind::Lorentz: return "l^{" + t_.str() + "," + u_.str() + "}";
        case Kind::Orlicz: return "l^Phi";
        case Kind::Iterated: return outer_->describe() + "(" + inner_->describe() + ")";
        }
        return "?";
    }

private:
    SpaceSpec(Kind k, AtomicMeasure mu) : kind_(k), mu_(std::move(mu)) {}

    Kind kind_;
    AtomicMeasure mu_;
    Exponent t_ = Exponent::of(1), u_ = Exponent::of(1);
    PhiTable phi_;
    std::shared_ptr<const SpaceSpec> outer_, inner_;
    double convexity_ = 1;

    friend SpaceSpec concavify(const SpaceSpec&, double);
};

namespace detail {

inline double lebesgue_norm(Exponent t, std::span<const double> xi, const std::vector<double>& mu) {
    if (t.is_infinite()) {
        double m = 0;
        for (double x : xi) m = std::max(m, std::abs(x));
        return m;
    }
    const double p = t.value();
    double s = 0;
    if (p == 1) {
        for (std::size_t i = 0; i < xi.size(); ++i) s += std::abs(xi[i]) * mu[i];
        return s;
    }
    if (p == 2) {
        for (std::size_t i = 0; i < xi.size(); ++i) s += xi[i] * xi[i] * mu[i];
        return std::sqrt(s);
    }
    double big = 0;
    for (double x : xi) big = std::max(big, std::abs(x));
    if (big == 0) return 0;
    for (std::size_t i = 0; i < xi.size(); ++i) s += std::pow(std::abs(xi[i]) / big, p) * mu[i];
    return big * std::pow(s, 1.0 / p);
}

inline double lorentz_norm(Exponent t, Exponent u, std::span<const double> xi, const std::vector<double>& mu) {
    std::vector<std::size_t> order(xi.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return std::abs(xi[a]) > std::abs(xi[b]); });
    const double tp = t.value();
    double cum = 0;
    if (u.is_infinite()) {
        double best = 0;
        for (auto i : order) {
            cum += mu[i];
            best = std::max(best, std::abs(xi[i]) * std::pow(cum, 1.0 / tp));
        }
        return best;
    }
    const double up = u.value();
    double s = 0, prev = 0;
    for (auto i : order) {
        cum += mu[i];
        const double next = std::pow(cum, up / tp);
        s += std::pow(std::abs(xi[i]), up) * (next - prev);
        prev = next;
    }
    return std::pow(tp / up * s, 1.0 / up);
}

inline double luxemburg_norm(const PhiTable& phi, std::span<const double> xi, const std::vector<double>& mu) {
    double big = 0;
    for (double x : xi) big = std::max(big, std::abs(x));
    if (big == 0) return 0;
    auto g = [&](double lambda) {
        double s = 0;
        for (std::size_t i = 0; i < xi.size(); ++i) s += phi(std::abs(xi[i]) / lambda) * mu[i];
        return s;
    };
    double lo = big, hi = big;
    while (g(hi) > 1) hi *= 2;
    while (g(lo) <= 1) lo /= 2;
    for (int it = 0; it < 200 && hi / lo - 1 > 1e-15; ++it) {
        const double mid = std::sqrt(lo * hi);
        (g(mid) > 1 ? lo : hi) = mid;
    }
    return hi;
}

} // namespace detail

inline double norm(const SpaceSpec& x, std::span<const double> xi) {
    if (xi.size() != x.size())
        throw ConfigError("vector has " + std::to_string(xi.size()) + " entries, space has " + std::to_string(x.size()));
    for (double v : xi)
        if (!std::isfinite(v)) throw DomainError("space vectors must be finite");
    switch (x.kind()) {
    case SpaceSpec::Kind::Lebesgue: return detail::lebesgue_norm(x.t(), xi, x.measure().weights);
    case SpaceSpec::Kind::Lorentz: return detail::lorentz_norm(x.t(), x.u(), xi, x.measure().weights);
    case SpaceSpec::Kind::Orlicz: return detail::luxemburg_norm(x.phi(), xi, x.measure().weights);
    case SpaceSpec::Kind::Iterated: {
        const std::size_t n = x.inner().size();
        std::vector<double> inner(x.outer().size());
        for (std::size_t i = 0; i < inner.size(); ++i) inner[i] = norm(x.inner(), xi.subspan(i * n, n));
        return norm(x.outer(), inner);
    }
    }
    return 0;
}

inline double norm(const SpaceSpec& x, std::initializer_list<double> xi) {
    return norm(x, std::span<const double>(xi.begin(), xi.size()));
}

/// X^p with ‖ξ‖_{X^p} = ‖|ξ|^{1/p}‖_X^p; every kind is closed under this operation.
inline SpaceSpec concavify(const SpaceSpec& x, double p) {
    if (!(p > 0) || !std::isfinite(p)) throw DomainError("concavification exponent must be positive");
    switch (x.kind()) {
    case SpaceSpec::Kind::Lebesgue:
        return SpaceSpec::lebesgue(Exponent::from_reciprocal(x.t().reciprocal() * p), x.measure());
    case SpaceSpec::Kind::Lorentz:
        return SpaceSpec::lorentz(Exponent::from_reciprocal(x.t().reciprocal() * p),
                                  Exponent::from_reciprocal(x.u().reciprocal() * p), x.measure());
    case SpaceSpec::Kind::Orlicz: return SpaceSpec::orlicz(x.phi().rescaled(p), x.measure(), x.convexity() / p);
    case SpaceSpec::Kind::Iterated: return SpaceSpec::iterated(concavify(x.outer(), p), concavify(x.inner(), p));
    }
    return x;
}

inline bool has_analytic_associate(const SpaceSpec& x) {
    if (x.kind() == SpaceSpec::Kind::Lebesgue) return x.t().reciprocal() <= 1;
    if (x.kind() == SpaceSpec::Kind::Iterated) return has_analytic_associate(x.outer()) && has_analytic_associate(x.inner());
    return false;
}

/// The Köthe dual X* in closed form (Lebesgue and iterated Lebesgue spaces).
inline SpaceSpec associate_space(const SpaceSpec& x) {
    if (!has_analytic_associate(x)) throw UnsupportedError("no closed-form associate space for " + x.describe());
    if (x.kind() == SpaceSpec::Kind::Iterated)
        return SpaceSpec::iterated(associate_space(x.outer()), associate_space(x.inner()));
    return SpaceSpec::lebesgue(Exponent::from_reciprocal(1.0 - x.t().reciprocal()), x.measure());
}

struct OptimizerOptions {
    int restarts = 64;
    std::uint64_t seed = 0x5eed;
};

namespace detail {

/// Maximise f over ℝ^n by coordinate-wise golden-section search with shrinking brackets.
inline double coordinate_ascent(std::vector<double>& c, const std::function<double(const std::vector<double>&)>& f) {
    constexpr double golden = 0.6180339887498949;
    double best = f(c);
    double radius = 4.0;
    while (radius > 1e-9) {
        bool improved = false;
        for (std::size_t i = 0; i < c.size(); ++i) {
            const double base = c[i];
            double a = base - radius, b = base + radius;
            auto eval = [&](double v) {
                c[i] = v;
                return f(c);
            };
            double x1 = b - golden * (b - a), x2 = a + golden * (b - a);
            double f1 = eval(x1), f2 = eval(x2);
            for (int it = 0; it < 60; ++it) {
                if (f1 < f2) {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + golden * (b - a);
                    f2 = eval(x2);
                } else {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - golden * (b - a);
                    f1 = eval(x1);
                }
            }
            const double cand = 0.5 * (a + b);
            const double fc = eval(cand);
            if (fc > best + 1e-13 * std::max(1.0, std::abs(best))) {
                best = fc;
                improved = true;
            } else {
                c[i] = base;
            }
        }
        if (!improved) radius *= 0.5;
    }
    return best;
}

} // namespace detail

/// sup{Σ|a_i| η_i μ_i : ‖η‖_X ≤ 1} by coordinate ascent in log-coordinates with random restarts.
inline double sup_pairing(const SpaceSpec& x, std::span<const double> a, const OptimizerOptions& opt = {}) {
    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != 0) support.push_back(i);
    if (support.empty()) return 0;
    std::vector<double> eta(x.size(), 0.0);
    auto ratio = [&](const std::vector<double>& c) {
        double pair = 0;
        for (std::size_t k = 0; k < support.size(); ++k) {
            eta[support[k]] = std::exp(c[k]);
            pair += std::abs(a[support[k]]) * eta[support[k]] * x.weight(support[k]);
        }
        const double n = norm(x, eta);
        return n > 0 ? pair / n : 0.0;
    };
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> unif(-3, 3);
    double best = 0;
    for (int r = 0; r < opt.restarts; ++r) {
        std::vector<double> c(support.size());
        for (std::size_t k = 0; k < c.size(); ++k) c[k] = r == 0 ? std::log(std::abs(a[support[k]])) : unif(rng);
        best = std::max(best, detail::coordinate_ascent(c, ratio));
    }
    return best;
}

/// Norm of ξ in the associate space X*.
inline double associate_norm(const SpaceSpec& x, std::span<const double> xi, const OptimizerOptions& opt = {}) {
    if (x.convexity() < 1) throw UnsupportedError("associate norm requires a 1-convex space, got " + x.describe());
    if (xi.size() != x.size()) throw ConfigError("vector length differs from space dimension");
    if (has_analytic_associate(x)) return norm(associate_space(x), xi);
    return sup_pairing(x, xi, opt);
}

inline void check_same_measure(const std::vector<SpaceSpec>& xs) {
    if (xs.empty()) throw ConfigError("space tuple is empty");
    for (const auto& x : xs)
        if (!x.same_measure(xs.front())) throw ConfigError("product spaces must share one atomic measure");
}

inline bool all_lebesgue(const std::vector<SpaceSpec>& xs) {
    return std::all_of(xs.begin(), xs.end(), [](const auto& x) { return x.kind() == SpaceSpec::Kind::Lebesgue; });
}

/// ΠX_j in closed form for Lebesgue tuples: ℓ^t with 1/t = Σ1/t_j.
inline SpaceSpec lebesgue_product(const std::vector<SpaceSpec>& xs) {
    check_same_measure(xs);
    if (!all_lebesgue(xs)) throw UnsupportedError("closed-form product needs Lebesgue factors");
    double inv = 0;
    for (const auto& x : xs) inv += x.t().reciprocal();
    return SpaceSpec::lebesgue(Exponent::from_reciprocal(inv), xs.front().measure());
}

/// ‖ξ‖_{ΠX_j} = inf{Π‖ξ_j‖_{X_j} : |ξ| = Πξ_j}.
inline double product_norm(const std::vector<SpaceSpec>& xs, std::span<const double> xi, const OptimizerOptions& opt = {}) {
    check_same_measure(xs);
    if (xi.size() != xs.front().size()) throw ConfigError("vector length differs from space dimension");
    if (xs.size() == 1) return norm(xs.front(), xi);
    if (all_lebesgue(xs)) return norm(lebesgue_product(xs), xi);

    const std::size_t m = xs.size();
    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < xi.size(); ++i)
        if (xi[i] != 0) support.push_back(i);
    if (support.empty()) return 0;
    const std::size_t n = support.size();

    // c holds log ξ_{j,i} for j < m-1; the last factor absorbs the remainder.
    std::vector<std::vector<double>> factors(m, std::vector<double>(xi.size(), 0.0));
    auto objective = [&](const std::vector<double>& c) {
        double total = 0;
        for (std::size_t k = 0; k < n; ++k) {
            double rest = std::log(std::abs(xi[support[k]]));
            for (std::size_t j = 0; j + 1 < m; ++j) {
                factors[j][support[k]] = std::exp(c[j * n + k]);
                rest -= c[j * n + k];
            }
            factors[m - 1][support[k]] = std::exp(rest);
        }
        for (std::size_t j = 0; j < m; ++j) total += std::log(norm(xs[j], factors[j]));
        return -total;
    };

    // Seed with the power factorization ξ_j = |ξ|^{t/t_j} using the declared convexity exponents.
    std::vector<double> share(m);
    double inv = 0;
    for (std::size_t j = 0; j < m; ++j) inv += 1.0 / xs[j].convexity();
    for (std::size_t j = 0; j < m; ++j) share[j] = std::isfinite(inv) && inv > 0 ? (1.0 / xs[j].convexity()) / inv : 1.0 / m;

    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> unif(-2, 2);
    double best = INFINITY;
    const int starts = std::max(2, opt.restarts / 8);
    for (int r = 0; r < starts; ++r) {
        std::vector<double> c((m - 1) * n);
        for (std::size_t j = 0; j + 1 < m; ++j)
            for (std::size_t k = 0; k < n; ++k) {
                const double lx = std::log(std::abs(xi[support[k]]));
                c[j * n + k] = r == 0 ? share[j] * lx : r == 1 ? lx / m : lx / m + unif(rng);
            }
        best = std::min(best, std::exp(-detail::coordinate_ascent(c, objective)));
    }
    return best;
}

/// Largest observed ‖ξ+η‖/(‖ξ‖+‖η‖) over random nonnegative pairs.
inline double quasi_triangle_estimate(const SpaceSpec& x, int samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::lognormal_distribution<double> ln(0, 1.5);
    std::bernoulli_distribution zero(0.3);
    double worst = 0;
    std::vector<double> a(x.size()), b(x.size()), s(x.size());
    for (int k = 0; k < samples; ++k) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            a[i] = zero(rng) ? 0 : ln(rng);
            b[i] = zero(rng) ? 0 : ln(rng);
            s[i] = a[i] + b[i];
        }
        const double den = norm(x, a) + norm(x, b);
        if (den > 0) worst = std::max(worst, norm(x, s) / den);
    }
    return worst;
}

inline nlohmann::json exponent_json(Exponent e) {
    if (e.is_infinite()) return "inf";
    return e.value();
}

inline Exponent exponent_from_json(const nlohmann::json& j) {
    if (j.is_string()) return Exponent::parse(j.get<std::string>());
    return Exponent::of(j.get<double>());
}

inline nlohmann::json to_json(const SpaceSpec& x) {
    using K = SpaceSpec::Kind;
    nlohmann::json j;
    switch (x.kind()) {
    case K::Lebesgue:
        j = {{"kind", "lebesgue"}, {"parameters", {{"t", exponent_json(x.t())}}}};
        break;
    case K::Lorentz:
        j = {{"kind", "lorentz"}, {"parameters", {{"t", exponent_json(x.t())}, {"u", exponent_json(x.u())}}}};
        break;
    case K::Orlicz: {
        nlohmann::json table = nlohmann::json::array();
        for (std::size_t k = 0; k < x.phi().nodes().size(); ++k) table.push_back({x.phi().nodes()[k], x.phi().values()[k]});
        j = {{"kind", "orlicz"}, {"parameters", {{"table", table}, {"convexity", x.convexity()}}}};
        break;
    }
    case K::Iterated:
        return {{"kind", "iterated"}, {"parameters", {{"outer", to_json(x.outer())}, {"inner", to_json(x.inner())}}}};
    }
    j["atoms"] = x.measure().weights;
    return j;
}

inline SpaceSpec space_from_json(const nlohmann::json& j) {
    const auto kind = j.at("kind").get<std::string>();
    const auto& par = j.at("parameters");
    if (kind == "iterated") return SpaceSpec::iterated(space_from_json(par.at("outer")), space_from_json(par.at("inner")));
    AtomicMeasure mu(j.at("atoms").get<std::vector<double>>());
    if (kind == "lebesgue") return SpaceSpec::lebesgue(exponent_from_json(par.at("t")), mu);
    if (kind == "lorentz") return SpaceSpec::lorentz(exponent_from_json(par.at("t")), exponent_from_json(par.at("u")), mu);
    if (kind == "orlicz") {
        std::vector<double> t, v;
        for (const auto& row : par.at("table")) {
            t.push_back(row.at(0).get<double>());
            v.push_back(row.at(1).get<double>());
        }
        return SpaceSpec::orlicz(PhiTable(t, v), mu, par.value("convexity", 1.0));
    }
    throw ConfigError("unknown space kind '" + kind + "'");
}

} // namespace sdlab
