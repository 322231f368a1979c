#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "sdlab/error.hpp"

namespace sdlab {

/// An exponent in (0, ∞], stored by its reciprocal so that 1/∞ = 0 is exact.
class Exponent {
public:
    constexpr Exponent() = default;

    static Exponent of(double p) {
        if (std::isinf(p) && p > 0) return infinity();
        if (!(p > 0) || !std::isfinite(p)) throw DomainError("exponent must lie in (0, inf]");
        return Exponent(1.0 / p);
    }
    static constexpr Exponent infinity() { return Exponent(0.0); }
    static Exponent from_reciprocal(double inv) {
        if (!(inv >= 0) || !std::isfinite(inv)) throw DomainError("reciprocal exponent must lie in [0, inf)");
        return Exponent(inv);
    }
    /// Parses "inf", "infinity" or a positive decimal.
    static Exponent parse(const std::string& text) {
        if (text == "inf" || text == "infinity" || text == "Inf") return infinity();
        return of(std::stod(text));
    }

    constexpr double reciprocal() const { return inv_; }
    constexpr bool is_infinite() const { return inv_ == 0.0; }
    double value() const { return is_infinite() ? std::numeric_limits<double>::infinity() : 1.0 / inv_; }

    std::string str() const {
        if (is_infinite()) return "inf";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", value());
        return buf;
    }

    friend constexpr bool operator==(Exponent a, Exponent b) { return a.inv_ == b.inv_; }

private:
    constexpr explicit Exponent(double inv) : inv_(inv) {}
    double inv_ = 1.0;
};

using Exponents = std::vector<Exponent>;

inline Exponents exponents(std::initializer_list<double> ps) {
    Exponents out;
    for (double p : ps) out.push_back(Exponent::of(p));
    return out;
}

/// The exponent r with 1/r = Σ 1/r_j.
inline Exponent harmonic_sum(const Exponents& rs) {
    double inv = 0;
    for (const auto& r : rs) inv += r.reciprocal();
    return Exponent::from_reciprocal(inv);
}

} // namespace sdlab
