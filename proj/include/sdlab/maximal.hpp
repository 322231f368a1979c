#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdlab/dyadic.hpp"
#include "sdlab/generators.hpp"
#include "sdlab/vector_grid.hpp"

namespace sdlab {

namespace detail {

inline void check_pointwise_family(const CubeCollection& D, int dim, int depth) {
    if (D.size() == 0) throw ConfigError("cube family is empty");
    if (D.dim() != dim || D.depth() != depth) throw ConfigError("cube family and functions live on different grids");
    if (!D.aligned())
        throw UnsupportedError("pointwise maximal functions need cubes that are unions of finest cells");
}

} // namespace detail

/// Π_j ⟨f_j⟩_{r_j,Q} for every cube Q of D.
inline std::vector<double> product_averages(const std::vector<const std::vector<double>*>& fs, const Exponents& r,
                                            const CubeCollection& D) {
    if (fs.size() != r.size()) throw ConfigError("need one exponent per function");
    std::vector<double> prod(D.size(), 1.0);
    for (std::size_t j = 0; j < fs.size(); ++j) {
        const auto avg = D.averages(*fs[j], r[j]);
        for (std::size_t i = 0; i < prod.size(); ++i) prod[i] *= avg[i];
    }
    return prod;
}

/// Pointwise maximum over the cubes of D of per-cube values times 1_Q.
inline std::vector<double> spread_max(const std::vector<double>& per_cube, const CubeCollection& D) {
    std::vector<double> out(std::size_t{1} << (D.dim() * D.depth()), 0.0);
    for (std::size_t i = 0; i < D.size(); ++i)
        for (const auto& c : D.footprint(i).cells) out[c.cell] = std::max(out[c.cell], per_cube[i]);
    return out;
}

/// M^D_{r⃗}(f⃗)(x) = max_{Q∈D} Π⟨f_j⟩_{r_j,Q} 1_Q(x).
inline GridFunction scalar_maximal(const std::vector<GridFunction>& f, const Exponents& r, const CubeCollection& D) {
    if (f.empty()) throw ConfigError("need at least one function");
    for (const auto& g : f)
        if (g.dim() != f.front().dim() || g.depth() != f.front().depth()) throw ConfigError("functions on different grids");
    detail::check_pointwise_family(D, f.front().dim(), f.front().depth());
    std::vector<const std::vector<double>*> fs;
    for (const auto& g : f) fs.push_back(&g.values());
    return GridFunction(D.dim(), D.depth(), spread_max(product_averages(fs, r, D), D));
}

/// The lattice maximal operator: per atom, the scalar operator applied to the slices.
inline VectorGridFunction lattice_maximal(const std::vector<VectorGridFunction>& F, const Exponents& r,
                                          const CubeCollection& D) {
    if (F.empty()) throw ConfigError("need at least one function");
    for (const auto& g : F)
        if (g.atoms() != F.front().atoms() || g.dim() != F.front().dim() || g.depth() != F.front().depth())
            throw ConfigError("lattice maximal inputs must share atoms and grid");
    detail::check_pointwise_family(D, F.front().dim(), F.front().depth());
    VectorGridFunction out(F.front().dim(), F.front().depth(), F.front().atoms());
    std::vector<GridFunction> slices(F.size());
    for (std::size_t w = 0; w < out.atoms(); ++w) {
        for (std::size_t j = 0; j < F.size(); ++j) slices[j] = F[j].slice(w);
        out.set_slice(w, scalar_maximal(slices, r, D));
    }
    return out;
}

struct OpnormEstimate {
    double estimate = 0;
    std::size_t argmax_trial = 0;
    std::string argmax_kind;
    std::vector<VectorGridFunction> argmax;
};

struct OpnormSearch {
    int dim = 1;
    int depth = 6;
    int trials = 200;
    std::uint64_t seed = 1;
};

/// Lower bound for ‖M̃_{r⃗}‖ on L^{p_1}(X_1) × ... → L^p(ΠX_j) from random and structured inputs.
inline OpnormEstimate maximal_opnorm_lower(const Exponents& r, const Exponents& p, const std::vector<SpaceSpec>& xs,
                                           const OpnormSearch& cfg) {
    const std::size_t m = r.size();
    if (p.size() != m || xs.size() != m) throw ConfigError("exponent and space tuples must have equal length");
    for (std::size_t j = 0; j < m; ++j)
        if (!(r[j].reciprocal() > p[j].reciprocal())) throw DomainError("need r_j < p_j");
    check_same_measure(xs);
    const std::size_t n = xs.front().size();
    const Exponent pp = harmonic_sum(p);
    const auto D = CubeCollection::of(build_grid(cfg.dim, cfg.depth));
    InputGenerator gen(cfg.seed);

    OpnormEstimate best;
    for (int t = 0; t < cfg.trials; ++t) {
        std::vector<VectorGridFunction> F;
        std::string kind = "random";
        if (t == 0) {
            kind = "constant";
            for (std::size_t j = 0; j < m; ++j) {
                VectorGridFunction v(cfg.dim, cfg.depth, n);
                for (std::size_t c = 0; c < v.cells(); ++c)
                    for (std::size_t w = 0; w < n; ++w) v.at(c, w) = 1.0;
                F.push_back(v);
            }
        } else {
            for (std::size_t j = 0; j < m; ++j) F.push_back(gen.vector(cfg.dim, cfg.depth, n));
        }
        double den = 1;
        for (std::size_t j = 0; j < m; ++j) den *= bochner_norm(F[j].norms(xs[j]), p[j]);
        if (!(den > 0)) continue;
        const auto MF = lattice_maximal(F, r, D);
        const double num = bochner_norm(product_norms(MF, xs), pp);
        const double ratio = num / den;
        if (ratio > best.estimate) best = {ratio, static_cast<std::size_t>(t), kind, F};
    }
    return best;
}

} // namespace sdlab
