#pragma once

#include <span>
#include <vector>

#include "sdlab/dyadic.hpp"
#include "sdlab/function_spaces.hpp"

namespace sdlab {

/// One space vector per finest cell; storage is cell-major ([cell][atom]).
class VectorGridFunction {
public:
    VectorGridFunction() = default;
    VectorGridFunction(int d, int L, std::size_t atoms) : dim_(d), depth_(L), atoms_(atoms) {
        check_depth(d, L);
        if (atoms == 0) throw ConfigError("vector grid function needs at least one atom");
        values_.assign(GridFunction::cell_count(d, L) * atoms, 0.0);
    }

    static VectorGridFunction from_slices(const std::vector<GridFunction>& slices) {
        if (slices.empty()) throw ConfigError("no slices given");
        VectorGridFunction v(slices.front().dim(), slices.front().depth(), slices.size());
        for (std::size_t w = 0; w < slices.size(); ++w) v.set_slice(w, slices[w]);
        return v;
    }

    int dim() const { return dim_; }
    int depth() const { return depth_; }
    std::size_t atoms() const { return atoms_; }
    std::size_t cells() const { return values_.size() / atoms_; }
    double cell_measure() const { return std::ldexp(1.0, -dim_ * depth_); }

    double at(std::size_t cell, std::size_t atom) const { return values_[cell * atoms_ + atom]; }
    double& at(std::size_t cell, std::size_t atom) { return values_[cell * atoms_ + atom]; }
    std::span<const double> cell(std::size_t c) const { return {values_.data() + c * atoms_, atoms_}; }
    const std::vector<double>& values() const { return values_; }

    GridFunction slice(std::size_t atom) const {
        std::vector<double> s(cells());
        for (std::size_t c = 0; c < s.size(); ++c) s[c] = at(c, atom);
        return GridFunction(dim_, depth_, std::move(s));
    }
    void set_slice(std::size_t atom, const GridFunction& f) {
        if (f.dim() != dim_ || f.depth() != depth_) throw ConfigError("slice grid differs");
        for (std::size_t c = 0; c < cells(); ++c) at(c, atom) = f[c];
    }

    /// x ↦ ‖F(x)‖_X.
    GridFunction norms(const SpaceSpec& x) const {
        if (x.size() != atoms_) throw ConfigError("space dimension differs from atom count");
        std::vector<double> out(cells());
        for (std::size_t c = 0; c < out.size(); ++c) out[c] = norm(x, cell(c));
        return GridFunction(dim_, depth_, std::move(out));
    }

    friend bool operator==(const VectorGridFunction&, const VectorGridFunction&) = default;

private:
    int dim_ = 1, depth_ = 0;
    std::size_t atoms_ = 1;
    std::vector<double> values_;
};

/// x ↦ ‖F(x)‖_X for X = ΠX_j; closed form for Lebesgue factors, numerical otherwise.
inline GridFunction product_norms(const VectorGridFunction& f, const std::vector<SpaceSpec>& xs) {
    check_same_measure(xs);
    if (xs.size() == 1) return f.norms(xs.front());
    if (all_lebesgue(xs)) return f.norms(lebesgue_product(xs));
    std::vector<double> out(f.cells());
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = product_norm(xs, f.cell(c));
    return GridFunction(f.dim(), f.depth(), std::move(out));
}

/// ‖F‖_{L^p(X)} from precomputed cellwise norms.
inline double bochner_norm(const GridFunction& cell_norms, Exponent p) { return grid_norm(cell_norms, p); }

} // namespace sdlab
