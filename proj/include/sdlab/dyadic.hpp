#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "sdlab/error.hpp"
#include "sdlab/exponent.hpp"

namespace sdlab {

namespace detail {

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

inline int pow3(int e) {
    int v = 1;
    while (e-- > 0) v *= 3;
    return v;
}

} // namespace detail

inline void check_dimension(int d) {
    if (d != 1 && d != 2) throw ConfigError("dimension must be 1 or 2, got " + std::to_string(d));
}

inline void check_depth(int d, int L) {
    check_dimension(d);
    const int cap = d == 1 ? 12 : 6;
    if (L < 0 || L > cap)
        throw ConfigError("depth " + std::to_string(L) + " outside [0, " + std::to_string(cap) + "] for d=" +
                          std::to_string(d));
}

inline int shift_count(int d) { return detail::pow3(d); }

/// Translate of 2^{-k}([0,1)^d + m) living in shifted grid `shift`.
///
/// Shift α encodes offsets τ_i ∈ {0,1,2} (base 3, axis 0 least significant); the lower corner
/// along axis i is 2^{-k}(m_i + (-1)^k τ_i / 3). Negative levels denote the dyadic ancestors
/// [0, 2^{-k})^d of the unit cube and only occur for shift 0.
struct DyadicCube {
    int dim = 1;
    int level = 0;
    std::array<std::int64_t, 2> index{0, 0};
    int shift = 0;

    int offset(int axis) const { return (shift / detail::pow3(axis)) % 3; }
    /// (-1)^k τ_axis, the signed offset in thirds of the side length.
    int signed_offset(int axis) const {
        const int t = offset(axis);
        return (level % 2 == 0) ? t : -t;
    }
    double side() const { return std::ldexp(1.0, -level); }
    double measure() const { return std::ldexp(1.0, -level * dim); }
    double lower(int axis) const {
        return side() * (static_cast<double>(index[axis]) + signed_offset(axis) / 3.0);
    }
    double upper(int axis) const { return lower(axis) + side(); }

    friend auto operator<=>(const DyadicCube&, const DyadicCube&) = default;
    friend bool operator==(const DyadicCube&, const DyadicCube&) = default;
};

/// Parent in the same grid.
inline DyadicCube parent(const DyadicCube& q) {
    DyadicCube p = q;
    p.level = q.level - 1;
    for (int a = 0; a < q.dim; ++a) {
        const std::int64_t s = p.signed_offset(a);
        p.index[a] = detail::floor_div(q.index[a] - s, 2);
    }
    return p;
}

/// All 2^d children in the same grid (possibly outside the unit cube for shifted grids).
inline std::vector<DyadicCube> children(const DyadicCube& q) {
    std::vector<DyadicCube> out;
    const int n = 1 << q.dim;
    for (int e = 0; e < n; ++e) {
        DyadicCube c = q;
        c.level = q.level + 1;
        for (int a = 0; a < q.dim; ++a) c.index[a] = 2 * q.index[a] + q.signed_offset(a) + ((e >> a) & 1);
        out.push_back(c);
    }
    return out;
}

/// Containment for two cubes of the same grid.
inline bool contains(const DyadicCube& outer, const DyadicCube& inner) {
    if (outer.shift != inner.shift || outer.dim != inner.dim || outer.level > inner.level) return false;
    DyadicCube c = inner;
    while (c.level > outer.level) c = parent(c);
    return c.index == outer.index;
}

/// The finite tree of cubes of one grid, levels 0..L, restricted to cubes meeting [0,1)^d.
class Grid {
public:
    Grid(int d, int L, int shift) : dim_(d), depth_(L), shift_(shift) {
        check_depth(d, L);
        if (shift < 0 || shift >= shift_count(d))
            throw ConfigError("shift index " + std::to_string(shift) + " outside [0, 3^d)");
        std::size_t total = 0;
        for (int k = 0; k <= L; ++k) {
            Level lv;
            lv.begin = total;
            std::size_t count = 1;
            for (int a = 0; a < std::min(d, 2); ++a) {
                DyadicCube probe{d, k, {0, 0}, shift};
                const std::int64_t s = probe.signed_offset(a);
                lv.lo[a] = detail::floor_div(-3 - s, 3) + 1;
                lv.hi[a] = detail::ceil_div(3 * (std::int64_t{1} << k) - s, 3) - 1;
                lv.extent[a] = lv.hi[a] - lv.lo[a] + 1;
                count *= static_cast<std::size_t>(lv.extent[a]);
            }
            lv.count = count;
            total += count;
            levels_.push_back(lv);
        }
        size_ = total;
    }

    int dim() const { return dim_; }
    int depth() const { return depth_; }
    int shift() const { return shift_; }
    std::size_t size() const { return size_; }
    std::size_t level_begin(int k) const { return levels_[k].begin; }
    std::size_t level_size(int k) const { return levels_[k].count; }

    bool has(const DyadicCube& q) const {
        if (q.dim != dim_ || q.shift != shift_ || q.level < 0 || q.level > depth_) return false;
        const Level& lv = levels_[q.level];
        for (int a = 0; a < dim_; ++a)
            if (q.index[a] < lv.lo[a] || q.index[a] > lv.hi[a]) return false;
        return true;
    }

    std::size_t id(const DyadicCube& q) const {
        if (!has(q)) throw ConfigError("cube does not belong to this grid");
        const Level& lv = levels_[q.level];
        std::size_t lin = 0, stride = 1;
        for (int a = 0; a < dim_; ++a) {
            lin += static_cast<std::size_t>(q.index[a] - lv.lo[a]) * stride;
            stride *= static_cast<std::size_t>(lv.extent[a]);
        }
        return lv.begin + lin;
    }

    DyadicCube cube(std::size_t id) const {
        int k = 0;
        while (k < depth_ && id >= levels_[k + 1].begin) ++k;
        const Level& lv = levels_[k];
        std::size_t lin = id - lv.begin;
        DyadicCube q{dim_, k, {0, 0}, shift_};
        for (int a = 0; a < dim_; ++a) {
            const auto ext = static_cast<std::size_t>(lv.extent[a]);
            q.index[a] = lv.lo[a] + static_cast<std::int64_t>(lin % ext);
            lin /= ext;
        }
        return q;
    }

    std::vector<DyadicCube> cubes() const {
        std::vector<DyadicCube> out;
        out.reserve(size_);
        for (std::size_t i = 0; i < size_; ++i) out.push_back(cube(i));
        return out;
    }

    /// Children inside the grid; for shift 0 there are always 2^d of them below depth L.
    std::vector<std::size_t> child_ids(std::size_t id) const {
        const DyadicCube q = cube(id);
        std::vector<std::size_t> out;
        if (q.level >= depth_) return out;
        for (const auto& c : children(q))
            if (has(c)) out.push_back(this->id(c));
        return out;
    }

    /// Parent id, or size() for level-0 cubes.
    std::size_t parent_id(std::size_t id) const {
        const DyadicCube q = cube(id);
        if (q.level == 0) return size_;
        return this->id(parent(q));
    }

private:
    struct Level {
        std::size_t begin = 0, count = 0;
        std::array<std::int64_t, 2> lo{0, 0}, hi{0, 0}, extent{1, 1};
    };
    int dim_, depth_, shift_;
    std::size_t size_ = 0;
    std::vector<Level> levels_;
};

inline Grid build_grid(int d, int L, int shift = 0) { return Grid(d, L, shift); }

/// Piecewise-constant function on the 2^{dL} finest cells of the standard grid.
/// Cell index is i_0 + 2^L i_1 (axis 0 fastest).
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(int d, int L) : dim_(d), depth_(L) {
        check_depth(d, L);
        values_.assign(cell_count(d, L), 0.0);
    }
    GridFunction(int d, int L, std::vector<double> values) : dim_(d), depth_(L), values_(std::move(values)) {
        check_depth(d, L);
        if (values_.size() != cell_count(d, L))
            throw ConfigError("grid function needs " + std::to_string(cell_count(d, L)) + " values, got " +
                              std::to_string(values_.size()));
        for (double v : values_)
            if (!std::isfinite(v)) throw DomainError("grid function values must be finite");
    }
    static GridFunction constant(int d, int L, double c) {
        return GridFunction(d, L, std::vector<double>(cell_count(d, L), c));
    }

    static std::size_t cell_count(int d, int L) { return std::size_t{1} << (d * L); }

    int dim() const { return dim_; }
    int depth() const { return depth_; }
    std::size_t size() const { return values_.size(); }
    double cell_measure() const { return std::ldexp(1.0, -dim_ * depth_); }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    /// The finest cube of the standard grid covering cell i.
    DyadicCube cell_cube(std::size_t i) const {
        const std::size_t n = std::size_t{1} << depth_;
        DyadicCube q{dim_, depth_, {static_cast<std::int64_t>(i % n), 0}, 0};
        if (dim_ == 2) q.index[1] = static_cast<std::int64_t>(i / n);
        return q;
    }

    friend bool operator==(const GridFunction&, const GridFunction&) = default;

private:
    int dim_ = 1, depth_ = 0;
    std::vector<double> values_;
};

/// ‖f‖_{L^p([0,1)^d)}.
inline double grid_norm(const std::vector<double>& f, double cell_measure, Exponent p) {
    if (p.is_infinite()) {
        double m = 0;
        for (double v : f) m = std::max(m, std::abs(v));
        return m;
    }
    const double e = p.value();
    double s = 0;
    for (double v : f) s += std::pow(std::abs(v), e);
    return std::pow(s * cell_measure, 1.0 / e);
}

inline double grid_norm(const GridFunction& f, Exponent p) { return grid_norm(f.values(), f.cell_measure(), p); }

struct CellWeight {
    std::size_t cell;
    double measure;
};

/// The cells met by Q ∩ [0,1)^d at a given depth, with overlap measures.
struct Footprint {
    std::vector<CellWeight> cells;
    double measure = 0;
    bool aligned = true; ///< every listed cell lies entirely inside Q
};

inline Footprint footprint(const DyadicCube& q, int depth) {
    const double h = std::ldexp(1.0, -depth);
    const std::int64_t n = std::int64_t{1} << depth;
    std::array<std::vector<std::pair<std::size_t, double>>, 2> axis;
    for (int a = 0; a < q.dim; ++a) {
        const double lo = std::max(0.0, q.lower(a));
        const double hi = std::min(1.0, q.upper(a));
        if (!(hi > lo)) return {};
        auto j0 = static_cast<std::int64_t>(std::floor(lo / h));
        auto j1 = static_cast<std::int64_t>(std::ceil(hi / h)) - 1;
        j0 = std::clamp<std::int64_t>(j0, 0, n - 1);
        j1 = std::clamp<std::int64_t>(j1, 0, n - 1);
        for (std::int64_t j = j0; j <= j1; ++j) {
            const double len = std::min(hi, (j + 1) * h) - std::max(lo, j * h);
            if (len > 0) axis[a].emplace_back(static_cast<std::size_t>(j), len);
        }
    }
    Footprint fp;
    const double cell = std::ldexp(1.0, -depth * q.dim);
    if (q.dim == 1) {
        for (auto [j, len] : axis[0]) fp.cells.push_back({j, len});
    } else {
        for (auto [j1, l1] : axis[1])
            for (auto [j0, l0] : axis[0]) fp.cells.push_back({j0 + static_cast<std::size_t>(n) * j1, l0 * l1});
    }
    for (const auto& c : fp.cells) {
        fp.measure += c.measure;
        if (c.measure != cell) fp.aligned = false;
    }
    return fp;
}

/// ⟨f⟩_{r,Q} over a precomputed footprint.
inline double average(const std::vector<double>& f, Exponent r, const Footprint& fp) {
    if (fp.cells.empty() || !(fp.measure > 0)) throw DomainError("cube does not meet the unit cube");
    if (r.is_infinite()) {
        double m = 0;
        for (const auto& c : fp.cells) m = std::max(m, std::abs(f[c.cell]));
        return m;
    }
    const double p = r.value();
    double s = 0;
    if (p == 1.0) {
        for (const auto& c : fp.cells) s += std::abs(f[c.cell]) * c.measure;
        return s / fp.measure;
    }
    for (const auto& c : fp.cells) s += std::pow(std::abs(f[c.cell]), p) * c.measure;
    return std::pow(s / fp.measure, 1.0 / p);
}

inline double average(const GridFunction& f, Exponent r, const DyadicCube& q) {
    if (q.dim != f.dim()) throw ConfigError("cube and function dimensions differ");
    return average(f.values(), r, footprint(q, f.depth()));
}

/// A finite cube family with cached footprints at a fixed depth.
class CubeCollection {
public:
    CubeCollection(int d, int depth, std::vector<DyadicCube> cubes) : dim_(d), depth_(depth), cubes_(std::move(cubes)) {
        check_depth(d, depth);
        prints_.reserve(cubes_.size());
        for (const auto& q : cubes_) {
            if (q.dim != d) throw ConfigError("cube dimension differs from collection dimension");
            prints_.push_back(sdlab::footprint(q, depth));
            if (prints_.back().cells.empty()) throw DomainError("cube does not meet the unit cube");
            aligned_ = aligned_ && prints_.back().aligned;
        }
    }
    static CubeCollection of(const Grid& g) { return CubeCollection(g.dim(), g.depth(), g.cubes()); }
    static CubeCollection all_shifts(int d, int L) {
        std::vector<DyadicCube> all;
        for (int a = 0; a < shift_count(d); ++a) {
            auto c = Grid(d, L, a).cubes();
            all.insert(all.end(), c.begin(), c.end());
        }
        return CubeCollection(d, L, std::move(all));
    }

    int dim() const { return dim_; }
    int depth() const { return depth_; }
    std::size_t size() const { return cubes_.size(); }
    bool aligned() const { return aligned_; }
    const DyadicCube& cube(std::size_t i) const { return cubes_[i]; }
    const std::vector<DyadicCube>& cubes() const { return cubes_; }
    const Footprint& footprint(std::size_t i) const { return prints_[i]; }

    /// ⟨f⟩_{r,Q} for every cube of the collection.
    std::vector<double> averages(const std::vector<double>& f, Exponent r) const {
        std::vector<double> out(cubes_.size());
        for (std::size_t i = 0; i < cubes_.size(); ++i) out[i] = average(f, r, prints_[i]);
        return out;
    }

private:
    int dim_, depth_;
    std::vector<DyadicCube> cubes_;
    std::vector<Footprint> prints_;
    bool aligned_ = true;
};

/// Axis-parallel cube inside [0,1)^d.
struct AxisCube {
    int dim = 1;
    std::array<double, 2> lower{0, 0};
    double side = 1;
    double measure() const { return std::pow(side, dim); }
};

struct Cover {
    int shift = 0;
    DyadicCube cube;
    double ratio = 1; ///< |Q'| / |Q|
};

/// Smallest cube among the 3^d shifted grids containing Q.
inline Cover cover_cube(const AxisCube& q) {
    check_dimension(q.dim);
    if (!(q.side > 0)) throw DomainError("cube side must be positive");
    for (int a = 0; a < q.dim; ++a)
        if (q.lower[a] < 0 || q.lower[a] + q.side > 1 + 1e-12) throw DomainError("cube must lie in [0,1)^d");
    constexpr double tol = 1e-12;
    const int kmax = static_cast<int>(std::floor(-std::log2(q.side) + tol));
    Cover best;
    bool found = false;
    for (int alpha = 0; alpha < shift_count(q.dim); ++alpha) {
        for (int k = kmax; k >= 0; --k) {
            DyadicCube c{q.dim, k, {0, 0}, alpha};
            bool ok = true;
            for (int a = 0; a < q.dim && ok; ++a) {
                const double s = c.signed_offset(a) / 3.0;
                const double scaled = std::ldexp(q.lower[a], k) - s;
                c.index[a] = static_cast<std::int64_t>(std::floor(scaled + tol));
                ok = q.lower[a] + tol >= c.lower(a) && q.lower[a] + q.side <= c.upper(a) + tol;
            }
            if (!ok) continue;
            if (!found || c.level > best.cube.level) {
                best = {alpha, c, c.measure() / q.measure()};
                found = true;
            }
            break;
        }
    }
    return best;
}

} // namespace sdlab
