#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdlab/dyadic.hpp"
#include "sdlab/flow.hpp"
#include "sdlab/grid_io.hpp"
#include "sdlab/maximal.hpp"
#include "sdlab/vector_grid.hpp"

namespace sdlab {

/// Cubes of the standard grid with sparseness parameter η and an optional certificate.
struct SparseFamily {
    double eta = 0.5;
    std::vector<DyadicCube> cubes;
    bool certified = false;
    int certificate_depth = 0;               ///< depth of the cells listed in `cells`
    std::vector<std::vector<std::size_t>> cells; ///< E_Q as finest cells, parallel to `cubes`

    friend bool operator==(const SparseFamily&, const SparseFamily&) = default;
};

struct SparseRefutation {
    std::vector<std::size_t> cubes; ///< indices of a Hall-violating subfamily
    double demand = 0;              ///< η Σ|Q| over that subfamily
    double available = 0;           ///< measure of the union of those cubes
};

struct SparseVerdict {
    bool sparse = false;
    SparseFamily family;
    SparseRefutation refutation;
};

namespace detail {

/// Finest cells at depth W covered by a standard-grid cube of level ≤ W.
inline std::vector<std::size_t> cells_of(const DyadicCube& q, int W) {
    const int s = W - q.level;
    const std::int64_t span = std::int64_t{1} << s;
    const std::size_t n = std::size_t{1} << W;
    std::vector<std::size_t> out;
    const auto x0 = static_cast<std::size_t>(q.index[0] * span);
    if (q.dim == 1) {
        for (std::int64_t i = 0; i < span; ++i) out.push_back(x0 + static_cast<std::size_t>(i));
    } else {
        const auto y0 = static_cast<std::size_t>(q.index[1] * span);
        for (std::int64_t j = 0; j < span; ++j)
            for (std::int64_t i = 0; i < span; ++i)
                out.push_back((y0 + static_cast<std::size_t>(j)) * n + x0 + static_cast<std::size_t>(i));
    }
    return out;
}

inline DyadicCube cell_cube(int d, int W, std::size_t cell) {
    const std::size_t n = std::size_t{1} << W;
    DyadicCube q{d, W, {static_cast<std::int64_t>(cell % n), 0}, 0};
    if (d == 2) q.index[1] = static_cast<std::int64_t>(cell / n);
    return q;
}

inline void check_standard(const std::vector<DyadicCube>& cubes) {
    for (const auto& q : cubes) {
        if (q.shift != 0) throw ResolutionError("shifted cubes are not unions of finest cells");
        if (q.level < 0) throw ConfigError("sparse families live inside the unit cube");
        if (q.dim != cubes.front().dim) throw ConfigError("cubes of different dimensions");
    }
}

/// Smallest depth at which every demand η|Q| is a whole number of cells.
inline int working_depth(const std::vector<DyadicCube>& cubes, double eta) {
    if (cubes.empty()) return 0;
    const int d = cubes.front().dim;
    int top = 0;
    for (const auto& q : cubes) top = std::max(top, q.level);
    const int cap = d == 1 ? 20 : 10;
    for (int W = top; W <= cap; ++W) {
        bool ok = true;
        for (const auto& q : cubes) {
            const double x = eta * std::ldexp(1.0, d * (W - q.level));
            if (std::abs(x - std::round(x)) > 1e-9 || std::round(x) < 1) {
                ok = false;
                break;
            }
        }
        if (ok) return W;
    }
    throw ResolutionError("eta * |Q| is not a whole number of cells at any supported depth");
}

} // namespace detail

/// Σ_{Q∈S, Q⊆P}|Q| / |P| maximised over P ∈ S; η-sparse families keep this ≤ 1/η.
inline double carleson_constant(const std::vector<DyadicCube>& cubes) {
    std::map<DyadicCube, double> packed;
    for (const auto& q : cubes) packed[q] = 0;
    for (const auto& q : cubes) {
        DyadicCube p = q;
        while (true) {
            auto it = packed.find(p);
            if (it != packed.end()) it->second += q.measure();
            if (p.level <= 0) break;
            p = parent(p);
        }
    }
    double worst = 0;
    for (const auto& [p, s] : packed) worst = std::max(worst, s / p.measure());
    return worst;
}

/// Decides η-sparseness exactly by max-flow between cubes and finest cells.
inline SparseVerdict verify_sparse(std::vector<DyadicCube> cubes, double eta) {
    if (!(eta > 0) || !(eta < 1 + 1e-15)) throw DomainError("eta must lie in (0,1]");
    std::sort(cubes.begin(), cubes.end());
    cubes.erase(std::unique(cubes.begin(), cubes.end()), cubes.end());
    SparseVerdict v;
    v.family.eta = eta;
    v.family.cubes = cubes;
    if (cubes.empty()) {
        v.sparse = v.family.certified = true;
        return v;
    }
    detail::check_standard(cubes);
    const int d = cubes.front().dim;
    const int W = detail::working_depth(cubes, eta);
    const std::size_t ncell = std::size_t{1} << (d * W);
    const std::size_t nq = cubes.size();
    const std::size_t src = nq + ncell, sink = src + 1;
    detail::MaxFlow g(nq + ncell + 2);
    std::int64_t demand_total = 0;
    std::vector<std::int64_t> demand(nq);
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> arcs(nq);
    for (std::size_t i = 0; i < nq; ++i) {
        demand[i] = std::llround(eta * std::ldexp(1.0, d * (W - cubes[i].level)));
        demand_total += demand[i];
        g.add_edge(src, i, demand[i]);
        for (auto c : detail::cells_of(cubes[i], W)) arcs[i].emplace_back(c, g.add_edge(i, nq + c, demand[i]));
    }
    for (std::size_t c = 0; c < ncell; ++c) g.add_edge(nq + c, sink, 1);
    const std::int64_t flow = g.run(src, sink);
    const double cell = std::ldexp(1.0, -d * W);

    if (flow < demand_total) {
        const auto seen = g.reachable(src);
        std::vector<bool> covered(ncell, false);
        for (std::size_t i = 0; i < nq; ++i) {
            if (!seen[i]) continue;
            v.refutation.cubes.push_back(i);
            v.refutation.demand += demand[i] * cell;
            for (auto [c, e] : arcs[i]) covered[c] = true;
        }
        v.refutation.available = static_cast<double>(std::count(covered.begin(), covered.end(), true)) * cell;
        return v;
    }

    std::vector<std::ptrdiff_t> owner(ncell, -1);
    for (std::size_t i = 0; i < nq; ++i)
        for (auto [c, e] : arcs[i])
            if (g.flow(e) > 0) owner[c] = static_cast<std::ptrdiff_t>(i);
    // Unused cells go to the smallest family cube containing them.
    std::map<DyadicCube, std::size_t> index;
    for (std::size_t i = 0; i < nq; ++i) index[cubes[i]] = i;
    for (std::size_t c = 0; c < ncell; ++c) {
        if (owner[c] >= 0) continue;
        DyadicCube p = detail::cell_cube(d, W, c);
        while (true) {
            auto it = index.find(p);
            if (it != index.end()) {
                owner[c] = static_cast<std::ptrdiff_t>(it->second);
                break;
            }
            if (p.level == 0) break;
            p = parent(p);
        }
    }
    v.family.certified = true;
    v.family.certificate_depth = W;
    v.family.cells.assign(nq, {});
    for (std::size_t c = 0; c < ncell; ++c)
        if (owner[c] >= 0) v.family.cells[static_cast<std::size_t>(owner[c])].push_back(c);
    v.sparse = true;
    return v;
}

/// Independent validation of a certificate: disjointness, containment, measure lower bound.
inline bool certificate_valid(const SparseFamily& s) {
    if (!s.certified) return false;
    if (s.cubes.empty()) return true;
    if (s.cells.size() != s.cubes.size()) return false;
    const int d = s.cubes.front().dim, W = s.certificate_depth;
    std::vector<bool> used(std::size_t{1} << (d * W), false);
    for (std::size_t i = 0; i < s.cubes.size(); ++i) {
        const auto& q = s.cubes[i];
        if (q.level > W) return false;
        for (auto c : s.cells[i]) {
            if (c >= used.size() || used[c]) return false;
            used[c] = true;
            if (!contains(q, detail::cell_cube(d, W, c))) return false;
        }
        const double have = s.cells[i].size() * std::ldexp(1.0, -d * W);
        if (have < s.eta * q.measure() - 1e-12) return false;
    }
    return true;
}

struct DualFactor {
    const GridFunction* g = nullptr;
    Exponent sigma = Exponent::of(1);
};

/// (Σ_{Q∈S} (Π⟨f_j⟩_{r_j,Q})^q ⟨g⟩^q_{σ,Q} |Q|)^{1/q}.
inline double sparse_form(const std::vector<DyadicCube>& cubes, const std::vector<GridFunction>& f, const Exponents& r,
                          double q = 1.0, DualFactor g = {}) {
    if (f.size() != r.size()) throw ConfigError("need one exponent per function");
    if (!(q > 0)) throw DomainError("q must be positive");
    if (f.empty()) throw ConfigError("need at least one function");
    double s = 0;
    for (const auto& Q : cubes) {
        const auto fp = footprint(Q, f.front().depth());
        double a = 1;
        for (std::size_t j = 0; j < f.size(); ++j) a *= average(f[j].values(), r[j], fp);
        if (g.g) a *= average(g.g->values(), g.sigma, fp);
        s += std::pow(a, q) * fp.measure;
    }
    return std::pow(s, 1.0 / q);
}

inline double sparse_form(const SparseFamily& S, const std::vector<GridFunction>& f, const Exponents& r, double q = 1.0,
                          DualFactor g = {}) {
    return sparse_form(S.cubes, f, r, q, g);
}

enum class OptimizeMode { Exact, Greedy };

struct SparseOptimum {
    double value = 0;
    SparseFamily family;
    double factor = 0;      ///< greedy selection factor finally used (0 in exact mode)
    double maximal_l1 = 0;  ///< ‖M^D_{r⃗}(f⃗)‖_{L¹}
    double c = 0;           ///< value / ‖M^D_{r⃗}(f⃗)‖_{L¹}
    std::size_t flow_checks = 0;
};

namespace detail {

inline std::vector<double> cube_products(const std::vector<GridFunction>& f, const Exponents& r, const CubeCollection& D) {
    std::vector<const std::vector<double>*> fs;
    for (const auto& g : f) fs.push_back(&g.values());
    return product_averages(fs, r, D);
}

/// Principal cubes: from each selected Q, select the maximal P ⊊ Q with value(P) > factor·value(Q).
inline std::vector<std::size_t> principal_cubes(const Grid& grid, const std::vector<double>& value, double factor) {
    std::vector<std::size_t> selected;
    std::vector<std::size_t> queue;
    for (std::size_t i = 0; i < grid.level_size(0); ++i) queue.push_back(grid.level_begin(0) + i);
    while (!queue.empty()) {
        const auto top = queue.back();
        queue.pop_back();
        selected.push_back(top);
        std::vector<std::size_t> stack = grid.child_ids(top);
        while (!stack.empty()) {
            const auto p = stack.back();
            stack.pop_back();
            if (value[p] > factor * value[top]) {
                queue.push_back(p);
            } else {
                for (auto c : grid.child_ids(p)) stack.push_back(c);
            }
        }
    }
    std::sort(selected.begin(), selected.end());
    return selected;
}

} // namespace detail

/// Maximises Σ_{Q∈S} Π⟨f_j⟩_{r_j,Q}|Q| over η-sparse S ⊆ grid (exact) or runs principal cubes (greedy).
inline SparseOptimum optimal_sparse_form(const std::vector<GridFunction>& f, const Exponents& r, const Grid& grid,
                                         OptimizeMode mode, double eta = 0.5) {
    if (grid.shift() != 0) throw ConfigError("sparse optimisation runs on the standard grid");
    if (f.empty() || f.front().dim() != grid.dim() || f.front().depth() != grid.depth())
        throw ConfigError("functions and grid differ");
    const auto D = CubeCollection::of(grid);
    const auto value = detail::cube_products(f, r, D);
    SparseOptimum out;
    out.maximal_l1 = grid_norm(scalar_maximal(f, r, D), Exponent::of(1));

    if (mode == OptimizeMode::Greedy) {
        double factor = 2;
        for (int k = 0; k <= 20; ++k, factor *= 2) {
            const auto ids = detail::principal_cubes(grid, value, factor);
            std::vector<DyadicCube> cubes;
            double s = 0;
            for (auto i : ids) {
                cubes.push_back(D.cube(i));
                s += value[i] * D.footprint(i).measure;
            }
            ++out.flow_checks;
            auto v = verify_sparse(cubes, eta);
            if (v.sparse) {
                out.value = s;
                out.family = v.family;
                out.factor = factor;
                out.c = out.maximal_l1 > 0 ? s / out.maximal_l1 : 0;
                return out;
            }
        }
        throw ResolutionError("principal cubes did not become sparse after 20 doublings");
    }

    const std::size_t n = D.size();
    if (n > 18) throw SizeError("exact sparse optimisation is capped at 18 cubes, grid has " + std::to_string(n));
    std::vector<double> weight(n), measure(n);
    for (std::size_t i = 0; i < n; ++i) {
        measure[i] = D.footprint(i).measure;
        weight[i] = value[i] * measure[i];
    }
    const std::uint32_t total = std::uint32_t{1} << n;
    std::vector<std::pair<double, std::uint32_t>> candidates;
    candidates.reserve(total);
    for (std::uint32_t mask = 0; mask < total; ++mask) {
        double s = 0, packed = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask >> i & 1u) {
                s += weight[i];
                packed += measure[i];
            }
        if (eta * packed <= 1 + 1e-12) candidates.emplace_back(s, mask);
    }
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    for (const auto& [s, mask] : candidates) {
        std::vector<DyadicCube> cubes;
        for (std::size_t i = 0; i < n; ++i)
            if (mask >> i & 1u) cubes.push_back(D.cube(i));
        if (carleson_constant(cubes) > 1 / eta + 1e-12) continue;
        ++out.flow_checks;
        auto v = verify_sparse(cubes, eta);
        if (!v.sparse) continue;
        out.value = s;
        out.family = v.family;
        out.c = out.maximal_l1 > 0 ? s / out.maximal_l1 : 0;
        return out;
    }
    return out;
}

/// Parts of the Calderón–Zygmund splitting at height λ.
struct CZParts {
    double lambda = 1;
    Exponents r;
    Exponent r_total = Exponent::of(1);
    std::vector<double> threshold;              ///< λ^{r/r_j}
    std::vector<GridFunction> f;                ///< normalised inputs
    std::vector<GridFunction> good, good1, good2;
    GridFunction bad;
    std::vector<std::vector<DyadicCube>> stopping; ///< 𝒮_j; negative levels are ancestors [0,2^J)^d
    std::vector<std::vector<bool>> level_set;     ///< cells of O_j ∩ [0,1)^d
    std::vector<double> level_set_measure;        ///< |O_j| including the part outside the unit cube
};

/// Splits f⃗ at height λ. The standard grid is embedded in the dyadic grid of ℝ^d, so the
/// ancestors [0,2^J)^d of the unit cube compete in the maximal-cube selection.
inline CZParts cz_decompose(const std::vector<GridFunction>& f, const Exponents& r, double lambda,
                            const std::vector<double>& norms = {}) {
    if (!(lambda > 0) || !std::isfinite(lambda)) throw DomainError("lambda must be positive");
    if (f.empty() || f.size() != r.size()) throw ConfigError("need one exponent per function");
    if (!norms.empty() && norms.size() != f.size()) throw ConfigError("need one norm per function");
    const std::size_t m = f.size();
    const int d = f.front().dim(), L = f.front().depth();
    const Grid grid = build_grid(d, L);
    const auto D = CubeCollection::of(grid);

    CZParts z;
    z.lambda = lambda;
    z.r = r;
    z.r_total = harmonic_sum(r);
    for (std::size_t j = 0; j < m; ++j) {
        double nj = norms.empty() ? grid_norm(f[j], r[j]) : norms[j];
        GridFunction fj = f[j];
        if (nj > 0)
            for (auto& v : fj.values()) v = std::abs(v) / nj;
        z.f.push_back(std::move(fj));
        z.threshold.push_back(std::pow(lambda, r[j].reciprocal() / z.r_total.reciprocal()));
    }

    const std::size_t ncell = f.front().size();
    for (std::size_t j = 0; j < m; ++j) {
        const double thr = z.threshold[j];
        const auto avg = D.averages(z.f[j].values(), r[j]);
        std::vector<DyadicCube> S;
        std::vector<bool> inO(ncell, false);
        double Omeasure = 0;
        GridFunction g1 = z.f[j], g2(d, L);

        const double root = avg[grid.level_begin(0)];
        if (root > thr) {
            // Ancestor averages are 2^{-Jd/r_j} times the root average.
            int J = 0;
            if (!r[j].is_infinite())
                while (root * std::pow(2.0, -(J + 1) * d * r[j].reciprocal()) > thr && J < 1000) ++J;
            DyadicCube top{d, -J, {0, 0}, 0};
            S.push_back(top);
            Omeasure = top.measure();
            const double a = root * std::pow(2.0, -J * d * r[j].reciprocal());
            for (std::size_t c = 0; c < ncell; ++c) {
                inO[c] = true;
                g1[c] = 0;
                g2[c] = a;
            }
        } else {
            std::vector<std::size_t> stack = grid.child_ids(grid.level_begin(0));
            while (!stack.empty()) {
                const auto p = stack.back();
                stack.pop_back();
                if (avg[p] > thr) {
                    S.push_back(grid.cube(p));
                    Omeasure += D.footprint(p).measure;
                    for (const auto& c : D.footprint(p).cells) {
                        inO[c.cell] = true;
                        g1[c.cell] = 0;
                        g2[c.cell] = avg[p];
                    }
                } else {
                    for (auto c : grid.child_ids(p)) stack.push_back(c);
                }
            }
        }
        std::sort(S.begin(), S.end());
        GridFunction g = g1;
        for (std::size_t c = 0; c < ncell; ++c) g[c] += g2[c];
        z.stopping.push_back(std::move(S));
        z.level_set.push_back(std::move(inO));
        z.level_set_measure.push_back(Omeasure);
        z.good1.push_back(std::move(g1));
        z.good2.push_back(std::move(g2));
        z.good.push_back(std::move(g));
    }

    // b(x) = max_{P∋x} (Π⟨f_j⟩_P − Π a_j(P)), a_j(P) = ⟨g_j⟩_P unless P lies inside a cube of 𝒮_j.
    std::vector<double> prod_f(D.size(), 1.0), prod_a(D.size(), 1.0);
    for (std::size_t j = 0; j < m; ++j) {
        const auto af = D.averages(z.f[j].values(), r[j]);
        const auto ag = D.averages(z.good[j].values(), r[j]);
        std::map<DyadicCube, bool> chosen;
        bool everything = false;
        for (const auto& q : z.stopping[j]) {
            chosen[q] = true;
            if (q.level <= 0) everything = true;
        }
        for (std::size_t i = 0; i < D.size(); ++i) {
            bool inside = everything;
            for (DyadicCube p = D.cube(i); !inside; p = parent(p)) {
                inside = chosen.count(p) > 0;
                if (p.level == 0) break;
            }
            prod_f[i] *= af[i];
            prod_a[i] *= inside ? 0.0 : ag[i];
        }
    }
    std::vector<double> rem(D.size());
    // Cubes containing whole stopping cubes have ⟨g_j⟩ = ⟨f_j⟩ exactly; drop the rounding residue.
    for (std::size_t i = 0; i < D.size(); ++i) {
        const double diff = prod_f[i] - prod_a[i];
        rem[i] = diff > 1e-12 * prod_f[i] ? diff : 0.0;
    }
    z.bad = GridFunction(d, L, spread_max(rem, D));
    return z;
}

struct CZCheck {
    std::size_t violations = 0;
    double worst_good1 = 0;  ///< max ‖g_j¹‖_∞ / λ^{r/r_j}
    double worst_good2 = 0;  ///< max g_j² / (2^{d/r_j} λ^{r/r_j})
    double bad_measure = 0;  ///< |{b > λ}|
    double bad_bound = 0;    ///< m / λ^r
    bool support_ok = true;  ///< supp b ⊆ ∪O_j
    bool splitting_ok = true; ///< M(f⃗) ≤ M(g⃗) + b
};

/// Evaluates the three proof estimates plus the structural identities on a decomposition.
inline CZCheck cz_check(const CZParts& z) {
    constexpr double rel = 1e-12;
    CZCheck c;
    const std::size_t m = z.f.size();
    const int d = z.f.front().dim(), L = z.f.front().depth();
    const std::size_t ncell = z.f.front().size();
    for (std::size_t j = 0; j < m; ++j) {
        const double thr = z.threshold[j];
        const double cap2 = std::pow(2.0, d * z.r[j].reciprocal()) * thr;
        for (std::size_t x = 0; x < ncell; ++x) {
            c.worst_good1 = std::max(c.worst_good1, z.good1[j][x] / thr);
            c.worst_good2 = std::max(c.worst_good2, z.good2[j][x] / cap2);
        }
    }
    if (c.worst_good1 > 1 + rel) ++c.violations;
    if (c.worst_good2 > 1 + rel) ++c.violations;
    std::size_t above = 0;
    for (std::size_t x = 0; x < ncell; ++x) {
        if (z.bad[x] > z.lambda) ++above;
        if (z.bad[x] > 0) {
            bool in = false;
            for (std::size_t j = 0; j < m; ++j) in = in || z.level_set[j][x];
            if (!in) c.support_ok = false;
        }
    }
    c.bad_measure = above * z.f.front().cell_measure();
    c.bad_bound = m * std::pow(z.lambda, -1.0 / z.r_total.reciprocal());
    if (c.bad_measure > c.bad_bound * (1 + rel)) ++c.violations;
    if (!c.support_ok) ++c.violations;

    const auto D = CubeCollection::of(build_grid(d, L));
    const auto Mf = scalar_maximal(z.f, z.r, D);
    const auto Mg = scalar_maximal(z.good, z.r, D);
    for (std::size_t x = 0; x < ncell; ++x)
        if (Mf[x] > (Mg[x] + z.bad[x]) * (1 + rel) + 1e-300) c.splitting_ok = false;
    if (!c.splitting_ok) ++c.violations;
    return c;
}

struct StoppingOptions {
    double c_initial = 1.0;
    double eta = 0.5;
    int max_doublings = 20;
};

struct StoppingCertificate {
    SparseFamily family;
    double c_stop = 1;
    int doublings = 0;
    std::vector<double> cube_value;  ///< Π⟨‖f_j‖_{X_j}⟩_{r_j,Q} per family cube
    std::vector<double> cube_ratio;  ///< local domination ratio per family cube, ≤ 1 by construction
    double implied_weak_constant = 0; ///< C_stop / 2^{1/r}, the A₀ the stopping threshold corresponds to
    double pointwise_ratio = 0;      ///< max over cells of ‖M̃F⃗(x)‖_X / (C_stop (Σ A(Q)^q 1_Q(x))^{1/q})
    bool pointwise_holds = false;
};

inline nlohmann::json to_json(const SparseFamily& s);

/// Stopping-time sparse domination of the lattice maximal operator with an adaptive threshold.
inline StoppingCertificate stopping_domination(const std::vector<VectorGridFunction>& F, const Exponents& r, double q,
                                               const std::vector<SpaceSpec>& xs, const StoppingOptions& opt = {}) {
    const std::size_t m = F.size();
    if (m == 0 || r.size() != m || xs.size() != m) throw ConfigError("need one exponent and one space per function");
    check_same_measure(xs);
    if (!(q > 0)) throw DomainError("q must be positive");
    const std::size_t n = xs.front().size();
    for (const auto& g : F)
        if (g.atoms() != n || g.dim() != F.front().dim() || g.depth() != F.front().depth())
            throw ConfigError("inputs must share atoms and grid");
    const int d = F.front().dim(), L = F.front().depth();
    const Grid grid = build_grid(d, L);
    const auto D = CubeCollection::of(grid);
    const std::size_t nq = D.size();

    std::function<double(std::span<const double>)> xnorm;
    double conv;
    if (all_lebesgue(xs)) {
        auto X = std::make_shared<SpaceSpec>(lebesgue_product(xs));
        conv = X->convexity();
        xnorm = [X](std::span<const double> v) { return norm(*X, v); };
    } else {
        double inv = 0;
        for (const auto& x : xs) inv += 1 / x.convexity();
        conv = 1 / inv;
        xnorm = [xs](std::span<const double> v) { return product_norm(xs, v); };
    }
    if (conv < q - 1e-12) throw ConfigError("the product space must be q-convex");

    std::vector<double> A(nq, 1.0);
    std::vector<double> P(nq * n, 1.0); // per cube, per atom Π_j ⟨F_j(·,ω)⟩_{r_j,Q}
    for (std::size_t j = 0; j < m; ++j) {
        const auto avg = D.averages(F[j].norms(xs[j]).values(), r[j]);
        for (std::size_t i = 0; i < nq; ++i) A[i] *= avg[i];
        for (std::size_t w = 0; w < n; ++w) {
            const auto s = D.averages(F[j].slice(w).values(), r[j]);
            for (std::size_t i = 0; i < nq; ++i) P[i * n + w] *= s[i];
        }
    }

    const Exponent rr = harmonic_sum(r);
    double C = opt.c_initial;
    for (int k = 0; k <= opt.max_doublings; ++k, C *= 2) {
        std::vector<std::size_t> family;
        std::vector<double> ratio;
        std::vector<std::size_t> queue;
        for (std::size_t i = 0; i < grid.level_size(0); ++i) queue.push_back(grid.level_begin(0) + i);
        while (!queue.empty()) {
            const auto top = queue.back();
            queue.pop_back();
            family.push_back(top);
            const double bound = C * A[top];
            std::vector<double> base(P.begin() + top * n, P.begin() + (top + 1) * n);
            double local = xnorm(base);
            struct Frame {
                std::size_t id;
                std::vector<double> sup;
            };
            std::vector<Frame> stack;
            for (auto c : grid.child_ids(top)) stack.push_back({c, base});
            while (!stack.empty()) {
                Frame fr = std::move(stack.back());
                stack.pop_back();
                for (std::size_t w = 0; w < n; ++w) fr.sup[w] = std::max(fr.sup[w], P[fr.id * n + w]);
                const double val = xnorm(fr.sup);
                if (val > bound) {
                    queue.push_back(fr.id);
                } else {
                    local = std::max(local, val);
                    for (auto c : grid.child_ids(fr.id)) stack.push_back({c, fr.sup});
                }
            }
            ratio.push_back(bound > 0 ? local / bound : (local > 0 ? INFINITY : 0.0));
        }
        std::vector<DyadicCube> cubes;
        for (auto i : family) cubes.push_back(D.cube(i));
        auto verdict = verify_sparse(cubes, opt.eta);
        if (!verdict.sparse) continue;

        StoppingCertificate cert;
        cert.family = verdict.family;
        cert.c_stop = C;
        cert.doublings = k;
        cert.implied_weak_constant = C / std::pow(2.0, rr.reciprocal());
        // verify_sparse sorts the cubes; realign per-cube data with the certificate order.
        std::map<DyadicCube, std::size_t> pos;
        for (std::size_t t = 0; t < family.size(); ++t) pos[D.cube(family[t])] = t;
        for (const auto& q3 : cert.family.cubes) {
            const auto t = pos.at(q3);
            cert.cube_value.push_back(A[family[t]]);
            cert.cube_ratio.push_back(ratio[t]);
        }

        const auto MF = lattice_maximal(F, r, D);
        std::vector<double> agg(F.front().cells(), 0.0);
        for (auto i : family)
            for (const auto& c : D.footprint(i).cells) agg[c.cell] += std::pow(A[i], q);
        double worst = 0;
        for (std::size_t c = 0; c < agg.size(); ++c) {
            const double lhs = xnorm(MF.cell(c));
            const double rhs = C * std::pow(agg[c], 1 / q);
            if (lhs == 0) continue;
            worst = std::max(worst, rhs > 0 ? lhs / rhs : INFINITY);
        }
        cert.pointwise_ratio = worst;
        cert.pointwise_holds = worst <= 1 + 1e-9;
        return cert;
    }

    nlohmann::json dump;
    dump["r"] = nlohmann::json::array();
    for (const auto& e : r) dump["r"].push_back(exponent_json(e));
    dump["q"] = q;
    dump["last_c_stop"] = C / 2;
    dump["spaces"] = nlohmann::json::array();
    for (const auto& x : xs) dump["spaces"].push_back(to_json(x));
    dump["inputs"] = nlohmann::json::array();
    for (const auto& g : F) dump["inputs"].push_back({{"d", d}, {"L", L}, {"atoms", g.atoms()}, {"values", g.values()}});
    throw CounterexampleCandidate("stopping construction not sparse after " + std::to_string(opt.max_doublings) +
                                      " doublings",
                                  dump.dump());
}

struct FormBound {
    double numerator = 0;   ///< ‖T(f⃗)·g‖_{L^q}
    double denominator = 0; ///< ‖M_{(r⃗,q)}(f⃗,g)‖_{L^q}
    double ratio = 0;
    bool inconsistent = false;
    bool hypothesis_checked = false;
    bool hypothesis_holds = false;
    double hypothesis_ratio = 0; ///< max_x |T(x)| / (C_T (Σ_S (Π⟨f_j⟩_Q)^q 1_Q(x))^{1/q})
};

struct SparseHypothesis {
    const SparseFamily* family = nullptr;
    double c_t = 1;
};

/// Ratio ‖T(f⃗)·g‖_{L^q} / ‖M_{(r⃗,q)}(f⃗,g)‖_{L^q}, optionally checking the pointwise sparse hypothesis.
inline FormBound form_bound_from_pointwise(const GridFunction& T, const std::vector<GridFunction>& f,
                                           const GridFunction& g, const Exponents& r, double q,
                                           const CubeCollection& D, std::optional<SparseHypothesis> hyp = {}) {
    if (!(q > 0)) throw DomainError("q must be positive");
    FormBound out;
    const Exponent eq = Exponent::of(q);
    std::vector<double> tg(T.size());
    for (std::size_t c = 0; c < tg.size(); ++c) tg[c] = T[c] * g[c];
    out.numerator = grid_norm(tg, T.cell_measure(), eq);
    std::vector<GridFunction> all = f;
    all.push_back(g);
    Exponents rs = r;
    rs.push_back(eq);
    out.denominator = grid_norm(scalar_maximal(all, rs, D), eq);
    if (out.denominator > 0) {
        out.ratio = out.numerator / out.denominator;
    } else if (out.numerator > 0) {
        out.ratio = INFINITY;
        out.inconsistent = true;
    }
    if (hyp && hyp->family) {
        out.hypothesis_checked = true;
        const auto& S = *hyp->family;
        std::vector<double> agg(T.size(), 0.0);
        for (const auto& Q : S.cubes) {
            const auto fp = footprint(Q, T.depth());
            double a = 1;
            for (std::size_t j = 0; j < f.size(); ++j) a *= average(f[j].values(), r[j], fp);
            for (const auto& c : fp.cells) agg[c.cell] += std::pow(a, q);
        }
        double worst = 0;
        for (std::size_t c = 0; c < agg.size(); ++c) {
            const double t = std::abs(T[c]);
            if (t == 0) continue;
            const double rhs = hyp->c_t * std::pow(agg[c], 1 / q);
            worst = std::max(worst, rhs > 0 ? t / rhs : INFINITY);
        }
        out.hypothesis_ratio = worst;
        const bool sparse = S.certified ? certificate_valid(S) : verify_sparse(S.cubes, S.eta).sparse;
        out.hypothesis_holds = sparse && worst <= 1 + 1e-9;
    }
    return out;
}

inline nlohmann::json to_json(const SparseFamily& s) {
    nlohmann::json j;
    j["eta"] = s.eta;
    j["cubes"] = nlohmann::json::array();
    for (const auto& q : s.cubes) j["cubes"].push_back(to_json(q));
    if (s.certified) {
        j["certificate_depth"] = s.certificate_depth;
        j["certificate"] = nlohmann::json::array();
        for (std::size_t i = 0; i < s.cells.size(); ++i) j["certificate"].push_back({{"cube", i}, {"cells", s.cells[i]}});
    }
    return j;
}

inline SparseFamily sparse_family_from_json(const nlohmann::json& j) {
    SparseFamily s;
    s.eta = j.at("eta").get<double>();
    for (const auto& q : j.at("cubes")) s.cubes.push_back(cube_from_json(q));
    if (j.contains("certificate")) {
        s.certified = true;
        s.certificate_depth = j.at("certificate_depth").get<int>();
        s.cells.assign(s.cubes.size(), {});
        for (const auto& e : j.at("certificate")) {
            const auto i = e.at("cube").get<std::size_t>();
            if (i >= s.cubes.size()) throw ConfigError("certificate refers to a missing cube");
            s.cells[i] = e.at("cells").get<std::vector<std::size_t>>();
        }
    }
    return s;
}

} // namespace sdlab
