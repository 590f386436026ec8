#include "w2lab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "w2lab/quadrature.hpp"

namespace w2lab::transport {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Morton (Z-curve) order of a point set inside a shared bounding box, used
// to warm start the network simplex with geometrically local pairings.
std::vector<int> morton_order(const PointConfiguration& pts, const std::vector<double>& lo,
                              const std::vector<double>& hi) {
    const int d = pts.dim();
    const int bits = 16;
    std::vector<std::pair<std::uint64_t, int>> keys(pts.size());
    for (std::size_t p = 0; p < pts.size(); ++p) {
        std::uint64_t code = 0;
        for (int b = bits - 1; b >= 0; --b)
            for (int a = 0; a < d; ++a) {
                const double range = std::max(hi[a] - lo[a], 1e-300);
                double t = (pts.coord(p, a) - lo[a]) / range;
                t = std::clamp(t, 0.0, 1.0 - 1e-12);
                const std::uint32_t cell = static_cast<std::uint32_t>(t * 65536.0);
                code = (code << 1) | ((cell >> b) & 1u);
            }
        keys[p] = {code, static_cast<int>(p)};
    }
    std::sort(keys.begin(), keys.end());
    std::vector<int> order(pts.size());
    for (std::size_t p = 0; p < pts.size(); ++p) order[p] = keys[p].second;
    return order;
}

// Area of an axis-aligned rectangle intersected with the unit disk.
double rect_unit_disk_area(double x0, double x1, double y0, double y1) {
    x0 = std::clamp(x0, -1.0, 1.0);
    x1 = std::clamp(x1, -1.0, 1.0);
    if (x1 <= x0 || y0 >= 1.0 || y1 <= -1.0) return 0.0;
    // Antiderivative of sqrt(1 - x^2).
    auto G = [](double x) { return 0.5 * (x * std::sqrt(std::max(0.0, 1.0 - x * x)) + std::asin(std::clamp(x, -1.0, 1.0))); };
    // Breakpoints where the chord heights cross the rectangle's y-range.
    std::vector<double> cuts{x0, x1};
    auto add_cut = [&](double y) {
        const double yy = 1.0 - y * y;
        if (yy > 0.0) {
            const double x = std::sqrt(yy);
            for (double c : {-x, x})
                if (c > x0 && c < x1) cuts.push_back(c);
        }
    };
    add_cut(y0);
    add_cut(y1);
    std::sort(cuts.begin(), cuts.end());
    double area = 0.0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double a = cuts[s], b = cuts[s + 1];
        if (b <= a) continue;
        // No crossing inside (a, b): classify once at the midpoint.
        const double xm = 0.5 * (a + b);
        const double g = std::sqrt(std::max(0.0, 1.0 - xm * xm));
        const bool top_is_chord = g < y1;
        const bool bot_is_chord = -g > y0;
        if (top_is_chord && bot_is_chord) {
            area += 2.0 * (G(b) - G(a));
        } else if (top_is_chord) {
            if (g > y0) area += (G(b) - G(a)) - y0 * (b - a);
        } else if (bot_is_chord) {
            if (y1 > -g) area += y1 * (b - a) + (G(b) - G(a));
        } else {
            area += (y1 - y0) * (b - a);
        }
    }
    return area;
}

// Lebesgue measure of cell ∩ domain, exact for boxes, disks and ellipses.
double cell_domain_volume(const Domain& domain, const std::vector<double>& lo,
                          const std::vector<double>& hi) {
    if (domain.kind() == Domain::Kind::Box) {
        double v = 1.0;
        for (int a = 0; a < domain.dim(); ++a) {
            const double l = std::max(lo[a], domain.lo()[a]);
            const double h = std::min(hi[a], domain.hi()[a]);
            if (h <= l) return 0.0;
            v *= h - l;
        }
        return v;
    }
    const auto c = domain.center();
    const double ax = domain.semi_x(), ay = domain.semi_y();
    return ax * ay * rect_unit_disk_area((lo[0] - c[0]) / ax, (hi[0] - c[0]) / ax,
                                         (lo[1] - c[1]) / ay, (hi[1] - c[1]) / ay);
}

} // namespace

double w2_bruteforce(const PointConfiguration& a, const PointConfiguration& b) {
    if (a.size() != b.size()) throw std::invalid_argument("w2_bruteforce: size mismatch");
    if (a.dim() != b.dim()) throw std::invalid_argument("w2_bruteforce: dimension mismatch");
    if (a.size() > 8) throw std::invalid_argument("w2_bruteforce: N > 8");
    const std::size_t n = a.size();
    if (n == 0) return 0.0;
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e300;
    do {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += sq_dist(a.point(i), b.point(perm[i]));
        best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::sqrt(best / static_cast<double>(n));
}

TransportPlanResult w2_assignment(const PointConfiguration& a, const PointConfiguration& b) {
    if (a.size() != b.size()) throw std::invalid_argument("w2_assignment: size mismatch");
    if (a.dim() != b.dim()) throw std::invalid_argument("w2_assignment: dimension mismatch");
    const int n = static_cast<int>(a.size());
    TransportPlanResult out;
    out.solver = "assignment";
    if (n == 0) return out;

    std::vector<double> cost(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            cost[static_cast<std::size_t>(i) * n + j] = sq_dist(a.point(i), b.point(j));

    // Shortest augmenting path assignment with dual potentials (rows
    // augmented one at a time, dense Dijkstra scan per row).
    constexpr double kInf = 1e300;
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> match(n + 1, n); // match[j] = row assigned to column j
    for (int i = 0; i < n; ++i) {
        std::vector<double> dist(n + 1, kInf);
        std::vector<int> from(n + 1, -1);
        std::vector<char> used(n + 1, 0);
        int j0 = n;
        match[n] = i;
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            double best = kInf;
            int j1 = -1;
            for (int j = 0; j < n; ++j) {
                if (used[j]) continue;
                const double cur = cost[static_cast<std::size_t>(i0) * n + j] - u[i0] - v[j];
                if (cur < dist[j]) {
                    dist[j] = cur;
                    from[j] = j0;
                }
                if (dist[j] < best) {
                    best = dist[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += best;
                    v[j] -= best;
                } else {
                    dist[j] -= best;
                }
            }
            j0 = j1;
        } while (match[j0] != n);
        while (j0 != n) {
            const int j1 = from[j0];
            match[j0] = match[j1];
            j0 = j1;
        }
    }

    double total = 0.0, comp = 0.0;
    const double w = 1.0 / static_cast<double>(n);
    for (int j = 0; j < n; ++j) {
        out.plan.push_back({match[j], j, w});
        const double term = w * cost[static_cast<std::size_t>(match[j]) * n + j] - comp;
        const double next = total + term;
        comp = (next - total) - term;
        total = next;
    }
    out.cost = std::sqrt(std::max(0.0, total));
    return out;
}

WeightedCloud quantize(const ReferenceMeasure& ref, int resolution) {
    if (resolution < 2) throw std::invalid_argument("quantize: resolution must be >= 2");
    const Domain& domain = ref.domain();
    const int d = domain.dim();
    std::vector<double> lo, hi;
    domain.bounding_box(lo, hi);
    std::vector<double> step(d);
    double half_diag_sq = 0.0;
    for (int a = 0; a < d; ++a) {
        step[a] = (hi[a] - lo[a]) / resolution;
        half_diag_sq += 0.25 * step[a] * step[a];
    }

    WeightedCloud cloud;
    cloud.points = PointConfiguration(d);
    cloud.quantization_bound = std::sqrt(half_diag_sq);

    const bool constant_density = ref.kind() == ReferenceMeasure::Kind::UniformOnDomain;
    GaussLegendre cell_rule = gauss_legendre(6, 0.0, 1.0);

    std::vector<int> idx(d, 0);
    std::vector<double> cell_lo(d), cell_hi(d), center(d);
    double mass_total = 0.0;
    while (true) {
        for (int a = 0; a < d; ++a) {
            cell_lo[a] = lo[a] + idx[a] * step[a];
            cell_hi[a] = cell_lo[a] + step[a];
            center[a] = 0.5 * (cell_lo[a] + cell_hi[a]);
        }
        double mass = 0.0;
        if (constant_density) {
            mass = cell_domain_volume(domain, cell_lo, cell_hi) / domain.area();
        } else if (domain.kind() == Domain::Kind::Box) {
            // Smooth density over a full cell: tensor Gauss-Legendre.
            std::vector<int> q(d, 0);
            std::vector<double> x(d);
            while (true) {
                double w = 1.0;
                for (int a = 0; a < d; ++a) {
                    x[a] = cell_lo[a] + cell_rule.nodes[q[a]] * step[a];
                    w *= cell_rule.weights[q[a]] * step[a];
                }
                mass += w * ref.density(x);
                int axis = 0;
                while (axis < d && ++q[axis] == 6) q[axis++] = 0;
                if (axis == d) break;
            }
        } else {
            // Non-constant density on a curved domain: quadrature against
            // the exact clipped volume, density sampled at the center.
            const double vol = cell_domain_volume(domain, cell_lo, cell_hi);
            if (vol > 0.0) {
                std::vector<double> probe = center;
                if (!domain.contains(probe)) {
                    // pull the probe toward the domain center
                    const auto c = domain.center();
                    probe[0] = 0.5 * (probe[0] + c[0]);
                    probe[1] = 0.5 * (probe[1] + c[1]);
                }
                mass = vol * ref.density(probe);
            }
        }
        if (mass > 0.0) {
            cloud.points.push_back(center);
            cloud.weights.push_back(mass);
            mass_total += mass;
        }
        int axis = 0;
        while (axis < d && ++idx[axis] == resolution) idx[axis++] = 0;
        if (axis == d) break;
    }

    if (mass_total < 1.0 - 1e-6)
        throw std::runtime_error("quantize: grid mass " + std::to_string(mass_total) +
                                 " (resolution too coarse for the domain shape)");
    for (double& w : cloud.weights) w /= mass_total;
    return cloud;
}

TransportPlanResult w2_to_cloud(const PointConfiguration& emp, const WeightedCloud& cloud,
                                std::int64_t max_cost_entries) {
    if (emp.empty()) throw std::invalid_argument("w2_to_cloud: empty configuration");
    if (emp.dim() != cloud.points.dim())
        throw std::invalid_argument("w2_to_cloud: dimension mismatch");
    const int n = static_cast<int>(emp.size());
    const int m = static_cast<int>(cloud.points.size());
    if (static_cast<std::int64_t>(n) * m > max_cost_entries)
        throw std::runtime_error("w2_to_cloud: problem size exceeds the configured limit");

    std::vector<double> supply(n, 1.0 / n);
    std::vector<double> demand = cloud.weights;
    // Exact float-level balance: fold the residual into the largest demand.
    double s_sum = 0.0, d_sum = 0.0;
    for (double v : supply) s_sum += v;
    for (double v : demand) d_sum += v;
    const auto dmax = std::max_element(demand.begin(), demand.end());
    *dmax += s_sum - d_sum;

    double scale = 0.0;
    std::vector<double> lo(emp.dim(), 1e300), hi(emp.dim(), -1e300);
    for (int a = 0; a < emp.dim(); ++a) {
        for (int i = 0; i < n; ++i) {
            lo[a] = std::min(lo[a], emp.coord(i, a));
            hi[a] = std::max(hi[a], emp.coord(i, a));
        }
        for (int j = 0; j < m; ++j) {
            lo[a] = std::min(lo[a], cloud.points.coord(j, a));
            hi[a] = std::max(hi[a], cloud.points.coord(j, a));
        }
        scale += (hi[a] - lo[a]) * (hi[a] - lo[a]);
    }

    const auto src_order = morton_order(emp, lo, hi);
    const auto snk_order = morton_order(cloud.points, lo, hi);

    // Pricing pool: the k nearest sinks of every source, the natural home
    // of all but a handful of entering arcs on geometric instances.
    std::vector<std::int64_t> pool;
    const bool use_pool = static_cast<std::int64_t>(n) * m >= 1'000'000;
    if (use_pool) {
        const int k = std::min<int>(m, std::max(64, 8 * m / n));
        std::vector<std::pair<double, int>> dist(m);
        pool.reserve(static_cast<std::size_t>(n) * k);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < m; ++j)
                dist[j] = {sq_dist(emp.point(i), cloud.points.point(j)), j};
            std::nth_element(dist.begin(), dist.begin() + k - 1, dist.end());
            for (int r = 0; r < k; ++r)
                pool.push_back(static_cast<std::int64_t>(i) * m + dist[r].second);
        }
        std::sort(pool.begin(), pool.end());
    }

    const auto res = solve_transportation(
        supply, demand,
        [&](int i, int j) { return sq_dist(emp.point(i), cloud.points.point(j)); },
        std::max(scale, 1e-12), 0, &src_order, &snk_order, use_pool ? &pool : nullptr);

    TransportPlanResult out;
    out.solver = "network-simplex";
    out.quantization_bound = cloud.quantization_bound;
    out.plan = res.plan;
    out.cost = std::sqrt(std::max(0.0, res.cost));
    return out;
}

TransportPlanResult w2_semidiscrete(const PointConfiguration& emp, const ReferenceMeasure& ref,
                                    int resolution, std::int64_t max_cost_entries) {
    return w2_to_cloud(emp, quantize(ref, resolution), max_cost_entries);
}

SinkhornResult w2_sinkhorn(const PointConfiguration& emp, const WeightedCloud& cloud,
                           const SinkhornOptions& opts) {
    if (!(opts.epsilon > 0.0)) throw std::invalid_argument("w2_sinkhorn: epsilon <= 0");
    const int n = static_cast<int>(emp.size());
    const int m = static_cast<int>(cloud.points.size());
    std::vector<double> cost(static_cast<std::size_t>(n) * m);
    double cmax = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            const double c = sq_dist(emp.point(i), cloud.points.point(j));
            cost[static_cast<std::size_t>(i) * m + j] = c;
            cmax = std::max(cmax, c);
        }
    std::vector<double> log_a(n, std::log(1.0 / n)), log_b(m);
    for (int j = 0; j < m; ++j) log_b[j] = std::log(cloud.weights[j]);

    std::vector<double> f(n, 0.0), g(m, 0.0), row(m), col(n);
    SinkhornResult out;

    auto lse_row = [&](int i, double eps) {
        double mx = -1e300;
        for (int j = 0; j < m; ++j) {
            row[j] = (g[j] - cost[static_cast<std::size_t>(i) * m + j]) / eps + log_b[j];
            mx = std::max(mx, row[j]);
        }
        double s = 0.0;
        for (int j = 0; j < m; ++j) s += std::exp(row[j] - mx);
        return mx + std::log(s);
    };
    auto lse_col = [&](int j, double eps) {
        double mx = -1e300;
        for (int i = 0; i < n; ++i) {
            col[i] = (f[i] - cost[static_cast<std::size_t>(i) * m + j]) / eps + log_a[i];
            mx = std::max(mx, col[i]);
        }
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += std::exp(col[i] - mx);
        return mx + std::log(s);
    };

    // Epsilon annealing from a coarse level down to the target.
    std::vector<double> levels;
    for (double e = std::max(opts.epsilon, 0.2 * std::max(cmax, 1e-12)); e > opts.epsilon;
         e /= 4.0)
        levels.push_back(e);
    levels.push_back(opts.epsilon);

    int iters = 0;
    double violation = 1e300;
    for (std::size_t lev = 0; lev < levels.size() && iters < opts.max_iter; ++lev) {
        const double eps = levels[lev];
        const bool last = lev + 1 == levels.size();
        const int level_start = iters;
        for (; iters < opts.max_iter; ++iters) {
            for (int i = 0; i < n; ++i) f[i] = -eps * lse_row(i, eps);
            for (int j = 0; j < m; ++j) g[j] = -eps * lse_col(j, eps);
            // The column update is exact; the residual lives in the rows.
            violation = 0.0;
            for (int i = 0; i < n; ++i) {
                const double row_mass = std::exp(log_a[i] + f[i] / eps + lse_row(i, eps));
                violation = std::max(violation, std::abs(row_mass - std::exp(log_a[i])));
            }
            if (!last && (iters - level_start >= 50 || violation < opts.marginal_tol)) {
                ++iters;
                break;
            }
            if (last && violation < opts.marginal_tol) {
                ++iters;
                break;
            }
        }
    }
    out.iterations = iters;
    out.marginal_violation = violation;
    out.converged = violation < opts.marginal_tol;

    // Transport part of the entropic cost.
    double total = 0.0;
    const double eps = opts.epsilon;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            const double lp = log_a[i] + log_b[j] +
                              (f[i] + g[j] - cost[static_cast<std::size_t>(i) * m + j]) / eps;
            if (lp > -700.0) total += std::exp(lp) * cost[static_cast<std::size_t>(i) * m + j];
        }
    out.cost = std::sqrt(std::max(0.0, total));
    return out;
}

double h_neg1_bound(const ReferenceMeasure& mu, const ReferenceMeasure& nu) {
    if (mu.domain().kind() != Domain::Kind::Box)
        throw std::invalid_argument("h_neg1_bound: box domains only");
    const double a = mu.lower_bound();
    if (!(a > 0.0)) throw std::invalid_argument("h_neg1_bound: lower bound must be positive");
    const Domain& box = mu.domain();
    const int d = box.dim();
    std::vector<GaussLegendre> rules;
    for (int ax = 0; ax < d; ++ax) rules.push_back(gauss_legendre(96, box.lo()[ax], box.hi()[ax]));
    std::vector<int> idx(d, 0);
    std::vector<double> x(d);
    double norm_sq = 0.0;
    while (true) {
        double w = 1.0;
        for (int ax = 0; ax < d; ++ax) {
            x[ax] = rules[ax].nodes[idx[ax]];
            w *= rules[ax].weights[idx[ax]];
        }
        const double diff = mu.density(x) - nu.density(x);
        norm_sq += w * diff * diff;
        int axis = 0;
        while (axis < d && ++idx[axis] == 96) idx[axis++] = 0;
        if (axis == d) break;
    }
    double max_edge = 0.0;
    for (int ax = 0; ax < d; ++ax) max_edge = std::max(max_edge, box.edge(ax));
    const double lambda1 = 9.8696044010893586188 / (max_edge * max_edge); // pi^2 / L^2
    return 2.0 * std::sqrt(box.area()) * std::sqrt(norm_sq) / (std::sqrt(a) * std::sqrt(lambda1));
}

} // namespace w2lab::transport
