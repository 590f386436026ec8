#pragma once
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace w2lab::transport {

struct FlowEntry {
    int src;
    int dst;
    double mass;
};

struct NetSimplexResult {
    double cost = 0.0; // sum of flow * arc cost
    std::vector<FlowEntry> plan;
    long pivots = 0;
};

// Primal network simplex for the dense uncapacitated transportation problem
//
//   min sum c(i,j) x_ij   s.t.  sum_j x_ij = supply_i, sum_i x_ij = demand_j
//
// on the complete bipartite graph, with block pricing and Cunningham's
// leaving-arc rule (strongly feasible bases, so degenerate pivots cannot
// cycle). Arc costs are produced on the fly by the functor, nothing of size
// n*m is stored. The initial basis is a northwest-corner tree over the
// given node orders (identity by default; callers pass space-filling orders
// so the start is geometrically local), rooted at the last node of the
// staircase so that degenerate arcs point away from the root.
template <class Cost>
NetSimplexResult solve_transportation(const std::vector<double>& supply,
                                      const std::vector<double>& demand, Cost cost,
                                      double cost_scale, long max_pivots = 0,
                                      const std::vector<int>* src_order = nullptr,
                                      const std::vector<int>* snk_order = nullptr,
                                      const std::vector<std::int64_t>* pricing_pool = nullptr) {
    const int n = static_cast<int>(supply.size());
    const int m = static_cast<int>(demand.size());
    if (n == 0 || m == 0) throw std::invalid_argument("solve_transportation: empty side");
    double total_supply = 0.0, total_demand = 0.0;
    for (double s : supply) {
        if (!(s > 0.0)) throw std::invalid_argument("solve_transportation: nonpositive supply");
        total_supply += s;
    }
    for (double d : demand) {
        if (!(d > 0.0)) throw std::invalid_argument("solve_transportation: nonpositive demand");
        total_demand += d;
    }
    if (std::abs(total_supply - total_demand) > 1e-9 * std::max(total_supply, total_demand))
        throw std::invalid_argument("solve_transportation: unbalanced masses");

    const int V = n + m;
    const std::int64_t arc_count = static_cast<std::int64_t>(n) * m;
    const double tol = 1e-12 * std::max(cost_scale, 1e-30);
    if (max_pivots <= 0) max_pivots = 2000 + 64L * (n + m);

    // Tree arrays. dir_to_child[v]: the basic arc {v, parent[v]} is
    // directed parent -> v (parent is the source side).
    std::vector<int> parent(V, -1), depth(V, 0);
    std::vector<int> first_child(V, -1), next_sib(V, -1), prev_sib(V, -1);
    std::vector<char> dir_to_child(V, 0);
    std::vector<double> flow(V, 0.0), arc_cost(V, 0.0), pot(V, 0.0);

    auto attach = [&](int child, int par) {
        parent[child] = par;
        prev_sib[child] = -1;
        next_sib[child] = first_child[par];
        if (first_child[par] >= 0) prev_sib[first_child[par]] = child;
        first_child[par] = child;
    };
    auto detach = [&](int child) {
        const int par = parent[child];
        if (prev_sib[child] >= 0)
            next_sib[prev_sib[child]] = next_sib[child];
        else
            first_child[par] = next_sib[child];
        if (next_sib[child] >= 0) prev_sib[next_sib[child]] = prev_sib[child];
        parent[child] = -1;
    };

    // Northwest-corner staircase over the given orders. Each new arc brings
    // exactly one new node into the chain; parents point toward the start.
    {
        std::vector<int> so(n), to(m);
        for (int i = 0; i < n; ++i) so[i] = i;
        for (int j = 0; j < m; ++j) to[j] = j;
        if (src_order) so = *src_order;
        if (snk_order) to = *snk_order;
        int ip = 0, jp = 0;
        double rem_s = supply[so[0]], rem_d = demand[to[0]];
        int last = so[0];
        parent[so[0]] = -1;
        {
            // first cell
            const double f = std::min(rem_s, rem_d);
            const int s = so[0], t = n + to[0];
            parent[t] = s;
            dir_to_child[t] = 1;
            flow[t] = f;
            arc_cost[t] = cost(s, t - n);
            rem_s -= f;
            rem_d -= f;
            last = t;
        }
        while (ip < n - 1 || jp < m - 1) {
            const bool advance_src = (jp == m - 1) || (ip < n - 1 && rem_s <= rem_d);
            if (advance_src) {
                ++ip;
                rem_s = supply[so[ip]];
            } else {
                ++jp;
                rem_d = demand[to[jp]];
            }
            const int s = so[ip], t = n + to[jp];
            const int fresh = advance_src ? s : t;
            const int partner = advance_src ? t : s;
            const double f = std::min(rem_s, rem_d);
            parent[fresh] = partner;
            dir_to_child[fresh] = static_cast<char>(fresh == t);
            flow[fresh] = f;
            arc_cost[fresh] = cost(s, t - n);
            rem_s -= f;
            rem_d -= f;
            last = fresh;
        }
        // Re-root at the last chain node: reverse parents along its path so
        // zero-flow staircase arcs point away from the root.
        std::vector<int> spine;
        for (int v = last; v >= 0; v = parent[v]) spine.push_back(v);
        for (std::size_t k = spine.size(); k-- > 1;) {
            const int par = spine[k], child = spine[k - 1];
            // arc currently stored at child; move it to par, flipped
            flow[par] = flow[child];
            arc_cost[par] = arc_cost[child];
            dir_to_child[par] = !dir_to_child[child];
            parent[par] = child;
        }
        parent[last] = -1;
        for (int v = 0; v < V; ++v)
            if (parent[v] >= 0) attach(v, parent[v]);
        // Depths and potentials from the root.
        std::vector<int> stack{last};
        pot[last] = 0.0;
        depth[last] = 0;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            if (v != last) {
                depth[v] = depth[parent[v]] + 1;
                pot[v] = dir_to_child[v] ? pot[parent[v]] - arc_cost[v]
                                         : pot[parent[v]] + arc_cost[v];
            }
            for (int c = first_child[v]; c >= 0; c = next_sib[c]) stack.push_back(c);
        }
    }

    const std::int64_t block =
        std::max<std::int64_t>(64, static_cast<std::int64_t>(std::sqrt(static_cast<double>(arc_count))));
    std::int64_t cursor = 0;
    std::int64_t pool_cursor = 0;
    std::vector<int> path_i, path_j;
    std::vector<std::int64_t> candidates;
    candidates.reserve(768);
    NetSimplexResult result;

    auto reduced = [&](std::int64_t a) {
        const int i = static_cast<int>(a / m), j = static_cast<int>(a % m);
        return cost(i, j) - pot[i] + pot[n + j];
    };

    for (long pivot = 0;; ++pivot) {
        if (pivot > max_pivots)
            throw std::runtime_error("solve_transportation: pivot limit exceeded");
        // Entering arc: steepest among the still-negative candidates; the
        // list is refilled from block scans of the full arc range when it
        // runs dry, and a refill that completes a full pass proves
        // optimality.
        std::int64_t enter = -1;
        double best = -tol;
        std::size_t keep = 0;
        for (std::size_t r = 0; r < candidates.size(); ++r) {
            const double rc = reduced(candidates[r]);
            if (rc < -tol) {
                candidates[keep++] = candidates[r];
                if (rc < best) {
                    best = rc;
                    enter = candidates[r];
                }
            }
        }
        candidates.resize(keep);
        // Geometric pool first: most entering arcs live among the nearest
        // sinks of each source. The full range is scanned only when the
        // pool prices out, which also serves as the optimality proof.
        if (enter < 0 && pricing_pool) {
            const std::int64_t pool_size = static_cast<std::int64_t>(pricing_pool->size());
            const std::int64_t pool_block =
                std::max<std::int64_t>(64, static_cast<std::int64_t>(std::sqrt(static_cast<double>(pool_size))));
            std::int64_t scanned = 0;
            while (scanned < pool_size) {
                const std::int64_t stop = std::min<std::int64_t>(pool_block, pool_size - scanned);
                for (std::int64_t s = 0; s < stop; ++s) {
                    std::int64_t idx = pool_cursor + s;
                    if (idx >= pool_size) idx -= pool_size;
                    const std::int64_t a = (*pricing_pool)[idx];
                    const double rc = reduced(a);
                    if (rc < -tol) {
                        if (candidates.size() < 640) candidates.push_back(a);
                        if (rc < best) {
                            best = rc;
                            enter = a;
                        }
                    }
                }
                scanned += stop;
                pool_cursor += stop;
                if (pool_cursor >= pool_size) pool_cursor -= pool_size;
                if (enter >= 0 && candidates.size() >= 64) break;
            }
        }
        if (enter < 0) {
            std::int64_t scanned = 0;
            while (scanned < arc_count) {
                const std::int64_t stop = std::min<std::int64_t>(block, arc_count - scanned);
                for (std::int64_t s = 0; s < stop; ++s) {
                    const std::int64_t a =
                        cursor + s >= arc_count ? cursor + s - arc_count : cursor + s;
                    const double rc = reduced(a);
                    if (rc < -tol) {
                        if (candidates.size() < 640) candidates.push_back(a);
                        if (rc < best) {
                            best = rc;
                            enter = a;
                        }
                    }
                }
                scanned += stop;
                cursor += stop;
                if (cursor >= arc_count) cursor -= arc_count;
                if (enter >= 0 && candidates.size() >= 64) break;
            }
        }
        if (enter < 0) break; // optimal

        const int ei = static_cast<int>(enter / m);
        const int ej = n + static_cast<int>(enter % m);
        const double ecost = cost(ei, ej - n);

        // Cycle: entering arc ei -> ej plus the tree path between them.
        path_i.clear();
        path_j.clear();
        int a = ei, b = ej;
        while (a != b) {
            if (depth[a] >= depth[b]) {
                path_i.push_back(a);
                a = parent[a];
            } else {
                path_j.push_back(b);
                b = parent[b];
            }
        }
        const int join = a;

        // Pushing delta along ei->ej. The cycle runs ei -> ej -> join -> ei,
        // so i-side tree arcs are traversed parent->child and j-side arcs
        // child->parent; arcs traversed against their direction block.
        double delta = 1e300;
        for (int v : path_i)
            if (!dir_to_child[v]) delta = std::min(delta, flow[v]);
        for (int v : path_j)
            if (dir_to_child[v]) delta = std::min(delta, flow[v]);

        // Leaving arc (Cunningham): the last blocking arc when walking the
        // cycle in its orientation starting at the join, i.e. the i-side
        // blocker nearest ei, overridden by the j-side blocker nearest join.
        int leave = -1;
        for (std::size_t t = 0; t < path_i.size(); ++t) {
            const int v = path_i[t];
            if (!dir_to_child[v] && flow[v] == delta) {
                leave = v;
                break;
            }
        }
        bool leave_on_j = false;
        for (std::size_t t = 0; t < path_j.size(); ++t) {
            const int v = path_j[t];
            if (dir_to_child[v] && flow[v] == delta) {
                leave = v;
                leave_on_j = true;
            }
        }
        if (leave < 0) throw std::runtime_error("solve_transportation: unbounded pivot");

        for (int v : path_i) flow[v] += dir_to_child[v] ? delta : -delta;
        for (int v : path_j) flow[v] += dir_to_child[v] ? -delta : delta;

        // Re-root the detached subtree at the entering arc's endpoint.
        const int q = leave_on_j ? ej : ei; // endpoint inside the detached part
        const int p = leave_on_j ? ei : ej;
        std::vector<int> chain;
        for (int v = q; v != leave; v = parent[v]) chain.push_back(v);
        chain.push_back(leave);
        detach(leave);
        for (std::size_t t = chain.size(); t-- > 1;) {
            const int par = chain[t], child = chain[t - 1];
            // flip: child becomes the parent of par
            const double f = flow[child];
            const double c = arc_cost[child];
            const char d = dir_to_child[child];
            detach(child);
            attach(par, child);
            flow[par] = f;
            arc_cost[par] = c;
            dir_to_child[par] = !d;
        }
        attach(q, p);
        flow[q] = delta;
        arc_cost[q] = ecost;
        dir_to_child[q] = (q == ej);

        // Potentials and depths on the re-attached subtree.
        std::vector<int> stack{q};
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            const int par = parent[v];
            depth[v] = depth[par] + 1;
            pot[v] = dir_to_child[v] ? pot[par] - arc_cost[v] : pot[par] + arc_cost[v];
            for (int c = first_child[v]; c >= 0; c = next_sib[c]) stack.push_back(c);
        }
        result.pivots = pivot + 1;
    }

    // Optimality certificate over all arcs.
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            if (cost(i, j) - pot[i] + pot[n + j] < -64.0 * tol)
                throw std::runtime_error("solve_transportation: optimality check failed");

    double cost_total = 0.0, comp = 0.0;
    for (int v = 0; v < n + m; ++v) {
        if (parent[v] < 0 || flow[v] <= 0.0) continue;
        const int child_is_sink = v >= n;
        const int src = child_is_sink ? parent[v] : v;
        const int dst = child_is_sink ? v : parent[v];
        result.plan.push_back({src, dst - n, flow[v]});
        const double term = flow[v] * cost(src, dst - n) - comp;
        const double next = cost_total + term;
        comp = (next - cost_total) - term;
        cost_total = next;
    }
    result.cost = cost_total;
    return result;
}

} // namespace w2lab::transport
