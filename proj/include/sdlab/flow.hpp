#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

namespace sdlab::detail {

/// Dinic's maximum flow on integer capacities.
class MaxFlow {
public:
    explicit MaxFlow(std::size_t nodes) : head_(nodes, npos), level_(nodes), iter_(nodes) {}

    std::size_t add_edge(std::size_t from, std::size_t to, std::int64_t cap) {
        edges_.push_back({to, head_[from], cap});
        head_[from] = edges_.size() - 1;
        edges_.push_back({from, head_[to], 0});
        head_[to] = edges_.size() - 1;
        return edges_.size() - 2;
    }

    std::int64_t run(std::size_t s, std::size_t t) {
        std::int64_t total = 0;
        while (bfs(s, t)) {
            iter_ = head_;
            while (std::int64_t f = dfs(s, t, std::numeric_limits<std::int64_t>::max())) total += f;
        }
        return total;
    }

    /// Flow currently routed along the edge returned by add_edge.
    std::int64_t flow(std::size_t edge) const { return edges_[edge ^ 1].cap; }

    /// Nodes reachable from s in the residual graph (valid after run).
    std::vector<bool> reachable(std::size_t s) const {
        std::vector<bool> seen(head_.size(), false);
        std::vector<std::size_t> stack{s};
        seen[s] = true;
        while (!stack.empty()) {
            const auto v = stack.back();
            stack.pop_back();
            for (auto e = head_[v]; e != npos; e = edges_[e].next)
                if (edges_[e].cap > 0 && !seen[edges_[e].to]) {
                    seen[edges_[e].to] = true;
                    stack.push_back(edges_[e].to);
                }
        }
        return seen;
    }

private:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
    struct Edge {
        std::size_t to, next;
        std::int64_t cap;
    };

    bool bfs(std::size_t s, std::size_t t) {
        std::fill(level_.begin(), level_.end(), -1);
        std::queue<std::size_t> q;
        level_[s] = 0;
        q.push(s);
        while (!q.empty()) {
            const auto v = q.front();
            q.pop();
            for (auto e = head_[v]; e != npos; e = edges_[e].next)
                if (edges_[e].cap > 0 && level_[edges_[e].to] < 0) {
                    level_[edges_[e].to] = level_[v] + 1;
                    q.push(edges_[e].to);
                }
        }
        return level_[t] >= 0;
    }

    std::int64_t dfs(std::size_t v, std::size_t t, std::int64_t f) {
        if (v == t) return f;
        for (auto& e = iter_[v]; e != npos; e = edges_[e].next) {
            Edge& ed = edges_[e];
            if (ed.cap > 0 && level_[ed.to] == level_[v] + 1) {
                const std::int64_t d = dfs(ed.to, t, std::min(f, ed.cap));
                if (d > 0) {
                    ed.cap -= d;
                    edges_[e ^ 1].cap += d;
                    return d;
                }
            }
        }
        return 0;
    }

    std::vector<Edge> edges_;
    std::vector<std::size_t> head_;
    std::vector<int> level_;
    std::vector<std::size_t> iter_;
};

} // namespace sdlab::detail
