#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

#include <Eigen/Dense>

#include "lta/navmdp.hpp"
#include "lta/rng.hpp"

namespace testing {

using lta::Rng;
using lta::nav::NavAction;
using lta::nav::NavMdp;

constexpr double kInf = std::numeric_limits<double>::infinity();

inline NavAction action(const std::string& id, std::size_t from, std::size_t to, double p, double d, double r,
                        double kappa) {
    NavAction a;
    a.edge = id;
    a.from = from;
    a.to = to;
    a.p_success = p;
    a.duration = d;
    a.recovery_cost = r;
    a.fatal_fraction = kappa;
    return a;
}

struct Eval {
    Eigen::VectorXd v, s, t;
};

// Exact evaluation of a fixed deterministic policy by a dense solve of
// x = c + P x over states that are absorbed with certainty.
inline Eval oracle_eval(const NavMdp& m, std::size_t goal, const std::vector<int>& pol) {
    const auto n = static_cast<Eigen::Index>(m.nodes.size());
    // Absorption is certain from u iff following successors reaches the goal
    // or ends in a cycle containing an action that can fall into FATAL.
    std::vector<bool> certain(m.nodes.size(), false);
    for (std::size_t u = 0; u < m.nodes.size(); ++u) {
        std::size_t at = u;
        bool dead = false;
        for (std::size_t step = 0; step <= m.nodes.size() && at != goal; ++step) {
            if (pol[at] < 0) {
                dead = true;
                break;
            }
            at = m.actions[at][static_cast<std::size_t>(pol[at])].to;
        }
        if (at == goal) {
            certain[u] = true;
            continue;
        }
        if (dead) continue;
        const std::size_t start = at;
        do {
            const auto& a = m.actions[at][static_cast<std::size_t>(pol[at])];
            if (a.p_fatal() > 0) certain[u] = true;
            at = a.to;
        } while (at != start);
    }
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n), tm = Eigen::VectorXd::Zero(n), g = Eigen::VectorXd::Zero(n);
    for (std::size_t u = 0; u < m.nodes.size(); ++u) {
        const auto i = static_cast<Eigen::Index>(u);
        if (u == goal) {
            g[i] = 1;
            continue;
        }
        if (pol[u] < 0) continue;
        const auto& a = m.actions[u][static_cast<std::size_t>(pol[u])];
        A(i, i) -= a.p_stay();
        A(i, static_cast<Eigen::Index>(a.to)) -= a.p_target();
        c[i] = a.p_target() * a.duration + a.p_stay() * a.recovery_cost + a.p_fatal() * m.fatal_cost;
        tm[i] = a.p_target() * a.duration + a.p_stay() * a.recovery_cost;
    }
    Eval ev;
    ev.v = Eigen::VectorXd::Constant(n, kInf);
    ev.t = Eigen::VectorXd::Constant(n, kInf);
    ev.s = Eigen::VectorXd::Zero(n);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < n; ++i)
        if (certain[static_cast<std::size_t>(i)]) keep.push_back(i);
    const auto k = static_cast<Eigen::Index>(keep.size());
    Eigen::MatrixXd B(k, k);
    Eigen::VectorXd bc(k), bt(k), bg(k);
    for (Eigen::Index a = 0; a < k; ++a) {
        bc[a] = c[keep[a]];
        bt[a] = tm[keep[a]];
        bg[a] = g[keep[a]];
        for (Eigen::Index b = 0; b < k; ++b) B(a, b) = A(keep[a], keep[b]);
    }
    const Eigen::VectorXd xv = B.colPivHouseholderQr().solve(bc);
    const Eigen::VectorXd xt = B.colPivHouseholderQr().solve(bt);
    const Eigen::VectorXd xs = B.colPivHouseholderQr().solve(bg);
    for (Eigen::Index a = 0; a < k; ++a) {
        ev.v[keep[a]] = xv[a];
        ev.t[keep[a]] = xt[a];
        ev.s[keep[a]] = xs[a];
    }
    return ev;
}

// Best value per state over every stationary deterministic policy.
inline Eigen::VectorXd oracle_best(const NavMdp& m, std::size_t goal) {
    const auto n = m.nodes.size();
    std::vector<int> pol(n, -1);
    Eigen::VectorXd best = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), kInf);
    best[static_cast<Eigen::Index>(goal)] = 0;
    std::function<void(std::size_t)> rec = [&](std::size_t u) {
        if (u == n) {
            const auto ev = oracle_eval(m, goal, pol);
            best = best.cwiseMin(ev.v);
            return;
        }
        if (u == goal || m.actions[u].empty()) {
            pol[u] = -1;
            rec(u + 1);
            return;
        }
        for (std::size_t k = 0; k < m.actions[u].size(); ++k) {
            pol[u] = static_cast<int>(k);
            rec(u + 1);
        }
    };
    rec(0);
    return best;
}

// Random strongly connected MDP: a directed ring plus random chords.
inline NavMdp random_mdp(Rng& rng, std::size_t n, std::size_t extra) {
    NavMdp m;
    for (std::size_t i = 0; i < n; ++i) m.nodes.push_back("n" + std::to_string(i));
    m.actions.resize(n);
    int id = 0;
    auto add = [&](std::size_t u, std::size_t v) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "e%02d", id++);
        m.actions[u].push_back(action(buf, u, v, rng.uniform(0.05, 1.0), rng.uniform(1, 60), rng.uniform(1, 60),
                                      rng.bernoulli(0.3) ? 0.0 : rng.uniform(0, 1)));
    };
    for (std::size_t i = 0; i < n; ++i) add(i, (i + 1) % n);
    for (std::size_t k = 0; k < extra; ++k) {
        const auto u = rng.below(n), v = rng.below(n);
        if (u != v) add(u, v);
    }
    double total = 0;
    for (const auto& row : m.actions)
        for (const auto& a : row) total += a.duration;
    m.fatal_cost = 100 * total;
    return m;
}

}  // namespace testing
