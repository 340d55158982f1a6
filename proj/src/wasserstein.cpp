#include "fermigas/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fermigas {

namespace {

struct Support {
  std::vector<PhasePoint> z;
  std::vector<double> w;
};

Support compact(const DiscreteMeasure& m) {
  if (m.points.size() != m.weights.size()) throw ValidationError("points and weights differ");
  Support s;
  for (std::size_t i = 0; i < m.points.size(); ++i) {
    double w = m.weights[i];
    if (!(w >= 0) || !std::isfinite(w)) throw ValidationError("measure weights must be >= 0");
    if (w > 0) {
      s.z.push_back(m.points[i]);
      s.w.push_back(w);
    }
  }
  return s;
}

}  // namespace

TransportResult wasserstein1(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                             double certificate_tol) {
  if (!(mu.d == nu.d)) throw ValidationError("measures live in different dimensions");
  Support a = compact(mu), b = compact(nu);
  if (mu.points.size() > kTransportCap || nu.points.size() > kTransportCap)
    throw CapError("transport support exceeds 5000 x 5000");
  double ma = std::accumulate(a.w.begin(), a.w.end(), 0.0);
  double mb = std::accumulate(b.w.begin(), b.w.end(), 0.0);
  TransportResult res;
  res.method = "ssp";
  if (ma == 0 && mb == 0) {
    res.certified = true;
    return res;
  }
  if (std::abs(ma - mb) > 1e-9 * std::max(ma, mb))
    throw ValidationError("W1 needs measures of equal mass");
  for (double& w : b.w) w *= ma / mb;

  const std::size_t n = a.w.size(), m = b.w.size(), nodes = n + m;
  auto cost = [&](std::size_t i, std::size_t j) { return phase_distance(a.z[i], b.z[j]); };
  std::vector<double> flow(n * m, 0.0), supply = a.w, demand = b.w, pi(nodes, 0.0);
  std::vector<double> dist(nodes);
  std::vector<long> parent(nodes);
  std::vector<char> done(nodes);
  const double eps = 1e-15 * ma;
  const double inf = std::numeric_limits<double>::infinity();
  double left = ma;
  int guard = 50 * static_cast<int>(nodes) + 1000;

  while (left > 1e-13 * ma) {
    if (++res.augmentations > guard) throw NumericError("transport solver did not terminate");
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(parent.begin(), parent.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    for (std::size_t i = 0; i < n; ++i)
      if (supply[i] > eps) dist[i] = 0;
    long target = -1;
    for (;;) {
      long u = -1;
      double best = inf;
      for (std::size_t v = 0; v < nodes; ++v)
        if (!done[v] && dist[v] < best) {
          best = dist[v];
          u = static_cast<long>(v);
        }
      if (u < 0) break;
      done[u] = 1;
      if (static_cast<std::size_t>(u) >= n && demand[u - n] > eps) {
        target = u;
        break;
      }
      if (static_cast<std::size_t>(u) < n) {
        for (std::size_t j = 0; j < m; ++j) {
          std::size_t v = n + j;
          if (done[v]) continue;
          double nd = dist[u] + std::max(0.0, cost(u, j) + pi[u] - pi[v]);
          if (nd < dist[v]) {
            dist[v] = nd;
            parent[v] = u;
          }
        }
      } else {
        std::size_t j = u - n;
        for (std::size_t i = 0; i < n; ++i) {
          if (done[i] || flow[i * m + j] <= eps) continue;
          double nd = dist[u] + std::max(0.0, -cost(i, j) + pi[u] - pi[i]);
          if (nd < dist[i]) {
            dist[i] = nd;
            parent[i] = u;
          }
        }
      }
    }
    if (target < 0) throw NumericError("no augmenting path with mass left to move");
    double reach = dist[target];
    for (std::size_t v = 0; v < nodes; ++v) pi[v] += std::min(dist[v], reach);

    double delta = demand[target - n];
    long v = target;
    while (parent[v] >= 0) {
      long u = parent[v];
      if (static_cast<std::size_t>(v) < n)  // backward edge sink u -> source v
        delta = std::min(delta, flow[v * m + (u - n)]);
      v = u;
    }
    delta = std::min(delta, supply[v]);
    long src = v;
    v = target;
    while (parent[v] >= 0) {
      long u = parent[v];
      if (static_cast<std::size_t>(u) < n)
        flow[u * m + (v - n)] += delta;
      else
        flow[v * m + (u - n)] -= delta;
      v = u;
    }
    supply[src] -= delta;
    demand[target - n] -= delta;
    left -= delta;
  }

  double primal = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (flow[i * m + j] > 0) primal += flow[i * m + j] * cost(i, j);

  // phi_i = -pi_i, then two c-transforms keep the pair feasible by construction
  std::vector<double> phi(n), psi(m, inf);
  for (std::size_t i = 0; i < n; ++i) phi[i] = -pi[i];
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < n; ++i) psi[j] = std::min(psi[j], cost(i, j) - phi[i]);
  for (std::size_t i = 0; i < n; ++i) {
    phi[i] = inf;
    for (std::size_t j = 0; j < m; ++j) phi[i] = std::min(phi[i], cost(i, j) - psi[j]);
  }
  double dual = 0;
  for (std::size_t i = 0; i < n; ++i) dual += a.w[i] * phi[i];
  for (std::size_t j = 0; j < m; ++j) dual += b.w[j] * psi[j];

  res.distance = primal;
  res.dual_value = dual;
  res.gap = primal - dual;
  res.certified = std::abs(res.gap) <= certificate_tol * std::max(1.0, primal);
  return res;
}

double wasserstein1_line(std::vector<double> xa, std::vector<double> wa, std::vector<double> xb,
                         std::vector<double> wb) {
  if (xa.size() != wa.size() || xb.size() != wb.size())
    throw ValidationError("points and weights differ");
  struct Ev {
    double x, dw;
  };
  std::vector<Ev> ev;
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < xa.size(); ++i) {
    ev.push_back({xa[i], wa[i]});
    ma += wa[i];
  }
  for (std::size_t i = 0; i < xb.size(); ++i) {
    ev.push_back({xb[i], -wb[i]});
    mb += wb[i];
  }
  if (std::abs(ma - mb) > 1e-9 * std::max({ma, mb, 1e-300}))
    throw ValidationError("W1 needs measures of equal mass");
  std::sort(ev.begin(), ev.end(), [](const Ev& l, const Ev& r) { return l.x < r.x; });
  double out = 0, diff = 0;
  for (std::size_t k = 0; k + 1 < ev.size(); ++k) {
    diff += ev[k].dw;
    out += std::abs(diff) * (ev[k + 1].x - ev[k].x);
  }
  return out;
}

}  // namespace fermigas
