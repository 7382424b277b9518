// Exact minimum-weight perfect matching plus Dijkstra kernels used by the
// local matching decoder. All graphs arrive as CSR arrays built in Python.

#include <pybind11/pybind11.h>
#include <pybind11/numpy.h>

#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

#include "mwm.hpp"

namespace py = pybind11;

static const long long INF = std::numeric_limits<long long>::max();

// Minimum-weight perfect matching on an explicit edge list with non-negative
// integer weights. Implemented as maximum-cardinality maximum-weight matching
// on the reflected weights wmax - w, so that among all maximum-cardinality
// matchings the minimum-weight one wins. Returns mate[] with -1 for unmatched
// vertices (the caller decides whether that is an error).
static py::array_t<int64_t> min_weight_perfect_matching(
    int64_t num_nodes,
    py::array_t<int64_t, py::array::c_style | py::array::forcecast> us,
    py::array_t<int64_t, py::array::c_style | py::array::forcecast> vs,
    py::array_t<int64_t, py::array::c_style | py::array::forcecast> ws) {
  auto u = us.unchecked<1>();
  auto v = vs.unchecked<1>();
  auto w = ws.unchecked<1>();
  py::ssize_t ne = u.shape(0);
  if (v.shape(0) != ne || w.shape(0) != ne)
    throw std::invalid_argument("edge arrays must have equal length");

  long long wmax = 0;
  for (py::ssize_t i = 0; i < ne; ++i) {
    if (w(i) < 0) throw std::invalid_argument("negative edge weight");
    if (w(i) > wmax) wmax = w(i);
  }

  mwm::Matcher matcher(static_cast<int>(num_nodes), /*maxcardinality=*/true);
  matcher.init_slots();
  for (py::ssize_t i = 0; i < ne; ++i)
    matcher.add_edge(static_cast<int>(u(i)), static_cast<int>(v(i)),
                     wmax - w(i));
  matcher.solve();

  py::array_t<int64_t> out(num_nodes);
  auto o = out.mutable_unchecked<1>();
  for (int64_t i = 0; i < num_nodes; ++i)
    o(i) = matcher.mate(static_cast<int>(i));
  return out;
}

struct QEntry {
  long long dist;
  int32_t node;
  bool operator>(const QEntry& other) const {
    if (dist != other.dist) return dist > other.dist;
    return node > other.node;  // deterministic tie-break by node id
  }
};

// Dijkstra from each source, halting once `m` flagged targets have been
// settled (the source itself does not count). Returns, per source, the
// settled target ids and their distances, flattened with an offsets array.
static py::tuple local_dijkstra_batch(
    py::array_t<int64_t, py::array::c_style | py::array::forcecast> indptr,
    py::array_t<int32_t, py::array::c_style | py::array::forcecast> indices,
    py::array_t<int64_t, py::array::c_style | py::array::forcecast> weights,
    py::array_t<uint8_t, py::array::c_style | py::array::forcecast> is_target,
    py::array_t<int32_t, py::array::c_style | py::array::forcecast> sources,
    int64_t m) {
  auto ip = indptr.unchecked<1>();
  auto ix = indices.unchecked<1>();
  auto wt = weights.unchecked<1>();
  auto tgt = is_target.unchecked<1>();
  auto src = sources.unchecked<1>();
  py::ssize_t n = ip.shape(0) - 1;
  py::ssize_t ns = src.shape(0);

  std::vector<long long> dist(n, INF);
  std::vector<uint8_t> seen(n, 0);
  std::vector<int32_t> touched;
  touched.reserve(256);

  std::vector<int64_t> offsets(ns + 1, 0);
  std::vector<int32_t> found_nodes;
  std::vector<int64_t> found_dists;

  for (py::ssize_t si = 0; si < ns; ++si) {
    int32_t s = src(si);
    std::priority_queue<QEntry, std::vector<QEntry>, std::greater<QEntry>> pq;
    dist[s] = 0;
    touched.push_back(s);
    pq.push({0, s});
    int64_t nfound = 0;
    while (!pq.empty() && nfound < m) {
      QEntry top = pq.top();
      pq.pop();
      if (top.dist != dist[top.node] || seen[top.node]) continue;
      seen[top.node] = 1;
      if (top.node != s && tgt(top.node)) {
        found_nodes.push_back(top.node);
        found_dists.push_back(top.dist);
        ++nfound;
        if (nfound >= m) break;
      }
      for (int64_t e = ip(top.node); e < ip(top.node + 1); ++e) {
        int32_t nb = ix(e);
        long long nd = top.dist + wt(e);
        if (nd < dist[nb]) {
          if (dist[nb] == INF) touched.push_back(nb);
          dist[nb] = nd;
          pq.push({nd, nb});
        }
      }
    }
    offsets[si + 1] = static_cast<int64_t>(found_nodes.size());
    for (int32_t t : touched) {
      dist[t] = INF;
      seen[t] = 0;
    }
    touched.clear();
  }

  py::array_t<int64_t> off(offsets.size());
  std::copy(offsets.begin(), offsets.end(), off.mutable_data());
  py::array_t<int32_t> fn(found_nodes.size());
  std::copy(found_nodes.begin(), found_nodes.end(), fn.mutable_data());
  py::array_t<int64_t> fd(found_dists.size());
  std::copy(found_dists.begin(), found_dists.end(), fd.mutable_data());
  return py::make_tuple(off, fn, fd);
}

// Shortest path between two nodes; returns the edge ids along the path.
static py::array_t<int64_t> dijkstra_path(
    py::array_t<int64_t, py::array::c_style | py::array::forcecast> indptr,
    py::array_t<int32_t, py::array::c_style | py::array::forcecast> indices,
    py::array_t<int64_t, py::array::c_style | py::array::forcecast> weights,
    py::array_t<int64_t, py::array::c_style | py::array::forcecast> edge_ids,
    int64_t src, int64_t dst) {
  auto ip = indptr.unchecked<1>();
  auto ix = indices.unchecked<1>();
  auto wt = weights.unchecked<1>();
  auto eid = edge_ids.unchecked<1>();
  py::ssize_t n = ip.shape(0) - 1;

  std::vector<long long> dist(n, INF);
  std::vector<int64_t> pred_edge(n, -1);
  std::vector<int32_t> pred_node(n, -1);
  std::vector<uint8_t> seen(n, 0);
  std::priority_queue<QEntry, std::vector<QEntry>, std::greater<QEntry>> pq;
  dist[src] = 0;
  pq.push({0, static_cast<int32_t>(src)});
  while (!pq.empty()) {
    QEntry top = pq.top();
    pq.pop();
    if (seen[top.node]) continue;
    seen[top.node] = 1;
    if (top.node == dst) break;
    for (int64_t e = ip(top.node); e < ip(top.node + 1); ++e) {
      int32_t nb = ix(e);
      long long nd = top.dist + wt(e);
      if (nd < dist[nb]) {
        dist[nb] = nd;
        pred_edge[nb] = eid(e);
        pred_node[nb] = top.node;
        pq.push({nd, nb});
      }
    }
  }
  if (dist[dst] == INF) throw std::runtime_error("no path between defects");
  std::vector<int64_t> path;
  for (int64_t cur = dst; cur != src; cur = pred_node[cur])
    path.push_back(pred_edge[cur]);
  py::array_t<int64_t> out(path.size());
  std::copy(path.begin(), path.end(), out.mutable_data());
  return out;
}

PYBIND11_MODULE(_matcher, mod) {
  mod.def("min_weight_perfect_matching", &min_weight_perfect_matching,
          py::arg("num_nodes"), py::arg("us"), py::arg("vs"), py::arg("ws"));
  mod.def("local_dijkstra_batch", &local_dijkstra_batch, py::arg("indptr"),
          py::arg("indices"), py::arg("weights"), py::arg("is_target"),
          py::arg("sources"), py::arg("m"));
  mod.def("dijkstra_path", &dijkstra_path, py::arg("indptr"),
          py::arg("indices"), py::arg("weights"), py::arg("edge_ids"),
          py::arg("src"), py::arg("dst"));
}
