// Maximum-weight matching in general graphs (Galil's primal-dual blossom
// method). This is a C++ port of the well-known van Rantwijk implementation
// (the one underlying networkx.max_weight_matching), specialised to integer
// weights and a dense weight matrix, which fits the small defect graphs this
// package matches on. Variable names follow the original to keep the port
// auditable against the reference.
#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mwm {

using ll = long long;
static const ll NEG_INF = -(1LL << 62);

// Ids 0..n-1 are vertices; ids >= n are (reusable) blossom slots.
// label: 0 free, 1 S, 2 T, 5 breadcrumb (1|4) during scanBlossom.
class Matcher {
 public:
  Matcher(int n, bool maxcardinality)
      : n_(n), maxcard_(maxcardinality), cap_(2 * n + 1),
        w_(static_cast<size_t>(n) * n, NEG_INF),
        allow_(static_cast<size_t>(n) * n, 0) {
    mate_.assign(n_, -1);
    label_.assign(cap_, 0);
    labeledge_set_.assign(cap_, 0);
    labeledge_.assign(cap_, {-1, -1});
    inblossom_.resize(n_);
    for (int v = 0; v < n_; ++v) inblossom_[v] = v;
    parent_.assign(cap_, -1);
    base_.assign(cap_, -1);
    for (int v = 0; v < n_; ++v) base_[v] = v;
    bestedge_.assign(cap_, {-1, -1});
    dual_.assign(cap_, 0);
    active_.assign(cap_, 0);
    childs_.resize(cap_);
    edges_.resize(cap_);
    mybest_.resize(cap_);
    mybest_set_.assign(cap_, 0);
  }

  void add_edge(int u, int v, ll weight) {
    if (u == v) return;  // ignore self-loops, as the reference does
    size_t a = static_cast<size_t>(u) * n_ + v;
    size_t b = static_cast<size_t>(v) * n_ + u;
    if (w_[a] == NEG_INF || weight > w_[a]) w_[a] = w_[b] = weight;
  }

  // Runs the algorithm; afterwards mate(v) is v's partner or -1.
  void solve() {
    ll maxweight = 0;
    for (size_t i = 0; i < w_.size(); ++i)
      if (w_[i] != NEG_INF && w_[i] > maxweight) maxweight = w_[i];
    for (int v = 0; v < n_; ++v) dual_[v] = maxweight;

    while (true) {  // stages
      std::fill(label_.begin(), label_.end(), 0);
      std::fill(labeledge_set_.begin(), labeledge_set_.end(), 0);
      std::fill(bestedge_.begin(), bestedge_.end(), Pair{-1, -1});
      for (int b : blossoms_) mybest_set_[b] = 0;
      std::fill(allow_.begin(), allow_.end(), 0);
      queue_.clear();

      for (int v = 0; v < n_; ++v)
        if (mate_[v] < 0 && label_[inblossom_[v]] == 0) assign_label(v, 1, -1);

      bool augmented = false;
      while (true) {  // substages
        while (!queue_.empty() && !augmented) {
          int v = queue_.back();
          queue_.pop_back();
          assert(label_[inblossom_[v]] == 1);
          for (int u = 0; u < n_; ++u) {
            if (wt(v, u) == NEG_INF || u == v) continue;
            int bv = inblossom_[v], bw = inblossom_[u];
            if (bv == bw) continue;
            ll kslack = 0;
            if (!allowed(v, u)) {
              kslack = slack(v, u);
              if (kslack <= 0) set_allowed(v, u);
            }
            if (allowed(v, u)) {
              if (label_[bw] == 0) {
                assign_label(u, 2, v);
              } else if (label_[bw] == 1) {
                int base = scan_blossom(v, u);
                if (base >= 0) {
                  add_blossom(base, v, u);
                } else {
                  augment_matching(v, u);
                  augmented = true;
                  break;
                }
              } else if (label_[u] == 0) {
                assert(label_[bw] == 2);
                label_[u] = 2;
                set_labeledge(u, {v, u});
              }
            } else if (label_[bw] == 1) {
              if (bestedge_[bv].first < 0 ||
                  kslack < slack(bestedge_[bv].first, bestedge_[bv].second))
                bestedge_[bv] = {v, u};
            } else if (label_[u] == 0) {
              if (bestedge_[u].first < 0 ||
                  kslack < slack(bestedge_[u].first, bestedge_[u].second))
                bestedge_[u] = {v, u};
            }
          }
        }
        if (augmented) break;

        // No augmenting path: update duals.
        int deltatype = -1;
        ll delta = 0;
        Pair deltaedge{-1, -1};
        int deltablossom = -1;

        if (!maxcard_) {
          deltatype = 1;
          delta = *std::min_element(dual_.begin(), dual_.begin() + n_);
        }
        for (int v = 0; v < n_; ++v) {
          if (label_[inblossom_[v]] == 0 && bestedge_[v].first >= 0) {
            ll d = slack(bestedge_[v].first, bestedge_[v].second);
            if (deltatype == -1 || d < delta) {
              delta = d;
              deltatype = 2;
              deltaedge = bestedge_[v];
            }
          }
        }
        for (int b = 0; b < cap_; ++b) {
          if (!is_node(b)) continue;
          if (parent_[b] < 0 && label_[b] == 1 && bestedge_[b].first >= 0) {
            ll kslack = slack(bestedge_[b].first, bestedge_[b].second);
            assert(kslack % 2 == 0);
            ll d = kslack / 2;
            if (deltatype == -1 || d < delta) {
              delta = d;
              deltatype = 3;
              deltaedge = bestedge_[b];
            }
          }
        }
        for (int b : blossoms_) {
          if (parent_[b] < 0 && label_[b] == 2 &&
              (deltatype == -1 || dual_[b] < delta)) {
            delta = dual_[b];
            deltatype = 4;
            deltablossom = b;
          }
        }
        if (deltatype == -1) {
          assert(maxcard_);
          deltatype = 1;
          delta = std::max(
              0LL, *std::min_element(dual_.begin(), dual_.begin() + n_));
        }

        for (int v = 0; v < n_; ++v) {
          int lbl = label_[inblossom_[v]];
          if (lbl == 1)
            dual_[v] -= delta;
          else if (lbl == 2)
            dual_[v] += delta;
        }
        for (int b : blossoms_) {
          if (parent_[b] < 0) {
            if (label_[b] == 1)
              dual_[b] += delta;
            else if (label_[b] == 2)
              dual_[b] -= delta;
          }
        }

        if (deltatype == 1) {
          break;
        } else if (deltatype == 2) {
          set_allowed(deltaedge.first, deltaedge.second);
          assert(label_[inblossom_[deltaedge.first]] == 1);
          queue_.push_back(deltaedge.first);
        } else if (deltatype == 3) {
          set_allowed(deltaedge.first, deltaedge.second);
          assert(label_[inblossom_[deltaedge.first]] == 1);
          queue_.push_back(deltaedge.first);
        } else {
          expand_blossom(deltablossom, false);
        }
      }

      if (!augmented) break;

      std::vector<int> tops(blossoms_.begin(), blossoms_.end());
      for (int b : tops) {
        if (!active_[b]) continue;
        if (parent_[b] < 0 && label_[b] == 1 && dual_[b] == 0)
          expand_blossom(b, true);
      }
    }
  }

  int mate(int v) const { return mate_[v]; }

 private:
  struct Pair {
    int first, second;
  };

  int n_;
  bool maxcard_;
  int cap_;
  std::vector<ll> w_;
  std::vector<uint8_t> allow_;
  std::vector<int> mate_;
  std::vector<int> label_;
  std::vector<uint8_t> labeledge_set_;  // 0 unset, 1 set (value may mean None)
  std::vector<Pair> labeledge_;         // {-1,-1} means None
  std::vector<int> inblossom_;
  std::vector<int> parent_;
  std::vector<int> base_;
  std::vector<Pair> bestedge_;
  std::vector<ll> dual_;
  std::vector<uint8_t> active_;  // blossom slot in use
  std::vector<std::vector<int>> childs_;
  std::vector<std::vector<Pair>> edges_;
  std::vector<std::vector<Pair>> mybest_;
  std::vector<uint8_t> mybest_set_;
  std::vector<int> queue_;
  std::vector<int> blossoms_;      // active blossom ids (sorted insertion)
  std::vector<int> free_slots_;

  bool is_node(int b) const { return b < n_ || active_[b]; }

  ll wt(int v, int u) const { return w_[static_cast<size_t>(v) * n_ + u]; }

  bool allowed(int v, int u) const {
    return allow_[static_cast<size_t>(v) * n_ + u] != 0;
  }
  void set_allowed(int v, int u) {
    allow_[static_cast<size_t>(v) * n_ + u] = 1;
    allow_[static_cast<size_t>(u) * n_ + v] = 1;
  }

  ll slack(int v, int u) const { return dual_[v] + dual_[u] - 2 * wt(v, u); }

  void set_labeledge(int b, Pair e) {
    labeledge_set_[b] = 1;
    labeledge_[b] = e;
  }
  bool labeledge_is_none(int b) const {
    return labeledge_[b].first < 0;
  }

  void leaves_of(int b, std::vector<int>& out) const {
    if (b < n_) {
      out.push_back(b);
      return;
    }
    for (int c : childs_[b]) leaves_of(c, out);
  }

  int alloc_blossom() {
    int b;
    if (!free_slots_.empty()) {
      b = free_slots_.back();
      free_slots_.pop_back();
    } else {
      b = next_slot_++;
      if (b >= cap_) throw std::runtime_error("blossom capacity exceeded");
    }
    active_[b] = 1;
    blossoms_.push_back(b);
    return b;
  }
  void free_blossom(int b) {
    active_[b] = 0;
    label_[b] = 0;
    labeledge_set_[b] = 0;
    labeledge_[b] = {-1, -1};
    bestedge_[b] = {-1, -1};
    mybest_set_[b] = 0;
    childs_[b].clear();
    edges_[b].clear();
    mybest_[b].clear();
    blossoms_.erase(std::find(blossoms_.begin(), blossoms_.end(), b));
    free_slots_.push_back(b);
  }

  void assign_label(int w, int t, int v) {
    int b = inblossom_[w];
    assert(label_[w] == 0 && label_[b] == 0);
    label_[w] = label_[b] = t;
    if (v >= 0) {
      set_labeledge(w, {v, w});
      set_labeledge(b, {v, w});
    } else {
      set_labeledge(w, {-1, -1});
      set_labeledge(b, {-1, -1});
    }
    bestedge_[w] = {-1, -1};
    bestedge_[b] = {-1, -1};
    if (t == 1) {
      if (b >= n_) {
        std::vector<int> lv;
        leaves_of(b, lv);
        queue_.insert(queue_.end(), lv.begin(), lv.end());
      } else {
        queue_.push_back(b);
      }
    } else if (t == 2) {
      int bb = base_[b];
      assert(mate_[bb] >= 0);
      assign_label(mate_[bb], 1, bb);
    }
  }

  int scan_blossom(int v, int w) {
    std::vector<int> path;
    int base = -1;
    while (v >= 0) {
      int b = inblossom_[v];
      if (label_[b] & 4) {
        base = base_[b];
        break;
      }
      assert(label_[b] == 1);
      path.push_back(b);
      label_[b] = 5;
      if (labeledge_is_none(b)) {
        assert(mate_[base_[b]] < 0);
        v = -1;
      } else {
        assert(labeledge_[b].first == mate_[base_[b]]);
        v = labeledge_[b].first;
        b = inblossom_[v];
        assert(label_[b] == 2);
        v = labeledge_[b].first;
      }
      if (w >= 0) std::swap(v, w);
    }
    for (int b : path) label_[b] = 1;
    return base;
  }

  void add_blossom(int base, int v, int w) {
    int bb = inblossom_[base];
    int bv = inblossom_[v];
    int bw = inblossom_[w];
    int b = alloc_blossom();
    base_[b] = base;
    parent_[b] = -1;
    parent_[bb] = b;
    std::vector<int>& path = childs_[b];
    std::vector<Pair>& edgs = edges_[b];
    path.clear();
    edgs.clear();
    edgs.push_back({v, w});
    while (bv != bb) {
      parent_[bv] = b;
      path.push_back(bv);
      edgs.push_back(labeledge_[bv]);
      v = labeledge_[bv].first;
      bv = inblossom_[v];
    }
    path.push_back(bb);
    std::reverse(path.begin(), path.end());
    std::reverse(edgs.begin(), edgs.end());
    while (bw != bb) {
      parent_[bw] = b;
      path.push_back(bw);
      edgs.push_back({labeledge_[bw].second, labeledge_[bw].first});
      w = labeledge_[bw].first;
      bw = inblossom_[w];
    }
    assert(label_[bb] == 1);
    label_[b] = 1;
    set_labeledge(b, labeledge_[bb]);
    labeledge_set_[b] = labeledge_set_[bb];
    dual_[b] = 0;
    std::vector<int> lv;
    leaves_of(b, lv);
    for (int x : lv) {
      if (label_[inblossom_[x]] == 2) queue_.push_back(x);
      inblossom_[x] = b;
    }
    // Compute least-slack edges to neighbouring S-blossoms.
    std::vector<Pair> bestedgeto(cap_, Pair{-1, -1});
    for (int bc : path) {
      std::vector<Pair> nblist;
      if (bc >= n_ && mybest_set_[bc]) {
        nblist = mybest_[bc];
        mybest_set_[bc] = 0;
        mybest_[bc].clear();
      } else {
        std::vector<int> lvs;
        leaves_of(bc, lvs);
        for (int x : lvs)
          for (int y = 0; y < n_; ++y)
            if (y != x && wt(x, y) != NEG_INF) nblist.push_back({x, y});
      }
      for (Pair k : nblist) {
        int i = k.first, j = k.second;
        if (inblossom_[j] == b) std::swap(i, j);
        int bj = inblossom_[j];
        if (bj != b && label_[bj] == 1 &&
            (bestedgeto[bj].first < 0 ||
             slack(i, j) < slack(bestedgeto[bj].first, bestedgeto[bj].second)))
          bestedgeto[bj] = {i, j};
      }
      bestedge_[bc] = {-1, -1};
    }
    mybest_[b].clear();
    for (int x = 0; x < cap_; ++x)
      if (bestedgeto[x].first >= 0) mybest_[b].push_back(bestedgeto[x]);
    mybest_set_[b] = 1;
    Pair mybestedge{-1, -1};
    ll mybestslack = 0;
    bestedge_[b] = {-1, -1};
    for (Pair k : mybest_[b]) {
      ll kslack = slack(k.first, k.second);
      if (mybestedge.first < 0 || kslack < mybestslack) {
        mybestedge = k;
        mybestslack = kslack;
      }
    }
    bestedge_[b] = mybestedge;
  }

  static int wrap(int j, int len) { return ((j % len) + len) % len; }

  void expand_blossom(int b, bool endstage) {
    for (size_t ci = 0; ci < childs_[b].size(); ++ci) {
      int s = childs_[b][ci];
      parent_[s] = -1;
      if (s >= n_) {
        if (endstage && dual_[s] == 0) {
          expand_blossom(s, endstage);
        } else {
          std::vector<int> lv;
          leaves_of(s, lv);
          for (int x : lv) inblossom_[x] = s;
        }
      } else {
        inblossom_[s] = s;
      }
    }
    if (!endstage && label_[b] == 2) {
      int entrychild = inblossom_[labeledge_[b].second];
      int len = static_cast<int>(childs_[b].size());
      int j = static_cast<int>(
          std::find(childs_[b].begin(), childs_[b].end(), entrychild) -
          childs_[b].begin());
      int jstep;
      if (j & 1) {
        j -= len;
        jstep = 1;
      } else {
        jstep = -1;
      }
      int v = labeledge_[b].first;
      int w = labeledge_[b].second;
      while (j != 0) {
        int p, q;
        if (jstep == 1) {
          p = edges_[b][wrap(j, len)].first;
          q = edges_[b][wrap(j, len)].second;
        } else {
          q = edges_[b][wrap(j - 1, len)].first;
          p = edges_[b][wrap(j - 1, len)].second;
        }
        label_[w] = 0;
        label_[q] = 0;
        assign_label(w, 2, v);
        set_allowed(p, q);
        j += jstep;
        if (jstep == 1) {
          v = edges_[b][wrap(j, len)].first;
          w = edges_[b][wrap(j, len)].second;
        } else {
          w = edges_[b][wrap(j - 1, len)].first;
          v = edges_[b][wrap(j - 1, len)].second;
        }
        set_allowed(v, w);
        j += jstep;
      }
      int bw = childs_[b][wrap(j, len)];
      label_[w] = 2;
      label_[bw] = 2;
      set_labeledge(w, {v, w});
      set_labeledge(bw, {v, w});
      bestedge_[bw] = {-1, -1};
      j += jstep;
      while (childs_[b][wrap(j, len)] != entrychild) {
        int bv = childs_[b][wrap(j, len)];
        if (label_[bv] == 1) {
          j += jstep;
          continue;
        }
        int x = -1;
        if (bv >= n_) {
          std::vector<int> lv;
          leaves_of(bv, lv);
          for (int y : lv)
            if (label_[y] != 0) {
              x = y;
              break;
            }
          if (x < 0) x = lv.back();
        } else {
          x = bv;
        }
        if (label_[x] != 0) {
          assert(label_[x] == 2);
          assert(inblossom_[x] == bv);
          label_[x] = 0;
          label_[mate_[base_[bv]]] = 0;
          assign_label(x, 2, labeledge_[x].first);
        }
        j += jstep;
      }
    }
    free_blossom(b);
  }

  void augment_blossom(int b, int v) {
    int t = v;
    while (parent_[t] != b) t = parent_[t];
    if (t >= n_) augment_blossom(t, v);
    int len = static_cast<int>(childs_[b].size());
    int i = static_cast<int>(
        std::find(childs_[b].begin(), childs_[b].end(), t) -
        childs_[b].begin());
    int j = i;
    int jstep;
    if (i & 1) {
      j -= len;
      jstep = 1;
    } else {
      jstep = -1;
    }
    while (j != 0) {
      j += jstep;
      t = childs_[b][wrap(j, len)];
      int w, x;
      if (jstep == 1) {
        w = edges_[b][wrap(j, len)].first;
        x = edges_[b][wrap(j, len)].second;
      } else {
        x = edges_[b][wrap(j - 1, len)].first;
        w = edges_[b][wrap(j - 1, len)].second;
      }
      if (t >= n_) augment_blossom(t, w);
      j += jstep;
      t = childs_[b][wrap(j, len)];
      if (t >= n_) augment_blossom(t, x);
      mate_[w] = x;
      mate_[x] = w;
    }
    std::rotate(childs_[b].begin(), childs_[b].begin() + i, childs_[b].end());
    std::rotate(edges_[b].begin(), edges_[b].begin() + i, edges_[b].end());
    base_[b] = base_[childs_[b][0]];
    assert(base_[b] == v);
  }

  void augment_matching(int v, int w) {
    int pairs[2][2] = {{v, w}, {w, v}};
    for (auto& pr : pairs) {
      int s = pr[0], j = pr[1];
      while (true) {
        int bs = inblossom_[s];
        assert(label_[bs] == 1);
        if (bs >= n_) augment_blossom(bs, s);
        mate_[s] = j;
        if (labeledge_is_none(bs)) break;
        int t = labeledge_[bs].first;
        int bt = inblossom_[t];
        assert(label_[bt] == 2);
        s = labeledge_[bt].first;
        j = labeledge_[bt].second;
        assert(base_[bt] == t);
        if (bt >= n_) augment_blossom(bt, j);
        mate_[j] = s;
      }
    }
  }

  int next_slot_ = 0;

 public:
  void init_slots() { next_slot_ = n_; }
};

// Convenience driver matching the reference semantics.
inline std::vector<int> max_weight_matching(
    int n, const std::vector<int>& us, const std::vector<int>& vs,
    const std::vector<ll>& ws, bool maxcardinality) {
  Matcher m(n, maxcardinality);
  m.init_slots();
  for (size_t i = 0; i < us.size(); ++i) m.add_edge(us[i], vs[i], ws[i]);
  m.solve();
  std::vector<int> mate(n);
  for (int v = 0; v < n; ++v) mate[v] = m.mate(v);
  return mate;
}

}  // namespace mwm
