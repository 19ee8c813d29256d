#include "bamesh/remesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <Eigen/LU>

#include "bamesh/error.hpp"

namespace bamesh::remesh {

using metric::Mat2;
using metric::MetricFunction;
using mesh::Triangle;
using mesh::TriMesh;
using mesh::Vec2;

namespace {

const double kLo = 1.0 / std::sqrt(2.0);
const double kHi = std::sqrt(2.0);
constexpr double kGeomTol = 1e-12;

struct EdgeRef {
  int a, b;
  double len;
};

class Workspace {
 public:
  Workspace(const TriMesh& m, MetricFunction g, const RemeshOptions& opt)
      : g_(std::move(g)), opt_(opt) {
    p_ = m.vertices();
    t_ = m.triangles();
    dead_t_.assign(t_.size(), 0);
    bnd_.resize(p_.size());
    corner_.resize(p_.size());
    dead_v_.assign(p_.size(), 0);
    vt_.resize(p_.size());
    gv_.resize(p_.size());
    for (int v = 0; v < m.num_vertices(); ++v) {
      bnd_[v] = m.is_boundary_vertex(v) ? 1 : 0;
      corner_[v] = is_corner(p_[v]) ? 1 : 0;
      gv_[v] = g_(p_[v]);
    }
    for (int t = 0; t < static_cast<int>(t_.size()); ++t)
      for (int v : t_[t]) vt_[v].push_back(t);
  }

  RemeshReport run() {
    RemeshReport rep;
    double best = band_fraction();
    int stall = 0;
    for (int sweep = 1; sweep <= opt_.max_sweeps; ++sweep) {
      rep.sweeps = sweep;
      for (int k = 0; k < 12; ++k) {
        const int s = split_pass();
        rep.splits += s;
        if (s == 0) break;
      }
      for (int k = 0; k < 12; ++k) {
        const int c = collapse_pass();
        rep.collapses += c;
        if (c == 0) break;
      }
      for (int k = 0; k < 6; ++k) {
        const int f = flip_pass();
        rep.flips += f;
        if (f == 0) break;
      }
      rep.collapses += collapse_pass(true);
      for (int k = 0; k < 3; ++k) {
        rep.moves += smooth_pass();
        rep.flips += flip_pass();
      }
      const double frac = band_fraction();
      if (1.0 - frac < opt_.out_of_band_target) {
        rep.converged = true;
        break;
      }
      if (frac > best + 1e-4) {
        best = frac;
        stall = 0;
      } else if (++stall >= opt_.stall_sweeps) {
        rep.stalled = true;
        break;
      }
    }
    return rep;
  }

  // Greedy reduction of the largest per-triangle discrepancy between the
  // metric and the Steiner metric of the element. Each accepted change
  // lowers the maximum over the triangles it touches, so the global maximum
  // never grows.
  int polish(int rounds = 40) {
    int changes = 0;
    for (int round = 0; round < rounds; ++round) {
      std::vector<std::pair<double, int>> order;
      for (int t = 0; t < static_cast<int>(t_.size()); ++t)
        if (!dead_t_[t]) order.emplace_back(cached_score(t), t);
      if (order.empty()) break;
      std::sort(order.begin(), order.end(), std::greater<>());
      const double top = order.front().first;
      int made = 0;
      for (const auto& [s0, t] : order) {
        if (s0 < 0.5 * top) break;
        if (dead_t_[t]) continue;
        if (improve(t)) ++made;
      }
      changes += made;
      if (made == 0) break;
    }
    return changes;
  }

  TriMesh build() const {
    std::vector<int> new_index(p_.size(), -1);
    std::vector<Vec2> verts;
    std::vector<Triangle> tris;
    for (std::size_t t = 0; t < t_.size(); ++t) {
      if (dead_t_[t]) continue;
      Triangle tri = t_[t];
      for (int& v : tri) {
        if (new_index[v] < 0) {
          new_index[v] = static_cast<int>(verts.size());
          verts.push_back(p_[v]);
        }
        v = new_index[v];
      }
      tris.push_back(tri);
    }
    return TriMesh(std::move(verts), std::move(tris));
  }

 private:
  bool is_corner(const Vec2& x) const {
    if (opt_.domain != mesh::DomainShape::UnitSquare) return false;
    auto at_side = [](double c) { return std::abs(c) < 1e-12 || std::abs(c - 1.0) < 1e-12; };
    return at_side(x.x()) && at_side(x.y());
  }

  // Projects q onto the boundary side shared by reference points r and s.
  Vec2 project(const Vec2& q, const Vec2& r, const Vec2& s) const {
    if (opt_.domain == mesh::DomainShape::UnitDisc) return q / q.norm();
    Vec2 out = q.cwiseMax(0.0).cwiseMin(1.0);
    for (int d = 0; d < 2; ++d) {
      for (double side : {0.0, 1.0}) {
        if (std::abs(r(d) - side) < 1e-12 && std::abs(s(d) - side) < 1e-12) {
          out(d) = side;
          return out;
        }
      }
    }
    return out;
  }

  double length_with(const Vec2& pa, const Mat2& ga, const Vec2& pb, const Mat2& gb) const {
    const Vec2 d = pb - pa;
    const double la = std::sqrt(d.dot(ga * d));
    const double lb = std::sqrt(d.dot(gb * d));
    if (std::abs(la - lb) <= 1e-9 * std::max(la, lb)) return 0.5 * (la + lb);
    return (la - lb) / std::log(la / lb);
  }
  double length(int a, int b) const { return length_with(p_[a], gv_[a], p_[b], gv_[b]); }

  // 4 sqrt(3) area_M / sum of squared metric edge lengths; negative when inverted.
  static double quality(const Vec2& a, const Vec2& b, const Vec2& c, const Mat2& g) {
    const double area = mesh::signed_area(a, b, c);
    const Vec2 e1 = b - a, e2 = c - b, e3 = a - c;
    const double sum = e1.dot(g * e1) + e2.dot(g * e2) + e3.dot(g * e3);
    return 4.0 * std::sqrt(3.0) * std::sqrt(g.determinant()) * area / sum;
  }
  double quality(const Triangle& t) const {
    const Mat2 g = (gv_[t[0]] + gv_[t[1]] + gv_[t[2]]) / 3.0;
    return quality(p_[t[0]], p_[t[1]], p_[t[2]], g);
  }
  bool positive(const Triangle& t) const {
    const double area = mesh::signed_area(p_[t[0]], p_[t[1]], p_[t[2]]);
    const double scale = (p_[t[1]] - p_[t[0]]).squaredNorm() + (p_[t[2]] - p_[t[0]]).squaredNorm();
    return area > kGeomTol * scale;
  }

  std::vector<int> tris_of_edge(int a, int b) const {
    std::vector<int> out;
    for (int t : vt_[a]) {
      const auto& tri = t_[t];
      if (tri[0] == b || tri[1] == b || tri[2] == b) out.push_back(t);
    }
    return out;
  }

  std::vector<int> neighbors(int v) const {
    std::vector<int> out;
    for (int t : vt_[v])
      for (int x : t_[t])
        if (x != v) out.push_back(x);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  int add_vertex(const Vec2& x, bool boundary) {
    p_.push_back(x);
    gv_.push_back(g_(x));
    bnd_.push_back(boundary ? 1 : 0);
    corner_.push_back(0);
    dead_v_.push_back(0);
    vt_.emplace_back();
    return static_cast<int>(p_.size()) - 1;
  }

  int add_triangle(const Triangle& tri) {
    t_.push_back(tri);
    dead_t_.push_back(0);
    const int id = static_cast<int>(t_.size()) - 1;
    for (int v : tri) vt_[v].push_back(id);
    return id;
  }

  void detach(int t) {
    invalidate(t);
    for (int v : t_[t]) {
      auto& lst = vt_[v];
      lst.erase(std::remove(lst.begin(), lst.end(), t), lst.end());
    }
  }
  void remove_triangle(int t) {
    detach(t);
    dead_t_[t] = 1;
  }
  void replace_triangle(int t, const Triangle& tri) {
    detach(t);
    t_[t] = tri;
    for (int v : tri) vt_[v].push_back(t);
  }

  std::vector<EdgeRef> edges() const {
    std::vector<std::pair<int, int>> raw;
    raw.reserve(3 * t_.size());
    for (std::size_t t = 0; t < t_.size(); ++t) {
      if (dead_t_[t]) continue;
      for (int k = 0; k < 3; ++k) {
        const int a = t_[t][k], b = t_[t][(k + 1) % 3];
        raw.emplace_back(std::min(a, b), std::max(a, b));
      }
    }
    std::sort(raw.begin(), raw.end());
    raw.erase(std::unique(raw.begin(), raw.end()), raw.end());
    std::vector<EdgeRef> out;
    out.reserve(raw.size());
    for (const auto& [a, b] : raw) out.push_back({a, b, length(a, b)});
    return out;
  }

  double band_fraction() const {
    const auto es = edges();
    const auto in = std::count_if(es.begin(), es.end(),
                                  [](const EdgeRef& e) { return e.len >= kLo && e.len <= kHi; });
    return es.empty() ? 0.0 : static_cast<double>(in) / static_cast<double>(es.size());
  }

  // Rotates triangle so that it reads (a, b, c) with a -> b along the ccw order.
  static bool orient_edge(const Triangle& tri, int a, int b, int& c) {
    for (int k = 0; k < 3; ++k) {
      if (tri[k] == a && tri[(k + 1) % 3] == b) {
        c = tri[(k + 2) % 3];
        return true;
      }
    }
    return false;
  }

  int split_pass() {
    auto es = edges();
    std::erase_if(es, [](const EdgeRef& e) { return e.len <= kHi; });
    std::sort(es.begin(), es.end(), [](const EdgeRef& x, const EdgeRef& y) { return x.len > y.len; });
    std::vector<std::uint8_t> touched(t_.size(), 0);
    int count = 0;
    for (const auto& e : es) {
      const auto tris = tris_of_edge(e.a, e.b);
      if (tris.empty()) continue;
      if (std::any_of(tris.begin(), tris.end(), [&](int t) { return touched[t] != 0; })) continue;
      const bool boundary_edge = tris.size() == 1;
      Vec2 m = 0.5 * (p_[e.a] + p_[e.b]);
      if (boundary_edge) m = project(m, p_[e.a], p_[e.b]);
      // Prospective triangles.
      std::vector<Triangle> repl;
      bool ok = true;
      for (int t : tris) {
        int a = e.a, b = e.b, c = -1;
        if (!orient_edge(t_[t], a, b, c)) {
          std::swap(a, b);
          orient_edge(t_[t], a, b, c);
        }
        repl.push_back({a, -1, c});
        repl.push_back({-1, b, c});
      }
      for (const auto& tri : repl) {
        const Vec2& x0 = tri[0] < 0 ? m : p_[tri[0]];
        const Vec2& x1 = tri[1] < 0 ? m : p_[tri[1]];
        if (!(mesh::signed_area(x0, x1, p_[tri[2]]) > 0.0)) ok = false;
      }
      if (!ok) continue;
      const int mv = add_vertex(m, boundary_edge);
      for (int t : tris) remove_triangle(t);
      for (auto tri : repl) {
        for (int& v : tri)
          if (v < 0) v = mv;
        add_triangle(tri);
        touched.push_back(1);
      }
      ++count;
    }
    return count;
  }

  bool try_collapse(int v, int w, bool require_gain = false) {
    if (corner_[v] || dead_v_[v] || dead_v_[w]) return false;
    const auto shared = tris_of_edge(v, w);
    if (shared.empty()) return false;
    if (bnd_[v] && shared.size() != 1) return false;
    if (!bnd_[v] && shared.size() != 2) return false;
    // Link condition.
    std::vector<int> opposite;
    for (int t : shared)
      for (int x : t_[t])
        if (x != v && x != w) opposite.push_back(x);
    std::sort(opposite.begin(), opposite.end());
    const auto nv = neighbors(v);
    const auto nw = neighbors(w);
    std::vector<int> common;
    std::set_intersection(nv.begin(), nv.end(), nw.begin(), nw.end(), std::back_inserter(common));
    if (common != opposite) return false;
    // Resulting triangles must stay valid and reasonably shaped.
    double q_before = 1.0, q_after = 1.0;
    for (int t : vt_[v]) {
      q_before = std::min(q_before, quality(t_[t]));
      if (std::find(shared.begin(), shared.end(), t) != shared.end()) continue;
      Triangle tri = t_[t];
      const double q_old = quality(tri);
      for (int& x : tri)
        if (x == v) x = w;
      if (!positive(tri)) return false;
      const double q_new = quality(tri);
      if (q_new < std::min(0.2, 0.5 * q_old)) return false;
      q_after = std::min(q_after, q_new);
    }
    if (require_gain && !(q_after > q_before + 0.05)) return false;
    const double max_len = kHi;
    for (int x : nv) {
      if (x == w) continue;
      if (length(w, x) > max_len) return false;
    }
    for (int t : shared) remove_triangle(t);
    const std::vector<int> rest = vt_[v];
    for (int t : rest) {
      Triangle tri = t_[t];
      for (int& x : tri)
        if (x == v) x = w;
      replace_triangle(t, tri);
    }
    dead_v_[v] = 1;
    vt_[v].clear();
    return true;
  }

  // With require_gain, edges up to unit length are collapsed when that
  // improves the worst metric quality around the removed vertex.
  int collapse_pass(bool require_gain = false) {
    auto es = edges();
    const double limit = require_gain ? 1.0 : kLo;
    std::erase_if(es, [&](const EdgeRef& e) { return e.len >= limit; });
    std::sort(es.begin(), es.end(), [](const EdgeRef& x, const EdgeRef& y) { return x.len < y.len; });
    std::vector<std::uint8_t> touched(p_.size(), 0);
    int count = 0;
    for (const auto& e : es) {
      if (touched[e.a] || touched[e.b]) continue;
      // Prefer removing an interior vertex.
      int v = e.a, w = e.b;
      if (bnd_[v] && !bnd_[w]) std::swap(v, w);
      int keep = -1;
      if (try_collapse(v, w, require_gain)) keep = w;
      else if (try_collapse(w, v, require_gain)) keep = v;
      if (keep < 0) continue;
      touched[e.a] = touched[e.b] = 1;
      for (int x : neighbors(keep)) touched[x] = 1;
      ++count;
    }
    return count;
  }

  int flip_pass() {
    const auto es = edges();
    int count = 0;
    for (const auto& e : es) {
      const auto tris = tris_of_edge(e.a, e.b);
      if (tris.size() != 2) continue;
      int a = e.a, b = e.b, c = -1, d = -1;
      int t1 = tris[0], t2 = tris[1];
      if (!orient_edge(t_[t1], a, b, c)) std::swap(t1, t2);
      if (!orient_edge(t_[t1], a, b, c) || !orient_edge(t_[t2], b, a, d)) continue;
      if (c == d) continue;
      const auto nc = neighbors(c);
      if (std::binary_search(nc.begin(), nc.end(), d)) continue;
      const Triangle n1{a, d, c}, n2{d, b, c};
      if (!positive(n1) || !positive(n2)) continue;
      const double q_old = std::min(quality(t_[t1]), quality(t_[t2]));
      const double q_new = std::min(quality(n1), quality(n2));
      if (!(q_new > q_old + 1e-6)) continue;
      replace_triangle(t1, n1);
      replace_triangle(t2, n2);
      ++count;
    }
    return count;
  }

  int smooth_pass() {
    int moves = 0;
    const int nverts = static_cast<int>(p_.size());
    for (int v = 0; v < nverts; ++v) {
      if (dead_v_[v] || corner_[v] || vt_[v].empty()) continue;
      std::vector<int> pull;
      if (bnd_[v]) {
        for (int x : neighbors(v))
          if (bnd_[x] && tris_of_edge(v, x).size() == 1) pull.push_back(x);
        if (pull.size() != 2) continue;
      } else {
        pull = neighbors(v);
      }
      Vec2 target = Vec2::Zero();
      for (int x : pull) target += p_[x] + (p_[v] - p_[x]) / std::max(length(v, x), 1e-3);
      target /= static_cast<double>(pull.size());

      double q_old = 1.0;
      for (int t : vt_[v]) q_old = std::min(q_old, quality(t_[t]));
      const Vec2 old = p_[v];
      const Mat2 old_g = gv_[v];
      bool moved = false;
      for (double omega : {0.5, 0.25}) {
        Vec2 cand = old + omega * (target - old);
        if (bnd_[v]) cand = project(cand, old, old);
        p_[v] = cand;
        gv_[v] = g_(cand);
        bool ok = true;
        double q_new = 1.0;
        for (int t : vt_[v]) {
          if (!positive(t_[t])) {
            ok = false;
            break;
          }
          q_new = std::min(q_new, quality(t_[t]));
        }
        if (ok && q_new >= std::min(q_old, 0.3)) {
          moved = true;
          break;
        }
      }
      if (moved) {
        ++moves;
        for (int t : vt_[v]) invalidate(t);
      } else {
        p_[v] = old;
        gv_[v] = old_g;
      }
    }
    return moves;
  }

  double score(const Triangle& tri) const {
    if (!positive(tri)) return std::numeric_limits<double>::infinity();
    const Vec2& a = p_[tri[0]];
    const Vec2& b = p_[tri[1]];
    const Vec2& c = p_[tri[2]];
    try {
      const auto st = metric::steiner_polar(a, b, c);
      return (g_((a + b + c) / 3.0) - metric::element_metric(st)).cwiseAbs().maxCoeff();
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  }

  double cached_score(int t) {
    if (score_.size() < t_.size()) score_.resize(t_.size(), -1.0);
    if (score_[t] < 0.0) score_[t] = score(t_[t]);
    return score_[t];
  }
  void invalidate(int t) {
    if (t < static_cast<int>(score_.size())) score_[t] = -1.0;
  }

  static bool in_band(double l) { return l >= kLo && l <= kHi; }

  // Out-of-band edges from v to each vertex in `others`.
  int out_of_band(int v, const std::vector<int>& others) const {
    int n = 0;
    for (int x : others)
      if (x != v && !in_band(length(v, x))) ++n;
    return n;
  }

  double star_score(int v) const {
    double s = 0.0;
    for (int t : vt_[v]) s = std::max(s, score(t_[t]));
    return s;
  }

  bool improve(int t) {
    const Triangle tri = t_[t];
    for (int k = 0; k < 3; ++k)
      if (flip_for_score(tri[k], tri[(k + 1) % 3])) return true;
    for (int v : tri)
      if (relocate_for_score(v)) return true;
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k], b = tri[(k + 1) % 3];
      if (collapse_for_score(a, b) || collapse_for_score(b, a)) return true;
    }
    return false;
  }

  bool flip_for_score(int a, int b) {
    auto tris = tris_of_edge(a, b);
    if (tris.size() != 2) return false;
    int t1 = tris[0], t2 = tris[1], c = -1, d = -1;
    if (!orient_edge(t_[t1], a, b, c)) {
      std::swap(a, b);
      if (!orient_edge(t_[t1], a, b, c)) return false;
    }
    if (!orient_edge(t_[t2], b, a, d) || c == d) return false;
    const auto nc = neighbors(c);
    if (std::binary_search(nc.begin(), nc.end(), d)) return false;
    const Triangle n1{a, d, c}, n2{d, b, c};
    if (!positive(n1) || !positive(n2)) return false;
    const double before = std::max(score(t_[t1]), score(t_[t2]));
    const double after = std::max(score(n1), score(n2));
    if (!(after < before * (1.0 - 1e-6))) return false;
    if (in_band(length(a, b)) && !in_band(length(c, d))) return false;
    replace_triangle(t1, n1);
    replace_triangle(t2, n2);
    return true;
  }

  bool relocate_for_score(int v) {
    if (dead_v_[v] || corner_[v] || vt_[v].empty()) return false;
    const Vec2 old = p_[v];
    const Mat2 old_g = gv_[v];
    double reach = std::numeric_limits<double>::infinity();
    for (int x : neighbors(v)) reach = std::min(reach, (p_[x] - old).norm());
    const auto nb = neighbors(v);
    const int out_before = out_of_band(v, nb);
    const double before = star_score(v);
    double best = before * (1.0 - 1e-6);
    Vec2 best_p = old;
    for (double step : {0.3, 0.1}) {
      for (int k = 0; k < 8; ++k) {
        const double ang = k * std::numbers::pi / 4.0;
        Vec2 cand = old + step * reach * Vec2(std::cos(ang), std::sin(ang));
        if (bnd_[v]) cand = project(cand, old, old);
        p_[v] = cand;
        const double s = star_score(v);
        if (s >= best) continue;
        gv_[v] = g_(cand);
        const bool keeps_band = out_of_band(v, nb) <= out_before;
        gv_[v] = old_g;
        if (keeps_band) {
          best = s;
          best_p = cand;
        }
      }
    }
    p_[v] = best_p;
    gv_[v] = best_p == old ? old_g : g_(best_p);
    if (best_p == old) return false;
    for (int t : vt_[v]) invalidate(t);
    return true;
  }

  // Removes v by merging it into w when that lowers the largest score
  // around v.
  bool collapse_for_score(int v, int w) {
    if (corner_[v] || dead_v_[v] || dead_v_[w]) return false;
    if (bnd_[v] && !bnd_[w]) return false;
    const auto shared = tris_of_edge(v, w);
    if (shared.empty()) return false;
    if (bnd_[v] && shared.size() != 1) return false;
    if (!bnd_[v] && shared.size() != 2) return false;
    std::vector<int> opposite;
    for (int t : shared)
      for (int x : t_[t])
        if (x != v && x != w) opposite.push_back(x);
    std::sort(opposite.begin(), opposite.end());
    const auto nv = neighbors(v);
    const auto nw = neighbors(w);
    std::vector<int> common;
    std::set_intersection(nv.begin(), nv.end(), nw.begin(), nw.end(), std::back_inserter(common));
    if (common != opposite) return false;
    double before = 0.0, after = 0.0;
    for (int t : vt_[v]) {
      before = std::max(before, score(t_[t]));
      if (std::find(shared.begin(), shared.end(), t) != shared.end()) continue;
      Triangle tri = t_[t];
      for (int& x : tri)
        if (x == v) x = w;
      if (!positive(tri)) return false;
      after = std::max(after, score(tri));
    }
    if (!(after < before * (1.0 - 1e-6))) return false;
    std::vector<int> merged;
    std::set_union(nv.begin(), nv.end(), nw.begin(), nw.end(), std::back_inserter(merged));
    std::erase_if(merged, [&](int x) { return x == v || x == w; });
    if (out_of_band(w, merged) > out_of_band(v, nv) + out_of_band(w, nw) - (in_band(length(v, w)) ? 0 : 1))
      return false;
    for (int t : shared) remove_triangle(t);
    const std::vector<int> rest = vt_[v];
    for (int t : rest) {
      Triangle tri = t_[t];
      for (int& x : tri)
        if (x == v) x = w;
      replace_triangle(t, tri);
    }
    dead_v_[v] = 1;
    vt_[v].clear();
    return true;
  }

  MetricFunction g_;
  RemeshOptions opt_;
  std::vector<Vec2> p_;
  std::vector<Mat2> gv_;
  std::vector<std::uint8_t> bnd_, corner_, dead_v_;
  std::vector<Triangle> t_;
  std::vector<std::uint8_t> dead_t_;
  std::vector<std::vector<int>> vt_;
  // Per-triangle conformity scores for the polish pass; negative = stale.
  std::vector<double> score_;
};

}  // namespace

MetricFunction clamped_metric(MetricFunction g, double h_min, double h_max) {
  const double lo = 1.0 / (h_max * h_max);
  const double hi = 1.0 / (h_min * h_min);
  return [g = std::move(g), lo, hi](const Vec2& x) {
    return metric::clamp_eigenvalues(g(x), lo, hi);
  };
}

double fraction_in_band(const TriMesh& mesh, const MetricFunction& g) {
  const auto lens = metric::metric_edge_lengths(mesh, g);
  const auto in = std::count_if(lens.begin(), lens.end(),
                                [](double l) { return l >= kLo && l <= kHi; });
  return lens.empty() ? 0.0 : static_cast<double>(in) / static_cast<double>(lens.size());
}

RemeshResult adapt_mesh(const TriMesh& old_mesh, const MetricFunction& g,
                        const RemeshOptions& options) {
  if (!(options.h_min > 0.0 && options.h_min < options.h_max)) {
    throw InvalidArgument("adapt_mesh: need 0 < h_min < h_max");
  }
  if (options.max_sweeps < 1) throw InvalidArgument("adapt_mesh: max_sweeps must be >= 1");
  const MetricFunction gc = clamped_metric(g, options.h_min, options.h_max);
  Workspace ws(old_mesh, gc, options);
  RemeshReport rep = ws.run();
  rep.polish_moves = ws.polish();
  TriMesh out = ws.build();
  rep.fraction_in_band = fraction_in_band(out, gc);
  return {std::move(out), rep};
}

}  // namespace bamesh::remesh
