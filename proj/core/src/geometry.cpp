#include "stripctl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stripctl {

namespace {
constexpr int kMaxDepth = 32;
constexpr double kTol = 1e-12;
}  // namespace

double Box::volume() const {
  double v = 1.0;
  for (const Interval& i : iv) {
    const double len = i.length();
    if (len < 0.0) return 0.0;
    v *= len;
  }
  return v;
}

bool Box::contains(std::span<const double> x) const {
  for (std::size_t j = 0; j < iv.size(); ++j)
    if (x[j] < iv[j].lo || x[j] > iv[j].hi) return false;
  return true;
}

struct SetDescription::Node {
  enum class Kind { Empty, Full, BoxUnion, Periodic, ProductSection, Union, Intersection, Complement };
  Kind kind = Kind::Empty;
  int d = 0;
  std::vector<Box> boxes;  // BoxUnion; for ProductSection these are (d-1)-dim section boxes
  std::shared_ptr<const Node> a, b;
  std::vector<std::optional<double>> periods;
  int depth = 1;
};

using Node = SetDescription::Node;
using Kind = Node::Kind;

int SetDescription::dimension() const { return node_ ? node_->d : 0; }
int SetDescription::depth() const { return node_ ? node_->depth : 0; }

namespace {

std::shared_ptr<Node> base_node(Kind k, int d) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->d = d;
  return n;
}

void check_depth(int depth) {
  if (depth > kMaxDepth) throw std::invalid_argument("nesting depth exceeded");
}

}  // namespace

SetDescription SetDescription::empty(int d) { return SetDescription(base_node(Kind::Empty, d)); }

SetDescription SetDescription::full(int d) { return SetDescription(base_node(Kind::Full, d)); }

SetDescription SetDescription::box_union(int d, std::vector<Box> boxes) {
  for (const Box& b : boxes) {
    if (b.dimension() != d) throw std::invalid_argument("box dimension mismatch");
    for (int j = 0; j < d; ++j) {
      const Interval& iv = b.iv[j];
      if (std::isnan(iv.lo) || std::isnan(iv.hi) || iv.hi < iv.lo)
        throw std::invalid_argument("box has negative side length");
      if (j < d - 1 && !(iv.lo > -kInf && iv.hi < kInf))
        throw std::invalid_argument("only the longitudinal axis may be unbounded");
    }
  }
  auto n = base_node(Kind::BoxUnion, d);
  n->boxes = std::move(boxes);
  return SetDescription(std::move(n));
}

SetDescription SetDescription::periodic(SetDescription cell,
                                        std::vector<std::optional<double>> periods) {
  if (!cell.valid()) throw std::invalid_argument("invalid cell");
  const int d = cell.dimension();
  if (static_cast<int>(periods.size()) != d)
    throw std::invalid_argument("periods size must equal dimension");
  for (int j = 0; j < d; ++j) {
    if (!periods[j]) continue;
    const double p = *periods[j];
    if (!(p > 0.0)) throw std::invalid_argument("periods must be positive");
    std::vector<double> bp;
    cell.axis_breakpoints(j, -p, 2.0 * p, bp);
    for (double b : bp)
      if (b < -kTol || b > p + kTol)
        throw std::invalid_argument("periodic cell does not fit in its period");
  }
  auto n = base_node(Kind::Periodic, d);
  n->a = cell.node_;
  n->periods = std::move(periods);
  n->depth = cell.depth() + 1;
  check_depth(n->depth);
  return SetDescription(std::move(n));
}

SetDescription SetDescription::product_section(int d, std::vector<Box> section_boxes) {
  for (const Box& b : section_boxes) {
    if (b.dimension() != d - 1) throw std::invalid_argument("section box dimension mismatch");
    for (const Interval& iv : b.iv)
      if (!(iv.lo > -kInf && iv.hi < kInf) || iv.hi < iv.lo)
        throw std::invalid_argument("section boxes must be bounded with nonnegative sides");
  }
  auto n = base_node(Kind::ProductSection, d);
  n->boxes = std::move(section_boxes);
  return SetDescription(std::move(n));
}

SetDescription SetDescription::set_union(SetDescription a, SetDescription b) {
  if (a.dimension() != b.dimension()) throw std::invalid_argument("dimension mismatch");
  auto n = base_node(Kind::Union, a.dimension());
  n->a = a.node_;
  n->b = b.node_;
  n->depth = std::max(a.depth(), b.depth()) + 1;
  check_depth(n->depth);
  return SetDescription(std::move(n));
}

SetDescription SetDescription::set_intersection(SetDescription a, SetDescription b) {
  if (a.dimension() != b.dimension()) throw std::invalid_argument("dimension mismatch");
  auto n = base_node(Kind::Intersection, a.dimension());
  n->a = a.node_;
  n->b = b.node_;
  n->depth = std::max(a.depth(), b.depth()) + 1;
  check_depth(n->depth);
  return SetDescription(std::move(n));
}

SetDescription SetDescription::set_complement(SetDescription a) {
  auto n = base_node(Kind::Complement, a.dimension());
  n->a = a.node_;
  n->depth = a.depth() + 1;
  check_depth(n->depth);
  return SetDescription(std::move(n));
}

SetDescription SetDescription::stripes(int d, double L, double period, double width,
                                       double phase) {
  if (!(period > 0.0) || width < 0.0 || width > period)
    throw std::invalid_argument("stripes need 0 <= width <= period");
  Box cell;
  cell.iv.resize(d);
  for (int j = 0; j < d - 1; ++j) cell.iv[j] = {0.0, 2.0 * kPi * L};
  cell.iv[d - 1] = {0.0, width};
  std::vector<std::optional<double>> periods(d);
  periods[d - 1] = period;
  SetDescription pat = periodic(box_union(d, {cell}), std::move(periods));
  if (phase == 0.0) return pat;
  // phase shift: wrap the cell box across the period boundary
  const double ph = phase - period * std::floor(phase / period);
  std::vector<Box> boxes;
  const double end = ph + width;
  Box b1 = cell;
  b1.iv[d - 1] = {ph, std::min(end, period)};
  boxes.push_back(b1);
  if (end > period) {
    Box b2 = cell;
    b2.iv[d - 1] = {0.0, end - period};
    boxes.push_back(b2);
  }
  std::vector<std::optional<double>> periods2(d);
  periods2[d - 1] = period;
  return periodic(box_union(d, std::move(boxes)), std::move(periods2));
}

namespace {

bool node_contains(const Node* n, std::span<const double> x, std::vector<double>& scratch) {
  switch (n->kind) {
    case Kind::Empty:
      return false;
    case Kind::Full:
      return true;
    case Kind::BoxUnion:
      for (const Box& b : n->boxes)
        if (b.contains(x)) return true;
      return false;
    case Kind::ProductSection:
      for (const Box& b : n->boxes)
        if (b.contains(x.subspan(0, n->d - 1))) return true;
      return false;
    case Kind::Periodic: {
      const std::size_t base = scratch.size();
      scratch.resize(base + n->d);
      for (int j = 0; j < n->d; ++j) {
        double v = x[j];
        if (n->periods[j]) {
          const double p = *n->periods[j];
          v -= p * std::floor(v / p);
        }
        scratch[base + j] = v;
      }
      const bool r = node_contains(n->a.get(), std::span<const double>(scratch).subspan(base, n->d), scratch);
      scratch.resize(base);
      return r;
    }
    case Kind::Union:
      return node_contains(n->a.get(), x, scratch) || node_contains(n->b.get(), x, scratch);
    case Kind::Intersection:
      return node_contains(n->a.get(), x, scratch) && node_contains(n->b.get(), x, scratch);
    case Kind::Complement:
      return !node_contains(n->a.get(), x, scratch);
  }
  return false;
}

void node_breakpoints(const Node* n, int axis, double lo, double hi, std::vector<double>& out) {
  switch (n->kind) {
    case Kind::Empty:
    case Kind::Full:
      return;
    case Kind::BoxUnion:
      for (const Box& b : n->boxes) {
        const Interval& iv = b.iv[axis];
        if (iv.lo >= lo && iv.lo <= hi) out.push_back(iv.lo);
        if (iv.hi >= lo && iv.hi <= hi) out.push_back(iv.hi);
      }
      return;
    case Kind::ProductSection:
      if (axis < n->d - 1) {
        for (const Box& b : n->boxes) {
          const Interval& iv = b.iv[axis];
          if (iv.lo >= lo && iv.lo <= hi) out.push_back(iv.lo);
          if (iv.hi >= lo && iv.hi <= hi) out.push_back(iv.hi);
        }
      }
      return;
    case Kind::Periodic: {
      if (!n->periods[axis]) {
        node_breakpoints(n->a.get(), axis, lo, hi, out);
        return;
      }
      const double p = *n->periods[axis];
      std::vector<double> cell_bp;
      node_breakpoints(n->a.get(), axis, -p, 2.0 * p, cell_bp);  // cell content lives in [0, p]
      std::sort(cell_bp.begin(), cell_bp.end());
      cell_bp.erase(std::unique(cell_bp.begin(), cell_bp.end()), cell_bp.end());
      if (!std::isfinite(lo) || !std::isfinite(hi)) return;  // infinitely many; caller clips first
      for (double b : cell_bp) {
        const long k_lo = static_cast<long>(std::ceil((lo - b) / p - 1e-9));
        const long k_hi = static_cast<long>(std::floor((hi - b) / p + 1e-9));
        for (long k = k_lo; k <= k_hi; ++k) {
          const double v = b + static_cast<double>(k) * p;
          if (v >= lo - 1e-12 && v <= hi + 1e-12) out.push_back(v);
        }
      }
      return;
    }
    case Kind::Union:
    case Kind::Intersection:
      node_breakpoints(n->a.get(), axis, lo, hi, out);
      node_breakpoints(n->b.get(), axis, lo, hi, out);
      return;
    case Kind::Complement:
      node_breakpoints(n->a.get(), axis, lo, hi, out);
      return;
  }
}

std::optional<double> node_long_period(const Node* n) {
  switch (n->kind) {
    case Kind::Empty:
    case Kind::Full:
    case Kind::ProductSection:
      return 0.0;  // invariant along x_d
    case Kind::BoxUnion: {
      for (const Box& b : n->boxes) {
        const Interval& iv = b.iv[n->d - 1];
        if (!(iv.lo == -kInf && iv.hi == kInf)) return std::nullopt;
      }
      return 0.0;  // every box spans the whole axis
    }
    case Kind::Periodic: {
      if (n->periods[n->d - 1]) return *n->periods[n->d - 1];
      return node_long_period(n->a.get());
    }
    case Kind::Union:
    case Kind::Intersection: {
      const auto pa = node_long_period(n->a.get());
      const auto pb = node_long_period(n->b.get());
      if (!pa || !pb) return std::nullopt;
      if (*pa == 0.0) return pb;
      if (*pb == 0.0) return pa;
      const double big = std::max(*pa, *pb), small = std::min(*pa, *pb);
      const double ratio = big / small;
      if (std::abs(ratio - std::round(ratio)) < 1e-9) return big;
      return std::nullopt;
    }
    case Kind::Complement:
      return node_long_period(n->a.get());
  }
  return std::nullopt;
}

}  // namespace

bool SetDescription::contains(std::span<const double> x) const {
  if (!node_) return false;
  std::vector<double> scratch;
  return node_contains(node_.get(), x, scratch);
}

void SetDescription::axis_breakpoints(int axis, double lo, double hi,
                                      std::vector<double>& out) const {
  if (node_) node_breakpoints(node_.get(), axis, lo, hi, out);
}

std::optional<double> SetDescription::longitudinal_period() const {
  if (!node_) return std::nullopt;
  return node_long_period(node_.get());
}

Box Parallelepiped::box() const {
  Box b;
  b.iv.resize(center.size());
  for (std::size_t j = 0; j < center.size(); ++j)
    b.iv[j] = {center[j] - sides[j] / 2.0, center[j] + sides[j] / 2.0};
  return b;
}

double Parallelepiped::volume() const {
  double v = 1.0;
  for (double s : sides) v *= s;
  return v;
}

namespace {

// Sorted, deduplicated cut coordinates for one axis of the arrangement.
std::vector<double> axis_cuts(const SetDescription& S, int axis, const Interval& window) {
  std::vector<double> cuts;
  cuts.push_back(window.lo);
  cuts.push_back(window.hi);
  S.axis_breakpoints(axis, window.lo, window.hi, cuts);
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> out;
  for (double c : cuts) {
    if (std::isnan(c)) continue;
    if (c < window.lo || c > window.hi) continue;
    if (out.empty() || c - out.back() > kTol * std::max(1.0, std::abs(c)))
      out.push_back(c);
  }
  if (out.empty() || out.front() != window.lo) out.insert(out.begin(), window.lo);
  if (out.back() < window.hi) out.push_back(window.hi);
  return out;
}

}  // namespace

std::vector<Box> decompose(const SetDescription& S, const Box& window) {
  const int d = S.dimension();
  if (window.dimension() != d) throw std::invalid_argument("window dimension mismatch");
  for (const Interval& iv : window.iv)
    if (!iv.bounded()) throw std::invalid_argument("decomposition window must be bounded");
  std::vector<std::vector<double>> cuts(d);
  for (int j = 0; j < d; ++j) cuts[j] = axis_cuts(S, j, window.iv[j]);

  std::vector<Box> out;
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> center(d);
  while (true) {
    bool degenerate = false;
    for (int j = 0; j < d; ++j) {
      const double lo = cuts[j][idx[j]], hi = cuts[j][idx[j] + 1];
      if (hi <= lo) degenerate = true;
      center[j] = 0.5 * (lo + hi);
    }
    if (!degenerate && S.contains(center)) {
      Box b;
      b.iv.resize(d);
      for (int j = 0; j < d; ++j) b.iv[j] = {cuts[j][idx[j]], cuts[j][idx[j] + 1]};
      out.push_back(std::move(b));
    }
    int j = d - 1;
    while (j >= 0) {
      if (++idx[j] + 1 < cuts[j].size()) break;
      idx[j] = 0;
      --j;
    }
    if (j < 0) break;
  }
  return out;
}

double intersection_measure(const SetDescription& S, const Box& window) {
  for (const Interval& iv : window.iv)
    if (!iv.bounded()) throw std::invalid_argument("parallelepiped must be bounded");
  double v = 0.0;
  for (const Box& b : decompose(S, window)) v += b.volume();
  return v;
}

double intersection_measure(const SetDescription& S, const Parallelepiped& P) {
  return intersection_measure(S, P.box());
}

ThicknessCertificate estimate_thickness(const SetDescription& S, std::span<const double> a,
                                        const StripDomain& domain, double step, int workers) {
  const int d = domain.dimension();
  if (static_cast<int>(a.size()) != d) throw std::invalid_argument("side vector size mismatch");
  if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
  const double width = domain.transverse_extent();
  for (int j = 0; j < d - 1; ++j) {
    if (!(a[j] > 0.0)) throw std::invalid_argument("sides must be positive");
    if (a[j] > width + kTol)
      throw std::invalid_argument("transverse side exceeds cross-section width 2*pi*L");
  }
  if (!(a[d - 1] > 0.0)) throw std::invalid_argument("sides must be positive");

  const double X = domain.half_width();
  if (a[d - 1] > 2.0 * X)
    throw std::invalid_argument("longitudinal side exceeds model range 2X");

  // candidate centers per axis
  std::vector<std::vector<double>> cand(d);
  for (int j = 0; j < d - 1; ++j) {
    const double lo = a[j] / 2.0, hi = width - a[j] / 2.0;
    for (double c = lo; c < hi - kTol; c += step) cand[j].push_back(c);
    cand[j].push_back(hi);
  }
  const auto period = S.longitudinal_period();
  {
    const double lo = -X + a[d - 1] / 2.0, hi = X - a[d - 1] / 2.0;
    auto& c = cand[d - 1];
    if (period && *period == 0.0) {
      c.push_back(lo);
    } else if (period) {
      const double end = std::min(lo + *period, hi + kTol);
      for (double v = lo; v < end - kTol; v += step) c.push_back(v);
      if (c.empty()) c.push_back(lo);
    } else {
      for (double v = lo; v < hi - kTol; v += step) c.push_back(v);
      c.push_back(hi);
    }
  }

  std::size_t total = 1;
  for (int j = 0; j < d; ++j) total *= cand[j].size();

  std::vector<double> ratios(total);
  const double volume = [&] {
    double v = 1.0;
    for (int j = 0; j < d; ++j) v *= a[j];
    return v;
  }();
  auto center_of = [&](std::size_t flat) {
    std::vector<double> c(d);
    for (int j = d - 1; j >= 0; --j) {
      c[j] = cand[j][flat % cand[j].size()];
      flat /= cand[j].size();
    }
    return c;
  };
  parallel_for(
      total,
      [&](std::size_t i) {
        Parallelepiped P{center_of(i), std::vector<double>(a.begin(), a.end())};
        ratios[i] = intersection_measure(S, P) / volume;
      },
      workers);

  std::size_t best = 0;
  for (std::size_t i = 1; i < total; ++i)
    if (ratios[i] < ratios[best] - kTol) best = i;  // first occurrence = lex smallest center

  ThicknessCertificate cert;
  cert.gamma_est = ratios[best];
  cert.a.assign(a.begin(), a.end());
  cert.worst = Parallelepiped{center_of(best), cert.a};
  cert.step = step;

  // Exhaustive when S is longitudinally periodic (or invariant) and every kink
  // of the piecewise-multilinear measure function lies on the center grid.
  bool exhaustive = period.has_value();
  for (int j = 0; j < d && exhaustive; ++j) {
    if (cand[j].size() == 1) continue;
    const double c_lo = cand[j].front(), c_hi = cand[j].back();
    std::vector<double> bp;
    S.axis_breakpoints(j, c_lo - a[j] / 2.0 - kTol, c_hi + a[j] / 2.0 + kTol, bp);
    for (double b : bp) {
      for (const double kink : {b - a[j] / 2.0, b + a[j] / 2.0}) {
        if (kink < c_lo - kTol || kink > c_hi + kTol) continue;
        const double t = (kink - c_lo) / step;
        if (std::abs(t - std::round(t)) > 1e-9) {
          exhaustive = false;
          break;
        }
      }
      if (!exhaustive) break;
    }
  }
  cert.exhaustive = exhaustive;
  return cert;
}

SetDescription reflect_extend(const SetDescription& S, const StripDomain& domain,
                              bool restrict_to_doubled) {
  const int d = domain.dimension();
  const double width = domain.transverse_extent();
  Box window;
  window.iv.resize(d);
  for (int j = 0; j < d - 1; ++j) window.iv[j] = {0.0, width};

  // The reflections act transversally only; handle the longitudinal axis by
  // its structure so the flattened cell stays finite.
  const auto period = S.longitudinal_period();
  bool invariant = period && *period == 0.0;
  std::optional<double> out_period;
  if (invariant) {
    window.iv[d - 1] = {0.0, 1.0};
  } else if (period) {
    window.iv[d - 1] = {0.0, *period};
    out_period = *period;
  } else {
    // aperiodic content: exact on the representable range and beyond it by a
    // safety factor; nothing the model can measure lies outside [-2X, 2X]
    window.iv[d - 1] = {-2.0 * domain.half_width(), 2.0 * domain.half_width()};
  }

  std::vector<Box> boxes = decompose(S, window);  // S^(0) = S ∩ Omega_L
  if (invariant)
    for (Box& b : boxes) b.iv[d - 1] = {-kInf, kInf};
  for (int k = 0; k < d - 1; ++k) {
    const std::size_t count = boxes.size();
    for (std::size_t i = 0; i < count; ++i) {
      Box r = boxes[i];
      const Interval iv = r.iv[k];
      r.iv[k] = {-iv.hi, -iv.lo};
      boxes.push_back(std::move(r));
    }
  }
  // Wrap the negative-side copies up by one period so the fundamental cell
  // sits in [0, 4*pi*L) per transverse axis.
  for (Box& b : boxes) {
    for (int j = 0; j < d - 1; ++j) {
      const double mid = 0.5 * (b.iv[j].lo + b.iv[j].hi);
      if (mid < 0.0) {
        b.iv[j].lo += 2.0 * width;
        b.iv[j].hi += 2.0 * width;
      }
    }
  }
  std::vector<std::optional<double>> periods(d);
  for (int j = 0; j < d - 1; ++j) periods[j] = 2.0 * width;  // 4*pi*L
  periods[d - 1] = out_period;
  SetDescription tiled =
      SetDescription::periodic(SetDescription::box_union(d, std::move(boxes)), std::move(periods));
  if (!restrict_to_doubled) return tiled;
  Box section;
  section.iv.resize(d - 1);
  for (int j = 0; j < d - 1; ++j) section.iv[j] = {0.0, 2.0 * width};
  return SetDescription::set_intersection(
      tiled, SetDescription::product_section(d, {section}));
}

SetDescription embed_thick(const SetDescription& S, const StripDomain& domain) {
  const int d = domain.dimension();
  Box section;
  section.iv.resize(d - 1);
  for (int j = 0; j < d - 1; ++j) section.iv[j] = {0.0, domain.transverse_extent()};
  return SetDescription::set_union(
      S, SetDescription::set_complement(SetDescription::product_section(d, {section})));
}

EmbedResult embed_thick_verified(const SetDescription& S, const ThicknessCertificate& cert,
                                 const StripDomain& domain, int samples, std::uint64_t seed) {
  EmbedResult res;
  res.set = embed_thick(S, domain);
  std::vector<double> a2(cert.a.size());
  for (std::size_t j = 0; j < cert.a.size(); ++j) a2[j] = 2.0 * cert.a[j];
  const double width = domain.transverse_extent();
  const SampledThickness sampled =
      sample_thickness(res.set, a2, domain, -width, 2.0 * width, samples, seed);
  res.certificate.gamma_est = sampled.min_ratio;
  res.certificate.a = a2;
  res.certificate.worst = sampled.worst;
  res.certificate.step = 0.0;
  res.certificate.exhaustive = false;  // sampled probes never certify
  return res;
}

SampledThickness sample_thickness(const SetDescription& S, std::span<const double> a,
                                  const StripDomain& domain, double t_lo, double t_hi,
                                  int samples, std::uint64_t seed) {
  const int d = domain.dimension();
  if (static_cast<int>(a.size()) != d) throw std::invalid_argument("side vector size mismatch");
  Rng rng(seed);
  SampledThickness result;
  result.samples = samples;
  const double X = domain.half_width();
  const double c_lo = -X + a[d - 1] / 2.0, c_hi = X - a[d - 1] / 2.0;
  double vol = 1.0;
  for (double s : a) vol *= s;
  for (int i = 0; i < samples; ++i) {
    Parallelepiped P;
    P.sides.assign(a.begin(), a.end());
    P.center.resize(d);
    for (int j = 0; j < d - 1; ++j) P.center[j] = rng.uniform(t_lo, t_hi);
    P.center[d - 1] = rng.uniform(c_lo, c_hi);
    const double r = intersection_measure(S, P) / vol;
    if (i == 0 || r < result.min_ratio) {
      result.min_ratio = r;
      result.worst = P;
    }
  }
  return result;
}

}  // namespace stripctl
