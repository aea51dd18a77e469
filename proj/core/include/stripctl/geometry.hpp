#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stripctl/strip_model.hpp"

namespace stripctl {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  bool bounded() const { return lo > -kInf && hi < kInf; }
};

/// Axis-aligned box; the longitudinal (last) axis may be unbounded.
struct Box {
  std::vector<Interval> iv;
  int dimension() const { return static_cast<int>(iv.size()); }
  double volume() const;
  bool contains(std::span<const double> x) const;
};

/// Symbolic axis-aligned geometry: box unions, periodic patterns, product
/// sections and boolean combinations, with exact interval measures. Immutable;
/// nodes are shared.
class SetDescription {
 public:
  SetDescription() = default;

  static SetDescription empty(int d);
  static SetDescription full(int d);  // all of R^d
  static SetDescription box_union(int d, std::vector<Box> boxes);
  /// Periodic axes wrap x_j into [0, period_j); the cell must lie inside its
  /// period there. nullopt = aperiodic axis.
  static SetDescription periodic(SetDescription cell,
                                 std::vector<std::optional<double>> periods);
  /// section (d-1 dimensional boxes) times the whole longitudinal axis.
  static SetDescription product_section(int d, std::vector<Box> section_boxes);
  static SetDescription set_union(SetDescription a, SetDescription b);
  static SetDescription set_intersection(SetDescription a, SetDescription b);
  static SetDescription set_complement(SetDescription a);

  /// Longitudinal stripes: union over k of [k*period + phase, k*period + phase + width]
  /// times the full cross-section [0, 2*pi*L]^{d-1}.
  static SetDescription stripes(int d, double L, double period, double width,
                                double phase = 0.0);

  bool valid() const { return node_ != nullptr; }
  int dimension() const;
  int depth() const;
  bool contains(std::span<const double> x) const;

  /// All axis-j coordinates within [lo, hi] where the indicator can change.
  void axis_breakpoints(int axis, double lo, double hi, std::vector<double>& out) const;

  /// True when the set is invariant under x_d -> x_d + p for some p (reported),
  /// or fully longitudinal-invariant (period 0).
  std::optional<double> longitudinal_period() const;

  struct Node;
  const Node* node() const { return node_.get(); }

 private:
  explicit SetDescription(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

struct Parallelepiped {
  std::vector<double> center;
  std::vector<double> sides;
  Box box() const;
  double volume() const;
};

struct ThicknessCertificate {
  double gamma_est = 0.0;
  std::vector<double> a;
  Parallelepiped worst;
  double step = 0.0;
  bool exhaustive = false;  // false marks the certificate non-certifying
};

/// Exact Lebesgue measure of S ∩ P (P bounded), by arrangement refinement:
/// the indicator of S is constant on the cells cut by its axis breakpoints.
double intersection_measure(const SetDescription& S, const Parallelepiped& P);
double intersection_measure(const SetDescription& S, const Box& window);

/// Disjoint boxes whose union is S ∩ window, exact. The window must be bounded.
std::vector<Box> decompose(const SetDescription& S, const Box& window);

/// Minimize |S∩P|/|P| over interior parallelepipeds with sides `a`, centers on
/// a translation grid of spacing `step` (one period along periodic axes,
/// [-X + a_d/2, X - a_d/2] longitudinally). Ties break to the lexicographically
/// smallest center. The exhaustive flag is set when every measure breakpoint
/// lies on the center grid, which makes the grid minimum the true infimum.
ThicknessCertificate estimate_thickness(const SetDescription& S, std::span<const double> a,
                                        const StripDomain& domain, double step,
                                        int workers = 1);

/// Successive mirror unions S^(0)..S^(d-1) about the transverse coordinate
/// hyperplanes, then the (4*pi*L)-periodic transverse extension. With
/// restrict_to_doubled the result is intersected with (0, 4*pi*L)^{d-1} x R.
SetDescription reflect_extend(const SetDescription& S, const StripDomain& domain,
                              bool restrict_to_doubled = false);

/// S ∪ (R^d \ Omega_L).
SetDescription embed_thick(const SetDescription& S, const StripDomain& domain);

struct SampledThickness {
  double min_ratio = 1.0;
  Parallelepiped worst;
  int samples = 0;
};

struct EmbedResult {
  SetDescription set;
  ThicknessCertificate certificate;  // sampled, non-certifying (exhaustive = false)
};

/// embed_thick together with a sampled certificate at (gamma/2^d, 2a), probing
/// parallelepipeds across the strip walls (straddling and fully outside ones
/// included).
EmbedResult embed_thick_verified(const SetDescription& S, const ThicknessCertificate& cert,
                                 const StripDomain& domain, int samples, std::uint64_t seed);

/// Monte-Carlo thickness probe over parallelepipeds with sides `a` anywhere in
/// R^d transversally within [t_lo, t_hi] per transverse axis (allows
/// boundary-straddling and fully-outside placements) and centered in the
/// longitudinal window the domain can represent.
SampledThickness sample_thickness(const SetDescription& S, std::span<const double> a,
                                  const StripDomain& domain, double t_lo, double t_hi,
                                  int samples, std::uint64_t seed);

}  // namespace stripctl
