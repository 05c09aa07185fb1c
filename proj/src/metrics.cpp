#include "spadas/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spadas {

namespace {

double centre_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

// Slack on the min-distance prune so a rounding error never drops the
// candidate that holds a true nearest neighbour.
constexpr double kPruneSlack = 1e-12;

bool may_hold_nearest(double centre_dist, double r_query, double r_target, double ub) {
  return centre_dist - r_query - r_target <= ub + ub * kPruneSlack;
}

}  // namespace

double ia(const Mbr& a, const Mbr& b) {
  double area = 1.0;
  for (std::size_t i = 0; i < kSpatialAxes; ++i) {
    const double side = std::min(a.hi[i], b.hi[i]) - std::max(a.lo[i], b.lo[i]);
    if (side <= 0.0) return 0.0;
    area *= side;
  }
  return area;
}

std::size_t gbo(const ZSignature& q, const ZSignature& d) {
  return signature_intersection_size(q, d);
}

HausBounds haus_bounds(double d, double r1, double r2) {
  HausBounds b;
  b.lb = std::max(d - r2, 0.0);
  b.ub = (r2 == 0.0 ? d : std::sqrt(d * d + r2 * r2)) + r1;
  return b;
}

HausBounds haus_bounds(std::span<const double> o1, double r1,
                       std::span<const double> o2, double r2) {
  return haus_bounds(euclidean(o1, o2, o1.size()), r1, r2);
}

double epsilon_for(const Mbr& repository_box, int theta) {
  return (repository_box.hi[0] - repository_box.lo[0]) / std::ldexp(1.0, theta);
}

// ---------------------------------------------------------------------------

HausdorffTraversal::HausdorffTraversal(const DatasetTree& query, const DatasetTree& target)
    : query_(&query), target_(&target), metric_dims_(query.metric_dims()) {
  if (query.size() == 0 || target.size() == 0) throw Error("Hausdorff needs non-empty point sets");
  if (query.metric_dims() != target.metric_dims()) {
    throw DimensionError("query and target trees use different metric_dims");
  }
  const Ref qroot{static_cast<std::uint32_t>(query.root()), false};
  const Ref troot{static_cast<std::uint32_t>(target.root()), false};
  const double d = centre_distance(centre(query, qroot), centre(target, troot));
  const auto b = haus_bounds(d, radius(query, qroot), radius(target, troot));
  ++stats_.bound_evaluations;
  Entry root{b.ub, next_seq_++, qroot, {Candidate{b.lb, d, troot, troot.id}}};
  push(std::move(root));
}

std::span<const double> HausdorffTraversal::centre(const DatasetTree& t, Ref r) const {
  if (r.point) return t.point(r.id).first(metric_dims_);
  return t.centre(static_cast<std::int32_t>(r.id));
}

double HausdorffTraversal::radius(const DatasetTree& t, Ref r) const {
  return r.point ? 0.0 : t.radius(static_cast<std::int32_t>(r.id));
}

template <class Fn>
void HausdorffTraversal::for_each_child(const DatasetTree& t, Ref r, Fn&& fn) const {
  const TreeNode& node = t.node(static_cast<std::int32_t>(r.id));
  if (node.is_leaf()) {
    for (std::uint32_t j = node.begin; j < node.end; ++j) fn(Ref{j, true});
  } else {
    fn(Ref{static_cast<std::uint32_t>(node.left), false});
    fn(Ref{static_cast<std::uint32_t>(node.right), false});
  }
}

bool HausdorffTraversal::CandidateAfter::operator()(const Candidate& a, const Candidate& b) const {
  if (a.lb != b.lb) return a.lb > b.lb;
  if (a.ref.point != b.ref.point) return a.ref.point;
  return a.key > b.key;
}

bool HausdorffTraversal::EntryBefore::operator()(const Entry& a, const Entry& b) const {
  if (a.ub != b.ub) return a.ub < b.ub;
  return a.seq > b.seq;
}

void HausdorffTraversal::push(Entry entry) {
  queue_.push_back(std::move(entry));
  std::push_heap(queue_.begin(), queue_.end(), EntryBefore{});
}

HausdorffTraversal::Outcome HausdorffTraversal::step(std::optional<double> epsilon, double& value) {
  std::pop_heap(queue_.begin(), queue_.end(), EntryBefore{});
  Entry e = std::move(queue_.back());
  queue_.pop_back();
  ++stats_.dequeues;

  const double r_query = radius(*query_, e.ref);
  auto& cands = e.candidates;
  // Candidates admitted under an older, looser upper bound may be stale.
  while (cands.size() > 1) {
    const Candidate& head = cands.front();
    if (may_hold_nearest(head.centre_dist, r_query, radius(*target_, head.ref), e.ub)) break;
    std::pop_heap(cands.begin(), cands.end(), CandidateAfter{});
    cands.pop_back();
  }
  const Candidate head = cands.front();
  const double r_head = radius(*target_, head.ref);

  if (epsilon && r_query < *epsilon && r_head < *epsilon) {
    value = head.centre_dist;
    return Outcome::Approximated;
  }
  if (e.ref.point && head.ref.point) {
    resolved_.push_back({query_->source_index(e.ref.id), target_->source_index(head.ref.id),
                         head.ref.id, head.centre_dist});
    value = head.centre_dist;
    return Outcome::Resolved;
  }

  const auto q_centre = centre(*query_, e.ref);
  if (!head.ref.point && (e.ref.point || r_head > r_query)) {
    // Refine the target side: replace the head by its children.
    std::pop_heap(cands.begin(), cands.end(), CandidateAfter{});
    cands.pop_back();
    std::vector<Candidate> fresh;
    for_each_child(*target_, head.ref, [&](Ref c) {
      const double d = centre_distance(q_centre, centre(*target_, c));
      const double rc = radius(*target_, c);
      const auto b = haus_bounds(d, r_query, rc);
      ++stats_.bound_evaluations;
      e.ub = std::min(e.ub, b.ub);
      fresh.push_back({b.lb, d, c, c.point ? target_->source_index(c.id) : c.id});
    });
    for (const auto& c : fresh) {
      if (may_hold_nearest(c.centre_dist, r_query, radius(*target_, c.ref), e.ub)) {
        cands.push_back(c);
        std::push_heap(cands.begin(), cands.end(), CandidateAfter{});
      }
    }
    push(std::move(e));
    return Outcome::Continue;
  }

  // Refine the query side: each child inherits the candidate list.
  for_each_child(*query_, e.ref, [&](Ref qc) {
    const auto qc_centre = centre(*query_, qc);
    const double r_qc = radius(*query_, qc);
    Entry child{std::numeric_limits<double>::infinity(), next_seq_++, qc, {}};
    child.candidates.reserve(cands.size());
    for (const auto& c : cands) {
      const double d = centre_distance(qc_centre, centre(*target_, c.ref));
      const auto b = haus_bounds(d, r_qc, radius(*target_, c.ref));
      ++stats_.bound_evaluations;
      child.ub = std::min(child.ub, b.ub);
      child.candidates.push_back({b.lb, d, c.ref, c.key});
    }
    std::erase_if(child.candidates, [&](const Candidate& c) {
      return !may_hold_nearest(c.centre_dist, r_qc, radius(*target_, c.ref), child.ub);
    });
    std::make_heap(child.candidates.begin(), child.candidates.end(), CandidateAfter{});
    push(std::move(child));
  });
  return Outcome::Continue;
}

double HausdorffTraversal::hausdorff() {
  if (hausdorff_) return *hausdorff_;
  if (consumed_) throw Error("traversal already consumed by an approximate run");
  double value = 0.0;
  while (step(std::nullopt, value) != Outcome::Resolved) {
  }
  hausdorff_ = value;
  return value;
}

double HausdorffTraversal::approximate_hausdorff(double epsilon) {
  if (!(epsilon > 0.0)) throw Error("epsilon must be positive");
  if (consumed_ || !resolved_.empty()) throw Error("traversal already advanced");
  consumed_ = true;
  double value = 0.0;
  while (step(epsilon, value) != Outcome::Approximated) {
  }
  return value;
}

std::vector<NearestPoint> HausdorffTraversal::nearest_neighbours() {
  if (consumed_) throw Error("traversal already consumed by an approximate run");
  double value = 0.0;
  while (!queue_.empty()) {
    if (step(std::nullopt, value) == Outcome::Resolved && !hausdorff_) hausdorff_ = value;
  }
  std::sort(resolved_.begin(), resolved_.end(),
            [](const NearestPoint& a, const NearestPoint& b) { return a.query < b.query; });
  return resolved_;
}

double haus_exact(const DatasetTree& query, const DatasetTree& target, TraversalStats* stats) {
  HausdorffTraversal t(query, target);
  const double h = t.hausdorff();
  if (stats) *stats = t.stats();
  return h;
}

double haus_approx(const DatasetTree& query, const DatasetTree& target, double epsilon,
                   TraversalStats* stats) {
  HausdorffTraversal t(query, target);
  const double h = t.approximate_hausdorff(epsilon);
  if (stats) *stats = t.stats();
  return h;
}

double haus_symmetric(const DatasetTree& a, const DatasetTree& b) {
  return std::max(haus_exact(a, b), haus_exact(b, a));
}

}  // namespace spadas
