#pragma once

#include <string>
#include <vector>

#include "sidekick/candgen.hpp"
#include "sidekick/model.hpp"
#include "sidekick/solution.hpp"

namespace sidekick {

/// Number of entries in a giant tour for this graph and fleet.
int tour_length(const CandidateGraph& graph, int trucks);

/// True for node 0 and the route separator ids.
inline bool is_depot_node(const CandidateGraph& graph, int node) {
  return node == 0 || node >= graph.size();
}

/// Throws InputError unless the tour is a permutation of 0..tour_length-1.
void check_tour(const GiantTour& tour, const CandidateGraph& graph, int trucks);

/// Rotates the tour so node 0 is first.
void root_tour(GiantTour& tour);

/// Decoding rules:
///  - routes are the segments between depot-role nodes;
///  - customer c is drone-served iff the node right before its self node is a
///    copy of color c (the launch marker); the retrieval marker is the first
///    later copy of color c in the same segment, else the depot return;
///  - unused copies are transparent;
///  - truck stops follow tour order, with equal consecutive locations merged
///    (except that a sortie never merges launch and retrieval, and a stop
///    serves at most one truck customer).
/// Total: any permutation yields a plan.
class Decoder {
 public:
  explicit Decoder(const CandidateGraph& graph, int trucks);

  /// Fills `out.routes` and `out.served_by`; schedule/report untouched.
  void decode(const GiantTour& tour, StructuredSolution& out);

 private:
  const CandidateGraph* graph_;
  int trucks_;
  std::vector<int> color_;
  std::vector<int> location_;
  std::vector<char> is_copy_;
  // scratch
  std::vector<int> self_pos_;
  std::vector<int> launch_pos_;
  std::vector<int> retrieval_pos_;
  std::vector<int> sortie_index_;
};

StructuredSolution decode(const GiantTour& tour, const CandidateGraph& graph, const VariantConfig& config);

/// Config1 (no revisit): number of distinct locations that appear in two or
/// more separate runs of any route's stops (final depot return excluded).
/// Config2: 0.
int check_revisit(const StructuredSolution& solution, RevisitPolicy policy);
int count_revisits(const TruckRoute& route);

/// Inverse of decode on plans whose launch/retrieval sites lie in each
/// customer's candidate pool. Throws InputError naming the customer
/// otherwise, or when the plan is structurally invalid.
GiantTour encode(const StructuredSolution& plan, const CandidateGraph& graph);

}  // namespace sidekick
