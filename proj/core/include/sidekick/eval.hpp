#pragma once

#include <string_view>

#include "sidekick/candgen.hpp"
#include "sidekick/codec.hpp"
#include "sidekick/model.hpp"
#include "sidekick/solution.hpp"

namespace sidekick {

struct SortieCheck {
  bool ok = true;
  Violation reason = Violation::kMalformedSortie;  // meaningful when !ok
};

/// Static checks of a sortie <i, j, k> given by locations i, k and customer j:
/// distinct endpoints, loop policy, eligibility and endurance
/// D_L + D_R + Serv_D + t'(i,j) + t'(j,k) <= e (skipped when e is unbounded).
SortieCheck sortie_feasible(int launch_location, int customer, int retrieval_location, const DistanceModel& dm,
                            const VariantConfig& config, const CustomerTable& customers);

/// Truck and drone timeline of a plan, in ticks. Retrievals at a stop are
/// processed in drone-arrival order, then truck service, then launches.
void simulate_schedule(const StructuredSolution& plan, const DistanceModel& dm, const VariantConfig& config,
                       const CustomerTable& customers, Schedule& out);
Schedule simulate_schedule(const StructuredSolution& plan, const DistanceModel& dm, const VariantConfig& config,
                           const CustomerTable& customers);

/// Operational cost in exact arithmetic. Route duration runs from depot
/// departure to depot return and includes waiting.
double cost_objective(const StructuredSolution& plan, const Schedule& schedule, const DistanceModel& dm,
                      const VariantConfig& config, const CustomerTable& customers);

/// Simulates, checks every constraint and fills plan.schedule, plan.objective
/// and plan.report.
const PenaltyReport& evaluate_plan(StructuredSolution& plan, const DistanceModel& dm, const VariantConfig& config,
                                   const CustomerTable& customers);

/// Reusable decode + evaluate pipeline for one graph. Not thread-safe; use
/// one per thread.
class TourEvaluator {
 public:
  TourEvaluator(const CandidateGraph& graph, const DistanceModel& dm, const VariantConfig& config,
                CustomerTable customers);

  const PenaltyReport& evaluate(const GiantTour& tour);
  /// The plan decoded by the last evaluate() call.
  const StructuredSolution& solution() const { return plan_; }

  const CandidateGraph& graph() const { return *graph_; }
  const DistanceModel& distances() const { return *dm_; }
  const VariantConfig& config() const { return *config_; }
  const CustomerTable& customers() const { return customers_; }
  int trucks() const { return trucks_; }

 private:
  const CandidateGraph* graph_;
  const DistanceModel* dm_;
  const VariantConfig* config_;
  CustomerTable customers_;
  int trucks_;
  Decoder decoder_;
  StructuredSolution plan_;
};

PenaltyReport penalty(const GiantTour& tour, const CandidateGraph& graph, const DistanceModel& dm,
                      const VariantConfig& config, const CustomerTable& customers);

}  // namespace sidekick
