#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>

#include "sidekick/candgen.hpp"
#include "sidekick/model.hpp"
#include "sidekick/solution.hpp"

namespace sidekick {

/// Raised when the oracle refuses an instance (size cap or enumeration limit).
class OracleRefused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kOracleMaxCustomers = 8;
inline constexpr int kOracleMaxCustomersVrpd = 7;

struct OracleLimits {
  std::optional<std::int64_t> max_plans;  // refuse once exceeded
  std::optional<double> time_limit;       // seconds, refuse once exceeded
  bool naive = false;                     // disable branch-and-bound pruning
  // Restrict launch/retrieval sites to each customer's candidate pool.
  const CandidateGraph* pool = nullptr;
};

struct OracleResult {
  double optimum = 0.0;
  StructuredSolution plan;
  std::int64_t enumerated = 0;
  double wall_time = 0.0;
};

/// Exhaustive search over drone sets, truck orders (with route splits for
/// VRP-D) and sortie placements between truck stops and the depot. Plans
/// are scored with the eval module; the minimum feasible plan is returned.
/// Launches sharing a stop are ordered by customer id.
OracleResult brute_force(const DistanceModel& dm, const VariantConfig& config, const CustomerTable& customers,
                         const OracleLimits& limits = {});

/// Second, from-scratch schedule simulation returning the objective of a
/// plan (makespan minutes or cost).
double evaluate_plan_independent(const StructuredSolution& plan, const DistanceModel& dm,
                                 const VariantConfig& config, const CustomerTable& customers);

}  // namespace sidekick
