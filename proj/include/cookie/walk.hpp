#pragma once

#include <cstdint>
#include <vector>

#include "cookie/environment.hpp"
#include "cookie/field.hpp"
#include "cookie/site_vector.hpp"

namespace cookie
{

//! floor(n^gamma), flagged when n^gamma is itself an integer.
struct PowerFloor
{
    std::int64_t value = 0;
    bool exact = false;
};

/*!
 * floor(n^gamma) in exact integer arithmetic when gamma is a rational p/q with
 * q <= 1000 (to 1e-12); otherwise from long double with a half-ulp guard.
 */
PowerFloor floor_power(std::int64_t n, double gamma);

enum class WalkStatus
{
    completed,
    budget_exceeded,
};

//---------------------------------------------------------------------------//
/*!
 * Path statistics of an excited random walk started at 0.
 *
 * Local times satisfy L_n(x) = U_x^n + D_x^n, so only the directional counts
 * are stored.
 */
struct WalkRecord
{
    struct SiteCounts
    {
        std::int64_t up = 0;
        std::int64_t down = 0;
        std::int32_t component = 0;  //!< cached mixture component + 1
    };

    std::int64_t steps = 0;
    std::int64_t position = 0;
    std::int64_t min_site = 0;
    std::int64_t max_site = 0;
    SiteVector<SiteCounts> counts;
    //! hitting_times[level] = T_level for every level 0..max_site reached.
    std::vector<std::int64_t> hitting_times{0};
    //! rho_1, rho_2, ...
    std::vector<std::int64_t> return_times;
    WalkStatus status = WalkStatus::completed;

    std::int64_t up(std::int64_t x) const noexcept { return counts.get(x).up; }
    std::int64_t down(std::int64_t x) const noexcept
    {
        return counts.get(x).down;
    }
    std::int64_t local_time(std::int64_t x) const noexcept
    {
        auto c = counts.get(x);
        return c.up + c.down;
    }
    //! T_level if the level was reached, else -1.
    std::int64_t hitting_time(std::int64_t level) const noexcept;
    //! R_k = U_0 at the last recorded return (number of right excursions).
    std::int64_t right_excursions() const noexcept { return up(0); }
    bool completed() const noexcept { return status == WalkStatus::completed; }
};

//---------------------------------------------------------------------------//
/*!
 * Step-by-step driver; on the j-th visit to x the step is +1 iff B_{x,j} = 1.
 */
class Walker
{
  public:
    Walker(EnvironmentModel const& model, RandomField const& field);

    //! Take one step and return the new position.
    std::int64_t step();

    WalkRecord const& record() const noexcept { return rec_; }
    WalkRecord& record() noexcept { return rec_; }

  private:
    EnvironmentModel const& model_;
    RandomField field_;
    WalkRecord rec_;
};

//! Run until T_target or until `budget` steps have been taken.
WalkRecord run_to_hitting(EnvironmentModel const& model,
                          RandomField const& field, std::int64_t target,
                          std::int64_t budget);

//! Run exactly n steps.
WalkRecord run_fixed_steps(EnvironmentModel const& model,
                           RandomField const& field, std::int64_t n);

//! Run until the k-th return to 0 (rho_k) or until the budget is exhausted.
WalkRecord returns_and_excursions(EnvironmentModel const& model,
                                  RandomField const& field, std::int64_t k,
                                  std::int64_t budget);

//! R_k = sum_{j<=k} B_{0,j}, read directly from the field.
std::int64_t right_excursion_count(EnvironmentModel const& model,
                                   RandomField const& field, std::int64_t k);

//---------------------------------------------------------------------------//
// Slowdown events {X_n < n^gamma} and {T_floor(n^gamma) > n}
//---------------------------------------------------------------------------//

struct SlowdownOutcome
{
    std::uint64_t seed = 0;
    bool event_t = false;  //!< T_level > n
    bool event_x = false;  //!< X_n < n^gamma (only when the full n steps ran)
    std::int64_t t_value = 0;  //!< T_level, or n + 1 when not hit by time n
    std::int64_t x_n = 0;
    bool ran_full = false;
};

enum class SlowdownMode
{
    both,    //!< run exactly n steps; both events decided
    t_only,  //!< stop at min(T_level, n + 1) steps
};

//! One replica; `level` = floor(n^gamma).
SlowdownOutcome slowdown_replica(EnvironmentModel const& model,
                                 RandomField const& field, std::int64_t n,
                                 PowerFloor level, SlowdownMode mode);

struct ProportionEstimate
{
    std::int64_t successes = 0;
    std::int64_t trials = 0;
    double p_hat = 0;
    double se = 0;
    double lo = 0;
    double hi = 0;
};

ProportionEstimate make_proportion(std::int64_t successes, std::int64_t trials,
                                   double z = 1.959963984540054);

struct SlowdownEstimate
{
    std::int64_t n = 0;
    double gamma = 0;
    PowerFloor level;
    std::int64_t replicas = 0;
    ProportionEstimate t_event;
    ProportionEstimate x_event;  //!< trials = 0 in t_only mode
    //! Replicas with T-event true yet X_n >= level; must be 0.
    std::int64_t contradictions = 0;
    std::vector<SlowdownOutcome> outcomes;  //!< filled when requested
};

struct SlowdownOptions
{
    SlowdownMode mode = SlowdownMode::both;
    unsigned workers = 1;
    bool keep_outcomes = false;
    std::uint64_t replica_offset = 0;
};

/*!
 * Monte Carlo estimates of P(X_n < n^gamma) and P(T_floor(n^gamma) > n).
 *
 * Replica r uses field.replica(replica_offset + r); aggregation is a fold in
 * replica order so the result is independent of the worker count.
 */
SlowdownEstimate slowdown_event_mc(EnvironmentModel const& model, double gamma,
                                   std::int64_t n, std::int64_t replicas,
                                   RandomField const& field,
                                   SlowdownOptions const& options = {});

}  // namespace cookie
