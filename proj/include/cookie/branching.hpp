#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cookie/environment.hpp"
#include "cookie/field.hpp"
#include "cookie/stats.hpp"
#include "cookie/walk.hpp"

namespace cookie
{

enum class ProcessKind
{
    W,        //!< right forward: successes before the k-th failure
    Z,        //!< left forward: failures before the k-th success
    V,        //!< backward: failures before the (k+1)-th success
    ZAfterV,  //!< left forward process started from V_n
};

char const* to_string(ProcessKind kind) noexcept;

enum class Sampling
{
    shared_bits,  //!< read B_{x,j} from the field (pathwise couplings)
    fast,         //!< same law, cookie trials then NegBin(r, 1/2) continuation
};

//---------------------------------------------------------------------------//
/*!
 * Offspring rule for one generation: run Bernoulli trials until `needed`
 * stopping outcomes have occurred and count the other outcome.
 */
struct OffspringRule
{
    bool stop_on_success = true;
    std::int64_t needed = 0;
};

OffspringRule offspring_rule(ProcessKind kind, std::int64_t current) noexcept;

//! Next generation from the bits B_{site,1}, B_{site,2}, ...
std::int64_t offspring_from_bits(CookieStack const& stack,
                                 RandomField const& field, std::int64_t site,
                                 OffspringRule rule);

//! Next generation drawn from an engine with the same law as the bit version.
std::int64_t offspring_fast(CookieStack const& stack, OffspringRule rule,
                            CounterEngine& engine);

//! Failures before the r-th success of fair coin flips.
std::int64_t fair_negative_binomial(std::int64_t r, CounterEngine& engine);

//---------------------------------------------------------------------------//
/*!
 * Generations of one branching process.
 *
 * W and Z are absorbing at 0: traces stop at the first 0 (which is stored).
 */
struct BranchingTrace
{
    ProcessKind kind = ProcessKind::Z;
    std::vector<std::int64_t> generations;
    bool budget_exceeded = false;

    //! sigma_x: first index with generation <= level, or -1.
    std::int64_t sigma(std::int64_t level) const noexcept;
    //! tau_x: first index with generation >= level, or -1.
    std::int64_t tau(std::int64_t level) const noexcept;
    //! Sum of all stored generations.
    std::int64_t progeny() const noexcept;
    bool died() const noexcept
    {
        return !generations.empty() && generations.back() == 0;
    }
};

/*!
 * Single-step sampler for one process law, reading either the shared field or
 * a per-replica engine.
 */
class OffspringSampler
{
  public:
    OffspringSampler(EnvironmentModel const& model, RandomField const& field,
                     Sampling sampling);

    //! Next generation from `current` using the trials at `site`.
    std::int64_t next(ProcessKind kind, std::int64_t current, std::int64_t site);

  private:
    EnvironmentModel const& model_;
    RandomField field_;
    Sampling sampling_;
    CounterEngine engine_;
};

//! W from w0 until absorption or `budget` generations (site i feeds W_i).
BranchingTrace run_W(EnvironmentModel const& model, RandomField const& field,
                     std::int64_t w0, std::int64_t budget,
                     Sampling sampling = Sampling::shared_bits);

//! Z from z0 until absorption or `budget` generations (site -i feeds Z_i).
BranchingTrace run_Z(EnvironmentModel const& model, RandomField const& field,
                     std::int64_t z0, std::int64_t budget,
                     Sampling sampling = Sampling::shared_bits);

//! V from v0 for exactly `generations` steps (site i feeds V_{i+1}).
BranchingTrace run_V(EnvironmentModel const& model, RandomField const& field,
                     std::int64_t v0, std::int64_t generations,
                     Sampling sampling = Sampling::shared_bits);

struct ConditionedTrace
{
    BranchingTrace trace;
    std::int64_t rejections = 0;
    bool accepted = false;
};

/*!
 * W conditioned on sigma_0 < budget, by rejection over replica fields
 * field.replica(0), field.replica(1), ...
 *
 * An attempt is rejected when it survives `budget` generations or, when
 * escape_level > 0, as soon as it reaches escape_level.
 */
ConditionedTrace run_W_conditioned_to_die(EnvironmentModel const& model,
                                          RandomField const& field,
                                          std::int64_t w0, std::int64_t budget,
                                          std::int64_t max_restarts,
                                          std::int64_t escape_level = 0,
                                          Sampling sampling = Sampling::fast);

//---------------------------------------------------------------------------//
// Pathwise identities against the walk
//---------------------------------------------------------------------------//

struct IdentityCheck
{
    bool pass = true;
    std::int64_t mismatch_site = 0;
    std::string detail;
};

struct Reconstruction
{
    BranchingTrace w;
    BranchingTrace z;
    IdentityCheck check;
};

/*!
 * Rebuild W and Z from the bits behind a walk stopped at rho_n and compare
 * W_i = U_i and Z_i = D_{-i} over the visited range, with W_0 = R_n and
 * Z_0 = n - R_n. Also checks the local-time and range identities.
 */
Reconstruction reconstruct_from_walk(EnvironmentModel const& model,
                                     WalkRecord const& record,
                                     RandomField const& field, std::int64_t n);

/*!
 * Recompute every D_x^{T_n} from the bits by the backward recursion (with the
 * extra immigrant for 0 <= x < n, without it for x < 0) and compare with the
 * walk's down-counts.
 */
IdentityCheck verify_backward_recursion(EnvironmentModel const& model,
                                        WalkRecord const& record,
                                        RandomField const& field,
                                        std::int64_t n);

struct CoupledTail
{
    BranchingTrace v;        //!< V_0 .. V_{n + tail}; V_g reads site n - g
    BranchingTrace z_after;  //!< Z^{(n)}_0 = V_n, reading sites -1, -2, ...
    bool dominated = true;   //!< Z^{(n)}_i <= V_{n+i} for all stored i
    std::int64_t violation_index = -1;
    //! n + 2 sum_{i<=n} V_i + 2 sum_{i>=1} Z^{(n)}_i, or -1 if Z^{(n)} survived
    std::int64_t hitting_time = -1;
};

CoupledTail coupled_tail(EnvironmentModel const& model, RandomField const& field,
                         std::int64_t n, std::int64_t tail_budget);

struct MonotonePair
{
    BranchingTrace lower;
    BranchingTrace upper;
    bool ordered = true;
};

//! Two Z processes from z <= z' on shared bits.
MonotonePair monotone_pair(EnvironmentModel const& model,
                           RandomField const& field, std::int64_t z,
                           std::int64_t z_upper, std::int64_t generations);

//---------------------------------------------------------------------------//
// Regeneration structure of V
//---------------------------------------------------------------------------//

struct RegenerationSummary
{
    std::vector<std::int64_t> cycle_lengths;  //!< r_1 samples
    std::vector<std::int64_t> progenies;      //!< S_1 samples
    std::vector<std::int64_t> max_within_cycle;
    MeanEstimate r_bar;
    std::int64_t budget_exceeded = 0;
};

/*!
 * I.i.d. excursions of V from 0. Cycle c draws from its own engine, so the
 * summary is independent of the worker count.
 */
RegenerationSummary regeneration_sampler(EnvironmentModel const& model,
                                         RandomField const& field,
                                         std::int64_t cycles,
                                         unsigned workers = 1,
                                         std::int64_t cycle_budget = 100'000'000);

//! Empirical P(X > t) for each threshold, as tail points with Wilson CIs.
std::vector<TailPoint> empirical_tail(std::vector<std::int64_t> const& samples,
                                      std::vector<double> const& thresholds);

//---------------------------------------------------------------------------//
// Hitting profiles of Z
//---------------------------------------------------------------------------//

struct HittingProfile
{
    std::int64_t m = 0;
    std::int64_t ell = 0;
    //! estimates[j] = P_Z^{2^m}(sigma_{2^ell} > tau_{2^{m+j}})
    std::vector<ProportionEstimate> estimates;
    std::int64_t replicas = 0;

    //! P(u) / P(u + 1), compared against 2^{delta + 1}.
    std::vector<double> ratios() const;
};

/*!
 * Run Z from 2^m until it drops to 2^ell or reaches 2^u_max; one run answers
 * every u in [m, u_max].
 */
HittingProfile hitting_profile_Z(EnvironmentModel const& model,
                                 RandomField const& field, std::int64_t m,
                                 std::int64_t ell, std::int64_t u_max,
                                 std::int64_t replicas, unsigned workers = 1);

//! Empirical P_Z^z(sum_i Z_i > threshold).
ProportionEstimate z_progeny_tail(EnvironmentModel const& model,
                                  RandomField const& field, std::int64_t z,
                                  std::int64_t threshold, std::int64_t replicas,
                                  unsigned workers = 1);

//! Estimate of P(T_level > n) from V and Z^{(level)} (fast sampling).
ProportionEstimate hitting_time_tail_via_branching(
    EnvironmentModel const& model, RandomField const& field, std::int64_t level,
    std::int64_t n, std::int64_t replicas, unsigned workers = 1);

}  // namespace cookie
