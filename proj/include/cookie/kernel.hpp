#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <shared_mutex>
#include <vector>

#include "cookie/branching.hpp"
#include "cookie/environment.hpp"

namespace cookie
{

//! Truncated law on 0..trunc plus the exact mass beyond it.
struct KernelDistribution
{
    std::vector<double> mass;
    double lost_mass = 0;

    std::int64_t trunc() const noexcept
    {
        return static_cast<std::int64_t>(mass.size()) - 1;
    }
    double total() const noexcept;
    double mean() const noexcept;
};

struct KernelOptions
{
    std::int64_t trunc = 0;  //!< 0 picks a starting size from k
    double max_lost = 1e-12;
    std::int64_t trunc_cap = std::int64_t{1} << 22;
    bool auto_grow = true;
};

/*!
 * Exact law of the next generation given the current size k.
 *
 * Dynamic program over the first M trials of every mixture stack, then the
 * NegBin(r, 1/2) continuation for the r stopping outcomes still needed.
 * lost_mass is computed from the NegBin tail directly (not as 1 - sum), so
 * sum + lost_mass = 1 is a real conservation check. With auto_grow the
 * truncation doubles until lost_mass < max_lost; throws std::runtime_error at
 * trunc_cap.
 */
KernelDistribution exact_kernel(EnvironmentModel const& model, ProcessKind kind,
                                std::int64_t k, KernelOptions const& options = {});

//! Memoized exact kernels at one fixed truncation; safe for concurrent reads.
class KernelCache
{
  public:
    KernelCache(EnvironmentModel const& model, ProcessKind kind,
                std::int64_t trunc);

    std::shared_ptr<KernelDistribution const> get(std::int64_t k);
    std::int64_t trunc() const noexcept { return trunc_; }

  private:
    EnvironmentModel const& model_;
    ProcessKind kind_;
    std::int64_t trunc_;
    std::shared_mutex mutex_;
    std::map<std::int64_t, std::shared_ptr<KernelDistribution const>> cache_;
};

struct NStepOptions
{
    std::int64_t trunc = 0;  //!< 0 picks a starting size
    double max_lost = 1e-12;
    std::int64_t trunc_cap = 1 << 14;
};

/*!
 * Exact law of generation n from `start`, iterating the kernel on 0..trunc.
 * Mass leaving the window is accumulated into lost_mass. The window doubles
 * until lost_mass < max_lost; throws std::runtime_error at trunc_cap.
 * W and Z are absorbing at 0.
 */
KernelDistribution n_step_distribution(EnvironmentModel const& model,
                                       ProcessKind kind, std::int64_t start,
                                       std::int64_t n,
                                       NStepOptions const& options = {});

//! k-fold iterate of s -> 1/(2 - s), in closed form (k - (k-1)s)/(k+1 - ks).
double phi_iterate(std::int64_t k, double s);

//! s^M (1/(n - (n-1)s))^{M+1} ((n - (n-1)s)/(n+1 - ns))^{v+1}.
double vngf_rhs(std::int64_t cookies, std::int64_t v, std::int64_t n, double s);

struct VngfCheck
{
    double lhs = 0;         //!< sum over the window of P(V_n = m) s^m
    double tail_bound = 0;  //!< certified bound on the truncated remainder
    double rhs = 0;
    bool holds = false;     //!< lhs + tail_bound <= rhs (1e-12 relative slack)
    std::int64_t trunc = 0;
};

/*!
 * Compare E_V^v[s^{V_n}] with the closed-form bound. 0^0 = 1.
 *
 * The remainder beyond the window is bounded by lost_mass * s^{trunc+1} for
 * s <= 1. For s > 1 it is bounded by (s/t)^{trunc+1} * rhs(t) with
 * t = (s + 1 + 1/n)/2, using V_n <= M + sum of V_{n-1}+1 fair geometrics,
 * which makes E[t^{V_n}] <= rhs(t) for every t >= 1. Requires
 * 0 < s < 1 + 1/n; throws std::invalid_argument otherwise.
 */
VngfCheck vngf_bound_check(EnvironmentModel const& model, std::int64_t v,
                           std::int64_t n, double s);

}  // namespace cookie
