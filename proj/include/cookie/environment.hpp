#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cookie/field.hpp"

namespace cookie
{

//! Right-step probabilities for the first M visits to one site.
struct CookieStack
{
    std::vector<double> probs;

    //! omega(x, visit); 1/2 once the stack is exhausted.
    double at(std::uint64_t visit) const noexcept
    {
        return visit <= probs.size() ? probs[visit - 1] : 0.5;
    }

    std::size_t size() const noexcept { return probs.size(); }

    //! Sum over cookies of (2 omega - 1).
    double drift() const noexcept;
};

struct AssumptionReport
{
    bool bounded_cookies = true;
    bool iid_sites = true;
    bool nondegenerate = false;
    double mean_prod_right = 0;  //!< E[prod omega(0,j)]
    double mean_prod_left = 0;   //!< E[prod (1 - omega(0,j))]
    double delta = 0;
    bool transient_right = false;  //!< delta > 1

    bool all_pass() const noexcept
    {
        return bounded_cookies && iid_sites && nondegenerate;
    }
};

//---------------------------------------------------------------------------//
/*!
 * Law of an i.i.d. cookie environment with M cookies per site.
 *
 * Either one deterministic stack or a finite mixture of stacks. Stacks shorter
 * than M are padded with 1/2.
 */
class EnvironmentModel
{
  public:
    static EnvironmentModel deterministic(std::vector<double> probs,
                                          std::string name = {});
    static EnvironmentModel mixture(std::vector<std::vector<double>> stacks,
                                    std::vector<double> weights,
                                    std::string name = {});
    //! Every cookie equal to p; M = cookies.
    static EnvironmentModel homogeneous(double p, std::size_t cookies,
                                        std::string name = {});

    std::size_t cookies() const noexcept { return cookies_; }
    std::size_t components() const noexcept { return stacks_.size(); }
    bool is_deterministic() const noexcept { return stacks_.size() == 1; }
    std::vector<CookieStack> const& stacks() const noexcept { return stacks_; }
    std::vector<double> const& weights() const noexcept { return weights_; }
    std::string const& name() const noexcept { return name_; }

    double delta() const noexcept;
    AssumptionReport validate() const noexcept;

    //! Mixture component of `site`, read from the "env" stream.
    std::size_t component_at(std::int64_t site,
                             RandomField const& field) const noexcept;
    //! Component selected by a uniform variate.
    std::size_t component_for(double u) const noexcept;

    CookieStack const& sample_stack(std::int64_t site,
                                    RandomField const& field) const noexcept
    {
        return stacks_[component_at(site, field)];
    }

    //! One-line description used in output headers.
    std::string describe() const;

  private:
    EnvironmentModel(std::vector<CookieStack> stacks,
                     std::vector<double> weights, std::string name);

    std::vector<CookieStack> stacks_;
    std::vector<double> weights_;
    std::vector<double> cumulative_;
    std::size_t cookies_ = 0;
    std::string name_;
};

}  // namespace cookie
