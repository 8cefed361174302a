#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cookie/environment.hpp"
#include "cookie/field.hpp"

namespace cookie
{

struct IdentitySuiteParams
{
    std::int64_t returns = 10;          //!< k for the rho_k reconstruction
    std::int64_t return_budget = 100'000;
    std::int64_t hitting_level = 20;    //!< n for the backward recursion
    std::int64_t hitting_budget = 10'000'000;
    std::int64_t coupled_level = 50;    //!< n for the Z^{(n)} <= V coupling
    std::int64_t coupled_budget = 10'000'000;
    std::int64_t monotone_low = 1;
    std::int64_t monotone_high = 2;
    std::int64_t monotone_generations = 100'000;
};

//! Defaults used for a model: small levels when delta <= 1, larger otherwise.
IdentitySuiteParams default_identity_params(EnvironmentModel const& model);

struct IdentityTally
{
    std::string name;
    std::int64_t checked = 0;
    std::int64_t skipped = 0;     //!< budget exhausted before the check applied
    std::int64_t violations = 0;
    std::int64_t first_violation = -1;  //!< replica index
    std::string detail;
};

struct IdentitySuiteResult
{
    std::vector<IdentityTally> tallies;
    std::int64_t violations() const noexcept;
};

/*!
 * Every pathwise identity on replicas field.replica(0 .. seeds-1):
 * reconstruction at rho_k, the backward recursion at T_n, the coupling
 * Z^{(n)} <= V with T_n = n + 2 sum V + 2 sum Z^{(n)} against the walk, and the
 * monotone Z coupling.
 */
IdentitySuiteResult identity_suite(EnvironmentModel const& model,
                                   RandomField const& field, std::int64_t seeds,
                                   IdentitySuiteParams const& params,
                                   unsigned workers = 1);

}  // namespace cookie
