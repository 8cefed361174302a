#include "cookie/environment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cookie
{

double CookieStack::drift() const noexcept
{
    double total = 0;
    for (double p : probs)
        total += 2 * p - 1;
    return total;
}

EnvironmentModel::EnvironmentModel(std::vector<CookieStack> stacks,
                                   std::vector<double> weights,
                                   std::string name)
    : stacks_(std::move(stacks)), weights_(std::move(weights)),
      name_(std::move(name))
{
    if (stacks_.empty())
        throw std::invalid_argument("environment needs at least one stack");
    if (weights_.size() != stacks_.size())
        throw std::invalid_argument("one weight per stack required");
    double total = 0;
    for (double w : weights_)
    {
        if (!(w >= 0))
            throw std::invalid_argument("mixture weights must be nonnegative");
        total += w;
    }
    if (std::abs(total - 1) > 1e-12)
        throw std::invalid_argument("mixture weights must sum to 1");

    for (auto const& s : stacks_)
    {
        for (double p : s.probs)
        {
            if (!(p >= 0 && p <= 1))
                throw std::invalid_argument("cookie strengths must lie in [0,1]");
        }
        cookies_ = std::max(cookies_, s.probs.size());
    }
    if (cookies_ == 0)
        throw std::invalid_argument("M must be positive");
    for (auto& s : stacks_)
        s.probs.resize(cookies_, 0.5);

    cumulative_.resize(weights_.size());
    std::partial_sum(weights_.begin(), weights_.end(), cumulative_.begin());
    cumulative_.back() = 1.0;
}

EnvironmentModel EnvironmentModel::deterministic(std::vector<double> probs,
                                                 std::string name)
{
    return EnvironmentModel({CookieStack{std::move(probs)}}, {1.0},
                            std::move(name));
}

EnvironmentModel
EnvironmentModel::mixture(std::vector<std::vector<double>> stacks,
                          std::vector<double> weights, std::string name)
{
    std::vector<CookieStack> s;
    s.reserve(stacks.size());
    for (auto& p : stacks)
        s.push_back(CookieStack{std::move(p)});
    return EnvironmentModel(std::move(s), std::move(weights), std::move(name));
}

EnvironmentModel EnvironmentModel::homogeneous(double p, std::size_t cookies,
                                               std::string name)
{
    return deterministic(std::vector<double>(cookies, p), std::move(name));
}

double EnvironmentModel::delta() const noexcept
{
    double d = 0;
    for (std::size_t i = 0; i < stacks_.size(); ++i)
        d += weights_[i] * stacks_[i].drift();
    return d;
}

AssumptionReport EnvironmentModel::validate() const noexcept
{
    AssumptionReport r;
    for (std::size_t i = 0; i < stacks_.size(); ++i)
    {
        double right = 1, left = 1;
        for (double p : stacks_[i].probs)
        {
            right *= p;
            left *= 1 - p;
        }
        r.mean_prod_right += weights_[i] * right;
        r.mean_prod_left += weights_[i] * left;
    }
    r.nondegenerate = r.mean_prod_right > 0 && r.mean_prod_left > 0;
    r.delta = delta();
    r.transient_right = r.delta > 1;
    return r;
}

std::size_t EnvironmentModel::component_for(double u) const noexcept
{
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    auto idx = static_cast<std::size_t>(it - cumulative_.begin());
    return std::min(idx, stacks_.size() - 1);
}

std::size_t EnvironmentModel::component_at(std::int64_t site,
                                           RandomField const& field) const noexcept
{
    if (stacks_.size() == 1)
        return 0;
    return component_for(field.uniform_at("env", site, 1));
}

std::string EnvironmentModel::describe() const
{
    auto num = [](double x) {
        char buf[32];
        auto res = std::to_chars(buf, buf + sizeof buf, x);
        return std::string(buf, res.ptr);
    };
    std::string out = "name=" + (name_.empty() ? std::string("unnamed") : name_)
                      + " M=" + std::to_string(cookies_) + " stacks=[";
    for (std::size_t i = 0; i < stacks_.size(); ++i)
    {
        out += i ? ",[" : "[";
        for (std::size_t j = 0; j < stacks_[i].probs.size(); ++j)
            out += (j ? "," : "") + num(stacks_[i].probs[j]);
        out += "]";
    }
    out += "] weights=[";
    for (std::size_t i = 0; i < weights_.size(); ++i)
        out += (i ? "," : "") + num(weights_[i]);
    return out + "] delta=" + num(delta());
}

}  // namespace cookie
