#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace cookie
{

//! Dense table over a contiguous, two-sided growing range of sites.
template<class T>
class SiteVector
{
  public:
    SiteVector() = default;

    //! Entry for `site`, growing the range (zero-filled) when needed.
    T& operator[](std::int64_t site)
    {
        if (data_.empty())
        {
            data_.assign(16, T{});
            origin_ = 8 - site;
        }
        auto idx = site + origin_;
        if (idx < 0)
        {
            auto extra = std::max<std::int64_t>(-idx, std::ssize(data_));
            data_.insert(data_.begin(), static_cast<std::size_t>(extra), T{});
            origin_ += extra;
            idx += extra;
        }
        else if (idx >= std::ssize(data_))
        {
            auto need = idx + 1 - std::ssize(data_);
            data_.resize(data_.size()
                             + static_cast<std::size_t>(
                                 std::max<std::int64_t>(need, std::ssize(data_))),
                         T{});
        }
        return data_[static_cast<std::size_t>(idx)];
    }

    //! Entry for `site`, or a default value outside the stored range.
    T get(std::int64_t site) const noexcept
    {
        auto idx = site + origin_;
        if (idx < 0 || idx >= std::ssize(data_))
            return T{};
        return data_[static_cast<std::size_t>(idx)];
    }

  private:
    std::vector<T> data_;
    std::int64_t origin_ = 0;
};

}  // namespace cookie
