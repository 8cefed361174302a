#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace cookie
{

//! SplitMix64 finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

//! FNV-1a over the label bytes; labels are ASCII so endianness never enters.
constexpr std::uint64_t label_hash(std::string_view label) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : label)
    {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

//! Map the top 53 bits of a word onto [0, 1).
constexpr double to_unit(std::uint64_t bits) noexcept
{
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

//! Map the top 52 bits onto the open interval (0, 1); 53 would round up to 1.
constexpr double to_open_unit(std::uint64_t bits) noexcept
{
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

//---------------------------------------------------------------------------//
/*!
 * Counter-based engine over one fixed address.
 *
 * Satisfies UniformRandomBitGenerator so it can drive standard distributions.
 * Output k is mix64 applied to (key, k); two engines with different keys never
 * share state.
 */
class CounterEngine
{
  public:
    using result_type = std::uint64_t;

    constexpr explicit CounterEngine(std::uint64_t key) noexcept : key_(key) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept
    {
        return std::numeric_limits<result_type>::max();
    }

    constexpr result_type operator()() noexcept
    {
        return mix64(key_ ^ mix64(++counter_ * 0x9e3779b97f4a7c15ull));
    }

    double uniform() noexcept { return to_unit((*this)()); }
    bool bernoulli(double p) noexcept { return uniform() < p; }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

//---------------------------------------------------------------------------//
/*!
 * One labelled stream of the field with its key precomputed.
 *
 * The value at (site, index) is
 *   mix64(mix64(key ^ site * G) ^ index * H)
 * with G, H odd 64-bit constants and all arithmetic modulo 2^64, so results are
 * identical on every platform.
 */
class Stream
{
  public:
    constexpr Stream(std::uint64_t master_seed, std::string_view label) noexcept
        : key_(mix64(master_seed + 0x9e3779b97f4a7c15ull)
               ^ mix64(label_hash(label)))
    {
    }

    constexpr std::uint64_t bits_at(std::int64_t site,
                                    std::uint64_t index) const noexcept
    {
        std::uint64_t x
            = mix64(key_ ^ (static_cast<std::uint64_t>(site) * kSiteMul));
        return mix64(x ^ (index * kIndexMul));
    }

    double uniform_at(std::int64_t site, std::uint64_t index) const noexcept
    {
        return to_unit(bits_at(site, index));
    }

    //! Engine private to one address, for samplers needing many draws.
    CounterEngine engine(std::int64_t site, std::uint64_t index) const noexcept
    {
        return CounterEngine(bits_at(site, index));
    }

  private:
    static constexpr std::uint64_t kSiteMul = 0x9e3779b97f4a7c15ull;
    static constexpr std::uint64_t kIndexMul = 0xc2b2ae3d27d4eb4full;

    std::uint64_t key_;
};

//---------------------------------------------------------------------------//
/*!
 * Lazily evaluated i.i.d. uniform field addressed by (label, site, index).
 *
 * Pure function of the master seed: no state, safe for concurrent use. The
 * Bernoulli family B_{x,j} lives on the "walk" stream, so the walk and every
 * branching process built from the same field read identical bits.
 */
class RandomField
{
  public:
    explicit RandomField(std::uint64_t master_seed) noexcept
        : seed_(master_seed), walk_(master_seed, "walk")
    {
    }

    std::uint64_t seed() const noexcept { return seed_; }

    Stream stream(std::string_view label) const noexcept
    {
        return Stream(seed_, label);
    }

    double uniform_at(std::string_view label, std::int64_t site,
                      std::uint64_t index) const noexcept
    {
        return Stream(seed_, label).uniform_at(site, index);
    }

    //! B_{site,visit}: 1 iff uniform_at("walk", site, visit) < p.
    bool bernoulli_at(std::int64_t site, std::uint64_t visit,
                      double p) const noexcept
    {
        return walk_.uniform_at(site, visit) < p;
    }

    //! Seed of replica `id`; a pure function of (master seed, id).
    std::uint64_t replica_seed(std::uint64_t id) const noexcept
    {
        return Stream(seed_, "replica").bits_at(0, id);
    }

    RandomField replica(std::uint64_t id) const noexcept
    {
        return RandomField(replica_seed(id));
    }

  private:
    std::uint64_t seed_;
    Stream walk_;
};

}  // namespace cookie
