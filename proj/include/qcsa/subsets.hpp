#pragma once

#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace qcsa {

using BigInt = boost::multiprecision::cpp_int;

/// One averaging unit: `k` distinct column positions, strictly increasing.
struct SubsetModel {
  int k = 0;
  std::vector<int> members;

  friend bool operator==(const SubsetModel&, const SubsetModel&) = default;
};

/// The size-k subsets of K columns used by one CSA fit, in colexicographic order.
struct SubsetPlan {
  int K = 0;
  int k = 0;
  BigInt total;   // C(K, k)
  std::vector<SubsetModel> selected;
  bool capped = false;  // true iff total > cap, in which case `selected` is a uniform sample
  std::uint64_t seed = 0;

  friend bool operator==(const SubsetPlan&, const SubsetPlan&) = default;
};

/// Exact binomial coefficient C(K, k).
BigInt count_combinations(int K, int k);

/// Subset with colexicographic rank `rank`: the unique members c_1 < ... < c_k
/// with rank = sum_i C(c_i, i). Rank 0 is {0, ..., k-1}; rank C(K,k)-1 is
/// {K-k, ..., K-1}.
SubsetModel unrank_combination(int K, int k, const BigInt& rank);

/// Inverse of unrank_combination.
BigInt rank_combination(const SubsetModel& subset);

/// Full enumeration when C(K,k) <= cap, otherwise `cap` distinct subsets drawn
/// uniformly without replacement (rejection on uniform ranks). The result is
/// sorted by rank and depends only on (K, k, cap, seed).
SubsetPlan sample_subsets(int K, int k, std::size_t cap, std::uint64_t seed);

/// Uniform integer in [0, bound) from a 64-bit engine, exact for any bound.
template <class Engine>
BigInt uniform_below(const BigInt& bound, Engine& rng) {
  const unsigned bits = boost::multiprecision::msb(bound) + 1;
  for (;;) {
    BigInt v = 0;
    unsigned have = 0;
    while (have < bits) {
      v <<= 64;
      v |= BigInt(static_cast<std::uint64_t>(rng()));
      have += 64;
    }
    v >>= (have - bits);
    if (v < bound) return v;
  }
}

}  // namespace qcsa
