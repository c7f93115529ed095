#include "qcsa/subsets.hpp"

#include <random>
#include <set>
#include <string>

#include "qcsa/error.hpp"

namespace qcsa {
namespace {

// Pascal table pascal[c][i] = C(c, i) for c <= K, i <= k.
std::vector<std::vector<BigInt>> pascal_table(int K, int k) {
  std::vector<std::vector<BigInt>> t(static_cast<std::size_t>(K) + 1, std::vector<BigInt>(static_cast<std::size_t>(k) + 1));
  for (int c = 0; c <= K; ++c) {
    t[c][0] = 1;
    for (int i = 1; i <= k; ++i) t[c][i] = c == 0 ? BigInt(0) : t[c - 1][i - 1] + t[c - 1][i];
  }
  return t;
}

SubsetModel unrank_with(const std::vector<std::vector<BigInt>>& t, int K, int k, BigInt rank) {
  SubsetModel s;
  s.k = k;
  s.members.assign(static_cast<std::size_t>(k), 0);
  int c = K - 1;
  for (int i = k; i >= 1; --i) {
    while (t[c][i] > rank) --c;
    s.members[static_cast<std::size_t>(i - 1)] = c;
    rank -= t[c][i];
    --c;
  }
  return s;
}

void check_sizes(int K, int k) {
  if (K < 0 || k < 0 || k > K) {
    throw InvalidParameter("need 0 <= k <= K, got K=" + std::to_string(K) + ", k=" + std::to_string(k));
  }
}

}  // namespace

BigInt count_combinations(int K, int k) {
  check_sizes(K, k);
  if (k > K - k) k = K - k;
  BigInt c = 1;
  for (int i = 0; i < k; ++i) {
    c *= (K - i);
    c /= (i + 1);
  }
  return c;
}

SubsetModel unrank_combination(int K, int k, const BigInt& rank) {
  check_sizes(K, k);
  const BigInt total = count_combinations(K, k);
  if (rank < 0 || rank >= total) throw InvalidParameter("combination rank out of range");
  return unrank_with(pascal_table(K, k), K, k, rank);
}

BigInt rank_combination(const SubsetModel& subset) {
  BigInt r = 0;
  for (std::size_t i = 0; i < subset.members.size(); ++i) {
    const int c = subset.members[i];
    const int idx = static_cast<int>(i) + 1;
    if (c >= idx) r += count_combinations(c, idx);
  }
  return r;
}

SubsetPlan sample_subsets(int K, int k, std::size_t cap, std::uint64_t seed) {
  if (k < 1 || k > K) throw InvalidParameter("need 1 <= k <= K, got K=" + std::to_string(K) + ", k=" + std::to_string(k));
  if (cap < 1) throw InvalidParameter("subset cap must be at least 1");

  SubsetPlan plan;
  plan.K = K;
  plan.k = k;
  plan.seed = seed;
  plan.total = count_combinations(K, k);
  const auto table = pascal_table(K, k);

  if (plan.total <= cap) {
    const auto m = plan.total.convert_to<std::size_t>();
    plan.selected.reserve(m);
    for (std::size_t r = 0; r < m; ++r) plan.selected.push_back(unrank_with(table, K, k, BigInt(r)));
    return plan;
  }

  plan.capped = true;
  std::mt19937_64 rng(seed);
  std::set<BigInt> ranks;
  while (ranks.size() < cap) ranks.insert(uniform_below(plan.total, rng));
  plan.selected.reserve(cap);
  for (const BigInt& r : ranks) plan.selected.push_back(unrank_with(table, K, k, r));
  return plan;
}

}  // namespace qcsa
