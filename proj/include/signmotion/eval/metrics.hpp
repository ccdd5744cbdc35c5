#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace signmotion {

using FeatureSet = std::vector<Eigen::VectorXd>;

// Frechet distance between Gaussian fits (covariances with 1/(n-1)).
double fid(const FeatureSet& a, const FeatureSet& b);
double fid_from_moments(const Eigen::VectorXd& mu1, const Eigen::MatrixXd& sigma1, const Eigen::VectorXd& mu2,
                        const Eigen::MatrixXd& sigma2);

// Two index sequences of equal length into a pool.
struct SubsetPair {
    std::vector<std::size_t> first, second;
    bool with_replacement = false;
};

// Pools of at most kEnumerablePool items use permutation rank
// (seed * (2^61 - 1)) mod n!, so seeds 0..n!-1 visit every permutation once;
// the subsets are its first S and next S entries.  Larger pools use a partial
// Fisher-Yates shuffle.  Pools smaller than 2S are drawn with replacement.
inline constexpr std::size_t kEnumerablePool = 20;
SubsetPair sample_subset_pair(std::size_t pool, int size, std::uint64_t seed);
std::vector<std::size_t> unrank_permutation(std::size_t n, std::uint64_t rank);

// Mean Euclidean distance between paired entries.
double mean_pair_distance(const FeatureSet& features, const SubsetPair& pair);

struct SampledMetric {
    double value = 0.0;
    bool with_replacement = false;
};

SampledMetric diversity(const FeatureSet& features, int subset_size, std::uint64_t seed);

// The first `words` classes in lexicographic order, word c drawn with seed + c.
SampledMetric multimodality(const std::map<std::string, FeatureSet>& by_word, int words, int subset_size,
                            std::uint64_t seed);

}  // namespace signmotion
