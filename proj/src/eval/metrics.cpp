#include "signmotion/eval/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "signmotion/common/error.hpp"
#include "signmotion/common/rng.hpp"

namespace signmotion {

namespace {

void moments(const FeatureSet& x, Eigen::VectorXd& mu, Eigen::MatrixXd& sigma) {
    const auto n = static_cast<Eigen::Index>(x.size());
    const Eigen::Index d = x.front().size();
    Eigen::MatrixXd m(n, d);
    for (Eigen::Index i = 0; i < n; ++i) m.row(i) = x[i].transpose();
    mu = m.colwise().mean().transpose();
    const Eigen::MatrixXd c = m.rowwise() - mu.transpose();
    sigma = (c.transpose() * c) / static_cast<double>(n - 1);
}

void check_set(const FeatureSet& x, Eigen::Index dim) {
    require(x.size() >= 2, ErrorCode::insufficient_data, "fid needs at least two feature vectors per set");
    for (const auto& v : x) {
        require(v.size() == dim, ErrorCode::shape, "fid: feature dimensions differ");
        require(v.allFinite(), ErrorCode::invalid_argument, "fid: non-finite feature");
    }
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    const Eigen::VectorXd s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double fid_from_moments(const Eigen::VectorXd& mu1, const Eigen::MatrixXd& sigma1, const Eigen::VectorXd& mu2,
                        const Eigen::MatrixXd& sigma2) {
    const Eigen::Index d = mu1.size();
    require(mu2.size() == d && sigma1.rows() == d && sigma1.cols() == d && sigma2.rows() == d && sigma2.cols() == d,
            ErrorCode::shape, "fid: moment dimensions differ");
    // Tr((S1 S2)^1/2) equals Tr((S1^1/2 S2 S1^1/2)^1/2), which is symmetric PSD.
    const Eigen::MatrixXd r1 = psd_sqrt(0.5 * (sigma1 + sigma1.transpose()));
    Eigen::MatrixXd inner = r1 * sigma2 * r1;
    inner = 0.5 * (inner + inner.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inner, Eigen::EigenvaluesOnly);
    const double tr_sqrt = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    const double value = (mu1 - mu2).squaredNorm() + sigma1.trace() + sigma2.trace() - 2.0 * tr_sqrt;
    return std::max(0.0, value);
}

double fid(const FeatureSet& a, const FeatureSet& b) {
    require(!a.empty() && !b.empty(), ErrorCode::insufficient_data, "fid needs at least two feature vectors per set");
    const Eigen::Index dim = a.front().size();
    check_set(a, dim);
    check_set(b, dim);
    if (a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin())) return 0.0;
    Eigen::VectorXd mu1, mu2;
    Eigen::MatrixXd s1, s2;
    moments(a, mu1, s1);
    moments(b, mu2, s2);
    return fid_from_moments(mu1, s1, mu2, s2);
}

std::vector<std::size_t> unrank_permutation(std::size_t n, std::uint64_t rank) {
    std::vector<std::size_t> items(n);
    std::iota(items.begin(), items.end(), std::size_t{0});
    std::vector<std::uint64_t> fact(n + 1, 1);
    for (std::size_t i = 1; i <= n; ++i) fact[i] = fact[i - 1] * i;
    std::vector<std::size_t> out;
    for (std::size_t i = n; i > 0; --i) {
        const std::uint64_t q = rank / fact[i - 1];
        rank %= fact[i - 1];
        out.push_back(items[q]);
        items.erase(items.begin() + static_cast<std::ptrdiff_t>(q));
    }
    return out;
}

SubsetPair sample_subset_pair(std::size_t pool, int size, std::uint64_t seed) {
    require(pool >= 1, ErrorCode::insufficient_data, "cannot sample subsets from an empty set");
    require(size >= 1, ErrorCode::invalid_argument, "subset size must be positive");
    const auto s = static_cast<std::size_t>(size);
    SubsetPair out;
    if (pool < 2 * s) {
        out.with_replacement = true;
        Rng rng(seed);
        for (std::size_t i = 0; i < s; ++i) out.first.push_back(rng.uniform_index(pool));
        for (std::size_t i = 0; i < s; ++i) out.second.push_back(rng.uniform_index(pool));
        return out;
    }
    std::vector<std::size_t> perm;
    if (pool <= kEnumerablePool) {
        std::uint64_t fact = 1;
        for (std::size_t i = 2; i <= pool; ++i) fact *= i;
        constexpr unsigned __int128 prime = (static_cast<unsigned __int128>(1) << 61) - 1;
        const auto rank = static_cast<std::uint64_t>((static_cast<unsigned __int128>(seed % fact) * prime) % fact);
        perm = unrank_permutation(pool, rank);
    } else {
        perm.resize(pool);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        Rng rng(seed);
        for (std::size_t i = 0; i < 2 * s; ++i) std::swap(perm[i], perm[i + rng.uniform_index(pool - i)]);
    }
    out.first.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(s));
    out.second.assign(perm.begin() + static_cast<std::ptrdiff_t>(s), perm.begin() + static_cast<std::ptrdiff_t>(2 * s));
    return out;
}

double mean_pair_distance(const FeatureSet& features, const SubsetPair& pair) {
    require(pair.first.size() == pair.second.size() && !pair.first.empty(), ErrorCode::invalid_argument,
            "subset pair must have two equal non-empty halves");
    double total = 0.0;
    for (std::size_t i = 0; i < pair.first.size(); ++i)
        total += (features.at(pair.first[i]) - features.at(pair.second[i])).norm();
    return total / static_cast<double>(pair.first.size());
}

SampledMetric diversity(const FeatureSet& features, int subset_size, std::uint64_t seed) {
    require(!features.empty(), ErrorCode::insufficient_data, "diversity of an empty feature set");
    const SubsetPair pair = sample_subset_pair(features.size(), subset_size, seed);
    return {mean_pair_distance(features, pair), pair.with_replacement};
}

SampledMetric multimodality(const std::map<std::string, FeatureSet>& by_word, int words, int subset_size,
                            std::uint64_t seed) {
    require(words >= 1, ErrorCode::invalid_argument, "multimodality needs at least one word");
    require(static_cast<std::size_t>(words) <= by_word.size(), ErrorCode::invalid_argument,
            "multimodality: C = " + std::to_string(words) + " exceeds the " + std::to_string(by_word.size()) +
                " available words");
    SampledMetric out;
    auto it = by_word.begin();
    for (int c = 0; c < words; ++c, ++it) {
        require(!it->second.empty(), ErrorCode::insufficient_data, "multimodality: word '" + it->first + "' has no features");
        const SubsetPair pair = sample_subset_pair(it->second.size(), subset_size, seed + static_cast<std::uint64_t>(c));
        out.value += mean_pair_distance(it->second, pair);
        out.with_replacement = out.with_replacement || pair.with_replacement;
    }
    out.value /= words;
    return out;
}

}  // namespace signmotion
