#include "plenreg/feature_match.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "plenreg/parallel.hpp"

namespace plenreg {

namespace {

void check_sets(const DescriptorMatrix& a, const DescriptorMatrix& b) {
  if (a.rows() == 0 || b.rows() == 0) {
    fail(ErrorCode::EmptySet, "descriptor set is empty");
  }
  if (a.cols() != b.cols()) {
    fail(ErrorCode::DimensionMismatch, "descriptor dimensions differ: " +
                                           std::to_string(a.cols()) + " vs " +
                                           std::to_string(b.cols()));
  }
}

Eigen::MatrixXd distance_matrix(const DescriptorMatrix& a, const DescriptorMatrix& b,
                                unsigned threads) {
  Eigen::MatrixXd d(a.rows(), b.rows());
  parallel_for(static_cast<std::size_t>(a.rows()), threads, [&](std::size_t i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      d(static_cast<Eigen::Index>(i), j) =
          descriptor_distance(a, static_cast<Eigen::Index>(i), b, j);
    }
  });
  return d;
}

using Neighbour = std::pair<double, int>;  // (distance, index), ordered lexicographically

std::vector<Neighbour> k_nearest(const Eigen::Ref<const Eigen::VectorXd>& row, int k) {
  std::vector<Neighbour> all(static_cast<std::size_t>(row.size()));
  for (Eigen::Index j = 0; j < row.size(); ++j) {
    all[static_cast<std::size_t>(j)] = {row(j), static_cast<int>(j)};
  }
  const auto kk = std::min<std::size_t>(static_cast<std::size_t>(k), all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(kk), all.end());
  all.resize(kk);
  return all;
}

bool contains(const std::vector<Neighbour>& list, int idx) {
  return std::any_of(list.begin(), list.end(),
                     [idx](const Neighbour& n) { return n.second == idx; });
}

}  // namespace

void FeatureCloud::validate() const {
  if (descriptors.rows() != points.cols()) {
    fail(ErrorCode::DimensionMismatch, "cloud points and descriptors differ in count");
  }
  if (!points.allFinite() || !descriptors.allFinite()) {
    fail(ErrorCode::InvalidArgument, "feature cloud contains non-finite values");
  }
}

void FeatureImage::validate() const {
  if (descriptors.rows() != keypoints.cols()) {
    fail(ErrorCode::DimensionMismatch, "keypoints and descriptors differ in count");
  }
  if (virtual_depths && virtual_depths->size() != keypoints.cols()) {
    fail(ErrorCode::DimensionMismatch, "keypoints and virtual depths differ in count");
  }
  if (!keypoints.allFinite() || !descriptors.allFinite()) {
    fail(ErrorCode::InvalidArgument, "feature image contains non-finite values");
  }
}

double descriptor_distance(const DescriptorMatrix& a, Eigen::Index i,
                           const DescriptorMatrix& b, Eigen::Index j) {
  return (a.row(i).cast<double>() - b.row(j).cast<double>()).norm();
}

std::vector<Match> match_bruteforce_l2(const DescriptorMatrix& query,
                                       const DescriptorMatrix& train, double keep_ratio,
                                       unsigned threads) {
  if (!(keep_ratio > 0.0 && keep_ratio <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "keep_ratio must lie in (0, 1]");
  }
  check_sets(query, train);

  std::vector<Match> matches(static_cast<std::size_t>(query.rows()));
  parallel_for(matches.size(), threads, [&](std::size_t qi) {
    const auto q = static_cast<Eigen::Index>(qi);
    Match best{static_cast<int>(q), 0, descriptor_distance(query, q, train, 0)};
    for (Eigen::Index t = 1; t < train.rows(); ++t) {
      const double d = descriptor_distance(query, q, train, t);
      if (d < best.distance) best = {static_cast<int>(q), static_cast<int>(t), d};
    }
    matches[qi] = best;
  });

  std::stable_sort(matches.begin(), matches.end(),
                   [](const Match& a, const Match& b) { return a.distance < b.distance; });
  const auto keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(keep_ratio * static_cast<double>(query.rows()))));
  matches.resize(std::min(keep, matches.size()));
  return matches;
}

std::vector<Match> match_knn_crosscheck(const DescriptorMatrix& a, const DescriptorMatrix& b,
                                        int k, unsigned threads) {
  if (k < 1) fail(ErrorCode::InvalidArgument, "k must be at least 1");
  check_sets(a, b);

  const Eigen::MatrixXd d = distance_matrix(a, b, threads);
  std::vector<std::vector<Neighbour>> knn_ab(static_cast<std::size_t>(a.rows()));
  std::vector<std::vector<Neighbour>> knn_ba(static_cast<std::size_t>(b.rows()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    knn_ab[static_cast<std::size_t>(i)] = k_nearest(d.row(i).transpose(), k);
  }
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    knn_ba[static_cast<std::size_t>(j)] = k_nearest(d.col(j), k);
  }

  auto nearest_mutual = [](const std::vector<Neighbour>& mine,
                           const std::vector<std::vector<Neighbour>>& theirs, int self) {
    for (const auto& [dist, other] : mine) {
      if (contains(theirs[static_cast<std::size_t>(other)], self)) return other;
    }
    return -1;
  };

  std::vector<int> best_b(knn_ba.size());
  for (std::size_t j = 0; j < knn_ba.size(); ++j) {
    best_b[j] = nearest_mutual(knn_ba[j], knn_ab, static_cast<int>(j));
  }

  std::vector<Match> matches;
  for (std::size_t i = 0; i < knn_ab.size(); ++i) {
    const int j = nearest_mutual(knn_ab[i], knn_ba, static_cast<int>(i));
    if (j >= 0 && best_b[static_cast<std::size_t>(j)] == static_cast<int>(i)) {
      matches.push_back({static_cast<int>(i), j, d(static_cast<Eigen::Index>(i), j)});
    }
  }
  return matches;
}

}  // namespace plenreg
