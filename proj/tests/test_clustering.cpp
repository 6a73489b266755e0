#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "cbmf/clustering.hpp"
#include "cbmf/errors.hpp"
#include "cbmf/mf.hpp"
#include "cbmf/ratings.hpp"

#include "test_util.hpp"

using namespace cbmf;

namespace {

Mat blob_points(std::mt19937_64& rng, const std::vector<std::pair<double, double>>& centers,
                int per_blob, double sd) {
  std::normal_distribution<double> noise(0.0, sd);
  Mat points(static_cast<int>(centers.size()) * per_blob, 2);
  int row = 0;
  for (const auto& [cx, cy] : centers)
    for (int p = 0; p < per_blob; ++p, ++row) {
      points(row, 0) = cx + noise(rng);
      points(row, 1) = cy + noise(rng);
    }
  return points;
}

}  // namespace

TEST_CASE("zero bootstrap epochs hand back the raw initialization") {
  std::mt19937_64 rng(21);
  auto ratings = test_util::random_ratings(rng, 6, 9, 30);
  RatingStore store(ratings, RatingScale{1, 5});
  Hyperparams hp;
  hp.n_factors = 4;
  hp.seed = 77;
  Mat boot = bootstrap_item_factors(store, hp, 0);
  Mat init = init_factors(store.n_users(), store.n_items(), hp).item_factors;
  CHECK((boot.array() == init.array()).all());
  CHECK_THROWS_AS(bootstrap_item_factors(store, hp, -1), ParameterError);
}

TEST_CASE("items rated identically end up with matching factors") {
  // the last two items share every rating; on data the model can fit
  // exactly, a small step size contracts their factor rows together
  // (sequential updates leave a step-size-order gap otherwise)
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const int n_u = 12, n_i = 6;
  std::vector<double> au(n_u), cu(n_u), bi(n_i), di(n_i);
  for (int u = 0; u < n_u; ++u) {
    au[u] = 1.0 + 0.5 * coef(rng);
    cu[u] = coef(rng);
  }
  for (int i = 0; i < n_i; ++i) {
    bi[i] = 1.0 + 0.5 * coef(rng);
    di[i] = coef(rng);
  }
  bi[5] = bi[4];
  di[5] = di[4];
  std::vector<Rating> ratings;
  for (int u = 0; u < n_u; ++u)
    for (int i = 0; i < n_i; ++i)
      ratings.push_back({u + 1, i + 1, 2.5 + au[u] * bi[i] + cu[u] * di[i], 100 + u * n_i + i});

  RatingStore store(ratings, RatingScale{0.5, 5});
  Hyperparams hp;
  hp.n_factors = 3;
  hp.learning_rate = 0.0003;
  hp.factor_reg = 0.0001;
  Mat factors = bootstrap_item_factors(store, hp, 200000);
  const int a = *store.items().find(5);
  const int b = *store.items().find(6);
  CHECK((factors.row(a) - factors.row(b)).cwiseAbs().maxCoeff() < 1e-6);
  // distinct columns must not collapse the same way
  const int c = *store.items().find(1);
  CHECK((factors.row(a) - factors.row(c)).cwiseAbs().maxCoeff() > 1e-4);
}

TEST_CASE("one cluster swallows every point") {
  std::mt19937_64 rng(23);
  Mat points = blob_points(rng, {{0, 0}, {4, 4}}, 10, 1.0);
  std::vector<double> wcss;
  std::vector<int> assignment = kmeans(points, 1, 5, 100, &wcss);
  for (int c : assignment) CHECK(c == 0);

  Eigen::RowVector2d mean = points.colwise().mean();
  double expect = 0.0;
  for (int p = 0; p < points.rows(); ++p)
    expect += (points.row(p) - mean).squaredNorm();
  CHECK(wcss.back() == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("well separated blobs are recovered") {
  std::mt19937_64 rng(24);
  Mat points = blob_points(rng, {{0, 0}, {10, 0}, {0, 10}}, 20, 0.5);
  std::vector<int> assignment = kmeans(points, 3, 9, 100);
  for (int blob = 0; blob < 3; ++blob) {
    const int label = assignment[static_cast<std::size_t>(blob * 20)];
    for (int p = 0; p < 20; ++p)
      CHECK(assignment[static_cast<std::size_t>(blob * 20 + p)] == label);
  }
  std::set<int> labels(assignment.begin(), assignment.end());
  CHECK(labels.size() == 3);
}

TEST_CASE("as many clusters as points fits perfectly") {
  std::mt19937_64 rng(25);
  Mat points = blob_points(rng, {{0, 0}}, 8, 2.0);
  std::vector<double> wcss;
  std::vector<int> assignment = kmeans(points, 8, 3, 100, &wcss);
  std::set<int> labels(assignment.begin(), assignment.end());
  CHECK(labels.size() == 8);
  CHECK(wcss.back() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("impossible cluster counts are rejected") {
  Mat points = Mat::Zero(5, 2);
  CHECK_THROWS_AS(kmeans(points, 0, 1, 10), ParameterError);
  CHECK_THROWS_AS(kmeans(points, 6, 1, 10), ParameterError);
}

TEST_CASE("clustering is seed deterministic") {
  std::mt19937_64 rng(26);
  Mat points = blob_points(rng, {{0, 0}, {6, 1}, {3, 8}}, 15, 1.5);
  std::vector<int> a = kmeans(points, 3, 42, 100);
  std::vector<int> b = kmeans(points, 3, 42, 100);
  CHECK(a == b);
}

TEST_CASE("the within cluster sum never rises between rounds") {
  std::mt19937_64 rng(27);
  Mat points = blob_points(rng, {{0, 0}, {3, 3}, {6, 0}, {1, 5}}, 12, 2.0);
  std::vector<double> wcss;
  kmeans(points, 4, 11, 100, &wcss);
  REQUIRE(wcss.size() >= 2);
  for (std::size_t t = 1; t < wcss.size(); ++t)
    CHECK(wcss[t] <= wcss[t - 1] * (1 + 1e-12));
}

TEST_CASE("a finished clustering is its own fixed point") {
  std::mt19937_64 rng(28);
  Mat points = blob_points(rng, {{0, 0}, {5, 2}, {2, 6}}, 10, 1.8);
  std::vector<int> assignment = kmeans(points, 3, 7, 200);

  Mat centroids = Mat::Zero(3, 2);
  std::vector<int> size(3, 0);
  for (int p = 0; p < points.rows(); ++p) {
    centroids.row(assignment[static_cast<std::size_t>(p)]) += points.row(p);
    ++size[static_cast<std::size_t>(assignment[static_cast<std::size_t>(p)])];
  }
  for (int c = 0; c < 3; ++c) {
    REQUIRE(size[static_cast<std::size_t>(c)] > 0);
    centroids.row(c) /= size[static_cast<std::size_t>(c)];
  }
  for (int p = 0; p < points.rows(); ++p) {
    int nearest = 0;
    double best = (points.row(p) - centroids.row(0)).squaredNorm();
    for (int c = 1; c < 3; ++c) {
      double d = (points.row(p) - centroids.row(c)).squaredNorm();
      if (d < best) { best = d; nearest = c; }
    }
    CHECK(assignment[static_cast<std::size_t>(p)] == nearest);
  }
}

TEST_CASE("a single cluster reproduces the overall mean exactly") {
  std::mt19937_64 rng(29);
  auto ratings = test_util::random_ratings(rng, 8, 10, 50);
  RatingStore store(ratings, RatingScale{1, 5});
  std::vector<int> assignment(static_cast<std::size_t>(store.n_items()), 0);
  ClusterMap map = build_cluster_map(store, assignment, 1);
  CHECK(map.n_clusters == 1);
  CHECK(map.cluster_mean[0] == store.mean_rating());
}

TEST_CASE("cluster means average the ratings that land in them") {
  std::vector<Rating> ratings{
      {1, 1, 2.0, 10}, {2, 1, 4.0, 11},          // cluster 0: {2, 4}
      {1, 2, 5.0, 12}, {2, 3, 1.0, 13}, {3, 3, 3.0, 14}};  // cluster 1
  RatingStore store(ratings, RatingScale{1, 5});
  std::vector<int> assignment{0, 1, 1};
  ClusterMap map = build_cluster_map(store, assignment, 2);
  CHECK(map.cluster_mean[0] == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(map.cluster_mean[1] == doctest::Approx(3.0).epsilon(1e-15));

  // an empty cluster falls back to the global mean
  ClusterMap padded = build_cluster_map(store, assignment, 3);
  CHECK(padded.cluster_mean[2] == store.mean_rating());
}

TEST_CASE("malformed cluster maps are rejected") {
  std::vector<Rating> ratings{{1, 1, 2.0, 10}, {1, 2, 4.0, 11}};
  RatingStore store(ratings, RatingScale{1, 5});
  std::vector<int> short_assignment{0};
  CHECK_THROWS_AS(build_cluster_map(store, short_assignment, 1), ParameterError);
  std::vector<int> out_of_range{0, 2};
  CHECK_THROWS_AS(build_cluster_map(store, out_of_range, 2), ParameterError);
  std::vector<int> fine{0, 0};
  CHECK_THROWS_AS(build_cluster_map(store, fine, 0), ParameterError);
}

TEST_CASE("identical rating columns have zero dissimilarity") {
  std::vector<Rating> ratings;
  for (int u = 0; u < 5; ++u) {
    ratings.push_back({u + 1, 1, 1.0 + u * 0.5, 10 + u});
    ratings.push_back({u + 1, 2, 1.0 + u * 0.5, 20 + u});
  }
  RatingStore store(ratings, RatingScale{1, 5});
  const int a = *store.items().find(1);
  const int b = *store.items().find(2);
  CHECK(dissimilarity(store, a, b) == 0.0);
  CHECK(dissimilarity(store, a, a) == 0.0);
}

TEST_CASE("dissimilarity adds up co-rater gaps") {
  std::vector<Rating> ratings{{1, 1, 1.0, 10}, {1, 2, 2.0, 11},
                              {2, 1, 3.0, 12}, {2, 2, 5.0, 13},
                              {3, 1, 4.0, 14}};  // user 3 rates only item 1
  RatingStore store(ratings, RatingScale{1, 5});
  const int a = *store.items().find(1);
  const int b = *store.items().find(2);
  CHECK(dissimilarity(store, a, b) == doctest::Approx(3.0).epsilon(1e-15));  // |1-2| + |3-5|
  CHECK(dissimilarity(store, b, a) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK_THROWS_AS(dissimilarity(store, -1, 0), ParameterError);
  CHECK_THROWS_AS(dissimilarity(store, 0, 2), ParameterError);
}

TEST_CASE("dissimilarity matches a naive pairwise pass") {
  std::mt19937_64 rng(30);
  auto ratings = test_util::random_ratings(rng, 6, 6, 24);
  RatingStore store(ratings, RatingScale{1, 5});
  for (int i = 0; i < store.n_items(); ++i)
    for (int j = 0; j < store.n_items(); ++j) {
      double expect = 0.0;
      for (const StoredRating& ri : store.ratings())
        for (const StoredRating& rj : store.ratings())
          if (ri.item == i && rj.item == j && ri.user == rj.user)
            expect += std::abs(ri.value - rj.value);
      CHECK(dissimilarity(store, i, j) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("uniform ratings have no spread at all") {
  std::vector<Rating> ratings;
  for (int u = 0; u < 6; ++u)
    for (int i = 0; i < 4; ++i) ratings.push_back({u + 1, i + 1, 3.5, 100 + u * 4 + i});
  RatingStore store(ratings, RatingScale{1, 5});
  DissimilarityReport report = variance_bound_report(store);
  CHECK(report.total_var == 0.0);
  CHECK(report.total_dissim == 0.0);
  CHECK(report.bound_holds);
}

TEST_CASE("one split personality user shows variance four") {
  std::vector<Rating> ratings{{1, 1, 1.0, 10}, {1, 2, 5.0, 11}};
  RatingStore store(ratings, RatingScale{1, 5});
  DissimilarityReport report = variance_bound_report(store);
  // mean 3, offset 0, squared deviations (1-3)^2 and (5-3)^2, averaged
  CHECK(report.total_var == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(report.total_dissim == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(report.bound_holds);
}

TEST_CASE("the variance bound survives random stores") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> users(2, 10), items(2, 10);
  for (int trial = 0; trial < 120; ++trial) {
    const int n_u = users(rng), n_i = items(rng);
    std::uniform_int_distribution<int> count(2, n_u * n_i);
    auto ratings = test_util::random_ratings(rng, n_u, n_i, count(rng));
    RatingStore store(ratings, RatingScale{1, 5});

    // independent recomputation from the raw rating list
    std::map<int, std::vector<double>> by_user;
    double mu = 0.0;
    for (const Rating& r : ratings) {
      by_user[r.user].push_back(r.value);
      mu += r.value;
    }
    mu /= static_cast<double>(ratings.size());
    double total_var = 0.0, total_dissim = 0.0;
    for (const auto& [user, values] : by_user) {
      for (std::size_t a = 0; a < values.size(); ++a)
        for (std::size_t b = a + 1; b < values.size(); ++b)
          total_dissim += std::abs(values[a] - values[b]);
      if (values.size() < 2) continue;
      double offset = 0.0;
      for (double v : values) offset += v - mu;
      offset /= static_cast<double>(values.size());
      double var = 0.0;
      for (double v : values) var += ((v - mu) - offset) * ((v - mu) - offset);
      total_var += var / static_cast<double>(values.size());
    }

    DissimilarityReport report = variance_bound_report(store);
    CHECK(report.total_var == doctest::Approx(total_var).epsilon(1e-10));
    CHECK(report.total_dissim == doctest::Approx(total_dissim).epsilon(1e-10));
    CHECK(report.total_var >= 0.0);
    CHECK(report.total_var <= report.total_dissim * report.total_dissim + 1e-12);
    CHECK(report.bound_holds);
  }
}

TEST_CASE("cluster views match the map that built them") {
  std::mt19937_64 rng(32);
  auto ratings = test_util::random_ratings(rng, 8, 9, 40);
  RatingStore store(ratings, RatingScale{1, 5});
  Hyperparams hp;
  hp.n_factors = 3;
  Mat factors = bootstrap_item_factors(store, hp, 5);
  std::vector<int> assignment = kmeans(factors, 3, 1, 100);
  ClusterMap map = build_cluster_map(store, assignment, 3);
  index_by_cluster(store, map);
  REQUIRE(store.has_cluster_index());
  CHECK(store.n_index_clusters() == 3);
  for (int u = 0; u < store.n_users(); ++u) {
    std::size_t total = 0;
    for (int c = 0; c < 3; ++c) {
      for (int idx : store.cluster_ratings_of(u, c)) {
        const StoredRating& r = store.ratings()[static_cast<std::size_t>(idx)];
        CHECK(r.user == u);
        CHECK(map.assignment[static_cast<std::size_t>(r.item)] == c);
      }
      total += store.cluster_ratings_of(u, c).size();
    }
    CHECK(total == store.ratings_of(u).size());
  }
}
