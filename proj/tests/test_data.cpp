#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

#include "eel/data.hpp"
#include "eel/genotype.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using fixture::TempDir;

namespace {

std::string clean_csv(std::size_t rows) {
  std::ostringstream os;
  os << "t,y,a,b\n";
  for (std::size_t i = 0; i < rows; ++i) os << i << ',' << 0.5 * i << ',' << i % 7 << ',' << -1.0 * i << '\n';
  return os.str();
}

}  // namespace

TEST(LoadCsv, CleanFile) {
  TempDir dir;
  const auto r = eel::load_csv(dir.write("a.csv", clean_csv(100)), "y");
  EXPECT_EQ(r.dataset.channel_count(), 3u);
  EXPECT_EQ(r.dataset.length(), 100u);
  EXPECT_EQ(r.dataset.target_index(), 0u);
  EXPECT_EQ(r.dropped_rows, 0u);
  EXPECT_EQ(r.dataset.channel_names(), (std::vector<std::string>{"y", "a", "b"}));
  EXPECT_EQ(r.dataset.timestamps().size(), 100u);
  EXPECT_DOUBLE_EQ(r.dataset.target().values[10], 5.0);
}

TEST(LoadCsv, TargetNeedNotBeFirst) {
  TempDir dir;
  const auto r = eel::load_csv(dir.write("a.csv", clean_csv(10)), "b");
  EXPECT_EQ(r.dataset.target_index(), 2u);
  EXPECT_EQ(r.dataset.auxiliary(0).name, "y");
  EXPECT_EQ(r.dataset.auxiliary(1).name, "a");
}

TEST(LoadCsv, DropsRowsWithMissingCells) {
  std::ostringstream os;
  os << "t,y,a,b\n";
  for (int i = 0; i < 100; ++i) {
    if (i % 20 == 3) os << i << ",," << i << ',' << i << '\n';
    else if (i % 20 == 9) os << i << ',' << i << ",nan?," << i << '\n';
    else if (i == 50) os << i << ',' << i << ',' << i << ",\n";
    else os << i << ',' << i << ',' << i << ',' << i << '\n';
  }
  TempDir dir;
  // rows 3,23,43,63,83 missing y; 9,29,... unparseable a; 50 missing b
  const auto r = eel::load_csv(dir.write("m.csv", os.str()), "y");
  EXPECT_EQ(r.dropped_rows, 11u);
  EXPECT_EQ(r.dataset.length(), 89u);

  std::ostringstream five;
  five << "y,a\n";
  for (int i = 0; i < 100; ++i) five << (i < 5 ? std::string() : std::to_string(i)) << ',' << i << '\n';
  const auto r5 = eel::load_csv(dir.write("five.csv", five.str()), "y");
  EXPECT_EQ(r5.dropped_rows, 5u);
  EXPECT_EQ(r5.dataset.length(), 95u);
}

TEST(LoadCsv, Errors) {
  TempDir dir;
  EXPECT_THROW(eel::load_csv(dir.file("missing.csv"), "y"), eel::DataError);
  EXPECT_THROW(eel::load_csv(dir.write("a.csv", clean_csv(10)), "zz"), eel::DataError);
  EXPECT_THROW(eel::load_csv(dir.write("only.csv", "y\n1\n2\n3\n"), "y"), eel::DataError);
  EXPECT_THROW(eel::load_csv(dir.write("ragged.csv", "y,a\n1,2\n3\n"), "y"), eel::DataError);
  EXPECT_THROW(eel::load_csv(dir.write("short.csv", "y,a\n1,2\n"), "y"), eel::DataError);
  EXPECT_THROW(eel::load_csv(dir.write("order.csv", "t,y,a\n0,1,2\n2,1,2\n1,1,2\n"), "y"), eel::DataError);
}

TEST(LoadCsv, CommentsAndBlankLinesAreSkipped) {
  TempDir dir;
  const auto r = eel::load_csv(dir.write("c.csv", "# header note\ny,a\n\n1,2\n# mid\n3,4\n5,6\n"), "y");
  EXPECT_EQ(r.dataset.length(), 3u);
  EXPECT_EQ(r.dropped_rows, 0u);
}

TEST(Dataset, RejectsNonFiniteAndMismatchedLengths) {
  EXPECT_THROW(fixture::dataset({1, std::nan(""), 3}, {{1, 2, 3}}), eel::DataError);
  EXPECT_THROW(fixture::dataset({1, 2, 3}, {{1, 2}}), eel::DataError);
  EXPECT_THROW(fixture::dataset({1}, {{1}}), eel::DataError);
}

TEST(AggregateResolution, Examples) {
  const std::vector<double> x{1, 2, 3, 4};
  EXPECT_EQ(eel::aggregate_resolution(x, 1), x);
  EXPECT_EQ(eel::aggregate_resolution(x, 2), (std::vector<double>{1.5, 3.5}));
  const auto r = oracle::random_series(17, 3);
  const auto a = eel::aggregate_resolution(r, 5);
  const auto o = oracle::block_means(r, 5);
  ASSERT_EQ(a.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(a[i], o[i], 1e-15);
  EXPECT_THROW(eel::aggregate_resolution(x, 0), std::invalid_argument);
  EXPECT_THROW(eel::aggregate_resolution(x, 5), std::invalid_argument);
}

TEST(AggregateResolution, ConservesMeanOfConsumedPrefix) {
  for (std::size_t n = 5; n < 40; ++n) {
    for (int r = 1; r <= 5; ++r) {
      const auto x = oracle::random_series(n, n * 11 + r);
      const auto a = eel::aggregate_resolution(x, r);
      ASSERT_EQ(a.size(), n / r);
      double in = 0.0, out = 0.0;
      for (std::size_t i = 0; i < a.size() * r; ++i) in += x[i];
      for (double v : a) out += v;
      EXPECT_NEAR(in / static_cast<double>(a.size() * r), out / static_cast<double>(a.size()), 1e-12);
    }
  }
}

TEST(BuildSamples, TargetOnlyLags) {
  const auto data = fixture::dataset({1, 2, 3, 4, 5}, {{0, 0, 0, 0, 0}});
  const auto s = eel::build_samples(data, fixture::lag_config(1, 2));
  ASSERT_EQ(s.rows(), 3u);
  ASSERT_EQ(s.width(), 2u);
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(s.inputs(k, 0), k + 1);
    EXPECT_EQ(s.inputs(k, 1), k + 2);
    EXPECT_EQ(s.targets(k), k + 3);
  }
  EXPECT_EQ(s.history, 2u);
}

TEST(BuildSamples, ResolutionBlockMeansHandEnumerated) {
  std::vector<double> y(10);
  for (int i = 0; i < 10; ++i) y[static_cast<std::size_t>(i)] = (i + 1) * (i + 1);  // 1,4,9,...
  const auto data = fixture::dataset(y, {std::vector<double>(10, 0.0)});
  const auto s = eel::build_samples(data, fixture::lag_config(1, 2, 2));
  // history 4 raw steps -> 6 samples; row k uses y[k..k+3] -> block means (y[k]+y[k+1])/2, (y[k+2]+y[k+3])/2
  ASSERT_EQ(s.rows(), 6u);
  const double expected[6][3] = {{2.5, 12.5, 25}, {6.5, 20.5, 36}, {12.5, 30.5, 49},
                                 {20.5, 42.5, 64}, {30.5, 56.5, 81}, {42.5, 72.5, 100}};
  for (int k = 0; k < 6; ++k) {
    EXPECT_DOUBLE_EQ(s.inputs(k, 0), expected[k][0]);
    EXPECT_DOUBLE_EQ(s.inputs(k, 1), expected[k][1]);
    EXPECT_DOUBLE_EQ(s.targets(k), expected[k][2]);
  }
}

TEST(BuildSamples, AuxiliaryMeanFeatureAddsOneColumn) {
  const auto data = fixture::random_dataset(40, 2, 4);
  auto cfg = fixture::lag_config(2, 3);
  cfg.cs = {false, true};
  cfg.tw[2] = 5;
  cfg.fe[2] = true;
  cfg.fs[2] = eel::FeatureFlags::of({eel::Feature::mean});
  const auto s = eel::build_samples(data, cfg);
  ASSERT_EQ(s.width(), 4u);
  ASSERT_EQ(s.rows(), 35u);
  const auto& x2 = data.auxiliary(1).values;
  for (std::size_t k = 0; k < s.rows(); ++k) {
    double m = 0.0;
    for (std::size_t j = k; j < k + 5; ++j) m += x2[j];
    EXPECT_NEAR(s.inputs(static_cast<Eigen::Index>(k), 3), m / 5.0, 1e-14);
  }
}

TEST(BuildSamples, MinHistoryAlignsFrames) {
  const auto data = fixture::random_dataset(50, 1, 2);
  const auto a = eel::build_samples(data, fixture::lag_config(1, 2), 10);
  const auto b = eel::build_samples(data, fixture::lag_config(1, 6), 10);
  ASSERT_EQ(a.rows(), 40u);
  ASSERT_EQ(b.rows(), 40u);
  EXPECT_EQ(a.targets, b.targets);
  EXPECT_EQ(a.targets(0), data.target().values[10]);
}

TEST(BuildSamples, InsufficientHistory) {
  const auto data = fixture::dataset({1, 2, 3}, {{1, 2, 3}});
  EXPECT_THROW(eel::build_samples(data, fixture::lag_config(1, 3)), eel::DataError);
  EXPECT_THROW(eel::build_samples(data, fixture::lag_config(1, 1), 5), eel::DataError);
}

TEST(BuildSamplesProperty, WidthMatchesLayoutForRandomGenotypes) {
  const auto data = fixture::random_dataset(120, 3, 9);
  const auto spec = fixture::small_spec(3);
  eel::Rng rng(21);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto cfg = eel::decode(eel::random_genotype(spec, rng), spec);
    const auto layout = eel::sample_layout(cfg);
    std::size_t sum = 0;
    for (const auto& b : layout) sum += b.width;
    const auto s = eel::build_samples(data, cfg, spec.max_history());
    ASSERT_EQ(s.width(), sum);
    ASSERT_EQ(s.layout, layout);
    ASSERT_EQ(s.rows(), 120 - spec.max_history());
    ASSERT_TRUE(s.inputs.allFinite());
  }
}

TEST(Split, CardinalityAndDeterminism) {
  const auto a = eel::split_train_test(300, 2.0 / 3.0, 7);
  EXPECT_EQ(a.train.size(), 200u);
  EXPECT_EQ(a.test.size(), 100u);
  std::vector<std::size_t> inter;
  std::set_intersection(a.train.begin(), a.train.end(), a.test.begin(), a.test.end(), std::back_inserter(inter));
  EXPECT_TRUE(inter.empty());
  const auto b = eel::split_train_test(300, 2.0 / 3.0, 7);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
}

TEST(Split, PartitionsAreExhaustive) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = eel::split_train_test(97, 0.6, seed);
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    all.insert(s.test.begin(), s.test.end());
    EXPECT_EQ(all.size(), 97u);
    EXPECT_EQ(*all.rbegin(), 96u);
    EXPECT_EQ(s.train.size() + s.test.size(), 97u);
  }
}

TEST(Split, DifferentSeedsDiffer) {
  int differ = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    differ += eel::split_train_test(300, 2.0 / 3.0, 2 * seed).train != eel::split_train_test(300, 2.0 / 3.0, 2 * seed + 1).train;
  }
  EXPECT_GE(differ, 99);
}

TEST(Split, DegenerateFraction) {
  EXPECT_THROW(eel::split_train_test(10, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(eel::split_train_test(10, 1.0, 1), std::invalid_argument);
  EXPECT_THROW(eel::split_train_test(2, 0.01, 1), eel::DataError);
}
