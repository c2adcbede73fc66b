#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "spectral/data.hpp"
#include "spectral/losses.hpp"

using namespace spectral;
namespace fs = std::filesystem;

namespace {

Schema schema_of(const std::string& text) {
  std::istringstream in(text);
  return Schema::parse(in);
}

Dataset read(const std::string& csv, const std::string& schema, TableEncoding* enc = nullptr) {
  std::istringstream in(csv);
  return read_delimited(in, schema_of(schema), ',', enc);
}

fs::path temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("spectral_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST(Schema, ParsesRolesAndComments) {
  const auto s = schema_of("# roles\nage = numeric\ncolor=categorical  # trailing\n\ny = label\nid = ignore\n");
  EXPECT_EQ(s.roles.size(), 4u);
  EXPECT_EQ(s.roles.at("color"), ColumnRole::Categorical);
  EXPECT_EQ(s.roles.at("id"), ColumnRole::Ignore);
  try {
    schema_of("a = numeric\nb = banana\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 2u);
    EXPECT_EQ(e.column(), "b");
  }
  EXPECT_THROW(schema_of("no equals sign\n"), ParseError);
}

TEST(Delimited, MinMaxScaling) {
  const auto ds = read("x,y\n2,a\n4,b\n6,a\n", "x = numeric\ny = label\n");
  ASSERT_EQ(ds.size(), 3u);
  EXPECT_EQ(ds.examples[0].features[0], 0.0);
  EXPECT_EQ(ds.examples[1].features[0], 0.5);
  EXPECT_EQ(ds.examples[2].features[0], 1.0);
  EXPECT_EQ(ds.n_classes, 2u);
  EXPECT_EQ(ds.examples[1].label, 1);
}

TEST(Delimited, OneHotCategorical) {
  const auto ds = read("c,y\na,0\nb,1\na,0\n", "c = categorical\ny = label\n");
  EXPECT_EQ(ds.n_features, 2u);
  EXPECT_EQ(ds.examples[0].features, (std::vector<double>{1.0, 0.0}));
  EXPECT_EQ(ds.examples[1].features, (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(ds.examples[2].features, (std::vector<double>{1.0, 0.0}));
  EXPECT_EQ(ds.feature_names[0], "c=a");
}

TEST(Delimited, ConstantColumnIsHalf) {
  const auto ds = read("k,y\n3,0\n3,1\n3,0\n", "k = numeric\ny = label\n");
  for (const auto& ex : ds.examples) EXPECT_EQ(ex.features[0], 0.5);
}

TEST(Delimited, LabelsRelabelledNumerically) {
  const auto ds = read("x,y\n1,10\n2,9\n3,-1\n4,10\n", "x = numeric\ny = label\n");
  EXPECT_EQ(ds.n_classes, 3u);
  EXPECT_EQ(ds.examples[0].label, 2);
  EXPECT_EQ(ds.examples[1].label, 1);
  EXPECT_EQ(ds.examples[2].label, 0);
}

TEST(Delimited, UnlistedColumnsIgnoredAndQuotes) {
  const auto ds = read("id,x,y,note\n1,5,a,\"x, y\"\n2,7,b,plain\n", "x = numeric\ny = label\n");
  EXPECT_EQ(ds.n_features, 1u);
  EXPECT_EQ(ds.examples[1].features[0], 1.0);
}

TEST(Delimited, Errors) {
  try {
    read("x,y\n1,a\nbad,b\n", "x = numeric\ny = label\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 3u);
    EXPECT_EQ(e.column(), "x");
  }
  EXPECT_THROW(read("x,y\n1,a,3\n", "x = numeric\ny = label\n"), ParseError);
  EXPECT_THROW(read("", "x = numeric\ny = label\n"), ParseError);
  EXPECT_THROW(read("x,y\n", "x = numeric\ny = label\n"), ParseError);
  EXPECT_THROW(read("x,y\n1,a\n", "x = numeric\n"), ParseError);
  EXPECT_THROW(read("x,y\n1,a\n", "x = numeric\nz = numeric\ny = label\n"), ParseError);
}

TEST(Delimited, EncodingReusedOnTestFile) {
  const auto dir = temp_dir("encoding");
  write_file(dir / "schema", "x = numeric\nc = categorical\ny = label\n");
  write_file(dir / "train.csv", "x,c,y\n0,a,p\n10,b,q\n");
  write_file(dir / "test.csv", "x,c,y\n20,z,q\n-5,a,p\n");
  write_file(dir / "bad.csv", "x,c,y\n1,a,r\n");
  TableEncoding enc;
  const auto train = load_delimited(dir / "train.csv", Schema::load(dir / "schema"), ',', &enc);
  EXPECT_EQ(train.n_features, 3u);
  const auto test = load_delimited(dir / "test.csv", enc);
  // Clamped to the training range; the unseen level is an all-zero block.
  EXPECT_EQ(test.examples[0].features, (std::vector<double>{1.0, 0.0, 0.0}));
  EXPECT_EQ(test.examples[1].features, (std::vector<double>{0.0, 1.0, 0.0}));
  EXPECT_EQ(test.examples[0].label, 1);
  EXPECT_THROW(load_delimited(dir / "bad.csv", enc), ParseError);
  EXPECT_THROW(load_delimited(dir / "missing.csv", enc), std::runtime_error);
}

TEST(Delimited, TabDelimiter) {
  std::istringstream in("x\ty\n1\ta\n3\tb\n");
  const auto ds = read_delimited(in, schema_of("x = numeric\ny = label\n"), '\t');
  EXPECT_EQ(ds.examples[1].features[0], 1.0);
}

TEST(Split, SizesDeterminismPartition) {
  std::ostringstream csv;
  csv << "x,y\n";
  for (int i = 0; i < 10; ++i) csv << i << "," << (i % 2) << "\n";
  const auto ds = read(csv.str(), "x = numeric\ny = label\n");
  const auto a = split_shuffle(ds, 0.2, 9);
  const auto b = split_shuffle(ds, 0.2, 9);
  EXPECT_EQ(a.train.size(), 8u);
  EXPECT_EQ(a.test.size(), 2u);
  EXPECT_EQ(a.train.examples, b.train.examples);
  EXPECT_EQ(a.test.examples, b.test.examples);

  // Map back to raw x through the recorded scaling and compare multisets.
  std::vector<long> raw;
  for (const auto* part : {&a.train, &a.test})
    for (const auto& ex : part->examples) {
      const auto& sc = part->scaling[0];
      raw.push_back(std::lround(sc.min + ex.features[0] * (sc.max - sc.min)));
    }
  std::sort(raw.begin(), raw.end());
  for (long i = 0; i < 10; ++i) EXPECT_EQ(raw[static_cast<std::size_t>(i)], i);

  // Training features span [0, 1] after the refit; test values are clamped.
  double lo = 1.0, hi = 0.0;
  for (const auto& ex : a.train.examples) {
    lo = std::min(lo, ex.features[0]);
    hi = std::max(hi, ex.features[0]);
  }
  EXPECT_EQ(lo, 0.0);
  EXPECT_EQ(hi, 1.0);
  for (const auto& ex : a.test.examples) {
    EXPECT_GE(ex.features[0], 0.0);
    EXPECT_LE(ex.features[0], 1.0);
  }
  EXPECT_NE(split_shuffle(ds, 0.2, 10).test.examples, a.test.examples);
  EXPECT_THROW(split_shuffle(ds, 0.0, 1), DomainError);
  EXPECT_THROW(split_shuffle(ds, 0.01, 1), DomainError);
}

TEST(Scaling, Idempotent) {
  std::vector<Example> ex{{{2.0, 1.0}, 0, 0.0}, {{4.0, 0.0}, 0, 0.0}, {{7.0, 1.0}, 0, 0.0}};
  const std::vector<FeatureScaling> like{{0, 1, true}, {0, 1, false}};
  const auto sc = fit_scaling(ex, like);
  apply_scaling(ex, sc);
  const auto once = ex;
  apply_scaling(ex, fit_scaling(ex, like));
  EXPECT_EQ(ex, once);
  EXPECT_EQ(once[1].features[1], 0.0);  // inactive column passes through
}

TEST(Normalized, RoundTrip) {
  const auto dir = temp_dir("normalized");
  SyntheticParams p;
  p.n = 200;
  p.p = 3;
  for (auto kind : {SyntheticKind::TwoGaussian, SyntheticKind::LinearLognormal}) {
    const auto ds = make_synthetic(kind, p, 4);
    save_normalized(ds, dir / "ds.csv");
    const auto back = load_normalized(dir / "ds.csv");
    EXPECT_EQ(back.examples, ds.examples);
    EXPECT_EQ(back.n_classes, ds.n_classes);
    EXPECT_EQ(back.feature_names, ds.feature_names);
  }
  write_file(dir / "plain.csv", "x,label,target\n1,0,0\n");
  EXPECT_THROW(load_normalized(dir / "plain.csv"), ParseError);
}

TEST(Libsvm, Convert) {
  const auto dir = temp_dir("libsvm");
  write_file(dir / "in.txt", "+1 1:0.5 3:2\n-1 2:1.5  # comment\n\n+1 1:1 2:1 3:1\n");
  convert_libsvm(dir / "in.txt", dir / "out.csv", dir / "out.schema");
  const auto ds = load_delimited(dir / "out.csv", Schema::load(dir / "out.schema"));
  ASSERT_EQ(ds.size(), 3u);
  EXPECT_EQ(ds.n_features, 3u);
  EXPECT_EQ(ds.n_classes, 2u);
  EXPECT_EQ(ds.examples[0].label, 1);
  EXPECT_EQ(ds.examples[1].label, 0);
  EXPECT_EQ(ds.examples[0].features, (std::vector<double>{0.5, 0.0, 1.0}));
  write_file(dir / "bad.txt", "1 x:2\n");
  EXPECT_THROW(convert_libsvm(dir / "bad.txt", dir / "o.csv", dir / "o.schema"), ParseError);
}

TEST(Synthetic, DeterministicAndWellSeparated) {
  SyntheticParams p;
  p.n = 4000;
  p.p = 2;
  p.separation = 10.0;
  const auto a = make_synthetic(SyntheticKind::TwoGaussian, p, 1);
  const auto b = make_synthetic(SyntheticKind::TwoGaussian, p, 1);
  EXPECT_EQ(a.examples, b.examples);
  EXPECT_NE(make_synthetic(SyntheticKind::TwoGaussian, p, 2).examples, a.examples);
  for (const auto& ex : a.examples)
    for (double x : ex.features) {
      EXPECT_GE(x, 0.0);
      EXPECT_LE(x, 1.0);
    }
  // Bayes rule in raw units is sign(x1 - x2); min-max scaling keeps its
  // orientation, so the plug-in rule with the data midpoint is near perfect.
  double m0 = 0.0, m1 = 0.0;
  int n0 = 0, n1 = 0;
  for (const auto& ex : a.examples) {
    const double s = ex.features[0] - ex.features[1];
    (ex.label == 1 ? m1 : m0) += s;
    (ex.label == 1 ? n1 : n0) += 1;
  }
  const double cut = 0.5 * (m0 / n0 + m1 / n1);
  int wrong = 0;
  for (const auto& ex : a.examples) wrong += ((ex.features[0] - ex.features[1] > cut) != (ex.label == 1)) ? 1 : 0;
  EXPECT_LE(wrong, 4);
  EXPECT_THROW(make_synthetic(SyntheticKind::TwoGaussian, [] { SyntheticParams q; q.n = 10; q.p = 1; return q; }(), 1), DomainError);
}

TEST(Synthetic, LognormalSecondMoment) {
  // At w = 0 the loss is |y| = |<w*, x> + e|; E y^2 = |w*|^2 + E e^2 since the
  // terms are independent with E<w*, x> = 0, and E e^2 = exp(2 mu + 2 s^2).
  SyntheticParams p;
  p.n = 200000;
  p.p = 2;
  p.noise_mu = 0.1;
  p.noise_sigma = 0.5;
  const auto ds = make_synthetic(SyntheticKind::LinearLognormal, p, 7);
  const auto model = LossModel::linear_abs(2);
  const auto l = losses_on(model, std::vector<double>{0.0, 0.0}, ds.examples);
  double m2 = 0.0, m4 = 0.0;
  for (double v : l) {
    m2 += v * v / l.size();
    m4 += v * v * v * v / l.size();
  }
  const double want = 2.0 + std::exp(2 * 0.1 + 2 * 0.25);
  const double sd = std::sqrt((m4 - m2 * m2) / l.size());
  EXPECT_NEAR(m2, want, 3.0 * sd);
  EXPECT_EQ(parse_synthetic_kind("linear-lognormal"), SyntheticKind::LinearLognormal);
  EXPECT_THROW(parse_synthetic_kind("spiral"), std::invalid_argument);
}
