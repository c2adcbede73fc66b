#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "spectral/common.hpp"
#include "spectral/losses.hpp"

namespace spectral {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t row, std::string column, const std::string& what);
  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

enum class ColumnRole { Numeric, Categorical, Label, Ignore };

/// Column name -> role, read from `name = role` lines. Columns absent from
/// the schema are ignored.
struct Schema {
  std::map<std::string, ColumnRole> roles;

  static Schema parse(std::istream& in);
  static Schema load(const std::filesystem::path& path);
};

/// Min-max map onto [0, 1]. Inactive entries (indicator columns) pass values
/// through; a constant column maps to 0.5.
struct FeatureScaling {
  double min = 0.0;
  double max = 1.0;
  bool active = false;

  double apply(double x) const;
};

/// How raw delimited columns become feature vectors. Fit on one table and
/// reusable on another (e.g. a separate test file).
struct TableEncoding {
  struct Column {
    std::string name;
    ColumnRole role = ColumnRole::Ignore;
    std::vector<std::string> levels;  // categorical, sorted
  };
  std::vector<Column> columns;             // in file order
  std::vector<std::string> class_names;    // label value of class k
  std::vector<std::string> feature_names;
  std::vector<FeatureScaling> scaling;     // per output feature
};

struct Dataset {
  std::vector<Example> examples;
  std::size_t n_classes = 0;
  std::size_t n_features = 0;
  std::vector<std::string> feature_names;
  std::vector<FeatureScaling> scaling;

  std::size_t size() const noexcept { return examples.size(); }
};

/// Header-bearing delimited text -> one-hot encoded, min-max scaled dataset.
/// Labels are relabelled 0..K-1 in sorted order (numeric order when every
/// label parses as a number).
Dataset load_delimited(const std::filesystem::path& path, const Schema& schema,
                       char delimiter = ',', TableEncoding* encoding_out = nullptr);

/// Encodes another file with an encoding fitted elsewhere. Unseen categorical
/// levels become an all-zero block; unseen labels are a ParseError.
Dataset load_delimited(const std::filesystem::path& path, const TableEncoding& encoding,
                       char delimiter = ',');

/// Same as load_delimited, from a stream.
Dataset read_delimited(std::istream& in, const Schema& schema, char delimiter = ',',
                       TableEncoding* encoding_out = nullptr);

std::vector<FeatureScaling> fit_scaling(const std::vector<Example>& examples,
                                        const std::vector<FeatureScaling>& like);
void apply_scaling(std::vector<Example>& examples, const std::vector<FeatureScaling>& scaling);

struct Split {
  Dataset train;
  Dataset test;
};

/// Fisher-Yates shuffle, then the first round(n * (1 - f)) rows train. The
/// scaling is refit on train and applied (clamped) to test.
Split split_shuffle(const Dataset& ds, double test_fraction, std::uint64_t seed);

/// Normalized interchange format: `feature..., label, target` columns with
/// values written exactly; reloading does no rescaling.
void save_normalized(const Dataset& ds, const std::filesystem::path& path);
Dataset load_normalized(const std::filesystem::path& path);

/// libsvm `label idx:value ...` lines -> delimited text plus a schema file.
void convert_libsvm(const std::filesystem::path& in, const std::filesystem::path& out_csv,
                    const std::filesystem::path& out_schema);

enum class SyntheticKind {
  TwoGaussian,      // K = 2, N(+-m, I) with |m_+ - m_-| = separation
  LinearLognormal,  // y = <w*, x> + eps, x ~ N(0, I), eps ~ LogNormal(mu, sigma)
};

struct SyntheticParams {
  std::size_t n = 1000;
  std::size_t p = 2;
  double separation = 4.0;
  double noise_mu = 0.0;
  double noise_sigma = 1.0;
  std::vector<double> w_star;  // LinearLognormal; defaults to (1, -1, 1, ...)
};

/// iid generator for one synthetic task (unscaled features).
std::function<Example(Rng&)> synthetic_generator(SyntheticKind kind, const SyntheticParams& params);

/// n draws from the generator. TwoGaussian features are min-max scaled;
/// LinearLognormal features are left raw.
Dataset make_synthetic(SyntheticKind kind, const SyntheticParams& params, std::uint64_t seed);

SyntheticKind parse_synthetic_kind(const std::string& name);

}  // namespace spectral
