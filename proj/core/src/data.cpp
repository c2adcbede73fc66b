#include "spectral/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace spectral {

ParseError::ParseError(std::size_t row, std::string column, const std::string& what)
    : std::runtime_error([&] {
        std::ostringstream msg;
        msg << "row " << row;
        if (!column.empty()) msg << ", column '" << column << "'";
        msg << ": " << what;
        return msg.str();
      }()),
      row_(row), column_(std::move(column)) {}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Splits one delimited line; double quotes group fields and "" escapes a quote.
std::vector<std::string> split_fields(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

ColumnRole parse_role(const std::string& s) {
  if (s == "numeric") return ColumnRole::Numeric;
  if (s == "categorical") return ColumnRole::Categorical;
  if (s == "label") return ColumnRole::Label;
  if (s == "ignore") return ColumnRole::Ignore;
  throw std::invalid_argument("unknown column role '" + s + "'");
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

Table read_table(std::istream& in, char delim) {
  Table t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (t.header.empty()) {
      t.header = split_fields(line, delim);
      continue;
    }
    auto fields = split_fields(line, delim);
    if (fields.size() != t.header.size()) {
      std::ostringstream msg;
      msg << "expected " << t.header.size() << " fields, found " << fields.size();
      throw ParseError(line_no, "", msg.str());
    }
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(line_no);
  }
  if (t.header.empty()) throw ParseError(0, "", "empty file");
  if (t.rows.empty()) throw ParseError(line_no, "", "no data rows");
  return t;
}

std::vector<std::string> sorted_labels(const std::set<std::string>& distinct) {
  std::vector<std::string> labels(distinct.begin(), distinct.end());
  double dummy = 0.0;
  const bool numeric = std::all_of(labels.begin(), labels.end(),
                                   [&](const std::string& s) { return parse_double(s, dummy); });
  if (numeric) {
    std::stable_sort(labels.begin(), labels.end(), [](const std::string& a, const std::string& b) {
      double x = 0.0, y = 0.0;
      parse_double(a, x);
      parse_double(b, y);
      return x < y;
    });
  }
  return labels;
}

TableEncoding fit_encoding(const Table& t, const Schema& schema) {
  TableEncoding enc;
  for (const auto& [name, role] : schema.roles) {
    if (role != ColumnRole::Ignore &&
        std::find(t.header.begin(), t.header.end(), name) == t.header.end())
      throw ParseError(1, name, "schema column missing from header");
  }
  std::size_t label_columns = 0;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    TableEncoding::Column col;
    col.name = t.header[c];
    const auto it = schema.roles.find(col.name);
    col.role = it == schema.roles.end() ? ColumnRole::Ignore : it->second;
    switch (col.role) {
      case ColumnRole::Numeric: {
        FeatureScaling sc;
        sc.active = true;
        sc.min = std::numeric_limits<double>::infinity();
        sc.max = -std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
          double v = 0.0;
          if (!parse_double(t.rows[r][c], v))
            throw ParseError(t.line_numbers[r], col.name, "not a number: '" + t.rows[r][c] + "'");
          sc.min = std::min(sc.min, v);
          sc.max = std::max(sc.max, v);
        }
        enc.feature_names.push_back(col.name);
        enc.scaling.push_back(sc);
        break;
      }
      case ColumnRole::Categorical: {
        std::set<std::string> levels;
        for (const auto& row : t.rows) levels.insert(row[c]);
        col.levels.assign(levels.begin(), levels.end());
        for (const auto& level : col.levels) {
          enc.feature_names.push_back(col.name + "=" + level);
          enc.scaling.push_back(FeatureScaling{});
        }
        break;
      }
      case ColumnRole::Label: {
        ++label_columns;
        std::set<std::string> labels;
        for (const auto& row : t.rows) labels.insert(row[c]);
        enc.class_names = sorted_labels(labels);
        break;
      }
      case ColumnRole::Ignore:
        break;
    }
    enc.columns.push_back(std::move(col));
  }
  if (label_columns != 1) throw ParseError(1, "", "schema must name exactly one label column");
  if (enc.feature_names.empty()) throw ParseError(1, "", "schema names no feature columns");
  return enc;
}

Dataset encode(const Table& t, const TableEncoding& enc) {
  // Locate each encoded column in this table's header by name.
  std::vector<std::size_t> where(enc.columns.size());
  for (std::size_t i = 0; i < enc.columns.size(); ++i) {
    if (enc.columns[i].role == ColumnRole::Ignore) continue;
    const auto it = std::find(t.header.begin(), t.header.end(), enc.columns[i].name);
    if (it == t.header.end()) throw ParseError(1, enc.columns[i].name, "column missing from header");
    where[i] = static_cast<std::size_t>(it - t.header.begin());
  }
  std::unordered_map<std::string, int> class_of;
  for (std::size_t k = 0; k < enc.class_names.size(); ++k) class_of[enc.class_names[k]] = static_cast<int>(k);

  Dataset ds;
  ds.n_classes = enc.class_names.size();
  ds.n_features = enc.feature_names.size();
  ds.feature_names = enc.feature_names;
  ds.scaling = enc.scaling;
  ds.examples.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    Example ex;
    ex.features.reserve(ds.n_features);
    for (std::size_t i = 0; i < enc.columns.size(); ++i) {
      const auto& col = enc.columns[i];
      const std::string& cell = row[where[i]];
      switch (col.role) {
        case ColumnRole::Numeric: {
          double v = 0.0;
          if (!parse_double(cell, v))
            throw ParseError(t.line_numbers[r], col.name, "not a number: '" + cell + "'");
          ex.features.push_back(v);
          break;
        }
        case ColumnRole::Categorical:
          for (const auto& level : col.levels) ex.features.push_back(cell == level ? 1.0 : 0.0);
          break;
        case ColumnRole::Label: {
          const auto it = class_of.find(cell);
          if (it == class_of.end())
            throw ParseError(t.line_numbers[r], col.name, "unknown label '" + cell + "'");
          ex.label = it->second;
          break;
        }
        case ColumnRole::Ignore:
          break;
      }
    }
    ds.examples.push_back(std::move(ex));
  }
  apply_scaling(ds.examples, ds.scaling);
  return ds;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

Schema Schema::parse(std::istream& in) {
  Schema schema;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "", "expected 'column = role'");
    const std::string key = trim(body.substr(0, eq));
    try {
      schema.roles[key] = parse_role(trim(body.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, key, e.what());
    }
  }
  return schema;
}

Schema Schema::load(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse(in);
}

double FeatureScaling::apply(double x) const {
  if (!active) return x;
  if (!(max > min)) return 0.5;
  return std::clamp((x - min) / (max - min), 0.0, 1.0);
}

Dataset read_delimited(std::istream& in, const Schema& schema, char delimiter,
                       TableEncoding* encoding_out) {
  const Table t = read_table(in, delimiter);
  TableEncoding enc = fit_encoding(t, schema);
  Dataset ds = encode(t, enc);
  if (encoding_out) *encoding_out = std::move(enc);
  return ds;
}

Dataset load_delimited(const std::filesystem::path& path, const Schema& schema, char delimiter,
                       TableEncoding* encoding_out) {
  auto in = open_in(path);
  return read_delimited(in, schema, delimiter, encoding_out);
}

Dataset load_delimited(const std::filesystem::path& path, const TableEncoding& encoding,
                       char delimiter) {
  auto in = open_in(path);
  return encode(read_table(in, delimiter), encoding);
}

std::vector<FeatureScaling> fit_scaling(const std::vector<Example>& examples,
                                        const std::vector<FeatureScaling>& like) {
  std::vector<FeatureScaling> out(like.size());
  for (std::size_t j = 0; j < like.size(); ++j) {
    out[j].active = like[j].active;
    if (!out[j].active) continue;
    out[j].min = std::numeric_limits<double>::infinity();
    out[j].max = -std::numeric_limits<double>::infinity();
    for (const auto& ex : examples) {
      out[j].min = std::min(out[j].min, ex.features[j]);
      out[j].max = std::max(out[j].max, ex.features[j]);
    }
  }
  return out;
}

void apply_scaling(std::vector<Example>& examples, const std::vector<FeatureScaling>& scaling) {
  for (auto& ex : examples)
    for (std::size_t j = 0; j < scaling.size(); ++j) ex.features[j] = scaling[j].apply(ex.features[j]);
}

Split split_shuffle(const Dataset& ds, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw DomainError("split_shuffle: test fraction must lie in (0, 1)");
  const std::size_t n = ds.size();
  const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
  if (n_test == 0 || n_test >= n) throw DomainError("split_shuffle: split leaves an empty side");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(order[i], order[pick(rng)]);
  }

  Split out;
  for (Dataset* part : {&out.train, &out.test}) {
    part->n_classes = ds.n_classes;
    part->n_features = ds.n_features;
    part->feature_names = ds.feature_names;
  }
  const std::size_t n_train = n - n_test;
  for (std::size_t i = 0; i < n; ++i)
    (i < n_train ? out.train : out.test).examples.push_back(ds.examples[order[i]]);

  // Refit on train in the current feature units, then record the composed
  // map back to the original units.
  const auto refit = fit_scaling(out.train.examples, ds.scaling);
  apply_scaling(out.train.examples, refit);
  apply_scaling(out.test.examples, refit);
  std::vector<FeatureScaling> composed = ds.scaling;
  for (std::size_t j = 0; j < composed.size(); ++j) {
    if (!composed[j].active || !(composed[j].max > composed[j].min)) continue;
    const double span = composed[j].max - composed[j].min;
    const double lo = composed[j].min + refit[j].min * span;
    const double hi = composed[j].min + refit[j].max * span;
    composed[j].min = lo;
    composed[j].max = hi;
  }
  out.train.scaling = composed;
  out.test.scaling = composed;
  return out;
}

void save_normalized(const Dataset& ds, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "# spectral-normalized classes=" << ds.n_classes << "\n";
  for (const auto& name : ds.feature_names) out << name << ",";
  out << "label,target\n";
  for (const auto& ex : ds.examples) {
    for (double v : ex.features) out << format_double(v) << ",";
    out << ex.label << "," << format_double(ex.target) << "\n";
  }
}

Dataset load_normalized(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  Dataset ds;
  if (!std::getline(in, line) || line.rfind("# spectral-normalized classes=", 0) != 0)
    throw ParseError(1, "", "missing normalized-format marker");
  ds.n_classes = std::stoul(line.substr(line.find('=') + 1));
  if (!std::getline(in, line)) throw ParseError(2, "", "missing header");
  auto header = split_fields(line, ',');
  if (header.size() < 3 || header[header.size() - 2] != "label" || header.back() != "target")
    throw ParseError(2, "", "header must end with label,target");
  ds.feature_names.assign(header.begin(), header.end() - 2);
  ds.n_features = ds.feature_names.size();
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line, ',');
    if (fields.size() != header.size()) throw ParseError(line_no, "", "wrong field count");
    Example ex;
    ex.features.resize(ds.n_features);
    for (std::size_t j = 0; j < ds.n_features; ++j)
      if (!parse_double(fields[j], ex.features[j])) throw ParseError(line_no, header[j], "not a number");
    double label = 0.0;
    if (!parse_double(fields[ds.n_features], label)) throw ParseError(line_no, "label", "not a number");
    ex.label = static_cast<int>(label);
    if (!parse_double(fields.back(), ex.target)) throw ParseError(line_no, "target", "not a number");
    ds.examples.push_back(std::move(ex));
  }
  ds.scaling.assign(ds.n_features, FeatureScaling{});
  return ds;
}

void convert_libsvm(const std::filesystem::path& in_path, const std::filesystem::path& out_csv,
                    const std::filesystem::path& out_schema) {
  auto in = open_in(in_path);
  std::vector<std::string> labels;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;
  std::size_t p = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    std::istringstream tokens(hash == std::string::npos ? line : line.substr(0, hash));
    std::string label;
    if (!(tokens >> label)) continue;
    std::vector<std::pair<std::size_t, double>> entries;
    std::string tok;
    while (tokens >> tok) {
      const auto colon = tok.find(':');
      std::size_t idx = 0;
      double v = 0.0;
      const auto r = std::from_chars(tok.data(), tok.data() + (colon == std::string::npos ? 0 : colon), idx);
      if (colon == std::string::npos || r.ec != std::errc() || idx == 0 ||
          !parse_double(tok.substr(colon + 1), v))
        throw ParseError(line_no, "", "bad libsvm entry '" + tok + "'");
      entries.emplace_back(idx, v);
      p = std::max(p, idx);
    }
    labels.push_back(label);
    rows.push_back(std::move(entries));
  }
  if (rows.empty()) throw ParseError(line_no, "", "empty file");
  if (p == 0) throw ParseError(line_no, "", "no feature entries");

  auto csv = open_out(out_csv);
  for (std::size_t j = 1; j <= p; ++j) csv << "f" << j << ",";
  csv << "label\n";
  std::vector<double> dense(p);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::fill(dense.begin(), dense.end(), 0.0);
    for (const auto& [idx, v] : rows[r]) dense[idx - 1] = v;
    for (double v : dense) csv << format_double(v) << ",";
    csv << labels[r] << "\n";
  }
  auto schema = open_out(out_schema);
  for (std::size_t j = 1; j <= p; ++j) schema << "f" << j << " = numeric\n";
  schema << "label = label\n";
}

SyntheticKind parse_synthetic_kind(const std::string& name) {
  if (name == "two-gaussian") return SyntheticKind::TwoGaussian;
  if (name == "linear-lognormal") return SyntheticKind::LinearLognormal;
  throw std::invalid_argument("unknown synthetic task '" + name +
                              "' (expected two-gaussian or linear-lognormal)");
}

std::function<Example(Rng&)> synthetic_generator(SyntheticKind kind, const SyntheticParams& params) {
  if (params.p == 0) throw DomainError("synthetic task needs p >= 1");
  switch (kind) {
    case SyntheticKind::TwoGaussian: {
      if (params.p < 2) throw DomainError("two-gaussian task needs p >= 2");
      // Means +-m with m along (1, -1, 0, ...)/sqrt(2), |m_+ - m_-| = separation.
      const double shift = 0.5 * params.separation / std::sqrt(2.0);
      const std::size_t p = params.p;
      return [shift, p](Rng& rng) {
        std::normal_distribution<double> normal(0.0, 1.0);
        std::bernoulli_distribution coin(0.5);
        Example ex;
        ex.label = coin(rng) ? 1 : 0;
        const double sign = ex.label == 1 ? 1.0 : -1.0;
        ex.features.resize(p);
        for (double& x : ex.features) x = normal(rng);
        ex.features[0] += sign * shift;
        ex.features[1] -= sign * shift;
        return ex;
      };
    }
    case SyntheticKind::LinearLognormal: {
      std::vector<double> w_star = params.w_star;
      if (w_star.empty()) {
        w_star.resize(params.p);
        for (std::size_t j = 0; j < params.p; ++j) w_star[j] = j % 2 == 0 ? 1.0 : -1.0;
      }
      if (w_star.size() != params.p) throw DomainError("w_star must have p entries");
      if (!(params.noise_sigma > 0.0)) throw DomainError("noise sigma must be positive");
      const double mu = params.noise_mu;
      const double sigma = params.noise_sigma;
      return [w_star, mu, sigma](Rng& rng) {
        std::normal_distribution<double> normal(0.0, 1.0);
        Example ex;
        ex.features.resize(w_star.size());
        for (double& x : ex.features) x = normal(rng);
        ex.target = vec::dot(w_star, ex.features) + std::exp(mu + sigma * normal(rng));
        return ex;
      };
    }
  }
  throw DomainError("unknown synthetic kind");
}

Dataset make_synthetic(SyntheticKind kind, const SyntheticParams& params, std::uint64_t seed) {
  auto gen = synthetic_generator(kind, params);
  Rng rng(seed);
  Dataset ds;
  ds.n_features = params.p;
  for (std::size_t j = 0; j < params.p; ++j) ds.feature_names.push_back("x" + std::to_string(j + 1));
  ds.examples.reserve(params.n);
  for (std::size_t i = 0; i < params.n; ++i) ds.examples.push_back(gen(rng));
  if (kind == SyntheticKind::TwoGaussian) {
    ds.n_classes = 2;
    ds.scaling = fit_scaling(ds.examples, std::vector<FeatureScaling>(params.p, FeatureScaling{0, 1, true}));
    apply_scaling(ds.examples, ds.scaling);
  } else {
    ds.n_classes = 0;
    ds.scaling.assign(params.p, FeatureScaling{});
  }
  return ds;
}

}  // namespace spectral
