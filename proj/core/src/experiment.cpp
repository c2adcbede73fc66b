#include "spectral/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <mutex>
#include <thread>
#include <tuple>

#include "spectral/boost.hpp"
#include "spectral/data.hpp"
#include "spectral/losses.hpp"
#include "spectral/risk.hpp"
#include "spectral/sampling.hpp"

namespace spectral::experiment {

namespace {

constexpr std::uint64_t kDataStream = 0x64617461;  // synthetic data generation
constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kInitStream = 2;
constexpr std::uint64_t kEpochStream = 3;
constexpr std::uint64_t kMethodStream = 16;
constexpr std::uint64_t kBoostStream = 32;

std::string_view split_name(Split s) { return s == Split::Train ? "train" : "test"; }
std::string_view metric_name(Metric m) { return m == Metric::SpectralRisk ? "spectral_risk" : "misclass"; }

Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  throw std::runtime_error("unknown split '" + std::string(s) + "'");
}

Metric parse_metric(std::string_view s) {
  if (s == "spectral_risk") return Metric::SpectralRisk;
  if (s == "misclass") return Metric::Misclass;
  throw std::runtime_error("unknown metric '" + std::string(s) + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty() || !std::isfinite(x))
    throw std::invalid_argument(key + ": expected a number, got '" + v + "'");
  return x;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  std::uint64_t x = 0;
  try {
    if (!v.empty() && v[0] != '-') x = std::stoull(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty())
    throw std::invalid_argument(key + ": expected a non-negative integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument(key + ": expected true or false, got '" + v + "'");
}

struct Metrics {
  double risk[2];
  double misclass[2];
};

Metrics evaluate(const LossModel& model, const ParamVector& w, const Spectrum& spec,
                 const Dataset& train, const Dataset& test) {
  Metrics m{};
  const Dataset* parts[2] = {&train, &test};
  for (int s = 0; s < 2; ++s) {
    m.risk[s] = plugin_spectral_risk(losses_on(model, w, parts[s]->examples), spec);
    m.misclass[s] = misclassification_rate(model, w, parts[s]->examples);
  }
  return m;
}

struct TrialOutput {
  std::vector<TrajectoryRecord> records;
  std::vector<BoostTrialRow> boost_rows;
  std::string log;
};

std::size_t method_rank(Method m) { return static_cast<std::size_t>(m); }

TrialOutput run_trial(const Config& cfg, const Dataset& data, const Spectrum& spec, std::size_t trial) {
  TrialOutput out;
  std::ostringstream log;
  const Split split_ids[2] = {Split::Train, Split::Test};

  const auto parts = split_shuffle(data, cfg.test_fraction, derive_seed(cfg.seed, trial, kSplitStream));
  const Dataset& train = parts.train;
  const Dataset& test = parts.test;
  const LossModel model = LossModel::logistic(data.n_classes, data.n_features);
  const std::size_t d = model.dim();
  const std::size_t n = train.size();
  const EuclideanBall geom(cfg.radius);

  Rng init_rng(derive_seed(cfg.seed, trial, kInitStream));
  ParamVector w0 = sample_ball(d, init_rng);
  vec::scale(std::min(1.0, cfg.radius), w0);

  log << "[trial " << trial << "] n_train = " << n << ", n_test = " << test.size() << "\n";

  const Metrics initial = evaluate(model, w0, spec, train, test);
  auto emit = [&](std::size_t epoch, Method method, const Metrics& m) {
    for (int s = 0; s < 2; ++s) {
      out.records.push_back({trial, epoch, split_ids[s], Metric::SpectralRisk, method, m.risk[s]});
      out.records.push_back({trial, epoch, split_ids[s], Metric::Misclass, method, m.misclass[s]});
    }
  };

  for (Method method : cfg.methods) {
    emit(0, method, initial);
    if (cfg.epochs == 0) continue;

    const std::size_t m_anc = cfg.ancillary ? *cfg.ancillary : allocate_budget(n).ancillary;
    const std::size_t steps = method == Method::Off ? n : n / (m_anc + 1);
    if (steps == 0)
      throw BudgetError("training set too small for one step with ancillary size " + std::to_string(m_anc));

    double alpha = 0.0;
    if (cfg.step_size) {
      alpha = *cfg.step_size;
    } else if (cfg.theory_steps && method == Method::Default) {
      TheoryConstants c = cfg.theory;
      c.lambda_sigma = spec.lipschitz();
      c.bregman_diameter = geom.bregman_diameter();
      c.mu = geom.strong_convexity();
      alpha = theory_step_size(c, steps * cfg.epochs, cfg.smoothing_delta, d);
    } else {
      alpha = default_step_size(method, n, d, cfg.gamma);
    }
    log << "[trial " << trial << "] " << method_name(method) << ": alpha = " << format_double(alpha)
        << ", steps/epoch = " << steps;
    if (method != Method::Off) log << ", M = " << m_anc;
    log << "\n";

    SpectralDescent engine(model, spec, geom, method, alpha, cfg.smoothing_delta, m_anc, w0,
                           derive_seed(cfg.seed, trial, kMethodStream + method_rank(method)));
    EpochSource source(train.examples, derive_seed(cfg.seed, trial, kEpochStream));
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
      if (epoch > 1) source.begin_epoch();
      engine.run(source, steps);
      emit(epoch, method, evaluate(model, engine.current(), spec, train, test));
    }
  }

  if (cfg.boost) {
    RunConfig rc;
    rc.method = Method::Default;
    rc.smoothing_delta = cfg.smoothing_delta;
    rc.ancillary_size = cfg.ancillary;
    rc.seed = derive_seed(cfg.seed, trial, kBoostStream);
    const BoostPlan plan = BoostPlan::make(n, candidates_k(cfg.delta));
    rc.step_size = cfg.step_size ? *cfg.step_size
                                 : default_step_size(Method::Default, plan.per_candidate_budget, d, cfg.gamma);
    const BoostResult br = run_boosted(model, train.examples, spec, geom, rc, cfg.delta, w0);
    log << "[trial " << trial << "] boost: k = " << br.plan.k
        << ", per-candidate budget = " << br.plan.per_candidate_budget
        << ", holdout = " << br.plan.holdout_cdf_size << " + " << br.plan.holdout_estimate_size
        << ", s2 = " << format_double(br.s2) << ", epsilon2 = " << format_double(br.epsilon2) << "\n";
    for (const auto& w : br.warnings) log << "[trial " << trial << "] warning: " << w << "\n";
    for (std::size_t j = 0; j < br.candidates.size(); ++j) {
      BoostTrialRow row;
      row.trial = trial;
      row.candidate = j;
      row.estimate = br.estimates[j];
      row.selected = j == br.selected.index;
      row.test_spectral_risk = plugin_spectral_risk(losses_on(model, br.candidates[j], test.examples), spec);
      row.test_misclass = misclassification_rate(model, br.candidates[j], test.examples);
      log << "[trial " << trial << "]   candidate " << j << ": R_hat = " << format_double(row.estimate)
          << (row.selected ? "  (selected)" : "") << "\n";
      out.boost_rows.push_back(row);
    }
  }

  std::stable_sort(out.records.begin(), out.records.end(), [](const auto& a, const auto& b) {
    return std::tuple(a.epoch, a.split, a.metric, method_rank(a.method)) <
           std::tuple(b.epoch, b.split, b.metric, method_rank(b.method));
  });
  out.log = log.str();
  return out;
}

Dataset load_data(const Config& cfg) {
  if (!cfg.data.empty()) {
    return load_delimited(cfg.data, Schema::load(cfg.schema), cfg.delimiter);
  }
  SyntheticParams params;
  params.n = cfg.synthetic_n;
  params.p = cfg.synthetic_p;
  params.separation = cfg.separation;
  const SyntheticKind kind = parse_synthetic_kind(cfg.synthetic);
  if (kind != SyntheticKind::TwoGaussian)
    throw std::invalid_argument("synthetic: experiments need a classification task (two-gaussian)");
  return make_synthetic(kind, params, derive_seed(cfg.seed, kDataStream));
}

}  // namespace

void Config::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "data") {
    data = v;
  } else if (key == "schema") {
    schema = v;
  } else if (key == "delimiter") {
    if (v == "tab" || v == "\\t") delimiter = '\t';
    else if (v.size() == 1) delimiter = v[0];
    else throw std::invalid_argument("delimiter: expected one character or 'tab'");
  } else if (key == "synthetic") {
    parse_synthetic_kind(v);
    synthetic = v;
  } else if (key == "synthetic-n") {
    synthetic_n = to_u64(key, v);
  } else if (key == "synthetic-p") {
    synthetic_p = to_u64(key, v);
  } else if (key == "separation") {
    separation = to_double(key, v);
  } else if (key == "methods") {
    std::vector<Method> ms;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const Method m = parse_method(trim(item));
      if (std::find(ms.begin(), ms.end(), m) != ms.end())
        throw std::invalid_argument("methods: '" + trim(item) + "' listed twice");
      ms.push_back(m);
    }
    if (ms.empty()) throw std::invalid_argument("methods: empty list");
    std::sort(ms.begin(), ms.end(), [](Method a, Method b) { return method_rank(a) < method_rank(b); });
    methods = ms;
  } else if (key == "spectrum") {
    if (v != "exp" && v != "cvar" && v != "uniform")
      throw std::invalid_argument("spectrum: expected exp, cvar or uniform, got '" + v + "'");
    spectrum = v;
  } else if (key == "spec-c") {
    spec_c = to_double(key, v);
  } else if (key == "spec-beta") {
    spec_beta = to_double(key, v);
  } else if (key == "epochs") {
    epochs = to_u64(key, v);
  } else if (key == "trials") {
    trials = to_u64(key, v);
  } else if (key == "seed") {
    seed = to_u64(key, v);
  } else if (key == "test-fraction") {
    test_fraction = to_double(key, v);
  } else if (key == "radius") {
    radius = to_double(key, v);
  } else if (key == "gamma") {
    gamma = to_double(key, v);
  } else if (key == "smoothing-delta") {
    smoothing_delta = to_double(key, v);
  } else if (key == "ancillary") {
    if (v == "auto") ancillary.reset();
    else ancillary = to_u64(key, v);
  } else if (key == "step-size") {
    theory_steps = false;
    step_size.reset();
    if (v == "theory") theory_steps = true;
    else if (v != "auto") step_size = to_double(key, v);
  } else if (key == "theory-lambda-risk") {
    theory.lambda_risk = to_double(key, v);
  } else if (key == "theory-s1") {
    theory.s1 = to_double(key, v);
  } else if (key == "theory-s2") {
    theory.s2 = to_double(key, v);
  } else if (key == "boost") {
    boost = to_bool(key, v);
  } else if (key == "delta") {
    delta = to_double(key, v);
  } else if (key == "jobs") {
    jobs = to_u64(key, v);
  } else if (key == "out") {
    out = v;
  } else {
    throw std::invalid_argument("unknown setting '" + key + "'");
  }
}

std::map<std::string, std::string> Config::read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    kv[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
  }
  return kv;
}

Spectrum Config::make_spectrum() const {
  if (spectrum == "exp") return Spectrum::exponential(spec_c);
  if (spectrum == "cvar") return Spectrum::cvar(spec_beta);
  return Spectrum::uniform();
}

void Config::validate() const {
  if (data.empty() == synthetic.empty())
    throw std::invalid_argument("give exactly one of --data (with --schema) or --synthetic");
  if (!data.empty() && schema.empty()) throw std::invalid_argument("--data needs --schema");
  if (trials == 0) throw std::invalid_argument("trials must be positive");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw std::invalid_argument("test-fraction must lie in (0, 1)");
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (!(smoothing_delta > 0.0 && smoothing_delta < 1.0))
    throw std::invalid_argument("smoothing-delta must lie in (0, 1)");
  if (ancillary && *ancillary < 2) throw std::invalid_argument("ancillary must be at least 2");
  if (step_size && !(*step_size > 0.0)) throw std::invalid_argument("step-size must be positive");
  if (boost && !(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (jobs == 0) throw std::invalid_argument("jobs must be positive");
  const Spectrum spec = make_spectrum();
  if (!spec.differentiable() && std::find(methods.begin(), methods.end(), Method::Fast) != methods.end())
    throw std::invalid_argument("the fast method needs a differentiable spectrum; drop it or use exp/uniform");
  if (theory_steps && !spec.lipschitz())
    throw std::invalid_argument("step-size theory needs a Lipschitz spectrum (not cvar)");
}

std::string Config::dump() const {
  std::ostringstream out;
  if (!data.empty()) out << "data = " << data << "\nschema = " << schema << "\n";
  else out << "synthetic = " << synthetic << "\nsynthetic-n = " << synthetic_n
           << "\nsynthetic-p = " << synthetic_p << "\nseparation = " << format_double(separation) << "\n";
  out << "methods = ";
  for (std::size_t i = 0; i < methods.size(); ++i) out << (i ? "," : "") << method_name(methods[i]);
  out << "\nspectrum = " << make_spectrum().describe() << "\nepochs = " << epochs
      << "\ntrials = " << trials << "\nseed = " << seed
      << "\ntest-fraction = " << format_double(test_fraction) << "\nradius = " << format_double(radius)
      << "\ngamma = " << format_double(gamma) << "\nsmoothing-delta = " << format_double(smoothing_delta)
      << "\nancillary = " << (ancillary ? std::to_string(*ancillary) : "auto")
      << "\nstep-size = " << (theory_steps ? "theory" : step_size ? format_double(*step_size) : "auto")
      << "\nboost = " << (boost ? "true" : "false");
  if (boost) out << "\ndelta = " << format_double(delta);
  out << "\n";
  return out.str();
}

Result run_experiment(const Config& cfg) {
  cfg.validate();
  const Dataset data = load_data(cfg);
  if (data.n_classes < 2) throw std::invalid_argument("dataset has fewer than two classes");
  const Spectrum spec = cfg.make_spectrum();

  std::vector<TrialOutput> trials(cfg.trials);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t t = next++; t < cfg.trials; t = next++) {
      try {
        trials[t] = run_trial(cfg, data, spec, t);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t i = 1; i < std::min(cfg.jobs, cfg.trials); ++i) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);

  Result result;
  std::ostringstream log;
  log << "# resolved configuration\n" << cfg.dump() << "\n# data\n"
      << "examples = " << data.size() << "\nclasses = " << data.n_classes
      << "\nfeatures = " << data.n_features << "\nparameters = " << data.n_classes * data.n_features << "\n";

  const EuclideanBall geom(cfg.radius);
  const auto n_train = data.size() - static_cast<std::size_t>(
                                         std::llround(static_cast<double>(data.size()) * cfg.test_fraction));
  log << "\n# diagnostics\n"
      << "Delta = " << format_double(geom.diameter()) << "\n"
      << "Delta_Phi = " << format_double(geom.bregman_diameter()) << "\n"
      << "lambda_sigma = " << (spec.lipschitz() ? format_double(*spec.lipschitz()) : "unbounded") << "\n"
      << "sigma_bar = " << format_double(spec.upper_bound()) << "\n";
  if (n_train >= 4) {
    const Budget b = allocate_budget(n_train);
    log << "allocated M = " << b.ancillary << ", T = " << b.steps << " (budget n = " << n_train << ")\n";
  }
  log << "\n# trials\n";
  for (auto& t : trials) {
    result.records.insert(result.records.end(), t.records.begin(), t.records.end());
    result.boost_rows.insert(result.boost_rows.end(), t.boost_rows.begin(), t.boost_rows.end());
    log << t.log;
  }
  result.runlog = log.str();
  return result;
}

void write_trajectories(std::ostream& out, const std::vector<TrajectoryRecord>& records) {
  out << kTrajectoryHeader << "\n";
  for (const auto& r : records) {
    if (!std::isfinite(r.value)) throw std::runtime_error("non-finite trajectory value");
    out << r.trial << "," << r.epoch << "," << split_name(r.split) << "," << metric_name(r.metric) << ","
        << method_name(r.method) << "," << format_double(r.value) << "\n";
  }
}

std::vector<TrajectoryRecord> read_trajectories(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trajectories: empty input");
  if (trim(line) != kTrajectoryHeader)
    throw std::runtime_error("trajectories: header must be '" + std::string(kTrajectoryHeader) + "'");
  std::vector<TrajectoryRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(trim(item));
    try {
      if (f.size() != 6) throw std::runtime_error("expected 6 fields");
      TrajectoryRecord r;
      r.trial = to_u64("trial", f[0]);
      r.epoch = to_u64("epoch", f[1]);
      r.split = parse_split(f[2]);
      r.metric = parse_metric(f[3]);
      r.method = parse_method(f[4]);
      r.value = to_double("value", f[5]);
      out.push_back(r);
    } catch (const std::exception& e) {
      throw std::runtime_error("trajectories line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<TrajectoryRecord>& records) {
  if (records.empty()) throw std::runtime_error("summarize: no records");
  std::map<std::tuple<std::size_t, std::size_t, Split, Metric>, std::vector<double>> groups;
  for (const auto& r : records) groups[{method_rank(r.method), r.epoch, r.split, r.metric}].push_back(r.value);
  std::vector<SummaryRow> rows;
  for (const auto& [key, values] : groups) {
    SummaryRow row;
    row.method = static_cast<Method>(std::get<0>(key));
    row.epoch = std::get<1>(key);
    row.split = std::get<2>(key);
    row.metric = std::get<3>(key);
    const double n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    row.mean = sum / n;
    double ss = 0.0;
    for (double v : values) ss += (v - row.mean) * (v - row.mean);
    row.std = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

std::vector<SummaryRow> summarize_files(const std::vector<std::filesystem::path>& paths) {
  if (paths.empty()) throw std::runtime_error("summarize: no input files");
  std::vector<TrajectoryRecord> all;
  for (const auto& p : paths) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    try {
      auto recs = read_trajectories(in);
      all.insert(all.end(), recs.begin(), recs.end());
    } catch (const std::exception& e) {
      throw std::runtime_error(p.string() + ": " + e.what());
    }
  }
  return summarize(all);
}

void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << kSummaryHeader << "\n";
  for (const auto& r : rows)
    out << method_name(r.method) << "," << r.epoch << "," << split_name(r.split) << ","
        << metric_name(r.metric) << "," << format_double(r.mean) << "," << format_double(r.std) << "\n";
}

void write_outputs(const Config& cfg, const Result& result) {
  const std::filesystem::path dir(cfg.out);
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("trajectories.csv");
    write_trajectories(f, result.records);
  }
  {
    auto f = open("summary.csv");
    write_summary(f, summarize(result.records));
  }
  {
    auto f = open("runlog.txt");
    f << result.runlog;
  }
  if (!result.boost_rows.empty()) {
    auto f = open("boost.csv");
    f << "trial,candidate,estimate,selected,test_spectral_risk,test_misclass\n";
    for (const auto& r : result.boost_rows)
      f << r.trial << "," << r.candidate << "," << format_double(r.estimate) << "," << (r.selected ? 1 : 0)
        << "," << format_double(r.test_spectral_risk) << "," << format_double(r.test_misclass) << "\n";
  }
}

}  // namespace spectral::experiment
