#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ldpnb/data.hpp"
#include "ldpnb/errors.hpp"
#include "ldpnb/freq.hpp"
#include "ldpnb/model.hpp"
#include "ldpnb/pipeline.hpp"
#include "ldpnb/random.hpp"

namespace ldpnb {

struct DatasetConfig {
  std::string name;
  std::string path;
  CsvOptions csv;
};

struct StrategyConfig {
  std::string label;
  PreprocessSpec preprocess;
  bool gaussian = false;
  int approach = 3;
  bool hide_labels = true;
};

struct SweepConfig {
  DatasetConfig dataset;
  std::vector<MechanismKind> mechanisms;
  std::vector<double> epsilons;
  double theta = 0.25;
  std::vector<StrategyConfig> strategies;
  AssignmentStrategy assignment = AssignmentStrategy::kRoundRobin;
  double split_fraction = 0.8;
  int repetitions = 1;
  std::uint64_t seed = 1;
  int threads = 1;
};

// One sweep cell, or a per-strategy non-private reference row (mechanism
// "reference", epsilon = infinity).
struct ResultRow {
  std::string dataset;
  std::string mechanism;
  std::string strategy;
  double epsilon = 0.0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  int reps = 0;
  double reference_accuracy = 0.0;
};

struct SweepResult {
  std::vector<ResultRow> rows;
  std::vector<std::string> warnings;
};

// Strategy labels name the preprocessing and training path:
//   discrete            categorical features as-is
//   ewd<B>              equal-width discretization into B bins
//   pca<R>+ewd<B>       PCA to R dims, then B bins
//   dca<R>+ewd<B>       discriminant projection to R dims, then B bins
//   gauss-a<1|2|3>      Gaussian path, approaches 1-3, class-masked reports
//   gauss-a<N>-visible  Gaussian path with labels sent in the clear
// Dimensionality-reduction prefixes also compose with gauss-a<N>.
inline StrategyConfig parse_strategy(const std::string& label) {
  StrategyConfig out;
  out.label = label;
  std::string rest = label;

  auto bad = [&](const std::string& why) {
    return ConfigError("strategy '" + label + "': " + why);
  };
  auto parse_int = [&](const std::string& s, const char* what) {
    if (s.empty()) throw bad(std::string("missing ") + what);
    for (char c : s) {
      if (!std::isdigit(static_cast<unsigned char>(c))) throw bad(std::string("bad ") + what + " '" + s + "'");
    }
    try {
      return std::stoi(s);
    } catch (const std::exception&) {
      throw bad(std::string("bad ") + what + " '" + s + "'");
    }
  };

  const std::size_t plus = rest.find('+');
  if (plus != std::string::npos) {
    const std::string head = rest.substr(0, plus);
    rest = rest.substr(plus + 1);
    if (head.rfind("pca", 0) == 0) {
      out.preprocess.dimred = DimredMethod::kPca;
      out.preprocess.dimred_dims = parse_int(head.substr(3), "projection dimension");
    } else if (head.rfind("dca", 0) == 0) {
      out.preprocess.dimred = DimredMethod::kDca;
      out.preprocess.dimred_dims = parse_int(head.substr(3), "projection dimension");
    } else {
      throw bad("unknown stage '" + head + "'");
    }
  }

  if (rest == "discrete") {
    out.preprocess.path = ContinuousPath::kNone;
    if (out.preprocess.dimred.has_value()) throw bad("'discrete' does not take a projection stage");
  } else if (rest.rfind("ewd", 0) == 0) {
    out.preprocess.path = ContinuousPath::kDiscretize;
    out.preprocess.bins = parse_int(rest.substr(3), "bin count");
    if (out.preprocess.bins < 2) throw bad("bin count must be at least 2");
  } else if (rest.rfind("gauss-a", 0) == 0) {
    out.preprocess.path = ContinuousPath::kGaussian;
    out.gaussian = true;
    std::string tail = rest.substr(7);
    const std::string visible = "-visible";
    if (tail.size() > visible.size() && tail.compare(tail.size() - visible.size(), visible.size(), visible) == 0) {
      out.hide_labels = false;
      tail = tail.substr(0, tail.size() - visible.size());
    }
    out.approach = parse_int(tail, "approach");
    if (out.approach < 1 || out.approach > 3) throw bad("approach must be 1, 2, or 3");
  } else {
    throw bad("unrecognized");
  }
  return out;
}

inline MechanismKind parse_mechanism(std::string name) {
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (name == "DE") return MechanismKind::DE;
  if (name == "SUE") return MechanismKind::SUE;
  if (name == "OUE") return MechanismKind::OUE;
  if (name == "SHE") return MechanismKind::SHE;
  if (name == "THE") return MechanismKind::THE;
  throw ConfigError("unknown mechanism '" + name + "' (expected DE, SUE, OUE, SHE, or THE)");
}

namespace detail {

inline std::string dirname_of(const std::string& path) {
  const std::string dir = std::filesystem::path(path).parent_path().string();
  return dir.empty() ? "." : dir;
}

inline std::string join_path(const std::string& base, const std::string& rel) {
  const std::filesystem::path p(rel);
  if (p.is_absolute() || base.empty() || base == ".") return rel;
  return (std::filesystem::path(base) / p).string();
}

template <typename T>
T get_field(const nlohmann::json& j, const std::string& path, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + key + ": " + e.what());
  }
}

template <typename T>
T get_field_or(const nlohmann::json& j, const std::string& path, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return get_field<T>(j, path, key);
}

}  // namespace detail

inline void validate_sweep_config(const SweepConfig& cfg) {
  if (cfg.dataset.path.empty()) throw ConfigError("dataset.path: must not be empty");
  if (cfg.mechanisms.empty()) throw ConfigError("mechanisms: must not be empty");
  if (cfg.epsilons.empty()) throw ConfigError("epsilons: must not be empty");
  for (std::size_t i = 0; i < cfg.epsilons.size(); ++i) {
    if (!(cfg.epsilons[i] > 0.0) || !std::isfinite(cfg.epsilons[i])) {
      throw ConfigError("epsilons[" + std::to_string(i) + "]: must be a positive finite number");
    }
  }
  if (cfg.strategies.empty()) throw ConfigError("strategies: must not be empty");
  const bool uses_the = std::any_of(cfg.mechanisms.begin(), cfg.mechanisms.end(),
                                    [](MechanismKind m) { return m == MechanismKind::THE; });
  if (uses_the && !(cfg.theta > 0.0 && cfg.theta < 1.0)) {
    throw ConfigError("theta: must lie in (0, 1) when THE is swept");
  }
  if (!(cfg.split_fraction > 0.0 && cfg.split_fraction < 1.0)) {
    throw ConfigError("split_fraction: must lie in (0, 1)");
  }
  if (cfg.repetitions < 1) throw ConfigError("repetitions: must be at least 1");
  if (cfg.threads < 1) throw ConfigError("threads: must be at least 1");
}

// Parses a sweep config from JSON ("//" comments allowed). Relative dataset
// paths resolve against base_dir (pass the config file's directory).
inline SweepConfig parse_sweep_config(const nlohmann::json& j, const std::string& base_dir) {
  using detail::get_field;
  using detail::get_field_or;
  SweepConfig cfg;

  if (!j.contains("dataset") || !j.at("dataset").is_object()) {
    throw ConfigError("dataset: required object");
  }
  const nlohmann::json& ds = j.at("dataset");
  cfg.dataset.path = detail::join_path(base_dir, get_field<std::string>(ds, "dataset.", "path"));
  cfg.dataset.name = get_field_or<std::string>(ds, "dataset.", "name", "");
  const std::string delim = get_field_or<std::string>(ds, "dataset.", "delimiter", ",");
  if (delim.size() != 1) throw ConfigError("dataset.delimiter: must be a single character");
  cfg.dataset.csv.delimiter = delim[0];
  cfg.dataset.csv.has_header = get_field_or<bool>(ds, "dataset.", "has_header", false);
  cfg.dataset.csv.class_column = get_field_or<int>(ds, "dataset.", "class_column", -1);
  cfg.dataset.csv.missing_marker = get_field_or<std::string>(ds, "dataset.", "missing_marker", "?");
  if (ds.contains("continuous_columns")) {
    for (const auto& c : get_field<std::vector<int>>(ds, "dataset.", "continuous_columns")) {
      cfg.dataset.csv.kind_overrides[c] = ColumnKind::kContinuous;
    }
  }
  if (ds.contains("categorical_columns")) {
    for (const auto& c : get_field<std::vector<int>>(ds, "dataset.", "categorical_columns")) {
      cfg.dataset.csv.kind_overrides[c] = ColumnKind::kCategorical;
    }
  }

  for (const auto& name : get_field<std::vector<std::string>>(j, "", "mechanisms")) {
    cfg.mechanisms.push_back(parse_mechanism(name));
  }
  cfg.epsilons = get_field<std::vector<double>>(j, "", "epsilons");
  cfg.theta = get_field_or<double>(j, "", "theta", 0.25);
  for (const auto& label : get_field<std::vector<std::string>>(j, "", "strategies")) {
    cfg.strategies.push_back(parse_strategy(label));
  }
  const std::string assignment = get_field_or<std::string>(j, "", "assignment", "round_robin");
  if (assignment == "round_robin") {
    cfg.assignment = AssignmentStrategy::kRoundRobin;
  } else if (assignment == "uniform_random") {
    cfg.assignment = AssignmentStrategy::kUniformRandom;
  } else {
    throw ConfigError("assignment: expected 'round_robin' or 'uniform_random'");
  }
  cfg.split_fraction = get_field_or<double>(j, "", "split_fraction", 0.8);
  cfg.repetitions = get_field_or<int>(j, "", "repetitions", 1);
  cfg.seed = get_field_or<std::uint64_t>(j, "", "seed", 1);
  cfg.threads = get_field_or<int>(j, "", "threads", 1);
  validate_sweep_config(cfg);
  return cfg;
}

inline SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_sweep_config(j, detail::dirname_of(path));
}

namespace detail {

// Seed lanes keep the split stream (shared across cells of a repetition, so
// every cell sees the same split) apart from per-cell noise streams.
inline constexpr std::uint64_t kSplitLane = 0x73706c6974ULL;

struct CellStats {
  double mean = 0.0;
  double stddev = 0.0;
};

inline CellStats stats_over(const std::vector<double>& xs) {
  CellStats out;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) out.mean += x;
  out.mean /= n;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.stddev = std::sqrt(ss / (n - 1.0));
  }
  return out;
}

}  // namespace detail

// Runs the full sweep over pre-loaded records. For every repetition the
// train/test split is drawn from a stream keyed only by (seed, repetition),
// so all (strategy, mechanism, epsilon) cells of that repetition share the
// split and differ only in mechanism noise.
inline SweepResult run_sweep(const SweepConfig& cfg, const DatasetSchema& schema,
                             const std::vector<Record>& records) {
  validate_sweep_config(cfg);
  const std::size_t ns = cfg.strategies.size();
  const std::size_t nm = cfg.mechanisms.size();
  const std::size_t ne = cfg.epsilons.size();
  const std::size_t nr = static_cast<std::size_t>(cfg.repetitions);

  // acc[s][m][e][r], ref[s][r]: preallocated so worker order cannot matter.
  std::vector<double> acc(ns * nm * ne * nr, 0.0);
  std::vector<double> ref(ns * nr, 0.0);
  auto acc_at = [&](std::size_t s, std::size_t m, std::size_t e, std::size_t r) -> double& {
    return acc[((s * nm + m) * ne + e) * nr + r];
  };

  std::atomic<std::size_t> next_task{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto run_task = [&](std::size_t task) {
    const std::size_t s = task / nr;
    const std::size_t r = task % nr;
    const StrategyConfig& strategy = cfg.strategies[s];

    Rng split_rng(mix_seed(mix_seed(cfg.seed, detail::kSplitLane), r));
    auto [train, test] = split_records(records, cfg.split_fraction, split_rng);
    PreparedSplit prepared = preprocess_split(schema, std::move(train), std::move(test), strategy.preprocess);

    const NaiveBayesModel reference = reference_fit(prepared.train, prepared.schema);
    ref[s * nr + r] = evaluate_accuracy(reference, prepared.test);

    for (std::size_t m = 0; m < nm; ++m) {
      for (std::size_t e = 0; e < ne; ++e) {
        PrivacyParams privacy{cfg.epsilons[e], cfg.theta};
        std::uint64_t noise_seed = cfg.seed;
        for (std::uint64_t lane : {std::uint64_t{1}, s, m, e, r}) noise_seed = mix_seed(noise_seed, lane);
        Rng noise_rng(noise_seed);
        NaiveBayesModel model =
            strategy.gaussian
                ? run_gaussian(prepared.train, prepared.schema,
                               {privacy, cfg.mechanisms[m], strategy.approach, strategy.hide_labels,
                                cfg.assignment},
                               noise_rng)
                : run_discrete(prepared.train, prepared.schema,
                               {privacy, cfg.mechanisms[m], cfg.assignment}, noise_rng);
        acc_at(s, m, e, r) = evaluate_accuracy(model, prepared.test);
      }
    }
  };

  auto worker = [&]() {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t task = next_task.fetch_add(1);
      if (task >= ns * nr) return;
      try {
        run_task(task);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!failed.exchange(true)) first_error = std::current_exception();
        return;
      }
    }
  };

  const std::size_t pool = std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), ns * nr);
  if (pool <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (std::size_t t = 0; t < pool; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  SweepResult out;
  const std::string dataset_name = cfg.dataset.name.empty() ? schema.name : cfg.dataset.name;
  for (std::size_t s = 0; s < ns; ++s) {
    std::vector<double> ref_reps(ref.begin() + static_cast<std::ptrdiff_t>(s * nr),
                                 ref.begin() + static_cast<std::ptrdiff_t>((s + 1) * nr));
    const detail::CellStats ref_stats = detail::stats_over(ref_reps);

    ResultRow ref_row;
    ref_row.dataset = dataset_name;
    ref_row.mechanism = "reference";
    ref_row.strategy = cfg.strategies[s].label;
    ref_row.epsilon = std::numeric_limits<double>::infinity();
    ref_row.mean_accuracy = ref_stats.mean;
    ref_row.std_accuracy = ref_stats.stddev;
    ref_row.reps = cfg.repetitions;
    ref_row.reference_accuracy = ref_stats.mean;
    out.rows.push_back(ref_row);

    for (std::size_t m = 0; m < nm; ++m) {
      for (std::size_t e = 0; e < ne; ++e) {
        std::vector<double> reps(nr);
        for (std::size_t r = 0; r < nr; ++r) reps[r] = acc_at(s, m, e, r);
        const detail::CellStats stats = detail::stats_over(reps);
        ResultRow row;
        row.dataset = dataset_name;
        row.mechanism = mechanism_name(cfg.mechanisms[m]);
        row.strategy = cfg.strategies[s].label;
        row.epsilon = cfg.epsilons[e];
        row.mean_accuracy = stats.mean;
        row.std_accuracy = stats.stddev;
        row.reps = cfg.repetitions;
        row.reference_accuracy = ref_stats.mean;
        out.rows.push_back(row);
      }
    }
  }
  return out;
}

// Loads the configured dataset and runs the sweep; load warnings and the
// dropped-row count surface in the result.
inline SweepResult run_sweep_file(const SweepConfig& cfg) {
  LoadResult loaded = load_csv(cfg.dataset.path, cfg.dataset.csv, cfg.dataset.name);
  SweepResult result = run_sweep(cfg, loaded.schema, loaded.records);
  if (loaded.dropped_missing > 0) {
    result.warnings.push_back("dropped " + std::to_string(loaded.dropped_missing) +
                              " rows with missing values");
  }
  for (auto& w : loaded.warnings) result.warnings.push_back(std::move(w));
  return result;
}

namespace detail {

inline std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

}  // namespace detail

inline void emit_csv(const std::vector<ResultRow>& rows, std::ostream& os) {
  if (rows.empty()) throw EmptyInputError("no result rows to emit");
  os << "dataset,mechanism,strategy,epsilon,mean_accuracy,std_accuracy,reps,reference_accuracy\n";
  for (const auto& r : rows) {
    os << r.dataset << ',' << r.mechanism << ',' << r.strategy << ',' << detail::format_number(r.epsilon)
       << ',' << detail::format_number(r.mean_accuracy) << ',' << detail::format_number(r.std_accuracy)
       << ',' << r.reps << ',' << detail::format_number(r.reference_accuracy) << '\n';
  }
}

inline void emit_table(const std::vector<ResultRow>& rows, std::ostream& os) {
  if (rows.empty()) throw EmptyInputError("no result rows to emit");
  const std::vector<std::string> header = {"dataset",       "mechanism", "strategy",
                                           "epsilon",       "mean_acc",  "std_acc",
                                           "reps",          "reference"};
  std::vector<std::vector<std::string>> cells;
  cells.push_back(header);
  for (const auto& r : rows) {
    cells.push_back({r.dataset, r.mechanism, r.strategy, detail::format_number(r.epsilon),
                     detail::format_number(r.mean_accuracy), detail::format_number(r.std_accuracy),
                     std::to_string(r.reps), detail::format_number(r.reference_accuracy)});
  }
  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      os << row[c];
      if (c + 1 < row.size()) os << std::string(widths[c] - row[c].size() + 2, ' ');
    }
    os << '\n';
  }
}

}  // namespace ldpnb
