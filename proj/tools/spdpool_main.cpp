// Command-line front end: second-order pooling, training, evaluation,
// gradient checking, and synthetic data generation.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error,
// 3 numerical failure.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "spdpool/checkpoint.hpp"
#include "spdpool/dataset.hpp"
#include "spdpool/feature_file.hpp"
#include "spdpool/gradcheck.hpp"
#include "spdpool/manifest.hpp"
#include "spdpool/network.hpp"
#include "spdpool/pooling.hpp"
#include "spdpool/synthetic.hpp"
#include "spdpool/train.hpp"
#include "spdpool/types.hpp"

namespace {

using spdpool::DataError;
using spdpool::NumericalError;
using spdpool::UsageError;

// ---------------------------------------------------------------------------
// Config files: flat "key = value" lines, '#' comments, documented keys
// only. Command-line flags override file values.

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {"preset", "lambda", "epsilon",
                                                "lr",     "epochs", "batch",
                                                "seed",   "classes", "input_dim"};
  return keys;
}

std::string trim(const std::string& s) {
  const std::size_t first = s.find_first_not_of(" \t");
  if (first == std::string::npos) {
    return "";
  }
  const std::size_t last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::map<std::string, std::string> load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw UsageError("cannot open config file: " + path.string());
  }
  std::map<std::string, std::string> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') {
      continue;
    }
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config line " + std::to_string(line_no) +
                       ": expected 'key = value'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    const auto& known = config_keys();
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw UsageError("config line " + std::to_string(line_no) + ": unknown key '" + key +
                       "'");
    }
    if (value.empty()) {
      throw UsageError("config line " + std::to_string(line_no) + ": empty value for '" +
                       key + "'");
    }
    values[key] = value;
  }
  return values;
}

class ConfigSource {
public:
  void load(const std::filesystem::path& path) { values_ = load_config(path); }

  /// Applies the config value for `key` unless the flag was given.
  template <typename T>
  void apply(const CLI::Option* opt, const std::string& key, T& target) const {
    if (opt != nullptr && opt->count() > 0) {
      return;
    }
    const auto it = values_.find(key);
    if (it == values_.end()) {
      return;
    }
    parse(key, it->second, target);
  }

private:
  static void parse(const std::string& key, const std::string& text, double& out) {
    try {
      std::size_t used = 0;
      out = std::stod(text, &used);
      if (used != text.size()) {
        throw std::invalid_argument(text);
      }
    } catch (const std::exception&) {
      throw UsageError("config: invalid value for '" + key + "': " + text);
    }
  }

  static void parse(const std::string& key, const std::string& text, std::string& out) {
    out = text;
  }

  template <typename Int>
  static void parse_int(const std::string& key, const std::string& text, Int& out) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(text, &used);
      if (used != text.size() || v < 0) {
        throw std::invalid_argument(text);
      }
      out = static_cast<Int>(v);
    } catch (const std::exception&) {
      throw UsageError("config: invalid value for '" + key + "': " + text);
    }
  }

  static void parse(const std::string& key, const std::string& text, std::int64_t& out) {
    parse_int(key, text, out);
  }

  static void parse(const std::string& key, const std::string& text, std::uint64_t& out) {
    parse_int(key, text, out);
  }

  std::map<std::string, std::string> values_;
};

void print_value(double v) { std::printf("%.6f\n", v); }

// ---------------------------------------------------------------------------
// pool

struct PoolArgs {
  std::string manifest;
  std::string out_dir;
  std::string mode = "cov";
  double lambda = 1e-4;
  const CLI::Option* lambda_opt = nullptr;
};

int cmd_pool(const PoolArgs& args, const ConfigSource& config, bool verbose) {
  double lambda = args.lambda;
  config.apply(args.lambda_opt, "lambda", lambda);
  if (lambda < 0.0) {
    throw UsageError("lambda must be nonnegative");
  }
  const spdpool::Manifest manifest = spdpool::load_manifest(args.manifest);
  if (manifest.entries.empty()) {
    throw DataError("empty manifest: " + args.manifest);
  }
  const bool gauss = args.mode == "gauss";
  const spdpool::RegularizationParams params{lambda};
  std::filesystem::create_directories(args.out_dir);
  std::vector<spdpool::ManifestEntry> out_entries;
  std::size_t failures = 0;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const spdpool::ManifestEntry& entry = manifest.entries[i];
    const std::filesystem::path out_file =
        std::filesystem::path(args.out_dir) / ("desc_" + std::to_string(i) + ".spdf");
    try {
      const spdpool::FeatureRecord record = spdpool::read_feature_file(entry.path);
      const bool failed = entry.failed || record.failed;
      if (failed) {
        const Eigen::Index d = record.kind == spdpool::FileKind::SpatialMap
                                   ? static_cast<Eigen::Index>(record.dims[2])
                                   : static_cast<Eigen::Index>(record.dims[1]);
        const Eigen::Index side = gauss ? d + 1 : d;
        spdpool::write_descriptor_file(out_file, spdpool::SymMatrix::zero(side),
                                       static_cast<std::uint32_t>(entry.label), true);
      } else {
        const spdpool::FeatureSet features =
            record.kind == spdpool::FileKind::SpatialMap
                ? spdpool::flatten_spatial(record.to_map())
                : spdpool::FeatureSet{record.to_sequence()};
        bool ineffective = false;
        const spdpool::SpdMatrix descriptor =
            gauss ? spdpool::gaussian_embed(features, params, &ineffective)
                  : spdpool::regularize(spdpool::compute_covariance(features), params,
                                        &ineffective);
        if (ineffective) {
          std::fprintf(stderr, "warning: regularization ineffective for %s\n",
                       entry.path.string().c_str());
        }
        spdpool::write_descriptor_file(out_file, descriptor.sym(),
                                       static_cast<std::uint32_t>(entry.label), false);
      }
      out_entries.push_back({out_file, entry.label, entry.failed});
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s: %s\n", entry.path.string().c_str(), e.what());
      ++failures;
    }
  }
  spdpool::write_manifest(std::filesystem::path(args.out_dir) / "manifest.tsv", out_entries);
  if (verbose) {
    std::fprintf(stderr, "pooled %zu of %zu samples\n", out_entries.size(),
                 manifest.entries.size());
  }
  if (failures > 0) {
    std::fprintf(stderr, "error: %zu of %zu samples failed\n", failures,
                 manifest.entries.size());
    return 2;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// train / eval

struct TrainArgs {
  std::string train_manifest;
  std::string val_manifest;
  std::string out_dir;
  std::string preset = "model1";
  bool pooled = false;
  bool no_shuffle = false;
  double lambda = 1e-4;
  double epsilon = 1e-4;
  double lr = 1e-2;
  std::int64_t epochs = 50;
  std::int64_t batch = 32;
  std::int64_t classes = 0;    // 0 = derive from labels
  std::int64_t input_dim = 0;  // 0 = derive from data
  const CLI::Option* preset_opt = nullptr;
  const CLI::Option* lambda_opt = nullptr;
  const CLI::Option* epsilon_opt = nullptr;
  const CLI::Option* lr_opt = nullptr;
  const CLI::Option* epochs_opt = nullptr;
  const CLI::Option* batch_opt = nullptr;
  const CLI::Option* classes_opt = nullptr;
  const CLI::Option* input_dim_opt = nullptr;
};

Eigen::Index derive_input_dim(const spdpool::Dataset& data, bool pooled) {
  for (const spdpool::Sample& s : data.samples) {
    if (s.failed) {
      continue;
    }
    return pooled ? s.descriptor.rows() : s.features.rows();
  }
  return 0;
}

int cmd_train(const TrainArgs& args, const ConfigSource& config, std::uint64_t seed,
              bool verbose) {
  std::string preset = args.preset;
  double lambda = args.lambda;
  double epsilon = args.epsilon;
  double lr = args.lr;
  std::int64_t epochs = args.epochs;
  std::int64_t batch = args.batch;
  std::int64_t classes = args.classes;
  std::int64_t input_dim = args.input_dim;
  config.apply(args.preset_opt, "preset", preset);
  config.apply(args.lambda_opt, "lambda", lambda);
  config.apply(args.epsilon_opt, "epsilon", epsilon);
  config.apply(args.lr_opt, "lr", lr);
  config.apply(args.epochs_opt, "epochs", epochs);
  config.apply(args.batch_opt, "batch", batch);
  config.apply(args.classes_opt, "classes", classes);
  config.apply(args.input_dim_opt, "input_dim", input_dim);
  if (lambda < 0.0) {
    throw UsageError("lambda must be nonnegative");
  }
  if (!(epsilon > 0.0)) {
    throw UsageError("epsilon must be positive");
  }
  if (lr < 0.0) {
    throw UsageError("lr must be nonnegative");
  }
  if (epochs < 0) {
    throw UsageError("epochs must be nonnegative");
  }
  if (batch < 1) {
    throw UsageError("batch must be positive");
  }

  const spdpool::Manifest train_manifest = spdpool::load_manifest(args.train_manifest);
  const spdpool::Manifest val_manifest = spdpool::load_manifest(args.val_manifest);
  const spdpool::Dataset train_data = spdpool::load_dataset(train_manifest, args.pooled);
  const spdpool::Dataset val_data = spdpool::load_dataset(val_manifest, args.pooled);

  const Eigen::Index derived_dim = derive_input_dim(train_data, args.pooled);
  if (input_dim == 0) {
    input_dim = derived_dim;
  } else if (derived_dim != 0 && derived_dim != input_dim) {
    throw DataError("input dimension mismatch: data has " + std::to_string(derived_dim) +
                    ", configured " + std::to_string(input_dim));
  }
  if (input_dim == 0) {
    throw DataError("cannot infer the input dimension (no usable samples)");
  }
  if (classes == 0) {
    classes = std::max(spdpool::count_classes(train_data), spdpool::count_classes(val_data));
  }
  if (classes < 1) {
    throw DataError("cannot infer the class count (no labeled samples)");
  }

  spdpool::NetworkSpec spec = spdpool::build_preset(preset, input_dim, classes);
  spec.seed = seed;
  for (spdpool::LayerDesc& layer : spec.layers) {
    if (layer.kind == spdpool::LayerKind::CovPool ||
        layer.kind == spdpool::LayerKind::GaussPool) {
      layer.value = lambda;
    } else if (layer.kind == spdpool::LayerKind::ReEig) {
      layer.value = epsilon;
    }
  }

  spdpool::TrainConfig train_config;
  train_config.learning_rate = lr;
  train_config.epochs = epochs;
  train_config.batch_size = batch;
  train_config.shuffle = !args.no_shuffle;
  if (verbose) {
    train_config.on_step = [](const spdpool::TrainState& state) {
      if (state.step % 100 == 0) {
        std::fprintf(stderr, "step %llu\n",
                     static_cast<unsigned long long>(state.step));
      }
    };
  }
  const spdpool::TrainResult result =
      spdpool::train(spec, train_config, train_data, val_data);

  std::filesystem::create_directories(args.out_dir);
  spdpool::save_checkpoint(std::filesystem::path(args.out_dir) / "checkpoint.spdc", spec,
                           input_dim, result.state);
  std::ofstream metrics(std::filesystem::path(args.out_dir) / "metrics.tsv",
                        std::ios::trunc);
  if (!metrics) {
    throw DataError("cannot open metrics file for writing");
  }
  for (const spdpool::EpochRecord& record : result.history) {
    char line[128];
    std::snprintf(line, sizeof(line), "%lld\t%.17g\t%.17g\n",
                  static_cast<long long>(record.epoch), record.train_loss,
                  record.val_accuracy);
    metrics << line;
    if (verbose) {
      std::fprintf(stderr, "epoch %lld loss %.6f val %.6f\n",
                   static_cast<long long>(record.epoch), record.train_loss,
                   record.val_accuracy);
    }
  }
  metrics.close();
  const double final_accuracy =
      result.history.empty() ? spdpool::evaluate(spec, result.state, val_data)
                             : result.history.back().val_accuracy;
  print_value(final_accuracy);
  return 0;
}

struct EvalArgs {
  std::string checkpoint;
  std::string manifest;
  bool pooled = false;
};

int cmd_eval(const EvalArgs& args) {
  const spdpool::Checkpoint ckpt = spdpool::load_checkpoint(args.checkpoint);
  const spdpool::Manifest manifest = spdpool::load_manifest(args.manifest);
  const spdpool::Dataset data = spdpool::load_dataset(manifest, args.pooled);
  const Eigen::Index derived = derive_input_dim(data, args.pooled);
  const Eigen::Index expected =
      args.pooled ? spdpool::descriptor_dim(ckpt.spec, ckpt.input_dim) : ckpt.input_dim;
  if (derived != 0 && derived != expected) {
    throw DataError("input dimension mismatch: data has " + std::to_string(derived) +
                    ", checkpoint expects " + std::to_string(expected));
  }
  print_value(spdpool::evaluate(ckpt.spec, ckpt.state, data));
  return 0;
}

// ---------------------------------------------------------------------------
// gradcheck / synth

struct GradcheckArgs {
  std::int64_t dim = 8;
  std::int64_t instances = 20;
  std::string preset;
  std::string corrupt;
  const CLI::Option* preset_opt = nullptr;
};

int cmd_gradcheck(const GradcheckArgs& args, const ConfigSource& config,
                  std::uint64_t seed) {
  std::string preset = args.preset;
  config.apply(args.preset_opt, "preset", preset);
  spdpool::GradCheckOptions options;
  options.dim = args.dim;
  options.seed = seed == 0 ? 1 : seed;
  options.instances = static_cast<int>(args.instances);
  options.preset_filter = preset;
  options.corrupt_layer = args.corrupt;
  const std::vector<spdpool::LayerCheck> checks = spdpool::run_gradient_checks(options);
  std::vector<std::string> failing;
  for (const spdpool::LayerCheck& check : checks) {
    std::printf("%s %.6e\n", check.name.c_str(), check.max_rel_error);
    if (!(check.max_rel_error < options.tolerance)) {
      failing.push_back(check.name);
    }
  }
  if (!failing.empty()) {
    std::string joined;
    for (const std::string& name : failing) {
      joined += joined.empty() ? name : ", " + name;
    }
    std::fprintf(stderr, "error: gradient check failed: %s\n", joined.c_str());
    return 3;
  }
  return 0;
}

struct SynthArgs {
  std::string out_dir;
  std::int64_t classes = 3;
  std::int64_t dim = 16;
  std::int64_t samples = 100;
  std::int64_t frames = 64;
  const CLI::Option* classes_opt = nullptr;
  const CLI::Option* dim_opt = nullptr;
};

int cmd_synth(const SynthArgs& args, const ConfigSource& config, std::uint64_t seed,
              bool verbose) {
  std::int64_t classes = args.classes;
  std::int64_t dim = args.dim;
  config.apply(args.classes_opt, "classes", classes);
  config.apply(args.dim_opt, "input_dim", dim);
  spdpool::SyntheticSpec spec;
  spec.classes = classes;
  spec.dim = dim;
  spec.samples_per_class = args.samples;
  spec.frames = args.frames;
  spec.seed = seed;
  const spdpool::SyntheticPaths paths = spdpool::write_synthetic(spec, args.out_dir);
  if (verbose) {
    std::fprintf(stderr, "wrote %s and %s\n", paths.train_manifest.string().c_str(),
                 paths.val_manifest.string().c_str());
  }
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{
      "Second-order pooling networks: covariance descriptors, manifold "
      "layers, and Stiefel-constrained training.\n"
      "Descriptor files store a d-by-d matrix as a 1x1 spatial map with d*d "
      "channels."};
  app.require_subcommand(1);
  std::string config_path;
  std::uint64_t seed = 0;
  bool verbose = false;
  const CLI::Option* config_opt =
      app.add_option("--config", config_path, "Flat key = value config file");
  const CLI::Option* seed_opt = app.add_option("--seed", seed, "RNG seed");
  app.add_flag("--verbose", verbose, "Progress output on stderr");

  PoolArgs pool_args;
  CLI::App* pool = app.add_subcommand(
      "pool", "Write one SPD descriptor file per manifest sample");
  pool->fallthrough();
  pool->add_option("--manifest", pool_args.manifest, "Input manifest")->required();
  pool->add_option("--out", pool_args.out_dir, "Output directory")->required();
  pool->add_option("--mode", pool_args.mode, "cov or gauss")
      ->check(CLI::IsMember({"cov", "gauss"}));
  pool_args.lambda_opt =
      pool->add_option("--lambda", pool_args.lambda, "Trace regularization strength");

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "Train a preset network");
  train->fallthrough();
  train->add_option("--train-manifest", train_args.train_manifest, "Training manifest")
      ->required();
  train->add_option("--val-manifest", train_args.val_manifest, "Validation manifest")
      ->required();
  train->add_option("--out-dir", train_args.out_dir, "Checkpoint and metrics directory")
      ->required();
  train_args.preset_opt = train->add_option("--preset", train_args.preset,
                                            "model1|model2|model3|model4|bire2|bire3|bire4");
  train->add_flag("--pooled", train_args.pooled, "Manifests reference descriptor files");
  train->add_flag("--no-shuffle", train_args.no_shuffle, "Disable epoch shuffling");
  train_args.lambda_opt =
      train->add_option("--lambda", train_args.lambda, "Trace regularization strength");
  train_args.epsilon_opt =
      train->add_option("--epsilon", train_args.epsilon, "Eigenvalue clamp threshold");
  train_args.lr_opt = train->add_option("--lr", train_args.lr, "Learning rate");
  train_args.epochs_opt = train->add_option("--epochs", train_args.epochs, "Epoch count");
  train_args.batch_opt = train->add_option("--batch", train_args.batch, "Batch size");
  train_args.classes_opt =
      train->add_option("--classes", train_args.classes, "Class count (0 = derive)");
  train_args.input_dim_opt = train->add_option("--input-dim", train_args.input_dim,
                                               "Feature dimension (0 = derive)");

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a manifest");
  eval->fallthrough();
  eval->add_option("--checkpoint", eval_args.checkpoint, "Checkpoint file")->required();
  eval->add_option("--manifest", eval_args.manifest, "Evaluation manifest")->required();
  eval->add_flag("--pooled", eval_args.pooled, "Manifest references descriptor files");

  GradcheckArgs grad_args;
  CLI::App* gradcheck = app.add_subcommand(
      "gradcheck", "Compare every backward pass against finite differences");
  gradcheck->fallthrough();
  gradcheck->add_option("--dim", grad_args.dim, "Descriptor dimension (2..16)");
  gradcheck->add_option("--instances", grad_args.instances, "Random instances per layer");
  grad_args.preset_opt = gradcheck->add_option(
      "--preset", grad_args.preset, "Restrict the network check to one preset");
  gradcheck->add_option("--corrupt", grad_args.corrupt, "Skew the named check's gradient")
      ->group("");  // test hook, hidden from help

  SynthArgs synth_args;
  CLI::App* synth =
      app.add_subcommand("synth", "Generate a zero-mean synthetic dataset");
  synth->fallthrough();
  synth->add_option("--out", synth_args.out_dir, "Output directory")->required();
  synth_args.classes_opt = synth->add_option("--classes", synth_args.classes, "Class count");
  synth_args.dim_opt = synth->add_option("--dim", synth_args.dim, "Feature dimension");
  synth->add_option("--samples", synth_args.samples, "Samples per class");
  synth->add_option("--frames", synth_args.frames, "Feature vectors per sample");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    ConfigSource config;
    if (!config_path.empty()) {
      config.load(config_path);
    }
    std::uint64_t effective_seed = seed;
    config.apply(seed_opt, "seed", effective_seed);
    (void)config_opt;
    if (pool->parsed()) {
      return cmd_pool(pool_args, config, verbose);
    }
    if (train->parsed()) {
      return cmd_train(train_args, config, effective_seed, verbose);
    }
    if (eval->parsed()) {
      return cmd_eval(eval_args);
    }
    if (gradcheck->parsed()) {
      return cmd_gradcheck(grad_args, config, effective_seed);
    }
    if (synth->parsed()) {
      return cmd_synth(synth_args, config, effective_seed, verbose);
    }
    return 1;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
