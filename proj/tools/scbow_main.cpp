#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scbow/analysis.hpp"
#include "scbow/corpus.hpp"
#include "scbow/embedio.hpp"
#include "scbow/errors.hpp"
#include "scbow/eval.hpp"
#include "scbow/manifest.hpp"
#include "scbow/model.hpp"

namespace fs = std::filesystem;

namespace {

std::string fmt(double value) {
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

std::string fmt4(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.4f", value);
  return buffer;
}

void ensure_parent(const fs::path& path) {
  const fs::path parent = path.parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

// ---------------------------------------------------------------- train

struct TrainOptions {
  std::string corpus;
  std::string output;
  std::vector<std::size_t> dims{300};
  std::vector<std::size_t> negatives{2};
  std::size_t batch_size = 100;
  double lr = 0.0001;
  double lr_floor = 0.0;
  std::size_t epochs = 1;
  uint32_t min_count = 5;
  uint64_t seed = 1;
  uint64_t progress_every = 0;
  std::size_t stop_after_epoch = 0;
  std::string save_checkpoint;
  std::string resume;
};

void run_one_train(const TrainOptions& opts, std::size_t dim,
                   std::size_t n_negatives, const fs::path& out_path,
                   const fs::path& checkpoint_path) {
  scbow::TrainConfig config;
  config.dim = dim;
  config.n_negatives = n_negatives;
  config.batch_size = opts.batch_size;
  config.initial_lr = opts.lr;
  config.lr_floor_fraction = opts.lr_floor;
  config.epochs = opts.epochs;
  config.min_count = opts.min_count;
  config.seed = opts.seed;
  config.progress_every = opts.progress_every;
  config.stop_after_epochs = opts.stop_after_epoch;

  std::optional<scbow::Checkpoint> checkpoint;
  scbow::Vocabulary vocab;
  if (!opts.resume.empty()) {
    checkpoint = scbow::load_checkpoint(opts.resume);
    vocab = checkpoint->table.vocab;
    config.min_count = vocab.min_count();
    config.seed = checkpoint->state.seed;
  } else {
    vocab = scbow::build_vocabulary(fs::path(opts.corpus), opts.min_count);
  }
  const scbow::CorpusIndex index =
      scbow::CorpusIndex::from_path(opts.corpus, vocab);

  const auto progress = [&](const scbow::ProgressEvent& event) {
    std::cerr << "progress epoch=" << event.epoch + 1 << '/' << config.epochs
              << " examples=" << event.examples_done
              << " batches=" << event.batches_done
              << " mean_loss=" << fmt4(event.interval_mean_loss)
              << " examples_per_sec=" << fmt4(event.examples_per_sec)
              << " skipped=" << event.skipped_examples << '\n';
  };

  scbow::RunManifest manifest;
  manifest.command = "train";
  manifest.corpus = opts.corpus;
  manifest.corpus_digest = scbow::digest_corpus(opts.corpus);
  manifest.started_at = scbow::utc_timestamp();
  manifest.config = config;
  manifest.output = out_path;

  const scbow::TrainResult result =
      checkpoint.has_value()
          ? scbow::train(index, vocab, config, progress,
                         &checkpoint->table.matrix, &checkpoint->state)
          : scbow::train(index, vocab, config, progress);

  manifest.vocab_size = vocab.size();
  manifest.total_batches = result.state.total_batches;
  manifest.examples_seen = result.metrics.examples_seen;
  manifest.skipped_examples = result.metrics.skipped_examples;
  manifest.wall_seconds = result.metrics.wall_seconds;

  const scbow::EmbeddingTable table{vocab, result.matrix};
  ensure_parent(out_path);
  scbow::export_text(table, out_path);
  const fs::path manifest_path = out_path.string() + ".manifest";
  scbow::write_manifest(manifest, manifest_path);
  if (!checkpoint_path.empty()) {
    ensure_parent(checkpoint_path);
    scbow::save_checkpoint(table, result.state, checkpoint_path);
  }

  double mean_loss = 0.0;
  for (const double loss : result.metrics.batch_losses) mean_loss += loss;
  if (!result.metrics.batch_losses.empty()) {
    mean_loss /= result.metrics.batch_losses.size();
  }

  std::cout << "trained vocab=" << vocab.size() << " dim=" << dim
            << " negatives=" << n_negatives
            << " batches=" << result.state.batches_done << '/'
            << result.state.total_batches
            << " examples=" << result.metrics.examples_seen
            << " skipped=" << result.metrics.skipped_examples
            << " mean_loss=" << fmt4(mean_loss)
            << " wall_seconds=" << fmt4(result.metrics.wall_seconds) << '\n';
  std::cout << "wrote " << out_path.string() << '\n';
  std::cout << "wrote " << manifest_path.string() << '\n';
  if (!checkpoint_path.empty()) {
    std::cout << "wrote " << checkpoint_path.string() << '\n';
  }
}

int run_train(const TrainOptions& opts) {
  if (opts.dims.empty() || opts.negatives.empty()) {
    throw scbow::InvalidConfig("empty sweep list");
  }
  const bool sweep = opts.dims.size() > 1 || opts.negatives.size() > 1;
  if (sweep && (!opts.save_checkpoint.empty() || !opts.resume.empty())) {
    throw scbow::InvalidConfig("checkpoints are not supported in sweep runs");
  }

  for (const std::size_t dim : opts.dims) {
    for (const std::size_t n_negatives : opts.negatives) {
      fs::path out_path = opts.output;
      if (sweep) {
        out_path = fs::path(opts.output) /
                   ("d" + std::to_string(dim) + "_n" +
                    std::to_string(n_negatives)) /
                   "embeddings.txt";
      }
      run_one_train(opts, dim, n_negatives, out_path,
                    fs::path(opts.save_checkpoint));
    }
  }
  return 0;
}

// ----------------------------------------------------------------- eval

struct EvalOptions {
  std::string embeddings;
  std::vector<std::string> datasets;
  std::string report = "table";
  std::string scores_out;
};

int run_eval(const EvalOptions& opts) {
  const scbow::EmbeddingTable table = scbow::load_table(opts.embeddings);

  std::ofstream scores_out;
  if (!opts.scores_out.empty()) {
    ensure_parent(opts.scores_out);
    scores_out.open(opts.scores_out, std::ios::binary | std::ios::trunc);
    if (!scores_out) {
      throw scbow::IoError("cannot open " + opts.scores_out + " for writing");
    }
  }

  if (opts.report == "table") {
    std::cout << "dataset\tpearson\tspearman\tscored\tskipped\n";
  }
  for (const std::string& dataset : opts.datasets) {
    const auto pairs = scbow::load_pairs(fs::path(dataset));
    const scbow::EvalReport report =
        scbow::evaluate(table.matrix, table.vocab, pairs);

    const std::string name = fs::path(dataset).filename().string();
    if (opts.report == "table") {
      std::cout << name << '\t' << fmt4(report.pearson) << '\t'
                << fmt4(report.spearman) << '\t' << report.n_scored << '\t'
                << report.n_skipped << '\n';
    } else {
      std::cout << name << '\t' << fmt(report.pearson) << '\t'
                << fmt(report.spearman) << '\t' << report.n_scored << '\t'
                << report.n_skipped << '\n';
    }
    if (scores_out.is_open()) {
      for (const auto& [system, gold] : report.per_pair_scores) {
        scores_out << fmt(system) << '\t' << fmt(gold) << '\n';
      }
    }
  }
  if (scores_out.is_open()) {
    scores_out.close();
    if (!scores_out) {
      throw scbow::IoError("write failed for " + opts.scores_out);
    }
  }
  return 0;
}

// -------------------------------------------------------------- compare

struct CompareOptions {
  std::string run_a;
  std::string run_b;
};

struct ScoreFile {
  std::vector<double> system;
  std::vector<double> gold;
};

ScoreFile load_scores(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw scbow::IoError("cannot open " + path.string());

  ScoreFile scores;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw scbow::ParseError("expected 'system TAB gold'", line_no);
    }
    const auto parse = [&](std::string_view field) {
      double value = 0.0;
      const char* begin = field.data();
      const char* end = begin + field.size();
      const auto [ptr, ec] = std::from_chars(begin, end, value);
      if (ec != std::errc{} || ptr != end) {
        throw scbow::ParseError(
            "bad score '" + std::string(field) + "'", line_no);
      }
      return value;
    };
    scores.system.push_back(parse(std::string_view(line).substr(0, tab)));
    scores.gold.push_back(parse(std::string_view(line).substr(tab + 1)));
  }
  return scores;
}

int run_compare(const CompareOptions& opts) {
  const ScoreFile a = load_scores(opts.run_a);
  const ScoreFile b = load_scores(opts.run_b);
  if (a.gold != b.gold) {
    throw scbow::InvalidExample(
        "score files are not paired over the same items");
  }

  const scbow::SignificanceResult result =
      scbow::wilcoxon_signed_rank(a.system, b.system);
  std::cout << "wilcoxon W=" << fmt(result.statistic)
            << " n=" << result.n_effective
            << " p_value=" << fmt(result.p_value)
            << " significant=" << (result.significant ? "yes" : "no")
            << '\n';
  return 0;
}

// -------------------------------------------------------------- analyze

struct AnalyzeOptions {
  std::string embeddings;
  std::size_t norms = 0;
  std::string neighbors;
  double min_cos = 0.6;
};

int run_analyze(const AnalyzeOptions& opts) {
  if (opts.norms == 0 && opts.neighbors.empty()) {
    throw scbow::InvalidConfig("nothing to analyze: pass --norms or "
                               "--neighbors");
  }
  const scbow::EmbeddingTable table = scbow::load_table(opts.embeddings);

  if (opts.norms > 0) {
    const auto [lowest, highest] =
        scbow::norm_ranking(table.matrix, table.vocab, opts.norms);
    std::cout << "lowest norms:\n";
    for (const auto& [token, value] : lowest.entries) {
      std::cout << "  " << token << '\t' << fmt(value) << '\n';
    }
    std::cout << "highest norms:\n";
    for (const auto& [token, value] : highest.entries) {
      std::cout << "  " << token << '\t' << fmt(value) << '\n';
    }
  }

  if (!opts.neighbors.empty()) {
    const auto neighbors = scbow::nearest_neighbors(
        table.matrix, table.vocab, opts.neighbors, opts.min_cos);
    std::cout << "neighbors of '" << opts.neighbors
              << "' with cosine >= " << fmt(opts.min_cos) << ":\n";
    for (const auto& [token, cos] : neighbors) {
      std::cout << "  " << token << '\t' << fmt(cos) << '\n';
    }
  }
  return 0;
}

// ---------------------------------------------------------------- bench

struct BenchOptions {
  std::string embeddings;
  std::string pairs;
};

int run_bench(const BenchOptions& opts) {
  const scbow::EmbeddingTable table = scbow::load_table(opts.embeddings);
  const auto pairs = scbow::load_pairs(fs::path(opts.pairs));
  const scbow::BenchmarkReport report =
      scbow::benchmark_pairs(table.matrix, table.vocab, pairs);
  std::cout << "bench pairs=" << report.n_pairs
            << " scored=" << report.n_scored
            << " total_seconds=" << fmt(report.total_seconds)
            << " seconds_per_pair=" << fmt(report.seconds_per_pair) << '\n';
  return 0;
}

// -------------------------------------------------------- export/import

struct ConvertOptions {
  std::string input;
  std::string output;
};

int run_export(const ConvertOptions& opts) {
  const scbow::EmbeddingTable table = scbow::load_table(opts.input);
  ensure_parent(opts.output);
  scbow::export_text(table, fs::path(opts.output));
  std::cout << "wrote " << opts.output << '\n';
  return 0;
}

int run_import(const ConvertOptions& opts) {
  const scbow::EmbeddingTable table = scbow::import_text(fs::path(opts.input));
  scbow::OptimizerState state;
  state.rng_state = scbow::Rng(0).serialize();
  ensure_parent(opts.output);
  scbow::save_checkpoint(table, state, fs::path(opts.output));
  std::cout << "wrote " << opts.output << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Siamese CBOW sentence-embedding trainer and evaluator"};
  app.set_version_flag("--version", std::string(scbow::version()));
  app.require_subcommand(1);

  TrainOptions train_opts;
  CLI::App* train = app.add_subcommand(
      "train", "Train word embeddings for sentence averaging");
  train->add_option("--corpus", train_opts.corpus,
                    "Corpus file (blank lines separate documents) or "
                    "directory of one-document files")
      ->required();
  train->add_option("--output", train_opts.output,
                    "Output embeddings path (a directory in sweep runs)")
      ->required();
  train->add_option("--dim", train_opts.dims,
                    "Embedding dimensions; a comma list sweeps")
      ->delimiter(',');
  train->add_option("--negatives", train_opts.negatives,
                    "Negative samples per example; a comma list sweeps")
      ->delimiter(',');
  train->add_option("--batch-size", train_opts.batch_size, "Batch size");
  train->add_option("--lr", train_opts.lr, "Initial learning rate");
  train->add_option("--lr-floor", train_opts.lr_floor,
                    "Decay floor as a fraction of the initial rate");
  train->add_option("--epochs", train_opts.epochs, "Training epochs");
  train->add_option("--min-count", train_opts.min_count,
                    "Vocabulary frequency threshold");
  train->add_option("--seed", train_opts.seed, "Run seed");
  train->add_option("--progress-every", train_opts.progress_every,
                    "Progress line every N examples (0 = epoch ends only)");
  train->add_option("--stop-after-epoch", train_opts.stop_after_epoch,
                    "Stop after this many epochs of the full plan");
  train->add_option("--save-checkpoint", train_opts.save_checkpoint,
                    "Write a resumable checkpoint here after the run");
  train->add_option("--resume", train_opts.resume,
                    "Resume from a checkpoint taken with the same plan");

  EvalOptions eval_opts;
  CLI::App* eval = app.add_subcommand(
      "eval", "Score an embedding table on sentence-pair datasets");
  eval->add_option("--embeddings", eval_opts.embeddings,
                   "Text table or checkpoint")
      ->required();
  eval->add_option("--dataset", eval_opts.datasets,
                   "TSV dataset: left TAB right [TAB gold]")
      ->required();
  eval->add_option("--report", eval_opts.report, "Output style")
      ->check(CLI::IsMember({"table", "tsv"}));
  eval->add_option("--scores-out", eval_opts.scores_out,
                   "Write per-pair 'system TAB gold' lines here");

  CompareOptions compare_opts;
  CLI::App* compare = app.add_subcommand(
      "compare", "Wilcoxon signed-rank test between two score files");
  compare->add_option("--run-a", compare_opts.run_a, "First score file")
      ->required();
  compare->add_option("--run-b", compare_opts.run_b, "Second score file")
      ->required();

  AnalyzeOptions analyze_opts;
  CLI::App* analyze = app.add_subcommand(
      "analyze", "Vector-norm rankings and nearest neighbors");
  analyze->add_option("--embeddings", analyze_opts.embeddings,
                      "Text table or checkpoint")
      ->required();
  analyze->add_option("--norms", analyze_opts.norms,
                      "Report the K lowest- and highest-norm tokens");
  analyze->add_option("--neighbors", analyze_opts.neighbors,
                      "Report neighbors of this token");
  analyze->add_option("--min-cos", analyze_opts.min_cos,
                      "Cosine threshold for --neighbors");

  BenchOptions bench_opts;
  CLI::App* bench = app.add_subcommand(
      "bench", "Time sentence-pair scoring, one pair at a time");
  bench->add_option("--embeddings", bench_opts.embeddings,
                    "Text table or checkpoint")
      ->required();
  bench->add_option("--pairs", bench_opts.pairs, "TSV pair file")->required();

  ConvertOptions export_opts;
  CLI::App* exporter = app.add_subcommand(
      "export", "Write any readable table as a text table");
  exporter->add_option("--embeddings", export_opts.input,
                       "Text table or checkpoint")
      ->required();
  exporter->add_option("--output", export_opts.output, "Output text table")
      ->required();

  ConvertOptions import_opts;
  CLI::App* importer = app.add_subcommand(
      "import", "Convert a text table into a checkpoint");
  importer->add_option("--embeddings", import_opts.input, "Text table")
      ->required();
  importer->add_option("--output", import_opts.output, "Output checkpoint")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*train) return run_train(train_opts);
    if (*eval) return run_eval(eval_opts);
    if (*compare) return run_compare(compare_opts);
    if (*analyze) return run_analyze(analyze_opts);
    if (*bench) return run_bench(bench_opts);
    if (*exporter) return run_export(export_opts);
    if (*importer) return run_import(import_opts);
  } catch (const scbow::InvalidConfig& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const scbow::DegenerateInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const scbow::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
