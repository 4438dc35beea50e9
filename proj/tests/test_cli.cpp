#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path work_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "scbow_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

CliResult run_cli(const std::string& args) {
  const fs::path out_file = work_dir() / "last_stdout.txt";
  const fs::path err_file = work_dir() / "last_stderr.txt";
  const std::string command = std::string("\"") + SCBOW_BIN_PATH + "\" " +
                              args + " > " + out_file.string() + " 2> " +
                              err_file.string();
  const int status = std::system(command.c_str());
  CliResult result;
  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  result.out = slurp(out_file);
  result.err = slurp(err_file);
  return result;
}

// every token appears well above the default frequency threshold
fs::path write_corpus() {
  const fs::path path = work_dir() / "corpus.txt";
  std::ofstream out(path);
  int next = 0;
  for (int doc = 0; doc < 4; ++doc) {
    for (int line = 0; line < 6; ++line) {
      for (int w = 0; w < 4; ++w) {
        out << 't' << (next++ % 10) << (w == 3 ? "" : " ");
      }
      out << '\n';
    }
    out << '\n';
  }
  return path;
}

fs::path write_dataset() {
  const fs::path path = work_dir() / "pairs.tsv";
  std::ofstream out(path);
  out << "t0 t1\tt0 t1\t5.0\n";
  out << "t2 t3\tt4 t5\t1.2\n";
  out << "t6\tt6 t7\t3.8\n";
  out << "t8 t9\tt9 t8\t4.9\n";
  out << "zzz qqq\tt0\t2.0\n";  // all-OOV left side
  return path;
}

}  // namespace

TEST_CASE("cli usage errors exit 1") {
  CHECK(run_cli("").exit_code == 1);
  CHECK(run_cli("train --no-such-flag").exit_code == 1);
  CHECK(run_cli("frobnicate").exit_code == 1);

  const CliResult help = run_cli("--help");
  CHECK(help.exit_code == 0);
  CHECK(help.out.find("train") != std::string::npos);
}

TEST_CASE("cli version") {
  const CliResult result = run_cli("--version");
  CHECK(result.exit_code == 0);
  CHECK(result.out.find("0.1.0") != std::string::npos);
}

TEST_CASE("train with defaults records them in the manifest") {
  const fs::path corpus = write_corpus();
  const fs::path output = work_dir() / "defaults.txt";
  const CliResult result = run_cli("train --corpus " + corpus.string() +
                                   " --output " + output.string());
  CHECK(result.exit_code == 0);
  CHECK(fs::exists(output));

  const std::string manifest = slurp(output.string() + ".manifest");
  CHECK(manifest.find("dim = 300") != std::string::npos);
  CHECK(manifest.find("negatives = 2") != std::string::npos);
  CHECK(manifest.find("batch_size = 100") != std::string::npos);
  CHECK(manifest.find("learning_rate = 1e-04") != std::string::npos);
  CHECK(manifest.find("epochs = 1") != std::string::npos);
  CHECK(manifest.find("min_count = 5") != std::string::npos);
  CHECK(manifest.find("corpus_digest = fnv1a64:") != std::string::npos);

  // progress goes to stderr, results to stdout
  CHECK(result.out.find("trained") != std::string::npos);
  CHECK(result.err.find("progress") != std::string::npos);
}

TEST_CASE("identical train invocations produce identical files") {
  const fs::path corpus = write_corpus();
  const fs::path out_a = work_dir() / "det_a.txt";
  const fs::path out_b = work_dir() / "det_b.txt";
  const std::string flags =
      " --dim 8 --epochs 2 --min-count 1 --seed 99 --batch-size 16";
  CHECK(run_cli("train --corpus " + corpus.string() + " --output " +
                out_a.string() + flags)
            .exit_code == 0);
  CHECK(run_cli("train --corpus " + corpus.string() + " --output " +
                out_b.string() + flags)
            .exit_code == 0);
  CHECK(slurp(out_a) == slurp(out_b));
  CHECK_FALSE(slurp(out_a).empty());
}

TEST_CASE("sweeps fan out into per-run directories") {
  const fs::path corpus = write_corpus();
  const fs::path out_dir = work_dir() / "sweep";
  const CliResult result =
      run_cli("train --corpus " + corpus.string() + " --output " +
              out_dir.string() +
              " --dim 4,8 --negatives 1,2 --epochs 1 --min-count 1");
  CHECK(result.exit_code == 0);
  for (const std::string run :
       {"d4_n1", "d4_n2", "d8_n1", "d8_n2"}) {
    CHECK(fs::exists(out_dir / run / "embeddings.txt"));
    CHECK(fs::exists(out_dir / run / "embeddings.txt.manifest"));
  }
  const std::string manifest = slurp(out_dir / "d8_n1" / "embeddings.txt.manifest");
  CHECK(manifest.find("dim = 8") != std::string::npos);
  CHECK(manifest.find("negatives = 1") != std::string::npos);
}

TEST_CASE("eval reports and exports scores") {
  const fs::path corpus = write_corpus();
  const fs::path emb = work_dir() / "eval_emb.txt";
  REQUIRE(run_cli("train --corpus " + corpus.string() + " --output " +
                  emb.string() + " --dim 8 --min-count 1 --seed 3")
              .exit_code == 0);

  const fs::path dataset = write_dataset();
  const fs::path scores = work_dir() / "scores.tsv";
  const CliResult result =
      run_cli("eval --embeddings " + emb.string() + " --dataset " +
              dataset.string() + " --scores-out " + scores.string());
  CHECK(result.exit_code == 0);
  CHECK(result.out.find("pairs.tsv") != std::string::npos);

  // 4 scored lines, tab separated
  std::istringstream lines(slurp(scores));
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    CHECK(line.find('\t') != std::string::npos);
    ++count;
  }
  CHECK(count == 4);

  const CliResult tsv =
      run_cli("eval --embeddings " + emb.string() + " --dataset " +
              dataset.string() + " --report tsv");
  CHECK(tsv.exit_code == 0);
}

TEST_CASE("eval maps thin datasets to exit 3") {
  const fs::path corpus = write_corpus();
  const fs::path emb = work_dir() / "thin_emb.txt";
  REQUIRE(run_cli("train --corpus " + corpus.string() + " --output " +
                  emb.string() + " --dim 4 --min-count 1")
              .exit_code == 0);

  const fs::path thin = work_dir() / "thin.tsv";
  std::ofstream(thin) << "t0\tt1\t3.0\nzzz\tqqq\t1.0\n";
  const CliResult result = run_cli("eval --embeddings " + emb.string() +
                                   " --dataset " + thin.string());
  CHECK(result.exit_code == 3);
}

TEST_CASE("data errors exit 2") {
  const fs::path corpus = write_corpus();
  const fs::path emb = work_dir() / "err_emb.txt";
  REQUIRE(run_cli("train --corpus " + corpus.string() + " --output " +
                  emb.string() + " --dim 4 --min-count 1")
              .exit_code == 0);

  const fs::path broken = work_dir() / "broken.tsv";
  std::ofstream(broken) << "only one field\n";
  CHECK(run_cli("eval --embeddings " + emb.string() + " --dataset " +
                broken.string())
            .exit_code == 2);

  CHECK(run_cli("eval --embeddings " + emb.string() +
                " --dataset /no/such/file.tsv")
            .exit_code == 2);
  CHECK(run_cli("eval --embeddings /no/such/emb.txt --dataset " +
                broken.string())
            .exit_code == 2);
  CHECK(run_cli("analyze --embeddings " + emb.string() +
                " --neighbors not_a_token")
            .exit_code == 2);
}

TEST_CASE("compare runs the paired test and flags degenerate input") {
  const fs::path scores_a = work_dir() / "cmp_a.tsv";
  const fs::path scores_b = work_dir() / "cmp_b.tsv";
  std::ofstream(scores_a) << "0.9\t5.0\n0.4\t2.0\n0.7\t4.0\n";
  std::ofstream(scores_b) << "0.8\t5.0\n0.5\t2.0\n0.6\t4.0\n";

  const CliResult result = run_cli("compare --run-a " + scores_a.string() +
                                   " --run-b " + scores_b.string());
  CHECK(result.exit_code == 0);
  CHECK(result.out.find("wilcoxon") != std::string::npos);
  CHECK(result.out.find("p_value=") != std::string::npos);

  // identical runs have no nonzero differences
  CHECK(run_cli("compare --run-a " + scores_a.string() + " --run-b " +
                scores_a.string())
            .exit_code == 3);

  // differing gold columns mean the files are not paired
  const fs::path scores_c = work_dir() / "cmp_c.tsv";
  std::ofstream(scores_c) << "0.8\t5.0\n0.5\t2.5\n0.6\t4.0\n";
  CHECK(run_cli("compare --run-a " + scores_a.string() + " --run-b " +
                scores_c.string())
            .exit_code == 2);
}

TEST_CASE("analyze prints norms and neighbors") {
  const fs::path corpus = write_corpus();
  const fs::path emb = work_dir() / "analyze_emb.txt";
  REQUIRE(run_cli("train --corpus " + corpus.string() + " --output " +
                  emb.string() + " --dim 8 --min-count 1")
              .exit_code == 0);

  const CliResult result = run_cli("analyze --embeddings " + emb.string() +
                                   " --norms 3 --neighbors t0 --min-cos -1");
  CHECK(result.exit_code == 0);
  CHECK(result.out.find("lowest norms:") != std::string::npos);
  CHECK(result.out.find("highest norms:") != std::string::npos);
  CHECK(result.out.find("neighbors of 't0'") != std::string::npos);

  CHECK(run_cli("analyze --embeddings " + emb.string()).exit_code == 1);
}

TEST_CASE("bench reports timing on a pair file") {
  const fs::path corpus = write_corpus();
  const fs::path emb = work_dir() / "bench_emb.txt";
  REQUIRE(run_cli("train --corpus " + corpus.string() + " --output " +
                  emb.string() + " --dim 8 --min-count 1")
              .exit_code == 0);
  const fs::path dataset = write_dataset();
  const CliResult result = run_cli("bench --embeddings " + emb.string() +
                                   " --pairs " + dataset.string());
  CHECK(result.exit_code == 0);
  CHECK(result.out.find("seconds_per_pair=") != std::string::npos);
  CHECK(result.out.find("scored=4") != std::string::npos);
}

TEST_CASE("export and import convert between the formats") {
  const fs::path corpus = write_corpus();
  const fs::path emb = work_dir() / "conv_emb.txt";
  const fs::path ck = work_dir() / "conv_ck.bin";
  REQUIRE(run_cli("train --corpus " + corpus.string() + " --output " +
                  emb.string() + " --dim 8 --min-count 1 --save-checkpoint " +
                  ck.string())
              .exit_code == 0);

  // a checkpoint exports to exactly the text table the run wrote
  const fs::path exported = work_dir() / "conv_exported.txt";
  CHECK(run_cli("export --embeddings " + ck.string() + " --output " +
                exported.string())
            .exit_code == 0);
  CHECK(slurp(exported) == slurp(emb));

  // text imports into a checkpoint that exports back to the same text
  const fs::path imported = work_dir() / "conv_imported.bin";
  CHECK(run_cli("import --embeddings " + emb.string() + " --output " +
                imported.string())
            .exit_code == 0);
  const fs::path back = work_dir() / "conv_back.txt";
  CHECK(run_cli("export --embeddings " + imported.string() + " --output " +
                back.string())
            .exit_code == 0);
  CHECK(slurp(back) == slurp(emb));
}

TEST_CASE("checkpoint resume through the cli matches the straight run") {
  const fs::path corpus = write_corpus();
  const std::string common = " --dim 8 --epochs 3 --min-count 1 --seed 42" +
                             std::string(" --batch-size 16");
  const fs::path full = work_dir() / "resume_full.txt";
  REQUIRE(run_cli("train --corpus " + corpus.string() + " --output " +
                  full.string() + common)
              .exit_code == 0);

  const fs::path leg1 = work_dir() / "resume_leg1.txt";
  const fs::path ck = work_dir() / "resume_ck.bin";
  REQUIRE(run_cli("train --corpus " + corpus.string() + " --output " +
                  leg1.string() + common + " --stop-after-epoch 1" +
                  " --save-checkpoint " + ck.string())
              .exit_code == 0);

  const fs::path resumed = work_dir() / "resume_done.txt";
  REQUIRE(run_cli("train --corpus " + corpus.string() + " --output " +
                  resumed.string() + common + " --resume " + ck.string())
              .exit_code == 0);
  CHECK(slurp(resumed) == slurp(full));
}
