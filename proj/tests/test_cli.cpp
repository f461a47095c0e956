#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "morphlbl/cli.hpp"
#include "morphlbl/io_util.hpp"
#include "test_support.hpp"

using namespace morphlbl;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) { return read_file(p.string()); }

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

// synth -> train -> every evaluation, inside `dir`.
void pipeline(const fs::path& dir, const std::string& mode = "morph-lbl") {
  const auto d = dir.string();
  REQUIRE(run({"synth", "--out", d + "/c.tsv", "--tokens", "3000", "--types", "60"}).code == 0);
  auto t = run({"train", "--corpus", d + "/c.tsv", "--mode", mode, "--dim", "6", "--epochs", "2",
                "--lr", "0.05", "--labeled-prefix", "1500", "--out", d + "/m.model"});
  INFO(t.err);
  REQUIRE(t.code == 0);
  REQUIRE(run({"eval-morphosim", "--model", d + "/m.model", "--ks", "2,4", "--out", d + "/ms.tsv"}).code == 0);
  REQUIRE(run({"eval-knn", "--model", d + "/m.model", "--out", d + "/knn.tsv"}).code == 0);
  REQUIRE(run({"neighbors", "--model", d + "/m.model", "--k", "3", "--out", d + "/nb.tsv"}).code == 0);
  REQUIRE(run({"project", "--model", d + "/m.model", "--out", d + "/proj.tsv"}).code == 0);
}

}  // namespace

TEST_CASE("usage errors") {
  CHECK(run({}).code == kExitUsage);
  auto bad = run({"train", "--bogus"});
  CHECK(bad.code == kExitUsage);
  CHECK(bad.err.rfind("error: usage: ", 0) == 0);
  CHECK(count_lines(bad.err) == 1);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  CHECK(run({"--help"}).code == kExitOk);
  CHECK(run({"train", "--corpus", "x", "--out", "y", "--mode", "word2vec"}).code == kExitUsage);
  CHECK(run({"eval-knn"}).code == kExitUsage);
}

TEST_CASE("full pipeline writes every report") {
  const auto dir = testing::scratch_dir("cli_pipeline");
  pipeline(dir);
  for (const char* f : {"c.tsv", "m.model", "m.model.vocab.tsv", "m.model.tags.tsv", "m.model.report.tsv",
                        "ms.tsv", "knn.tsv", "nb.tsv", "proj.tsv"}) {
    CHECK(fs::exists(dir / f));
  }
  CHECK(slurp(dir / "m.model.report.tsv").rfind("epoch\tnll_labeled\tnll_unlabeled\tnll_total\n", 0) == 0);
  CHECK(count_lines(slurp(dir / "m.model.report.tsv")) == 3);
  const auto ms = slurp(dir / "ms.tsv");
  CHECK(ms.rfind("k\tmean\tcount\n2\t", 0) == 0);
  CHECK(count_lines(ms) == 3);
  const auto knn = slurp(dir / "knn.tsv");
  CHECK(knn.rfind("bucket\tmean_acc\tstd\tfolds\nall-types\t", 0) == 0);
  CHECK(knn.find("\nno-tags\t") != std::string::npos);
  CHECK(slurp(dir / "nb.tsv").rfind("word\trank\tneighbor\tcos_dist\tmin_hamming\n", 0) == 0);
  CHECK(count_lines(slurp(dir / "proj.tsv")) == 61);
  // No temporary files left behind.
  for (const auto& entry : fs::directory_iterator(dir)) CHECK(entry.path().extension() != ".tmp");

  auto info = run({"inspect", "--model", (dir / "m.model").string()});
  CHECK(info.code == 0);
  CHECK(info.out.find("words\t60\n") != std::string::npos);
  CHECK(info.out.find("dim\t6\n") != std::string::npos);
  CHECK(info.out.find("norm.subtag_weights\t") != std::string::npos);
}

TEST_CASE("resolved configuration is echoed") {
  const auto dir = testing::scratch_dir("cli_echo");
  auto s = run({"synth", "--out", (dir / "c.tsv").string(), "--tokens", "500", "--noise", "0.2"});
  CHECK(s.out.find("#   tokens = 500\n") != std::string::npos);
  CHECK(s.out.find("#   noise = 0.2\n") != std::string::npos);
  auto t = run({"train", "--corpus", (dir / "c.tsv").string(), "--dim", "4", "--epochs", "1", "--out",
                (dir / "m.model").string()});
  REQUIRE(t.code == 0);
  CHECK(t.out.find("#   dim=4") != std::string::npos);
  CHECK(t.out.find("#   lr=0.1") != std::string::npos);
  CHECK(t.out.find("#   order=4") != std::string::npos);
}

TEST_CASE("pipeline output is reproducible byte for byte") {
  const auto a = testing::scratch_dir("cli_det_a");
  const auto b = testing::scratch_dir("cli_det_b");
  pipeline(a, "lbl");
  pipeline(b, "lbl");
  for (const char* f : {"c.tsv", "m.model", "m.model.report.tsv", "ms.tsv", "knn.tsv", "nb.tsv", "proj.tsv"}) {
    INFO(f);
    CHECK(slurp(a / f) == slurp(b / f));
  }
}

TEST_CASE("data and numeric failures map to exit codes") {
  const auto dir = testing::scratch_dir("cli_errors");
  const auto d = dir.string();
  write_file_atomic(d + "/bad.tsv", "a\tN\nb\n");
  auto bad = run({"train", "--corpus", d + "/bad.tsv", "--out", d + "/m.model"});
  CHECK(bad.code == kExitData);
  CHECK(bad.err.rfind("error: data: ", 0) == 0);
  CHECK(bad.err.find("line 2") != std::string::npos);
  CHECK(count_lines(bad.err) == 1);

  CHECK(run({"train", "--corpus", d + "/missing.tsv", "--out", d + "/m.model"}).code == kExitData);
  CHECK(run({"inspect", "--model", d + "/bad.tsv"}).code == kExitData);

  REQUIRE(run({"synth", "--out", d + "/c.tsv", "--tokens", "2000", "--types", "40"}).code == 0);
  auto prefix = run({"train", "--corpus", d + "/c.tsv", "--labeled-prefix", "2001", "--out", d + "/m.model"});
  CHECK(prefix.code == kExitUsage);

  auto diverge = run({"train", "--corpus", d + "/c.tsv", "--dim", "8", "--lr", "1e6", "--init-scale", "1",
                      "--out", d + "/m.model"});
  CHECK(diverge.code == kExitNumeric);
  CHECK(diverge.err.rfind("error: numeric: ", 0) == 0);
  CHECK(diverge.err.find("step") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "m.model"));

  auto spec = run({"synth", "--out", d + "/x.tsv", "--noise", "1.5"});
  CHECK(spec.code == kExitUsage);
  CHECK_FALSE(fs::exists(dir / "x.tsv"));
}

TEST_CASE("config files and spec files") {
  const auto dir = testing::scratch_dir("cli_config");
  const auto d = dir.string();
  write_file_atomic(d + "/spec.txt", "tokens = 1500\nvocab_size = 30\ntemplate = 1 Art N\n");
  REQUIRE(run({"synth", "--spec", d + "/spec.txt", "--out", d + "/c.tsv", "--seed", "3"}).code == 0);
  std::ifstream in(d + "/c.tsv");
  auto parsed = parse_corpus(in);
  CHECK(parsed.corpus.token_count() == 1500);
  CHECK(parsed.vocab.size() <= 30);

  write_file_atomic(d + "/train.ini", "dim=5\nepochs=1\nmode=lbl\n");
  auto t = run({"train", "--config", d + "/train.ini", "--corpus", d + "/c.tsv", "--out", d + "/m.model"});
  REQUIRE(t.code == 0);
  CHECK(t.out.find("#   mode=\"lbl\"") != std::string::npos);
  CHECK(run({"inspect", "--model", d + "/m.model"}).out.find("dim\t5\n") != std::string::npos);

  auto flag_wins = run({"train", "--config", d + "/train.ini", "--dim", "3", "--corpus", d + "/c.tsv", "--out",
                        d + "/m.model"});
  REQUIRE(flag_wins.code == 0);
  CHECK(flag_wins.out.find("#   dim=3\n") != std::string::npos);

  write_file_atomic(d + "/bad.ini", "colour=red\n");
  auto unknown = run({"train", "--config", d + "/bad.ini", "--corpus", d + "/c.tsv", "--out", d + "/m.model"});
  CHECK(unknown.code == kExitUsage);
  CHECK(unknown.err.find("colour") != std::string::npos);
  write_file_atomic(d + "/bad.ini", "dim=wide\n");
  CHECK(run({"train", "--config", d + "/bad.ini", "--corpus", d + "/c.tsv", "--out", d + "/m.model"}).code ==
        kExitUsage);
}

TEST_CASE("external embeddings and word queries") {
  const auto dir = testing::scratch_dir("cli_external");
  const auto d = dir.string();
  write_file_atomic(d + "/c.tsv", "a\tN.Sg\nb\tN.Pl\nc\tAdj.Sg\nd\t_\n\na\tN.Sg\nc\tAdj.Sg\n");
  write_file_atomic(d + "/e.tsv", "a\t1\t0\nb\t0.9\t0.1\nc\t0\t1\nd\t1\t1\n");
  auto nb = run({"neighbors", "--embeddings", d + "/e.tsv", "--corpus", d + "/c.tsv", "--word", "a", "--k", "3"});
  REQUIRE(nb.code == 0);
  CHECK(nb.out.find("a\t1\tb\t") != std::string::npos);
  CHECK(nb.out.find("\tNA\n") != std::string::npos);
  CHECK(run({"neighbors", "--embeddings", d + "/e.tsv", "--word", "a"}).code == kExitUsage);
  CHECK(run({"neighbors", "--embeddings", d + "/e.tsv", "--corpus", d + "/c.tsv", "--model", "m"}).code ==
        kExitUsage);
  CHECK(run({"neighbors", "--embeddings", d + "/e.tsv", "--corpus", d + "/c.tsv", "--word", "zzz"}).code ==
        kExitData);
  auto pj = run({"project", "--embeddings", d + "/e.tsv", "--corpus", d + "/c.tsv", "--out", d + "/p.tsv"});
  CHECK(pj.code == 0);
  CHECK(slurp(dir / "p.tsv").find("d\t") != std::string::npos);
}
