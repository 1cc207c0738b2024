// swlm: command-line driver for the subword LM / KWS pipeline.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "swlm/approximator.h"
#include "swlm/backoff_model.h"
#include "swlm/corpus_io.h"
#include "swlm/error.h"
#include "swlm/kws.h"
#include "swlm/log.h"
#include "swlm/model_builder.h"
#include "swlm/ngram_counts.h"
#include "swlm/pipeline.h"
#include "swlm/rnn.h"
#include "swlm/scorer_stream.h"
#include "swlm/segmentation.h"
#include "swlm/util.h"

namespace fs = std::filesystem;
using namespace swlm;

namespace {

// A run: merged settings plus the files it touched, for the manifest.
struct Run {
  std::string command;
  Config cfg;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  std::string Need(const std::string &key) const {
    auto v = cfg.Get(key);
    if (!v || v->empty()) throw UsageError("missing required setting '" + key + "'");
    return *v;
  }
  std::string In(const std::string &key) {
    std::string p = Need(key);
    if (!fs::exists(p)) throw DataError("input file not found: " + p);
    inputs.push_back(p);
    return p;
  }
  std::optional<std::string> OptIn(const std::string &key) {
    if (!cfg.Has(key) || cfg.Get(key)->empty()) return std::nullopt;
    return In(key);
  }
  bool Flag(const std::string &key) const {
    auto v = cfg.GetString(key, "0");
    return v == "1" || v == "true" || v == "yes";
  }
  int Int(const std::string &key, long long fallback) const {
    return static_cast<int>(cfg.GetInt(key, fallback));
  }
  double Double(const std::string &key, double fallback) const {
    return cfg.GetDouble(key, fallback);
  }
  std::string Out() {
    std::string p = Need("out");
    outputs.push_back(p);
    return p;
  }
  void Manifest(const std::string &primary) {
    WriteManifest(primary, command, cfg, inputs, outputs);
  }
};

struct Binding {
  CLI::Option *opt;
  std::string key;
  std::shared_ptr<std::string> value;
  std::shared_ptr<bool> flag;
};

struct Command {
  CLI::App *app;
  std::string name;
  std::vector<Binding> bindings;
  std::function<void(Run &)> handler;

  Command &Opt(const std::string &flag, const std::string &key,
               const std::string &help) {
    auto v = std::make_shared<std::string>();
    bindings.push_back({app->add_option(flag, *v, help), key, v, nullptr});
    return *this;
  }
  Command &Switch(const std::string &flag, const std::string &key,
                  const std::string &help) {
    auto b = std::make_shared<bool>(false);
    bindings.push_back({app->add_flag(flag, *b, help), key, nullptr, b});
    return *this;
  }
};

Vocabulary LoadVocab(Run &run, const std::string &corpus_key = "corpus") {
  if (auto v = run.OptIn("vocab")) return Vocabulary::Read(*v);
  if (run.cfg.Has(corpus_key)) {
    std::string path = run.cfg.GetString(corpus_key, "");
    if (!fs::exists(path)) throw DataError("input file not found: " + path);
    return Vocabulary::FromCorpus(ReadTextCorpus(path));
  }
  throw UsageError("need --vocab or --" + corpus_key + " to fix the vocabulary");
}

MarkingScheme Scheme(const Run &run) {
  return MarkingScheme::Parse(run.cfg.GetString("scheme", "right"),
                              run.cfg.GetString("marker", "+"));
}

GrowConfig Grow(const Run &run) {
  GrowConfig g;
  g.n_max = run.Int("order", 3);
  g.epsilon = run.Double("epsilon", 0.1);
  g.smoothing = run.Double("smoothing", 0.5);
  if (run.cfg.Has("discount")) g.discount = run.Double("discount", 0.5);
  if (run.cfg.Has("target_size"))
    g.target_size = static_cast<size_t>(run.cfg.GetInt("target_size", 0));
  g.Validate();
  return g;
}

void SaveArpa(Run &run, const BackoffModel &m) {
  std::string out = run.Out();
  WriteArpaFile(m, out);
  run.Manifest(out);
  std::cout << "wrote " << out << " ngrams=" << m.TotalNgrams()
            << " order=" << m.max_order() << "\n";
}

std::vector<std::string> Flatten(const std::vector<std::vector<std::string>> &lines) {
  std::vector<std::string> out;
  for (const auto &l : lines) out.insert(out.end(), l.begin(), l.end());
  return out;
}

RnnConfig RnnSettings(const Run &run) {
  RnnConfig c;
  c.emb_dim = static_cast<size_t>(run.Int("emb", 8));
  c.hidden_dim = static_cast<size_t>(run.Int("hidden", 16));
  c.epochs = run.Int("epochs", 10);
  c.learning_rate = run.Double("lr", 0.1);
  c.seed = static_cast<uint64_t>(run.cfg.GetInt("seed", 1));
  return c;
}

// ---- subcommands ----

void Segment(Run &run) {
  auto scheme = Scheme(run);
  std::optional<SegmentationMap> map;
  if (auto m = run.OptIn("map")) map = SegmentationMap::Read(*m);
  auto words = ReadWordLines(run.In("input"));
  TextCorpus out = SegmentWords(words, scheme, map ? &*map : nullptr);
  std::string path = run.Out();
  WriteTextCorpus(path, out);
  run.Manifest(path);
}

void Count(Run &run) {
  auto text = ReadTextCorpus(run.In("corpus"));
  Vocabulary vocab = LoadVocab(run);
  CountTrie counts = CountNgrams(ToIds(text, vocab), run.Int("order", 3), vocab.Hash());
  std::string out = run.Out();
  counts.Save(out);
  if (auto vo = run.cfg.Get("vocab_out")) {
    vocab.Write(*vo);
    run.outputs.push_back(*vo);
  }
  run.Manifest(out);
  std::cout << "positions=" << counts.TotalPredictions() << "\n";
}

void TrainRnnCmd(Run &run) {
  auto text = ReadTextCorpus(run.In("corpus"));
  Vocabulary vocab = LoadVocab(run);
  std::optional<Corpus> valid;
  if (auto v = run.OptIn("valid")) valid = ToIds(ReadTextCorpus(*v), vocab);
  auto res = TrainRnn(ToIds(text, vocab), vocab, RnnSettings(run),
                      valid ? &*valid : nullptr);
  std::string out = run.Out();
  res.params.Save(out);
  run.Manifest(out);
  std::cout << "best_epoch=" << res.best_epoch << " initial_loss="
            << FormatFixed(res.initial_loss, 6);
  for (size_t i = 0; i < res.epoch_losses.size(); ++i)
    std::cout << " epoch" << i + 1 << "=" << FormatFixed(res.epoch_losses[i], 6);
  std::cout << "\n";
}

void EmitStream(Run &run) {
  RnnParams params = RnnParams::Load(run.In("rnn"));
  auto text = ReadTextCorpus(run.In("corpus"));
  Vocabulary vocab = LoadVocab(run);
  if (vocab.Hash() != params.vocab_hash)
    throw DataError("RNN was trained over a different vocabulary");
  RnnScorer scorer(params);
  std::string out = run.Out();
  WriteScorerStream(out, scorer, ToIds(text, vocab),
                    static_cast<uint32_t>(run.Int("k", 3)), run.Flag("full"));
  run.Manifest(out);
}

void ApproxPc(Run &run) {
  std::string stream = run.In("stream");
  Vocabulary vocab = LoadVocab(run);
  int n = run.Int("order", 3);
  Corpus corpus;
  {
    FileSource src(stream);
    corpus = CorpusFromStream(src);
  }
  CountTrie counts = CountNgrams(corpus, n, vocab.Hash());
  FileSource src(stream);
  ScoreTable table = PcScores(src, counts, n,
                              run.Flag("strict") ? PcNormalizer::kStrict
                                                 : PcNormalizer::kFullVector);
  if (auto t = run.cfg.Get("table_out")) {
    table.Save(*t);
    run.outputs.push_back(*t);
  }
  SaveArpa(run, BuildBackoffPc(table, vocab, Grow(run)));
}

void ApproxOurs(Run &run) {
  FileSource src(run.In("stream"));
  Vocabulary vocab = LoadVocab(run);
  ScoreTable table = OursScores(src, run.Int("order", 3));
  if (auto t = run.cfg.Get("table_out")) {
    table.Save(*t);
    run.outputs.push_back(*t);
  }
  SaveArpa(run, BuildBackoffOurs(table, vocab, Grow(run)));
}

void GrowKnCmd(Run &run) {
  GrowConfig g = Grow(run);
  CountTrie counts;
  Vocabulary vocab;
  if (auto c = run.OptIn("counts")) {
    counts = CountTrie::Load(*c);
    vocab = Vocabulary::Read(run.In("vocab"));
  } else {
    auto text = ReadTextCorpus(run.In("corpus"));
    vocab = LoadVocab(run);
    counts = CountNgrams(ToIds(text, vocab), g.n_max, vocab.Hash());
  }
  GrowReport report;
  BackoffModel m = GrowKn(counts, vocab, g, &report);
  std::ostringstream d;
  for (double x : report.discounts) d << " " << FormatFixed(x, 4);
  Log(LogLevel::kInfo, "kn_discounts", {{"values", d.str()}});
  SaveArpa(run, m);
}

void GrowRnnv(Run &run) {
  GrowConfig g = Grow(run);
  Vocabulary vocab = LoadVocab(run);
  BackoffModel m(vocab);
  if (auto s = run.OptIn("stream")) {
    FileSource src(*s);
    m = GrowApprox(src, vocab, g);
  } else {
    RnnParams params = RnnParams::Load(run.In("rnn"));
    auto text = ReadTextCorpus(run.In("corpus"));
    Corpus corpus = ToIds(text, vocab);
    RnnScorer scorer(params);
    LiveSource src(scorer, corpus, static_cast<uint32_t>(run.Int("k", 3)), false);
    m = GrowApprox(src, vocab, g);
  }
  SaveArpa(run, m);
}

void Prune(Run &run) {
  BackoffModel m = ReadArpaFile(run.In("model"));
  int order = run.Int("order", m.max_order());
  size_t target;
  if (auto match = run.OptIn("match")) {
    target = ReadArpaFile(*match).NumNgrams(order);
  } else {
    long long t = run.cfg.GetInt("target", -1);
    if (t < 0) throw UsageError("prune needs --target or --match");
    target = static_cast<size_t>(t);
  }
  SaveArpa(run, PruneToSize(m, target, order));
}

void InterpolateCmd(Run &run) {
  BackoffModel a = ReadArpaFile(run.In("a"));
  BackoffModel b = ReadArpaFile(run.In("b"));
  InterpolationSpec spec;
  spec.lambda = run.Double("lambda", 0.5);
  if (run.Flag("exact")) spec.mode = InterpolationSpec::Mode::kExact;
  SaveArpa(run, Interpolate(a, b, spec));
}

void ArpaRead(Run &run) {
  BackoffModel m = ReadArpaFile(run.In("file"));
  std::cout << "order=" << m.max_order() << " vocab=" << m.vocab().size();
  for (int k = 1; k <= m.max_order(); ++k)
    std::cout << " ngram" << k << "=" << m.NumNgrams(k);
  std::cout << "\n";
}

void ArpaWrite(Run &run) {
  // Binary model snapshot or ARPA in, canonical ARPA out.
  std::string in = run.In("model");
  std::ifstream probe(in, std::ios::binary);
  char magic[4] = {};
  probe.read(magic, 4);
  BackoffModel m = std::string(magic, 4) == "SWBM" ? BackoffModel::Load(in)
                                                   : ReadArpaFile(in);
  SaveArpa(run, m);
}

void ArpaValidate(Run &run) {
  BackoffModel m = ReadArpaFile(run.In("file"));
  m.CheckPrefixClosed();
  auto rep = ValidateNormalization(m);
  double tol = run.Double("tol", 1e-4);
  std::cout << "contexts=" << rep.contexts_checked
            << " max_deviation=" << rep.max_deviation
            << " worst_context=\"" << GramToString(m.vocab(), rep.worst_context)
            << "\"\n";
  if (rep.max_deviation >= tol)
    throw NumericalError("model is not normalized: max deviation " +
                         std::to_string(rep.max_deviation));
}

void EvalMtwv(Run &run) {
  ReferenceSet refs = ReadReferences(run.In("refs"));
  DetectionSet dets = ReadDetections(run.In("dets"));
  Alignment al = Align(dets, refs, run.Double("tol", 0.5));
  SweepRow row;
  row.label = run.cfg.GetString("label", "detections");
  row.result = TwvCurve(al, refs, run.Double("beta", kDefaultBeta));
  std::string report = SweepReport({row});
  if (run.cfg.Has("out")) {
    std::string out = run.Out();
    std::ofstream(out) << report;
    run.Manifest(out);
  }
  std::cout << report;
}

KwsTask LoadTask(Run &run, std::optional<SegmentationMap> &map) {
  KwsTask task;
  task.scheme = Scheme(run);
  if (auto m = run.OptIn("map")) {
    map = SegmentationMap::Read(*m);
    task.map = &*map;
  }
  task.test_words = ReadWordLines(run.In("test"));
  task.keywords = ReadKeywordList(run.In("keywords"));
  task.surrogate.beam = run.Double("beam", task.surrogate.beam);
  task.surrogate.acoustic_weight =
      run.Double("acoustic_weight", task.surrogate.acoustic_weight);
  task.surrogate.max_edits = run.Int("max_edits", task.surrogate.max_edits);
  task.tolerance = run.Double("tol", 0.5);
  task.beta = run.Double("beta", kDefaultBeta);
  return task;
}

void Detect(Run &run) {
  std::optional<SegmentationMap> map;
  KwsTask task = LoadTask(run, map);
  BackoffModel lm = ReadArpaFile(run.In("model"));
  ReferenceSet refs = BuildReferences(task.test_words, task.keywords);
  DetectionSet dets = SimulateDetections(lm, task.test_words, task.keywords,
                                         task.scheme, task.map, task.surrogate);
  std::string out = run.Out();
  WriteDetections(out, dets);
  if (auto r = run.cfg.Get("refs_out")) {
    WriteReferences(*r, refs);
    run.outputs.push_back(*r);
  }
  run.Manifest(out);
}

void Sweep(Run &run, const std::string &axis) {
  std::optional<SegmentationMap> map;
  KwsTask task = LoadTask(run, map);
  auto text = ReadTextCorpus(run.In("corpus"));
  Vocabulary vocab = LoadVocab(run);
  Corpus train = ToIds(text, vocab);
  RnnParams params;
  if (auto r = run.OptIn("rnn")) {
    params = RnnParams::Load(*r);
    if (params.vocab_hash != vocab.Hash())
      throw DataError("RNN was trained over a different vocabulary");
  } else {
    params = TrainRnn(train, vocab, RnnSettings(run)).params;
  }

  SweepSetup setup;
  setup.vocab = &vocab;
  setup.train = &train;
  setup.rnn = &params;
  setup.grow = Grow(run);
  setup.k = static_cast<uint32_t>(run.Int("k", 3));
  setup.task = &task;

  std::string dir = run.Need("out");
  fs::create_directories(dir);
  auto sink = [&](const std::string &label, const BackoffModel &m) {
    std::string name = label;
    for (char &c : name)
      if (c == '=') c = '_';
    std::string path = (fs::path(dir) / (name + ".arpa")).string();
    WriteArpaFile(m, path);
    run.outputs.push_back(path);
  };

  std::vector<SweepRow> rows;
  if (axis == "lambda") {
    std::vector<double> values;
    for (const auto &s : SplitOn(run.cfg.GetString("values", "0,0.25,0.5,0.75,1"), ','))
      values.push_back(ParseDouble(s, "--values"));
    rows = SweepLambda(setup, values, sink);
  } else {
    long long from = run.cfg.GetInt("from", axis == "k" ? 1 : 2);
    long long to = run.cfg.GetInt("to", axis == "k" ? 6 : 5);
    if (from > to || from < (axis == "k" ? 0 : 1))
      throw UsageError("bad sweep range");
    if (axis == "k") {
      std::vector<uint32_t> ks;
      for (long long k = from; k <= to; ++k) ks.push_back(static_cast<uint32_t>(k));
      rows = SweepK(setup, ks, sink);
    } else {
      std::vector<int> ns;
      for (long long n = from; n <= to; ++n) ns.push_back(static_cast<int>(n));
      rows = SweepN(setup, ns, sink);
    }
  }
  std::string report_path = (fs::path(dir) / "report.tsv").string();
  std::string report = SweepReport(rows);
  std::ofstream(report_path) << report;
  run.outputs.push_back(report_path);
  run.Manifest(report_path);
  std::cout << report;
}

void StatsLengths(Run &run) {
  auto corpus = ReadTextCorpus(run.In("corpus"));
  std::vector<std::string> words;
  if (auto k = run.OptIn("keywords")) {
    for (const auto &kw : ReadKeywordList(*k))
      for (const auto &w : SplitWhitespace(kw.text)) words.push_back(w);
  } else {
    words = Flatten(ReadWordLines(run.In("words")));
  }
  LengthStats s = ComputeLengthStats(corpus, words, Scheme(run));
  std::cout << "occurrences=" << s.occurrences << " subwords=" << s.subwords
            << " mean=" << (s.Mean() ? FormatFixed(*s.Mean(), 4) : "undefined")
            << "\n";
}

void OovKeywords(Run &run) {
  auto train = Flatten(ReadWordLines(run.In("train")));
  auto test = Flatten(ReadWordLines(run.In("test")));
  auto oov = ExtractOovKeywords(train, test);
  std::vector<Keyword> kws;
  for (size_t i = 0; i < oov.size(); ++i)
    kws.push_back({std::to_string(i + 1), oov[i]});
  std::string out = run.Out();
  WriteKeywordList(out, kws);
  run.Manifest(out);
  std::cout << "keywords=" << kws.size() << "\n";
}

void Ppl(Run &run) {
  BackoffModel m = ReadArpaFile(run.In("model"));
  auto text = ReadTextCorpus(run.In("corpus"));
  std::cout << "perplexity=" << FormatFixed(Perplexity(m, text), 6)
            << " tokens=" << CountPredictions(ToIds(text, m.vocab())) << "\n";
}

void Verify(Run &run) {
  auto rep = VerifyManifests(run.Need("dir"));
  for (const auto &mm : rep.mismatches)
    std::cout << "mismatch manifest=" << mm.manifest << " file=" << mm.path
              << " expected=" << mm.expected << " actual=" << mm.actual << "\n";
  std::cout << (rep.ok() ? "ok" : "drift") << " manifests=" << rep.manifests
            << " files=" << rep.files_checked << "\n";
  if (!rep.ok())
    throw DataError(std::to_string(rep.mismatches.size()) +
                    " file(s) differ from their manifest");
}

std::string Quote(const std::string &s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

int Fail(ExitCode code, const std::string &what) {
  static const std::map<ExitCode, const char *> kinds = {
      {ExitCode::kUsage, "usage"},
      {ExitCode::kData, "data"},
      {ExitCode::kNumerical, "numerical"}};
  std::cerr << "error code=" << static_cast<int>(code)
            << " kind=" << kinds.at(code) << " msg=" << Quote(what) << "\n";
  return static_cast<int>(code);
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Subword n-gram language models approximated from a recurrent "
               "network, with keyword-search scoring"};
  app.require_subcommand(1);
  std::string config_path;
  if (const char *env = std::getenv("SWLM_CONFIG")) config_path = env;
  app.add_option("--config", config_path,
                 "key=value settings file (default: $SWLM_CONFIG); flags win");
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "debug|info|warn|error|silent");

  std::vector<std::unique_ptr<Command>> commands;
  auto add = [&](CLI::App *parent, const std::string &name, const std::string &help,
                 std::function<void(Run &)> fn) -> Command & {
    commands.push_back(std::make_unique<Command>());
    Command &c = *commands.back();
    c.app = parent->add_subcommand(name, help);
    c.name = parent == &app ? name : parent->get_name() + " " + name;
    c.handler = std::move(fn);
    return c;
  };
  auto common_vocab = [](Command &c) {
    c.Opt("--vocab", "vocab", "vocabulary file (one token per line)");
  };
  auto grow_opts = [](Command &c) {
    c.Opt("--order,-n", "order", "maximum n-gram order (default 3)")
        .Opt("--epsilon", "epsilon", "growing threshold (default 0.1)")
        .Opt("--smoothing,-S", "smoothing", "smoothing factor S (default 0.5)")
        .Opt("--target-size", "target_size", "stop growing at this many n-grams");
  };
  auto scheme_opts = [](Command &c) {
    c.Opt("--scheme", "scheme", "right|both (default right)")
        .Opt("--marker", "marker", "boundary marker (default +)")
        .Opt("--map", "map", "word<TAB>subwords segmentation map");
  };
  auto kws_opts = [&](Command &c) {
    scheme_opts(c);
    c.Opt("--test", "test", "test words, one sentence per line")
        .Opt("--keywords", "keywords", "keyword list (id<TAB>text)")
        .Opt("--beam", "beam", "surrogate detector beam (default -3)")
        .Opt("--acoustic-weight", "acoustic_weight", "penalty per edit (default 0.5)")
        .Opt("--max-edits", "max_edits", "confusable window edits (default 2)")
        .Opt("--tol", "tol", "alignment tolerance in seconds (default 0.5)")
        .Opt("--beta", "beta", "false alarm weight (default 999.9)");
  };
  auto rnn_opts = [](Command &c) {
    c.Opt("--emb", "emb", "embedding size (default 8)")
        .Opt("--hidden", "hidden", "hidden size (default 16)")
        .Opt("--epochs", "epochs", "training epochs (default 10)")
        .Opt("--lr", "lr", "learning rate (default 0.1)")
        .Opt("--seed", "seed", "random seed (default 1)");
  };

  {
    auto &c = add(&app, "segment", "segment word text into marked subwords", Segment);
    scheme_opts(c);
    c.Opt("--input", "input", "word text").Opt("--out,-o", "out", "output corpus");
  }
  {
    auto &c = add(&app, "count", "count n-grams of a subword corpus", Count);
    common_vocab(c);
    c.Opt("--corpus", "corpus", "subword corpus")
        .Opt("--order,-n", "order", "maximum order (default 3)")
        .Opt("--vocab-out", "vocab_out", "also write the vocabulary")
        .Opt("--out,-o", "out", "count table");
  }
  {
    auto &c = add(&app, "train-rnn", "train the recurrent LM", TrainRnnCmd);
    common_vocab(c);
    rnn_opts(c);
    c.Opt("--corpus", "corpus", "training corpus")
        .Opt("--valid", "valid", "validation corpus for best-epoch selection")
        .Opt("--out,-o", "out", "parameter snapshot");
  }
  {
    auto &c = add(&app, "emit-stream", "write the scorer stream of a corpus", EmitStream);
    common_vocab(c);
    c.Opt("--rnn", "rnn", "parameter snapshot")
        .Opt("--corpus", "corpus", "corpus to score")
        .Opt("--k,-k", "k", "top-K size (default 3)")
        .Switch("--full", "full", "also store whole output vectors")
        .Opt("--out,-o", "out", "stream file");
  }
  {
    auto &c = add(&app, "approx-pc", "probability-conversion n-gram model", ApproxPc);
    common_vocab(c);
    grow_opts(c);
    c.Opt("--corpus", "corpus", "corpus the stream was scored on (vocabulary)")
        .Opt("--stream", "stream", "stream with full vectors")
        .Switch("--strict", "strict", "normalize over observed continuations only")
        .Opt("--table-out", "table_out", "also save the score table")
        .Opt("--out,-o", "out", "ARPA output");
  }
  {
    auto &c = add(&app, "approx-ours", "top-K sum n-gram model", ApproxOurs);
    common_vocab(c);
    grow_opts(c);
    c.Opt("--corpus", "corpus", "corpus the stream was scored on (vocabulary)")
        .Opt("--stream", "stream", "scorer stream")
        .Opt("--table-out", "table_out", "also save the score table")
        .Opt("--out,-o", "out", "ARPA output");
  }
  {
    auto &c = add(&app, "grow-kn", "variable-order Kneser-Ney model", GrowKnCmd);
    common_vocab(c);
    grow_opts(c);
    c.Opt("--corpus", "corpus", "training corpus")
        .Opt("--counts", "counts", "count table instead of a corpus (needs --vocab)")
        .Opt("--discount,-D", "discount", "absolute discount (default: estimated)")
        .Opt("--out,-o", "out", "ARPA output");
  }
  {
    auto &c = add(&app, "grow-rnnv", "variable-order model grown from top-K sums", GrowRnnv);
    common_vocab(c);
    grow_opts(c);
    c.Opt("--corpus", "corpus", "training corpus")
        .Opt("--stream", "stream", "scorer stream (instead of --rnn)")
        .Opt("--rnn", "rnn", "parameter snapshot scored on the fly")
        .Opt("--k,-k", "k", "top-K size when scoring on the fly (default 3)")
        .Opt("--out,-o", "out", "ARPA output");
  }
  {
    auto &c = add(&app, "prune", "keep the highest-mass n-grams of one order", Prune);
    c.Opt("--model", "model", "ARPA input")
        .Opt("--order,-n", "order", "order to prune (default: highest)")
        .Opt("--target", "target", "n-grams to keep")
        .Opt("--match", "match", "keep as many as this ARPA model has")
        .Opt("--out,-o", "out", "ARPA output");
  }
  {
    auto &c = add(&app, "interpolate", "linear interpolation of two models", InterpolateCmd);
    c.Opt("a", "a", "model A (weight lambda)")
        .Opt("b", "b", "model B (weight 1-lambda)")
        .Opt("--lambda", "lambda", "weight of A (default 0.5)")
        .Switch("--exact", "exact", "store every word under every context")
        .Opt("--out,-o", "out", "ARPA output");
  }
  {
    CLI::App *arpa = app.add_subcommand("arpa", "ARPA utilities");
    arpa->require_subcommand(1);
    add(arpa, "read", "parse and summarize", ArpaRead).Opt("file", "file", "ARPA file");
    add(arpa, "write", "write canonical ARPA", ArpaWrite)
        .Opt("--model", "model", "binary snapshot or ARPA")
        .Opt("--out,-o", "out", "ARPA output");
    add(arpa, "validate", "check structure and normalization", ArpaValidate)
        .Opt("file", "file", "ARPA file")
        .Opt("--tol", "tol", "allowed deviation (default 1e-4)");
  }
  {
    auto &c = add(&app, "eval-mtwv", "score detections against references", EvalMtwv);
    c.Opt("--refs", "refs", "references (duration header, kwid tbeg dur)")
        .Opt("--dets", "dets", "detections (kwid tbeg dur score)")
        .Opt("--tol", "tol", "alignment tolerance (default 0.5)")
        .Opt("--beta", "beta", "false alarm weight (default 999.9)")
        .Opt("--label", "label", "row label")
        .Opt("--out,-o", "out", "report file");
  }
  {
    auto &c = add(&app, "detect", "surrogate detections for an LM", Detect);
    kws_opts(c);
    c.Opt("--model", "model", "ARPA model")
        .Opt("--refs-out", "refs_out", "also write the references")
        .Opt("--out,-o", "out", "detections file");
  }
  {
    CLI::App *sweep = app.add_subcommand("sweep", "parameter sweeps with KWS scoring");
    sweep->require_subcommand(1);
    for (const std::string axis : {"k", "n", "lambda"}) {
      auto &c = add(sweep, axis, "sweep over " + axis,
                    [axis](Run &r) { Sweep(r, axis); });
      common_vocab(c);
      grow_opts(c);
      kws_opts(c);
      rnn_opts(c);
      c.Opt("--corpus", "corpus", "segmented training corpus")
          .Opt("--rnn", "rnn", "trained parameters (default: train here)")
          .Opt("--k,-k", "k", "top-K size where fixed (default 3)")
          .Opt("--out,-o", "out", "output directory");
      if (axis == "lambda")
        c.Opt("--values", "values", "comma separated weights");
      else
        c.Opt("--from", "from", "first value").Opt("--to", "to", "last value");
    }
  }
  {
    auto &c = add(&app, "stats-lengths", "mean subwords per keyword occurrence", StatsLengths);
    c.Opt("--corpus", "corpus", "segmented corpus")
        .Opt("--keywords", "keywords", "keyword list")
        .Opt("--words", "words", "plain word list instead of keywords")
        .Opt("--scheme", "scheme", "right|both")
        .Opt("--marker", "marker", "boundary marker");
  }
  {
    auto &c = add(&app, "oov-keywords", "keyword list from test OOV words", OovKeywords);
    c.Opt("--train", "train", "training words").Opt("--test", "test", "test words")
        .Opt("--out,-o", "out", "keyword list");
  }
  {
    auto &c = add(&app, "ppl", "perplexity of a corpus", Ppl);
    c.Opt("--model", "model", "ARPA model").Opt("--corpus", "corpus", "subword corpus");
  }
  add(&app, "verify", "re-hash the files named by a run directory's manifests", Verify)
      .Opt("dir", "dir", "run directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return Fail(ExitCode::kUsage, e.what());
  }

  try {
    static const std::map<std::string, LogLevel> levels = {
        {"debug", LogLevel::kDebug}, {"info", LogLevel::kInfo},
        {"warn", LogLevel::kWarn},   {"error", LogLevel::kError},
        {"silent", LogLevel::kSilent}};
    auto lv = levels.find(log_level);
    if (lv == levels.end()) throw UsageError("unknown log level " + log_level);
    SetLogLevel(lv->second);

    for (auto &c : commands) {
      if (!c->app->parsed()) continue;
      Run run;
      run.command = c->name;
      if (!config_path.empty()) run.cfg = Config::ReadFile(config_path);
      for (const auto &b : c->bindings) {
        if (b.opt->count() == 0) continue;
        run.cfg.Set(b.key, b.flag ? (*b.flag ? "1" : "0") : *b.value);
      }
      c->handler(run);
      return 0;
    }
    throw UsageError("no subcommand given");
  } catch (const Error &e) {
    return Fail(e.code(), e.what());
  } catch (const std::exception &e) {
    return Fail(ExitCode::kData, e.what());
  }
}
