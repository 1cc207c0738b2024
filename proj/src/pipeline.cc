#include "swlm/pipeline.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "swlm/error.h"
#include "swlm/log.h"
#include "swlm/util.h"

namespace swlm {

namespace fs = std::filesystem;
using nlohmann::json;

Config Config::Parse(const std::string &text, const std::string &name) {
  Config c;
  std::istringstream in(text);
  std::string line;
  size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    auto t = Trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string_view::npos)
      throw UsageError(name + ":" + std::to_string(no) + ": expected key=value");
    auto key = Trim(t.substr(0, eq));
    if (key.empty())
      throw UsageError(name + ":" + std::to_string(no) + ": empty key");
    c.values_[std::string(key)] = std::string(Trim(t.substr(eq + 1)));
  }
  return c;
}

Config Config::ReadFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return Parse(ss.str(), path);
}

std::optional<std::string> Config::Get(const std::string &key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Config::GetString(const std::string &key,
                              const std::string &fallback) const {
  return Get(key).value_or(fallback);
}

double Config::GetDouble(const std::string &key, double fallback) const {
  auto v = Get(key);
  if (!v) return fallback;
  try {
    return ParseDouble(*v, "config key " + key);
  } catch (const DataError &e) {
    throw UsageError(e.what());
  }
}

long long Config::GetInt(const std::string &key, long long fallback) const {
  auto v = Get(key);
  if (!v) return fallback;
  try {
    return ParseInt(*v, "config key " + key);
  } catch (const DataError &e) {
    throw UsageError(e.what());
  }
}

std::string Config::Canonical() const {
  std::string out;
  for (const auto &[k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

std::string Config::Hash() const {
  Fnv1a h;
  h.Update(Canonical());
  return HexDigest(h.Digest());
}

namespace {

std::string ManifestPath(const fs::path &base, const std::string &file) {
  fs::path p = fs::absolute(file).lexically_normal();
  fs::path rel = p.lexically_relative(base);
  if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  return p.generic_string();
}

json FileList(const fs::path &base, const std::vector<std::string> &files) {
  json arr = json::array();
  for (const auto &f : files)
    arr.push_back({{"path", ManifestPath(base, f)}, {"fnv1a64", HashFile(f)}});
  return arr;
}

}  // namespace

std::string WriteManifest(const std::string &output, const std::string &command,
                          const Config &config,
                          const std::vector<std::string> &inputs,
                          const std::vector<std::string> &outputs) {
  std::string path = output + ".manifest.json";
  fs::path base = fs::absolute(path).lexically_normal().parent_path();
  json m;
  m["format"] = "swlm-manifest";
  m["version"] = 1;
  m["command"] = command;
  m["config"] = config.values();
  m["config_hash"] = config.Hash();
  m["inputs"] = FileList(base, inputs);
  m["outputs"] = FileList(base, outputs);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << m.dump(2) << '\n';
  return path;
}

VerifyReport VerifyManifests(const std::string &dir) {
  if (!fs::is_directory(dir)) throw DataError(dir + " is not a directory");
  std::vector<fs::path> manifests;
  for (const auto &e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.size() > 14 &&
        name.ends_with(".manifest.json"))
      manifests.push_back(e.path());
  }
  if (manifests.empty()) throw DataError("no manifest found in " + dir);
  std::sort(manifests.begin(), manifests.end());

  VerifyReport report;
  for (const auto &mp : manifests) {
    std::ifstream in(mp);
    json m;
    try {
      m = json::parse(in);
    } catch (const json::exception &e) {
      throw DataError("unreadable manifest " + mp.string() + ": " + e.what());
    }
    ++report.manifests;
    fs::path base = fs::absolute(mp).parent_path();
    for (const char *section : {"inputs", "outputs"}) {
      if (!m.contains(section)) continue;
      for (const auto &f : m[section]) {
        std::string rel = f.at("path").get<std::string>();
        std::string expected = f.at("fnv1a64").get<std::string>();
        fs::path p = fs::path(rel).is_absolute() ? fs::path(rel) : base / rel;
        ++report.files_checked;
        std::string actual = fs::exists(p) ? HashFile(p.string()) : "missing";
        if (actual != expected)
          report.mismatches.push_back({mp.filename().string(), rel, expected, actual});
      }
    }
  }
  return report;
}

TextCorpus SegmentWords(const std::vector<std::vector<std::string>> &words,
                        const MarkingScheme &scheme, const SegmentationMap *map) {
  TextCorpus out;
  for (const auto &sent : words) {
    std::vector<std::string> toks;
    for (const auto &w : sent) {
      auto s = SegmentWord(w, scheme, map);
      toks.insert(toks.end(), s.begin(), s.end());
    }
    out.push_back(std::move(toks));
  }
  return out;
}

SweepRow EvaluateModel(const std::string &label, const BackoffModel &lm,
                       const KwsTask &task) {
  ReferenceSet refs = BuildReferences(task.test_words, task.keywords);
  DetectionSet dets = SimulateDetections(lm, task.test_words, task.keywords,
                                         task.scheme, task.map, task.surrogate);
  Alignment al = Align(dets, refs, task.tolerance);
  SweepRow row;
  row.label = label;
  row.result = TwvCurve(al, refs, task.beta);
  row.ngrams = lm.TotalNgrams();
  row.perplexity = Perplexity(lm, SegmentWords(task.test_words, task.scheme, task.map));
  return row;
}

namespace {

void CheckSetup(const SweepSetup &s) {
  if (!s.vocab || !s.train || !s.rnn || !s.task)
    throw UsageError("sweep setup is incomplete");
}

BackoffModel Rnnv(const SweepSetup &s, uint32_t k, int n_max) {
  RnnScorer scorer(*s.rnn);
  LiveSource src(scorer, *s.train, k, false);
  GrowConfig g = s.grow;
  g.n_max = n_max;
  return GrowApprox(src, *s.vocab, g);
}

std::string Label(const std::string &key, double v) {
  std::ostringstream os;
  os << key << "=" << v;
  return os.str();
}

}  // namespace

std::vector<SweepRow> SweepK(const SweepSetup &setup, const std::vector<uint32_t> &ks,
                             const ModelSink &sink) {
  CheckSetup(setup);
  std::vector<SweepRow> rows;
  for (uint32_t k : ks) {
    BackoffModel m = Rnnv(setup, k, setup.grow.n_max);
    std::string label = "K=" + std::to_string(k);
    Log(LogLevel::kInfo, "sweep_model", {{"label", label},
                                         {"ngrams", std::to_string(m.TotalNgrams())}});
    if (sink) sink(label, m);
    rows.push_back(EvaluateModel(label, m, *setup.task));
  }
  return rows;
}

std::vector<SweepRow> SweepN(const SweepSetup &setup, const std::vector<int> &ns,
                             const ModelSink &sink) {
  CheckSetup(setup);
  std::vector<SweepRow> rows;
  for (int n : ns) {
    BackoffModel m = Rnnv(setup, setup.k, n);
    std::string label = "n=" + std::to_string(n);
    if (sink) sink(label, m);
    rows.push_back(EvaluateModel(label, m, *setup.task));
  }
  return rows;
}

std::vector<SweepRow> SweepLambda(const SweepSetup &setup,
                                  const std::vector<double> &lambdas,
                                  const ModelSink &sink) {
  CheckSetup(setup);
  BackoffModel rnnv = Rnnv(setup, setup.k, setup.grow.n_max);
  CountTrie counts = CountNgrams(*setup.train, setup.grow.n_max, setup.vocab->Hash());
  BackoffModel knv = GrowKn(counts, *setup.vocab, setup.grow);
  std::vector<SweepRow> rows;
  for (double lambda : lambdas) {
    InterpolationSpec spec;
    spec.lambda = lambda;
    BackoffModel m = Interpolate(rnnv, knv, spec);
    std::string label = Label("lambda", lambda);
    if (sink) sink(label, m);
    rows.push_back(EvaluateModel(label, m, *setup.task));
  }
  return rows;
}

}  // namespace swlm
