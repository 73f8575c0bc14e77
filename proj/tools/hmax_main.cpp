// Command-line front end: kernel dumps, patch imprinting, feature
// extraction, classifier training and scoring, the equal-error metric,
// and the resource/timing model.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hmax/errors.hpp"
#include "hmax/eval.hpp"
#include "hmax/gentleboost.hpp"
#include "hmax/perf.hpp"
#include "hmax/pipeline.hpp"
#include "hmax/svm.hpp"

using namespace hmax;

namespace {

// stdout when no path is given, otherwise an owned file stream
class OutStream {
 public:
  explicit OutStream(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw IoError("cannot open " + path + " for writing");
    }
  }
  std::ostream& get() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

// One integer per line; blank lines and '#' comments are skipped.
std::vector<int> read_label_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<int> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(line.substr(start), &used);
    } catch (const std::exception&) {
      throw FormatError(path + ": not an integer label: " + line);
    }
    const size_t rest = line.find_first_not_of(" \t", start + used);
    if (rest != std::string::npos) {
      throw FormatError(path + ": trailing text after label: " + line);
    }
    labels.push_back(v);
  }
  return labels;
}

std::string sniff_magic(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char m[4] = {};
  in.read(m, 4);
  if (in.gcount() != 4) throw FormatError(path + ": too short to identify");
  return std::string(m, 4);
}

Mode parse_mode(const std::string& s) {
  return s == "float" ? Mode::kFloat : Mode::kFixed;
}

std::vector<double> row_vector(const FeatureMatrix& m, size_t i) {
  return {m.row(i), m.row(i) + m.features};
}

// ---- kernels ----

void cmd_kernels(const std::vector<int>& scales, const std::string& mode,
                 const std::string& out_path) {
  OutStream out(out_path);
  std::vector<int> list = scales;
  if (list.empty()) {
    for (int j = 1; j <= 16; ++j) list.push_back(j);
  }
  for (int j : list) {
    dump_kernels(out.get(), make_kernels(scale_params(j), mode == "fixed"));
  }
}

// ---- imprint ----

void cmd_imprint(const std::string& manifest, const std::string& out, int per_size,
                 uint64_t seed, int resize) {
  const std::vector<ManifestEntry> entries = read_manifest(manifest);
  if (entries.empty()) throw InvalidArgument("manifest lists no images");
  const auto bank = make_filter_bank(Mode::kFixed);
  std::vector<C1Stack<uint16_t>> corpus;
  corpus.reserve(entries.size());
  for (const auto& e : entries) {
    GrayImage img = load_pgm(e.path);
    if (resize > 0) img = resize_to(img, resize);
    corpus.push_back(c1_stack_fixed(img, bank));
  }
  const PatchDictionary dict = imprint(corpus, per_size, seed);
  save_dictionary(out, dict);
  std::cout << "imprinted " << dict.patches.size() << " patches from " << corpus.size()
            << " images into " << out << "\n";
}

// ---- extract ----

void write_labels_for_rows(const std::string& path, const std::vector<ManifestEntry>& entries,
                           const std::vector<uint64_t>& ids) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (uint64_t id : ids) {
    const ManifestEntry& e = entries.at(id);
    if (!e.has_label) throw InvalidArgument(e.path + " has no label in the manifest");
    out << e.label << "\n";
  }
}

void cmd_extract(const std::string& manifest, const std::string& dict_path,
                 const std::string& out, const std::string& mode, bool binary, int resize,
                 int threads, const std::string& labels_out, const std::string& boost_path,
                 const std::string& svm_path) {
  const std::vector<ManifestEntry> entries = read_manifest(manifest);
  const PatchDictionary dict = load_dictionary(dict_path);

  if (binary) {
    if (mode != "fixed") throw InvalidArgument("binary output stores raw fixed-mode distances");
    if (!boost_path.empty() || !svm_path.empty()) {
      throw InvalidArgument("score columns are only available with CSV output");
    }
    std::vector<ExtractionJob> jobs;
    for (size_t i = 0; i < entries.size(); ++i) {
      try {
        GrayImage img = load_pgm(entries[i].path);
        if (resize > 0) img = resize_to(img, resize);
        jobs.push_back({i, std::move(img)});
      } catch (const Error& e) {
        std::cerr << "skipping " << entries[i].path << ": " << e.what() << "\n";
      }
    }
    if (jobs.empty()) throw InvalidArgument("no readable images in the manifest");
    std::ofstream os(out, std::ios::binary);
    if (!os) throw IoError("cannot open " + out + " for writing");
    write_feature_bin_header(os, dict.patches.size());
    std::vector<uint64_t> done;
    FeatureExtractor fx(dict, Mode::kFixed, threads);
    fx.run(std::move(jobs), [&](ExtractionResult&& r) {
      if (!r.ok) {
        std::cerr << "skipping " << entries[r.image_id].path << ": " << r.error << "\n";
        return;
      }
      write_feature_bin_row(os, r.image_id, r.fixed_features);
      done.push_back(r.image_id);
    });
    if (!labels_out.empty()) write_labels_for_rows(labels_out, entries, done);
    std::cout << done.size() << " of " << entries.size() << " images written to " << out << "\n";
    return;
  }

  BatchOptions opt;
  opt.mode = parse_mode(mode);
  opt.threads = threads;
  opt.resize_side = resize;
  opt.log = &std::cerr;
  BoostModel boost;
  SvmModel svm;
  if (!boost_path.empty()) {
    boost = load_boost(boost_path);
    opt.boost = &boost;
  }
  if (!svm_path.empty()) {
    svm = load_svm(svm_path);
    opt.svm = &svm;
  }

  std::ostringstream buf;
  const BatchReport report = run_batch(entries, dict, opt, buf);
  {
    std::ofstream os(out, std::ios::binary);
    if (!os) throw IoError("cannot open " + out + " for writing");
    os << buf.str();
  }
  if (!labels_out.empty()) {
    std::istringstream parse(buf.str());
    write_labels_for_rows(labels_out, entries, read_feature_csv(parse).image_ids);
  }
  std::printf("%zu of %zu images written to %s (%.1f img/s)\n", report.completed,
              report.requested, out.c_str(), report.images_per_second);
}

// ---- training ----

struct LabeledFeatures {
  FeatureTable table;
  std::vector<int> labels;
};

LabeledFeatures load_labeled(const std::string& features, const std::string& labels) {
  LabeledFeatures out{read_feature_csv(features), read_label_file(labels)};
  if (out.labels.size() != out.table.features.samples) {
    throw InvalidArgument("label count " + std::to_string(out.labels.size()) +
                          " does not match feature rows " +
                          std::to_string(out.table.features.samples));
  }
  return out;
}

void cmd_train_boost(const std::string& features, const std::string& labels,
                     const std::string& out, int rounds) {
  const LabeledFeatures data = load_labeled(features, labels);
  const BoostModel model = train_gentleboost(data.table.features, data.labels, rounds);
  save_boost(out, model);
  size_t correct = 0;
  for (size_t i = 0; i < data.table.features.samples; ++i) {
    const double s = boost_predict(model, row_vector(data.table.features, i));
    if ((s > 0 ? 1 : -1) == data.labels[i]) ++correct;
  }
  std::printf("trained %zu trees on %zu examples, training accuracy %.3f, saved to %s\n",
              model.trees.size(), data.table.features.samples,
              double(correct) / double(data.table.features.samples), out.c_str());
}

void cmd_train_svm(const std::string& features, const std::string& labels,
                   const std::string& out, int classes, double cost, int epochs,
                   uint64_t seed) {
  const LabeledFeatures data = load_labeled(features, labels);
  if (classes <= 0) {
    for (int y : data.labels) classes = std::max(classes, y + 1);
  }
  SvmOptions options;
  options.C = cost;
  options.max_epochs = epochs;
  options.seed = seed;
  const SvmModel model = train_linear_svm_ova(data.table.features, data.labels, classes, options);
  save_svm(out, model);
  size_t correct = 0;
  for (size_t i = 0; i < data.table.features.samples; ++i) {
    if (svm_predict(model, row_vector(data.table.features, i)) == data.labels[i]) ++correct;
  }
  std::printf("trained %d one-vs-all classifiers on %zu examples, training accuracy %.3f, "
              "saved to %s\n",
              classes, data.table.features.samples,
              double(correct) / double(data.table.features.samples), out.c_str());
}

// ---- predict ----

void cmd_predict(const std::string& features, const std::string& model_path,
                 const std::string& out_path) {
  const FeatureTable table = read_feature_csv(features);
  OutStream out(out_path);
  const std::string magic = sniff_magic(model_path);
  char buf[64];
  if (magic == "HMXB") {
    const BoostModel model = load_boost(model_path);
    if (model.feature_count != table.features.features) {
      throw InvalidArgument("model expects " + std::to_string(model.feature_count) +
                            " features, file has " + std::to_string(table.features.features));
    }
    out.get() << "image_id,score,sign\n";
    for (size_t i = 0; i < table.features.samples; ++i) {
      const double s = boost_predict(model, row_vector(table.features, i));
      std::snprintf(buf, sizeof buf, "%.9g", s);
      out.get() << table.image_ids[i] << ',' << buf << ',' << ((s > 0) - (s < 0)) << "\n";
    }
  } else if (magic == "HMXS") {
    const SvmModel model = load_svm(model_path);
    if (model.feature_count != table.features.features) {
      throw InvalidArgument("model expects " + std::to_string(model.feature_count) +
                            " features, file has " + std::to_string(table.features.features));
    }
    out.get() << "image_id,class\n";
    for (size_t i = 0; i < table.features.samples; ++i) {
      out.get() << table.image_ids[i] << ','
                << svm_predict(model, row_vector(table.features, i)) << "\n";
    }
  } else {
    throw FormatError(model_path + ": unrecognized model file (expected a boost or svm model)");
  }
}

// ---- eval-eer ----

void cmd_eval_eer(const std::string& scores_path, const std::string& roc_out) {
  std::ifstream in(scores_path);
  if (!in) throw IoError("cannot open " + scores_path);
  std::vector<double> scores;
  std::vector<int> labels;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const size_t comma = line.find(',');
    if (comma == std::string::npos) {
      throw FormatError(scores_path + ":" + std::to_string(lineno) + ": expected score,label");
    }
    try {
      scores.push_back(std::stod(line.substr(0, comma)));
      labels.push_back(std::stoi(line.substr(comma + 1)));
    } catch (const std::exception&) {
      if (lineno == 1) {  // a header line is allowed
        continue;
      }
      throw FormatError(scores_path + ":" + std::to_string(lineno) + ": expected score,label");
    }
  }
  const double acc = eer_accuracy(scores, labels);
  std::printf("eer_accuracy %.6f\n", acc);
  if (!roc_out.empty()) {
    OutStream out(roc_out);
    out.get() << "threshold,fpr,fnr\n";
    char buf[96];
    for (const RocPoint& p : roc_sweep(scores, labels)) {
      std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g\n", p.threshold, p.fpr, p.fnr);
      out.get() << buf;
    }
  }
}

// ---- perf ----

void print_perf_report(uint64_t pixels, double clock_hz, C1Convention convention) {
  const ResourceReport m = memory_report(pixels);
  const TimingReport t = timing_report(pixels, clock_hz, convention);
  std::printf("pixels %llu (side %.0f), clock %.1f MHz\n", (unsigned long long)pixels,
              std::sqrt((double)pixels), clock_hz / 1e6);
  std::printf("  memory bits: input %llu, intermediate %llu, filters %llu, pooled %.1f,\n"
              "               templates %llu, minima %llu; on-chip total %.1f of %llu\n",
              (unsigned long long)m.s1_input_bits, (unsigned long long)m.s1_intermediate_bits,
              (unsigned long long)m.s1_filter_bits, m.c1_bits, (unsigned long long)m.s2_bits,
              (unsigned long long)m.c2_bits, m.total_bits,
              (unsigned long long)kRamAvailableBits);
  std::printf("  classifier score memory (reported separately): %llu bits\n",
              (unsigned long long)m.classifier_bits);
  std::printf("  address counter width: %d bits\n", m.counter_bits);
  std::printf("  cycles per image: input %llu, S1 %llu, S2 %.1f, classifier %llu\n",
              (unsigned long long)t.input_cycles, (unsigned long long)t.s1_cycles, t.s2_cycles,
              (unsigned long long)t.classifier_cycles);
  std::printf("  rates (img/s): input %llu, S1 %llu, S2 %llu, classifier %llu\n",
              (unsigned long long)t.input_rate, (unsigned long long)t.s1_rate,
              (unsigned long long)t.s2_rate, (unsigned long long)t.classifier_rate);
  std::printf("  bottleneck: %s, pipeline rate %llu img/s\n", t.bottleneck.c_str(),
              (unsigned long long)t.pipeline_rate);
}

std::vector<uint64_t> parse_side_sweep(const std::string& spec) {
  int lo = 0, hi = 0, step = 0;
  if (std::sscanf(spec.c_str(), "%d:%d:%d", &lo, &hi, &step) != 3 || lo <= 0 || hi < lo ||
      step <= 0) {
    throw InvalidArgument("--sweep expects LOW:HIGH:STEP image sides, e.g. 64:512:64");
  }
  std::vector<uint64_t> pixels;
  for (int side = lo; side <= hi; side += step) {
    pixels.push_back((uint64_t)side * (uint64_t)side);
  }
  return pixels;
}

void cmd_perf(std::vector<uint64_t> pixels, double clock_mhz, bool csv,
              const std::string& sweep, const std::string& convention,
              const std::string& out_path) {
  const C1Convention conv =
      convention == "formula" ? C1Convention::kFormula : C1Convention::kExact;
  if (!sweep.empty()) {
    const auto swept = parse_side_sweep(sweep);
    pixels.insert(pixels.end(), swept.begin(), swept.end());
  }
  if (pixels.empty()) pixels.push_back(16384);
  if (csv) {
    OutStream out(out_path);
    scalability_csv(out.get(), pixels, clock_mhz * 1e6, conv);
  } else {
    for (uint64_t n : pixels) print_perf_report(n, clock_mhz * 1e6, conv);
  }
}

// ---- describe ----

void cmd_describe(const std::string& path) {
  const std::string magic = sniff_magic(path);
  if (magic == "HMXP") {
    const PatchDictionary dict = load_dictionary(path);
    int by_class[kSizeClasses] = {};
    for (const Patch& p : dict.patches) ++by_class[p.size_class - 1];
    std::printf("patch dictionary: %zu patches, seed %llu\n", dict.patches.size(),
                (unsigned long long)dict.seed);
    for (int k = 1; k <= kSizeClasses; ++k) {
      std::printf("  side %2d: %d patches\n", 4 * k, by_class[k - 1]);
    }
  } else if (magic == "HMXB") {
    describe_boost(std::cout, load_boost(path));
  } else if (magic == "HMXS") {
    describe_svm(std::cout, load_svm(path));
  } else if (magic == "HMXC") {
    const RawFeatureTable table = read_feature_bin(path);
    std::printf("feature table: %zu rows x %zu features (raw fixed-mode distances)\n",
                table.image_ids.size(), table.feature_count);
  } else {
    throw FormatError(path + ": unrecognized file");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HMAX feature extraction and classification toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "1.0.0");

  // kernels
  auto* kernels = app.add_subcommand("kernels", "dump filter kernel tables as text");
  std::vector<int> kernel_scales;
  std::string kernel_mode = "fixed", kernel_out;
  kernels->add_option("--scale", kernel_scales, "scale indices (default: all 16)")
      ->check(CLI::Range(1, 16));
  kernels->add_option("--mode", kernel_mode, "fixed or float")
      ->check(CLI::IsMember({"fixed", "float"}));
  kernels->add_option("--out", kernel_out, "output file (default: stdout)");

  // imprint
  auto* imprint_cmd = app.add_subcommand("imprint", "sample a patch dictionary from images");
  std::string imprint_manifest, imprint_out;
  int imprint_per_size = kDefaultPerSize, imprint_resize = 0;
  uint64_t imprint_seed = 0;
  imprint_cmd->add_option("--manifest", imprint_manifest, "image list file")->required();
  imprint_cmd->add_option("--out", imprint_out, "dictionary file to write")->required();
  imprint_cmd->add_option("--per-size", imprint_per_size, "patches per size class")
      ->check(CLI::PositiveNumber);
  imprint_cmd->add_option("--seed", imprint_seed, "sampling seed");
  imprint_cmd->add_option("--resize", imprint_resize, "resize images to this side first");

  // extract
  auto* extract = app.add_subcommand("extract", "compute per-image feature vectors");
  std::string ex_manifest, ex_dict, ex_out, ex_mode = "fixed", ex_labels, ex_boost, ex_svm;
  bool ex_bin = false;
  int ex_resize = 0, ex_threads = 0;
  extract->add_option("--manifest", ex_manifest, "image list file")->required();
  extract->add_option("--dict", ex_dict, "patch dictionary")->required();
  extract->add_option("--out", ex_out, "output file")->required();
  extract->add_option("--mode", ex_mode, "fixed or float")
      ->check(CLI::IsMember({"fixed", "float"}));
  extract->add_flag("--bin", ex_bin, "write raw distances in binary instead of CSV");
  extract->add_option("--resize", ex_resize, "resize images to this side first");
  extract->add_option("--threads", ex_threads, "worker threads (0 = auto)");
  extract->add_option("--labels-out", ex_labels, "write manifest labels aligned with rows");
  extract->add_option("--boost-model", ex_boost, "append score and sign columns");
  extract->add_option("--svm-model", ex_svm, "append predicted class column");

  // train-boost
  auto* tboost = app.add_subcommand("train-boost", "fit boosted trees to labeled features");
  std::string tb_features, tb_labels, tb_out;
  int tb_rounds = 200;
  tboost->add_option("--features", tb_features, "feature CSV")->required();
  tboost->add_option("--labels", tb_labels, "label file, one -1/+1 per row")->required();
  tboost->add_option("--out", tb_out, "model file to write")->required();
  tboost->add_option("--rounds", tb_rounds, "boosting rounds")->check(CLI::PositiveNumber);

  // train-svm
  auto* tsvm = app.add_subcommand("train-svm", "fit one-vs-all linear classifiers");
  std::string ts_features, ts_labels, ts_out;
  int ts_classes = 0, ts_epochs = 1000;
  double ts_cost = 1.0;
  uint64_t ts_seed = 0;
  tsvm->add_option("--features", ts_features, "feature CSV")->required();
  tsvm->add_option("--labels", ts_labels, "label file, one class id (0-based) per row")
      ->required();
  tsvm->add_option("--out", ts_out, "model file to write")->required();
  tsvm->add_option("--classes", ts_classes, "class count (0 = infer from labels)");
  tsvm->add_option("--cost", ts_cost, "penalty C");
  tsvm->add_option("--epochs", ts_epochs, "training epoch cap");
  tsvm->add_option("--seed", ts_seed, "example order seed");

  // predict
  auto* predict = app.add_subcommand("predict", "score feature rows with a trained model");
  std::string pr_features, pr_model, pr_out;
  predict->add_option("--features", pr_features, "feature CSV")->required();
  predict->add_option("--model", pr_model, "boost or svm model file")->required();
  predict->add_option("--out", pr_out, "output CSV (default: stdout)");

  // eval-eer
  auto* eer = app.add_subcommand("eval-eer", "equal-error accuracy of score,label pairs");
  std::string ee_scores, ee_roc;
  eer->add_option("--scores", ee_scores, "CSV of score,label (label -1/+1)")->required();
  eer->add_option("--roc", ee_roc, "also write the threshold sweep to this CSV");

  // perf
  auto* perf = app.add_subcommand("perf", "resource and throughput model");
  std::vector<uint64_t> pf_pixels;
  double pf_clock = 100.0;
  bool pf_csv = false;
  std::string pf_sweep, pf_conv = "exact", pf_out;
  perf->add_option("--pixels", pf_pixels, "pixel counts, must be perfect squares");
  perf->add_option("--clock-mhz", pf_clock, "clock in MHz")->check(CLI::PositiveNumber);
  perf->add_flag("--csv", pf_csv, "one CSV row per pixel count");
  perf->add_option("--sweep", pf_sweep, "image side sweep LOW:HIGH:STEP");
  perf->add_option("--c1-convention", pf_conv,
                   "pooled-grid size rule for S2 cycle counts: exact or formula")
      ->check(CLI::IsMember({"exact", "formula"}));
  perf->add_option("--out", pf_out, "CSV output file (default: stdout)");

  // describe
  auto* describe = app.add_subcommand("describe", "summarize a dictionary, model, or feature file");
  std::string de_path;
  describe->add_option("path", de_path, "file to inspect")->required();

  kernels->callback([&] { cmd_kernels(kernel_scales, kernel_mode, kernel_out); });
  imprint_cmd->callback(
      [&] { cmd_imprint(imprint_manifest, imprint_out, imprint_per_size, imprint_seed,
                        imprint_resize); });
  extract->callback([&] {
    cmd_extract(ex_manifest, ex_dict, ex_out, ex_mode, ex_bin, ex_resize, ex_threads, ex_labels,
                ex_boost, ex_svm);
  });
  tboost->callback([&] { cmd_train_boost(tb_features, tb_labels, tb_out, tb_rounds); });
  tsvm->callback(
      [&] { cmd_train_svm(ts_features, ts_labels, ts_out, ts_classes, ts_cost, ts_epochs,
                          ts_seed); });
  predict->callback([&] { cmd_predict(pr_features, pr_model, pr_out); });
  eer->callback([&] { cmd_eval_eer(ee_scores, ee_roc); });
  perf->callback([&] { cmd_perf(pf_pixels, pf_clock, pf_csv, pf_sweep, pf_conv, pf_out); });
  describe->callback([&] { cmd_describe(de_path); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
