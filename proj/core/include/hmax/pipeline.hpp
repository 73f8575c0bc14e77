#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "hmax/c1.hpp"
#include "hmax/gabor.hpp"
#include "hmax/gentleboost.hpp"
#include "hmax/image.hpp"
#include "hmax/s2.hpp"
#include "hmax/svm.hpp"

namespace hmax {

// Side length at which every filter scale has valid support.
constexpr int kFullSupportSide = 37;

// All 16 kernel sets, index j-1 holding scale j. Fixed mode quantizes.
std::vector<SeparableKernelSet> make_filter_bank(Mode mode);

// Bands whose coarser filter fits inside the image, ascending.
std::vector<int> supported_bands(int width, int height);

// Whole-image front half (filtering, cross-scale max, pooling) for every
// supported band; unsupported bands are left as empty maps.
C1Stack<uint16_t> c1_stack_fixed(const GrayImage& img,
                                 const std::vector<SeparableKernelSet>& bank);
C1Stack<double> c1_stack_float(const GrayImage& img,
                               const std::vector<SeparableKernelSet>& bank);

struct ExtractionJob {
  uint64_t image_id = 0;
  GrayImage image;
};

struct ExtractionResult {
  uint64_t image_id = 0;
  bool ok = false;
  std::string error;                     // set when !ok
  Mode mode = Mode::kFixed;
  std::vector<uint64_t> fixed_features;  // raw distances, fixed mode
  std::vector<double> float_features;    // raw distances, float mode
  std::vector<uint8_t> saturated;        // per patch: no valid window anywhere
};

struct ExtractorStats {
  size_t images_done = 0;
  size_t failed = 0;
  size_t peak_queue_depth = 0;  // input queue high-water mark
  size_t band_handoffs = 0;     // buffers passed from filtering to matching
};

// Test instrumentation: called around the per-band handoff so schedules
// can be perturbed (delays) without touching production code paths.
struct ExtractorHooks {
  std::function<void(int band)> after_band_publish;
  std::function<void(int band)> before_band_consume;
};

// Streaming feature extractor. With one thread it runs each image start
// to finish; with two or more, filtering and template matching run as
// separate stages joined by one single-entry buffer per band (the
// producer may only overwrite a buffer its consumer has released), and
// any further threads split the patch dictionary during matching. All
// configurations produce bit-identical results; output order is input
// order. The HMAX_THREADS environment variable caps the thread count.
class FeatureExtractor {
 public:
  FeatureExtractor(const PatchDictionary& dict, Mode mode, int threads = 0);
  ~FeatureExtractor();
  FeatureExtractor(const FeatureExtractor&) = delete;
  FeatureExtractor& operator=(const FeatureExtractor&) = delete;

  void set_hooks(ExtractorHooks hooks);  // call before run
  int thread_count() const;

  // Blocks until every job is done. The sink overload delivers results
  // as images finalize (one call at a time, input order) so downstream
  // work can overlap extraction of later images.
  std::vector<ExtractionResult> run(std::vector<ExtractionJob> jobs);
  void run(std::vector<ExtractionJob> jobs,
           const std::function<void(ExtractionResult&&)>& sink);

  ExtractorStats stats() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// --- manifest and feature files ---

struct ManifestEntry {
  std::string path;
  bool has_label = false;
  int label = 0;
};

// One image path per line, optionally followed by an integer label.
// Blank lines and lines starting with '#' are ignored.
std::vector<ManifestEntry> read_manifest(const std::string& path);

// CSV: header "image_id,f0000,..", scaled features at 9 significant
// digits, optional extra columns appended to both header and rows.
void write_feature_csv_header(std::ostream& out, size_t feature_count,
                              const std::vector<std::string>& extra = {});
void write_feature_csv_row(std::ostream& out, uint64_t image_id,
                           const std::vector<double>& scaled,
                           const std::vector<std::string>& extra = {});
struct FeatureTable {
  std::vector<uint64_t> image_ids;
  FeatureMatrix features;
};
FeatureTable read_feature_csv(std::istream& in);
FeatureTable read_feature_csv(const std::string& path);

// Binary form: raw fixed-mode distances. Records follow the header until
// end of file, so rows can be appended as they complete.
void write_feature_bin_header(std::ostream& out, size_t feature_count);
void write_feature_bin_row(std::ostream& out, uint64_t image_id,
                           const std::vector<uint64_t>& raw);
struct RawFeatureTable {
  std::vector<uint64_t> image_ids;
  size_t feature_count = 0;
  std::vector<uint64_t> values;  // row-major
};
RawFeatureTable read_feature_bin(std::istream& in);
RawFeatureTable read_feature_bin(const std::string& path);

// --- batch driver ---

struct BatchOptions {
  Mode mode = Mode::kFixed;
  int threads = 0;                     // 0 = auto
  int resize_side = 0;                 // 0 = keep original size
  const BoostModel* boost = nullptr;   // appends score and sign columns
  const SvmModel* svm = nullptr;       // appends predicted class column
  std::ostream* log = nullptr;         // skip and warning messages
};

struct BatchReport {
  size_t requested = 0;
  size_t completed = 0;
  size_t skipped = 0;  // unreadable or failed images
  double seconds = 0.0;
  double images_per_second = 0.0;
};

// Loads the manifest images, extracts features, and writes CSV rows to
// `out` as images finalize; image ids are manifest line positions.
// Unreadable images are logged and skipped. An empty manifest is an
// error.
BatchReport run_batch(const std::vector<ManifestEntry>& manifest,
                      const PatchDictionary& dict, const BatchOptions& options,
                      std::ostream& out);

}  // namespace hmax
