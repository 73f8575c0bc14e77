#include "hmax/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "hmax/errors.hpp"
#include "wire.hpp"

namespace hmax {
namespace {

constexpr size_t kInputQueueDepth = 4;
constexpr char kFeatMagic[4] = {'H', 'M', 'X', 'C'};
constexpr uint32_t kFeatVersion = 1;

int resolve_threads(int requested) {
  int t = requested;
  if (t <= 0) {
    t = static_cast<int>(std::thread::hardware_concurrency());
    if (t <= 0) t = 1;
  }
  if (const char* env = std::getenv("HMAX_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1 && cap < t) t = static_cast<int>(cap);
  }
  return t;
}

template <typename CellT>
C1Maps<CellT> compute_band(const GrayImage& img, const std::vector<SeparableKernelSet>& bank,
                           int band) {
  const BandParams bp = band_params(band);
  if constexpr (std::is_same_v<CellT, uint16_t>) {
    return c1_band(s1_apply_fixed(img, bank[bp.fine.scale_index - 1]),
                   s1_apply_fixed(img, bank[bp.coarse.scale_index - 1]), band, bp.delta);
  } else {
    return c1_band(s1_apply_float(img, bank[bp.fine.scale_index - 1]),
                   s1_apply_float(img, bank[bp.coarse.scale_index - 1]), band, bp.delta);
  }
}

// Input queue between the caller and the filtering stage; blocks the
// caller once kInputQueueDepth images are waiting.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(size_t cap) : cap_(cap) {}

  void push(T item) {
    std::unique_lock lk(m_);
    cv_space_.wait(lk, [this] { return q_.size() < cap_ || closed_; });
    if (closed_) return;
    q_.push_back(std::move(item));
    peak_ = std::max(peak_, q_.size());
    cv_item_.notify_one();
  }

  bool pop(T& out) {
    std::unique_lock lk(m_);
    cv_item_.wait(lk, [this] { return !q_.empty() || closed_; });
    if (q_.empty()) return false;
    out = std::move(q_.front());
    q_.pop_front();
    cv_space_.notify_one();
    return true;
  }

  void close() {
    std::lock_guard lk(m_);
    closed_ = true;
    cv_item_.notify_all();
    cv_space_.notify_all();
  }

  size_t peak_depth() const {
    std::lock_guard lk(m_);
    return peak_;
  }

 private:
  mutable std::mutex m_;
  std::condition_variable cv_item_, cv_space_;
  std::deque<T> q_;
  size_t cap_;
  size_t peak_ = 0;
  bool closed_ = false;
};

// Per-band handoff buffer. ready=false means the filtering side owns the
// slot and may write; ready=true hands it to the matching side, which
// clears the flag when done. seq ties the payload to an image.
template <typename CellT>
struct BandSlot {
  std::mutex m;
  std::condition_variable cv;
  bool ready = false;
  uint64_t seq = 0;
  C1Maps<CellT> payload;
};

struct Aborted {};  // unwinds a stage thread after a peer failure

// Runs fn(0..tasks-1) on the helpers plus the calling thread.
class WorkerPool {
 public:
  explicit WorkerPool(int helpers) {
    for (int i = 0; i < helpers; ++i) {
      threads_.emplace_back([this] { worker(); });
    }
  }

  ~WorkerPool() {
    {
      std::lock_guard lk(m_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  void run(int tasks, const std::function<void(int)>& fn) {
    if (threads_.empty() || tasks <= 1) {
      for (int i = 0; i < tasks; ++i) fn(i);
      return;
    }
    std::unique_lock lk(m_);
    fn_ = &fn;
    tasks_ = tasks;
    next_.store(0);
    active_ = static_cast<int>(threads_.size());
    ++generation_;
    cv_.notify_all();
    lk.unlock();
    work();
    lk.lock();
    cv_done_.wait(lk, [this] { return active_ == 0; });
    fn_ = nullptr;
  }

 private:
  void work() {
    for (;;) {
      const int i = next_.fetch_add(1);
      if (i >= tasks_) return;
      (*fn_)(i);
    }
  }

  void worker() {
    uint64_t seen = 0;
    std::unique_lock lk(m_);
    for (;;) {
      cv_.wait(lk, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
      lk.unlock();
      work();
      lk.lock();
      if (--active_ == 0) cv_done_.notify_all();
    }
  }

  std::vector<std::thread> threads_;
  std::mutex m_;
  std::condition_variable cv_, cv_done_;
  const std::function<void(int)>* fn_ = nullptr;
  int tasks_ = 0;
  std::atomic<int> next_{0};
  int active_ = 0;
  bool stop_ = false;
  uint64_t generation_ = 0;
};

struct JobDesc {
  uint64_t image_id = 0;
  std::vector<int> bands;
  std::string error;  // non-empty marks a rejected job
};

struct QueuedImage {
  uint64_t seq = 0;
  GrayImage image;
};

JobDesc describe_job(const ExtractionJob& job) {
  JobDesc d;
  d.image_id = job.image_id;
  d.bands = supported_bands(job.image.width, job.image.height);
  if (d.bands.empty()) {
    d.error = "image " + std::to_string(job.image.width) + "x" +
              std::to_string(job.image.height) + " is below the smallest filter support";
  }
  return d;
}

}  // namespace

std::vector<SeparableKernelSet> make_filter_bank(Mode mode) {
  std::vector<SeparableKernelSet> bank;
  bank.reserve(kScaleCount);
  for (int j = 1; j <= kScaleCount; ++j) {
    bank.push_back(make_kernels(scale_params(j), mode == Mode::kFixed));
  }
  return bank;
}

std::vector<int> supported_bands(int width, int height) {
  const int side = std::min(width, height);
  std::vector<int> out;
  for (int b = 1; b <= kBandCount; ++b) {
    if (band_params(b).coarse.diameter <= side) out.push_back(b);
  }
  return out;
}

C1Stack<uint16_t> c1_stack_fixed(const GrayImage& img,
                                 const std::vector<SeparableKernelSet>& bank) {
  C1Stack<uint16_t> stack;
  const std::vector<int> bands = supported_bands(img.width, img.height);
  for (int b = 1; b <= kBandCount; ++b) stack[b - 1].index = b;
  for (int b : bands) stack[b - 1] = compute_band<uint16_t>(img, bank, b);
  return stack;
}

C1Stack<double> c1_stack_float(const GrayImage& img,
                               const std::vector<SeparableKernelSet>& bank) {
  C1Stack<double> stack;
  const std::vector<int> bands = supported_bands(img.width, img.height);
  for (int b = 1; b <= kBandCount; ++b) stack[b - 1].index = b;
  for (int b : bands) stack[b - 1] = compute_band<double>(img, bank, b);
  return stack;
}

struct FeatureExtractor::Impl {
  const PatchDictionary* dict;
  Mode mode;
  int threads;
  std::vector<SeparableKernelSet> bank;
  ExtractorHooks hooks;
  std::atomic<size_t> images_done{0};
  std::atomic<size_t> failed{0};
  std::atomic<size_t> band_handoffs{0};
  size_t peak_queue = 0;

  template <typename CellT, typename DistT>
  void run_typed(std::vector<ExtractionJob>&& jobs,
                 const std::function<void(ExtractionResult&&)>& sink);

  template <typename CellT, typename DistT>
  void run_sequential(std::vector<ExtractionJob>&& jobs, const std::vector<JobDesc>& descs,
                      const std::function<void(ExtractionResult&&)>& sink);

  template <typename CellT, typename DistT>
  void run_pipelined(std::vector<ExtractionJob>&& jobs, const std::vector<JobDesc>& descs,
                     const std::function<void(ExtractionResult&&)>& sink);

  template <typename DistT>
  ExtractionResult make_result(const JobDesc& desc,
                               const BasicC2Accumulator<
                                   std::conditional_t<std::is_same_v<DistT, uint64_t>,
                                                      uint16_t, double>,
                                   DistT>& acc);

  void absorb_parallel(WorkerPool* pool, int chunks, size_t patch_count,
                       const std::function<void(size_t, size_t)>& absorb_range);
};

void FeatureExtractor::Impl::absorb_parallel(
    WorkerPool* pool, int chunks, size_t patch_count,
    const std::function<void(size_t, size_t)>& absorb_range) {
  if (pool == nullptr || chunks <= 1 || patch_count == 0) {
    absorb_range(0, patch_count);
    return;
  }
  pool->run(chunks, [&](int c) {
    const size_t lo = patch_count * c / chunks;
    const size_t hi = patch_count * (c + 1) / chunks;
    absorb_range(lo, hi);
  });
}

template <typename DistT>
ExtractionResult FeatureExtractor::Impl::make_result(
    const JobDesc& desc,
    const BasicC2Accumulator<
        std::conditional_t<std::is_same_v<DistT, uint64_t>, uint16_t, double>, DistT>& acc) {
  ExtractionResult res;
  res.image_id = desc.image_id;
  res.mode = mode;
  res.ok = true;
  if constexpr (std::is_same_v<DistT, uint64_t>) {
    res.fixed_features = acc.finish(&res.saturated);
  } else {
    res.float_features = acc.finish(&res.saturated);
  }
  return res;
}

template <typename CellT, typename DistT>
void FeatureExtractor::Impl::run_sequential(
    std::vector<ExtractionJob>&& jobs, const std::vector<JobDesc>& descs,
    const std::function<void(ExtractionResult&&)>& sink) {
  for (size_t seq = 0; seq < jobs.size(); ++seq) {
    const JobDesc& desc = descs[seq];
    if (!desc.error.empty()) {
      ExtractionResult res;
      res.image_id = desc.image_id;
      res.error = desc.error;
      res.mode = mode;
      failed.fetch_add(1);
      sink(std::move(res));
      continue;
    }
    BasicC2Accumulator<CellT, DistT> acc(*dict);
    for (int band : desc.bands) {
      C1Maps<CellT> maps = compute_band<CellT>(jobs[seq].image, bank, band);
      if (hooks.after_band_publish) hooks.after_band_publish(band);
      band_handoffs.fetch_add(1);
      if (hooks.before_band_consume) hooks.before_band_consume(band);
      acc.absorb(maps);
    }
    jobs[seq].image.pixels.clear();
    images_done.fetch_add(1);
    sink(make_result<DistT>(desc, acc));
  }
}

template <typename CellT, typename DistT>
void FeatureExtractor::Impl::run_pipelined(
    std::vector<ExtractionJob>&& jobs, const std::vector<JobDesc>& descs,
    const std::function<void(ExtractionResult&&)>& sink) {
  std::array<BandSlot<CellT>, kBandCount> slots;
  BoundedQueue<QueuedImage> queue(kInputQueueDepth);
  std::atomic<bool> abort{false};
  std::exception_ptr first_error;
  std::mutex error_m;

  auto fail = [&](std::exception_ptr e) {
    {
      std::lock_guard lk(error_m);
      if (!first_error) first_error = e;
    }
    abort.store(true);
    queue.close();
    for (auto& s : slots) s.cv.notify_all();
  };

  std::thread producer([&] {
    try {
      QueuedImage item;
      while (queue.pop(item)) {
        const JobDesc& desc = descs[item.seq];
        for (int band : desc.bands) {
          C1Maps<CellT> maps = compute_band<CellT>(item.image, bank, band);
          BandSlot<CellT>& slot = slots[band - 1];
          {
            std::unique_lock lk(slot.m);
            slot.cv.wait(lk, [&] { return !slot.ready || abort.load(); });
            if (abort.load()) throw Aborted{};
            slot.payload = std::move(maps);
            slot.seq = item.seq;
            slot.ready = true;
          }
          slot.cv.notify_all();
          band_handoffs.fetch_add(1);
          if (hooks.after_band_publish) hooks.after_band_publish(band);
        }
        item.image.pixels.clear();
      }
    } catch (Aborted&) {
    } catch (...) {
      fail(std::current_exception());
    }
  });

  const int matchers = threads - 1;  // consumer plus patch-range helpers
  std::unique_ptr<WorkerPool> pool;
  if (matchers > 1) pool = std::make_unique<WorkerPool>(matchers - 1);

  std::thread consumer([&] {
    try {
      for (size_t seq = 0; seq < descs.size(); ++seq) {
        const JobDesc& desc = descs[seq];
        if (!desc.error.empty()) {
          ExtractionResult res;
          res.image_id = desc.image_id;
          res.error = desc.error;
          res.mode = mode;
          failed.fetch_add(1);
          sink(std::move(res));
          continue;
        }
        BasicC2Accumulator<CellT, DistT> acc(*dict);
        for (int band : desc.bands) {
          if (hooks.before_band_consume) hooks.before_band_consume(band);
          BandSlot<CellT>& slot = slots[band - 1];
          C1Maps<CellT> maps;
          {
            std::unique_lock lk(slot.m);
            slot.cv.wait(lk, [&] {
              return (slot.ready && slot.seq == seq) || abort.load();
            });
            if (abort.load()) throw Aborted{};
            maps = std::move(slot.payload);
            slot.ready = false;
          }
          slot.cv.notify_all();
          absorb_parallel(pool.get(), matchers, dict->patches.size(),
                          [&](size_t lo, size_t hi) { acc.absorb(maps, lo, hi); });
        }
        images_done.fetch_add(1);
        sink(make_result<DistT>(desc, acc));
      }
    } catch (Aborted&) {
    } catch (...) {
      fail(std::current_exception());
    }
  });

  try {
    for (size_t seq = 0; seq < jobs.size(); ++seq) {
      if (abort.load()) break;
      if (!descs[seq].error.empty()) continue;
      queue.push({seq, std::move(jobs[seq].image)});
    }
  } catch (...) {
    fail(std::current_exception());
  }
  queue.close();
  producer.join();
  consumer.join();
  peak_queue = std::max(peak_queue, queue.peak_depth());
  if (first_error) std::rethrow_exception(first_error);
}

template <typename CellT, typename DistT>
void FeatureExtractor::Impl::run_typed(
    std::vector<ExtractionJob>&& jobs,
    const std::function<void(ExtractionResult&&)>& sink) {
  std::vector<JobDesc> descs;
  descs.reserve(jobs.size());
  for (const ExtractionJob& j : jobs) descs.push_back(describe_job(j));
  if (threads <= 1) {
    run_sequential<CellT, DistT>(std::move(jobs), descs, sink);
  } else {
    run_pipelined<CellT, DistT>(std::move(jobs), descs, sink);
  }
}

FeatureExtractor::FeatureExtractor(const PatchDictionary& dict, Mode mode, int threads)
    : impl_(std::make_unique<Impl>()) {
  for (const Patch& p : dict.patches) {
    if (p.size_class < 1 || p.size_class > kSizeClasses ||
        static_cast<int>(p.coeffs.size()) != p.coeff_count()) {
      throw InvalidArgument("patch dictionary contains a malformed patch");
    }
  }
  impl_->dict = &dict;
  impl_->mode = mode;
  impl_->threads = resolve_threads(threads);
  impl_->bank = make_filter_bank(mode);
}

FeatureExtractor::~FeatureExtractor() = default;

void FeatureExtractor::set_hooks(ExtractorHooks hooks) { impl_->hooks = std::move(hooks); }

int FeatureExtractor::thread_count() const { return impl_->threads; }

void FeatureExtractor::run(std::vector<ExtractionJob> jobs,
                           const std::function<void(ExtractionResult&&)>& sink) {
  if (impl_->mode == Mode::kFixed) {
    impl_->run_typed<uint16_t, uint64_t>(std::move(jobs), sink);
  } else {
    impl_->run_typed<double, double>(std::move(jobs), sink);
  }
}

std::vector<ExtractionResult> FeatureExtractor::run(std::vector<ExtractionJob> jobs) {
  std::vector<ExtractionResult> out;
  out.reserve(jobs.size());
  run(std::move(jobs), [&out](ExtractionResult&& r) { out.push_back(std::move(r)); });
  return out;
}

ExtractorStats FeatureExtractor::stats() const {
  ExtractorStats s;
  s.images_done = impl_->images_done.load();
  s.failed = impl_->failed.load();
  s.peak_queue_depth = impl_->peak_queue;
  s.band_handoffs = impl_->band_handoffs.load();
  return s;
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<ManifestEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    const auto end = line.find_last_not_of(" \t");
    std::string body = line.substr(start, end - start + 1);

    ManifestEntry entry;
    const auto ws = body.find_last_of(" \t");
    if (ws != std::string::npos) {
      const std::string tail = body.substr(ws + 1);
      char* stop = nullptr;
      const long v = std::strtol(tail.c_str(), &stop, 10);
      if (stop != tail.c_str() && *stop == '\0') {
        entry.has_label = true;
        entry.label = static_cast<int>(v);
        body = body.substr(0, body.find_last_not_of(" \t", ws) + 1);
      }
    }
    entry.path = body;
    if (entry.path.empty()) throw FormatError("manifest line has a label but no path");
    out.push_back(std::move(entry));
  }
  return out;
}

void write_feature_csv_header(std::ostream& out, size_t feature_count,
                              const std::vector<std::string>& extra) {
  out << "image_id";
  char buf[32];
  for (size_t i = 0; i < feature_count; ++i) {
    std::snprintf(buf, sizeof buf, ",f%04zu", i);
    out << buf;
  }
  for (const std::string& e : extra) out << ',' << e;
  out << '\n';
}

void write_feature_csv_row(std::ostream& out, uint64_t image_id,
                           const std::vector<double>& scaled,
                           const std::vector<std::string>& extra) {
  out << image_id;
  char buf[40];
  for (double v : scaled) {
    std::snprintf(buf, sizeof buf, ",%.9g", v);
    out << buf;
  }
  for (const std::string& e : extra) out << ',' << e;
  out << '\n';
}

FeatureTable read_feature_csv(std::istream& in) {
  FeatureTable table;
  std::string line;
  if (!std::getline(in, line)) throw FormatError("feature file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::istringstream header(line);
  std::string col;
  if (!std::getline(header, col, ',') || col != "image_id") {
    throw FormatError("feature file must start with an image_id column");
  }
  size_t features = 0;
  bool in_features = true;
  while (std::getline(header, col, ',')) {
    const bool is_feature =
        col.size() > 1 && col[0] == 'f' &&
        col.find_first_not_of("0123456789", 1) == std::string::npos;
    if (is_feature) {
      if (!in_features) throw FormatError("feature columns must be contiguous");
      ++features;
    } else {
      in_features = false;  // trailing extra columns are ignored
    }
  }
  table.features.features = features;

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    if (!std::getline(row, cell, ',')) throw FormatError("feature row missing image id");
    table.image_ids.push_back(std::strtoull(cell.c_str(), nullptr, 10));
    for (size_t f = 0; f < features; ++f) {
      if (!std::getline(row, cell, ',')) {
        throw FormatError("feature row shorter than the header");
      }
      char* stop = nullptr;
      table.features.values.push_back(std::strtod(cell.c_str(), &stop));
      if (stop == cell.c_str()) throw FormatError("feature row has a non-numeric cell");
    }
    ++table.features.samples;
  }
  return table;
}

FeatureTable read_feature_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_feature_csv(in);
}

void write_feature_bin_header(std::ostream& out, size_t feature_count) {
  wire::put_magic(out, kFeatMagic);
  wire::put_u32(out, kFeatVersion);
  wire::put_u32(out, static_cast<uint32_t>(feature_count));
}

void write_feature_bin_row(std::ostream& out, uint64_t image_id,
                           const std::vector<uint64_t>& raw) {
  wire::put_u64(out, image_id);
  for (uint64_t v : raw) wire::put_u64(out, v);
}

RawFeatureTable read_feature_bin(std::istream& in) {
  wire::check_magic(in, kFeatMagic, "feature");
  wire::check_version(in, kFeatVersion, "feature file");
  RawFeatureTable table;
  table.feature_count = wire::get_u32(in, "feature count");
  while (in.peek() != std::istream::traits_type::eof()) {
    table.image_ids.push_back(wire::get_u64(in, "image id"));
    for (size_t f = 0; f < table.feature_count; ++f) {
      table.values.push_back(wire::get_u64(in, "feature value"));
    }
  }
  return table;
}

RawFeatureTable read_feature_bin(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_feature_bin(in);
}

BatchReport run_batch(const std::vector<ManifestEntry>& manifest,
                      const PatchDictionary& dict, const BatchOptions& opt,
                      std::ostream& out) {
  if (manifest.empty()) throw InvalidArgument("manifest lists no images");
  if (opt.boost != nullptr && opt.boost->feature_count != dict.patches.size()) {
    throw InvalidArgument("boost model feature count does not match the dictionary");
  }
  if (opt.svm != nullptr && opt.svm->feature_count != dict.patches.size()) {
    throw InvalidArgument("svm model feature count does not match the dictionary");
  }

  BatchReport report;
  report.requested = manifest.size();
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<ExtractionJob> jobs;
  jobs.reserve(manifest.size());
  for (size_t i = 0; i < manifest.size(); ++i) {
    try {
      GrayImage img = load_pgm(manifest[i].path);
      if (opt.resize_side > 0) img = resize_to(img, opt.resize_side);
      jobs.push_back({i, std::move(img)});
    } catch (const Error& e) {
      if (opt.log != nullptr) {
        *opt.log << "skipping " << manifest[i].path << ": " << e.what() << "\n";
      }
      ++report.skipped;
    }
  }

  std::vector<std::string> extra;
  if (opt.boost != nullptr) {
    extra.push_back("score");
    extra.push_back("sign");
  }
  if (opt.svm != nullptr) extra.push_back("class");
  write_feature_csv_header(out, dict.patches.size(), extra);

  FeatureExtractor fx(dict, opt.mode, opt.threads);
  fx.run(std::move(jobs), [&](ExtractionResult&& res) {
    if (!res.ok) {
      if (opt.log != nullptr) {
        *opt.log << "skipping " << manifest[res.image_id].path << ": " << res.error << "\n";
      }
      ++report.skipped;
      return;
    }
    const std::vector<double> scaled = res.mode == Mode::kFixed
                                           ? scale_features(res.fixed_features, dict)
                                           : scale_features(res.float_features, dict);
    std::vector<std::string> cols;
    char buf[40];
    if (opt.boost != nullptr) {
      const double score = boost_predict(*opt.boost, scaled);
      std::snprintf(buf, sizeof buf, "%.9g", score);
      cols.emplace_back(buf);
      cols.emplace_back(std::to_string((score > 0.0) - (score < 0.0)));
    }
    if (opt.svm != nullptr) {
      cols.emplace_back(std::to_string(svm_predict(*opt.svm, scaled)));
    }
    write_feature_csv_row(out, res.image_id, scaled, cols);
    ++report.completed;
  });

  const auto t1 = std::chrono::steady_clock::now();
  report.seconds = std::chrono::duration<double>(t1 - t0).count();
  if (report.seconds > 0.0) {
    report.images_per_second = double(report.completed) / report.seconds;
  }
  if (!out) throw IoError("failed writing feature output");
  return report;
}

}  // namespace hmax
