#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "nopo/core_model.hpp"
#include "nopo/sde.hpp"

namespace nopo {

struct IntegratorConfig {
  double dt = 1e-3;
  std::optional<double> t_burn;  // unset: default_burn_in()
  double t_record = 1e4;
  std::size_t n_traj = 2000;
  std::uint64_t seed = 1;
  Scheme scheme = Scheme::SemiImplicitMidpoint;
  double record_interval = 0.01;
  bool store_records = false;
  bool record_noise = false;  // always on for TruncatedWigner
  bool linear_shadow = false;
};

void validate(const IntegratorConfig& cfg);

// 50 relaxation times of the slowest mode; near threshold the slowest rate is ~g.
double default_burn_in(const ScaledParams& sp);

struct RecordFrame {
  double time = 0.0;
  Quadratures point{};        // end of the interval
  Quadratures mean{};         // average over the interval
  std::array<cplx, 2> noise{};  // summed signal and idler increments over the interval
  Quadratures shadow_mean{};  // linearised companion driven by the same noise
};

struct TrajectoryRecord {
  std::size_t index = 0;
  bool faulted = false;
  std::vector<RecordFrame> frames;
};

class FrameConsumer {
 public:
  virtual ~FrameConsumer() = default;
  virtual void on_frame(const RecordFrame& f) = 0;
};

struct RunInfo {
  PhysicalParams params;
  ScaledParams scaled;
  Representation rep = Representation::PositiveP;
  IntegratorConfig config;
  double t_burn = 0.0;
  double record_interval = 0.0;
  bool has_noise = false;
  bool has_shadow = false;
};

/**
 * Streaming reduction over trajectories. start() may be called from any
 * worker; finish() is called for every trajectory in index order.
 */
class EnsembleReducer {
 public:
  virtual ~EnsembleReducer() = default;
  virtual void begin(const RunInfo&) {}
  virtual std::unique_ptr<FrameConsumer> start(std::size_t traj) = 0;
  virtual void finish(std::size_t traj, std::unique_ptr<FrameConsumer> c, bool faulted) = 0;
};

struct EnsembleResult {
  RunInfo info;
  std::size_t n_completed = 0;
  std::size_t n_faulted = 0;
  std::vector<TrajectoryRecord> records;  // only with store_records
};

EnsembleResult run_ensemble(const PhysicalParams& p, Representation rep, const IntegratorConfig& cfg,
                            std::span<EnsembleReducer* const> reducers = {});

// Feed stored records through reducers as if they had been attached to the run.
void replay(const EnsembleResult& ens, std::span<EnsembleReducer* const> reducers);

// Worker count: hardware concurrency, capped by NOPO_THREADS.
std::size_t worker_count();

/**
 * Runs work(i) for i in [0, n) on worker threads and calls merge(i, result)
 * strictly in increasing i, so reductions do not depend on scheduling.
 */
template <class Work, class Merge>
void ordered_parallel(std::size_t n, Work work, Merge merge) {
  using R = decltype(work(std::size_t{0}));
  std::size_t nw = std::min(worker_count(), std::max<std::size_t>(n, 1));
  if (nw <= 1) {
    for (std::size_t i = 0; i < n; ++i) merge(i, work(i));
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::map<std::size_t, R> pending;
  std::size_t next_merge = 0;
  std::exception_ptr err;
  auto body = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        R r = work(i);
        std::lock_guard<std::mutex> lk(mu);
        if (err) return;
        pending.emplace(i, std::move(r));
        while (!pending.empty() && pending.begin()->first == next_merge) {
          auto node = pending.extract(pending.begin());
          merge(next_merge, std::move(node.mapped()));
          ++next_merge;
        }
      } catch (...) {
        std::lock_guard<std::mutex> lk(mu);
        if (!err) err = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < nw; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace nopo
