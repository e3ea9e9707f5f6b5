#ifndef STOCHLP_EXEC_HPP
#define STOCHLP_EXEC_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "stochlp/error.hpp"

namespace stochlp {

enum class ExecMode { Serial, Sync, Async };

struct ExecConfig {
  ExecMode mode = ExecMode::Serial;
  /// Fraction of the newest version's results that triggers the next
  /// decision in async mode.
  double kappa = 1.0;
  std::size_t workers = 1;
  /// Work queue capacity; 0 means twice the number of items per wave.
  std::size_t queue_capacity = 0;
  std::chrono::milliseconds watchdog{60000};
  /// Test hook run on the worker thread before each item (worker, version, item).
  std::function<void(std::size_t, std::size_t, std::size_t)> before_task;

  void check() const;
};

std::string to_string(ExecMode m);

/// Worker count from STOCHLP_WORKERS, or `fallback` when unset. Throws
/// ConfigError on a malformed value.
std::size_t workers_from_env(std::size_t fallback = 1);

/// Multi-producer multi-consumer FIFO. Capacity 0 means unbounded.
template <class T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity = 0) : capacity_(capacity) {}

  /// Blocks while full. Returns false once the queue is closed.
  bool push(T value) {
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return closed_ || capacity_ == 0 || items_.size() < capacity_; });
    if (closed_) return false;
    items_.push_back(std::move(value));
    not_empty_.notify_one();
    return true;
  }

  /// Blocks until an item is available; empty optional once closed and drained.
  std::optional<T> pop() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return closed_ || !items_.empty(); });
    return take(lock);
  }

  /// Empty optional on timeout (or when closed and drained).
  template <class Rep, class Period>
  std::optional<T> pop_for(std::chrono::duration<Rep, Period> timeout) {
    std::unique_lock lock(mu_);
    not_empty_.wait_for(lock, timeout, [&] { return closed_ || !items_.empty(); });
    return take(lock);
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

  /// Drops every queued item and returns how many were dropped.
  std::size_t clear() {
    std::lock_guard lock(mu_);
    const std::size_t n = items_.size();
    items_.clear();
    not_full_.notify_all();
    return n;
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return items_.size();
  }

 private:
  std::optional<T> take(std::unique_lock<std::mutex>&) {
    if (items_.empty()) return std::nullopt;
    T v = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return v;
  }

  std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  std::deque<T> items_;
  bool closed_ = false;
};

/// Fixed set of threads consuming tasks from a bounded queue. Tasks receive
/// the index of the worker running them and must not throw.
class WorkerPool {
 public:
  using Task = std::function<void(std::size_t worker)>;

  WorkerPool(std::size_t workers, std::size_t capacity);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  /// Blocks while the queue is full.
  void submit(Task task);
  /// Removes tasks that no worker has started yet.
  std::size_t discard_pending() { return queue_.clear(); }
  std::size_t queued() const { return queue_.size(); }
  std::size_t workers() const noexcept { return threads_.size(); }

 private:
  BoundedQueue<Task> queue_;
  std::vector<std::thread> threads_;
};

template <class P>
struct ResultEnvelope {
  std::size_t worker = 0;
  std::size_t version = 0;
  std::size_t item = 0;
  P payload{};
  double wall_seconds = 0.0;
  std::exception_ptr error;
};

/// Rethrows a worker failure with the item attached. Library errors keep
/// their code; anything else becomes WorkerPanic.
[[noreturn]] void rethrow_worker_error(std::exception_ptr error, std::size_t item);

/// One record per published decision version.
struct VersionTrace {
  std::size_t version = 0;
  std::size_t awaited = 0;   // results needed before the next version
  std::size_t received = 0;
  double published_at = 0.0;  // seconds since the run started
};

struct AsyncStats {
  std::size_t published = 0;
  std::size_t issued = 0;
  std::size_t received = 0;
  /// Completed results per version.
  std::vector<std::size_t> per_version;
  /// Executions per (version, item); every entry should be 1.
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> executions;
  std::vector<VersionTrace> trace;
  bool converged = false;
};

/// Callbacks for the async protocol. All of them except `work` run on the
/// coordinating thread, which owns the algorithm state.
template <class D, class P>
struct AsyncProtocol {
  std::function<P(const D& decision, std::size_t item)> work;
  /// Every result, in arrival order, including late ones for old versions.
  std::function<void(const ResultEnvelope<P>&)> absorb;
  /// Next decision once enough results for the newest one arrived; an empty
  /// optional stops publishing (e.g. iteration limit).
  std::function<std::optional<D>()> publish;
  /// All results of `version` have arrived. Return true to stop.
  std::function<bool(std::size_t version)> complete;
};

class Executor {
 public:
  explicit Executor(ExecConfig cfg = {});
  ~Executor();

  const ExecConfig& config() const noexcept { return cfg_; }

  /// Runs fn(item) for items 0..n-1 and returns one envelope per item,
  /// sorted by item so reductions do not depend on scheduling.
  template <class P>
  std::vector<ResultEnvelope<P>> run_wave(std::size_t version, std::size_t n,
                                          std::function<P(std::size_t item)> fn);

  /// Async protocol: the first decision is version 0 and every version is
  /// issued for all n items. A new version is published as soon as
  /// ceil(kappa n) results of the newest one have arrived; results of older
  /// versions are still absorbed. Every issued item is processed.
  template <class D, class P>
  AsyncStats run_async(D initial, std::size_t n, AsyncProtocol<D, P> protocol);

 private:
  WorkerPool& pool(std::size_t n);

  ExecConfig cfg_;
  std::unique_ptr<WorkerPool> pool_;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class D, class P>
ResultEnvelope<P> execute(const ExecConfig& cfg, const std::function<P(const D&, std::size_t)>& fn,
                          const D& decision, std::size_t version, std::size_t item, std::size_t worker) {
  const auto t0 = std::chrono::steady_clock::now();
  ResultEnvelope<P> env;
  env.worker = worker;
  env.version = version;
  env.item = item;
  try {
    if (cfg.before_task) cfg.before_task(worker, version, item);
    env.payload = fn(decision, item);
  } catch (...) {
    env.error = std::current_exception();
  }
  env.wall_seconds = seconds_since(t0);
  return env;
}

[[noreturn]] void throw_deadlock(const std::string& what);

}  // namespace detail

template <class P>
std::vector<ResultEnvelope<P>> Executor::run_wave(std::size_t version, std::size_t n,
                                                  std::function<P(std::size_t item)> fn) {
  std::vector<ResultEnvelope<P>> out;
  out.reserve(n);
  const std::function<P(const int&, std::size_t)> wrapped = [fn](const int&, std::size_t i) { return fn(i); };
  if (cfg_.mode == ExecMode::Serial || n == 0) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(detail::execute<int, P>(cfg_, wrapped, 0, version, i, 0));
  } else {
    // Shared so that abandoned tasks never outlive what they point to.
    auto results = std::make_shared<BoundedQueue<ResultEnvelope<P>>>();
    auto shared_fn = std::make_shared<const std::function<P(const int&, std::size_t)>>(wrapped);
    const ExecConfig cfg = cfg_;
    WorkerPool& workers = pool(n);
    for (std::size_t i = 0; i < n; ++i) {
      workers.submit([results, shared_fn, cfg, version, i](std::size_t w) {
        results->push(detail::execute<int, P>(cfg, *shared_fn, 0, version, i, w));
      });
    }
    for (std::size_t got = 0; got < n; ++got) {
      auto env = results->pop_for(cfg_.watchdog);
      if (!env) {
        detail::throw_deadlock("wave " + std::to_string(version) + ": " + std::to_string(got) + "/" +
                               std::to_string(n) + " results after the watchdog interval, " +
                               std::to_string(workers.queued()) + " items still queued");
      }
      out.push_back(std::move(*env));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.item < b.item; });
  }
  for (const auto& env : out) {
    if (env.error) rethrow_worker_error(env.error, env.item);
  }
  return out;
}

template <class D, class P>
AsyncStats Executor::run_async(D initial, std::size_t n, AsyncProtocol<D, P> protocol) {
  cfg_.check();
  AsyncStats stats;
  if (n == 0) return stats;
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t threshold =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(cfg_.kappa * static_cast<double>(n) - 1e-9)), 1, n);
  auto results = std::make_shared<BoundedQueue<ResultEnvelope<P>>>();
  auto work = std::make_shared<const std::function<P(const D&, std::size_t)>>(protocol.work);
  const bool inline_mode = cfg_.mode == ExecMode::Serial;
  WorkerPool* workers = inline_mode ? nullptr : &pool(n);
  std::deque<std::pair<std::size_t, std::size_t>> inline_backlog;  // serial fallback
  std::vector<std::shared_ptr<const D>> decisions;
  const ExecConfig cfg = cfg_;

  auto issue = [&](D decision) {
    const std::size_t v = decisions.size();
    decisions.push_back(std::make_shared<const D>(std::move(decision)));
    stats.per_version.push_back(0);
    stats.trace.push_back({v, threshold, 0, detail::seconds_since(t0)});
    ++stats.published;
    for (std::size_t i = 0; i < n; ++i) {
      ++stats.issued;
      if (inline_mode) {
        inline_backlog.emplace_back(v, i);
        continue;
      }
      auto d = decisions.back();
      workers->submit([results, work, d, cfg, v, i](std::size_t w) {
        results->push(detail::execute<D, P>(cfg, *work, *d, v, i, w));
      });
    }
  };

  auto next_result = [&]() -> ResultEnvelope<P> {
    if (inline_mode) {
      const auto [v, i] = inline_backlog.front();
      inline_backlog.pop_front();
      return detail::execute<D, P>(cfg, *work, *decisions[v], v, i, 0);
    }
    auto env = results->pop_for(cfg_.watchdog);
    if (!env) {
      std::string diag = "no result within the watchdog interval; outstanding per version:";
      for (std::size_t v = 0; v < stats.per_version.size(); ++v) {
        if (stats.per_version[v] < n) {
          diag += " v" + std::to_string(v) + " " + std::to_string(stats.per_version[v]) + "/" + std::to_string(n);
        }
      }
      diag += "; work queue holds " + std::to_string(workers->queued());
      detail::throw_deadlock(diag);
    }
    return std::move(*env);
  };

  issue(std::move(initial));
  bool publishing = true;
  std::exception_ptr failure;
  std::size_t failed_item = 0;
  while (stats.received < stats.issued) {
    ResultEnvelope<P> env = next_result();
    ++stats.received;
    if (env.version >= decisions.size()) {
      throw Error(ErrorCode::InternalConsistency, "result references unpublished version " + std::to_string(env.version));
    }
    ++stats.executions[{env.version, env.item}];
    if (env.error) {
      if (!failure) {
        failure = env.error;
        failed_item = env.item;
        publishing = false;
        const std::size_t dropped = inline_mode ? inline_backlog.size() : workers->discard_pending();
        inline_backlog.clear();
        stats.issued -= dropped;
      }
      continue;
    }
    if (failure) continue;
    const std::size_t v = env.version;
    stats.trace[v].received = ++stats.per_version[v];
    protocol.absorb(env);
    if (stats.per_version[v] == n && !stats.converged && protocol.complete(v)) {
      stats.converged = true;
      publishing = false;
    }
    const std::size_t newest = decisions.size() - 1;
    if (publishing && v == newest && stats.per_version[newest] == threshold) {
      std::optional<D> next = protocol.publish();
      if (next) {
        issue(std::move(*next));
      } else {
        publishing = false;
      }
    }
  }
  if (failure) rethrow_worker_error(failure, failed_item);
  return stats;
}

}  // namespace stochlp

#endif  // STOCHLP_EXEC_HPP
