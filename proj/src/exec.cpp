#include "stochlp/exec.hpp"

#include <cstdlib>

namespace stochlp {

void ExecConfig::check() const {
  if (workers < 1) throw Error(ErrorCode::ConfigError, "worker count must be at least 1");
  if (!(kappa > 0.0 && kappa <= 1.0)) throw Error(ErrorCode::ConfigError, "kappa must lie in (0, 1]");
  if (watchdog.count() <= 0) throw Error(ErrorCode::ConfigError, "watchdog interval must be positive");
}

std::string to_string(ExecMode m) {
  switch (m) {
    case ExecMode::Serial: return "serial";
    case ExecMode::Sync: return "sync";
    case ExecMode::Async: return "async";
  }
  return "serial";
}

std::size_t workers_from_env(std::size_t fallback) {
  const char* v = std::getenv("STOCHLP_WORKERS");
  if (!v || !*v) return fallback;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) throw Error(ErrorCode::ConfigError, std::string("STOCHLP_WORKERS must be a positive integer, got '") + v + "'");
  return static_cast<std::size_t>(n);
}

WorkerPool::WorkerPool(std::size_t workers, std::size_t capacity) : queue_(capacity) {
  threads_.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads_.emplace_back([this, w] {
      while (auto task = queue_.pop()) (*task)(w);
    });
  }
}

WorkerPool::~WorkerPool() {
  queue_.close();
  for (auto& t : threads_) t.join();
}

void WorkerPool::submit(Task task) {
  if (!queue_.push(std::move(task))) throw Error(ErrorCode::InternalConsistency, "submit on a stopped worker pool");
}

void rethrow_worker_error(std::exception_ptr error, std::size_t item) {
  try {
    std::rethrow_exception(error);
  } catch (const Error& e) {
    if (e.scenario()) throw;
    std::string msg = e.what();
    const std::string prefix = std::string(to_string(e.code())) + ": ";
    if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
    throw Error(e.code(), msg, item);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::WorkerPanic, "item " + std::to_string(item) + ": " + e.what(), item);
  } catch (...) {
    throw Error(ErrorCode::WorkerPanic, "item " + std::to_string(item) + ": unknown exception", item);
  }
}

namespace detail {

void throw_deadlock(const std::string& what) { throw Error(ErrorCode::Deadlock, what); }

}  // namespace detail

Executor::Executor(ExecConfig cfg) : cfg_(std::move(cfg)) { cfg_.check(); }

Executor::~Executor() = default;

WorkerPool& Executor::pool(std::size_t n) {
  if (!pool_) {
    const std::size_t capacity = cfg_.queue_capacity > 0 ? cfg_.queue_capacity : std::max<std::size_t>(2 * n, 1);
    pool_ = std::make_unique<WorkerPool>(cfg_.workers, capacity);
  }
  return *pool_;
}

}  // namespace stochlp
