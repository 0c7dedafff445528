#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "sbc/certify.hpp"
#include "sbc/config.hpp"

namespace sbc {

enum class JobState { queued, running, done, failed };

std::string to_string(JobState state);

struct LogSlice {
  std::vector<std::string> lines;
  std::size_t from = 0;
  std::size_t next = 0;
  JobState state = JobState::queued;
};

/// FIFO queue drained by a single worker thread. Logs are append-only.
class JobQueue {
 public:
  explicit JobQueue(SynthesisOptions options = {});
  ~JobQueue();
  JobQueue(const JobQueue&) = delete;
  JobQueue& operator=(const JobQueue&) = delete;

  std::string submit(Configuration config);

  /// Job record as served by GET /api/jobs/{id}; nullopt for unknown ids.
  [[nodiscard]] std::optional<nlohmann::json> record(const std::string& id) const;

  /// Exact result text (same bytes as the CLI writes); empty until done.
  [[nodiscard]] std::optional<std::string> result_text(const std::string& id) const;

  /// Lines from index `from` on. Blocks up to `wait` when there is nothing new and the job is live.
  [[nodiscard]] std::optional<LogSlice> logs(const std::string& id, std::size_t from,
                                             std::chrono::milliseconds wait = std::chrono::milliseconds{0}) const;

  /// Block until the job has finished or the timeout expires; returns the final state.
  [[nodiscard]] std::optional<JobState> wait(const std::string& id, std::chrono::milliseconds timeout) const;

 private:
  struct Job {
    std::string id;
    Configuration config;
    JobState state = JobState::queued;
    std::vector<std::string> log;
    std::string result;
    std::string error;
  };

  void worker();
  void append(Job& job, const std::string& line);

  SynthesisOptions options_;
  mutable std::mutex mutex_;
  mutable std::condition_variable changed_;
  std::map<std::string, std::unique_ptr<Job>> jobs_;
  std::deque<Job*> pending_;
  std::size_t counter_ = 0;
  bool stopping_ = false;
  std::thread thread_;
};

struct ServiceOptions {
  std::filesystem::path benchmark_dir;
  SynthesisOptions synthesis;
};

/// Estimator predictions on a grid over X plus the bounding boxes of the three sets.
nlohmann::json preview(const Configuration& config, int points_per_dim = 0);

/// Named configurations (file stem -> canonical JSON) found in `dir`.
nlohmann::json list_benchmarks(const std::filesystem::path& dir);

/// HTTP front end over a JobQueue.
class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Blocking; returns false if the address cannot be bound.
  bool listen(const std::string& host, int port);

  /// Bind to an ephemeral port and serve on a background thread; returns the port.
  int start(const std::string& host = "127.0.0.1");
  void stop();

  JobQueue& jobs() noexcept { return *jobs_; }

 private:
  struct Impl;
  std::unique_ptr<JobQueue> jobs_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sbc
