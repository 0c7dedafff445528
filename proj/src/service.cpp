#include "sbc/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "sbc/app.hpp"
#include "sbc/errors.hpp"
#include "sbc/estimator.hpp"

namespace sbc {

using nlohmann::json;

std::string to_string(JobState state) {
  switch (state) {
    case JobState::queued: return "queued";
    case JobState::running: return "running";
    case JobState::done: return "done";
    case JobState::failed: return "failed";
  }
  return "unknown";
}

namespace {

bool finished(JobState s) { return s == JobState::done || s == JobState::failed; }

json box_json(const Rect& r) {
  return {{"lower", std::vector<double>(r.lower.data(), r.lower.data() + r.lower.size())},
          {"upper", std::vector<double>(r.upper.data(), r.upper.data() + r.upper.size())}};
}

json leaf_boxes(const RegionSet& set) {
  json out = json::array();
  for (const auto& leaf : set.leaves()) out.push_back(box_json(leaf.bounding_box()));
  return out;
}

}  // namespace

JobQueue::JobQueue(SynthesisOptions options) : options_(std::move(options)), thread_([this] { worker(); }) {}

JobQueue::~JobQueue() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  changed_.notify_all();
  thread_.join();
}

std::string JobQueue::submit(Configuration config) {
  std::lock_guard lock(mutex_);
  auto job = std::make_unique<Job>(Job{"job-" + std::to_string(++counter_), std::move(config), JobState::queued, {}, {}, {}});
  Job* raw = job.get();
  jobs_.emplace(raw->id, std::move(job));
  pending_.push_back(raw);
  raw->log.push_back("queued as " + raw->id);
  changed_.notify_all();
  return raw->id;
}

void JobQueue::append(Job& job, const std::string& line) {
  {
    std::lock_guard lock(mutex_);
    job.log.push_back(line);
  }
  changed_.notify_all();
}

void JobQueue::worker() {
  for (;;) {
    Job* job = nullptr;
    {
      std::unique_lock lock(mutex_);
      changed_.wait(lock, [this] { return stopping_ || !pending_.empty(); });
      if (stopping_) return;
      job = pending_.front();
      pending_.pop_front();
      job->state = JobState::running;
    }
    changed_.notify_all();
    // the configuration is never mutated after submission, so it is read without the lock
    std::string result, error;
    try {
      const SynthesisResult r = synthesize(job->config, [&](const std::string& line) { append(*job, line); }, options_);
      result = render_json(result_to_json(r, job->config));
    } catch (const std::exception& e) {
      error = e.what();
    }
    {
      std::lock_guard lock(mutex_);
      if (error.empty()) {
        job->result = std::move(result);
        job->state = JobState::done;
        job->log.push_back("finished");
      } else {
        job->error = error;
        job->state = JobState::failed;
        job->log.push_back("error: " + error);
      }
    }
    changed_.notify_all();
  }
}

std::optional<json> JobQueue::record(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  const Job& job = *it->second;
  json doc{{"id", job.id}, {"state", to_string(job.state)}, {"config", to_json(job.config)}, {"log", job.log}};
  if (job.state == JobState::done) {
    doc["result"] = json::parse(job.result);
    doc["bound"] = doc["result"]["bound"];
  }
  if (job.state == JobState::failed) doc["error"] = job.error;
  return doc;
}

std::optional<std::string> JobQueue::result_text(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second->result;
}

std::optional<LogSlice> JobQueue::logs(const std::string& id, std::size_t from, std::chrono::milliseconds wait) const {
  std::unique_lock lock(mutex_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  const Job& job = *it->second;
  changed_.wait_for(lock, wait, [&] { return stopping_ || job.log.size() > from || finished(job.state); });
  LogSlice slice;
  slice.from = std::min(from, job.log.size());
  slice.lines.assign(job.log.begin() + static_cast<std::ptrdiff_t>(slice.from), job.log.end());
  slice.next = job.log.size();
  slice.state = job.state;
  return slice;
}

std::optional<JobState> JobQueue::wait(const std::string& id, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  const Job& job = *it->second;
  changed_.wait_for(lock, timeout, [&] { return stopping_ || finished(job.state); });
  return job.state;
}

json preview(const Configuration& config, int points_per_dim) {
  const Dataset data = resolve_dataset(config);
  const FittedEstimator est = fit(KernelParams{config.sigma_f, config.sigma_l, config.lambda}, data);
  const Rect box = config.spec.domain.bounding_box();
  const auto n = static_cast<Eigen::Index>(config.dimension());
  if (points_per_dim <= 0) points_per_dim = n == 1 ? 101 : 21;
  const Eigen::Index varying = std::min<Eigen::Index>(n, 2);
  Eigen::Index count = 1;
  for (Eigen::Index d = 0; d < varying; ++d) count *= points_per_dim;
  Matrix pts(count, n);
  const Vector centre = (box.lower + box.upper) / 2.0;
  for (Eigen::Index i = 0; i < count; ++i) {
    pts.row(i) = centre.transpose();
    Eigen::Index rest = i;
    for (Eigen::Index d = varying - 1; d >= 0; --d) {
      const Eigen::Index k = rest % points_per_dim;
      rest /= points_per_dim;
      pts(i, d) = box.lower[d] + (box.upper[d] - box.lower[d]) * static_cast<double>(k) / (points_per_dim - 1);
    }
  }
  const Matrix pred = est.predict_rows(pts);
  json points = json::array(), predictions = json::array();
  for (Eigen::Index i = 0; i < count; ++i) {
    json p = json::array(), q = json::array();
    for (Eigen::Index d = 0; d < n; ++d) p.push_back(pts(i, d));
    for (Eigen::Index d = 0; d < pred.cols(); ++d) q.push_back(pred(i, d));
    points.push_back(std::move(p));
    predictions.push_back(std::move(q));
  }
  return {{"dimension", n},
          {"points_per_dim", points_per_dim},
          {"points", points},
          {"predictions", predictions},
          {"sets",
           {{"X_bounds", box_json(box)}, {"X_init", leaf_boxes(config.spec.initial)}, {"X_unsafe", leaf_boxes(config.spec.unsafe)}}}};
}

json list_benchmarks(const std::filesystem::path& dir) {
  json out = json::object();
  std::error_code ec;
  if (dir.empty() || !std::filesystem::is_directory(dir, ec)) return out;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    const auto ext = entry.path().extension();
    if (ext == ".yaml" || ext == ".yml" || ext == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    try {
      out[f.stem().string()] = to_json(load_config(f));
    } catch (const std::exception&) {
      // unreadable files are not advertised
    }
  }
  return out;
}

struct Service::Impl {
  ServiceOptions options;
  httplib::Server server;
  std::thread thread;
};

namespace {

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void error_reply(httplib::Response& res, int status, const std::string& message) {
  reply(res, status, json{{"error", message}});
}

}  // namespace

Service::Service(ServiceOptions options)
    : jobs_(std::make_unique<JobQueue>(options.synthesis)), impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  auto& s = impl_->server;
  JobQueue* jobs = jobs_.get();
  const std::filesystem::path bench = impl_->options.benchmark_dir;

  auto parse_body = [](const httplib::Request& req) {
    json doc;
    try {
      doc = json::parse(req.body);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("request body is not valid JSON: ") + e.what());
    }
    return parse_config(doc);
  };

  s.Post("/api/jobs", [jobs, parse_body](const httplib::Request& req, httplib::Response& res) {
    try {
      const std::string id = jobs->submit(parse_body(req));
      reply(res, 201, json{{"id", id}});
    } catch (const std::exception& e) {
      error_reply(res, 400, e.what());
    }
  });
  s.Get(R"(/api/jobs/([^/]+))", [jobs](const httplib::Request& req, httplib::Response& res) {
    const auto rec = jobs->record(req.matches[1]);
    if (!rec) return error_reply(res, 404, "unknown job");
    reply(res, 200, *rec);
  });
  s.Get(R"(/api/jobs/([^/]+)/result)", [jobs](const httplib::Request& req, httplib::Response& res) {
    const auto text = jobs->result_text(req.matches[1]);
    if (!text) return error_reply(res, 404, "unknown job");
    if (text->empty()) return error_reply(res, 409, "job has no result yet");
    res.status = 200;
    res.set_content(*text, "application/json");
  });
  s.Get(R"(/api/jobs/([^/]+)/logs)", [jobs](const httplib::Request& req, httplib::Response& res) {
    std::size_t from = 0;
    long wait_ms = 5000;
    try {
      if (req.has_param("from")) from = std::stoul(req.get_param_value("from"));
      if (req.has_param("wait")) wait_ms = std::stol(req.get_param_value("wait"));
    } catch (const std::exception&) {
      return error_reply(res, 400, "from and wait must be non-negative integers");
    }
    const auto slice = jobs->logs(req.matches[1], from, std::chrono::milliseconds{std::clamp(wait_ms, 0L, 60000L)});
    if (!slice) return error_reply(res, 404, "unknown job");
    reply(res, 200,
          json{{"from", slice->from}, {"next", slice->next}, {"lines", slice->lines}, {"state", to_string(slice->state)}});
  });
  s.Post("/api/preview", [parse_body](const httplib::Request& req, httplib::Response& res) {
    try {
      reply(res, 200, preview(parse_body(req)));
    } catch (const std::exception& e) {
      error_reply(res, 400, e.what());
    }
  });
  s.Get("/api/benchmarks", [bench](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, list_benchmarks(bench));
  });
}

Service::~Service() { stop(); }

bool Service::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int Service::start(const std::string& host) {
  const int port = impl_->server.bind_to_any_port(host);
  if (port < 0) throw Error("cannot bind " + host);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void Service::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace sbc
