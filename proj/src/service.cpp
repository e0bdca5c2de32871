#include "incube/service.hpp"

#include <chrono>
#include <functional>

#include "httplib.h"
#include "incube/error.hpp"

namespace incube {

using nlohmann::json;

json query_response_json(const CellQuery& effective, const CellResult& result) {
  json j = result_to_json(result);
  j["query"] = query_to_json(effective);
  return j;
}

json rules_to_json(const std::vector<AssociationRule>& rules) {
  json out = json::array();
  for (const auto& r : rules)
    out.push_back({{"antecedent", r.antecedent},
                   {"consequent", r.consequent},
                   {"count", r.count},
                   {"support", r.support},
                   {"confidence", r.confidence},
                   {"lift", r.lift}});
  return out;
}

json patterns_to_json(const std::vector<SequentialPattern>& patterns) {
  json out = json::array();
  for (const auto& p : patterns) out.push_back({{"elements", p.elements}, {"support", p.support}});
  return out;
}

json outliers_to_json(const std::vector<OutlierReport>& reports) {
  json out = json::array();
  for (const auto& r : reports)
    out.push_back({{"label", r.label},
                   {"measure", r.measure},
                   {"value", r.value},
                   {"score", r.score},
                   {"flagged", r.flagged},
                   {"method", r.method}});
  return out;
}

namespace {

HttpResponse respond(int status, const json& body) {
  return {status, body.dump(), {{"Content-Type", "application/json"}}};
}

HttpResponse error_response(int status, const std::string& message) {
  return respond(status, json{{"error", message}, {"status", status}});
}

// Thrown while reading a request to short-circuit with a status.
struct RequestError {
  int status;
  std::string message;
};

json parse_body(std::string_view body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw RequestError{400, "request body is not valid JSON"};
  if (!j.is_object()) throw RequestError{400, "request body must be a JSON object"};
  return j;
}

double number_field(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw RequestError{400, std::string(key) + " must be a number"};
  return j[key].get<double>();
}

std::vector<std::string> string_list(const json& j, const char* key, const std::vector<std::string>& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_array()) throw RequestError{400, std::string(key) + " must be an array of strings"};
  std::vector<std::string> out;
  for (const auto& v : j[key]) {
    if (!v.is_string()) throw RequestError{400, std::string(key) + " must be an array of strings"};
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::vector<std::string> string_array(const json& v, const char* what) {
  if (!v.is_array()) throw RequestError{400, std::string(what) + " must be an array of strings"};
  std::vector<std::string> out;
  for (const auto& s : v) {
    if (!s.is_string()) throw RequestError{400, std::string(what) + " must be an array of strings"};
    out.push_back(s.get<std::string>());
  }
  return out;
}

std::size_t item_total(const std::vector<Transaction>& ts) {
  std::size_t n = 0;
  for (const auto& t : ts) n += t.items.size();
  return n;
}

std::size_t item_total(const std::vector<EntitySequence>& ss) {
  std::size_t n = 0;
  for (const auto& s : ss)
    for (const auto& e : s.events) n += e.size();
  return n;
}

}  // namespace

struct CubeService::Job {
  std::mutex mutex;
  std::string status = "running";
  std::atomic<double> progress{0.0};
  json result;
  std::string error;
};

CubeService::CubeService(ServiceOptions options) : options_(options) {}

CubeService::~CubeService() {
  stop();
  std::vector<std::jthread> workers;
  {
    std::lock_guard lock(jobs_mutex_);
    workers.swap(workers_);
  }
  // jthread destructors join.
}

void CubeService::load(std::shared_ptr<const FactTable> table) {
  std::lock_guard lock(table_mutex_);
  table_ = std::move(table);
}

std::shared_ptr<const FactTable> CubeService::table() const {
  std::lock_guard lock(table_mutex_);
  return table_;
}

HttpResponse CubeService::handle(std::string_view method, std::string_view path, std::string_view body) {
  const auto start = std::chrono::steady_clock::now();
  HttpResponse r;
  try {
    const bool get = method == "GET";
    const bool post = method == "POST";
    if (path == "/schema") {
      r = get ? schema() : error_response(405, "use GET");
    } else if (path == "/query") {
      r = post ? query(body) : error_response(405, "use POST");
    } else if (path.starts_with("/mine/")) {
      r = post ? mine(path.substr(6), body) : error_response(405, "use POST");
    } else if (path.starts_with("/jobs/")) {
      r = get ? job_status(path.substr(6)) : error_response(405, "use GET");
    } else {
      r = error_response(404, "no such endpoint");
    }
  } catch (const RequestError& e) {
    r = error_response(e.status, e.message);
  } catch (const ParseError& e) {
    r = error_response(400, e.what());
  } catch (const QueryError& e) {
    r = error_response(422, e.what());
  } catch (const LookupError& e) {
    r = error_response(422, e.what());
  } catch (const MiningError& e) {
    r = error_response(422, e.what());
  } catch (const std::exception& e) {
    r = error_response(500, e.what());
  }
  const auto us =
      std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start).count();
  r.headers["X-Elapsed-Us"] = std::to_string(us);
  return r;
}

HttpResponse CubeService::schema() const {
  const auto t = table();
  if (!t) return error_response(503, "no cube loaded");
  json hierarchies = json::array();
  for (const auto& d : t->dimensions) {
    json levels = json::array();
    for (std::size_t i = 0; i < d.hierarchy.levels.size(); ++i)
      levels.push_back({{"name", d.hierarchy.levels[i].name}, {"members", d.levels[i].size()}});
    hierarchies.push_back({{"name", d.hierarchy.name}, {"levels", std::move(levels)}});
  }
  json measures = json::array();
  for (const auto& m : measure_catalog())
    measures.push_back({{"name", m.name}, {"aggregator", m.aggregator == Aggregator::kCount ? "count" : "sum"}});
  return respond(200, json{{"codebook_version", t->codebook_version},
                           {"rows", t->rows},
                           {"hierarchies", std::move(hierarchies)},
                           {"measures", std::move(measures)}});
}

HttpResponse CubeService::query(std::string_view body) const {
  const json request = parse_body(body);
  const auto t = table();
  if (!t) return error_response(503, "no cube loaded");
  const CellQuery q = query_from_json(request);
  const CellQuery effective = normalize_query(*t, q);
  return respond(200, query_response_json(effective, aggregate(*t, effective)));
}

HttpResponse CubeService::mine(std::string_view kind, std::string_view body) {
  const json request = parse_body(body);
  std::function<json(const ProgressFn&)> work;
  std::size_t items = 0;

  auto need_table = [&] {
    auto t = table();
    if (!t) throw RequestError{503, "no cube loaded and no input supplied"};
    return t;
  };

  if (kind == "rules") {
    const double min_support = number_field(request, "min_support", 0.1);
    const double min_confidence = number_field(request, "min_confidence", 0.5);
    if (!(min_support > 0 && min_support <= 1)) throw MiningError("min_support must be in (0, 1]");
    if (!(min_confidence > 0 && min_confidence <= 1)) throw MiningError("min_confidence must be in (0, 1]");
    std::vector<Transaction> ts;
    if (request.contains("transactions")) {
      if (!request["transactions"].is_array()) throw RequestError{400, "transactions must be an array"};
      std::size_t i = 0;
      for (const auto& jt : request["transactions"]) {
        Transaction t{std::to_string(i++), {}};
        if (jt.is_object()) {
          if (jt.contains("id") && jt["id"].is_string()) t.id = jt["id"].get<std::string>();
          if (!jt.contains("items")) throw RequestError{400, "transaction objects need items"};
          t.items = string_array(jt["items"], "items");
        } else {
          t.items = string_array(jt, "transaction");
        }
        std::sort(t.items.begin(), t.items.end());
        t.items.erase(std::unique(t.items.begin(), t.items.end()), t.items.end());
        ts.push_back(std::move(t));
      }
    } else {
      ts = transactions_from_facts(*need_table(), string_list(request, "dims", default_item_dimensions()));
    }
    items = item_total(ts);
    work = [ts = std::move(ts), min_support, min_confidence](const ProgressFn& progress) {
      return json{{"rules", rules_to_json(mine_association_rules(ts, min_support, min_confidence, progress))}};
    };
  } else if (kind == "sequences") {
    const double min_support = number_field(request, "min_support", 2);
    if (min_support < 1 || min_support != static_cast<double>(static_cast<std::size_t>(min_support)))
      throw MiningError("min_support must be an integer of at least 1");
    std::vector<EntitySequence> ss;
    if (request.contains("sequences")) {
      if (!request["sequences"].is_array()) throw RequestError{400, "sequences must be an array"};
      std::size_t i = 0;
      for (const auto& js : request["sequences"]) {
        EntitySequence s{std::to_string(i++), {}};
        const json* events = &js;
        if (js.is_object()) {
          if (js.contains("key") && js["key"].is_string()) s.key = js["key"].get<std::string>();
          if (!js.contains("events")) throw RequestError{400, "sequence objects need events"};
          events = &js["events"];
        }
        if (!events->is_array()) throw RequestError{400, "events must be an array of item arrays"};
        for (const auto& e : *events) s.events.push_back(string_array(e, "event"));
        ss.push_back(std::move(s));
      }
    } else {
      ss = sequences_from_facts(*need_table(), string_list(request, "key", {"gname"}),
                                string_list(request, "dims", {"attack"}));
    }
    items = item_total(ss);
    const auto support = static_cast<std::size_t>(min_support);
    work = [ss = std::move(ss), support](const ProgressFn& progress) {
      return json{{"patterns", patterns_to_json(mine_sequences(ss, support, progress))}};
    };
  } else if (kind == "outliers") {
    const double threshold = number_field(request, "threshold", 3.5);
    if (!(threshold > 0)) throw MiningError("threshold must be positive");
    std::vector<double> values;
    std::vector<std::string> labels;
    std::string measure;
    if (request.contains("series")) {
      if (!request["series"].is_array()) throw RequestError{400, "series must be an array of numbers"};
      for (const auto& v : request["series"]) {
        if (!v.is_number()) throw RequestError{400, "series must be an array of numbers"};
        values.push_back(v.get<double>());
      }
      labels = string_list(request, "labels", {});
      if (request.contains("measure") && request["measure"].is_string())
        measure = request["measure"].get<std::string>();
    } else {
      if (!request.contains("query")) throw RequestError{400, "supply either series or query"};
      const auto t = need_table();
      const CellQuery q = normalize_query(*t, query_from_json(request["query"]));
      measure = request.contains("measure") && request["measure"].is_string() ? request["measure"].get<std::string>()
                                                                              : q.measures.front();
      const Series s = series_from_result(aggregate(*t, q), measure);
      values = s.values;
      labels = s.labels;
    }
    const auto reports = score_outliers(values, threshold, labels, measure);
    return respond(200, json{{"reports", outliers_to_json(reports)}});
  } else {
    return error_response(404, "no such mining endpoint");
  }

  const bool async = request.value("async", false) || items > options_.async_item_threshold;
  if (!async) return respond(200, work({}));

  auto job = std::make_shared<Job>();
  std::string id;
  {
    std::lock_guard lock(jobs_mutex_);
    id = "job-" + std::to_string(next_job_++);
    jobs_[id] = job;
    workers_.emplace_back([job, work = std::move(work)] {
      try {
        json result = work([&](double p) { job->progress = p; });
        std::lock_guard l(job->mutex);
        job->result = std::move(result);
        job->status = "done";
        job->progress = 1.0;
      } catch (const std::exception& e) {
        std::lock_guard l(job->mutex);
        job->error = e.what();
        job->status = "failed";
      }
    });
  }
  return respond(202, json{{"job", id}, {"status", "running"}});
}

HttpResponse CubeService::job_status(std::string_view id) const {
  std::shared_ptr<Job> job;
  {
    std::lock_guard lock(jobs_mutex_);
    const auto it = jobs_.find(std::string(id));
    if (it == jobs_.end()) return error_response(404, "no such job");
    job = it->second;
  }
  std::lock_guard lock(job->mutex);
  json j{{"job", std::string(id)}, {"status", job->status}, {"progress", job->progress.load()}};
  if (job->status == "done") j["result"] = job->result;
  if (job->status == "failed") j["error"] = job->error;
  return respond(200, j);
}

void CubeService::install_routes() {
  if (server_) return;
  server_ = std::make_unique<httplib::Server>();
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    const HttpResponse r = handle(req.method, req.path, req.body);
    res.status = r.status;
    for (const auto& [k, v] : r.headers)
      if (k != "Content-Type") res.set_header(k, v);
    res.set_content(r.body, "application/json");
  };
  server_->Get(R"(/.*)", handler);
  server_->Post(R"(/.*)", handler);
  server_->Put(R"(/.*)", handler);
  server_->Delete(R"(/.*)", handler);
}

bool CubeService::listen(const std::string& host, int port) {
  install_routes();
  return server_->listen(host, port);
}

int CubeService::bind_any_port(const std::string& host) {
  install_routes();
  return server_->bind_to_any_port(host);
}

bool CubeService::listen_after_bind() {
  install_routes();
  return server_->listen_after_bind();
}

void CubeService::stop() {
  if (server_) server_->stop();
}

}  // namespace incube
