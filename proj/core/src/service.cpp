#include "trendseek/service.hpp"

#include <fstream>
#include <mutex>

#include <httplib.h>

#include "trendseek/errors.hpp"
#include "trendseek/executor.hpp"
#include "trendseek/parser.hpp"
#include "trendseek/serialize.hpp"

namespace trendseek {

namespace {

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InfeasibleSegmentation:
      return 422;
    case ErrorCode::Io:
      return 500;
    default:
      return 400;
  }
}

HttpReply json_reply(int status, const Json& body) { return {status, body.dump(), "application/json"}; }

HttpReply error_reply(const Error& e) { return json_reply(status_for(e.code()), error_json(e)); }

HttpReply error_reply(int status, std::string_view code, const std::string& message) {
  return json_reply(status, {{"error", code}, {"message", message}});
}

const Json* field(const Json& obj, const char* name) {
  const auto it = obj.find(name);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

std::string required_string(const Json& obj, const char* name) {
  const Json* v = field(obj, name);
  if (!v || !v->is_string()) {
    throw Error(ErrorCode::InvalidArgument, std::string("missing string field '") + name + "'");
  }
  return v->get<std::string>();
}

Filter filter_from_json(const Json& f) {
  if (f.is_string()) return parse_filter(f.get<std::string>());
  if (f.is_object()) {
    Filter out = parse_filter(required_string(f, "column") + " " + required_string(f, "op") + " " +
                              (f.contains("value") && !f["value"].is_string()
                                   ? f["value"].dump()
                                   : required_string(f, "value")));
    return out;
  }
  throw Error(ErrorCode::InvalidArgument, "filters must be strings or {column, op, value} objects");
}

}  // namespace

DatasetStore::DatasetStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

bool DatasetStore::valid_name(std::string_view name) noexcept {
  if (name.empty() || name.size() > 128 || name.front() == '.') return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

std::vector<std::string> DatasetStore::load_all() {
  std::vector<std::string> failed;
  if (dir_.empty() || !std::filesystem::is_directory(dir_)) return failed;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    const std::string name = path.stem().string();
    try {
      auto ds = std::make_shared<Dataset>(load_csv(path));
      ds->name = name;
      std::unique_lock lock(mutex_);
      datasets_[name] = std::move(ds);
    } catch (const Error&) {
      failed.push_back(name);
    }
  }
  return failed;
}

std::shared_ptr<const Dataset> DatasetStore::put(const std::string& name, std::string_view csv) {
  if (!valid_name(name)) {
    throw Error(ErrorCode::InvalidArgument, "dataset names use letters, digits, '_', '-' and '.'");
  }
  auto ds = std::make_shared<Dataset>(parse_csv(csv, name));
  if (!dir_.empty()) {
    std::filesystem::create_directories(dir_);
    const auto path = dir_ / (name + ".csv");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(csv.data(), static_cast<std::streamsize>(csv.size()));
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  }
  std::unique_lock lock(mutex_);
  datasets_[name] = ds;
  return ds;
}

std::shared_ptr<const Dataset> DatasetStore::get(std::string_view name) const {
  std::shared_lock lock(mutex_);
  const auto it = datasets_.find(name);
  return it == datasets_.end() ? nullptr : it->second;
}

std::vector<std::shared_ptr<const Dataset>> DatasetStore::list() const {
  std::shared_lock lock(mutex_);
  std::vector<std::shared_ptr<const Dataset>> out;
  for (const auto& [name, ds] : datasets_) out.push_back(ds);
  return out;
}

struct Service::Impl {
  ServiceOptions options;
  DatasetStore store;
  httplib::Server server;
  bool bound = false;

  explicit Impl(ServiceOptions o) : options(std::move(o)), store(options.data_dir) {}
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {
  impl_->store.load_all();
  auto& srv = impl_->server;
  srv.set_payload_max_length(kMaxUploadBytes);
  if (impl_->options.threads) {
    const std::size_t n = impl_->options.threads;
    srv.new_task_queue = [n] { return new httplib::ThreadPool(n); };
  }

  auto send = [](httplib::Response& res, const HttpReply& reply) {
    res.status = reply.status;
    res.set_content(reply.body, reply.content_type);
  };

  srv.Get("/health", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, health());
  });
  srv.Get("/api/datasets", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, list_datasets());
  });
  srv.Post("/api/datasets", [this, send](const httplib::Request& req, httplib::Response& res) {
    std::string name = req.has_param("name") ? req.get_param_value("name") : "";
    std::string body;
    if (req.is_multipart_form_data()) {
      if (req.has_file("name")) name = req.get_file_value("name").content;
      if (req.has_file("file")) {
        const auto file = req.get_file_value("file");
        body = file.content;
        if (name.empty()) name = std::filesystem::path(file.filename).stem().string();
      }
    } else {
      body = req.body;
    }
    send(res, upload(name, body));
  });
  srv.Get("/api/parse", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, parse(req.get_param_value("q")));
  });
  srv.Post("/api/query", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, query(req.body));
  });
  if (impl_->options.static_dir) srv.set_mount_point("/", impl_->options.static_dir->string());
}

Service::~Service() { stop(); }

DatasetStore& Service::store() noexcept { return impl_->store; }

HttpReply Service::health() const { return json_reply(200, {{"status", "ok"}}); }

HttpReply Service::list_datasets() const {
  Json out = Json::array();
  for (const auto& ds : impl_->store.list()) out.push_back(dataset_to_json(*ds));
  return json_reply(200, {{"datasets", std::move(out)}});
}

HttpReply Service::upload(const std::string& name, std::string_view csv) {
  if (csv.empty()) return error_reply(400, "SchemaError", "empty upload");
  if (csv.size() > kMaxUploadBytes) return error_reply(413, "TooLarge", "upload exceeds 100 MiB");
  try {
    return json_reply(200, dataset_to_json(*impl_->store.put(name, csv)));
  } catch (const Error& e) {
    return error_reply(e);
  }
}

HttpReply Service::parse(std::string_view query) const { return json_reply(200, parse_report(query)); }

HttpReply Service::query(std::string_view request_json) const {
  Json req;
  try {
    req = Json::parse(request_json);
  } catch (const Json::exception& e) {
    return error_reply(400, "InvalidArgument", std::string("request is not valid JSON: ") + e.what());
  }
  if (!req.is_object()) return error_reply(400, "InvalidArgument", "request must be a JSON object");
  try {
    const std::string name = required_string(req, "dataset");
    const auto dataset = impl_->store.get(name);
    if (!dataset) return error_reply(404, "UnknownDataset", "no dataset named '" + name + "'");

    VisualSpec spec;
    spec.z_attr = required_string(req, "z");
    spec.x_attr = required_string(req, "x");
    spec.y_attr = required_string(req, "y");
    if (const Json* f = field(req, "filters")) {
      if (!f->is_array()) throw Error(ErrorCode::InvalidArgument, "filters must be an array");
      for (const auto& item : *f) spec.filters.push_back(filter_from_json(item));
    }
    if (const Json* b = field(req, "bin_width")) spec.bin_width = b->get<double>();
    if (const Json* a = field(req, "aggregation")) spec.aggregation = parse_aggregation(a->get<std::string>());

    const Json* text = field(req, "query");
    const Json* sketch = field(req, "sketch");
    if (text && sketch) {
      throw Error(ErrorCode::InvalidArgument, "give either 'query' or 'sketch', not both");
    }
    ShapeQuery ast;
    if (text) {
      const std::string q = text->get<std::string>();
      Json report = parse_report(q);
      if (!report["ok"].get<bool>()) {
        const Json& first = report["issues"].at(0);
        return json_reply(400, {{"error", first["code"]},
                                {"message", first["message"]},
                                {"issues", report["issues"]}});
      }
      ast = parse_shapequery(q);
    } else if (sketch) {
      std::vector<Point> points;
      for (const auto& p : *sketch) points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      ast = ShapeQuery::seg(Pattern::sketch_of(std::move(points)));
      const ValidationReport report = validate_ast(ast);
      if (!report.ok) throw SemanticError(report);
    } else {
      throw Error(ErrorCode::InvalidArgument, "request needs a 'query' or a 'sketch'");
    }

    EngineConfig config;
    config.threads = impl_->options.threads;
    const Json* k = field(req, "k");
    const long long kk = k ? k->get<long long>() : 10;
    if (kk < 1) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
    if (const Json* e = field(req, "engine")) config.engine = parse_engine(e->get<std::string>());
    if (const Json* s = field(req, "seed")) config.seed = s->get<std::uint64_t>();
    if (const Json* e = field(req, "eager_pushdown")) config.eager_pushdown = e->get<bool>();

    QueryOutput out = run_query(*dataset, spec, ast, static_cast<std::size_t>(kk), config);
    for (auto& r : out.results) r = downsample(r, impl_->options.max_points);
    return json_reply(200, response_to_json(out, ast));
  } catch (const SemanticError& e) {
    Json issues = Json::array();
    for (const auto& i : e.report().issues) {
      issues.push_back({{"code", i.code}, {"message", i.message}, {"path", i.path}});
    }
    return json_reply(400, {{"error", to_string(e.code())}, {"message", e.what()}, {"issues", issues}});
  } catch (const Error& e) {
    return error_reply(e);
  } catch (const Json::exception& e) {
    return error_reply(400, "InvalidArgument", std::string("bad request field: ") + e.what());
  }
}

int Service::bind(const std::string& host, int port) {
  if (port == 0) {
    port = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    port = -1;
  }
  impl_->bound = port > 0;
  return port;
}

bool Service::run() { return impl_->bound && impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

}  // namespace trendseek
