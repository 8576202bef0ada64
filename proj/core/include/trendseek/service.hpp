#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "trendseek/engines.hpp"
#include "trendseek/ingest.hpp"

namespace trendseek {

inline constexpr std::size_t kMaxUploadBytes = std::size_t{100} << 20;
inline constexpr std::size_t kMaxTransportPoints = 1000;

/// Named datasets, persisted as CSV files in a directory. Registered datasets
/// are immutable; re-registering a name swaps in a new one.
class DatasetStore {
 public:
  explicit DatasetStore(std::filesystem::path dir = {});

  /// Loads every *.csv in the directory; returns the names that failed.
  std::vector<std::string> load_all();

  /// Parses, persists and registers. Throws Error(Schema/EmptyDataset/...).
  std::shared_ptr<const Dataset> put(const std::string& name, std::string_view csv);
  std::shared_ptr<const Dataset> get(std::string_view name) const;
  std::vector<std::shared_ptr<const Dataset>> list() const;

  static bool valid_name(std::string_view name) noexcept;

 private:
  std::filesystem::path dir_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<const Dataset>, std::less<>> datasets_;
};

struct ServiceOptions {
  std::filesystem::path data_dir;
  std::optional<std::filesystem::path> static_dir;
  std::size_t threads = 0;
  std::size_t max_points = kMaxTransportPoints;
};

struct HttpReply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();

  DatasetStore& store() noexcept;

  // Handlers, callable without a socket.
  HttpReply health() const;
  HttpReply list_datasets() const;
  HttpReply upload(const std::string& name, std::string_view csv);
  HttpReply parse(std::string_view query) const;
  HttpReply query(std::string_view request_json) const;

  /// Binds to host:port (0 picks a free port) and returns the bound port, or
  /// -1 on failure.
  int bind(const std::string& host, int port);
  /// Serves until stop(); returns false if the socket failed.
  bool run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace trendseek
