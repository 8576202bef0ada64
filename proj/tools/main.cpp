#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "bench.hpp"
#include "trendseek/corpus.hpp"
#include "trendseek/errors.hpp"
#include "trendseek/executor.hpp"
#include "trendseek/parser.hpp"
#include "trendseek/serialize.hpp"
#include "trendseek/service.hpp"

namespace ts = trendseek;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitInternal = 1;

struct QueryArgs {
  std::string dataset;
  std::string z, x, y;
  std::vector<std::string> filters;
  std::string query;
  std::size_t k = 10;
  std::string engine = "segtree_prune";
  std::optional<double> bin_width;
  std::string agg = "avg";
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  std::string out = "table";
  bool eager = false;
};

struct BenchArgs {
  std::string corpus;
  std::string z = "z", x = "x", y = "y";
  std::string synthetic;
  std::string engines = "dp,segtree";
  std::string query;
  std::size_t k = 10;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
};

struct ServeArgs {
  std::string host = "0.0.0.0";
  int port = 8080;
  std::string data_dir;
  std::string static_dir;
  std::size_t threads = 0;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string fmt(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string x_text(double x, bool date) { return date ? ts::format_iso_date(x) : ts::format_number(x); }

// Parses the query text, printing a caret-annotated message on failure.
std::optional<ts::ShapeQuery> parse_or_report(const std::string& text) {
  try {
    return ts::parse_shapequery(text);
  } catch (const ts::ParseError& e) {
    std::cerr << ts::annotate_error(text, e) << '\n';
  } catch (const ts::SemanticError& e) {
    std::cerr << "invalid query: " << text << '\n';
    for (const auto& issue : e.report().issues) {
      const auto span = ts::issue_span(text, ts::parse_shapequery_raw(text), issue.path);
      std::cerr << "  " << issue.code << " at " << span.begin << ".." << span.end << ": "
                << issue.message << '\n';
    }
  }
  return std::nullopt;
}

int cmd_parse(const std::string& text, bool json) {
  if (json) {
    const auto report = ts::parse_report(text);
    std::cout << report.dump(2) << '\n';
    return report["ok"].get<bool>() ? 0 : kExitUsage;
  }
  const auto ast = parse_or_report(text);
  if (!ast) return kExitUsage;
  std::cout << ts::format_shapequery(*ast) << '\n';
  return 0;
}

int cmd_query(const QueryArgs& a) {
  const auto ast = parse_or_report(a.query);
  if (!ast) return kExitUsage;
  ts::VisualSpec spec;
  spec.z_attr = a.z;
  spec.x_attr = a.x;
  spec.y_attr = a.y;
  for (const auto& f : a.filters) spec.filters.push_back(ts::parse_filter(f));
  spec.bin_width = a.bin_width;
  spec.aggregation = ts::parse_aggregation(a.agg);
  ts::EngineConfig config;
  config.engine = ts::parse_engine(a.engine);
  config.seed = a.seed;
  config.threads = a.threads;
  config.eager_pushdown = a.eager;

  const ts::Dataset ds = ts::load_csv(a.dataset);
  const ts::QueryOutput out = ts::run_query(ds, spec, *ast, a.k, config);
  for (const auto& w : out.warnings) std::cerr << "warning: " << w << '\n';

  if (a.out == "json") {
    std::cout << ts::response_to_json(out, *ast).dump() << '\n';
  } else if (a.out == "csv") {
    std::cout << "rank,id,total,breakpoints\n";
    for (std::size_t i = 0; i < out.results.size(); ++i) {
      const auto& r = out.results[i];
      std::string bps;
      for (std::size_t b = 0; b < r.breakpoint_x.size(); ++b) {
        if (b) bps += ';';
        bps += x_text(r.breakpoint_x[b], out.x_is_date);
      }
      std::cout << i + 1 << ',' << r.viz_id << ',' << ts::format_number(r.total) << ',' << bps
                << '\n';
    }
  } else {
    std::cout << "query: " << ts::format_shapequery(*ast) << '\n';
    std::printf("%-5s %-20s %9s  %s\n", "rank", "id", "score", "breakpoints");
    for (std::size_t i = 0; i < out.results.size(); ++i) {
      const auto& r = out.results[i];
      std::string bps;
      for (std::size_t b = 0; b < r.breakpoint_x.size(); ++b) {
        if (b) bps += "  ";
        bps += x_text(r.breakpoint_x[b], out.x_is_date);
      }
      std::printf("%-5zu %-20s %9s  %s\n", i + 1, r.viz_id.c_str(), fmt(r.total, 4).c_str(),
                  bps.c_str());
    }
  }
  return 0;
}

int cmd_bench(const BenchArgs& a) {
  std::vector<ts::EngineKind> engines;
  for (const auto& e : split(a.engines, ',')) engines.push_back(ts::parse_engine(e));
  std::vector<ts::CandidateViz> vizs;
  std::size_t runs = 3;
  if (!a.synthetic.empty()) {
    const auto parts = split(a.synthetic, ',');
    if (parts.size() != 3) throw ts::Error(ts::ErrorCode::InvalidArgument, "--synthetic takes n,len,k");
    ts::CorpusOptions opts;
    opts.count = std::stoul(parts[0]);
    opts.length = std::stoul(parts[1]);
    runs = std::stoul(parts[2]);
    opts.seed = a.seed;
    vizs = ts::planted_corpus(opts, runs);
  } else if (!a.corpus.empty()) {
    const ts::Dataset ds = ts::load_csv(a.corpus);
    ts::VisualSpec spec;
    spec.z_attr = a.z;
    spec.x_attr = a.x;
    spec.y_attr = a.y;
    const auto records = ts::extract(ds, spec);
    vizs = ts::group_and_bin(records, spec, true, ts::bin_grid_for(ds, spec)).vizs;
  } else {
    throw ts::Error(ts::ErrorCode::InvalidArgument, "bench needs a corpus path or --synthetic");
  }
  std::string text = a.query;
  if (text.empty()) {
    for (std::size_t j = 0; j < runs; ++j) text += j == 0 ? "u" : (j % 2 ? ">>d" : ">>u");
  }
  const auto ast = parse_or_report(text);
  if (!ast) return kExitUsage;
  const ts::CompiledQuery query(*ast);
  ts::EngineConfig base;
  base.seed = a.seed;
  base.threads = a.threads;
  std::cout << ts::cli::bench_csv(ts::cli::run_bench(query, vizs, engines, a.k, base));
  return 0;
}

int cmd_serve(const ServeArgs& a) {
  ts::ServiceOptions opts;
  std::string dir = a.data_dir;
  if (dir.empty()) {
    const char* env = std::getenv("TRENDSEEK_DATA_DIR");
    dir = env && *env ? env : "data";
  }
  opts.data_dir = dir;
  if (!a.static_dir.empty()) opts.static_dir = a.static_dir;
  opts.threads = a.threads;
  ts::Service service(opts);
  const int port = service.bind(a.host, a.port);
  if (port < 0) {
    std::cerr << "cannot bind " << a.host << ':' << a.port << '\n';
    return kExitInternal;
  }
  std::cerr << "serving " << opts.data_dir.string() << " on http://" << a.host << ':' << port << '\n';
  return service.run() ? 0 : kExitInternal;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Search trendline collections by shape"};
  app.require_subcommand(1);

  QueryArgs qa;
  auto* query = app.add_subcommand("query", "Run a shape query against a CSV file");
  query->add_option("dataset", qa.dataset, "CSV file")->required()->check(CLI::ExistingFile);
  query->add_option("--z", qa.z, "Column that identifies a trendline")->required();
  query->add_option("--x", qa.x, "x-axis column")->required();
  query->add_option("--y", qa.y, "y-axis column")->required();
  query->add_option("--query,-q", qa.query, "Shape query text")->required();
  query->add_option("--filter", qa.filters, "Row filter \"col op value\" (repeatable)");
  query->add_option("--k", qa.k, "Number of results")->check(CLI::PositiveNumber);
  query->add_option("--engine", qa.engine, "exhaustive|dp|segtree|segtree_prune|greedy|dtw");
  query->add_option("--bin-width", qa.bin_width, "Bin width in x units");
  query->add_option("--agg", qa.agg, "avg|sum|min|max|count");
  query->add_option("--seed", qa.seed, "Seed for sampling");
  query->add_option("--threads", qa.threads, "Worker cap (0 = all cores)");
  query->add_option("--out", qa.out, "table|json|csv")
      ->check(CLI::IsMember({"table", "json", "csv"}));
  query->add_flag("--eager-pushdown", qa.eager, "Drop vizs failing anchored up/down checks early");

  std::string parse_text;
  bool parse_json = false;
  auto* parse = app.add_subcommand("parse", "Validate a query and print its canonical form");
  parse->add_option("query", parse_text, "Shape query text")->required();
  parse->add_flag("--json", parse_json, "Print the full parse report as JSON");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Time engines and compare their top-k with dp");
  bench->add_option("corpus", ba.corpus, "CSV file (z, x, y columns)");
  bench->add_option("--z", ba.z, "Trendline column of the corpus");
  bench->add_option("--x", ba.x, "x-axis column of the corpus");
  bench->add_option("--y", ba.y, "y-axis column of the corpus");
  bench->add_option("--synthetic", ba.synthetic, "n,len,k planted corpus");
  bench->add_option("--engines", ba.engines, "Comma-separated engine list");
  bench->add_option("--query,-q", ba.query, "Shape query (default alternates u and d)");
  bench->add_option("--k", ba.k, "Top-k for accuracy")->check(CLI::PositiveNumber);
  bench->add_option("--seed", ba.seed, "Seed for the synthetic corpus and sampling");
  bench->add_option("--threads", ba.threads, "Worker cap (0 = all cores)");

  ServeArgs sa;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--host", sa.host, "Bind address")->capture_default_str();
  serve->add_option("--port", sa.port, "Port (0 picks a free one)")->capture_default_str();
  serve->add_option("--data-dir", sa.data_dir, "Dataset store (default $TRENDSEEK_DATA_DIR or ./data)");
  serve->add_option("--static-dir", sa.static_dir, "Web client assets served under /");
  serve->add_option("--threads", sa.threads, "HTTP and query worker cap (0 = default)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*query) return cmd_query(qa);
    if (*parse) return cmd_parse(parse_text, parse_json);
    if (*bench) return cmd_bench(ba);
    if (*serve) return cmd_serve(sa);
  } catch (const ts::Error& e) {
    std::cerr << ts::to_string(e.code()) << ": " << e.what() << '\n';
    return e.code() == ts::ErrorCode::Io ? kExitInternal : kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}
