#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "trendseek/algebra.hpp"
#include "trendseek/executor.hpp"
#include "trendseek/ingest.hpp"
#include "trendseek/parser.hpp"

namespace trendseek {

// JSON shapes shared by the service and the CLI. Field names are the wire
// contract documented in docs/api.md.

using Json = nlohmann::json;

Json ast_to_json(const ShapeQuery& ast);
Json fit_to_json(const LineFit& fit);
Json result_to_json(const RankedResult& result, bool x_is_date);

/// {"parsed": {...}, "results": [...], "warnings": [...], "timing_ms": {...}, "stats": {...}}
Json response_to_json(const QueryOutput& output, const ShapeQuery& ast);

/// {"ok", "canonical", "ast", "issues"}; never throws on malformed input.
Json parse_report(std::string_view text);

/// Character span of the node at a validation path ("/", "/0/1", ...) of the
/// raw (unnormalized) query parsed from `text`.
Span issue_span(std::string_view text, const ShapeQuery& raw, std::string_view path);

Json dataset_to_json(const Dataset& dataset);
Json viz_to_json(const CandidateViz& viz);

/// {"error": code name, "message": text}
Json error_json(const Error& error);

/// Keeps at most `max_points` points of the series, always including the
/// breakpoints, and remaps breakpoint indices.
RankedResult downsample(const RankedResult& result, std::size_t max_points);

}  // namespace trendseek
