#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "truckmorl/env/highway_env.hpp"
#include "truckmorl/harness/baseline.hpp"
#include "truckmorl/harness/pareto.hpp"

namespace truckmorl::harness {

// CSV text with full round-trip precision. Parsers throw UsageError on malformed input.
std::string pareto_csv(const std::vector<ParetoRecord>& records);
std::vector<ParetoRecord> parse_pareto_csv(const std::string& text);

std::string baseline_csv(const std::vector<BaselineSample>& curve);
std::vector<BaselineSample> parse_baseline_csv(const std::string& text);

std::string trace_csv(const std::vector<env::TraceRow>& rows);
std::vector<env::TraceRow> parse_trace_csv(const std::string& text);

/// Driver cost (x) against energy cost (y), colored by success rate.
std::string pareto_svg(const std::vector<ParetoRecord>& records);

/// Total cost against speed with the optimum marked.
std::string baseline_svg(const BaselineResult& baseline);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace truckmorl::harness
