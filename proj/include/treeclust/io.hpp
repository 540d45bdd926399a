#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "treeclust/dbscan.hpp"
#include "treeclust/levelset.hpp"

namespace treeclust {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class InputFormat { Csv, Ndjson };

/// CSV: one point per line, comma-separated decimals. NDJSON: one JSON array
/// per line. Throws DataError with the offending line number on ragged rows,
/// non-finite values, or an empty file.
Dataset ingest(const std::filesystem::path& path, InputFormat format);

/// Shortest round-tripping decimal representation per coordinate.
void export_csv(const Dataset& ds, const std::filesystem::path& path);

/// Write-temp-then-rename.
void write_atomic(const std::filesystem::path& path, const std::string& content);

nlohmann::json dendrogram_json(const ClusterHierarchy& hier,
                               const std::vector<SplitRecord>& significant);
nlohmann::json levelset_json(const Dataset& ds, const LevelSetEstimate& est);

/// Structural checks applied before writing: levels ascending, clusters
/// disjoint per level and nested across consecutive levels.
bool validate_dendrogram_json(const nlohmann::json& j, std::string* why = nullptr);

struct RunConfig {
    std::string input_path;  // exclusive with synthetic
    InputFormat format = InputFormat::Csv;
    std::string synthetic;
    int n = 500;  // synthetic sample size

    std::string algorithm = "dbscan";  // dbscan | mdbscan | gridlevel
    std::optional<double> h;
    std::optional<double> alpha;
    std::optional<double> bandwidth_c;
    int kernel_order = 0;  // 0 -> ceil(alpha) when a valid kernel is needed

    std::optional<double> prune_delta;
    std::optional<double> cs;

    std::optional<double> gap_lambda_star;
    std::optional<double> gap_epsilon;

    std::optional<double> level;  // gridlevel threshold
    double grid_step = 0.01;

    // error-budget constants (used when pruning through {c_S, alpha} or for
    // gap inputs); gamma defaults to log n
    double budget_c1 = 1.0;
    std::optional<double> budget_c2;  // default: declared Holder constant
    std::optional<double> holder_l;   // overrides the spec's declared constant
    double gap_h_c1 = 0.25;           // constant in the bandwidth floor at a gap

    std::uint64_t seed = 1;
    std::string out_dir = "out";

    std::string experiment;  // "", "rates", "gap-levelset"
    std::vector<int> n_grid = {250, 500, 1000, 2000, 4000};
    int seeds = 50;
};

/// Executes one run (estimate or experiment) and writes the artifacts under
/// config.out_dir. Returns the list of files written. Throws UsageError on
/// conflicting options, DataError on input problems, std::domain_error and
/// friends on numerical preconditions.
std::vector<std::string> run(const RunConfig& config);

}  // namespace treeclust
