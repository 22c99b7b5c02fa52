#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

// Batch front door: scenario files in, certified reports out.
//
// Exit statuses: 0 = completed with verdicts, 2 = completed with boundary
// (or mismatching) verdicts, 1 = input error, 3 = solver error.
namespace emerge::cli {

struct RunOptions {
  std::optional<std::uint64_t> seed;        // overrides the scenario seed
  std::optional<double> verdict_tol;        // overrides the LP verdict tolerance
  std::optional<std::size_t> replications;  // overrides the replication count
};

// Executes one scenario (kinds: merge, validity, duality, dominate,
// simulate, oracle-check); writes report.json and, for tabular kinds,
// report.csv into out_dir.
int run(const std::filesystem::path& scenario_path,
        const std::filesystem::path& out_dir, const RunOptions& options = {});

// Runs a dominate scenario across its (epsilon, theta) ladders; one report
// row per cell. Cells may run concurrently (EMERGE_THREADS caps them).
int schedule(const std::filesystem::path& scenario_path,
             const std::filesystem::path& out_dir,
             const RunOptions& options = {});

// Compares the brute-force coupling enumeration against the LP on a small
// instance.
int oracle_check(const std::filesystem::path& scenario_path,
                 const std::filesystem::path& out_dir,
                 const RunOptions& options = {});

}  // namespace emerge::cli
