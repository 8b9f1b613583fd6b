#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "paretopt/driver.hpp"

namespace paretopt {

inline constexpr int kExitOk = 0;
inline constexpr int kExitSchema = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitNoZ = 4;

class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Parsed problem document: the optimization data plus the sweep/run options
// carried in the same file.
struct ProblemFile {
    MooProblem problem;
    std::vector<std::string> variable_names;
    SweepConfig sweep;
};

// Loads and validates a problem JSON document. Field-level diagnostics are
// reported through SchemaError; unreadable files through IoError.
ProblemFile parse_problem(const std::filesystem::path& path);

// Same, from an in-memory document (origin names the source in diagnostics).
ProblemFile parse_problem_text(const std::string& json_text, const std::string& origin);

// Canonical JSON form; parse(serialize(pf)) reproduces the in-memory problem.
std::string serialize_problem(const ProblemFile& pf);

// Certificate JSON layout: gamma, residual, Gram matrices row-major with
// their basis orders, and the scalar multipliers.
std::string certificate_to_json(const SosCertificate& cert);

struct RunPaths {
    std::filesystem::path results_json;
    std::filesystem::path points_csv;
    std::filesystem::path scatter_dat;
};

// Persists results.json, efficient_points.csv and pareto_scatter.dat.
RunPaths write_results(const std::filesystem::path& out_dir, const ProblemFile& pf,
                       const SweepResult& result);

// The command-line entry point (also used in-process by tests).
// Exit codes: 0 ok, 2 schema error, 3 I/O error, 4 no z sources.
int run_cli(int argc, const char* const* argv);

}  // namespace paretopt
