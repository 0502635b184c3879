#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kkm/kernel.hpp"
#include "kkm/nystrom.hpp"
#include "kkm/risk.hpp"

namespace kkm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitConfig = 2;

/// Environment variable that overrides the configured output directory.
inline constexpr const char* kOutputDirEnv = "KKM_OUTPUT_DIR";

struct DataSection {
    std::string source = "synthetic";  // synthetic | inline | csv
    std::string path;                  // csv
    std::string points;                // inline: "x1,x2; y1,y2; ..."
    std::string generator = "blobs";   // blobs | benchmark
    std::size_t n = 100;
    int clouds = 2;
    int dim = 2;
    double spread = 0.1;
    double separation = 1.0;
};

struct ClusterSection {
    int k = 2;
    std::string method = "exact";  // exact | nystrom | approx
    int restarts = 10;
    int rounds = -1;
    int max_iter = 300;
    double rel_tol = 1e-9;
};

struct NystromSection {
    std::string mode = "general";  // general | eigendecay | linear_k | fixed
    std::size_t m = 0;
    double c_scale = 1.0;
    double delta = 0.1;
    double jitter = 0.0;
};

struct LabSection {
    std::size_t trials = 10000;
    std::vector<std::pair<int, int>> grid{{2, 4}, {2, 8}, {4, 8}};  // (k, n)
};

struct SweepSection {
    std::vector<std::size_t> n_values{64, 128, 256};
    std::vector<int> k_values{2, 4};
    int reps = 50;
    std::vector<Method> methods{Method::ExactErmApprox, Method::Nystrom, Method::ApproxErm};
    std::string m_policy = "general";  // fixed | general | eigendecay
    std::size_t fixed_m = 0;
    int restarts = 20;
    BenchmarkParams benchmark;
};

struct ExperimentConfig {
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "kkm_out";
    int threads = 1;
    KernelSpec kernel;
    DataSection data;
    ClusterSection cluster;
    NystromSection nystrom;
    LabSection lab;
    SweepSection sweep;
};

/// Parses an INI-style config ([run], [kernel], [data], [cluster], [nystrom],
/// [lab], [sweep]). Relative data paths resolve against the config file's
/// directory. Throws Error(Config) for malformed values or a missing seed and
/// Error(Io) for unreadable or missing files.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = ".");

/// Points described by the [data] section.
PointSet load_points(const ExperimentConfig& config);

int cmd_cluster(const ExperimentConfig& config, std::ostream& out, std::ostream& err);
int cmd_nystrom_embed(const ExperimentConfig& config, std::ostream& out, std::ostream& err);
int cmd_rad_check(const ExperimentConfig& config, std::ostream& out, std::ostream& err);
int cmd_risk_scan(const ExperimentConfig& config, std::ostream& out, std::ostream& err);
int cmd_spectrum(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

/// Full command line (args[0] is the program name). Flags override the
/// config file; the output directory env var overrides the config but not
/// --out.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kkm::cli
