#include "kkm/cli.hpp"

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <optional>
#include <sstream>

#include "kkm/clustering.hpp"
#include "kkm/csv.hpp"
#include "kkm/rademacher.hpp"
#include "kkm/seeding.hpp"

namespace kkm::cli {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <class T>
T parse_value(const std::string& key, const std::string& text) {
    std::istringstream in(trim(text));
    T value{};
    if constexpr (std::is_same_v<T, bool>) {
        const std::string t = trim(text);
        if (t == "true" || t == "1" || t == "yes") return true;
        if (t == "false" || t == "0" || t == "no") return false;
        throw Error(ErrorCode::Config, "key '" + key + "': expected a boolean, got '" + text + "'");
    } else {
        in >> value;
        if (!in || !(in >> std::ws).eof())
            throw Error(ErrorCode::Config, "key '" + key + "': cannot parse '" + text + "'");
    }
    return value;
}

template <class T>
void read(const pt::ptree& tree, const std::string& key, T& target) {
    if (auto v = tree.get_optional<std::string>(key)) target = parse_value<T>(key, *v);
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
    std::vector<T> out;
    for (const auto& item : split(text, ',')) out.push_back(parse_value<T>(key, item));
    if (out.empty()) throw Error(ErrorCode::Config, "key '" + key + "' must not be empty");
    return out;
}

std::vector<Method> parse_methods(const std::string& text) {
    std::vector<Method> out;
    for (const auto& item : split(text, ',')) out.push_back(parse_method(item));
    if (out.empty()) throw Error(ErrorCode::Config, "method list must not be empty");
    return out;
}

std::vector<std::pair<int, int>> parse_grid(const std::string& text) {
    std::vector<std::pair<int, int>> grid;
    for (const auto& cell : split(text, ',')) {
        const auto x = cell.find('x');
        if (x == std::string::npos) throw Error(ErrorCode::Config, "grid cell '" + cell + "' must look like KxN");
        grid.emplace_back(parse_value<int>("lab.grid", cell.substr(0, x)), parse_value<int>("lab.grid", cell.substr(x + 1)));
    }
    if (grid.empty()) throw Error(ErrorCode::Config, "lab.grid must not be empty");
    return grid;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
    f << content;
    if (!f) throw Error(ErrorCode::Io, "failed writing '" + path.string() + "'");
}

fs::path prepare_output(const ExperimentConfig& config) {
    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create output directory '" + config.output_dir.string() + "'");
    return config.output_dir;
}

template <class Body>
int guarded(std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }
}

std::size_t nystrom_m(const ExperimentConfig& c, const GramMatrix& K) {
    const auto& ny = c.nystrom;
    if (ny.mode == "fixed") {
        if (ny.m < 1 || ny.m > K.size())
            throw Error(ErrorCode::MTooLarge, "fixed landmark count must satisfy 1 <= m <= n");
        return ny.m;
    }
    const LandmarkMode mode = parse_landmark_mode(ny.mode);
    std::optional<double> xi;
    if (mode != LandmarkMode::Eigendecay) xi = effective_dimension(K);
    return landmark_size(K.size(), c.cluster.k, ny.delta, xi, mode, ny.c_scale);
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const fs::path& base_dir) {
    pt::ptree tree;
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(ErrorCode::Config, std::string("malformed config: ") + e.what());
    }

    ExperimentConfig c;
    auto seed = tree.get_optional<std::string>("run.seed");
    if (!seed) throw Error(ErrorCode::Config, "config must set run.seed");
    c.seed = parse_value<std::uint64_t>("run.seed", *seed);
    if (auto v = tree.get_optional<std::string>("run.output_dir")) c.output_dir = trim(*v);
    read(tree, "run.threads", c.threads);

    if (auto v = tree.get_optional<std::string>("kernel.family")) c.kernel.family = parse_kernel_family(trim(*v));
    read(tree, "kernel.bandwidth", c.kernel.bandwidth);
    read(tree, "kernel.degree", c.kernel.degree);
    read(tree, "kernel.offset", c.kernel.offset);
    read(tree, "kernel.normalized", c.kernel.normalized);
    try {
        c.kernel.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::Config, e.what());
    }

    auto& d = c.data;
    if (auto v = tree.get_optional<std::string>("data.source")) d.source = trim(*v);
    if (auto v = tree.get_optional<std::string>("data.path")) d.path = trim(*v);
    if (auto v = tree.get_optional<std::string>("data.points")) d.points = *v;
    if (auto v = tree.get_optional<std::string>("data.generator")) d.generator = trim(*v);
    read(tree, "data.n", d.n);
    read(tree, "data.clouds", d.clouds);
    read(tree, "data.dim", d.dim);
    read(tree, "data.spread", d.spread);
    read(tree, "data.separation", d.separation);
    if (d.source != "synthetic" && d.source != "inline" && d.source != "csv")
        throw Error(ErrorCode::Config, "data.source must be synthetic, inline or csv");
    if (d.source == "csv") {
        if (d.path.empty()) throw Error(ErrorCode::Config, "data.path is required for csv data");
        fs::path p = d.path;
        if (p.is_relative()) p = base_dir / p;
        if (!fs::exists(p)) throw Error(ErrorCode::Io, "data file not found: " + p.string());
        d.path = p.string();
    }

    auto& cl = c.cluster;
    read(tree, "cluster.k", cl.k);
    if (auto v = tree.get_optional<std::string>("cluster.method")) cl.method = trim(*v);
    read(tree, "cluster.restarts", cl.restarts);
    read(tree, "cluster.rounds", cl.rounds);
    read(tree, "cluster.max_iter", cl.max_iter);
    read(tree, "cluster.rel_tol", cl.rel_tol);

    auto& ny = c.nystrom;
    if (auto v = tree.get_optional<std::string>("nystrom.mode")) ny.mode = trim(*v);
    read(tree, "nystrom.m", ny.m);
    read(tree, "nystrom.c_scale", ny.c_scale);
    read(tree, "nystrom.delta", ny.delta);
    read(tree, "nystrom.jitter", ny.jitter);

    read(tree, "lab.trials", c.lab.trials);
    if (auto v = tree.get_optional<std::string>("lab.grid")) c.lab.grid = parse_grid(*v);

    auto& sw = c.sweep;
    if (auto v = tree.get_optional<std::string>("sweep.n_values")) sw.n_values = parse_list<std::size_t>("sweep.n_values", *v);
    if (auto v = tree.get_optional<std::string>("sweep.k_values")) sw.k_values = parse_list<int>("sweep.k_values", *v);
    if (auto v = tree.get_optional<std::string>("sweep.methods")) sw.methods = parse_methods(*v);
    read(tree, "sweep.reps", sw.reps);
    if (auto v = tree.get_optional<std::string>("sweep.m_policy")) sw.m_policy = trim(*v);
    read(tree, "sweep.fixed_m", sw.fixed_m);
    read(tree, "sweep.restarts", sw.restarts);
    read(tree, "sweep.clouds", sw.benchmark.clouds);
    read(tree, "sweep.atoms_per_cloud", sw.benchmark.atoms_per_cloud);
    read(tree, "sweep.dim", sw.benchmark.dim);
    read(tree, "sweep.spread", sw.benchmark.spread);
    read(tree, "sweep.bandwidth", sw.benchmark.bandwidth);
    read(tree, "sweep.benchmark_seed", sw.benchmark.seed);
    parse_policy_kind(sw.m_policy);
    if (sw.reps < 1) throw Error(ErrorCode::Config, "sweep.reps must be >= 1");
    return c;
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open config file: " + path.string());
    return parse_config(in, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

PointSet load_points(const ExperimentConfig& config) {
    const auto& d = config.data;
    if (d.source == "csv") {
        const auto rows = read_numeric_csv(d.path);
        if (rows.empty()) throw Error(ErrorCode::Io, "data file has no rows: " + d.path);
        PointSet x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != rows[0].size()) throw Error(ErrorCode::Io, "ragged rows in " + d.path);
            for (std::size_t j = 0; j < rows[i].size(); ++j) x(i, j) = rows[i][j];
        }
        return x;
    }
    if (d.source == "inline") {
        const auto rows = split(d.points, ';');
        if (rows.empty()) throw Error(ErrorCode::Config, "data.points is empty");
        std::vector<std::vector<double>> values;
        for (const auto& r : rows) values.push_back(parse_list<double>("data.points", r));
        PointSet x(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(values[0].size()));
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (values[i].size() != values[0].size()) throw Error(ErrorCode::Config, "inline points differ in dimension");
            for (std::size_t j = 0; j < values[i].size(); ++j) x(i, j) = values[i][j];
        }
        return x;
    }
    if (d.generator == "benchmark") {
        BenchmarkParams bp;
        bp.clouds = d.clouds;
        bp.dim = d.dim;
        bp.spread = d.spread;
        bp.seed = config.seed;
        return standard_benchmark(bp).atoms();
    }
    if (d.generator != "blobs") throw Error(ErrorCode::Config, "unknown data.generator '" + d.generator + "'");
    if (d.n < 1 || d.clouds < 1 || d.dim < 1) throw Error(ErrorCode::Config, "blobs need positive n, clouds and dim");
    // Blob centers on a circle of radius `separation` in the first two axes.
    Rng rng(derive_seed(config.seed, 0xb10b));
    PointSet x(static_cast<Eigen::Index>(d.n), d.dim);
    for (std::size_t i = 0; i < d.n; ++i) {
        const int c = static_cast<int>(i % static_cast<std::size_t>(d.clouds));
        const double angle = 2.0 * std::numbers::pi * c / d.clouds;
        for (int j = 0; j < d.dim; ++j) {
            double center = 0.0;
            if (j == 0) center = d.separation * std::cos(angle);
            if (j == 1) center = d.separation * std::sin(angle);
            x(static_cast<Eigen::Index>(i), j) = center + d.spread * rng.normal();
        }
    }
    return x;
}

int cmd_cluster(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto& cl = config.cluster;
        const PointSet x = load_points(config);
        const GramMatrix K = gram_matrix(config.kernel, x);
        Rng rng(config.seed);
        const LloydOptions lloyd{cl.max_iter, cl.rel_tol};
        const int rounds = cl.rounds >= 0 ? cl.rounds : default_search_rounds(cl.k);
        const int restarts = std::max(1, cl.restarts);

        Assignment best;
        ClusterCostTrace trace;
        double cost = 0.0;
        std::ostringstream extra;
        if (cl.method == "exact") {
            std::optional<LloydResult> keep;
            for (int r = 0; r < restarts; ++r) {
                const SeedingResult seed = local_search_improve(K, kernel_kmeanspp(K, cl.k, rng), rounds, rng);
                LloydResult res = kernel_lloyd(K, seed.induced, lloyd);
                if (!keep || res.trace.per_iteration_cost.back() < keep->trace.per_iteration_cost.back())
                    keep = std::move(res);
            }
            best = keep->assignment;
            trace = keep->trace;
            cost = trace.per_iteration_cost.back();
        } else if (cl.method == "approx") {
            const SeedingResult seed = local_search_improve(K, kernel_kmeanspp(K, cl.k, rng), rounds, rng);
            best = seed.induced;
            cost = seed.cost;
            trace.per_iteration_cost = seed.cost_history;
            trace.iterations = seed.swaps_accepted;
            trace.converged = true;
            extra << "swaps_accepted: " << seed.swaps_accepted << '\n';
        } else if (cl.method == "nystrom") {
            const std::size_t m = nystrom_m(config, K);
            const LandmarkSet landmarks = sample_landmarks_uniform(K.size(), m, rng);
            const EmbeddedDataset e = nystrom_embed(K, landmarks, config.nystrom.jitter);
            NystromOptions opts;
            opts.lloyd = lloyd;
            std::optional<NystromResult> keep;
            for (int r = 0; r < restarts; ++r) {
                NystromResult res = nystrom_kkmeans(e, cl.k, rng, opts);
                if (!keep || res.cost_in_h < keep->cost_in_h) keep = std::move(res);
            }
            best = keep->assignment;
            trace = keep->trace;
            cost = keep->cost_in_h;
            extra << "m: " << m << '\n'
                  << "rank: " << e.rank << (e.rank_deficient ? " (rank-deficient landmark block)" : "") << '\n'
                  << "cost_projected: " << format_real(keep->cost_projected) << '\n';
        } else {
            throw Error(ErrorCode::Config, "unknown cluster.method '" + cl.method + "'");
        }

        const fs::path dir = prepare_output(config);
        std::ostringstream a, t, s;
        best.write_csv(a);
        trace.write_csv(t);
        s << "method: " << cl.method << '\n'
          << "n: " << K.size() << '\n'
          << "k: " << cl.k << '\n'
          << "cost: " << format_real(cost) << '\n'
          << "iterations: " << trace.iterations << '\n'
          << "converged: " << (trace.converged ? "true" : "false") << '\n'
          << extra.str();
        write_file(dir / "assignment.csv", a.str());
        write_file(dir / "trace.csv", t.str());
        write_file(dir / "summary.txt", s.str());
        out << s.str();
        return kExitOk;
    });
}

int cmd_nystrom_embed(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const PointSet x = load_points(config);
        const GramMatrix K = gram_matrix(config.kernel, x);
        Rng rng(config.seed);
        const std::size_t m = nystrom_m(config, K);
        const LandmarkSet landmarks = sample_landmarks_uniform(K.size(), m, rng);
        const EmbeddedDataset e = nystrom_embed(K, landmarks, config.nystrom.jitter);

        const fs::path dir = prepare_output(config);
        std::ostringstream emb, lm, s;
        e.write_csv(emb);
        lm << "landmark\n";
        for (std::size_t i : landmarks.indices()) lm << i << '\n';
        double mean_residual = e.residuals.mean();
        s << "n: " << K.size() << '\n'
          << "m: " << m << '\n'
          << "rank: " << e.rank << '\n'
          << "rank_deficient: " << (e.rank_deficient ? "true" : "false") << '\n'
          << "mean_residual: " << format_real(mean_residual) << '\n';
        write_file(dir / "embedding.csv", emb.str());
        write_file(dir / "landmarks.csv", lm.str());
        write_file(dir / "summary.txt", s.str());
        out << s.str();
        return kExitOk;
    });
}

int cmd_rad_check(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        Rng rng(config.seed);
        const std::size_t trials = config.lab.trials;
        std::ostringstream csv;
        csv << "k,n,estimator,exact,trials,value,std_error,bound,verdict\n";
        out << std::left << std::setw(4) << "k" << std::setw(5) << "n" << std::setw(18) << "estimator" << std::setw(7)
            << "exact" << std::setw(18) << "value" << std::setw(18) << "std_error" << std::setw(18) << "bound"
            << "verdict\n";
        bool violated = false;
        auto row = [&](int k, int n, const std::string& name, bool exact, std::size_t used, double value, double se,
                       double bound, bool ok) {
            violated = violated || !ok;
            const std::string verdict = ok ? "satisfied" : "violated";
            out << std::left << std::setw(4) << k << std::setw(5) << n << std::setw(18) << name << std::setw(7)
                << (exact ? "yes" : "no") << std::setw(18) << format_real(value) << std::setw(18) << format_real(se)
                << std::setw(18) << format_real(bound) << verdict << '\n';
            csv << csv_row({std::to_string(k), std::to_string(n), name, exact ? "1" : "0", std::to_string(used), format_real(value),
                            format_real(se), format_real(bound), verdict})
                << '\n';
        };

        for (const auto& [k, n] : config.lab.grid) {
            if (k < 1 || n < 1 || n % k != 0) {
                err << "notice: cell k=" << k << " n=" << n << " skipped: n is not a positive multiple of k\n";
                continue;
            }
            const LowerBoundInstance inst = lower_bound_construction(k, n);
            const bool exact = n <= kMaxExactSigns && inst.class_size() <= (std::size_t{1} << 16);
            if (!exact)
                err << "notice: cell k=" << k << " n=" << n << " is too large to enumerate; using Monte Carlo with "
                    << trials << " trials\n";

            const RadEstimate fin = finite_class_rad(inst.data, inst.center_sets, trials, rng, exact);
            const double lb = lower_bound_value(k, n);
            row(k, n, "finite_class", fin.exact, fin.trials, fin.value, fin.std_error, lb,
                fin.value + 3.0 * fin.std_error >= lb - 1e-12);

            const RadEstimate coord = coordinate_rad(inst.data, trials, rng);
            const double ub = coordinate_rad_bound(static_cast<std::size_t>(n));
            row(k, n, "coordinate", coord.exact, coord.trials, coord.value, coord.std_error, ub,
                coord.value <= ub + 3.0 * coord.std_error);

            const KhintchineResult kh = khintchine_check(n / k, trials, rng);
            row(k, n, "khintchine", kh.exact, kh.exact ? (std::size_t{1} << (n / k)) : trials, kh.lhs, 0.0, kh.rhs, kh.holds());
        }

        const fs::path dir = prepare_output(config);
        write_file(dir / "rad_check.csv", csv.str());
        return violated ? kExitViolation : kExitOk;
    });
}

int cmd_risk_scan(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto& sw = config.sweep;
        const DistributionSpec p = standard_benchmark(sw.benchmark);
        LandmarkPolicy policy;
        policy.kind = parse_policy_kind(sw.m_policy);
        policy.fixed_m = sw.fixed_m;
        policy.c_scale = config.nystrom.c_scale;
        policy.delta = config.nystrom.delta;
        CellOptions options;
        options.restarts = sw.restarts;
        options.lloyd = {config.cluster.max_iter, config.cluster.rel_tol};
        options.threads = config.threads;

        RiskReport report;
        for (int k : sw.k_values) {
            const OptimalRisk opt = optimal_risk(p, k, config.seed);
            for (std::size_t n : sw.n_values)
                for (Method m : sw.methods)
                    report.cells.push_back(run_cell(p, n, k, m, policy, sw.reps, config.seed, options, opt));
        }

        const Method fit_method = sw.methods.front();
        std::ostringstream notes;
        if (sw.n_values.size() >= 3) {
            try {
                report.n_fit = scaling_fit(report, ScalingAxis::N, fit_method, std::nullopt, sw.k_values.front());
            } catch (const Error& e) {
                notes << "n-axis fit unavailable: " << e.what() << '\n';
            }
        }
        if (sw.k_values.size() >= 3) {
            try {
                report.k_fit = scaling_fit(report, ScalingAxis::K, fit_method, sw.n_values.back(), std::nullopt);
            } catch (const Error& e) {
                notes << "k-axis fit unavailable: " << e.what() << '\n';
            }
        }

        bool violated = false;
        std::size_t pairs = 0;
        std::size_t overlapping = 0;
        for (const auto& a : report.cells) {
            if (a.method != Method::ExactErmApprox) continue;
            for (const auto& b : report.cells) {
                if (b.method != Method::Nystrom || b.n != a.n || b.k != a.k) continue;
                ++pairs;
                if (intervals_overlap(a, b)) ++overlapping;
            }
        }
        if (pairs > 0) {
            const double frac = static_cast<double>(overlapping) / static_cast<double>(pairs);
            violated = frac < 0.8;
            notes << "exact vs nystrom: " << overlapping << "/" << pairs << " cells with overlapping 2-se intervals ("
                  << (violated ? "violated" : "satisfied") << ")\n";
        }

        const fs::path dir = prepare_output(config);
        std::ostringstream csv, summary;
        report.write_csv(csv);
        report.write_summary(summary);
        summary << "fit method: " << to_string(fit_method) << '\n' << notes.str();
        write_file(dir / "report.csv", csv.str());
        write_file(dir / "summary.txt", summary.str());
        out << summary.str();
        return violated ? kExitViolation : kExitOk;
    });
}

int cmd_spectrum(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const PointSet x = load_points(config);
        const GramMatrix K = gram_matrix(config.kernel, x);
        const Spectrum s(K);
        const double xi = effective_dimension(s);
        const int k = config.cluster.k;

        std::ostringstream csv, lm;
        csv << "index,eigenvalue\n";
        for (Eigen::Index i = 0; i < s.eigenvalues().size(); ++i)
            csv << i + 1 << ',' << format_real(s.eigenvalues()(i)) << '\n';
        lm << "mode,m\n";

        out << "n: " << K.size() << '\n' << "effective_dimension: " << format_real(xi) << '\n' << "top eigenvalues:";
        for (Eigen::Index i = 0; i < std::min<Eigen::Index>(10, s.eigenvalues().size()); ++i)
            out << ' ' << format_real(s.eigenvalues()(i));
        out << "\nlandmark_size (k=" << k << ", delta=" << format_real(config.nystrom.delta)
            << ", c_scale=" << format_real(config.nystrom.c_scale) << "):\n";
        for (LandmarkMode mode : {LandmarkMode::General, LandmarkMode::Eigendecay, LandmarkMode::LinearK}) {
            const std::size_t m = landmark_size(K.size(), k, config.nystrom.delta, xi, mode, config.nystrom.c_scale);
            out << "  " << std::left << std::setw(11) << to_string(mode) << m << '\n';
            lm << to_string(mode) << ',' << m << '\n';
        }

        const fs::path dir = prepare_output(config);
        write_file(dir / "spectrum.csv", csv.str());
        write_file(dir / "landmarks.csv", lm.str());
        return kExitOk;
    });
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Kernel k-means with Nystrom landmarks and a Rademacher/excess-risk verification lab"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;

    auto common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", config_path, "experiment config file")->required();
        sub->add_option("-o,--out", out_dir, "output directory (overrides config and " + std::string(kOutputDirEnv) + ")");
        sub->add_option("--seed", seed, "master seed override");
        sub->add_option("--threads", threads, "worker threads");
    };

    std::optional<std::string> method;
    std::optional<std::size_t> m;
    std::optional<int> k;
    auto* cluster = app.add_subcommand("cluster", "cluster a dataset (exact, approx or nystrom)");
    common(cluster);
    cluster->add_option("--method", method, "exact | approx | nystrom");
    cluster->add_option("--m", m, "fixed landmark count (implies nystrom.mode = fixed)");
    cluster->add_option("-k,--k", k, "cluster count");

    auto* embed = app.add_subcommand("nystrom-embed", "write Nystrom coordinates and residuals");
    common(embed);
    embed->add_option("--m", m, "fixed landmark count");

    std::optional<std::size_t> trials;
    auto* rad = app.add_subcommand("rad-check", "verify the Rademacher lower/upper bound constructions");
    common(rad);
    rad->add_option("--trials", trials, "Monte Carlo trials for cells too large to enumerate");

    std::optional<std::string> methods;
    std::optional<int> reps;
    auto* risk = app.add_subcommand("risk-scan", "excess-risk sweep over n, k and methods");
    common(risk);
    risk->add_option("--methods", methods, "comma-separated subset of exact,nystrom,approx");
    risk->add_option("--reps", reps, "repetitions per cell");

    auto* spectrum = app.add_subcommand("spectrum", "eigenvalues, effective dimension and landmark counts");
    common(spectrum);
    spectrum->add_option("-k,--k", k, "cluster count for the landmark table");

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    if (!argv_rev.empty()) argv_rev.pop_back();
    try {
        app.parse(argv_rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    ExperimentConfig config;
    try {
        config = load_config(config_path);
        if (seed) config.seed = *seed;
        if (threads) config.threads = *threads;
        if (const char* env = std::getenv(kOutputDirEnv); env && *env) config.output_dir = env;
        if (out_dir) config.output_dir = *out_dir;
        if (method) config.cluster.method = *method;
        if (k) config.cluster.k = *k;
        if (m) {
            config.nystrom.mode = "fixed";
            config.nystrom.m = *m;
        }
        if (trials) config.lab.trials = *trials;
        if (methods) config.sweep.methods = parse_methods(*methods);
        if (reps) config.sweep.reps = *reps;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    if (cluster->parsed()) return cmd_cluster(config, out, err);
    if (embed->parsed()) return cmd_nystrom_embed(config, out, err);
    if (rad->parsed()) return cmd_rad_check(config, out, err);
    if (risk->parsed()) return cmd_risk_scan(config, out, err);
    return cmd_spectrum(config, out, err);
}

}  // namespace kkm::cli
