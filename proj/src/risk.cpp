#include "kkm/risk.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iostream>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>

#include "kkm/csv.hpp"
#include "kkm/seeding.hpp"
#include "kkm/stats.hpp"

namespace kkm {

namespace {

constexpr double kWeightSumTol = 1e-12;
constexpr int kSurrogateRuns = 200;
constexpr std::uint64_t kDataStream = 0xda7a;

// The n draws of a rep collapsed onto the distinct atoms they hit. Running a
// method on (present atoms, count / n) is the same problem as running it on
// the n sampled points: duplicates always share a cluster and a weight-c atom
// contributes exactly like c copies.
struct CompressedSample {
    std::vector<std::size_t> draws;    // atom index per draw
    std::vector<std::size_t> present;  // distinct atoms, ascending
    std::vector<std::size_t> position; // atom -> index in present (or npos)
    std::vector<double> counts;
    std::vector<double> weights;
};

CompressedSample compress(const DistributionSpec& p, std::vector<std::size_t> draws) {
    CompressedSample s;
    s.draws = std::move(draws);
    std::vector<double> counts(p.size(), 0.0);
    for (std::size_t a : s.draws) counts[a] += 1.0;
    s.position.assign(p.size(), static_cast<std::size_t>(-1));
    for (std::size_t a = 0; a < p.size(); ++a) {
        if (counts[a] == 0.0) continue;
        s.position[a] = s.present.size();
        s.present.push_back(a);
        s.counts.push_back(counts[a]);
        s.weights.push_back(counts[a] / static_cast<double>(s.draws.size()));
    }
    return s;
}

// Effective dimension of the n x n sample Gram matrix. With C the count
// matrix its nonzero spectrum equals that of C^1/2 K_present C^1/2.
double sample_effective_dimension(const GramMatrix& kc, const std::vector<double>& counts) {
    const auto m = static_cast<Eigen::Index>(counts.size());
    Matrix scaled(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = i; j < m; ++j) {
            const double v = std::sqrt(counts[i] * counts[j]) * kc(i, j);
            scaled(i, j) = v;
            scaled(j, i) = v;
        }
    return effective_dimension(GramMatrix(std::move(scaled)));
}

std::size_t landmark_count(const LandmarkPolicy& policy, std::size_t n, int k, const GramMatrix& kc,
                           const std::vector<double>& counts) {
    switch (policy.kind) {
        case LandmarkPolicy::Kind::Fixed:
            return std::clamp<std::size_t>(policy.fixed_m, 1, n);
        case LandmarkPolicy::Kind::General:
            return landmark_size(n, k, policy.delta, sample_effective_dimension(kc, counts), LandmarkMode::General,
                                 policy.c_scale);
        case LandmarkPolicy::Kind::Eigendecay:
            return landmark_size(n, k, policy.delta, std::nullopt, LandmarkMode::Eigendecay, policy.c_scale);
    }
    return n;
}

std::uint64_t cell_key(std::uint64_t master, std::size_t n, int k) {
    return derive_seed(master, n, static_cast<std::uint64_t>(k));
}

}  // namespace

DistributionSpec::DistributionSpec(PointSet atoms, std::vector<double> weights, KernelSpec kernel,
                                   std::uint64_t generator_seed)
    : atoms_(std::move(atoms)),
      weights_(std::move(weights)),
      kernel_(kernel),
      seed_(generator_seed),
      gram_([&] {
          if (atoms_.rows() == 0) throw Error(ErrorCode::InvalidArgument, "distribution needs at least one atom");
          KernelSpec checked = kernel_;
          checked.normalized = true;
          return gram_matrix(checked, atoms_);
      }()) {
    if (weights_.size() != static_cast<std::size_t>(atoms_.rows()))
        throw Error(ErrorCode::InvalidArgument, "one weight per atom is required");
    double total = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0)) throw Error(ErrorCode::InvalidArgument, "weights must be nonnegative");
        total += w;
    }
    if (std::abs(total - 1.0) > kWeightSumTol) throw Error(ErrorCode::InvalidArgument, "weights must sum to 1");
}

std::vector<std::size_t> DistributionSpec::sample(std::size_t n, Rng& rng) const {
    std::vector<std::size_t> out(n);
    for (auto& a : out) a = rng.categorical(weights_);
    return out;
}

DistributionSpec standard_benchmark(const BenchmarkParams& params) {
    if (params.clouds < 1 || params.atoms_per_cloud < 1 || params.dim < 1)
        throw Error(ErrorCode::InvalidArgument, "benchmark needs positive cloud, atom and dimension counts");
    Rng rng(params.seed);
    const int n = params.clouds * params.atoms_per_cloud;
    PointSet atoms(n, params.dim);
    for (int c = 0; c < params.clouds; ++c) {
        Vector center(params.dim);
        for (auto& v : center) v = rng.normal();
        center.normalize();
        for (int a = 0; a < params.atoms_per_cloud; ++a) {
            Vector x = center;
            for (auto& v : x) v += params.spread * rng.normal();
            atoms.row(c * params.atoms_per_cloud + a) = x.normalized().transpose();
        }
    }
    std::vector<double> weights(static_cast<std::size_t>(n), 1.0 / n);
    return DistributionSpec(std::move(atoms), std::move(weights), KernelSpec::gaussian(params.bandwidth), params.seed);
}

double population_risk(const DistributionSpec& p, const Matrix& coeffs) {
    const auto n = static_cast<Eigen::Index>(p.size());
    if (coeffs.cols() != n) throw Error(ErrorCode::CoefficientDimensionMismatch, "one coefficient per atom is required");
    if (coeffs.rows() < 1) throw Error(ErrorCode::InvalidArgument, "at least one center is required");
    const Matrix& K = p.gram().entries();
    const Matrix cross = K * coeffs.transpose();  // n x k: <Phi_a, c_j>
    double risk = 0.0;
    Vector self(coeffs.rows());
    for (Eigen::Index j = 0; j < coeffs.rows(); ++j) self(j) = coeffs.row(j).dot(cross.col(j));
    for (Eigen::Index a = 0; a < n; ++a) {
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < coeffs.rows(); ++j)
            best = std::min(best, std::max(0.0, K(a, a) - 2.0 * cross(a, j) + self(j)));
        risk += p.weights()[a] * best;
    }
    return risk;
}

OptimalRisk optimal_risk(const DistributionSpec& p, int k, std::uint64_t seed) {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
    std::vector<std::size_t> support;
    std::vector<double> w;
    for (std::size_t a = 0; a < p.size(); ++a) {
        if (p.weights()[a] > 0.0) {
            support.push_back(a);
            w.push_back(p.weights()[a]);
        }
    }
    if (static_cast<std::size_t>(k) >= support.size()) return {0.0, false};
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& v : w) v /= total;
    const GramMatrix K = p.gram().submatrix(support);

    if (support.size() <= 12 && k <= 4) return {brute_force_erm(K, k, w).cost, false};

    double best = std::numeric_limits<double>::infinity();
    for (int run = 0; run < kSurrogateRuns; ++run) {
        Rng rng(derive_seed(seed, 0x0b7, static_cast<std::uint64_t>(run)));
        best = std::min(best, approximate_erm(K, k, default_search_rounds(k), true, rng, w).cost);
    }
    return {best, true};
}

std::string to_string(Method m) {
    switch (m) {
        case Method::ExactErmApprox: return "exact_erm_approx";
        case Method::Nystrom: return "nystrom";
        case Method::ApproxErm: return "approx_erm";
    }
    return "unknown";
}

Method parse_method(const std::string& name) {
    if (name == "exact_erm_approx" || name == "exact") return Method::ExactErmApprox;
    if (name == "nystrom") return Method::Nystrom;
    if (name == "approx_erm" || name == "approx") return Method::ApproxErm;
    throw Error(ErrorCode::Config, "unknown method '" + name + "'");
}

std::string to_string(LandmarkPolicy::Kind kind) {
    switch (kind) {
        case LandmarkPolicy::Kind::Fixed: return "fixed";
        case LandmarkPolicy::Kind::General: return "general";
        case LandmarkPolicy::Kind::Eigendecay: return "eigendecay";
    }
    return "unknown";
}

LandmarkPolicy::Kind parse_policy_kind(const std::string& name) {
    if (name == "fixed") return LandmarkPolicy::Kind::Fixed;
    if (name == "general") return LandmarkPolicy::Kind::General;
    if (name == "eigendecay") return LandmarkPolicy::Kind::Eigendecay;
    throw Error(ErrorCode::Config, "unknown landmark policy '" + name + "'");
}

RepOutcome run_rep(const DistributionSpec& p, std::size_t n, int k, Method method, const LandmarkPolicy& policy,
                   std::uint64_t data_seed, std::uint64_t fit_seed, const CellOptions& options) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "sample size must be >= 1");
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
    Rng data_rng(data_seed);
    Rng rng(fit_seed);
    const CompressedSample s = compress(p, p.sample(n, data_rng));
    const GramMatrix kc = p.gram().submatrix(s.present);
    const int k_eff = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(k), s.present.size()));
    const int rounds = options.search_rounds >= 0 ? options.search_rounds : default_search_rounds(k_eff);
    const auto atoms = static_cast<Eigen::Index>(p.size());

    RepOutcome out;
    Matrix coeffs = Matrix::Zero(k_eff, atoms);

    if (method == Method::Nystrom) {
        const std::size_t m = landmark_count(policy, n, k, kc, s.counts);
        out.m_used = m;
        const LandmarkSet slots = sample_landmarks_uniform(n, m, rng);
        std::vector<std::size_t> positions;
        for (std::size_t slot : slots.indices()) positions.push_back(s.position[s.draws[slot]]);
        std::sort(positions.begin(), positions.end());
        positions.erase(std::unique(positions.begin(), positions.end()), positions.end());
        const LandmarkSet landmarks(positions, s.present.size());
        const EmbeddedDataset e = nystrom_embed(kc, landmarks);

        NystromOptions nopt;
        nopt.lloyd = options.lloyd;
        std::optional<NystromResult> best;
        for (int r = 0; r < std::max(1, options.restarts); ++r) {
            NystromResult res = nystrom_kkmeans(e, k_eff, rng, nopt, s.weights);
            if (!best || res.cost_in_h < best->cost_in_h) best = std::move(res);
        }
        out.empirical_risk = best->cost_in_h;
        const Matrix land = center_landmark_coefficients(e, best->centers);
        for (Eigen::Index j = 0; j < land.rows(); ++j)
            for (std::size_t l = 0; l < positions.size(); ++l)
                coeffs(j, static_cast<Eigen::Index>(s.present[positions[l]])) += land(j, static_cast<Eigen::Index>(l));
    } else {
        const bool exact = method == Method::ExactErmApprox;
        const int restarts = exact ? std::max(1, options.restarts) : 1;
        std::optional<ApproximateErmResult> best;
        for (int r = 0; r < restarts; ++r) {
            ApproximateErmResult res = approximate_erm(kc, k_eff, rounds, exact, rng, s.weights, options.lloyd);
            if (!best || res.cost < best->cost) best = std::move(res);
        }
        out.empirical_risk = best->cost;
        Vector mass = Vector::Zero(k_eff);
        for (std::size_t t = 0; t < s.present.size(); ++t) mass(best->assignment.label(t)) += s.weights[t];
        for (std::size_t t = 0; t < s.present.size(); ++t) {
            const int j = best->assignment.label(t);
            coeffs(j, static_cast<Eigen::Index>(s.present[t])) += s.weights[t] / mass(j);
        }
    }
    out.population_risk = population_risk(p, coeffs);
    return out;
}

CellRecord run_cell(const DistributionSpec& p, std::size_t n, int k, Method method, const LandmarkPolicy& policy,
                    int reps, std::uint64_t master_seed, const CellOptions& options,
                    std::optional<OptimalRisk> optimal) {
    if (reps < 1) throw Error(ErrorCode::InvalidArgument, "reps must be >= 1");
    const OptimalRisk opt = optimal ? *optimal : optimal_risk(p, k, master_seed);
    const std::uint64_t key = cell_key(master_seed, n, k);

    std::vector<RepOutcome> outcomes(static_cast<std::size_t>(reps));
    const int threads = std::clamp(options.threads, 1, reps);
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    auto work = [&](int worker) {
        try {
            for (int r = worker; r < reps; r += threads) {
                outcomes[r] = run_rep(p, n, k, method, policy, derive_seed(key, kDataStream, r),
                                      derive_seed(key, 1 + static_cast<std::uint64_t>(method), r), options);
            }
        } catch (...) {
            errors[worker] = std::current_exception();
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    RunningMoments pop;
    double emp = 0.0;
    double gap = 0.0;
    double m = 0.0;
    for (const auto& o : outcomes) {
        pop.add(o.population_risk);
        emp += o.empirical_risk;
        gap += o.population_risk - o.empirical_risk;
        m += static_cast<double>(o.m_used);
    }
    CellRecord c;
    c.n = n;
    c.k = k;
    c.method = method;
    c.reps = reps;
    c.m_used = m / reps;
    c.mean_empirical_risk = emp / reps;
    c.mean_population_risk = pop.mean();
    c.optimal_risk = opt.value;
    c.optimal_is_surrogate = opt.surrogate;
    c.mean_excess_risk = pop.mean() - opt.value;
    c.std_error = pop.std_error();
    c.mean_generalization_gap = gap / reps;
    return c;
}

void RiskReport::write_csv(std::ostream& out) const {
    out << "n,k,method,m_used,reps,mean_empirical_risk,mean_population_risk,optimal_risk,optimal_is_surrogate,"
           "mean_excess_risk,std_error,mean_generalization_gap\n";
    for (const auto& c : cells) {
        out << csv_row({std::to_string(c.n), std::to_string(c.k), to_string(c.method), format_real(c.m_used),
                        std::to_string(c.reps), format_real(c.mean_empirical_risk),
                        format_real(c.mean_population_risk), format_real(c.optimal_risk),
                        c.optimal_is_surrogate ? "1" : "0", format_real(c.mean_excess_risk),
                        format_real(c.std_error), format_real(c.mean_generalization_gap)})
            << '\n';
    }
}

void RiskReport::write_summary(std::ostream& out) const {
    out << "cells: " << cells.size() << '\n';
    if (n_fit)
        out << "excess risk ~ n^a: a = " << format_real(n_fit->exponent) << " +/- " << format_real(n_fit->half_width)
            << " (" << n_fit->cells_used << " cells)\n";
    if (k_fit)
        out << "excess risk ~ k^b: b = " << format_real(k_fit->exponent) << " +/- " << format_real(k_fit->half_width)
            << " (" << k_fit->cells_used << " cells)\n";
}

ScalingFit scaling_fit(const RiskReport& report, ScalingAxis axis, std::optional<Method> method,
                       std::optional<std::size_t> fixed_n, std::optional<int> fixed_k) {
    std::vector<double> xs;
    std::vector<double> ys;
    ScalingFit fit;
    for (const auto& c : report.cells) {
        if (method && c.method != *method) continue;
        if (fixed_n && c.n != *fixed_n) continue;
        if (fixed_k && c.k != *fixed_k) continue;
        if (!(c.mean_excess_risk > 0.0)) {
            std::cerr << "warning: scaling fit skips cell n=" << c.n << " k=" << c.k << " method=" << to_string(c.method)
                      << " with excess risk " << format_real(c.mean_excess_risk) << '\n';
            ++fit.cells_excluded;
            continue;
        }
        xs.push_back(std::log(axis == ScalingAxis::N ? static_cast<double>(c.n) : static_cast<double>(c.k)));
        ys.push_back(std::log(c.mean_excess_risk));
    }
    if (xs.size() < 3) throw Error(ErrorCode::NonPositiveRisk, "scaling fit needs at least 3 cells with positive excess risk");

    const double m = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / m;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / m;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) throw Error(ErrorCode::InvalidArgument, "scaling fit needs distinct axis values");
    fit.exponent = sxy / sxx;
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - my - fit.exponent * (xs[i] - mx);
        rss += r * r;
    }
    fit.half_width = 2.0 * std::sqrt(rss / (m - 2.0) / sxx);
    fit.cells_used = xs.size();
    return fit;
}

bool intervals_overlap(const CellRecord& a, const CellRecord& b) {
    const double lo = std::max(a.mean_excess_risk - 2.0 * a.std_error, b.mean_excess_risk - 2.0 * b.std_error);
    const double hi = std::min(a.mean_excess_risk + 2.0 * a.std_error, b.mean_excess_risk + 2.0 * b.std_error);
    return lo <= hi;
}

namespace {

std::vector<double> ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) r[order[t]] = avg;
        i = j + 1;
    }
    return r;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::InvalidArgument, "spearman needs two equal series");
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    const double m = static_cast<double>(rx.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / m;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / m;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

BetaSummary beta_ratio_study(const DistributionSpec& p, int instances, Rng& rng, const BetaStudyOptions& options) {
    if (instances < 1) throw Error(ErrorCode::InvalidArgument, "instances must be >= 1");
    if (options.n_max > 8 || options.k_max > 3 || options.n_min > options.n_max || options.k_min < 1 ||
        options.k_min > options.k_max || static_cast<std::size_t>(options.k_max) > options.n_min)
        throw Error(ErrorCode::InstanceTooLarge, "beta study instances are limited to k <= n <= 8, k <= 3");

    BetaSummary s;
    for (int t = 0; t < instances; ++t) {
        const std::size_t n = options.n_min + rng.index(options.n_max - options.n_min + 1);
        const int k = options.k_min + static_cast<int>(rng.index(static_cast<std::size_t>(options.k_max - options.k_min + 1)));
        const GramMatrix K = p.gram().submatrix(p.sample(n, rng));
        const int rounds = options.rounds >= 0 ? options.rounds : default_search_rounds(k);
        const double approx = approximate_erm(K, k, rounds, options.lloyd_refine, rng).cost;
        const double opt = brute_force_erm(K, k).cost;
        double ratio;
        if (opt > 1e-12) {
            ratio = approx / opt;
        } else {
            ratio = approx <= 1e-12 ? 1.0 : std::numeric_limits<double>::infinity();
        }
        s.ratios.push_back(ratio);
    }
    std::vector<double> sorted = s.ratios;
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(sorted.size())));
    s.p95 = sorted[std::max<std::size_t>(rank, 1) - 1];
    return s;
}

}  // namespace kkm
