// Acceptance suite: one PASS/FAIL line per criterion.
//   kkm_acceptance            run all criteria
//   kkm_acceptance 3 7        run selected criteria
// Exit status is nonzero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

#include "kkm/cli.hpp"
#include "kkm/nystrom.hpp"
#include "kkm/rademacher.hpp"
#include "kkm/risk.hpp"
#include "test_util.hpp"

using namespace kkm;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

bool nonincreasing(const std::vector<double>& c) {
    for (std::size_t t = 1; t < c.size(); ++t)
        if (c[t] > c[t - 1] + 1e-9 * std::abs(c[t - 1])) return false;
    return true;
}

Outcome lloyd_monotonicity() {
    Rng rng(101);
    int ok = 0;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t n = 2 + rng.index(199);
        const int k = 1 + static_cast<int>(rng.index(std::min<std::size_t>(8, n)));
        const PointSet x = test::random_points(n, 1 + static_cast<int>(rng.index(5)), rng);
        const KernelSpec kernel = i % 2 ? KernelSpec::linear() : KernelSpec::gaussian(0.3 + 2.0 * rng.uniform());
        const GramMatrix K = gram_matrix(kernel, x);
        ok += nonincreasing(kernel_lloyd(K, Assignment(test::random_labels(n, k, rng), k)).trace.per_iteration_cost);
    }
    return {ok == 1000, fmt("%d/1000 cost traces nonincreasing (rel tol 1e-9)", ok)};
}

Outcome erm_oracle_agreement() {
    Rng rng(202);
    int match = 0;
    double worst_beat = 0.0;
    for (int i = 0; i < 100; ++i) {
        const std::size_t n = 3 + rng.index(6);
        const int k = 1 + static_cast<int>(rng.index(3));
        const GramMatrix K = test::random_gaussian_gram(n, rng, 2, 0.4 + rng.uniform());
        const double opt = brute_force_erm(K, k).cost;
        double best = std::numeric_limits<double>::infinity();
        for (int r = 0; r < 50; ++r)
            best = std::min(best, kernel_lloyd(K, Assignment(test::random_labels(n, k, rng), k)).trace.per_iteration_cost.back());
        match += std::abs(best - opt) <= 1e-6;
        worst_beat = std::max(worst_beat, opt - best);
    }
    return {match >= 90 && worst_beat <= 1e-10,
            fmt("%d/100 within 1e-6 of brute force (need 90); max undercut %.3g (limit 1e-10)", match, worst_beat)};
}

Outcome lower_bound_verification() {
    Rng rng(303);
    bool ok = true;
    std::string detail;
    for (auto [k, n] : std::vector<std::pair<int, int>>{{2, 4}, {2, 8}, {4, 8}, {4, 16}}) {
        const LowerBoundInstance inst = lower_bound_construction(k, n);
        const RadEstimate fin = finite_class_rad(inst.data, inst.center_sets, 0, rng, true);
        const RadEstimate coord = coordinate_rad(inst.data, 10000, rng);
        const double lb = lower_bound_value(k, n);
        const double ub = coordinate_rad_bound(static_cast<std::size_t>(n));
        ok = ok && fin.exact && fin.value >= lb && coord.value <= ub + 3.0 * coord.std_error;
        detail += fmt("(%d,%d) %.4g>=%.4g, %.4g<=%.4g; ", k, n, fin.value, lb, coord.value, ub);
    }
    const LowerBoundInstance two = lower_bound_construction(2, 2);
    const double v = finite_class_rad(two.data, two.center_sets, 0, rng, true).value;
    ok = ok && std::abs(v - 2.0) <= 1e-12;
    return {ok, detail + fmt("(2,2) exact %.15g", v)};
}

Outcome khintchine_cells() {
    Rng rng(404);
    int ok = 0;
    for (int b = 1; b <= 20; ++b) {
        const KhintchineResult r = khintchine_check(b, 0, rng);
        ok += r.exact && r.lhs >= std::sqrt(b / 8.0);
    }
    const double four = khintchine_check(4, 0, rng).lhs;
    return {ok == 20 && four == 0.75, fmt("%d/20 blocks satisfy lhs >= sqrt(block/8); block 4 lhs = %.17g", ok, four)};
}

double grid_sup(const FeatureVectors& x, const std::vector<int>& sigma) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(x.cols());
    for (Eigen::Index j = 0; j < x.rows(); ++j) v += sigma[j] * x.row(j).transpose();
    Eigen::VectorXd a = v.norm() > 1e-12 ? Eigen::VectorXd(v.normalized()) : Eigen::VectorXd::Unit(x.cols(), 0);
    Eigen::VectorXd b = Eigen::VectorXd::Unit(x.cols(), std::abs(a(1)) < 0.9 ? 1 : 2);
    b = (b - b.dot(a) * a).normalized();
    double best = -std::numeric_limits<double>::infinity();
    for (int r = 0; r <= 400; ++r)
        for (int t = 0; t < 360; ++t) {
            const double theta = 2.0 * std::numbers::pi * t / 360.0;
            const Eigen::VectorXd c = (r / 400.0) * (std::cos(theta) * a + std::sin(theta) * b);
            double value = 0.0;
            for (Eigen::Index j = 0; j < x.rows(); ++j) value += sigma[j] * (x.row(j).transpose() - c).squaredNorm();
            best = std::max(best, value);
        }
    return best;
}

Outcome closed_form_supremum() {
    Rng rng(505);
    int ok = 0;
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const int n = 1 + static_cast<int>(rng.index(6));
        FeatureVectors x(n, 3);
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < 3; ++c) x(r, c) = rng.normal();
            x.row(r) *= rng.uniform() / x.row(r).norm();
        }
        std::vector<int> sigma(static_cast<std::size_t>(n));
        for (int& s : sigma) s = rng.sign();
        const double diff = std::abs(coordinate_sup(x, sigma) - grid_sup(x, sigma));
        worst = std::max(worst, diff);
        ok += diff <= 1e-3;
    }
    return {ok == 1000, fmt("%d/1000 pairs within 1e-3 of grid search; max diff %.3g", ok, worst)};
}

Outcome nystrom_consistency() {
    Rng rng(606);
    int ok = 0;
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const std::size_t n = 5 + rng.index(60);
        const int k = 1 + static_cast<int>(rng.index(std::min<std::size_t>(6, n)));
        const GramMatrix K = test::random_gaussian_gram(n, rng, 2, 0.3 + rng.uniform());
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), std::size_t{0});
        const EmbeddedDataset e = nystrom_embed(K, LandmarkSet(all, n));
        const Assignment init(test::random_labels(n, k, rng), k);
        const double diff = std::abs(nystrom_kkmeans(e, init).cost_in_h - kernel_lloyd(K, init).trace.per_iteration_cost.back());
        worst = std::max(worst, diff);
        ok += diff <= 1e-8;
    }
    return {ok == 100, fmt("%d/100 instances agree within 1e-8; max diff %.3g", ok, worst)};
}

cli::ExperimentConfig sweep_config() {
    cli::ExperimentConfig c;
    c.seed = 20240611;
    c.sweep.n_values = {64, 128, 256};
    c.sweep.k_values = {2, 4};
    c.sweep.reps = 50;
    c.sweep.m_policy = "general";
    c.nystrom.c_scale = 1.0;
    c.nystrom.delta = 0.1;
    return c;
}

Outcome exact_vs_nystrom() {
    const DistributionSpec p = standard_benchmark();
    LandmarkPolicy policy;
    policy.kind = LandmarkPolicy::Kind::General;
    policy.c_scale = 1.0;
    policy.delta = 0.1;
    int cells = 0, overlap = 0;
    std::string detail;
    for (int k : {2, 4}) {
        const OptimalRisk opt = optimal_risk(p, k);
        for (std::size_t n : {64, 128, 256}) {
            const CellRecord ex = run_cell(p, n, k, Method::ExactErmApprox, policy, 50, 20240611, {}, opt);
            const CellRecord ny = run_cell(p, n, k, Method::Nystrom, policy, 50, 20240611, {}, opt);
            ++cells;
            overlap += intervals_overlap(ex, ny);
            detail += fmt("k%d n%zu m%.0f%s ", k, n, ny.m_used, intervals_overlap(ex, ny) ? "" : "(no)");
        }
    }
    return {overlap * 5 >= cells * 4, fmt("%d/%d cells overlap at 2 se (need 80%%); ", overlap, cells) + detail};
}

Outcome scaling_exponents() {
    RiskReport syn_n, syn_k;
    for (std::size_t n : {64, 128, 256, 512}) {
        CellRecord c;
        c.n = n;
        c.k = 2;
        c.mean_excess_risk = 0.7 / std::sqrt(static_cast<double>(n));
        syn_n.cells.push_back(c);
    }
    for (int k : {2, 4, 8, 16}) {
        CellRecord c;
        c.n = 256;
        c.k = k;
        c.mean_excess_risk = 0.05 * std::sqrt(static_cast<double>(k));
        syn_k.cells.push_back(c);
    }
    const double en = scaling_fit(syn_n, ScalingAxis::N).exponent;
    const double ek = scaling_fit(syn_k, ScalingAxis::K).exponent;
    const bool synthetic_ok = std::abs(en + 0.5) <= 1e-12 && std::abs(ek - 0.5) <= 1e-12;

    const DistributionSpec p = standard_benchmark();
    const OptimalRisk opt = optimal_risk(p, 2);
    RiskReport real;
    for (std::size_t n : {64, 128, 256, 512})
        real.cells.push_back(run_cell(p, n, 2, Method::ExactErmApprox, {}, 50, 20240611, {}, opt));
    const ScalingFit fit = scaling_fit(real, ScalingAxis::N);
    const bool real_ok = fit.exponent >= -0.7 && fit.exponent <= -0.3;
    return {synthetic_ok && real_ok,
            fmt("benchmark exponent %.4g +/- %.2g (band [-0.7,-0.3]); synthetic %.15g and %.15g", fit.exponent,
                fit.half_width, en, ek)};
}

Outcome effective_dimension_check() {
    bool ok = true;
    for (int n : {2, 10, 100}) ok = ok && effective_dimension(GramMatrix(Matrix::Identity(n, n))) == n / 2.0;
    Vector lambda(1000);
    long double direct = 0.0L;
    for (int i = 1; i <= 1000; ++i) {
        lambda(i - 1) = 1.0 / (static_cast<double>(i) * i);
        direct += 1.0L / (static_cast<long double>(i) * i + 1.0L);
    }
    const double xi = effective_dimension(Spectrum(lambda));
    const double bound = eigendecay_xi_bound(1.0, 2.0, 1);
    ok = ok && xi <= bound && bound == 2.0 && std::abs(xi - static_cast<double>(direct)) <= 1e-3;
    return {ok, fmt("identity n/2 exact; power-law Xi = %.7f (direct sum %.7f) <= bound %.3g", xi,
                    static_cast<double>(direct), bound)};
}

Outcome beta_study() {
    Rng rng(1010);
    const BetaSummary s = beta_ratio_study(standard_benchmark(), 200, rng);
    return {s.ratios.size() == 200 && s.min >= 1.0 - 1e-10 && s.p95 <= 1.2,
            fmt("200 instances: min %.6g, mean %.6g, p95 %.6g, max %.6g", s.min, s.mean, s.p95, s.max)};
}

Outcome min_lipschitz_check() {
    Rng rng(1111);
    int ok = 0;
    for (int t = 0; t < 100000; ++t) {
        std::vector<double> a(1 + rng.index(10)), b(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = rng.normal();
            b[i] = rng.normal();
        }
        ok += min_lipschitz(a, b).holds();
    }
    return {ok == 100000, fmt("%d/100000 pairs satisfy |min a - min b| <= |a - b|_inf", ok)};
}

Outcome determinism() {
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "kkm_acceptance_determinism";
    fs::remove_all(root);
    std::string files[2];
    for (int i = 0; i < 2; ++i) {
        cli::ExperimentConfig c = sweep_config();
        c.output_dir = root / std::to_string(i);
        std::ostringstream out, err;
        cli::cmd_risk_scan(c, out, err);
        std::ifstream in(c.output_dir / "report.csv", std::ios::binary);
        std::stringstream s;
        s << in.rdbuf();
        files[i] = s.str();
    }
    fs::remove_all(root);
    const bool ok = !files[0].empty() && files[0] == files[1];
    return {ok, fmt("two risk-scan runs: %zu bytes vs %zu bytes, %s", files[0].size(), files[1].size(),
                    files[0] == files[1] ? "identical" : "different")};
}

}  // namespace

int main(int argc, char** argv) {
    const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria{
        {1, {"Lloyd monotonicity", lloyd_monotonicity}},
        {2, {"ERM oracle agreement", erm_oracle_agreement}},
        {3, {"lower-bound construction", lower_bound_verification}},
        {4, {"Khintchine cells", khintchine_cells}},
        {5, {"closed-form supremum", closed_form_supremum}},
        {6, {"Nystrom consistency", nystrom_consistency}},
        {7, {"exact vs Nystrom excess risk", exact_vs_nystrom}},
        {8, {"scaling exponents", scaling_exponents}},
        {9, {"effective dimension", effective_dimension_check}},
        {10, {"beta-ratio study", beta_study}},
        {11, {"min is 1-Lipschitz in sup norm", min_lipschitz_check}},
        {12, {"risk-scan determinism", determinism}},
    };
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(std::stoi(argv[i]));
    if (selected.empty())
        for (const auto& [id, _] : criteria) selected.push_back(id);

    int failed = 0;
    for (int id : selected) {
        const auto it = criteria.find(id);
        if (it == criteria.end()) {
            std::printf("FAIL [%d] unknown criterion\n", id);
            ++failed;
            continue;
        }
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = it->second.second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s [%d] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, it->second.first, o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed ? 1 : 0;
}
