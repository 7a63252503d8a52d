// isopurity: phase-diagram evaluation, Haar-state sampling, Coulomb-gas MCMC,
// and density comparisons, with reproducible file outputs and run manifests.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "isopurity/isopurity.hpp"
#include "tool_io.hpp"

namespace fs = std::filesystem;
using namespace isopurity;
using tool::fmt_double;
using tool::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

json kstats_json(const stats::SampleSummary& summary) {
    json ks = json::object();
    for (const auto& [order, stat] : summary.k_stats) {
        json entry;
        entry["estimate"] = stat.estimate;
        entry["std_error"] = stat.std_error;
        ks[std::to_string(order)] = entry;
    }
    json out;
    out["count"] = summary.count;
    out["mean"] = summary.mean;
    out["k_stats"] = ks;
    if (summary.order5_high_variance) out["order5_high_variance"] = true;
    return out;
}

// ---------------------------------------------------------------- theory ---

struct TheoryArgs {
    double beta = 0.0;
    std::string mu = "0";
    std::string quantities = "a,c,r";
    std::optional<double> lambda;
    std::string out;
    bool allow_below_critical = false;
};

int cmd_theory(const TheoryArgs& args) {
    const Rational mu = tool::parse_rational(args.mu);
    if (mu != Rational(0)) {
        std::fprintf(stderr, "error: analytic phase-diagram quantities are defined for mu=0\n");
        return kExitUsage;
    }
    if (!args.allow_below_critical && args.beta < theory::kBetaMinus) {
        std::fprintf(stderr, "error: beta below beta_minus=-2/27\n");
        return kExitUsage;
    }

    static const std::set<std::string> known{"a",     "b",          "c",
                                             "density", "r",        "G",
                                             "s_rel", "reported_F", "reported_S"};
    std::set<std::string> wanted;
    std::istringstream qs(args.quantities);
    std::string q;
    while (std::getline(qs, q, ',')) {
        if (!known.count(q)) {
            std::fprintf(stderr, "error: unknown quantity '%s'\n", q.c_str());
            return kExitUsage;
        }
        wanted.insert(q);
    }

    json out;
    out["beta"] = args.beta;
    const auto params = theory::support_params(args.beta);
    if (wanted.count("a")) out["a"] = params.a;
    if (wanted.count("c")) out["c"] = params.c;
    if (wanted.count("b")) {
        if (params.b)
            out["b"] = *params.b;
        else
            out["b"] = nullptr;  // undefined at beta=0
    }
    if (wanted.count("density")) {
        if (!args.lambda) {
            std::fprintf(stderr, "error: quantity 'density' requires --lambda\n");
            return kExitUsage;
        }
        out["density"] = theory::density(params, *args.lambda);
        out["lambda"] = *args.lambda;
    }
    if (wanted.count("r")) out["r"] = theory::mean_purity_coeff(args.beta);
    if (wanted.count("G")) out["G"] = theory::log_mgf(args.beta);
    if (wanted.count("s_rel")) out["s_rel"] = theory::entropy_rel(args.beta);
    if (wanted.count("reported_F")) out["reported_F"] = theory::reported_free_energy(args.beta);
    if (wanted.count("reported_S")) out["reported_S"] = theory::reported_entropy(args.beta);

    const std::string text = out.dump(2) + "\n";
    if (args.out.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        json params_json{{"beta", args.beta},       {"mu", args.mu},
                         {"quantity", args.quantities}, {"out", args.out},
                         {"allow_below_critical", args.allow_below_critical}};
        if (args.lambda) params_json["lambda"] = *args.lambda;
        tool::Manifest manifest("theory", params_json);
        manifest.record(args.out, text);
        manifest.write(args.out + ".manifest.json");
    }
    return 0;
}

// ----------------------------------------------------------------- sweep ---

struct SweepArgs {
    double beta_min = 0.0;
    double beta_max = 0.0;
    int steps = 0;
    std::string mu = "0";
    std::string out;
};

int cmd_sweep(const SweepArgs& args) {
    if (tool::parse_rational(args.mu) != Rational(0)) {
        std::fprintf(stderr, "error: analytic phase-diagram sweep is defined for mu=0\n");
        return kExitUsage;
    }
    if (args.steps < 1) {
        std::fprintf(stderr, "error: --steps must be >= 1\n");
        return kExitUsage;
    }
    if (args.beta_min < theory::kBetaMinus) {
        std::fprintf(stderr, "error: beta below beta_minus=-2/27\n");
        return kExitUsage;
    }
    if (args.beta_max < args.beta_min) {
        std::fprintf(stderr, "error: --beta-max must be >= --beta-min\n");
        return kExitUsage;
    }

    std::vector<double> grid;
    grid.reserve(args.steps);
    if (args.steps == 1) {
        grid.push_back(args.beta_min);
    } else {
        for (int k = 0; k < args.steps; ++k)
            grid.push_back(args.beta_min +
                           (args.beta_max - args.beta_min) * k / (args.steps - 1));
    }

    const auto rows = theory::sweep(grid);
    std::string csv = "beta,phase,a,b_or_c,r,G,s_rel\n";
    for (const auto& row : rows) {
        if (!row.ok) {
            std::fprintf(stderr, "warning: beta=%s skipped: %s\n", fmt_double(row.beta).c_str(),
                         row.error.c_str());
            continue;
        }
        csv += fmt_double(row.beta) + "," + theory::phase_name(row.phase) + "," +
               fmt_double(row.a) + "," + fmt_double(row.b_or_c) + "," + fmt_double(row.r) + "," +
               fmt_double(row.big_g) + "," + fmt_double(row.s_rel) + "\n";
    }

    tool::Manifest manifest("sweep", json{{"beta_min", args.beta_min},
                                          {"beta_max", args.beta_max},
                                          {"steps", args.steps},
                                          {"mu", args.mu},
                                          {"out", args.out}});
    manifest.record(args.out, csv);
    manifest.write(args.out + ".manifest.json");
    return 0;
}

// ------------------------------------------------------------------ haar ---

struct HaarArgs {
    int n = 0;
    int m = 0;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    unsigned chains = 1;
    std::string emit = "purity";
    std::string out_dir;
};

int cmd_haar(const HaarArgs& args) {
    const BipartitionDims dims(args.n, args.m);
    const bool keep_spectra = args.emit != "purity";

    const auto batch = haar::sample_batch(dims, args.samples, args.seed, args.chains, keep_spectra,
                                          /*summary_order=*/4);

    fs::create_directories(args.out_dir);
    const fs::path dir(args.out_dir);

    tool::Manifest manifest("haar", json{{"n", args.n},
                                         {"m", args.m},
                                         {"samples", args.samples},
                                         {"seed", args.seed},
                                         {"chains", args.chains},
                                         {"emit", args.emit},
                                         {"out_dir", args.out_dir}});

    std::string purity_csv = "sample_id,purity\n";
    for (std::size_t i = 0; i < batch.records.size(); ++i)
        purity_csv += std::to_string(i) + "," + fmt_double(batch.records[i].purity) + "\n";
    manifest.record(dir / "purity.csv", purity_csv);

    if (keep_spectra) {
        std::string spectra_csv = "sample_id,index,value\n";
        for (std::size_t i = 0; i < batch.spectra.size(); ++i)
            for (std::size_t k = 0; k < batch.spectra[i].size(); ++k)
                spectra_csv += std::to_string(i) + "," + std::to_string(k) + "," +
                               fmt_double(batch.spectra[i][k]) + "\n";
        manifest.record(dir / "spectra.csv", spectra_csv);
    }

    manifest.record(dir / "summary.json", kstats_json(batch.summary).dump(2) + "\n");
    manifest.write(dir / "manifest.json");
    return 0;
}

// ------------------------------------------------------------------ mcmc ---

struct McmcArgs {
    int n = 0;
    double beta = 0.0;
    std::string mu = "0";
    std::uint64_t sweeps = 0;
    std::uint64_t burn_in = 1000;
    std::uint64_t thin = 1;
    std::uint64_t seed = 0;
    unsigned chains = 1;
    std::string init = "uniform-jitter";
    std::string out_dir;
};

int cmd_mcmc(const McmcArgs& args) {
    const Rational mu = tool::parse_rational(args.mu);
    if (args.beta < 0.0)
        std::fprintf(stderr, "warning: beta<0: metastable branch; evaporation monitored\n");
    const auto mode =
        args.init == "haar-draw" ? coulomb::InitMode::HaarDraw : coulomb::InitMode::UniformJitter;

    coulomb::RunOptions opts;
    opts.sweeps = args.sweeps;
    opts.burn_in = args.burn_in;
    opts.thin = args.thin;
    opts.record = coulomb::Record::Both;

    std::vector<coulomb::ChainOutput> outputs(args.chains);
    const auto run_chain = [&](unsigned k) {
        auto chain = coulomb::init_chain(args.n, args.beta, mu, args.seed, mode, k);
        outputs[k] = coulomb::run(chain, opts);
    };
    const unsigned workers = std::min(args.chains, haar::worker_cap());
    if (workers <= 1) {
        for (unsigned k = 0; k < args.chains; ++k) run_chain(k);
    } else {
        std::atomic<unsigned> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (unsigned k = next.fetch_add(1); k < args.chains; k = next.fetch_add(1))
                    run_chain(k);
            });
        for (auto& t : pool) t.join();
    }

    fs::create_directories(args.out_dir);
    const fs::path dir(args.out_dir);
    tool::Manifest manifest("mcmc", json{{"n", args.n},
                                         {"beta", args.beta},
                                         {"mu", args.mu},
                                         {"sweeps", args.sweeps},
                                         {"burn_in", args.burn_in},
                                         {"thin", args.thin},
                                         {"seed", args.seed},
                                         {"chains", args.chains},
                                         {"init", args.init},
                                         {"out_dir", args.out_dir}});

    json chain_diags = json::array();
    std::vector<double> pooled_purity;
    double max_tau = 0.5;
    std::string spectra_csv = "sample_id,index,value\n";
    std::size_t sample_id = 0;

    for (unsigned k = 0; k < args.chains; ++k) {
        const auto& out = outputs[k];
        std::string chain_csv = "sweep,purity\n";
        for (std::size_t i = 0; i < out.purity_series.size(); ++i) {
            const std::uint64_t sweep = args.burn_in + i * args.thin;
            chain_csv += std::to_string(sweep) + "," + fmt_double(out.purity_series[i].purity) +
                         "\n";
            pooled_purity.push_back(out.purity_series[i].purity);
        }
        manifest.record(dir / ("chain_" + std::to_string(k) + ".csv"), chain_csv);

        for (const auto& spec : out.rescaled_spectra) {
            for (std::size_t idx = 0; idx < spec.size(); ++idx)
                spectra_csv += std::to_string(sample_id) + "," + std::to_string(idx) + "," +
                               fmt_double(spec[idx] / args.n) + "\n";
            ++sample_id;
        }

        const auto& d = out.diagnostics;
        json cd;
        cd["chain"] = k;
        cd["acceptance"] = d.acceptance;
        cd["tau"] = d.tau;
        cd["ess"] = d.ess;
        cd["zero_variance"] = d.zero_variance;
        cd["evaporation_flagged"] = d.evaporation_flagged;
        if (d.first_escape_sweep)
            cd["first_escape_sweep"] = *d.first_escape_sweep;
        else
            cd["first_escape_sweep"] = nullptr;
        cd["max_cache_drift"] = d.max_cache_drift;
        cd["max_renorm_correction"] = d.max_renorm_correction;
        chain_diags.push_back(cd);
        if (std::isfinite(d.tau)) max_tau = std::max(max_tau, d.tau);
    }
    manifest.record(dir / "spectra.csv", spectra_csv);

    json diagnostics;
    diagnostics["chains"] = chain_diags;
    if (!pooled_purity.empty()) {
        const auto block = static_cast<std::size_t>(std::max(1.0, std::ceil(10.0 * max_tau)));
        const int order = pooled_purity.size() >= 4 ? 2 : 1;
        const auto pooled = stats::k_statistics(pooled_purity, order, block);
        json pj = kstats_json(pooled);
        pj["mean_n_purity"] = pooled.mean * args.n;
        pj["jackknife_block_len"] = block;
        diagnostics["pooled"] = pj;
    }
    manifest.record(dir / "diagnostics.json", diagnostics.dump(2) + "\n");
    manifest.write(dir / "manifest.json");
    return 0;
}

// --------------------------------------------------------------- compare ---

struct CompareArgs {
    std::string spectra;
    double beta = 0.0;
    std::string mu = "0";
    int bins = 64;
    std::string out;
};

// cumulative distribution of the analytic density on a uniform grid in the
// substituted variable (lambda = a sin^2 t, or b + (a-b) sin^2 t), where the
// integrand is smooth; composite Simpson per cell
struct AnalyticCdf {
    theory::PhaseParams params;
    std::vector<double> cdf;  // at t_k = k * (pi/2) / K

    explicit AnalyticCdf(const theory::PhaseParams& p, int grid = 4096) : params(p) {
        constexpr double pi = 3.141592653589793238462643383279;
        const double lo = p.phase == theory::Phase::HighTemp ? 0.0 : *p.b;
        const double width = p.a - lo;
        const auto g = [&](double t) {
            const double s = std::sin(t), c = std::cos(t);
            if (p.phase == theory::Phase::HighTemp)
                return (2.0 * p.a / pi) * (p.c / 2.0 + p.beta * p.a * s * s) * c * c;
            return (2.0 * p.beta * width * width / pi) * s * s * c * c;
        };
        cdf.resize(grid + 1);
        cdf[0] = 0.0;
        const double h = (pi / 2.0) / grid;
        for (int k = 0; k < grid; ++k) {
            const double a = k * h;
            cdf[k + 1] = cdf[k] + (g(a) + 4.0 * g(a + h / 2.0) + g(a + h)) * h / 6.0;
        }
        for (double& v : cdf) v /= cdf.back();
    }

    double operator()(double lambda) const {
        constexpr double pi = 3.141592653589793238462643383279;
        const double lo = params.phase == theory::Phase::HighTemp ? 0.0 : *params.b;
        if (lambda <= lo) return 0.0;
        if (lambda >= params.a) return 1.0;
        const double u = std::sqrt((lambda - lo) / (params.a - lo));
        const double t = std::asin(std::min(1.0, u));
        const double pos = t / (pi / 2.0) * (cdf.size() - 1);
        const auto k = static_cast<std::size_t>(pos);
        if (k + 1 >= cdf.size()) return cdf.back();
        const double frac = pos - static_cast<double>(k);
        return cdf[k] * (1.0 - frac) + cdf[k + 1] * frac;
    }
};

int cmd_compare(const CompareArgs& args) {
    if (tool::parse_rational(args.mu) != Rational(0)) {
        std::fprintf(stderr, "error: analytic densities are available for mu=0 only\n");
        return kExitUsage;
    }
    const auto csv = tool::read_csv(args.spectra);
    if (csv.header != std::vector<std::string>{"sample_id", "index", "value"}) {
        std::fprintf(stderr, "error: %s does not follow the spectra.csv schema\n",
                     args.spectra.c_str());
        return kExitUsage;
    }
    if (csv.rows.empty()) {
        std::fprintf(stderr, "error: %s has no data rows\n", args.spectra.c_str());
        return kExitUsage;
    }

    long max_index = -1;
    std::vector<double> values;
    values.reserve(csv.rows.size());
    for (const auto& row : csv.rows) {
        if (row.size() != 3) {
            std::fprintf(stderr, "error: malformed row in %s\n", args.spectra.c_str());
            return kExitUsage;
        }
        max_index = std::max(max_index, std::stol(row[1]));
        values.push_back(std::stod(row[2]));
    }
    const long n = max_index + 1;
    for (double& v : values) v *= static_cast<double>(n);  // rescale to n*lambda

    const auto params = theory::support_params(args.beta);
    const auto hist = stats::empirical_density(values, args.bins, 0.0, params.a);
    const double l1 =
        stats::l1_distance(hist, [&](double x) { return theory::density(params, x); });

    const AnalyticCdf cdf(params);
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    double ks = 0.0;
    const double count = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        ks = std::max(ks, std::abs(static_cast<double>(i) / count - f));
        ks = std::max(ks, std::abs(static_cast<double>(i + 1) / count - f));
    }

    std::string hist_csv = "bin_left,bin_right,density,analytic_midpoint\n";
    for (std::size_t i = 0; i + 1 < hist.edges.size(); ++i) {
        const double mid = 0.5 * (hist.edges[i] + hist.edges[i + 1]);
        hist_csv += fmt_double(hist.edges[i]) + "," + fmt_double(hist.edges[i + 1]) + "," +
                    fmt_double(hist.densities[i]) + "," +
                    fmt_double(theory::density(params, mid)) + "\n";
    }

    json out;
    out["l1"] = l1;
    out["ks_vs_analytic_cdf"] = ks;
    out["bins"] = args.bins;
    out["support"] = json::array({0.0, params.a});
    out["n"] = n;
    out["values"] = values.size();
    out["out_of_range"] = hist.out_of_range;

    tool::Manifest manifest("compare", json{{"spectra", args.spectra},
                                            {"beta", args.beta},
                                            {"mu", args.mu},
                                            {"bins", args.bins},
                                            {"out", args.out}});
    manifest.record(args.out, out.dump(2) + "\n");
    const fs::path hist_path = fs::path(args.out).parent_path() / "histogram.csv";
    manifest.record(hist_path, hist_csv);
    manifest.write(args.out + ".manifest.json");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"statistical mechanics of bipartite-entanglement purity"};
    app.require_subcommand(1);

    TheoryArgs theory_args;
    auto* theory_cmd = app.add_subcommand("theory", "evaluate closed-form phase-diagram quantities");
    theory_cmd->add_option("--beta", theory_args.beta, "inverse temperature")->required();
    theory_cmd->add_option("--mu", theory_args.mu, "dimension imbalance (rational)");
    theory_cmd->add_option("--quantity", theory_args.quantities,
                           "comma list of a,b,c,density,r,G,s_rel,reported_F,reported_S");
    theory_cmd->add_option("--lambda", theory_args.lambda, "evaluation point for density");
    theory_cmd->add_option("--out", theory_args.out, "output JSON file (default stdout)");
    theory_cmd->add_flag("--allow-below-critical", theory_args.allow_below_critical,
                         "let operations fail individually below beta_minus");

    SweepArgs sweep_args;
    auto* sweep_cmd = app.add_subcommand("sweep", "tabulate the phase diagram over a beta grid");
    sweep_cmd->add_option("--beta-min", sweep_args.beta_min)->required();
    sweep_cmd->add_option("--beta-max", sweep_args.beta_max)->required();
    sweep_cmd->add_option("--steps", sweep_args.steps)->required();
    sweep_cmd->add_option("--mu", sweep_args.mu);
    sweep_cmd->add_option("--out", sweep_args.out, "output CSV file")->required();

    HaarArgs haar_args;
    auto* haar_cmd = app.add_subcommand("haar", "sample Haar-random bipartite pure states");
    haar_cmd->add_option("--n", haar_args.n)->required();
    haar_cmd->add_option("--m", haar_args.m)->required();
    haar_cmd->add_option("--samples", haar_args.samples)->required();
    haar_cmd->add_option("--seed", haar_args.seed);
    haar_cmd->add_option("--chains", haar_args.chains);
    haar_cmd->add_option("--emit", haar_args.emit)
        ->check(CLI::IsMember({"purity", "spectra", "both"}));
    haar_cmd->add_option("--out-dir", haar_args.out_dir)->required();

    McmcArgs mcmc_args;
    auto* mcmc_cmd = app.add_subcommand("mcmc", "run the Coulomb-gas Metropolis sampler");
    mcmc_cmd->add_option("--n", mcmc_args.n)->required();
    mcmc_cmd->add_option("--beta", mcmc_args.beta)->required();
    mcmc_cmd->add_option("--mu", mcmc_args.mu);
    mcmc_cmd->add_option("--sweeps", mcmc_args.sweeps)->required();
    mcmc_cmd->add_option("--burn-in", mcmc_args.burn_in);
    mcmc_cmd->add_option("--thin", mcmc_args.thin);
    mcmc_cmd->add_option("--seed", mcmc_args.seed);
    mcmc_cmd->add_option("--chains", mcmc_args.chains);
    mcmc_cmd->add_option("--init", mcmc_args.init)
        ->check(CLI::IsMember({"uniform-jitter", "haar-draw"}));
    mcmc_cmd->add_option("--out-dir", mcmc_args.out_dir)->required();

    CompareArgs compare_args;
    auto* compare_cmd =
        app.add_subcommand("compare", "compare a spectra file against the analytic density");
    compare_cmd->add_option("--spectra", compare_args.spectra)->required();
    compare_cmd->add_option("--beta", compare_args.beta)->required();
    compare_cmd->add_option("--mu", compare_args.mu);
    compare_cmd->add_option("--bins", compare_args.bins);
    compare_cmd->add_option("--out", compare_args.out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (theory_cmd->parsed()) return cmd_theory(theory_args);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep_args);
        if (haar_cmd->parsed()) return cmd_haar(haar_args);
        if (mcmc_cmd->parsed()) return cmd_mcmc(mcmc_args);
        if (compare_cmd->parsed()) return cmd_compare(compare_args);
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumerical;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
    return 0;
}
