#pragma once

#include <atomic>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "isopurity/core.hpp"
#include "isopurity/rng.hpp"
#include "isopurity/stats.hpp"

namespace isopurity::haar {

// Coefficient matrix X of |psi> in a product basis, normalized to unit
// Frobenius norm. iid complex Gaussian entries + one global normalization is
// equivalent in distribution to applying a Haar unitary, at O(NM) cost.
struct StateMatrix {
    BipartitionDims dims;
    Eigen::MatrixXcd entries;
};

inline StateMatrix sample_state(const BipartitionDims& dims, std::mt19937_64& eng) {
    Eigen::MatrixXcd x(dims.n(), dims.m());
    double norm_sq = 0.0;
    for (int i = 0; i < dims.n(); ++i) {
        for (int j = 0; j < dims.m(); ++j) {
            const auto [re, im] = rng::gaussian_pair(eng);
            x(i, j) = std::complex<double>(re, im);
            norm_sq += re * re + im * im;
        }
    }
    x /= std::sqrt(norm_sq);
    return {dims, std::move(x)};
}

// Schmidt spectrum from the n x n Gram matrix X X^dagger (never the m x m
// one; n <= m keeps the eigensolve cheap for unbalanced bipartitions).
inline SchmidtSpectrum reduced_spectrum(const StateMatrix& state) {
    const Eigen::MatrixXcd gram = state.entries * state.entries.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(gram, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw EigensolverFailure("Hermitian eigensolver did not converge");

    const auto& ev = solver.eigenvalues();
    double trace = 0.0;
    for (int i = 0; i < ev.size(); ++i) trace += ev[i];
    std::vector<double> vals(ev.size());
    for (int i = 0; i < ev.size(); ++i) vals[i] = ev[i] / trace;
    return validate_simplex(vals);
}

struct BatchResult {
    std::vector<PurityRecord> records;
    std::vector<std::vector<double>> spectra;  // raw lambda, one row per sample (optional)
    stats::SampleSummary summary;
};

// Worker cap from ISOPURITY_THREADS, defaulting to available parallelism.
inline unsigned worker_cap() {
    if (const char* env = std::getenv("ISOPURITY_THREADS")) {
        const long v = std::atol(env);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// `count` independent draws partitioned across `chains` deterministic
// sub-streams: chain k owns sample indices [k*count/chains, (k+1)*count/chains)
// and its own engine, so the output is a pure function of
// (dims, count, seed, chains) no matter how many threads execute it.
inline BatchResult sample_batch(const BipartitionDims& dims, std::size_t count, std::uint64_t seed,
                                unsigned chains, bool keep_spectra, int summary_order = 3) {
    if (count < 1) throw DomainError("purity_batch: count must be >= 1");
    if (chains < 1) chains = 1;
    if (chains > count) chains = static_cast<unsigned>(count);

    BatchResult out;
    out.records.resize(count);
    if (keep_spectra) out.spectra.resize(count);

    const auto run_chain = [&](unsigned k) {
        auto eng = rng::make_engine(seed, k);
        const std::size_t lo = count * k / chains;
        const std::size_t hi = count * (k + 1) / chains;
        for (std::size_t idx = lo; idx < hi; ++idx) {
            const auto spectrum = reduced_spectrum(sample_state(dims, eng));
            out.records[idx] = purity(spectrum);
            if (keep_spectra)
                out.spectra[idx].assign(spectrum.values().begin(), spectrum.values().end());
        }
    };

    const unsigned workers = std::min(chains, worker_cap());
    if (workers <= 1) {
        for (unsigned k = 0; k < chains; ++k) run_chain(k);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        std::atomic<unsigned> next{0};
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (unsigned k = next.fetch_add(1); k < chains; k = next.fetch_add(1))
                    run_chain(k);
            });
        for (auto& t : pool) t.join();
    }

    std::vector<double> purities(count);
    for (std::size_t i = 0; i < count; ++i) purities[i] = out.records[i].purity;
    const int order = std::min<int>(summary_order, static_cast<int>(count));
    out.summary = stats::k_statistics(purities, order);
    return out;
}

inline BatchResult purity_batch(const BipartitionDims& dims, std::size_t count, std::uint64_t seed,
                                unsigned chains = 1) {
    return sample_batch(dims, count, seed, chains, /*keep_spectra=*/false);
}

}  // namespace isopurity::haar
