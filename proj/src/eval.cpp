#include "ridlab/eval.hpp"

#include "ridlab/errors.hpp"
#include "ridlab/rid.hpp"
#include "ridlab/seed.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

namespace ridlab::eval {

namespace {

double circular(double d, double period) {
    if (period <= 0.0) return d;
    d = std::fmod(d, period);
    if (d >= 0.5 * period) d -= period;
    if (d < -0.5 * period) d += period;
    return d;
}

// Every permutation of 0..n-1, lexicographic order.
std::vector<std::vector<int>> permutations(int n) {
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    std::vector<std::vector<int>> out;
    do out.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));
    return out;
}

// Best assignment perm[i] = column of cost for row i, minimising the summed cost; the first
// permutation in lexicographic order wins ties.
std::vector<int> best_assignment(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    std::vector<int> best;
    double best_cost = std::numeric_limits<double>::infinity();
    for (const auto& p : permutations(n)) {
        double c = 0.0;
        for (int i = 0; i < n; ++i) c += cost[i][p[i]];
        if (c < best_cost) {
            best_cost = c;
            best = p;
        }
    }
    return best;
}

std::vector<int> column_peaks(const tfa::TimeFrequencyGrid& g, std::size_t col, bool periodic) {
    const long rows = static_cast<long>(g.rows());
    std::vector<int> peaks;
    for (long r = 0; r < rows; ++r) {
        const double v = g.at(r, col);
        if (!(v > 0.0)) continue;
        const bool has_lo = periodic || r > 0;
        const bool has_hi = periodic || r + 1 < rows;
        const double lo = has_lo ? g.at((r - 1 + rows) % rows, col) : -1.0;
        const double hi = has_hi ? g.at((r + 1) % rows, col) : -1.0;
        // strict against the lower neighbour so a plateau reports its lowest bin
        if (v > lo && v >= hi) peaks.push_back(static_cast<int>(r));
    }
    std::stable_sort(peaks.begin(), peaks.end(),
                     [&](int a, int b) { return g.at(a, col) > g.at(b, col); });
    return peaks;
}

void order_by_mean(RidgeSet& set) {
    std::vector<std::size_t> idx(set.components());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<double> mean(set.components(), 0.0);
    for (std::size_t k = 0; k < set.components(); ++k) {
        double s = 0.0;
        std::size_t n = 0;
        for (std::size_t c = 0; c < set.columns(); ++c)
            if (set.valid[k][c]) {
                s += set.tracks[k][c];
                ++n;
            }
        mean[k] = n ? s / static_cast<double>(n) : std::numeric_limits<double>::infinity();
    }
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return mean[a] < mean[b]; });
    RidgeSet sorted{set.time_axis, {}, {}};
    for (std::size_t k : idx) {
        sorted.tracks.push_back(set.tracks[k]);
        sorted.valid.push_back(set.valid[k]);
    }
    set = std::move(sorted);
}

}  // namespace

RidgeSet extract_ridges(const tfa::TimeFrequencyGrid& grid, int n_components,
                        const RidgeOptions& options) {
    require(n_components >= 1, "at least one ridge component is required");
    require(n_components <= 8, "ridge linking supports at most 8 components");
    require(grid.rows() >= 1 && grid.cols() >= 1, "empty grid");
    const std::size_t cols = grid.cols();
    const auto n = static_cast<std::size_t>(n_components);
    const double rows = static_cast<double>(grid.rows());

    std::vector<std::vector<int>> peaks(cols);
    std::size_t start = cols;
    for (std::size_t c = 0; c < cols; ++c) {
        peaks[c] = column_peaks(grid, c, options.periodic);
        if (peaks[c].size() > n) peaks[c].resize(n);
        if (start == cols && peaks[c].size() == n) start = c;
    }
    if (start == cols)
        throw PreconditionError("no column holds " + std::to_string(n) + " local maxima");

    RidgeSet set;
    set.time_axis = grid.time_axis;
    set.tracks.assign(n, std::vector<double>(cols, 0.0));
    set.valid.assign(n, std::vector<bool>(cols, false));

    auto bin_distance = [&](double a, double b) {
        double d = std::abs(a - b);
        if (options.periodic) d = std::min(d, rows - d);
        return d;
    };
    std::vector<double> reference(n);
    {
        auto first = peaks[start];
        std::sort(first.begin(), first.end());
        for (std::size_t k = 0; k < n; ++k) reference[k] = first[k];
    }
    auto link = [&](std::size_t c) {
        const auto& p = peaks[c];
        // pad with placeholders so the assignment stays square; they never validate a track
        std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t j = 0; j < n; ++j)
                cost[k][j] = j < p.size() ? bin_distance(reference[k], p[j]) : rows;
        const auto assign = best_assignment(cost);
        for (std::size_t k = 0; k < n; ++k) {
            const auto j = static_cast<std::size_t>(assign[k]);
            if (j >= p.size()) continue;
            set.tracks[k][c] = grid.freq_axis.at(static_cast<std::size_t>(p[j]));
            set.valid[k][c] = cost[k][j] <= options.gate_bins;
            reference[k] = p[j];
        }
    };
    for (std::size_t c = start; c < cols; ++c) link(c);
    // restart from the seed column for the backward pass
    for (std::size_t k = 0; k < n; ++k)
        reference[k] = std::round(grid.freq_axis.index_of(set.tracks[k][start]));
    for (std::size_t c = start; c-- > 0;) link(c);
    order_by_mean(set);
    return set;
}

RidgeSet ridges_from_curves(const std::vector<tfa::IdealCurve>& curves, const tfa::Axis& time_axis,
                            double crossing_hz, double period) {
    require(!curves.empty(), "no curves");
    RidgeSet set;
    set.time_axis = time_axis;
    const std::size_t cols = curves.front().frequency.size();
    for (const auto& c : curves) {
        require(c.frequency.size() == cols, "curves must share the time axis length");
        set.tracks.push_back(c.frequency);
        set.valid.emplace_back(cols, true);
    }
    if (crossing_hz > 0.0)
        for (std::size_t col = 0; col < cols; ++col)
            for (std::size_t a = 0; a < curves.size(); ++a)
                for (std::size_t b = a + 1; b < curves.size(); ++b)
                    if (std::abs(circular(set.tracks[a][col] - set.tracks[b][col], period)) < crossing_hz)
                        set.valid[a][col] = set.valid[b][col] = false;
    order_by_mean(set);
    return set;
}

RmseResult rmse_frequency(const RidgeSet& estimate, const RidgeSet& truth, double period) {
    require(estimate.components() == truth.components() && estimate.components() >= 1,
            "ridge sets must hold the same number of components");
    require(estimate.columns() == truth.columns(), "ridge sets must share the time axis");
    const std::size_t n = truth.components();
    const std::size_t cols = truth.columns();
    const auto perms = permutations(static_cast<int>(n));
    RmseResult r;
    double sq = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
        // per-column assignment of valid estimates to valid truths, least squared error first,
        // then the most matched pairs
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_pairs = 0;
        for (const auto& p : perms) {
            double e = 0.0;
            std::size_t pairs = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const auto j = static_cast<std::size_t>(p[i]);
                if (!(estimate.valid[i][c] && truth.valid[j][c])) continue;
                const double d = circular(estimate.tracks[i][c] - truth.tracks[j][c], period);
                e += d * d;
                ++pairs;
            }
            if (pairs > best_pairs || (pairs == best_pairs && e < best)) {
                best = e;
                best_pairs = pairs;
            }
        }
        if (best_pairs == 0) continue;
        sq += best;
        r.samples += best_pairs;
    }
    if (r.samples == 0) throw PreconditionError("no column is valid in both ridge sets");
    r.rmse_hz = std::sqrt(sq / static_cast<double>(r.samples));
    r.invalid_fraction = 1.0 - static_cast<double>(r.samples) / static_cast<double>(n * cols);
    return r;
}

std::string to_string(Method m) {
    switch (m) {
        case Method::Stft: return "stft";
        case Method::Enhanced: return "enhanced";
        case Method::Ideal: return "ideal";
    }
    return "stft";
}

Method method_from_string(const std::string& name) {
    if (name == "stft") return Method::Stft;
    if (name == "enhanced") return Method::Enhanced;
    if (name == "ideal") return Method::Ideal;
    throw PreconditionError("unknown method '" + name + "'");
}

const SweepRow* SweepReport::find(double snr_db, Method method) const {
    for (const auto& r : rows)
        if (r.snr_db == snr_db && r.method == method) return &r;
    return nullptr;
}

std::string SweepReport::csv(bool include_runtime) const {
    std::ostringstream out;
    out << "snr_db,method,rmse_hz,trials,runtime_ms\n";
    char line[256];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%g,%s,%.6f,%d,", r.snr_db, to_string(r.method).c_str(),
                      r.rmse_hz, r.trials);
        out << line;
        if (include_runtime) {
            std::snprintf(line, sizeof line, "%.3f", r.runtime_ms);
            out << line;
        }
        out << '\n';
    }
    return out.str();
}

std::string SweepReport::gnuplot(const std::vector<Method>& methods) const {
    std::ostringstream out;
    out << "# snr_db";
    for (Method m : methods) out << ' ' << to_string(m);
    out << '\n';
    std::vector<double> snrs;
    for (const auto& r : rows)
        if (std::find(snrs.begin(), snrs.end(), r.snr_db) == snrs.end()) snrs.push_back(r.snr_db);
    char buf[64];
    for (double s : snrs) {
        std::snprintf(buf, sizeof buf, "%g", s);
        out << buf;
        for (Method m : methods) {
            const SweepRow* r = find(s, m);
            std::snprintf(buf, sizeof buf, " %.6f", r ? r->rmse_hz : std::nan(""));
            out << buf;
        }
        out << '\n';
    }
    return out.str();
}

std::vector<double> default_snr_grid() {
    std::vector<double> v;
    for (int s = 0; s <= 16; s += 2) v.push_back(s);
    return v;
}

SweepReport snr_sweep(const std::vector<dataset::ScenarioSignal>& scenarios,
                      const dataset::DatasetConfig& data, const SweepConfig& config,
                      const net::Generator* gen) {
    require(!scenarios.empty(), "sweep needs at least one scenario");
    require(!config.snr_db.empty() && !config.methods.empty(), "sweep needs SNRs and methods");
    require(config.seeds >= 1, "sweep needs at least one seed");
    const bool wants_gen = std::find(config.methods.begin(), config.methods.end(),
                                     Method::Enhanced) != config.methods.end();
    if (wants_gen && !gen) throw MissingInputError("enhanced method requires a trained checkpoint");
    if (gen && gen->config().input_size != data.raster)
        throw PreconditionError("generator input size differs from the dataset raster");

    const std::size_t n_snr = config.snr_db.size();
    const std::size_t n_method = config.methods.size();
    const std::size_t trials = scenarios.size() * static_cast<std::size_t>(config.seeds);
    struct Acc {
        double rmse = 0.0, runtime = 0.0, invalid = 0.0;
    };
    // one slot per (snr, trial, method), filled independently and reduced in fixed order
    std::vector<Acc> slots(n_snr * trials * n_method);

    auto run = [&](std::size_t job) {
        const std::size_t si = job / trials;
        const std::size_t trial = job % trials;
        const std::size_t scen = trial / static_cast<std::size_t>(config.seeds);
        const std::size_t seed_idx = trial % static_cast<std::size_t>(config.seeds);
        const auto& scenario = scenarios[scen];
        const std::uint64_t noise_seed =
            derive_seed(config.root_seed, Stage::Eval, (si * scenarios.size() + scen) * 1000003ULL + seed_idx);
        using clock = std::chrono::steady_clock;
        const auto t0 = clock::now();
        const auto pair = dataset::build_pair(scenario, data, config.snr_db[si], noise_seed);
        const double stft_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
        const double period = pair.s.freq_period();
        const auto truth = ridges_from_curves(pair.truth, pair.s.time_axis,
                                              config.crossing_bins * pair.s.freq_axis.step, period);
        const int n = static_cast<int>(pair.truth.size());
        for (std::size_t mi = 0; mi < n_method; ++mi) {
            tfa::TimeFrequencyGrid grid;
            double ms = stft_ms;
            switch (config.methods[mi]) {
                case Method::Stft: grid = pair.s; break;
                case Method::Ideal: grid = pair.q; break;
                case Method::Enhanced: {
                    const auto t1 = clock::now();
                    grid = rid::enhance_grid(*gen, pair.s);
                    ms += std::chrono::duration<double, std::milli>(clock::now() - t1).count();
                    break;
                }
            }
            Acc& a = slots[job * n_method + mi];
            a.runtime = ms;
            try {
                const auto r = rmse_frequency(extract_ridges(grid, n, config.ridge), truth, period);
                a.rmse = r.rmse_hz;
                a.invalid = r.invalid_fraction;
            } catch (const PreconditionError&) {
                // no usable ridge: charge the worst circular error
                a.rmse = 0.5 * period;
                a.invalid = 1.0;
            }
        }
    };
    const std::size_t jobs = n_snr * trials;
    const int threads = std::max(1, std::min<int>(config.threads, static_cast<int>(jobs)));
    if (threads == 1) {
        for (std::size_t j = 0; j < jobs; ++j) run(j);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t j = static_cast<std::size_t>(t); j < jobs; j += static_cast<std::size_t>(threads)) run(j);
            });
        for (auto& th : pool) th.join();
    }

    SweepReport report;
    for (std::size_t si = 0; si < n_snr; ++si)
        for (std::size_t mi = 0; mi < n_method; ++mi) {
            SweepRow row;
            row.snr_db = config.snr_db[si];
            row.method = config.methods[mi];
            row.trials = static_cast<int>(trials);
            for (std::size_t t = 0; t < trials; ++t) {
                const Acc& a = slots[(si * trials + t) * n_method + mi];
                row.rmse_hz += a.rmse;
                row.runtime_ms += a.runtime;
                row.invalid_fraction += a.invalid;
            }
            row.rmse_hz /= static_cast<double>(trials);
            row.runtime_ms /= static_cast<double>(trials);
            row.invalid_fraction /= static_cast<double>(trials);
            report.rows.push_back(row);
        }
    return report;
}

}  // namespace ridlab::eval
