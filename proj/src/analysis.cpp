#include "pamrc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <numeric>

#include "pamrc/errors.hpp"

namespace pamrc {

namespace {

using cd = std::complex<double>;

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 FFT, in place.
void fft_pow2(std::vector<cd>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
        const cd wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cd w(1.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const cd u = a[i + j];
                const cd v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

// DFT of a real series up to the Nyquist bin; exact for any length.
std::vector<cd> real_dft_half(std::span<const double> x) {
    const std::size_t n = x.size();
    const std::size_t half = n / 2;
    std::vector<cd> out(half + 1);
    if (is_power_of_two(n)) {
        std::vector<cd> a(n);
        for (std::size_t i = 0; i < n; ++i) a[i] = cd(x[i], 0.0);
        fft_pow2(a);
        for (std::size_t k = 0; k <= half; ++k) out[k] = a[k];
        return out;
    }
    for (std::size_t k = 0; k <= half; ++k) {
        double re = 0.0, im = 0.0;
        const double w = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        for (std::size_t t = 0; t < n; ++t) {
            const double arg = w * static_cast<double>(t);
            re += x[t] * std::cos(arg);
            im += x[t] * std::sin(arg);
        }
        out[k] = cd(re, im);
    }
    return out;
}

// One-sided PSD of one segment, scaled so sum(P)*df equals the segment mean
// square; `window_power` is mean(w^2) of the applied window.
std::vector<double> segment_psd(std::span<const double> seg, double dt, double window_power) {
    const std::size_t n = seg.size();
    const auto spectrum = real_dft_half(seg);
    std::vector<double> p(spectrum.size());
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
        const double two_sided =
            std::norm(spectrum[k]) * dt / (static_cast<double>(n) * window_power);
        const bool interior = k != 0 && !(n % 2 == 0 && k == n / 2);
        p[k] = interior ? 2.0 * two_sided : two_sided;
    }
    return p;
}

}  // namespace

SpectrumEstimate power_spectrum(std::span<const double> series, double sample_interval_s,
                                SpectrumMethod method) {
    if (series.size() < 16) {
        throw ConfigError("power_spectrum: series too short (needs >= 16 samples)");
    }
    if (!(sample_interval_s > 0.0)) {
        throw ConfigError("power_spectrum: sample interval must be positive");
    }
    const double mean = std::accumulate(series.begin(), series.end(), 0.0) /
                        static_cast<double>(series.size());
    std::vector<double> x(series.begin(), series.end());
    for (double& v : x) v -= mean;

    SpectrumEstimate est;
    if (method == SpectrumMethod::periodogram) {
        est.method = "periodogram";
        const auto p = segment_psd(x, sample_interval_s, 1.0);
        const double df = 1.0 / (static_cast<double>(x.size()) * sample_interval_s);
        est.resolution_hz = df;
        est.frequency_hz.resize(p.size());
        for (std::size_t k = 0; k < p.size(); ++k) est.frequency_hz[k] = df * double(k);
        est.power = p;
        return est;
    }

    // Welch: 8 segments, 50% overlap, Hann window.
    est.method = "welch";
    const int segments = 8;
    std::size_t seg = static_cast<std::size_t>(2 * x.size() / (segments + 1));
    if (seg < 8) seg = std::min<std::size_t>(x.size(), 8);
    const std::size_t hop = std::max<std::size_t>(1, seg / 2);
    std::vector<double> window(seg);
    double wp = 0.0;
    for (std::size_t j = 0; j < seg; ++j) {
        window[j] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(j) /
                                         static_cast<double>(seg - 1));
        wp += window[j] * window[j];
    }
    wp /= static_cast<double>(seg);

    std::vector<double> acc(seg / 2 + 1, 0.0);
    int used = 0;
    std::vector<double> buf(seg);
    for (int s = 0; s < segments; ++s) {
        const std::size_t off = static_cast<std::size_t>(s) * hop;
        if (off + seg > x.size()) break;
        for (std::size_t j = 0; j < seg; ++j) buf[j] = x[off + j] * window[j];
        const auto p = segment_psd(buf, sample_interval_s, wp);
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += p[k];
        ++used;
    }
    if (used == 0) {
        throw ConfigError("power_spectrum: series too short for Welch segmentation");
    }
    for (double& v : acc) v /= used;
    const double df = 1.0 / (static_cast<double>(seg) * sample_interval_s);
    est.resolution_hz = df;
    est.frequency_hz.resize(acc.size());
    for (std::size_t k = 0; k < acc.size(); ++k) est.frequency_hz[k] = df * double(k);
    est.power = std::move(acc);
    return est;
}

double dominant_frequency(const SpectrumEstimate& spectrum) {
    double best = 0.0;
    double best_power = -1.0;
    for (std::size_t k = 1; k < spectrum.power.size(); ++k) {
        if (spectrum.power[k] > best_power) {
            best_power = spectrum.power[k];
            best = spectrum.frequency_hz[k];
        }
    }
    return best;
}

double dominant_bin_share(const SpectrumEstimate& spectrum) {
    double total = 0.0;
    std::size_t peak = 0;
    double best = -1.0;
    for (std::size_t k = 1; k < spectrum.power.size(); ++k) {
        total += spectrum.power[k];
        if (spectrum.power[k] > best) {
            best = spectrum.power[k];
            peak = k;
        }
    }
    if (total <= 0.0) return 0.0;
    // Windowing spreads a pure tone over the peak's immediate neighbours;
    // count them with the peak.
    double held = 0.0;
    for (std::size_t k = peak > 1 ? peak - 1 : 1; k <= peak + 1 && k < spectrum.power.size();
         ++k) {
        held += spectrum.power[k];
    }
    return held / total;
}

std::vector<std::vector<double>> delay_embed(std::span<const double> series, int dimension,
                                             int lag) {
    if (dimension < 1 || lag < 1) {
        throw ConfigError("delay_embed: dimension and lag must be >= 1");
    }
    const long span = static_cast<long>(dimension - 1) * lag;
    if (static_cast<long>(series.size()) <= span) {
        throw ConfigError("delay_embed: series shorter than the embedding span");
    }
    std::vector<std::vector<double>> out;
    out.reserve(series.size() - static_cast<std::size_t>(span));
    for (std::size_t t = 0; t + static_cast<std::size_t>(span) < series.size(); ++t) {
        std::vector<double> v(static_cast<std::size_t>(dimension));
        for (int j = 0; j < dimension; ++j) {
            v[static_cast<std::size_t>(j)] = series[t + static_cast<std::size_t>(j * lag)];
        }
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<long> local_minima_indices(std::span<const double> series) {
    std::vector<long> out;
    const long n = static_cast<long>(series.size());
    long i = 1;
    while (i < n) {
        if (series[i] < series[i - 1]) {
            // Possible minimum; absorb any plateau of equal values.
            long j = i;
            while (j + 1 < n && series[j + 1] == series[j]) ++j;
            if (j + 1 < n && series[j + 1] > series[j]) {
                out.push_back((i + j) / 2);  // midpoint convention for flats
            }
            i = j + 1;
        } else {
            ++i;
        }
    }
    return out;
}

PeriodMinima local_minima_per_period(std::span<const double> series, int period_steps) {
    if (period_steps < 3) {
        throw ConfigError("local_minima_per_period: period_steps must be >= 3");
    }
    if (series.size() < 3 * static_cast<std::size_t>(period_steps)) {
        throw ConfigError("local_minima_per_period: needs at least 3 periods of data");
    }
    PeriodMinima result;
    result.indices = local_minima_indices(series);
    const std::size_t periods = series.size() / static_cast<std::size_t>(period_steps);
    result.per_period.resize(periods);
    for (long idx : result.indices) {
        const std::size_t p = static_cast<std::size_t>(idx / period_steps);
        if (p < periods) {
            result.per_period[p].push_back(series[static_cast<std::size_t>(idx)]);
        }
    }
    return result;
}

int PeriodMinima::typical_count() const {
    std::map<int, int> votes;
    for (const auto& p : per_period) votes[static_cast<int>(p.size())]++;
    int best_count = 0;
    int best_votes = -1;
    for (const auto& [count, n] : votes) {
        if (n > best_votes) {
            best_votes = n;
            best_count = count;
        }
    }
    return best_count;
}

BifurcationDiagram bifurcation_diagram(std::span<const double> parameters,
                                       std::span<const std::vector<double>> runs,
                                       double transient_discard_frac,
                                       AttractorSampling sampling) {
    if (parameters.size() != runs.size()) {
        throw ConfigError("bifurcation_diagram: parameter/run count mismatch");
    }
    if (transient_discard_frac < 0.0 || transient_discard_frac >= 1.0) {
        throw ConfigError("bifurcation_diagram: discard fraction outside [0, 1)");
    }
    BifurcationDiagram diagram;
    diagram.parameter.assign(parameters.begin(), parameters.end());
    diagram.samples.resize(runs.size());
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& run = runs[i];
        const std::size_t discard =
            static_cast<std::size_t>(transient_discard_frac * static_cast<double>(run.size()));
        std::span<const double> tail(run.data() + discard, run.size() - discard);
        if (sampling == AttractorSampling::stroboscopic) {
            diagram.samples[i].assign(tail.begin(), tail.end());
        } else {
            for (long idx : local_minima_indices(tail)) {
                diagram.samples[i].push_back(tail[static_cast<std::size_t>(idx)]);
            }
        }
    }
    return diagram;
}

double one_step_map_error(const std::function<double(double)>& trained_map,
                          const std::function<double(double)>& truth_map,
                          std::span<const double> grid) {
    double worst = 0.0;
    for (double g : grid) {
        worst = std::max(worst, std::abs(trained_map(g) - truth_map(g)));
    }
    return worst;
}

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        out.push_back(count == 1 ? lo : lo + (hi - lo) * double(i) / double(count - 1));
    }
    return out;
}

namespace {

std::vector<double> ranks_of(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return v[a] < v[b];
    });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 3) {
        throw ConfigError("spearman: needs matching series of length >= 3");
    }
    const auto ra = ranks_of(a);
    const auto rb = ranks_of(b);
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    double num = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (va <= 0.0 || vb <= 0.0) {
        throw NumericalError("spearman: degenerate ranks");
    }
    return num / std::sqrt(va * vb);
}

}  // namespace pamrc
