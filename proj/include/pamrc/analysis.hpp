#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace pamrc {

enum class SpectrumMethod { periodogram, welch };

struct SpectrumEstimate {
    std::vector<double> frequency_hz;  // ascending, up to Nyquist
    std::vector<double> power;         // one-sided density
    std::string method;
    double resolution_hz = 0.0;
};

// One-sided power spectral density with the series mean removed first.
// Welch uses 8 Hann-windowed segments with 50% overlap.
SpectrumEstimate power_spectrum(std::span<const double> series, double sample_interval_s,
                                SpectrumMethod method);

// Frequency of the largest non-DC bin.
double dominant_frequency(const SpectrumEstimate& spectrum);

// Fraction of total (non-DC) power held by the single largest bin.
double dominant_bin_share(const SpectrumEstimate& spectrum);

// Delay-coordinate vectors (y_t, y_{t+lag}, ..., y_{t+(m-1)lag}).
std::vector<std::vector<double>> delay_embed(std::span<const double> series, int dimension,
                                             int lag);

struct PeriodMinima {
    std::vector<std::vector<double>> per_period;  // minima values per complete period
    std::vector<long> indices;                    // flat indices of all minima

    // Most common per-period count.
    int typical_count() const;
};

// Strict local minima (plateaus collapse to their midpoint) grouped into
// consecutive windows of period_steps samples.
PeriodMinima local_minima_per_period(std::span<const double> series, int period_steps);

std::vector<long> local_minima_indices(std::span<const double> series);

enum class AttractorSampling { local_minima, stroboscopic };

struct BifurcationDiagram {
    std::vector<double> parameter;
    std::vector<std::vector<double>> samples;  // attractor samples per parameter
};

// Attractor samples per parameter value after discarding the leading
// transient fraction of each run.
BifurcationDiagram bifurcation_diagram(std::span<const double> parameters,
                                       std::span<const std::vector<double>> runs,
                                       double transient_discard_frac,
                                       AttractorSampling sampling);

// Max |trained_map(y) - truth_map(y)| over the grid.
double one_step_map_error(const std::function<double(double)>& trained_map,
                          const std::function<double(double)>& truth_map,
                          std::span<const double> grid);

std::vector<double> linspace(double lo, double hi, int count);

// Spearman rank correlation (average-rank ties).
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace pamrc
