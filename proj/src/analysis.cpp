#include "hjbsync/analysis.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <numeric>

#include "hjbsync/errors.hpp"

namespace hjbsync {

namespace {

constexpr std::size_t kMinPhaseSamples = 64;
constexpr double kMagnitudeFloor = 1e-9;  // relative to the largest magnitude

// FFTW planning is not thread-safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n)
        : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
        if (data == nullptr) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;

    fftw_complex* data;
};

struct FftwPlan {
    FftwPlan(std::size_t n, fftw_complex* buf, int sign) {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign, FFTW_ESTIMATE);
    }
    ~FftwPlan() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    FftwPlan(const FftwPlan&) = delete;
    FftwPlan& operator=(const FftwPlan&) = delete;

    fftw_plan plan;
};

}  // namespace

PhaseSeries hilbert_phase(std::span<const double> signal) {
    const std::size_t n = signal.size();
    if (n < kMinPhaseSamples) {
        throw std::invalid_argument("hilbert_phase needs at least 64 samples");
    }
    const double mean = std::accumulate(signal.begin(), signal.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double s : signal) var += (s - mean) * (s - mean);
    if (!(var > 0.0)) {
        throw UndefinedError("phase of a constant signal is undefined");
    }

    FftwBuffer buf(n);
    FftwPlan forward(n, buf.data, FFTW_FORWARD);
    FftwPlan backward(n, buf.data, FFTW_BACKWARD);
    for (std::size_t i = 0; i < n; ++i) {
        buf.data[i][0] = signal[i] - mean;
        buf.data[i][1] = 0.0;
    }
    fftw_execute(forward.plan);
    // keep DC (and Nyquist for even n), double positive bins, zero negative bins
    const std::size_t half = n / 2;
    const std::size_t last_positive = (n % 2 == 0) ? half - 1 : half;
    for (std::size_t k = 1; k <= last_positive; ++k) {
        buf.data[k][0] *= 2.0;
        buf.data[k][1] *= 2.0;
    }
    for (std::size_t k = last_positive + 1 + (n % 2 == 0 ? 1 : 0); k < n; ++k) {
        buf.data[k][0] = 0.0;
        buf.data[k][1] = 0.0;
    }
    fftw_execute(backward.plan);

    PhaseSeries out;
    out.degrees.resize(n);
    out.valid.resize(n);
    double max_mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        max_mag = std::max(max_mag, std::hypot(buf.data[i][0], buf.data[i][1]));
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double re = buf.data[i][0] * inv_n;
        const double im = buf.data[i][1] * inv_n;
        double deg = std::atan2(im, re) * (180.0 / std::numbers::pi);
        if (deg <= -180.0) deg = 180.0;
        out.degrees[i] = deg;
        out.valid[i] = std::hypot(buf.data[i][0], buf.data[i][1]) > kMagnitudeFloor * max_mag;
    }
    return out;
}

std::vector<double> unwrap_degrees(std::span<const double> degrees) {
    std::vector<double> out(degrees.begin(), degrees.end());
    double offset = 0.0;
    for (std::size_t i = 1; i < out.size(); ++i) {
        const double d = degrees[i] - degrees[i - 1];
        if (d > 180.0) offset -= 360.0;
        if (d < -180.0) offset += 360.0;
        out[i] = degrees[i] + offset;
    }
    return out;
}

LayerErrors window_average(const LayerErrorSeries& series, double t_from, double t_to) {
    LayerErrors avg;
    std::size_t count = 0;
    for (std::size_t k = 0; k < series.t.size(); ++k) {
        if (series.t[k] < t_from || series.t[k] > t_to) continue;
        for (std::size_t l = 0; l < kLayers; ++l) {
            avg.intra[l] += series.intra[l][k];
            avg.inter[l] += series.inter[l][k];
        }
        ++count;
    }
    if (count == 0) {
        throw UndefinedError("averaging window contains no samples");
    }
    for (std::size_t l = 0; l < kLayers; ++l) {
        avg.intra[l] /= static_cast<double>(count);
        avg.inter[l] /= static_cast<double>(count);
    }
    return avg;
}

LayerErrors final_window_average(const LayerErrorSeries& series, double fraction) {
    if (series.t.empty()) {
        throw UndefinedError("averaging window contains no samples");
    }
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw ConfigError("window fraction must be in (0, 1]");
    }
    const double t0 = series.t.front();
    const double t1 = series.t.back();
    return window_average(series, t1 - fraction * (t1 - t0), t1);
}

LayerErrors layer_errors(std::span<const MultilayerState> trajectory, double t_from, double t_to) {
    LayerErrorSeries series;
    for (const auto& s : trajectory) {
        if (s.t >= t_from && s.t <= t_to) append_layer_errors(s, series);
    }
    return window_average(series, t_from, t_to);
}

std::string_view to_string(RegimeLabel label) {
    switch (label) {
        case RegimeLabel::AllSync: return "AllSync";
        case RegimeLabel::Sync13: return "Sync13";
        case RegimeLabel::ChimeraLike: return "ChimeraLike";
        case RegimeLabel::ThreeClusters: return "ThreeClusters";
        case RegimeLabel::Unclassified: return "Unclassified";
    }
    return "Unclassified";
}

std::optional<RegimeLabel> regime_from_string(std::string_view name) {
    for (int code = 0; code <= 4; ++code) {
        const auto label = static_cast<RegimeLabel>(code);
        if (to_string(label) == name) return label;
    }
    return std::nullopt;
}

std::optional<RegimeLabel> regime_from_code(int code) {
    if (code < 0 || code > 4) return std::nullopt;
    return static_cast<RegimeLabel>(code);
}

RegimeLabel classify_regime(const LayerErrors& e, double delta) {
    const auto below = [delta](double v) { return v < delta; };
    const bool intra_all = std::all_of(e.intra.begin(), e.intra.end(), below);
    const double inter12 = e.inter[0];
    const double inter13 = e.inter[1];
    const double inter23 = e.inter[2];

    if (intra_all && std::all_of(e.inter.begin(), e.inter.end(), below)) {
        return RegimeLabel::AllSync;
    }
    if (intra_all && below(inter13) && std::min(inter12, inter23) >= delta) {
        return RegimeLabel::Sync13;
    }
    if (below(e.intra[0]) && below(e.intra[2]) && below(inter13) && e.intra[1] >= delta) {
        return RegimeLabel::ChimeraLike;
    }
    if (intra_all && std::none_of(e.inter.begin(), e.inter.end(), below)) {
        return RegimeLabel::ThreeClusters;
    }
    return RegimeLabel::Unclassified;
}

std::size_t cluster_count(std::span<const double> phases_deg, double tolerance_deg) {
    if (phases_deg.empty()) return 0;
    std::vector<double> p;
    p.reserve(phases_deg.size());
    for (double d : phases_deg) {
        double m = std::fmod(d, 360.0);
        if (m < 0.0) m += 360.0;
        p.push_back(m);
    }
    std::sort(p.begin(), p.end());
    // On a circle, single-linkage groups are separated by gaps wider than tol.
    std::size_t gaps = 0;
    for (std::size_t i = 1; i < p.size(); ++i) {
        if (p[i] - p[i - 1] > tolerance_deg) ++gaps;
    }
    if (p.front() + 360.0 - p.back() > tolerance_deg) ++gaps;
    return std::max<std::size_t>(gaps, 1);
}

std::vector<double> phase_snapshot(std::span<const MultilayerState> trajectory, double t_from,
                                   double t_to) {
    std::vector<const MultilayerState*> window;
    for (const auto& s : trajectory) {
        if (s.t >= t_from && s.t <= t_to) window.push_back(&s);
    }
    if (window.empty()) {
        throw UndefinedError("phase window contains no samples");
    }
    const std::size_t oscillators = window.front()->nodes.size();
    const std::size_t mid = window.size() / 2;
    std::vector<double> snapshot(oscillators);
    std::vector<double> x1(window.size());
    for (std::size_t o = 0; o < oscillators; ++o) {
        for (std::size_t k = 0; k < window.size(); ++k) x1[k] = window[k]->nodes[o][0];
        snapshot[o] = hilbert_phase(x1).degrees[mid];
    }
    return snapshot;
}

}  // namespace hjbsync
