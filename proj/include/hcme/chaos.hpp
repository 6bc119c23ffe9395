#pragma once

// 3D quadratic map, orbit generation, Lyapunov spectra via the Benettin
// method, attractor classification, and the bifurcation/chart sweeps built
// on top of them.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "hcme/detail/parallel.hpp"
#include "hcme/errors.hpp"

namespace hcme {

inline constexpr double kDivergenceThreshold = 1e8;
inline constexpr std::size_t kDefaultTransient = 1024;
inline constexpr double kDefaultZeroTolerance = 1e-3;

struct MapParams {
    double a1, a2, a3, b1, b2, c;

    // Parameter set used for all encryption keystreams.
    static constexpr MapParams canonical() { return {0.35, 0.25, 0.12, 4.0, 1.15, 2.15}; }
};

struct ChaosState {
    double x = 0, y = 0, z = 0;

    bool operator==(const ChaosState&) const = default;
    double max_abs() const { return std::max({std::fabs(x), std::fabs(y), std::fabs(z)}); }
};

/// x' = a1*x + a2*y + a3*y^2,  y' = b1 - b2*z,  z' = c*x
inline ChaosState step(const ChaosState& s, const MapParams& p) {
    return {p.a1 * s.x + p.a2 * s.y + p.a3 * s.y * s.y,
            p.b1 - p.b2 * s.z,
            p.c * s.x};
}

using Mat3 = std::array<std::array<double, 3>, 3>;

inline Mat3 jacobian(const ChaosState& s, const MapParams& p) {
    return {{{p.a1, p.a2 + 2.0 * p.a3 * s.y, 0.0},
             {0.0, 0.0, -p.b2},
             {p.c, 0.0, 0.0}}};
}

// Streaming iterator over the orbit: advances one step at a time, tracks the
// absolute step count and raises on divergence.
class OrbitStream {
public:
    OrbitStream(const ChaosState& seed, const MapParams& params, std::size_t transient = 0)
        : state_(seed), params_(params) {
        for (std::size_t i = 0; i < transient; ++i) advance();
    }

    const ChaosState& state() const { return state_; }

    const ChaosState& advance() {
        state_ = step(state_, params_);
        ++steps_;
        if (!(state_.max_abs() <= kDivergenceThreshold))  // also catches NaN
            throw ChaoticDivergence(steps_);
        return state_;
    }

    std::size_t steps() const { return steps_; }

private:
    ChaosState state_;
    MapParams params_;
    std::size_t steps_ = 0;
};

/// Discards `transient` leading states, then returns the next n.
inline std::vector<ChaosState> orbit(const ChaosState& seed, const MapParams& params,
                                     std::size_t n, std::size_t transient) {
    OrbitStream stream(seed, params, transient);
    std::vector<ChaosState> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(stream.advance());
    return out;
}

struct LyapunovSpectrum {
    std::array<double, 3> lambda{};  // sorted descending, nats per iteration
    std::size_t n_iterations = 0;
};

namespace detail {

inline std::array<double, 3> mat_apply(const Mat3& m, const std::array<double, 3>& v) {
    return {m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2]};
}

}  // namespace detail

/// Benettin method: propagate an orthonormal frame through the Jacobian along
/// the orbit, re-orthonormalizing by modified Gram-Schmidt every step.
inline LyapunovSpectrum lyapunov_spectrum(const MapParams& params, const ChaosState& seed,
                                          std::size_t n, std::size_t transient = kDefaultTransient) {
    OrbitStream stream(seed, params, transient);
    std::array<std::array<double, 3>, 3> frame = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    std::array<double, 3> sums{};
    for (std::size_t k = 0; k < n; ++k) {
        const ChaosState& s = stream.advance();
        Mat3 j = jacobian(s, params);
        std::array<std::array<double, 3>, 3> w;
        for (int i = 0; i < 3; ++i) w[i] = detail::mat_apply(j, frame[i]);
        for (int i = 0; i < 3; ++i) {
            for (int m = 0; m < i; ++m) {
                double dot = w[i][0] * frame[m][0] + w[i][1] * frame[m][1] + w[i][2] * frame[m][2];
                for (int d = 0; d < 3; ++d) w[i][d] -= dot * frame[m][d];
            }
            double norm = std::sqrt(w[i][0] * w[i][0] + w[i][1] * w[i][1] + w[i][2] * w[i][2]);
            sums[i] += std::log(norm);
            for (int d = 0; d < 3; ++d) frame[i][d] = w[i][d] / norm;
        }
    }
    LyapunovSpectrum spec;
    for (int i = 0; i < 3; ++i) spec.lambda[i] = sums[i] / static_cast<double>(n);
    std::sort(spec.lambda.begin(), spec.lambda.end(), std::greater<>());
    spec.n_iterations = n;
    return spec;
}

enum class AttractorClass : std::uint8_t { P = 0, Q = 1, C = 2, HC2 = 3, HC3 = 4, D = 5 };

inline std::string_view attractor_name(AttractorClass c) {
    switch (c) {
        case AttractorClass::P: return "P";
        case AttractorClass::Q: return "Q";
        case AttractorClass::C: return "C";
        case AttractorClass::HC2: return "HC2";
        case AttractorClass::HC3: return "HC3";
        case AttractorClass::D: return "D";
    }
    return "?";
}

/// Total classification of a sorted spectrum. Borderline entries resolve by
/// the count of strictly positive exponents; a leading exponent within
/// zero_tol of zero with none positive reads as a closed invariant curve.
inline AttractorClass classify(const LyapunovSpectrum& spec, double zero_tol = kDefaultZeroTolerance) {
    int positive = 0;
    for (double l : spec.lambda)
        if (l > zero_tol) ++positive;
    switch (positive) {
        case 3: return AttractorClass::HC3;
        case 2: return AttractorClass::HC2;
        case 1: return AttractorClass::C;
        default: break;
    }
    return std::fabs(spec.lambda[0]) <= zero_tol ? AttractorClass::Q : AttractorClass::P;
}

enum class SweepAxis { A1, A2, A3, B1, B2, C };

inline std::string_view sweep_axis_name(SweepAxis a) {
    switch (a) {
        case SweepAxis::A1: return "a1";
        case SweepAxis::A2: return "a2";
        case SweepAxis::A3: return "a3";
        case SweepAxis::B1: return "b1";
        case SweepAxis::B2: return "b2";
        case SweepAxis::C: return "c";
    }
    return "?";
}

inline SweepAxis sweep_axis_from_name(std::string_view name) {
    if (name == "a1") return SweepAxis::A1;
    if (name == "a2") return SweepAxis::A2;
    if (name == "a3") return SweepAxis::A3;
    if (name == "b1") return SweepAxis::B1;
    if (name == "b2") return SweepAxis::B2;
    if (name == "c") return SweepAxis::C;
    throw Error("unknown sweep axis: " + std::string(name));
}

inline MapParams with_axis(MapParams base, SweepAxis axis, double value) {
    switch (axis) {
        case SweepAxis::A1: base.a1 = value; break;
        case SweepAxis::A2: base.a2 = value; break;
        case SweepAxis::A3: base.a3 = value; break;
        case SweepAxis::B1: base.b1 = value; break;
        case SweepAxis::B2: base.b2 = value; break;
        case SweepAxis::C: base.c = value; break;
    }
    return base;
}

struct SweepPoint {
    double value = 0;
    std::vector<double> xs;  // empty when divergent
    bool divergent = false;
};

inline constexpr ChaosState kChartSeed{0.1, 0.2, 0.3};

/// One-parameter bifurcation sweep: `keep` post-transient x-values per sample.
/// Divergent parameter values are recorded and skipped, not fatal.
inline std::vector<SweepPoint> bifurcation_sweep(SweepAxis axis, double lo, double hi,
                                                 std::size_t samples, std::size_t keep,
                                                 const MapParams& base = MapParams::canonical(),
                                                 const ChaosState& seed = kChartSeed,
                                                 std::size_t transient = kDefaultTransient,
                                                 int jobs = 0) {
    if (!(lo <= hi)) throw Error("sweep range must satisfy lo <= hi");
    if (samples < 2) throw Error("sweep needs at least 2 samples");
    std::vector<SweepPoint> out(samples);
    detail::parallel_for(samples, jobs, [&](std::size_t i) {
        double t = static_cast<double>(i) / static_cast<double>(samples - 1);
        double value = lo + t * (hi - lo);
        SweepPoint pt;
        pt.value = value;
        MapParams p = with_axis(base, axis, value);
        try {
            OrbitStream stream(seed, p, transient);
            pt.xs.reserve(keep);
            for (std::size_t k = 0; k < keep; ++k) pt.xs.push_back(stream.advance().x);
        } catch (const ChaoticDivergence&) {
            pt.divergent = true;
            pt.xs.clear();
        }
        out[i] = std::move(pt);
    });
    return out;
}

inline void write_sweep_csv(std::ostream& os, SweepAxis axis, const std::vector<SweepPoint>& sweep) {
    os << "param,x\n";
    (void)axis;
    for (const auto& pt : sweep)
        for (double x : pt.xs) os << pt.value << ',' << x << '\n';
}

struct ChartResult {
    std::size_t rows = 0, cols = 0;  // rows index b2, cols index a1
    double a1_lo = 0, a1_hi = 0, b2_lo = 0, b2_hi = 0;
    std::vector<AttractorClass> cells;  // row-major

    AttractorClass at(std::size_t r, std::size_t c) const { return cells[r * cols + c]; }
    double a1_at(std::size_t c) const {
        return a1_lo + (a1_hi - a1_lo) * static_cast<double>(c) / static_cast<double>(cols - 1);
    }
    double b2_at(std::size_t r) const {
        return b2_lo + (b2_hi - b2_lo) * static_cast<double>(r) / static_cast<double>(rows - 1);
    }
};

/// Two-parameter a1-b2 chart: Lyapunov spectrum + classification per cell.
/// Every cell starts from the same fixed seed so charts are reproducible.
inline ChartResult lyapunov_chart(double a1_lo, double a1_hi, double b2_lo, double b2_hi,
                                  std::size_t rows, std::size_t cols, std::size_t n,
                                  const MapParams& fixed = MapParams::canonical(),
                                  double zero_tol = kDefaultZeroTolerance,
                                  const ChaosState& seed = kChartSeed,
                                  std::size_t transient = kDefaultTransient, int jobs = 0) {
    if (rows < 2 || cols < 2) throw Error("chart grid must be at least 2x2");
    ChartResult chart;
    chart.rows = rows;
    chart.cols = cols;
    chart.a1_lo = a1_lo;
    chart.a1_hi = a1_hi;
    chart.b2_lo = b2_lo;
    chart.b2_hi = b2_hi;
    chart.cells.assign(rows * cols, AttractorClass::D);
    detail::parallel_for(rows, jobs, [&](std::size_t r) {
        for (std::size_t c = 0; c < cols; ++c) {
            MapParams p = fixed;
            p.a1 = chart.a1_at(c);
            p.b2 = chart.b2_at(r);
            try {
                chart.cells[r * cols + c] = classify(lyapunov_spectrum(p, seed, n, transient), zero_tol);
            } catch (const ChaoticDivergence&) {
                chart.cells[r * cols + c] = AttractorClass::D;
            }
        }
    });
    return chart;
}

inline void write_chart_csv(std::ostream& os, const ChartResult& chart) {
    os << "a1,b2,class\n";
    for (std::size_t r = 0; r < chart.rows; ++r)
        for (std::size_t c = 0; c < chart.cols; ++c)
            os << chart.a1_at(c) << ',' << chart.b2_at(r) << ',' << attractor_name(chart.at(r, c))
               << '\n';
}

// P5 chart image; class indices scaled by 42 so the six levels are visible.
inline void write_chart_pgm(std::ostream& os, const ChartResult& chart) {
    os << "P5\n" << chart.cols << ' ' << chart.rows << "\n255\n";
    for (std::size_t r = 0; r < chart.rows; ++r)
        for (std::size_t c = 0; c < chart.cols; ++c)
            os.put(static_cast<char>(static_cast<int>(chart.at(r, c)) * 42));
}

}  // namespace hcme
