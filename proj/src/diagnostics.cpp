#include "aggsim/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "aggsim/errors.hpp"

namespace aggsim {

double time_avg_deviation(const DeviationSeries& s, double T_lambda) {
    if (!(T_lambda > 0))
        throw ValidationError("time_avg_deviation: T_lambda must be positive");
    const double a = 0.5 * T_lambda, b = T_lambda;
    const double tol = 1e-6 * std::max(1.0, T_lambda);
    const std::size_t n = s.size();
    if (n < 2 || s.t_lambda.front() > a + tol || s.t_lambda.back() < b - tol) {
        std::ostringstream os;
        os << "time_avg_deviation: samples do not span [" << a << ", " << b << "]";
        throw InsufficientCoverage(os.str());
    }
    // Piecewise-linear integral of the sampled series over [a, b].
    auto value_at = [&](double t, std::size_t j) {
        // interpolate on segment [j, j+1]
        const double t0 = s.t_lambda[j], t1 = s.t_lambda[j + 1];
        const double w = t1 > t0 ? (t - t0) / (t1 - t0) : 0.0;
        return s.max_dev[j] + w * (s.max_dev[j + 1] - s.max_dev[j]);
    };
    double integral = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        double t0 = s.t_lambda[j], t1 = s.t_lambda[j + 1];
        if (t1 <= a || t0 >= b) continue;
        const double lo = std::max(t0, a), hi = std::min(t1, b);
        if (hi <= lo) continue;
        integral += 0.5 * (value_at(lo, j) + value_at(hi, j)) * (hi - lo);
    }
    return integral * 2.0 / T_lambda;
}

double find_center(const ScalarField& S) {
    int best = 0;
    for (int i = 1; i < S.grid.I; ++i)
        if (S[i] > S[best]) best = i;
    return S.grid.center(best);
}

//==============================================================================
// Internal-state histograms
//==============================================================================

namespace {

inline double wrap_pos(double x, double L) {
    x = std::fmod(x, L);
    return x < 0.0 ? x + L : x;
}

inline int bin_of(double y, const BinSpec& b) {
    const int i = static_cast<int>(std::floor((y - b.lo) / b.width()));
    return std::clamp(i, 0, b.n - 1); // clamp out-of-range into the edge bins
}

void refresh_rho(InternalHistogram& h) {
    h.rho_r = (h.total_plus() + h.total_minus()) /
              (2.0 * static_cast<double>(h.n_bar) * h.n_samples);
}

} // namespace

double InternalHistogram::total_plus() const {
    double s = 0.0;
    for (double v : count_plus) s += v;
    return s;
}

double InternalHistogram::total_minus() const {
    double s = 0.0;
    for (double v : count_minus) s += v;
    return s;
}

double InternalHistogram::f_plus(int b) const {
    const double tot = total_plus();
    return tot > 0.0 ? count_plus[b] * rho_r / (tot * bins.width()) : 0.0;
}

double InternalHistogram::f_minus(int b) const {
    const double tot = total_minus();
    return tot > 0.0 ? count_minus[b] * rho_r / (tot * bins.width()) : 0.0;
}

void accumulate_histogram(InternalHistogram& h, const ParticleEnsemble& ens,
                          const Grid1D& grid, double x0) {
    const int i_in = grid.cell_of(wrap_pos(x0 - h.r, grid.L));  // center side -
    const int i_out = grid.cell_of(wrap_pos(x0 + h.r, grid.L)); // center side +
    const std::size_t N = ens.size();
    // Occupancy check first: an EmptySample throw must leave h untouched.
    long seen_in = 0, seen_out = 0;
    for (std::size_t l = 0; l < N; ++l) {
        const int c = grid.cell_of(ens.r[l]);
        seen_in += c == i_in;
        seen_out += c == i_out;
    }
    if (seen_in == 0 || seen_out == 0) {
        std::ostringstream os;
        os << "internal_histogram: sampled cell at r = " << h.r
           << " holds no particles";
        throw EmptySample(os.str());
    }
    for (std::size_t l = 0; l < N; ++l) {
        const int c = grid.cell_of(ens.r[l]);
        if (c == i_in) {
            const int b = bin_of(ens.y[l], h.bins);
            // +movers at x0-r head toward the center, -movers away from it
            (ens.v[l] > 0.0 ? h.count_plus : h.count_minus)[b] += 1.0;
        }
        if (c == i_out) {
            const int b = bin_of(ens.y[l], h.bins);
            (ens.v[l] < 0.0 ? h.count_plus : h.count_minus)[b] += 1.0;
        }
    }
    ++h.n_samples;
    refresh_rho(h);
}

InternalHistogram internal_histogram(const ParticleEnsemble& ens,
                                     const Grid1D& grid, long n_bar, double x0,
                                     double r, const BinSpec& bins) {
    if (n_bar < 1) throw ValidationError("internal_histogram: n_bar must be >= 1");
    if (bins.n < 3 || !(bins.hi > bins.lo))
        throw ValidationError("internal_histogram: malformed bin spec");
    InternalHistogram h;
    h.r = r;
    h.bins = bins;
    h.n_bar = n_bar;
    h.count_plus.assign(bins.n, 0.0);
    h.count_minus.assign(bins.n, 0.0);
    accumulate_histogram(h, ens, grid, x0);
    return h;
}

double peak_position(const InternalHistogram& h, Side side) {
    const std::vector<double>& c =
        side == Side::plus ? h.count_plus : h.count_minus;
    int b = 0;
    for (int i = 1; i < h.bins.n; ++i)
        if (c[i] > c[b]) b = i; // strict: ties keep the lower-y bin
    double y = h.bins.center(b);
    if (b > 0 && b + 1 < h.bins.n) {
        const double den = c[b - 1] - 2.0 * c[b] + c[b + 1];
        if (den < 0.0) // proper local maximum: refine with the parabola vertex
            y += 0.5 * h.bins.width() * (c[b - 1] - c[b + 1]) / den;
    }
    return y;
}

std::pair<double, double> mean_run_length(const InternalHistogram& h,
                                          const ModelParams& p) {
    const double tp = h.total_plus(), tm = h.total_minus();
    if (tp <= 0.0 || tm <= 0.0)
        throw EmptySample("mean_run_length: one velocity class has no samples");
    double sp = 0.0, sm = 0.0;
    for (int b = 0; b < h.bins.n; ++b) {
        const double inv_rate =
            1.0 / (p.lambda0 * modulation(h.bins.center(b), p.delta, p.chi));
        sp += h.count_plus[b] * inv_rate;
        sm += h.count_minus[b] * inv_rate;
    }
    return {sp / tp, sm / tm};
}

double peak_density(const ScalarField& rho) { return rho.max() - 1.0; }

PlateauReport detect_plateau(const ScalarField& rho, double tol) {
    const int I = rho.grid.I;
    const double mx = rho.max();
    if (!(mx > 0)) return {};
    int im = 0;
    for (int i = 1; i < I; ++i)
        if (rho[i] > rho[im]) im = i;
    auto ok = [&](int i) { return std::abs(rho[i] - mx) < tol * mx; };
    int extent = 1;
    int l = im, rgt = im;
    while (extent < I) {
        const int next = (l - 1 + I) % I;
        if (!ok(next)) break;
        l = next;
        ++extent;
    }
    while (extent < I) {
        const int next = (rgt + 1) % I;
        if (next == l) break; // wrapped all the way around
        if (!ok(next)) break;
        rgt = next;
        ++extent;
    }
    PlateauReport rep;
    rep.extent = extent;
    rep.has_plateau = extent >= 3;
    rep.uniform = extent == I;
    return rep;
}

} // namespace aggsim
