#include "qcw/ratefit.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace qcw {

namespace {

double rms(const std::vector<double>& y) {
    double s = 0.0;
    for (double v : y) s += v * v;
    return std::sqrt(s / double(y.size()));
}

struct LinFit {
    double residual;  // absolute RMS
    Eigen::VectorXd coef;
};

LinFit solve_lsq(const Eigen::MatrixXd& A, const Eigen::Map<const Eigen::VectorXd>& y) {
    LinFit f;
    f.coef = A.colPivHouseholderQr().solve(y);
    f.residual = std::sqrt((A * f.coef - y).squaredNorm() / double(y.size()));
    return f;
}

LinFit sine_exp_lsq(const std::vector<double>& t, const Eigen::Map<const Eigen::VectorXd>& y,
                    double b, double d) {
    Eigen::MatrixXd A(t.size(), 2);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double e = std::exp(-d * t[i]);
        A(Eigen::Index(i), 0) = e * std::sin(b * t[i]);
        A(Eigen::Index(i), 1) = e * std::cos(b * t[i]);
    }
    return solve_lsq(A, y);
}

// golden-section minimization of f on [lo, hi]
template <class F>
double golden_min(F&& f, double lo, double hi) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 60 && hi - lo > 1e-10 * (1.0 + std::abs(lo)); ++it) {
        if (f1 < f2) {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - g * (hi - lo); f1 = f(x1);
        } else {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + g * (hi - lo); f2 = f(x2);
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

SeriesFit fit_series(const std::vector<double>& t, const std::vector<double>& y) {
    if (t.size() != y.size() || t.size() < 3)
        throw std::invalid_argument("fit_series: need matching series with >= 3 samples");
    const std::size_t n = t.size();
    const Eigen::Map<const Eigen::VectorXd> yv(y.data(), Eigen::Index(n));

    SeriesFit out;
    const double y_rms = rms(y);
    if (y_rms < 1e-14) {
        out.func = RateFunction::constant(0.0);
        out.form = "constant";
        return out;
    }
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= double(n);
    double sd = 0.0;
    for (double v : y) sd += (v - mean) * (v - mean);
    sd = std::sqrt(sd / double(n));
    if (sd < 1e-12 * std::max(1.0, std::abs(mean))) {
        out.func = RateFunction::constant(mean);
        out.form = "constant";
        out.residual = sd / y_rms;
        return out;
    }

    // polynomial, degree <= 5
    const int deg = int(std::min<std::size_t>(5, n - 1));
    Eigen::MatrixXd V(n, deg + 1);
    for (std::size_t i = 0; i < n; ++i) {
        double p = 1.0;
        for (int j = 0; j <= deg; ++j) {
            V(Eigen::Index(i), j) = p;
            p *= t[i];
        }
    }
    const LinFit poly = solve_lsq(V, yv);

    // a sin(bt + phi) e^{-dt}: scan (b, d), then refine each coordinate
    double best_b = 1.0, best_d = 0.0, best_res = 1e300;
    for (double b = 0.5; b <= 60.0; b += 0.5)
        for (double d = 0.0; d <= 15.0; d += 0.5) {
            const double r = sine_exp_lsq(t, yv, b, d).residual;
            if (r < best_res) { best_res = r; best_b = b; best_d = d; }
        }
    for (int round = 0; round < 4; ++round) {
        best_b = golden_min(
            [&](double b) { return sine_exp_lsq(t, yv, b, best_d).residual; },
            std::max(1e-3, best_b - 0.5), best_b + 0.5);
        best_d = golden_min(
            [&](double d) { return sine_exp_lsq(t, yv, best_b, d).residual; },
            std::max(0.0, best_d - 0.5), best_d + 0.5);
    }
    const LinFit se = sine_exp_lsq(t, yv, best_b, best_d);

    const double res_poly = poly.residual / y_rms;
    const double res_se = se.residual / y_rms;
    if (res_se <= res_poly) {
        const double a = std::hypot(se.coef(0), se.coef(1));
        double phi = std::atan2(se.coef(1), se.coef(0));
        out.func = RateFunction::sine_exp(a, best_b, phi, best_d);
        out.form = "sine-exp";
        out.residual = res_se;
    } else {
        std::vector<double> coeffs(std::size_t(deg) + 1);
        for (int j = 0; j <= deg; ++j) coeffs[std::size_t(j)] = poly.coef(j);
        out.func = RateFunction::polynomial(coeffs);
        out.form = "polynomial";
        out.residual = res_poly;
    }
    if (out.residual > 0.20) {
        out.func = RateFunction::tabulated(t, y);
        out.form = "tabulated";
        out.fallback = true;
    }
    return out;
}

RateFunction scale_rate(const RateFunction& f, double factor) {
    RateFunction s = f;
    switch (s.kind) {
        case RateKind::Constant: s.c *= factor; break;
        case RateKind::Polynomial:
            for (double& c : s.coeffs) c *= factor;
            break;
        case RateKind::SineExp: s.a *= factor; break;
        case RateKind::Tabulated:
            for (double& v : s.values) v *= factor;
            break;
    }
    return s;
}

FittedRates fit_rate_functions(const DecoherenceMatrix& dm, int transfer_index, int gap_index) {
    if (dm.t.empty()) throw std::invalid_argument("fit_rate_functions: empty decoherence matrix");
    const std::size_t n = dm.t.size();
    std::vector<double> y_tr(n), y_gap(n);
    for (std::size_t i = 0; i < n; ++i) {
        y_tr[i] = dm.D[i](transfer_index, transfer_index).real();
        y_gap[i] = dm.D[i](gap_index, gap_index).real();
    }

    FittedRates out;
    out.transfer_index = transfer_index;
    out.gap_index = gap_index;
    out.transfer_fit = fit_series(dm.t, y_tr);
    out.gap_fit = fit_series(dm.t, y_gap);

    const auto mean_of = [&](const RateFunction& f) {
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i)
            acc += 0.5 * (f(dm.t[i]) + f(dm.t[i + 1])) * (dm.t[i + 1] - dm.t[i]);
        return acc / (dm.t.back() - dm.t.front());
    };
    const auto rescaled = [&](const SeriesFit& fit, double target, const char* what) {
        const double m = mean_of(fit.func);
        std::vector<double> samples(n);
        for (std::size_t i = 0; i < n; ++i) samples[i] = fit.func(dm.t[i]);
        if (std::abs(m) < 1e-3 * std::max(rms(samples), 1e-30))
            throw std::runtime_error(std::string("fit_rate_functions: the ") + what +
                                     " shape has near-zero time-average; amplitude rescaling "
                                     "cannot recover the calibration rate");
        return scale_rate(fit.func, target / m);
    };

    out.channels = default_channels();
    for (auto& ch : out.channels) {
        const double target = ch.rate.c;  // defaults carry constant calibration rates
        const bool transfer = ch.label.rfind("transfer", 0) == 0;
        ch.rate = rescaled(transfer ? out.transfer_fit : out.gap_fit, target,
                           transfer ? "transfer" : "dephasing");
    }
    return out;
}

} // namespace qcw
