#pragma once

#include <string>
#include <vector>

#include "qcw/decoherence.hpp"
#include "qcw/lindblad.hpp"

// Least-squares fits of extracted decoherence-rate series by either
// a*sin(b t + phi)*e^{-d t} or a polynomial of degree <= 5 (lower residual
// wins). Series neither form captures fall back to tabulated interpolation.

namespace qcw {

struct SeriesFit {
    RateFunction func;
    std::string form;        // "constant" | "polynomial" | "sine-exp" | "tabulated"
    double residual = 0.0;   // RMS misfit of the best parametric form / RMS of series
    bool fallback = false;   // both parametric forms missed by > 20%
};

SeriesFit fit_series(const std::vector<double>& t, const std::vector<double>& y);

RateFunction scale_rate(const RateFunction& f, double factor);

struct FittedRates {
    std::vector<CollapseChannel> channels;  // the four defaults with fitted shapes
    SeriesFit gap_fit, transfer_fit;        // raw-series fits before rescaling
    int gap_index = 7, transfer_index = 5;
};

// Shapes taken from two diagonal D elements: the 1-2 transition generator
// (sym12, the sigma_x analog) drives the transfer channels, an energy-gap
// generator (l8 by default) drives the dephasing channels. Each channel's
// amplitude is rescaled so its time-average recovers the constant-rate
// calibration value (1, 0.8, 0.36, 0.16).
FittedRates fit_rate_functions(const DecoherenceMatrix& dm, int transfer_index = 5,
                               int gap_index = 7);

} // namespace qcw
