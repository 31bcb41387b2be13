#pragma once

#include <string>
#include <vector>

#include "convamp/amplitude.hpp"
#include "convamp/critical.hpp"
#include "convamp/nonlinearity.hpp"
#include "convamp/pdecheck.hpp"
#include "convamp/stability.hpp"
#include "convamp/symbol.hpp"

namespace convamp {

struct Model {
    FourierSymbol symbol;
    NonlinearitySpec nonlinearity;
};

/// Model files: JSON object {n, m, r, coeffs: [[L_j0 rows],[L_j1 rows]], nonlinearity}.
/// Throws InputError on malformed input.
Model load_model(const std::string& path);
Model parse_model(const std::string& json_text);
std::string model_to_json(const Model& model);

std::string critical_to_json(const CriticalData& crit);
CriticalData critical_from_json(const std::string& text);

std::string coeffs_to_json(const AmplitudeCoeffs& coeffs);

std::string wave_to_json(const TravelingWave& wave);
TravelingWave wave_from_json(const std::string& text);

std::string hypothesis_report_to_json(const HypothesisReport& report);

/// CSV with a header row; floats at full precision (round-trip exact).
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<Real>>& rows);

/// Minimal polyline plot; one curve per series.
struct SvgSeries {
    std::string label;
    std::string color;
    std::vector<Real> x;
    std::vector<Real> y;
};
void write_svg_plot(const std::string& path, const std::vector<SvgSeries>& series,
                    const std::string& title);

/// Built-in regression fixtures.
std::string example_so2_json();
std::string swift_hohenberg_o2_json();

} // namespace convamp
