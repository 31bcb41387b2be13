#include "convamp/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "convamp/errors.hpp"

namespace convamp {

using nlohmann::json;

namespace {

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json& j) {
    return Complex(j.at(0).get<Real>(), j.at(1).get<Real>());
}

json mat_to_json(const Mat& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

Mat mat_from_json(const json& j, int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < n; ++c) m(i, c) = j.at(i).at(c).get<Real>();
    return m;
}

json vecc_to_json(const VecC& v) {
    json out = json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
    return out;
}

} // namespace

Model parse_model(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw InputError(std::string("model JSON parse error: ") + e.what());
    }
    try {
        Model m;
        m.symbol.dim = j.at("n").get<int>();
        m.symbol.order = j.at("m").get<int>();
        m.symbol.conserved_rank = j.at("r").get<int>();
        const json& co = j.at("coeffs");
        if (static_cast<int>(co.size()) != m.symbol.order + 1)
            throw InputError("coeffs must list L_j for j = 0..m");
        for (const auto& pair : co)
            m.symbol.coeffs.emplace_back(mat_from_json(pair.at(0), m.symbol.dim),
                                         mat_from_json(pair.at(1), m.symbol.dim));
        const json& nl = j.at("nonlinearity");
        for (const auto& row : nl.at("rows")) {
            std::vector<Monomial> mono_row;
            for (const auto& mo : row) {
                Monomial mm;
                mm.coeff = mo.at("coeff").get<Real>();
                for (const auto& f : mo.at("factors"))
                    mm.factors.emplace_back(f.at(0).get<int>(), f.at(1).get<int>());
                if (mm.degree() < 2 || mm.degree() > 3)
                    throw InputError("monomial degree must be 2 or 3");
                mono_row.push_back(mm);
            }
            m.nonlinearity.rows.push_back(mono_row);
        }
        for (const auto& b : nl.at("conserved_outer"))
            m.nonlinearity.conserved_outer.push_back(b.get<bool>());
        if (m.nonlinearity.dim() != m.symbol.dim
            || static_cast<int>(m.nonlinearity.conserved_outer.size()) != m.symbol.dim)
            throw InputError("nonlinearity dimensions do not match the symbol");
        return m;
    } catch (const json::exception& e) {
        throw InputError(std::string("model JSON schema error: ") + e.what());
    }
}

Model load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open model file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

std::string model_to_json(const Model& model) {
    json j;
    j["n"] = model.symbol.dim;
    j["m"] = model.symbol.order;
    j["r"] = model.symbol.conserved_rank;
    json co = json::array();
    for (const auto& pr : model.symbol.coeffs)
        co.push_back(json::array({mat_to_json(pr.first), mat_to_json(pr.second)}));
    j["coeffs"] = co;
    json rows = json::array();
    for (const auto& row : model.nonlinearity.rows) {
        json jr = json::array();
        for (const auto& mo : row) {
            json f = json::array();
            for (const auto& fa : mo.factors) f.push_back(json::array({fa.first, fa.second}));
            jr.push_back(json{{"coeff", mo.coeff}, {"factors", f}});
        }
        rows.push_back(jr);
    }
    j["nonlinearity"] = json{{"rows", rows},
                             {"conserved_outer", model.nonlinearity.conserved_outer}};
    return j.dump(2);
}

std::string critical_to_json(const CriticalData& crit) {
    json j;
    j["k_star"] = crit.k_star;
    j["lambda"] = complex_to_json(crit.lambda);
    j["lambda_k"] = complex_to_json(crit.lambda_k);
    j["lambda_kk"] = complex_to_json(crit.lambda_kk);
    j["lambda_mu"] = complex_to_json(crit.lambda_mu);
    j["r"] = vecc_to_json(crit.r_vec);
    j["l"] = vecc_to_json(crit.l_vec.transpose());
    j["d_star"] = crit.d_star;
    j["delta"] = crit.delta;
    return j.dump(2);
}

CriticalData critical_from_json(const std::string& text) {
    json j = json::parse(text);
    CriticalData c;
    c.k_star = j.at("k_star").get<Real>();
    c.lambda = complex_from_json(j.at("lambda"));
    c.lambda_k = complex_from_json(j.at("lambda_k"));
    c.lambda_kk = complex_from_json(j.at("lambda_kk"));
    c.lambda_mu = complex_from_json(j.at("lambda_mu"));
    const auto& rv = j.at("r");
    c.r_vec.resize(rv.size());
    for (size_t i = 0; i < rv.size(); ++i) c.r_vec(i) = complex_from_json(rv.at(i));
    const auto& lv = j.at("l");
    c.l_vec.resize(lv.size());
    for (size_t i = 0; i < lv.size(); ++i) c.l_vec(i) = complex_from_json(lv.at(i));
    c.d_star = j.at("d_star").get<Real>();
    c.delta = j.at("delta").get<Real>();
    return c;
}

std::string coeffs_to_json(const AmplitudeCoeffs& coeffs) {
    json j;
    j["a"] = complex_to_json(coeffs.a);
    j["b"] = complex_to_json(coeffs.b);
    j["gamma"] = complex_to_json(coeffs.gamma);
    j["V1"] = vecc_to_json(coeffs.V1);
    j["F"] = mat_to_json(coeffs.F_mat);
    json h = json::array();
    for (int i = 0; i < coeffs.H_vec.size(); ++i) h.push_back(coeffs.H_vec(i));
    j["H"] = h;
    j["H_im_residue"] = coeffs.H_im_residue;
    j["D"] = mat_to_json(coeffs.D_mat);
    json w0 = json::array();
    for (int i = 0; i < coeffs.W0.size(); ++i) w0.push_back(coeffs.W0(i));
    j["W0"] = w0;
    j["v"] = vecc_to_json(coeffs.v_vec);
    j["compat_F"] = coeffs.compat_F;
    j["compat_H"] = coeffs.compat_H;
    j["o2_mode"] = coeffs.o2_mode;
    j["darcy_ctilde"] = complex_to_json(coeffs.darcy_ctilde);
    j["darcy_deltaA"] = complex_to_json(coeffs.darcy_deltaA);
    return j.dump(2);
}

std::string wave_to_json(const TravelingWave& wave) {
    json j;
    j["eps"] = wave.eps;
    j["kappa_tilde"] = wave.kappa_tilde;
    json bet = json::array();
    for (int i = 0; i < wave.beta.size(); ++i) bet.push_back(wave.beta(i));
    j["beta"] = bet;
    j["d"] = wave.speed;
    j["M"] = wave.trunc;
    j["residual_norm"] = wave.residual_norm;
    json modes = json::array();
    for (const auto& m : wave.modes) modes.push_back(vecc_to_json(m));
    j["modes"] = modes;
    return j.dump(2);
}

TravelingWave wave_from_json(const std::string& text) {
    json j = json::parse(text);
    TravelingWave w;
    w.eps = j.at("eps").get<Real>();
    w.kappa_tilde = j.at("kappa_tilde").get<Real>();
    const auto& bet = j.at("beta");
    w.beta.resize(bet.size());
    for (size_t i = 0; i < bet.size(); ++i) w.beta(i) = bet.at(i).get<Real>();
    w.speed = j.at("d").get<Real>();
    w.trunc = j.at("M").get<int>();
    w.residual_norm = j.value("residual_norm", 0.0);
    for (const auto& jm : j.at("modes")) {
        VecC v(jm.size());
        for (size_t i = 0; i < jm.size(); ++i) v(i) = complex_from_json(jm.at(i));
        w.modes.push_back(v);
    }
    return w;
}

std::string hypothesis_report_to_json(const HypothesisReport& report) {
    json items = json::array();
    for (const auto& it : report.items)
        items.push_back(json{{"name", it.name}, {"passed", it.passed}, {"detail", it.detail}});
    return json{{"items", items}, {"all_passed", report.all_passed()}}.dump(2);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<Real>>& rows) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open output file: " + path);
    for (size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 < header.size() ? "," : "\n");
    out << std::setprecision(17);
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i)
            out << row[i] << (i + 1 < row.size() ? "," : "\n");
    }
}

void write_svg_plot(const std::string& path, const std::vector<SvgSeries>& series,
                    const std::string& title) {
    const int W = 720, H = 480, ml = 60, mr = 20, mt = 40, mb = 40;
    Real xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (size_t i = 0; i < s.x.size(); ++i) {
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (xmax <= xmin) xmax = xmin + 1;
    if (ymax <= ymin) ymax = ymin + 1;
    const Real pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    auto px = [&](Real x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto py = [&](Real y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

    std::ofstream out(path);
    if (!out) throw InputError("cannot open output file: " + path);
    out << std::setprecision(8);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
        << title << "</text>\n";
    // axes
    out << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
        << H - mb << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
        << "\" stroke=\"black\"/>\n";
    if (ymin < 0 && ymax > 0)
        out << "<line x1=\"" << ml << "\" y1=\"" << py(0) << "\" x2=\"" << W - mr << "\" y2=\""
            << py(0) << "\" stroke=\"#cccccc\" stroke-dasharray=\"4\"/>\n";
    // axis labels
    out << "<text x=\"" << ml - 8 << "\" y=\"" << py(ymin) << "\" text-anchor=\"end\" "
        << "font-size=\"10\">" << ymin << "</text>\n";
    out << "<text x=\"" << ml - 8 << "\" y=\"" << py(ymax) << "\" text-anchor=\"end\" "
        << "font-size=\"10\">" << ymax << "</text>\n";
    out << "<text x=\"" << px(xmin) << "\" y=\"" << H - mb + 15 << "\" font-size=\"10\">" << xmin
        << "</text>\n";
    out << "<text x=\"" << px(xmax) << "\" y=\"" << H - mb + 15 << "\" text-anchor=\"end\" "
        << "font-size=\"10\">" << xmax << "</text>\n";
    int li = 0;
    for (const auto& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < s.x.size(); ++i)
            out << px(s.x[i]) << "," << py(s.y[i]) << " ";
        out << "\"/>\n";
        out << "<text x=\"" << W - mr - 5 << "\" y=\"" << mt + 15 * (li + 1)
            << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << s.color << "\">" << s.label
            << "</text>\n";
        ++li;
    }
    out << "</svg>\n";
}

std::string example_so2_json() {
    // two-component convective model with one conservation law:
    //   d_t U = [[2,1],[1,2]] U_xx + [[0,0],[c1+mu,c2]] U_x + [[0,0],[0,-1]] U
    //           + (d_x(u^2)/2, v^2/2) - (5/6)(d_x(u^3), v^3)
    return R"json({
  "n": 2, "m": 2, "r": 1,
  "coeffs": [
    [[[0,0],[0,-1]], [[0,0],[0,0]]],
    [[[0,0],[10.555833735058737,1.2247448713915890]], [[0,0],[1,0]]],
    [[[2,1],[1,2]], [[0,0],[0,0]]]
  ],
  "nonlinearity": {
    "rows": [
      [{"coeff": 0.5, "factors": [[0,0],[0,0]]},
       {"coeff": -0.8333333333333333, "factors": [[0,0],[0,0],[0,0]]}],
      [{"coeff": 0.5, "factors": [[1,0],[1,0]]},
       {"coeff": -0.8333333333333333, "factors": [[1,0],[1,0],[1,0]]}]
    ],
    "conserved_outer": [true, false]
  }
})json";
}

std::string swift_hohenberg_o2_json() {
    // differentiated Swift-Hohenberg with a conservation law:
    //   u_t = d_x^2 [ (1+d_x^2)^2 u - mu u + u^3 ]
    return R"json({
  "n": 1, "m": 6, "r": 1,
  "coeffs": [
    [[[0]], [[0]]],
    [[[0]], [[0]]],
    [[[1]], [[-1]]],
    [[[0]], [[0]]],
    [[[2]], [[0]]],
    [[[0]], [[0]]],
    [[[1]], [[0]]]
  ],
  "nonlinearity": {
    "rows": [
      [{"coeff": 3.0, "factors": [[0,0],[0,0],[0,1]]}]
    ],
    "conserved_outer": [true]
  }
})json";
}

} // namespace convamp
