// Batch interface: model ingestion, analysis, stability scans, simulation,
// Bloch validation, and the appendix reproduction run.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>

#include "convamp/ampsim.hpp"
#include "convamp/errors.hpp"
#include "convamp/io.hpp"
#include "convamp/pdecheck.hpp"

namespace fs = std::filesystem;
using namespace convamp;

namespace {

struct Cli {
    std::string command;
    std::string model_path;
    std::string out_dir = ".";
    Real eps = 1e-2;
    Real kappa = 0.0;
    Real rho = 0.0;
    Real sigma_max = 0.0;
    int grid_n = 256;
    Real dt = 1e-3;
    Real t_final = 1.0;
    long seed = 0;
    std::vector<std::string> overrides;
};

Complex parse_complex(const std::string& s) {
    auto comma = s.find(',');
    if (comma == std::string::npos) return Complex(std::stod(s), 0.0);
    return Complex(std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1)));
}

ScalarCoeffs coeffs_from_overrides(const std::vector<std::string>& kv) {
    // appendix defaults
    ScalarCoeffs co;
    co.a = Complex(1, 1);
    co.b = Complex(1, 0);
    co.c = Complex(-3, 3);
    co.d = Complex(1, -1);
    co.f = 1;
    co.h = 2;
    co.eB = 0;
    co.g = Complex(0, 0);
    for (const auto& item : kv) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw InputError("--set expects key=value: " + item);
        const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
        if (key == "a") co.a = parse_complex(val);
        else if (key == "b") co.b = parse_complex(val);
        else if (key == "c") co.c = parse_complex(val);
        else if (key == "d") co.d = parse_complex(val);
        else if (key == "g") co.g = parse_complex(val);
        else if (key == "eB") co.eB = std::stod(val);
        else if (key == "f") co.f = std::stod(val);
        else if (key == "h") co.h = std::stod(val);
        else throw InputError("unknown coefficient override: " + key);
    }
    return co;
}

Model resolve_model(const std::string& path) {
    if (path.empty() || path == "example_so2") return parse_model(example_so2_json());
    if (path == "swift_hohenberg_o2") return parse_model(swift_hohenberg_o2_json());
    return load_model(path);
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out) throw InputError("cannot write " + p.string());
    out << text;
}

std::vector<Real> linspace(Real a, Real b, int n) {
    std::vector<Real> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

struct Pipeline {
    Model model;
    CriticalData crit;
    PsiCorrections psi;
    AmplitudeCoeffs coeffs;
};

Pipeline run_pipeline(const Model& m) {
    Pipeline p;
    p.model = m;
    p.crit = find_critical(m.symbol);
    p.psi = compute_psi(m.symbol, p.crit, m.nonlinearity);
    p.coeffs = compute_amplitude_coeffs(m.symbol, p.crit, m.nonlinearity, p.psi);
    return p;
}

int cmd_analyze(const Cli& cli) {
    Model m = resolve_model(cli.model_path);
    std::vector<Real> kg = linspace(0.05, 8.0, 160);
    std::vector<Real> mg = {-0.2, -0.05, 0.0, 0.05, 0.2};
    HypothesisReport rep = check_hypotheses(m.symbol, kg, mg);
    CriticalData crit = find_critical(m.symbol);
    write_text(fs::path(cli.out_dir) / "hypotheses.json", hypothesis_report_to_json(rep));
    write_text(fs::path(cli.out_dir) / "critical.json", critical_to_json(crit));
    std::cout << rep.summary();
    std::cout << "k* = " << crit.k_star << ", lambda = " << crit.lambda.real() << " + "
              << crit.lambda.imag() << "i\n";
    return 0;
}

int cmd_coeffs(const Cli& cli) {
    Pipeline p = run_pipeline(resolve_model(cli.model_path));
    write_text(fs::path(cli.out_dir) / "coeffs.json", coeffs_to_json(p.coeffs));
    std::cout << coeffs_to_json(p.coeffs) << "\n";
    return 0;
}

int cmd_wave(const Cli& cli) {
    Pipeline p = run_pipeline(resolve_model(cli.model_path));
    TravelingWave w = newton_wave(p.model.symbol, p.model.nonlinearity, p.crit, p.psi,
                                  p.coeffs, cli.eps, cli.kappa, Vec());
    write_text(fs::path(cli.out_dir) / "wave.json", wave_to_json(w));
    std::cout << "wave: eps=" << w.eps << " d=" << std::setprecision(12) << w.speed
              << " residual=" << w.residual_norm << "\n";
    return 0;
}

int cmd_stability(const Cli& cli) {
    ScalarCoeffs co = coeffs_from_overrides(cli.overrides);
    WaveParams w = wave_family(co, cli.kappa, 0.0);
    const Real rho = cli.rho > 0 ? cli.rho : 10 * cli.eps;
    std::vector<Real> sig = linspace(-rho, rho, 401);
    MatC tr = track_branches(co, w, cli.eps, StabilityModel::Truncated, sig);
    std::vector<std::vector<Real>> rows;
    for (size_t i = 0; i < sig.size(); ++i)
        rows.push_back({sig[i], tr(i, 0).real(), tr(i, 0).imag(), tr(i, 1).real(),
                        tr(i, 1).imag(), tr(i, 2).real(), tr(i, 2).imag()});
    write_csv((fs::path(cli.out_dir) / "dispersion.csv").string(),
              {"sigma", "re_l1", "im_l1", "re_l2", "im_l2", "re_l3", "im_l3"}, rows);
    NeutralExpansion ne = neutral_expansion(co, w, cli.eps);
    DarcyExpansion de = darcy_expansion(co, w);
    std::ostringstream rep;
    rep << std::setprecision(12);
    rep << "{\n  \"p\": " << ne.p << ",\n  \"q\": " << ne.q << ",\n";
    rep << "  \"lam_t1\": [" << ne.lam_t1.real() << ", " << ne.lam_t1.imag() << "],\n";
    rep << "  \"lam_c1\": [" << ne.lam_c1.real() << ", " << ne.lam_c1.imag() << "],\n";
    rep << "  \"mu_t\": [" << ne.mu_t.real() << ", " << ne.mu_t.imag() << "],\n";
    rep << "  \"mu_c\": [" << ne.mu_c.real() << ", " << ne.mu_c.imag() << "],\n";
    rep << "  \"mu_c_leading\": " << ne.mu_c_leading << ",\n";
    rep << "  \"darcy_C2\": [" << de.C2.real() << ", " << de.C2.imag() << "],\n";
    rep << "  \"kappaS2\": " << de.kappaS2 << "\n}\n";
    write_text(fs::path(cli.out_dir) / "expansion.json", rep.str());
    std::cout << rep.str();
    return 0;
}

int cmd_scan(const Cli& cli, const std::string& stem = "scan") {
    ScalarCoeffs co = coeffs_from_overrides(cli.overrides);
    ScanOptions opt;
    opt.rho = cli.rho;
    auto rows = scan_stability(co, cli.eps, opt);
    std::vector<std::vector<Real>> csv;
    SvgSeries sS{"S(kappa,rho)", "#1f77b4", {}, {}}, sD{"S_D(kappa)", "#2ca02c", {}, {}};
    for (const auto& r : rows) {
        csv.push_back({r.kappa, r.S, r.SD});
        sS.x.push_back(r.kappa);
        sS.y.push_back(r.S);
        sD.x.push_back(r.kappa);
        sD.y.push_back(r.SD);
    }
    write_csv((fs::path(cli.out_dir) / (stem + ".csv")).string(), {"kappa", "S", "S_D"}, csv);
    write_svg_plot((fs::path(cli.out_dir) / (stem + ".svg")).string(), {sS, sD},
                   "low-frequency stability scan");
    return 0;
}

int cmd_simulate(const Cli& cli) {
    ScalarCoeffs co = coeffs_from_overrides(cli.overrides);
    FieldState st;
    st.points = cli.grid_n;
    st.eps = cli.eps;
    WaveParams w = wave_family(co, cli.kappa, 0.0);
    const Real keff = std::max(std::abs(cli.kappa), 2 * M_PI / 40.0);
    st.length = 2 * M_PI / keff;
    st.A.resize(st.points);
    st.B = Vec::Zero(st.points);
    for (int i = 0; i < st.points; ++i) {
        const Real x = st.length * i / st.points;
        st.A(i) = w.alpha * std::exp(I * cli.kappa * x);
    }
    TrajectorySummary tr = simulate(st, co, cli.t_final, cli.dt);
    std::vector<std::vector<Real>> rows;
    for (const auto& pt : tr.series)
        rows.push_back({pt.time, pt.A_l2, pt.A_h1, pt.B_l2, pt.mass_B, pt.E});
    write_csv((fs::path(cli.out_dir) / "trajectory.csv").string(),
              {"T", "A_l2", "A_h1", "B_l2", "mass_B", "E"}, rows);
    return 0;
}

int cmd_bloch(const Cli& cli) {
    Pipeline p = run_pipeline(resolve_model(cli.model_path));
    TravelingWave w = newton_wave(p.model.symbol, p.model.nonlinearity, p.crit, p.psi,
                                  p.coeffs, cli.eps, cli.kappa, Vec());
    const Real smax = cli.sigma_max > 0 ? cli.sigma_max : cli.eps * cli.eps;
    std::vector<Real> sg = linspace(-smax, smax, 21);
    if (std::none_of(sg.begin(), sg.end(), [](Real s) { return s == 0.0; })) sg.push_back(0.0);
    std::sort(sg.begin(), sg.end());
    SpectralMatchReport rep = spectral_match(p.model.symbol, p.model.nonlinearity, p.crit,
                                             p.psi, p.coeffs, w, sg);
    std::vector<std::vector<Real>> rows;
    for (const auto& r : rep.rows) {
        std::vector<Real> row{r.sigma};
        for (const auto& ev : r.bloch) {
            row.push_back(ev.real());
            row.push_back(ev.imag());
        }
        rows.push_back(row);
    }
    write_csv((fs::path(cli.out_dir) / "bloch.csv").string(),
              {"sigma", "re_l1", "im_l1", "re_l2", "im_l2", "re_l3", "im_l3"}, rows);
    std::cout << "max |lambda_Bloch - Lambda_M| / eps^2 = " << rep.max_mismatch << "\n";
    std::cout << "sigma=0 stable small-eigenvalue relative gap = " << rep.sigma0_gap << "\n";
    return 0;
}

int sign_class(Real mu_t_min) { return mu_t_min < -1e-9 ? -1 : +1; }

int cmd_appendix_b(const Cli& cli) {
    const std::vector<std::pair<Complex, Complex>> degenerate = {
        {{-3, 3}, {1, -1}}, {{-3, 3}, {-1, 1}},
        {{-3, 2}, {-1, 2.0 / 3}}, {{-3, 2}, {1, -2.0 / 3}}};
    const std::vector<std::pair<Complex, Complex>> generic = {
        {{-3, 2}, {1, -1}}, {{-3, 2}, {-1, 1}}, {{-3, 2}, {1, 1}}, {{-3, 2}, {-1, -1}}};

    ScalarCoeffs base;
    base.a = Complex(1, 1);
    base.b = Complex(1, 0);
    base.f = 1;
    base.h = 2;
    const Real eps = cli.eps;

    // stability diagrams for all eight cases
    int idx = 0;
    std::vector<std::pair<Complex, Complex>> all = degenerate;
    all.insert(all.end(), generic.begin(), generic.end());
    for (const auto& cd : all) {
        ScalarCoeffs co = base;
        co.c = cd.first;
        co.d = cd.second;
        ScanOptions opt;
        auto rows = scan_stability(co, eps, opt);
        std::vector<std::vector<Real>> csv;
        SvgSeries sS{"S(kappa,10eps)", "#1f77b4", {}, {}}, sD{"S_D(kappa)", "#2ca02c", {}, {}};
        for (const auto& r : rows) {
            csv.push_back({r.kappa, r.S, r.SD});
            sS.x.push_back(r.kappa);
            sS.y.push_back(r.S);
            sD.x.push_back(r.kappa);
            sD.y.push_back(r.SD);
        }
        std::ostringstream stem;
        stem << "diagram_case" << ++idx;
        write_csv((fs::path(cli.out_dir) / (stem.str() + ".csv")).string(),
                  {"kappa", "S", "S_D"}, csv);
        std::ostringstream title;
        title << "c = " << cd.first.real() << (cd.first.imag() >= 0 ? "+" : "")
              << cd.first.imag() << "i, d = " << cd.second.real()
              << (cd.second.imag() >= 0 ? "+" : "") << cd.second.imag() << "i";
        write_svg_plot((fs::path(cli.out_dir) / (stem.str() + ".svg")).string(), {sS, sD},
                       title.str());
    }

    // sign table over the four degenerate cases: mu_t classified by its
    // minimum over the kappa range, mu_c by the (kappa-independent) leading term
    std::ostringstream table;
    table << "c_re,c_im,d_re,d_im,sign_mu_t,sign_mu_c\n";
    std::map<std::pair<int, int>, std::string> quadrant;
    for (const auto& cd : degenerate) {
        ScalarCoeffs co = base;
        co.c = cd.first;
        co.d = cd.second;
        WaveParams w0 = wave_family(co, 0.0, 0.0);
        const Real kE = std::sqrt(w0.kappaE2);
        Real mu_t_min = 1e300;
        for (int i = 0; i <= 40; ++i) {
            const Real kap = 0.9 * kE * i / 40.0;
            WaveParams w = wave_family(co, kap, 0.0);
            NeutralExpansion ne = neutral_expansion(co, w, eps);
            mu_t_min = std::min(mu_t_min, ne.mu_t.real());
        }
        WaveParams wh = wave_family(co, kE / 2, 0.0);
        NeutralExpansion neh = neutral_expansion(co, wh, eps);
        const int st = sign_class(mu_t_min);
        const int sc = neh.mu_c_leading < 0 ? -1 : +1;
        table << cd.first.real() << "," << cd.first.imag() << "," << cd.second.real() << ","
              << cd.second.imag() << "," << st << "," << sc << "\n";
        std::ostringstream cell;
        cell << "(c,d)=(" << cd.first.real() << (cd.first.imag() >= 0 ? "+" : "")
             << cd.first.imag() << "i," << cd.second.real()
             << (cd.second.imag() >= 0 ? "+" : "") << cd.second.imag() << "i)";
        quadrant[{st, sc}] = cell.str();
    }
    write_text(fs::path(cli.out_dir) / "sign_table.csv", table.str());

    std::ostringstream pretty;
    pretty << "           | mu_c<0                     | mu_c>0\n";
    pretty << "  mu_t<0   | " << quadrant[{-1, -1}] << " | " << quadrant[{-1, 1}] << "\n";
    pretty << "  mu_t>0   | " << quadrant[{1, -1}] << " | " << quadrant[{1, 1}] << "\n";
    write_text(fs::path(cli.out_dir) / "sign_table.txt", pretty.str());
    std::cout << pretty.str();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"amplitude-system toolkit for convective Turing bifurcations"};
    Cli cli;
    app.add_option("command", cli.command,
                   "analyze | coeffs | wave | stability | scan | simulate | bloch | appendix-b")
        ->required();
    app.add_option("--model", cli.model_path, "model JSON path or builtin name");
    app.add_option("--out", cli.out_dir, "output directory");
    app.add_option("--eps", cli.eps, "singular parameter");
    app.add_option("--kappa", cli.kappa, "wave number of the background wave");
    app.add_option("--rho", cli.rho, "sigma scan radius");
    app.add_option("--sigma-max", cli.sigma_max, "Bloch exponent range");
    app.add_option("--grid-n", cli.grid_n, "grid points");
    app.add_option("--dt", cli.dt, "time step");
    app.add_option("--t-final", cli.t_final, "final time");
    app.add_option("--set", cli.overrides, "coefficient override key=value (repeatable)");
    app.add_option("--seed", cli.seed, "seed for randomized property checks");
    CLI11_PARSE(app, argc, argv);

    try {
        fs::create_directories(cli.out_dir);
        if (cli.command == "analyze") return cmd_analyze(cli);
        if (cli.command == "coeffs") return cmd_coeffs(cli);
        if (cli.command == "wave") return cmd_wave(cli);
        if (cli.command == "stability") return cmd_stability(cli);
        if (cli.command == "scan") return cmd_scan(cli);
        if (cli.command == "simulate") return cmd_simulate(cli);
        if (cli.command == "bloch") return cmd_bloch(cli);
        if (cli.command == "appendix-b") return cmd_appendix_b(cli);
        std::cerr << "unknown command: " << cli.command << "\n";
        return 1;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
