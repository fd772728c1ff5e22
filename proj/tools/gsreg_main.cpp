// gsreg: Gram-Schmidt / naive / ridge regression toolkit with
// multicollinearity diagnostics and power analysis.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gsreg/dataset.hpp"
#include "gsreg/diagnostics.hpp"
#include "gsreg/power.hpp"
#include "gsreg/report.hpp"

namespace {

using namespace gsreg;

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            out.push_back(detail::trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!detail::trim(cur).empty() || !out.empty()) out.push_back(detail::trim(cur));
    return out;
}

std::vector<double> split_doubles(const std::string& s) {
    std::vector<double> out;
    for (const auto& tok : split_list(s)) {
        try {
            size_t pos = 0;
            const double v = std::stod(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument(tok);
            out.push_back(v);
        } catch (const std::exception&) {
            throw InvalidScenario("cannot parse number '" + tok + "' in list '" + s + "'");
        }
    }
    return out;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw InvalidScenario("cannot open output file: " + out_path);
    f << text;
}

int env_workers() {
    const char* raw = std::getenv("GSREG_WORKERS");
    if (!raw || !*raw) return 0;
    try {
        return std::max(0, std::stoi(raw));
    } catch (const std::exception&) {
        return 0;
    }
}

enum class Alt { greater, less, two_sided };

Alt parse_alt(const std::string& s) {
    if (s == "greater") return Alt::greater;
    if (s == "less") return Alt::less;
    if (s == "two-sided") return Alt::two_sided;
    throw InvalidScenario("unknown alternative '" + s + "'");
}

// Re-point the one-sided column at the requested alternative.
FitResult apply_alt(FitResult fit, Alt alt) {
    if (alt == Alt::less)
        for (Index i = 0; i < fit.p_one_sided.size(); ++i)
            fit.p_one_sided[i] = 1.0 - fit.p_one_sided[i];
    else if (alt == Alt::two_sided)
        fit.p_one_sided = fit.p_two_sided;
    return fit;
}

struct TableBuilder {
    std::vector<std::string> headers;
    std::vector<std::vector<std::string>> rows;

    std::string render(OutputFormat format) const {
        if (format == OutputFormat::json) {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& row : rows) {
                nlohmann::json obj;
                for (size_t i = 0; i < headers.size(); ++i) obj[headers[i]] = row[i];
                arr.push_back(obj);
            }
            return arr.dump(2) + "\n";
        }
        const char sep = format == OutputFormat::tsv ? '\t' : ',';
        std::string out = detail::join_row(headers, sep);
        for (const auto& row : rows) out += detail::join_row(row, sep);
        return out;
    }
};

ModelSet parse_models(const std::string& s) {
    ModelSet m{false, false, false};
    for (const auto& tok : split_list(s)) {
        if (tok == "naive")
            m.naive = true;
        else if (tok == "gs")
            m.gs = true;
        else if (tok == "ridge")
            m.ridge = true;
        else
            throw InvalidScenario("unknown model '" + tok + "' (expected naive, gs, ridge)");
    }
    if (!m.naive && !m.gs && !m.ridge) throw InvalidScenario("empty model list");
    return m;
}

// Built-in two-predictor pilot on an orthonormal pair: m1 = u1 and
// m2 = rho*u1 + sqrt(1-rho^2)*u2, with alpha chosen so Delta_1 hits the
// requested value exactly.
std::pair<DesignMatrix, VectorX<double>> construct_pilot(double delta_target, double rho,
                                                         Index n0) {
    if (n0 < 4 || n0 % 2 != 0) throw InvalidScenario("pilot size must be even and >= 4");
    if (!(rho > -1.0 && rho < 1.0) || rho == 0.0)
        throw InvalidScenario("pilot rho must lie in (-1, 1) and be nonzero");
    const double s = std::sqrt(1.0 - rho * rho);
    const double r = (delta_target * s - 1.0) / rho; // alpha2 / alpha1
    MatrixX<double> m(n0, 2);
    const double inv = 1.0 / std::sqrt(static_cast<double>(n0));
    for (Index i = 0; i < n0; ++i) {
        const double u1 = inv;
        const double u2 = (i % 2 == 0 ? inv : -inv);
        m(i, 0) = u1;
        m(i, 1) = rho * u1 + s * u2;
    }
    VectorX<double> alpha(2);
    alpha << 1.0, r;
    return {make_design(std::move(m), {"m1", "m2"}), std::move(alpha)};
}

int run(int argc, char** argv) {
    CLI::App app{
        "Gram-Schmidt regression toolkit: exact coefficient t-tests for the GS, "
        "naive (OLS), and ridge models, multicollinearity diagnostics (VIF, "
        "condition number, Delta), and Monte Carlo / analytic power tools."};
    app.require_subcommand(1);

    // common option state
    std::string data_path, response, predictors_csv, order_csv, out_path;
    std::string format_s = "tsv", alt_s = "greater";
    bool center = true, scale = false;

    auto add_common = [&](CLI::App* cmd, bool scale_default) {
        cmd->add_option("--data", data_path, "input CSV file")->required();
        cmd->add_option("--response", response, "response column name")->required();
        cmd->add_option("--predictors", predictors_csv,
                        "comma-separated predictor columns (default: all others)");
        cmd->add_flag("--center,!--no-center", center, "center response and predictors");
        cmd->add_flag("--scale,!--no-scale", scale, "scale predictors to unit sd");
        cmd->add_option("--alt", alt_s, "alternative: greater, less, two-sided")
            ->check(CLI::IsMember({"greater", "less", "two-sided"}));
        cmd->add_option("--out", out_path, "write output to file instead of stdout");
        cmd->add_option("--format", format_s, "output format")
            ->check(CLI::IsMember({"tsv", "csv", "json"}));
        scale = scale_default;
    };

    auto* cmd_fit = app.add_subcommand("fit", "naive multiple regression (OLS) t-tests");
    add_common(cmd_fit, false);

    auto* cmd_gs = app.add_subcommand("gs", "Gram-Schmidt regression in a chosen order");
    add_common(cmd_gs, false);
    cmd_gs->add_option("--order", order_csv,
                       "comma-separated variable order (default: file order)");

    std::string ridge_k_s = "auto";
    auto* cmd_ridge = app.add_subcommand("ridge", "ridge regression t-tests");
    add_common(cmd_ridge, false);
    cmd_ridge->add_option("--k", ridge_k_s, "ridge constant: 'auto' or a value >= 0");

    std::string beta_csv;
    auto* cmd_diag = app.add_subcommand("diag", "VIF / condition number / Delta report");
    add_common(cmd_diag, false);
    cmd_diag->add_option("--order", order_csv, "variable order for the decomposition");
    cmd_diag->add_option("--beta", beta_csv,
                         "true GS-basis coefficients for planning-mode Delta "
                         "(default: estimated from the fit)");

    // power
    double rho = 0.5, level = 0.05, sigma = 1.0;
    int sc_p = 15, sc_n = 200, reps = 1000;
    std::uint64_t seed = 1;
    std::string sigma_grid_s, models_s = "naive,gs,ridge";
    bool null_mode = false;
    auto* cmd_power = app.add_subcommand("power", "Monte Carlo power across a sigma grid");
    cmd_power->add_option("--rho", rho, "correlation knob of the generator");
    cmd_power->add_option("--sigma-grid", sigma_grid_s,
                          "comma-separated sigma values (default: 12/g for g=1..12)");
    cmd_power->add_option("--p", sc_p, "number of predictors");
    cmd_power->add_option("--n", sc_n, "sample size per replicate");
    cmd_power->add_option("--reps", reps, "Monte Carlo replicates per grid point");
    cmd_power->add_option("--seed", seed, "RNG seed");
    cmd_power->add_option("--level", level, "test level");
    cmd_power->add_option("--models", models_s, "subset of naive,gs,ridge");
    cmd_power->add_flag("--null", null_mode, "null mode: variable 1 dropped from the mean");
    cmd_power->add_option("--out", out_path, "also write long-format plot-data CSV here");
    cmd_power->add_option("--format", format_s, "stdout format")
        ->check(CLI::IsMember({"tsv", "csv", "json"}));

    // power-analytic
    std::string pa_model_s = "B";
    double pa_effect = 0.0, pa_qnorm = 1.0;
    auto* cmd_pa = app.add_subcommand("power-analytic",
                                      "noncentral-t analytic power for models A and B");
    cmd_pa->add_option("--model", pa_model_s, "A (naive) or B (GS)")
        ->check(CLI::IsMember({"A", "B", "a", "b"}));
    cmd_pa->add_option("--effect", pa_effect, "coefficient value (alpha_i for A, beta_i for B)")
        ->required();
    cmd_pa->add_option("--sigma-grid", sigma_grid_s,
                       "comma-separated sigma values (default: 12/g for g=1..12)");
    cmd_pa->add_option("--qnorm", pa_qnorm, "||q_i|| of the tested variable (model A)");
    cmd_pa->add_option("--n", sc_n, "sample size");
    cmd_pa->add_option("--p", sc_p, "number of predictors");
    cmd_pa->add_option("--level", level, "test level");
    cmd_pa->add_option("--out", out_path, "write output to file instead of stdout");
    cmd_pa->add_option("--format", format_s, "output format")
        ->check(CLI::IsMember({"tsv", "csv", "json"}));

    // samplesize
    double ss_delta = 1.0;
    int ss_nb = 100;
    auto* cmd_ss = app.add_subcommand(
        "samplesize", "naive-model sample size matching GS power: n_A = Delta^2 n_B");
    cmd_ss->add_option("--delta", ss_delta, "Delta for the tested variable")->required();
    cmd_ss->add_option("--n-b", ss_nb, "GS-model sample size n_B")->required();
    cmd_ss->add_option("--out", out_path, "write output to file instead of stdout");
    cmd_ss->add_option("--format", format_s, "output format")
        ->check(CLI::IsMember({"tsv", "csv", "json"}));

    // stacked-check
    double st_delta = 2.0, st_rho = 0.5, st_sigma = 2.5;
    int st_n0 = 6, st_reps = 4000;
    std::string k_grid_s = "1,2,4,8,16";
    auto* cmd_st = app.add_subcommand(
        "stacked-check", "stacked-design power-equivalence experiment (n_A = Delta^2 n_B)");
    cmd_st->add_option("--delta", st_delta, "target Delta of the constructed pilot");
    cmd_st->add_option("--rho-pilot", st_rho, "pilot collinearity in (-1,1), nonzero");
    cmd_st->add_option("--n0", st_n0, "pilot rows (even, >= 4)");
    cmd_st->add_option("--sigma", st_sigma, "noise scale");
    cmd_st->add_option("--k-grid", k_grid_s, "comma-separated stack factors");
    cmd_st->add_option("--reps", st_reps, "Monte Carlo replicates per arm");
    cmd_st->add_option("--seed", seed, "RNG seed");
    cmd_st->add_option("--level", level, "test level");
    cmd_st->add_option("--out", out_path, "write output to file instead of stdout");
    cmd_st->add_option("--format", format_s, "output format")
        ->check(CLI::IsMember({"tsv", "csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    const OutputFormat format = parse_format(format_s);
    const Alt alt = parse_alt(alt_s);

    auto load = [&]() {
        std::vector<std::string> preds =
            predictors_csv.empty() ? std::vector<std::string>{} : split_list(predictors_csv);
        return ingest_csv(data_path, response, std::move(preds));
    };

    if (*cmd_fit) {
        const Dataset ds = load();
        DesignMatrix design = preprocess(dataset_design(ds), center, scale);
        const VectorX<double> y = center ? center_response(ds.response) : ds.response;
        const FitResult fit = apply_alt(ols_fit(design, y), alt);
        emit(render_fit_table(fit, ds.predictor_names, format), out_path);
    } else if (*cmd_gs) {
        const Dataset ds = load();
        const auto order = order_csv.empty() ? std::vector<std::string>{} : split_list(order_csv);
        GsAnalysis analysis = run_gs_analysis(ds, order, center, scale);
        analysis.fit = apply_alt(std::move(analysis.fit), alt);
        emit(render_gs_analysis(analysis, format), out_path);
    } else if (*cmd_ridge) {
        const Dataset ds = load();
        DesignMatrix design = preprocess(dataset_design(ds), center, scale);
        const VectorX<double> y = center ? center_response(ds.response) : ds.response;
        double k;
        if (ridge_k_s == "auto") {
            k = ridge_k_auto(design, y);
        } else {
            try {
                k = std::stod(ridge_k_s);
            } catch (const std::exception&) {
                throw InvalidScenario("--k must be 'auto' or a number, got '" + ridge_k_s + "'");
            }
        }
        const FitResult fit = apply_alt(ridge_fit(design, y, k), alt);
        emit(render_fit_table(fit, ds.predictor_names, format), out_path);
    } else if (*cmd_diag) {
        const Dataset ds = load();
        const auto order = order_csv.empty() ? std::vector<std::string>{} : split_list(order_csv);
        GsAnalysis analysis = run_gs_analysis(ds, order, center, scale);
        if (!beta_csv.empty()) {
            const auto beta_vals = split_doubles(beta_csv);
            if (static_cast<Index>(beta_vals.size()) != analysis.fit.coef.size())
                throw InvalidScenario("--beta length must match predictor count");
            VectorX<double> beta(static_cast<Index>(beta_vals.size()));
            for (size_t i = 0; i < beta_vals.size(); ++i)
                beta[static_cast<Index>(i)] = beta_vals[i];
            DesignMatrix design = preprocess(dataset_design(ds), center, scale);
            analysis.diag = delta_report(design, *analysis.fit.decomp, beta,
                                         DeltaBasis::true_beta);
        }
        emit(render_diag_table(analysis.diag, analysis.order_names, format), out_path);
    } else if (*cmd_power) {
        PowerScenario sc;
        sc.rho = rho;
        sc.p = sc_p;
        sc.n = sc_n;
        sc.replicates = reps;
        sc.level = level;
        sc.seed = seed;
        sc.models = parse_models(models_s);
        sc.null_mode = null_mode;
        const auto sigmas =
            sigma_grid_s.empty() ? default_sigma_grid() : split_doubles(sigma_grid_s);
        const auto grid = run_power_grid(sc, sigmas, env_workers());

        TableBuilder tb;
        tb.headers = {"rho",   "p",     "n",     "reps",  "level",      "model",
                      "sigma", "inv_sigma", "power", "mc_se", "mean_delta", "mean_vif"};
        char buf[64];
        auto fmt = [&buf](const char* f, double v) {
            std::snprintf(buf, sizeof buf, f, v);
            return std::string(buf);
        };
        for (const auto& pt : grid) {
            for (const auto& mp : pt.result.per_model) {
                tb.rows.push_back({fmt("%g", sc.rho), std::to_string(sc.p),
                                   std::to_string(sc.n), std::to_string(sc.replicates),
                                   fmt("%g", sc.level), model_kind_name(mp.model),
                                   fmt("%.10g", pt.sigma), fmt("%.10g", pt.inv_sigma),
                                   fmt("%.6f", mp.empirical_power), fmt("%.6f", mp.mc_se),
                                   fmt("%.6g", pt.result.mean_delta_hat),
                                   fmt("%.6g", pt.result.mean_vif)});
            }
        }
        std::cout << tb.render(format);
        if (!out_path.empty()) emit(tb.render(OutputFormat::csv), out_path);
    } else if (*cmd_pa) {
        const PowerModel model =
            (pa_model_s == "A" || pa_model_s == "a") ? PowerModel::A : PowerModel::B;
        const auto sigmas =
            sigma_grid_s.empty() ? default_sigma_grid() : split_doubles(sigma_grid_s);
        TableBuilder tb;
        tb.headers = {"model", "effect", "qnorm", "n", "p", "level", "sigma", "inv_sigma",
                      "power"};
        char buf[64];
        auto fmt = [&buf](const char* f, double v) {
            std::snprintf(buf, sizeof buf, f, v);
            return std::string(buf);
        };
        for (const double sg : sigmas) {
            const double pw = analytic_power(model, pa_effect, sg, pa_qnorm, sc_n, sc_p, level);
            tb.rows.push_back({model == PowerModel::A ? "A" : "B", fmt("%.10g", pa_effect),
                               fmt("%.10g", pa_qnorm), std::to_string(sc_n),
                               std::to_string(sc_p), fmt("%g", level), fmt("%.10g", sg),
                               fmt("%.10g", 1.0 / sg), fmt("%.10f", pw)});
        }
        emit(tb.render(format), out_path);
    } else if (*cmd_ss) {
        const double n_a = equivalent_sample_size(ss_delta, ss_nb);
        TableBuilder tb;
        tb.headers = {"delta", "n_b", "n_a_exact", "n_a_rounded_up", "ratio"};
        char buf[64];
        auto fmt = [&buf](const char* f, double v) {
            std::snprintf(buf, sizeof buf, f, v);
            return std::string(buf);
        };
        tb.rows.push_back({fmt("%.10g", ss_delta), std::to_string(ss_nb), fmt("%.10g", n_a),
                           std::to_string(static_cast<long long>(std::ceil(n_a))),
                           fmt("%.10g", ss_delta * ss_delta)});
        emit(tb.render(format), out_path);
    } else if (*cmd_st) {
        auto [pilot, alpha] = construct_pilot(st_delta, st_rho, st_n0);
        std::vector<Index> k_grid;
        for (const double v : split_doubles(k_grid_s))
            k_grid.push_back(static_cast<Index>(std::llround(v)));
        const auto rows = stacked_power_experiment(pilot, alpha, st_sigma, st_delta, k_grid,
                                                   level, st_reps, seed);
        TableBuilder tb;
        tb.headers = {"k", "n_a", "n_b", "power_a", "power_b", "gap", "combined_se"};
        char buf[64];
        auto fmt = [&buf](const char* f, double v) {
            std::snprintf(buf, sizeof buf, f, v);
            return std::string(buf);
        };
        for (const auto& r : rows) {
            tb.rows.push_back({std::to_string(static_cast<long long>(r.k)),
                               std::to_string(static_cast<long long>(r.n_a)),
                               std::to_string(static_cast<long long>(r.n_b)),
                               fmt("%.6f", r.power_a), fmt("%.6f", r.power_b),
                               fmt("%.6f", r.gap), fmt("%.6f", r.combined_se)});
        }
        emit(tb.render(format), out_path);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const gsreg::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const gsreg::NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
