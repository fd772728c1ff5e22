#pragma once

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gsreg/dataset.hpp"
#include "gsreg/diagnostics.hpp"
#include "gsreg/regression.hpp"

namespace gsreg {

enum class OutputFormat { tsv, csv, json };

inline OutputFormat parse_format(const std::string& s) {
    if (s == "tsv") return OutputFormat::tsv;
    if (s == "csv") return OutputFormat::csv;
    if (s == "json") return OutputFormat::json;
    throw InvalidScenario("unknown format '" + s + "' (expected tsv, csv, or json)");
}

// p-values in scientific notation with 3 significant digits below 1e-3,
// fixed 4 decimals otherwise.
inline std::string pvalue_string(double p) {
    char buf[32];
    if (p < 1e-3)
        std::snprintf(buf, sizeof buf, "%.2e", p);
    else
        std::snprintf(buf, sizeof buf, "%.4f", p);
    return buf;
}

inline std::string num_string(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct GsAnalysis {
    FitResult fit;                        // GS fit, coefficients in fit order
    DeltaReport diag;                     // empirical-basis Delta, VIF, CN
    std::vector<std::string> order_names; // variable names in fit order
    bool centered = false;
    bool scaled = false;
};

// The end-to-end workflow for a dataset: optionally center/scale, run the
// GS regression in the requested variable order, and attach the
// multicollinearity block (empirical Delta, VIF, condition number).
inline GsAnalysis run_gs_analysis(const Dataset& ds, std::vector<std::string> order,
                                  bool center = true, bool scale = false) {
    if (order.empty()) order = ds.predictor_names;
    std::vector<Index> order_idx;
    order_idx.reserve(order.size());
    for (const auto& name : order) {
        const auto it = std::find(ds.predictor_names.begin(), ds.predictor_names.end(), name);
        if (it == ds.predictor_names.end())
            throw MissingColumn("ordering references unknown predictor '" + name + "'");
        order_idx.push_back(static_cast<Index>(it - ds.predictor_names.begin()));
    }

    DesignMatrix design = preprocess(dataset_design(ds), center, scale);
    VectorX<double> y = center ? center_response(ds.response) : ds.response;

    GsAnalysis out;
    out.centered = center;
    out.scaled = scale;
    out.order_names = std::move(order);
    out.fit = gs_fit(design, y, std::move(order_idx));
    out.diag = delta_report(design, *out.fit.decomp, out.fit.coef, DeltaBasis::estimated);
    return out;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------
namespace detail {

inline std::string join_row(const std::vector<std::string>& cells, char sep) {
    std::string out;
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) out += sep;
        out += cells[i];
    }
    out += '\n';
    return out;
}

} // namespace detail

// Coefficient table for any fit. `names` must be in the fit's own
// coefficient order (the requested ordering for a GS fit).
inline std::string render_fit_table(const FitResult& fit, const std::vector<std::string>& names,
                                    OutputFormat format) {
    if (format == OutputFormat::json) {
        nlohmann::json j;
        j["model"] = model_kind_name(fit.model_kind);
        j["sse"] = fit.sse;
        j["df_resid"] = fit.df_resid;
        j["sigma_hat2"] = fit.sigma_hat2;
        if (fit.model_kind == ModelKind::ridge) j["ridge_k"] = fit.ridge_k;
        auto& coefs = j["coefficients"] = nlohmann::json::array();
        for (Index i = 0; i < fit.coef.size(); ++i) {
            coefs.push_back({{"variable", names[static_cast<size_t>(i)]},
                             {"estimate", fit.coef[i]},
                             {"se", fit.se[i]},
                             {"t", fit.t_stat[i]},
                             {"p_one_sided", fit.p_one_sided[i]},
                             {"p_two_sided", fit.p_two_sided[i]}});
        }
        if (fit.alpha_hat) {
            auto& a = j["alpha_hat"] = nlohmann::json::array();
            for (Index i = 0; i < fit.alpha_hat->size(); ++i) a.push_back((*fit.alpha_hat)[i]);
        }
        return j.dump(2) + "\n";
    }

    const char sep = format == OutputFormat::tsv ? '\t' : ',';
    std::string out = detail::join_row(
        {"variable", "estimate", "se", "t", "p_one_sided", "p_two_sided"}, sep);
    for (Index i = 0; i < fit.coef.size(); ++i) {
        out += detail::join_row({names[static_cast<size_t>(i)], num_string(fit.coef[i]),
                                 num_string(fit.se[i]), num_string(fit.t_stat[i]),
                                 pvalue_string(fit.p_one_sided[i]),
                                 pvalue_string(fit.p_two_sided[i])},
                                sep);
    }
    char tail[160];
    std::snprintf(tail, sizeof tail, "# sse=%.10g df_resid=%lld sigma_hat2=%.10g",
                  fit.sse, static_cast<long long>(fit.df_resid), fit.sigma_hat2);
    out += tail;
    if (fit.model_kind == ModelKind::ridge) {
        char kbuf[48];
        std::snprintf(kbuf, sizeof kbuf, " k=%.10g", fit.ridge_k);
        out += kbuf;
    }
    out += '\n';
    return out;
}

// Delta/VIF/condition-number block. `names` in decomposition order.
inline std::string render_diag_table(const DeltaReport& rep, const std::vector<std::string>& names,
                                     OutputFormat format) {
    if (format == OutputFormat::json) {
        nlohmann::json j;
        j["condition_number"] = rep.condition_number;
        j["collinearity"] = collinearity_flag(rep.condition_number);
        j["basis"] = rep.basis == DeltaBasis::estimated ? "estimated" : "true_beta";
        auto& rows = j["per_variable"] = nlohmann::json::array();
        for (const auto& r : rep.per_variable) {
            nlohmann::json row = {{"variable", names[static_cast<size_t>(r.index)]},
                                  {"vif", r.vif}};
            if (r.defined)
                row["delta"] = r.delta;
            else
                row["delta"] = r.delta > 0 ? "+inf" : "-inf";
            rows.push_back(row);
        }
        return j.dump(2) + "\n";
    }

    const char sep = format == OutputFormat::tsv ? '\t' : ',';
    std::string out = detail::join_row({"variable", "delta", "vif"}, sep);
    for (const auto& r : rep.per_variable) {
        const std::string d = r.defined ? num_string(r.delta) : (r.delta > 0 ? "+inf" : "-inf");
        out += detail::join_row({names[static_cast<size_t>(r.index)], d, num_string(r.vif)}, sep);
    }
    char tail[160];
    std::snprintf(tail, sizeof tail, "# condition_number=%.6g (%s) basis=%s",
                  rep.condition_number, collinearity_flag(rep.condition_number),
                  rep.basis == DeltaBasis::estimated ? "estimated" : "true_beta");
    out += tail;
    out += '\n';
    return out;
}

inline std::string render_gs_analysis(const GsAnalysis& a, OutputFormat format) {
    if (format == OutputFormat::json) {
        nlohmann::json j = nlohmann::json::parse(render_fit_table(a.fit, a.order_names, format));
        j["diagnostics"] =
            nlohmann::json::parse(render_diag_table(a.diag, a.order_names, format));
        j["centered"] = a.centered;
        j["scaled"] = a.scaled;
        return j.dump(2) + "\n";
    }
    return render_fit_table(a.fit, a.order_names, format) +
           render_diag_table(a.diag, a.order_names, format);
}

} // namespace gsreg
