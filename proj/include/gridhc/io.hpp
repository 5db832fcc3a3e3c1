#pragma once

// Study-result serialization. CSV floats are printed with %.17g so re-parsing
// restores every double bit for bit. The sample file carries no timing data;
// two runs of the same study serialize to identical bytes.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridhc/errors.hpp"
#include "gridhc/hostcap.hpp"

namespace gridhc {

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorCode::io, "cannot open \"" + path + "\" for reading");
    std::ostringstream body;
    body << in.rdbuf();
    require(!in.bad(), ErrorCode::io, "read failure on \"" + path + "\"");
    return body.str();
}

inline void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorCode::io, "cannot open \"" + path + "\" for writing");
    out << body;
    out.flush();
    require(out.good(), ErrorCode::io, "write failure on \"" + path + "\"");
}

/// Shortest exact decimal form: strtod(format_double(v)) == v.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline nlohmann::ordered_json finite_or_null(double v) {
    if (std::isinf(v)) return nullptr;
    return v;
}

inline std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Sample file (one study, JSON)
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json samples_to_json(const HcSampleSet& samples,
                                              const std::vector<double>& eps_list,
                                              double base_power_kva) {
    using json = nlohmann::ordered_json;
    json doc;
    doc["format"] = "gridhc-samples/1";
    doc["method"] = method_name(Method::fixed_voltage);
    doc["feeder"] = samples.meta.feeder_id;
    doc["seed"] = samples.meta.seed;
    doc["v_plus_pu"] = samples.meta.v_plus;
    doc["base_power_kva"] = base_power_kva;
    doc["n_mc"] = samples.n_mc();
    doc["n_gen"] = samples.n_gen;
    doc["n_lds"] = samples.n_lds;
    doc["n_pen"] = penetration(samples.n_gen, samples.n_lds);
    doc["unbounded_count"] = samples.unbounded_count;

    json ests = json::array();
    for (double eps : eps_list) {
        HcEstimate e = estimate_phi_eps(samples, eps);
        json je;
        je["epsilon"] = eps;
        je["unbounded"] = e.unbounded;
        je["phi_per_gen_pu"] = detail::finite_or_null(e.phi_eps_per_gen);
        je["phi_total_pu"] = detail::finite_or_null(e.phi_eps_total);
        je["phi_per_gen_kw"] = detail::finite_or_null(e.phi_eps_per_gen * base_power_kva);
        je["phi_total_kw"] = detail::finite_or_null(e.phi_eps_total * base_power_kva);
        ests.push_back(je);
    }
    doc["estimates"] = ests;

    // Unbounded scenarios serialize as null; unbounded_count above says how many.
    json arr = json::array();
    for (double v : samples.p_gen_max) arr.push_back(detail::finite_or_null(v));
    doc["p_gen_max_pu"] = arr;
    return doc;
}

inline nlohmann::ordered_json estimate_to_json(const HcEstimate& est, const StudyMeta& meta,
                                               double base_power_kva, int n_mc, int n_lds,
                                               double tau, const Bracket& bracket) {
    using json = nlohmann::ordered_json;
    json doc;
    doc["format"] = "gridhc-samples/1";
    doc["method"] = method_name(est.method);
    doc["feeder"] = meta.feeder_id;
    doc["seed"] = meta.seed;
    doc["v_plus_pu"] = meta.v_plus;
    doc["base_power_kva"] = base_power_kva;
    doc["n_mc"] = n_mc;
    doc["n_gen"] = est.n_gen;
    doc["n_lds"] = n_lds;
    doc["n_pen"] = penetration(est.n_gen, n_lds);
    doc["epsilon"] = est.epsilon;
    doc["tau"] = tau;
    doc["bracket"] = {{"p0_pu", bracket.p0}, {"p1_pu", bracket.p1}, {"doublings", bracket.doublings}};
    doc["iterations"] = est.iterations;
    doc["converged"] = est.converged;
    doc["phi_per_gen_pu"] = detail::finite_or_null(est.phi_eps_per_gen);
    doc["phi_total_pu"] = detail::finite_or_null(est.phi_eps_total);
    doc["phi_per_gen_kw"] = detail::finite_or_null(est.phi_eps_per_gen * base_power_kva);
    doc["phi_total_kw"] = detail::finite_or_null(est.phi_eps_total * base_power_kva);
    json steps = json::array();
    for (const auto& st : est.steps)
        steps.push_back({{"p_total_pu", st.p_total}, {"eps_hat", st.eps_hat}});
    doc["steps"] = steps;
    return doc;
}

// ---------------------------------------------------------------------------
// summary.csv
// ---------------------------------------------------------------------------

struct SummaryCsvRow {
    int n_gen = 0;
    double n_pen = 0.0;
    std::string stat;
    double phi_total_kw = 0.0;
    double phi_per_gen_kw = 0.0;

    bool operator==(const SummaryCsvRow&) const = default;
};

inline std::vector<SummaryCsvRow> summary_rows(const DistributionSummary& summary,
                                               double base_power_kva) {
    std::vector<SummaryCsvRow> rows;
    for (const auto& st : summary.rows) {
        auto add = [&](const std::string& stat, double per_gen_pu) {
            double per_gen_kw = per_gen_pu * base_power_kva;
            rows.push_back({st.n_gen, st.n_pen, stat, st.n_gen * per_gen_kw, per_gen_kw});
        };
        add("min", st.min);
        add("q1", st.q1);
        add("median", st.median);
        add("q3", st.q3);
        add("max", st.max);
        for (std::size_t i = 0; i < summary.eps_list.size(); ++i)
            add("phi_" + detail::short_number(summary.eps_list[i]), st.phi_eps_per_gen[i]);
    }
    return rows;
}

inline std::string summary_csv_header() {
    return "n_gen,n_pen,stat_name,phi_total_kw,phi_per_gen_kw";
}

inline std::string summary_to_csv(const std::vector<SummaryCsvRow>& rows) {
    std::string out = summary_csv_header() + "\n";
    for (const auto& r : rows) {
        out += std::to_string(r.n_gen);
        out += ',';
        out += format_double(r.n_pen);
        out += ',';
        out += r.stat;
        out += ',';
        out += format_double(r.phi_total_kw);
        out += ',';
        out += format_double(r.phi_per_gen_kw);
        out += '\n';
    }
    return out;
}

namespace detail {

inline std::vector<std::string> split_line(const std::string& line, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

inline double parse_double(const std::string& s, const std::string& where) {
    const char* begin = s.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    require(end == begin + s.size() && !s.empty(), ErrorCode::parse,
            where + ": malformed number \"" + s + "\"");
    return v;
}

inline int parse_int(const std::string& s, const std::string& where) {
    double v = parse_double(s, where);
    int i = static_cast<int>(v);
    require(static_cast<double>(i) == v, ErrorCode::parse, where + ": expected integer, got \"" + s + "\"");
    return i;
}

} // namespace detail

inline std::vector<SummaryCsvRow> parse_summary_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::parse, "summary CSV is empty");
    require(line == summary_csv_header(), ErrorCode::parse,
            "summary CSV header mismatch: \"" + line + "\"");
    std::vector<SummaryCsvRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto parts = detail::split_line(line, ',');
        std::string where = "summary CSV line " + std::to_string(lineno);
        require(parts.size() == 5, ErrorCode::parse, where + ": expected 5 fields");
        SummaryCsvRow r;
        r.n_gen = detail::parse_int(parts[0], where);
        r.n_pen = detail::parse_double(parts[1], where);
        r.stat = parts[2];
        r.phi_total_kw = detail::parse_double(parts[3], where);
        r.phi_per_gen_kw = detail::parse_double(parts[4], where);
        rows.push_back(std::move(r));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// validate.csv
// ---------------------------------------------------------------------------

inline std::string validate_csv_header() {
    return "p_per_gen_kw,vmax_linear_pu,vmax_actual_pu,max_abs_err_pu,vmax_nonload_pu";
}

inline std::string validate_to_csv(const ValidationReport& rep, double base_power_kva) {
    std::string out = validate_csv_header() + "\n";
    for (const auto& lvl : rep.levels) {
        out += format_double(lvl.p_per_gen * base_power_kva);
        out += ',';
        out += format_double(lvl.vmax_linear);
        out += ',';
        out += format_double(lvl.vmax_actual);
        out += ',';
        out += format_double(lvl.max_abs_err);
        out += ',';
        out += format_double(lvl.vmax_nonload);
        out += '\n';
    }
    return out;
}

} // namespace gridhc
