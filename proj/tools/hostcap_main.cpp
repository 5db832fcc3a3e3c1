// hostcap: stochastic PV hosting capacity of three-phase LV feeders.
//
//   hostcap validate --feeder synth10 --out DIR
//   hostcap estimate --feeder synth55 --method fixed-voltage --npen 0.5 --out DIR
//   hostcap sweep    --feeder synth55 --ngen 6,11,17 --eps 0.05 --out DIR
//   hostcap feeders [NAME] [--emit DIR]
//
// Exit codes: 0 study completed, 2 usage error, 1 anything else. Errors print
// one line to stderr: error[E_CODE]: message.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <gridhc/gridhc.hpp>

namespace {

using namespace gridhc;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& flag) {
    std::vector<double> out;
    std::string cur;
    auto flush = [&] {
        require(!cur.empty(), ErrorCode::usage, flag + ": empty entry in list \"" + text + "\"");
        const char* begin = cur.c_str();
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        require(end == begin + cur.size(), ErrorCode::usage,
                flag + ": malformed number \"" + cur + "\"");
        out.push_back(v);
        cur.clear();
    };
    for (char c : text) {
        if (c == ',')
            flush();
        else
            cur += c;
    }
    flush();
    return out;
}

struct CommonOpts {
    std::string feeder;
    std::string out_dir = ".";
    std::string eps_csv = "0.05";
    double vmax = 0.0;
    std::uint64_t seed = 1;
    int nmc = 1000;
    int threads = 1;
    double gen_pf = 1.0;
    CLI::Option* vmax_opt = nullptr;

    void add_study_flags(CLI::App* sub) {
        sub->add_option("--feeder", feeder, "feeder file path or bundled feeder name")
            ->required();
        vmax_opt = sub->add_option("--vmax", vmax, "voltage limit, pu (overrides the feeder file)");
        sub->add_option("--out", out_dir, "output directory (default: current)");
    }

    void add_mc_flags(CLI::App* sub) {
        sub->add_option("--nmc", nmc, "Monte Carlo scenario count (default 1000)");
        sub->add_option("--eps", eps_csv, "epsilon list, comma separated (default 0.05)");
        sub->add_option("--seed", seed, "study seed (default 1)");
        sub->add_option("--threads", threads, "parallel evaluation threads (default 1)");
        sub->add_option("--gen-pf", gen_pf, "generator power factor (default 1, active only)");
    }

    std::vector<double> eps_list() const {
        auto list = parse_double_list(eps_csv, "--eps");
        for (double e : list)
            require(e >= 0.0 && e <= 1.0, ErrorCode::usage,
                    "--eps: epsilon " + num(e) + " outside [0, 1]");
        return list;
    }

    HcOptions hc_options() const {
        require(threads >= 1, ErrorCode::usage, "--threads must be at least 1");
        HcOptions o;
        o.gen_pf = gen_pf;
        o.threads = threads;
        return o;
    }
};

struct Study {
    NetworkModel net;
    PartitionedAdmittance adm;
    MagnitudeModel mag;
    double v_plus = 0.0;
    StudyMeta meta;
};

Study load_study(const CommonOpts& opts) {
    Study st;
    if (std::filesystem::exists(opts.feeder)) {
        st.net = load_feeder(opts.feeder);
    } else if (auto builtin = builtin_feeder(opts.feeder)) {
        st.net = std::move(*builtin);
        validate_network(st.net);
    } else {
        std::string names;
        for (const auto& n : builtin_feeder_names()) names += (names.empty() ? "" : ", ") + n;
        fail(ErrorCode::io,
             "feeder \"" + opts.feeder + "\" is neither a file nor a bundled feeder (" + names + ")");
    }

    if (opts.vmax_opt != nullptr && opts.vmax_opt->count() > 0) {
        require(opts.vmax > 0.0, ErrorCode::usage, "--vmax must be positive");
        st.v_plus = opts.vmax;
    } else if (st.net.v_plus_pu) {
        st.v_plus = *st.net.v_plus_pu;
    } else {
        fail(ErrorCode::usage,
             "no voltage limit: feeder file carries no v_plus_pu and --vmax was not given");
    }

    st.adm = assemble_admittance(st.net);
    st.mag = magnitude_model(linearize(st.adm, solve_base_case(st.net, st.adm)));
    st.meta.seed = opts.seed;
    st.meta.v_plus = st.v_plus;
    st.meta.feeder_id = opts.feeder;
    return st;
}

std::filesystem::path prepare_out_dir(const std::string& out_dir) {
    std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    require(std::filesystem::is_directory(dir), ErrorCode::io,
            "cannot create output directory \"" + out_dir + "\"");
    return dir;
}

/// Generator count for estimate/sweep: exactly one of --npen / --ngen.
std::vector<int> resolve_n_gen(const std::string& npen_csv, const std::string& ngen_csv,
                               int n_lds) {
    require(npen_csv.empty() != ngen_csv.empty(), ErrorCode::usage,
            "give exactly one of --npen and --ngen");
    std::vector<int> out;
    if (!ngen_csv.empty()) {
        for (double v : parse_double_list(ngen_csv, "--ngen")) {
            int n = static_cast<int>(v);
            require(static_cast<double>(n) == v, ErrorCode::usage,
                    "--ngen: expected integer, got " + num(v));
            require(n >= 1 && n <= n_lds, ErrorCode::usage,
                    "--ngen: " + std::to_string(n) + " outside [1, " + std::to_string(n_lds) + "]");
            out.push_back(n);
        }
    } else {
        for (double v : parse_double_list(npen_csv, "--npen")) {
            require(v > 0.0 && v <= 1.0, ErrorCode::usage,
                    "--npen: penetration " + num(v) + " outside (0, 1]");
            out.push_back(n_gen_for_penetration(v, n_lds));
        }
    }
    return out;
}

int cmd_validate(const CommonOpts& opts, int levels) {
    require(levels >= 2, ErrorCode::usage, "--levels must be at least 2");
    Study st = load_study(opts);
    ValidationReport rep = validate_linearization(st.net, st.adm, st.mag, st.v_plus, levels);

    auto dir = prepare_out_dir(opts.out_dir);
    write_text_file((dir / "validate.csv").string(), validate_to_csv(rep, st.net.base_power_kva));

    double worst_nonload = 0.0;
    for (const auto& lvl : rep.levels) worst_nonload = std::max(worst_nonload, lvl.vmax_nonload);

    std::printf("feeder                 : %s (%d buses, %d loads)\n", opts.feeder.c_str(),
                st.net.n_bus(), st.net.n_lds());
    std::printf("voltage limit          : %s pu\n", num(st.v_plus).c_str());
    std::printf("deterministic export   : %s kW per load (%s pu)\n",
                num(rep.p_house_det * st.net.base_power_kva).c_str(), num(rep.p_house_det).c_str());
    std::printf("sweep levels           : %d\n", levels);
    std::printf("max |v_lin - v_nonlin| : %s pu\n", num(rep.max_abs_err).c_str());
    std::printf("largest non-load |v|   : %s pu (unenforced)\n", num(worst_nonload).c_str());
    std::printf("wrote %s\n", (dir / "validate.csv").c_str());
    return 0;
}

int cmd_estimate(const CommonOpts& opts, const std::string& method, const std::string& npen_csv,
                 const std::string& ngen_csv, double tau, int max_iter) {
    require(opts.nmc >= 1, ErrorCode::usage, "--nmc must be at least 1");
    require(tau > 0.0, ErrorCode::usage, "--tau must be positive");
    require(method == "fixed-voltage" || method == "fixed-power", ErrorCode::usage,
            "--method must be fixed-voltage or fixed-power");

    Study st = load_study(opts);
    auto n_gen_list = resolve_n_gen(npen_csv, ngen_csv, st.net.n_lds());
    require(n_gen_list.size() == 1, ErrorCode::usage,
            "estimate takes a single --npen/--ngen value (use sweep for lists)");
    int n_gen = n_gen_list.front();
    auto eps_list = opts.eps_list();
    HcOptions hc = opts.hc_options();

    auto scenarios = sample_scenario_set(opts.seed, opts.nmc, st.net.n_lds(), n_gen);
    auto dir = prepare_out_dir(opts.out_dir);
    double kva = st.net.base_power_kva;

    std::printf("feeder  : %s, n_gen %d of %d loads, N_MC %d, seed %" PRIu64 "\n",
                opts.feeder.c_str(), n_gen, st.net.n_lds(), opts.nmc, opts.seed);
    std::printf("method  : %s, v+ = %s pu\n", method.c_str(), num(st.v_plus).c_str());

    if (method == "fixed-voltage") {
        HcSampleSet samples = run_fixed_voltage(st.mag, scenarios, st.v_plus, hc, st.meta);
        for (double eps : eps_list) {
            HcEstimate est = estimate_phi_eps(samples, eps);
            if (est.unbounded) {
                std::printf("phi[eps=%s] = unbounded (quantile falls in the unconstrained tail)\n",
                            num(eps).c_str());
            } else {
                std::printf("phi[eps=%s] = %s kW total (%s pu), %s kW per generator\n",
                            num(eps).c_str(), num(est.phi_eps_total * kva).c_str(),
                            num(est.phi_eps_total).c_str(), num(est.phi_eps_per_gen * kva).c_str());
            }
        }
        std::printf("unbounded scenarios : %d of %d\n", samples.unbounded_count, samples.n_mc());
        std::printf("evaluation wall time: %s s\n", num(samples.eval_seconds).c_str());
        write_text_file((dir / "samples.json").string(),
                        samples_to_json(samples, eps_list, kva).dump(2) + "\n");
    } else {
        require(eps_list.size() == 1, ErrorCode::usage,
                "fixed-power estimate takes exactly one epsilon");
        double eps = eps_list.front();
        Bracket br = initial_bracket(st.mag, scenarios, eps, st.v_plus, hc);
        HcEstimate est = bisect_fixed_power(st.mag, scenarios, eps, tau, br.p0, br.p1, st.v_plus,
                                            max_iter, hc);
        std::printf("phi[eps=%s] = %s kW total (%s pu), %s kW per generator\n", num(eps).c_str(),
                    num(est.phi_eps_total * kva).c_str(), num(est.phi_eps_total).c_str(),
                    num(est.phi_eps_per_gen * kva).c_str());
        std::printf("bracket [%s, %s] pu (%d doublings), %d iterations, wall time %s s\n",
                    num(br.p0).c_str(), num(br.p1).c_str(), br.doublings, est.iterations,
                    num(est.wall_time).c_str());
        if (!est.converged)
            std::printf("warning: error metric never met tau=%s; result is the final bisection "
                        "midpoint\n",
                        num(tau).c_str());
        write_text_file(
            (dir / "samples.json").string(),
            estimate_to_json(est, st.meta, kva, opts.nmc, st.net.n_lds(), tau, br).dump(2) + "\n");
    }
    std::printf("wrote %s\n", (dir / "samples.json").c_str());
    return 0;
}

int cmd_sweep(const CommonOpts& opts, const std::string& npen_csv, const std::string& ngen_csv) {
    require(opts.nmc >= 1, ErrorCode::usage, "--nmc must be at least 1");
    Study st = load_study(opts);
    auto n_gen_list = resolve_n_gen(npen_csv, ngen_csv, st.net.n_lds());
    auto eps_list = opts.eps_list();
    HcOptions hc = opts.hc_options();

    DistributionSummary summary = sweep_penetration(st.mag, n_gen_list, opts.nmc, opts.seed,
                                                    st.v_plus, eps_list, hc, st.meta);
    double kva = st.net.base_power_kva;

    std::printf("feeder: %s, %d loads, N_MC %d, seed %" PRIu64 ", v+ = %s pu\n",
                opts.feeder.c_str(), st.net.n_lds(), opts.nmc, opts.seed, num(st.v_plus).c_str());
    std::printf("%6s %7s %14s %14s\n", "n_gen", "n_pen", "median phi kW", "Phi total kW");
    for (const auto& row : summary.rows)
        std::printf("%6d %7s %14s %14s\n", row.n_gen, num(row.n_pen).c_str(),
                    num(row.median * kva).c_str(), num(row.n_gen * row.median * kva).c_str());

    auto dir = prepare_out_dir(opts.out_dir);
    auto rows = summary_rows(summary, kva);
    write_text_file((dir / "summary.csv").string(), summary_to_csv(rows));
    std::printf("wrote %s (%zu rows)\n", (dir / "summary.csv").c_str(), rows.size());
    return 0;
}

int cmd_feeders(const std::string& name, const std::string& emit_dir) {
    if (!emit_dir.empty()) {
        auto dir = prepare_out_dir(emit_dir);
        for (const auto& n : builtin_feeder_names()) {
            auto path = dir / (n + ".json");
            write_text_file(path.string(), builtin_feeder_json(n));
            std::printf("wrote %s\n", path.c_str());
        }
        return 0;
    }
    if (!name.empty()) {
        std::fputs(builtin_feeder_json(name).c_str(), stdout);
        return 0;
    }
    for (const auto& n : builtin_feeder_names()) {
        NetworkModel net = *builtin_feeder(n);
        std::printf("%-8s %3d buses, %2d loads, v+ %s pu\n", n.c_str(), net.n_bus(), net.n_lds(),
                    net.v_plus_pu ? num(*net.v_plus_pu).c_str() : "-");
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic PV hosting capacity of three-phase LV feeders"};
    app.require_subcommand(1);
    int rc = 0;

    CommonOpts v_opts;
    int levels = 21;
    auto* validate = app.add_subcommand("validate", "compare the linear model with the nonlinear "
                                                    "solver up to the deterministic capacity");
    v_opts.add_study_flags(validate);
    validate->add_option("--levels", levels, "sweep levels (default 21)");
    validate->callback([&] { rc = cmd_validate(v_opts, levels); });

    CommonOpts e_opts;
    std::string e_method = "fixed-voltage", e_npen, e_ngen;
    double tau = 0.01;
    int max_iter = 60;
    auto* estimate = app.add_subcommand("estimate", "estimate the epsilon-limited hosting capacity");
    e_opts.add_study_flags(estimate);
    e_opts.add_mc_flags(estimate);
    estimate->add_option("--method", e_method, "fixed-voltage (default) or fixed-power");
    estimate->add_option("--npen", e_npen, "PV penetration fraction in (0, 1]");
    estimate->add_option("--ngen", e_ngen, "generator count");
    estimate->add_option("--tau", tau, "fixed-power error tolerance (default 0.01)");
    estimate->add_option("--max-iter", max_iter, "fixed-power evaluation cap (default 60)");
    estimate->callback([&] { rc = cmd_estimate(e_opts, e_method, e_npen, e_ngen, tau, max_iter); });

    CommonOpts s_opts;
    std::string s_npen, s_ngen;
    auto* sweep = app.add_subcommand("sweep", "hosting-capacity distribution across penetration "
                                              "levels (summary.csv)");
    s_opts.add_study_flags(sweep);
    s_opts.add_mc_flags(sweep);
    sweep->add_option("--npen", s_npen, "penetration list, comma separated");
    sweep->add_option("--ngen", s_ngen, "generator count list, comma separated");
    sweep->callback([&] { rc = cmd_sweep(s_opts, s_npen, s_ngen); });

    std::string f_name, f_emit;
    auto* feeders = app.add_subcommand("feeders", "list bundled feeders or emit their JSON");
    feeders->add_option("name", f_name, "print one bundled feeder as JSON");
    feeders->add_option("--emit", f_emit, "write every bundled feeder into this directory");
    feeders->callback([&] { rc = cmd_feeders(f_name, f_emit); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const gridhc::Error& e) {
        std::cerr << "error[" << code_string(e.code()) << "]: " << e.what() << "\n";
        return e.code() == gridhc::ErrorCode::usage ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error[E_UNKNOWN]: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
