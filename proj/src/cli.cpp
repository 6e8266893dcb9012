#include "qasched/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qasched/embed.hpp"
#include "qasched/errors.hpp"
#include "qasched/harness.hpp"

namespace qasched {

namespace fs = std::filesystem;

namespace {

int to_int(const std::string& s) {
    std::size_t pos = 0;
    int v = 0;
    try {
        v = std::stoi(s, &pos);
    } catch (const std::exception&) {
        throw InvalidArgument("not an integer: '" + s + "'");
    }
    if (pos != s.size()) throw InvalidArgument("not an integer: '" + s + "'");
    return v;
}

std::vector<double> parse_doubles(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &pos);
        } catch (const std::exception&) {
            throw InvalidArgument("not a number: '" + item + "'");
        }
        if (pos != item.size()) throw InvalidArgument("not a number: '" + item + "'");
        out.push_back(v);
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::error_code ec;
    if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
    std::ofstream f(p, std::ios::binary);
    if (!f) throw IoError("cannot write " + p.string());
    f << text;
}

struct Usage : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace

std::vector<int> parse_int_range(const std::string& text) {
    std::vector<int> out;
    if (const auto dots = text.find(".."); dots != std::string::npos) {
        const int lo = to_int(text.substr(0, dots));
        const int hi = to_int(text.substr(dots + 2));
        if (hi < lo) throw InvalidArgument("empty range '" + text + "'");
        for (int v = lo; v <= hi; ++v) out.push_back(v);
        return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_int(item));
    if (out.empty()) throw InvalidArgument("empty list '" + text + "'");
    return out;
}

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Annealing-schedule optimization experiments for TSP QUBOs", "qasched"};
    app.require_subcommand(1);
    app.fallthrough();

    std::uint64_t seed = 0;
    std::string config_path, out_dir;
    auto* seed_opt = app.add_option("--seed", seed, "Base seed");
    app.add_option("--config", config_path, "JSON config file (flags override it)");
    auto* out_opt = app.add_option("--out", out_dir, "Output directory (fallback: $ANNEAL_OUT_DIR)");

    // generate
    auto* gen = app.add_subcommand("generate", "Write random Euclidean instances as JSON");
    std::string gen_n = "3";
    gen->add_option("--n", gen_n, "City counts, e.g. 2..10 or 3,5,7");

    // embed-stats
    auto* emb = app.add_subcommand("embed-stats", "Clique-embedding statistics and chain-length bounds");
    std::string emb_n = "2..10";
    emb->add_option("--n", emb_n, "City counts");

    // optimize
    auto* opt = app.add_subcommand("optimize", "Schedule optimization with turbo, rs or gs");
    std::string opt_method;
    opt->add_option("method", opt_method, "turbo | rs | gs")->required()->check(CLI::IsMember({"turbo", "rs", "gs"}));
    std::string opt_n, seeds_text, backend, chains, profile = "paper";
    int budget_evals = 0, repetitions = 0, fixed_reads = 0, reads_min = 0, reads_max = 0, order = -1;
    double fixed_T = 0, t_min = 0, t_max = 0, qpu_limit = 0, spu = 0, beta = 0;
    opt->add_option("--n", opt_n, "City counts");
    opt->add_option("--seeds", seeds_text, "Comma-separated seeds (overrides --seed)");
    auto* o_budget = opt->add_option("--budget-evals", budget_evals, "Objective evaluations per run");
    auto* o_reps = opt->add_option("--repetitions", repetitions, "Repetitions per (N, seed)");
    opt->add_option("--backend", backend, "sqa_noiseless | sqa_noisy")
        ->check(CLI::IsMember({"sqa_noiseless", "sqa_noisy"}));
    opt->add_option("--chains", chains, "off | table")->check(CLI::IsMember({"off", "table"}));
    auto* o_fT = opt->add_option("--fixed-T", fixed_T, "Freeze the anneal time (us)");
    auto* o_fR = opt->add_option("--fixed-reads", fixed_reads, "Freeze the reads per evaluation");
    auto* o_tmin = opt->add_option("--t-min", t_min, "Anneal-time lower bound (us)");
    auto* o_tmax = opt->add_option("--t-max", t_max, "Anneal-time upper bound (us)");
    auto* o_order = opt->add_option("--order", order, "Fourier order M");
    auto* o_rmin = opt->add_option("--reads-min", reads_min, "Reads at the start of the budget");
    auto* o_rmax = opt->add_option("--reads-max", reads_max, "Reads at the end of the budget");
    auto* o_qpu = opt->add_option("--qpu-limit", qpu_limit, "QPU time budget (us)");
    auto* o_spu = opt->add_option("--sweeps-per-us", spu, "Monte Carlo sweeps per microsecond");
    auto* o_beta = opt->add_option("--beta", beta, "SQA inverse temperature (coupling units)");
    opt->add_option("--profile", profile, "paper | desk")->check(CLI::IsMember({"paper", "desk"}));

    // solve
    auto* sol = app.add_subcommand("solve", "Classical solvers: sa, ga or exact");
    std::string sol_method, sol_n;
    int sol_reps = 0, sa_reads = 0, sa_sweeps = 0, ga_pop = 0, ga_gens = 0;
    sol->add_option("method", sol_method, "sa | ga | exact")->required()->check(CLI::IsMember({"sa", "ga", "exact"}));
    sol->add_option("--n", sol_n, "City counts");
    auto* s_reps = sol->add_option("--repetitions", sol_reps, "Repetitions per (N, seed)");
    auto* s_reads = sol->add_option("--reads", sa_reads, "SA reads");
    auto* s_sweeps = sol->add_option("--sweeps", sa_sweeps, "SA sweeps");
    auto* s_pop = sol->add_option("--population", ga_pop, "GA population");
    auto* s_gens = sol->add_option("--generations", ga_gens, "GA generations");

    // report
    auto* rep = app.add_subcommand("report", "Aggregate per-run reports into summary tables");
    std::string rep_in, layout = "schedule";
    bool rep_raw = false;
    rep->add_option("--in", rep_in, "Directory holding *_report.json files");
    rep->add_option("--layout", layout, "schedule | solver | noise")
        ->check(CLI::IsMember({"schedule", "solver", "noise"}));
    rep->add_flag("--raw", rep_raw, "Print the full aggregate CSV instead");

    // schedule render
    auto* sched = app.add_subcommand("schedule", "Schedule utilities");
    sched->require_subcommand(1);
    auto* render = sched->add_subcommand("render", "Print the rendered grid of a design vector");
    double r_T = 20.0, r_res = 1e-4;
    std::string r_theta;
    int r_points = 12;
    bool r_mono = false, r_json = false;
    render->add_option("--T", r_T, "Anneal time (us)");
    render->add_option("--theta", r_theta, "Comma-separated Fourier coefficients");
    render->add_option("--points", r_points, "Grid points");
    render->add_option("--resolution", r_res, "Amplitude resolution");
    render->add_flag("--monotone", r_mono, "Running-maximum repair");
    render->add_flag("--json", r_json, "Print [[t, s], ...] instead of CSV");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(std::move(rev));
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, er;
        const int code = app.exit(e, o, er);
        out << o.str();
        err << er.str();
        return code == 0 ? 0 : 1;
    }

    try {
        ExperimentConfig cfg;
        if (!config_path.empty()) cfg = config_from_json(read_file(config_path));
        if (seed_opt->count()) cfg.seeds = {seed};
        if (out_opt->count()) cfg.output_dir = out_dir;

        if (gen->parsed()) {
            for (int n : parse_int_range(gen_n)) {
                const std::string text = instance_to_json(generate_instance(n, cfg.seeds.front()));
                if (out_opt->count())
                    write_file(fs::path(out_dir) / ("instance_N" + std::to_string(n) + "_seed" +
                                                    std::to_string(cfg.seeds.front()) + ".json"),
                               text + "\n");
                else
                    out << text << '\n';
            }
            return 0;
        }
        if (emb->parsed()) {
            const std::string csv = embed_stats_csv(parse_int_range(emb_n));
            if (out_opt->count()) write_file(fs::path(out_dir) / "embed_stats.csv", csv);
            out << csv;
            return 0;
        }
        if (opt->parsed() || sol->parsed()) {
            if (opt->parsed()) {
                cfg.method = parse_method(opt_method);
                if (profile == "desk") cfg = desk_profile(std::move(cfg));
                if (!opt_n.empty()) cfg.n_cities = parse_int_range(opt_n);
                if (!seeds_text.empty()) {
                    cfg.seeds.clear();
                    for (int s : parse_int_range(seeds_text)) {
                        if (s < 0) throw InvalidArgument("seeds must be nonnegative");
                        cfg.seeds.push_back(static_cast<std::uint64_t>(s));
                    }
                }
                if (o_budget->count()) cfg.budget.max_evals = budget_evals;
                if (o_reps->count()) cfg.repetitions = repetitions;
                if (!backend.empty()) cfg.backend = parse_backend(backend);
                if (!chains.empty()) cfg.chains = parse_chains(chains);
                if (o_fT->count()) cfg.fixed_T = fixed_T;
                if (o_fR->count()) cfg.fixed_reads = fixed_reads;
                if (o_tmin->count()) cfg.bounds.t_min = t_min;
                if (o_tmax->count()) cfg.bounds.t_max = t_max;
                if (o_order->count()) cfg.bounds.order = order;
                if (o_rmin->count()) cfg.budget.r_min = reads_min;
                if (o_rmax->count()) cfg.budget.r_max = reads_max;
                if (o_qpu->count()) cfg.budget.qpu_limit = qpu_limit;
                if (o_spu->count()) cfg.sqa.sweeps_per_us = spu;
                if (o_beta->count()) cfg.sqa.beta = beta;
            } else {
                cfg.method = parse_method(sol_method);
                if (!sol_n.empty()) cfg.n_cities = parse_int_range(sol_n);
                if (s_reps->count()) cfg.repetitions = sol_reps;
                if (s_reads->count()) cfg.sa.reads = sa_reads;
                if (s_sweeps->count()) cfg.sa.sweeps = sa_sweeps;
                if (s_pop->count()) cfg.ga.population = ga_pop;
                if (s_gens->count()) cfg.ga.generations = ga_gens;
            }
            cfg.validate();
            const ExperimentResult res = run_experiment(cfg);
            out << format_table(res.summary, opt->parsed() ? "schedule" : "solver");
            return 0;
        }
        if (rep->parsed()) {
            const std::string dir = rep_in.empty() ? resolve_output_dir(cfg.output_dir) : rep_in;
            const auto rows = aggregate(load_reports(dir));
            const std::string text = rep_raw ? aggregate_csv(rows) : format_table(rows, layout);
            if (out_opt->count()) write_file(fs::path(out_dir) / ("summary_" + layout + ".csv"), text);
            out << text;
            return 0;
        }
        if (render->parsed()) {
            DesignVector dv;
            dv.T = r_T;
            if (!r_theta.empty()) dv.thetas = parse_doubles(r_theta);
            if (!(dv.T > 0.0)) throw InvalidArgument("--T must be positive");
            GridOptions go;
            go.points = r_points;
            go.resolution = r_res;
            go.monotone = r_mono;
            const ScheduleGrid grid = render_grid(dv, go);
            if (r_json) {
                out << grid_to_json(grid) << '\n';
            } else {
                out << "t_us,s\n";
                for (const auto& p : grid.points) out << format_double(p.t) << ',' << format_double(p.s) << '\n';
            }
            return 0;
        }
        throw Usage("no subcommand");
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const Usage& e) {
        err << app.help();
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

int cli_main(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return cli_main(args, std::cout, std::cerr);
}

}  // namespace qasched
