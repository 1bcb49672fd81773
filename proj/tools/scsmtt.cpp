#include "scsmtt/config.hpp"
#include "scsmtt/experiment.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace scsmtt;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

/// A failure after configuration succeeded, such as an unwritable output directory.
class RuntimeFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunArgs {
    std::string scenario = "paper-vi";
    std::string variant;
    int mc_runs = 1;
    std::uint64_t seed = 1;
    int gibbs_iters = -1;
    int consensus_iters = -1;
    int outer_iters = -1;
    std::string out = "scsmtt_out";
    int workers = 0;
};

struct CompareArgs {
    std::vector<std::string> summaries;
    std::string out;
};

std::ofstream open_out(const fs::path& p) {
    std::ofstream f(p);
    if (!f) {
        throw RuntimeFailure("cannot write '" + p.string() + "'");
    }
    f << std::setprecision(10);
    return f;
}

void write_run_csv(const fs::path& p, const RunResult& r) {
    auto f = open_out(p);
    f << "t,rmse,ospa,ospa_localization,ospa_cardinality,cardinality,true_cardinality\n";
    for (std::size_t t = 0; t < r.ospa.size(); ++t) {
        f << t << ',' << r.agent_rmse[t] << ',' << r.ospa[t] << ',' << r.ospa_localization[t] << ','
          << r.ospa_cardinality[t] << ',' << r.cardinality[t] << ',' << r.true_cardinality[t] << '\n';
    }
}

void write_steps_csv(const fs::path& p, const BatchSummary& s) {
    auto f = open_out(p);
    f << "t,rmse,ospa_mean,card_mean,card_std,true_card\n";
    for (std::size_t t = 0; t < s.ospa_mean.size(); ++t) {
        f << t << ',' << s.rmse_mean[t] << ',' << s.ospa_mean[t] << ',' << s.cardinality.mean[t] << ','
          << s.cardinality.std[t] << ',' << s.true_cardinality[t] << '\n';
    }
}

void write_comm_csv(const fs::path& p, const std::vector<RunResult>& runs) {
    auto f = open_out(p);
    f << "run,seed,belief_reals,auxiliary_reals,invocations,rounds\n";
    for (std::size_t r = 0; r < runs.size(); ++r) {
        const auto& c = runs[r].comm;
        f << r << ',' << runs[r].seed << ',' << c.belief_reals << ',' << c.auxiliary_reals << ',' << c.invocations
          << ',' << c.rounds << '\n';
    }
}

void write_pt_traffic_csv(const fs::path& p, const std::vector<RunResult>& runs) {
    auto f = open_out(p);
    f << "run,pt,outer,dim,belief_reals,auxiliary_reals,rounds\n";
    for (std::size_t r = 0; r < runs.size(); ++r) {
        for (const auto& tr : runs[r].pt_traffic) {
            f << r << ',' << tr.pt << ',' << tr.outer << ',' << tr.dim << ',' << tr.counters.belief_reals << ','
              << tr.counters.auxiliary_reals << ',' << tr.counters.rounds << '\n';
        }
    }
}

const char* kSchema = R"(Output directory layout

steps.csv        t, rmse, ospa_mean, card_mean, card_std, true_card
                 per-step averages over completed runs; rmse covers mobile agents [m],
                 ospa uses the configured cutoff and order, card_std is the n-1 sample deviation
runs/run_NNNN.csv
                 t, rmse, ospa, ospa_localization, ospa_cardinality, cardinality, true_cardinality
                 one file per completed Monte-Carlo run
comm.csv         run, seed, belief_reals, auxiliary_reals, invocations, rounds
                 consensus traffic per run; belief_reals counts belief and normalization payloads,
                 auxiliary_reals counts label diffusion and archive agreement
pt_traffic.csv   run, pt, outer, dim, belief_reals, auxiliary_reals, rounds
                 one row per PT belief computation (decentralized variants only)
truth.csv        t, id, px, py, vx, vy
config.txt       the resolved configuration; pass it back with --scenario to rerun
summary.json     variant, seed, run count, time averages, per-step curves, per-run status
schema.txt       this file

Run r uses seed derive_seed(master, r), the splitmix64 finalizer of master + (r+1)*0x9e3779b97f4a7c15.
)";

json summary_json(const RunArgs& args, const ExperimentSpec& spec, const BatchSummary& s,
                  const std::vector<RunResult>& runs) {
    json j;
    j["schema_version"] = 1;
    j["scenario"] = args.scenario;
    j["variant"] = to_string(spec.filter.variant);
    j["mc_runs"] = args.mc_runs;
    j["seed"] = args.seed;
    j["steps"] = s.ospa_mean.size();
    j["filter"] = {{"outer_iters", spec.filter.outer_iters},
                   {"gibbs_iters", spec.filter.gibbs_iters},
                   {"gibbs_top", spec.filter.gibbs_top},
                   {"consensus_iters", spec.filter.consensus_iters},
                   {"max_components", spec.filter.max_components},
                   {"existence_threshold", spec.filter.existence_threshold}};
    j["rmse_time_avg"] = s.rmse_time_avg;
    j["ospa_time_avg"] = s.ospa_time_avg;
    j["failed_runs"] = s.failed_runs;
    json per_step;
    per_step["rmse"] = s.rmse_mean;
    per_step["ospa"] = s.ospa_mean;
    per_step["card_mean"] = s.cardinality.mean;
    per_step["card_std"] = s.cardinality.std;
    per_step["true_card"] = s.true_cardinality;
    j["per_step"] = per_step;
    CommCounters total;
    json run_list = json::array();
    for (std::size_t r = 0; r < runs.size(); ++r) {
        total += runs[r].comm;
        run_list.push_back({{"run", r},
                            {"seed", runs[r].seed},
                            {"error", runs[r].error},
                            {"warnings", runs[r].warnings},
                            {"agent_failures", runs[r].agent_failures},
                            {"pt_failures", runs[r].pt_failures},
                            {"seconds", runs[r].seconds}});
    }
    j["comm"] = {{"belief_reals", total.belief_reals},
                 {"auxiliary_reals", total.auxiliary_reals},
                 {"invocations", total.invocations},
                 {"rounds", total.rounds}};
    j["runs"] = run_list;
    return j;
}

int do_run(const RunArgs& args) {
    ExperimentSpec spec = load_spec(args.scenario);
    if (!args.variant.empty()) {
        apply_filter_key(spec.filter, "variant", args.variant);
    }
    if (args.gibbs_iters >= 0) {
        spec.filter.gibbs_iters = args.gibbs_iters;
    }
    if (args.consensus_iters >= 0) {
        spec.filter.consensus_iters = args.consensus_iters;
    }
    if (args.outer_iters >= 0) {
        spec.filter.outer_iters = args.outer_iters;
    }
    if (args.mc_runs < 1) {
        throw ConfigError("mc-runs", "must be >= 1");
    }
    try {
        spec.filter.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("filter", e.what());
    }
    Scenario scenario;
    try {
        scenario = build_scenario(spec);
    } catch (const DisconnectedGraphError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError("scenario", e.what());
    }
    const int workers =
        args.workers > 0 ? args.workers : std::max(1, static_cast<int>(std::thread::hardware_concurrency()));

    const fs::path out(args.out);
    std::error_code ec;
    fs::create_directories(out / "runs", ec);
    if (ec) {
        throw RuntimeFailure("cannot create '" + (out / "runs").string() + "': " + ec.message());
    }
    {
        auto f = open_out(out / "config.txt");
        write_spec(f, spec);
    }
    {
        auto f = open_out(out / "truth.csv");
        write_truth_csv(f, scenario.truth);
    }
    open_out(out / "schema.txt") << kSchema << '\n' << config_schema();

    RunOptions opts;
    opts.ospa = OspaParams{spec.scenario.ospa_cutoff, spec.scenario.ospa_order};
    opts.keep_pt_traffic = is_decentralized(spec.filter.variant);
    std::cerr << "running " << args.mc_runs << " run(s) of " << to_string(spec.filter.variant) << " on "
              << workers << " worker(s)\n";
    const auto runs = run_batch(scenario, spec.filter, args.mc_runs, args.seed, workers, opts);
    for (std::size_t r = 0; r < runs.size(); ++r) {
        if (!runs[r].error.empty()) {
            std::cerr << "run " << r << " failed: " << runs[r].error << '\n';
            continue;
        }
        std::ostringstream name;
        name << "run_" << std::setw(4) << std::setfill('0') << r << ".csv";
        write_run_csv(out / "runs" / name.str(), runs[r]);
    }
    write_comm_csv(out / "comm.csv", runs);
    if (opts.keep_pt_traffic) {
        write_pt_traffic_csv(out / "pt_traffic.csv", runs);
    }
    const BatchSummary s = summarize(runs);
    write_steps_csv(out / "steps.csv", s);
    open_out(out / "summary.json") << summary_json(args, spec, s, runs).dump(2) << '\n';
    std::cout << to_string(spec.filter.variant) << ": rmse " << s.rmse_time_avg << " m, ospa " << s.ospa_time_avg
              << " m, failed runs " << s.failed_runs << "/" << args.mc_runs << '\n';
    return s.failed_runs > 0 ? kExitRuntime : 0;
}

json read_summary(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("summary", "cannot open '" + path + "'");
    }
    try {
        json j = json::parse(in);
        if (!j.contains("per_step") || !j.contains("variant")) {
            throw ConfigError("summary", "'" + path + "' is not a run summary");
        }
        return j;
    } catch (const json::exception& e) {
        throw ConfigError("summary", "'" + path + "': " + e.what());
    }
}

int do_compare(const CompareArgs& args) {
    if (args.summaries.size() < 2) {
        throw ConfigError("compare", "need at least two summaries");
    }
    std::vector<json> sums;
    for (const auto& p : args.summaries) {
        sums.push_back(read_summary(p));
    }
    const auto& ref = sums.front()["per_step"];
    const std::size_t steps = ref["ospa"].size();
    for (std::size_t i = 1; i < sums.size(); ++i) {
        if (sums[i]["per_step"]["ospa"].size() != steps) {
            throw ConfigError("compare", "'" + args.summaries[i] + "' has " +
                                             std::to_string(sums[i]["per_step"]["ospa"].size()) +
                                             " steps, expected " + std::to_string(steps));
        }
    }
    std::ostringstream csv;
    csv << std::setprecision(10) << "t";
    for (std::size_t i = 1; i < sums.size(); ++i) {
        const std::string label = sums[i]["variant"].get<std::string>() + "_" + std::to_string(i);
        csv << ',' << label << "_rmse_diff," << label << "_ospa_diff," << label << "_card_diff";
    }
    csv << '\n';
    for (std::size_t t = 0; t < steps; ++t) {
        csv << t;
        for (std::size_t i = 1; i < sums.size(); ++i) {
            const auto& ps = sums[i]["per_step"];
            csv << ',' << ps["rmse"][t].get<double>() - ref["rmse"][t].get<double>() << ','
                << ps["ospa"][t].get<double>() - ref["ospa"][t].get<double>() << ','
                << ps["card_mean"][t].get<double>() - ref["card_mean"][t].get<double>();
        }
        csv << '\n';
    }
    if (args.out.empty()) {
        std::cout << csv.str();
    } else {
        open_out(args.out) << csv.str();
    }
    const double ref_ospa = sums.front()["ospa_time_avg"].get<double>();
    std::cerr << "summary,variant,rmse_time_avg,ospa_time_avg,ospa_rel_diff\n";
    for (std::size_t i = 0; i < sums.size(); ++i) {
        const double o = sums[i]["ospa_time_avg"].get<double>();
        std::cerr << args.summaries[i] << ',' << sums[i]["variant"].get<std::string>() << ','
                  << sums[i]["rmse_time_avg"].get<double>() << ',' << o << ','
                  << (ref_ospa > 0.0 ? (o - ref_ospa) / ref_ospa : 0.0) << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decentralized cooperative self-localization and multi-target tracking experiments"};
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Run a Monte-Carlo batch and write its artifacts");
    run_cmd->add_option("--scenario", run.scenario, "Builtin name (paper-vi) or configuration file")
        ->envname("SCSMTT_SCENARIO");
    run_cmd->add_option("--variant", run.variant, "CGM, DGM, CG, DG, CGM-SPAWN or CG-SPAWN")
        ->envname("SCSMTT_VARIANT");
    run_cmd->add_option("--mc-runs", run.mc_runs, "Number of Monte-Carlo runs")->envname("SCSMTT_MC_RUNS");
    run_cmd->add_option("--seed", run.seed, "Master seed")->envname("SCSMTT_SEED");
    run_cmd->add_option("--gibbs-iters", run.gibbs_iters, "Gibbs sweeps or decentralized sampler rounds")
        ->envname("SCSMTT_GIBBS_ITERS");
    run_cmd->add_option("--consensus-iters", run.consensus_iters, "Consensus rounds Q")
        ->envname("SCSMTT_CONSENSUS_ITERS");
    run_cmd->add_option("--outer-iters", run.outer_iters, "Outer message passing iterations")
        ->envname("SCSMTT_OUTER_ITERS");
    run_cmd->add_option("--out", run.out, "Output directory")->envname("SCSMTT_OUT");
    run_cmd->add_option("--workers", run.workers, "Parallel runs (0 = hardware threads)")
        ->envname("SCSMTT_WORKERS");

    auto* schema_cmd = app.add_subcommand("schema", "Print the configuration keys");

    std::string dump_name = "paper-vi";
    auto* dump_cmd = app.add_subcommand("dump-config", "Print a configuration file for a builtin scenario");
    dump_cmd->add_option("--scenario", dump_name, "Builtin name or configuration file");

    CompareArgs cmp;
    auto* cmp_cmd = app.add_subcommand("compare", "Per-step differences of summaries against the first one");
    cmp_cmd->add_option("summaries", cmp.summaries, "summary.json files")->required();
    cmp_cmd->add_option("--out", cmp.out, "CSV output path (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (run_cmd->parsed()) {
            return do_run(run);
        }
        if (schema_cmd->parsed()) {
            std::cout << config_schema();
            return 0;
        }
        if (dump_cmd->parsed()) {
            write_spec(std::cout, load_spec(dump_name));
            return 0;
        }
        return do_compare(cmp);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
