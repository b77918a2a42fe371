// SPDX-License-Identifier: Apache-2.0
#include "grbf/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <stdexcept>
#include <thread>

#include "grbf/randomize.hpp"
#include "grbf/rng.hpp"

namespace grbf {

namespace fs = std::filesystem;

namespace {

constexpr double kNoise = 0.1;        // sigma_i^2 in all examples
constexpr double kJitterDeg = 0.25;   // angle perturbation half width

std::vector<double> concat(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

Scenario users_at(const std::vector<double>& angles_deg, int N, double sinr_db) {
    Scenario sc;
    sc.antennas = N;
    for (double a : angles_deg) {
        User u;
        u.channel = steering_vector(a, N);
        u.sinr_target = db2lin(sinr_db);
        u.noise_power = kNoise;
        sc.users.push_back(std::move(u));
    }
    return sc;
}

int env_workers() {
    const char* v = std::getenv("GRBF_WORKERS");
    if (!v) return 1;
    const int n = std::atoi(v);
    return n > 0 ? n : 1;
}

void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
    if (workers <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int threads = std::min(workers, count);
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= count) break;
                fn(i);
            }
        });
    }
    for (std::thread& t : pool) t.join();
}

std::ofstream open_csv(const std::string& dir, const std::string& name,
                       std::vector<std::string>& written) {
    const fs::path p = fs::path(dir) / name;
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << std::setprecision(10);
    written.push_back(p.string());
    return out;
}

struct SweepPoint {
    double sinr_db = 0.0;
    std::vector<RunOutcome> runs;
};

// feasibility.csv / power_vs_sinr.csv / ranks.csv from a finished sweep
void write_sweep_reports(const std::vector<SweepPoint>& sweep, int num_users,
                         const std::string& dir,
                         std::vector<std::string>& written) {
    const char* names[3] = {"general", "rank_two", "rank_one"};

    {
        std::ofstream out = open_csv(dir, "feasibility.csv", written);
        out << "sinr_db,approach,feasible_percent\n";
        for (const SweepPoint& pt : sweep) {
            int counts[3] = {0, 0, 0};
            for (const RunOutcome& r : pt.runs) {
                counts[0] += r.general.feasible;
                counts[1] += r.rank2.feasible;
                counts[2] += r.rank1.feasible;
            }
            for (int a = 0; a < 3; ++a)
                out << pt.sinr_db << "," << names[a] << ","
                    << 100.0 * counts[a] / std::max<size_t>(1, pt.runs.size()) << "\n";
        }
    }

    {
        std::ofstream out = open_csv(dir, "power_vs_sinr.csv", written);
        out << "sinr_db,approach,feasible_runs,mean_power,common_runs,mean_power_common\n";
        for (const SweepPoint& pt : sweep) {
            double sum[3] = {0, 0, 0}, sum_common[3] = {0, 0, 0};
            int count[3] = {0, 0, 0}, common = 0;
            for (const RunOutcome& r : pt.runs) {
                const ApproachResult* res[3] = {&r.general, &r.rank2, &r.rank1};
                const bool all = r.general.feasible && r.rank2.feasible && r.rank1.feasible;
                if (all) ++common;
                for (int a = 0; a < 3; ++a) {
                    if (res[a]->feasible) {
                        sum[a] += res[a]->power;
                        ++count[a];
                    }
                    if (all) sum_common[a] += res[a]->power;
                }
            }
            for (int a = 0; a < 3; ++a) {
                out << pt.sinr_db << "," << names[a] << "," << count[a] << ","
                    << (count[a] ? sum[a] / count[a] : 0.0) << "," << common << ","
                    << (common ? sum_common[a] / common : 0.0) << "\n";
            }
        }
    }

    {
        std::ofstream out = open_csv(dir, "ranks.csv", written);
        out << "sinr_db,user,rank,percent\n";
        for (const SweepPoint& pt : sweep) {
            std::map<std::pair<int, int>, int> hist;
            int total = 0;
            for (const RunOutcome& r : pt.runs) {
                if (!r.sdr_feasible) continue;
                ++total;
                for (int u = 0; u < num_users; ++u)
                    ++hist[{u, r.reduced_ranks[u]}];
            }
            for (const auto& [key, cnt] : hist)
                out << pt.sinr_db << "," << key.first << "," << key.second << ","
                    << 100.0 * cnt / std::max(1, total) << "\n";
        }
    }
}

std::vector<double> sweep_grid(const ExperimentConfig& cfg, double def_lo,
                               double def_hi, double def_step) {
    const double lo = cfg.sweep_given ? cfg.sinr_lo_db : def_lo;
    const double hi = cfg.sweep_given ? cfg.sinr_hi_db : def_hi;
    const double step = cfg.sweep_given ? cfg.sinr_step_db : def_step;
    if (!(step > 0.0) || hi < lo) throw std::invalid_argument("invalid SINR sweep");
    std::vector<double> grid;
    for (double s = lo; s <= hi + 1e-9; s += step) grid.push_back(s);
    return grid;
}

}  // namespace

const std::vector<double>& example1_user_angles() {
    static const std::vector<double> v = {-5.0, 10.0, 25.0};
    return v;
}

const std::vector<double>& example1_terminal_angles() {
    static const std::vector<double> v = {
        -80.0, -75.0, -70.0, -65.0, -60.0, -55.0, -45.0, -35.0, -25.0, -8.0, -2.0,
        12.0, 18.0, 35.0, 45.0, 50.0, 55.0, 60.0, 65.0, 70.0, 75.0, 80.0};
    return v;
}

const std::vector<double>& example2_cochannel_angles() {
    static const std::vector<double> v = {
        -89.375, -80.0, -70.625, -61.25, -51.875, -42.5, -33.125, -23.75,
        -14.375, 2.0, 3.0, 17.0, 18.0, 34.375, 43.75, 53.125, 62.5, 71.875,
        81.25};
    return v;
}

const std::vector<double>& example4_user_angles() {
    static const std::vector<double> v = {-15.0, 5.0, 25.0};
    return v;
}

Scenario example1_scenario(double sinr_db) {
    Scenario sc = users_at(example1_user_angles(), 12, sinr_db);
    sc.shaping = charging_constraints(example1_terminal_angles(), db2lin(5.0),
                                      sc.antennas, sc.num_users());
    return sc;
}

Scenario example2_scenario(double sinr_db) {
    Scenario sc = users_at(example1_user_angles(), 18, sinr_db);
    sc.shaping = sidelobe_constraints(example2_cochannel_angles(), 0.1, 1e-5,
                                      sc.antennas, sc.num_users());
    return sc;
}

Scenario example4_scenario(double sinr_db) {
    Scenario sc = users_at(example4_user_angles(), 15, sinr_db);
    sc.shaping = relaxed_nulling_constraints(example1_terminal_angles(), 0.005,
                                             sc.antennas, sc.num_users());
    return sc;
}

BeampatternTable beampattern(const std::vector<CMat>& W,
                             const std::vector<double>& grid_deg) {
    if (grid_deg.empty()) throw std::invalid_argument("beampattern: empty grid");
    const int M = static_cast<int>(W.size());
    const int N = static_cast<int>(W[0].rows());
    BeampatternTable table;
    table.theta_deg = grid_deg;
    table.per_user = Mat(grid_deg.size(), M);
    table.sum = Vec(grid_deg.size());
    for (size_t g = 0; g < grid_deg.size(); ++g) {
        const CVec h = steering_vector(grid_deg[g], N);
        double total = 0.0;
        for (int m = 0; m < M; ++m) {
            const double p = (W[m].adjoint() * h).squaredNorm();
            table.per_user(g, m) = p;
            total += p;
        }
        table.sum[g] = total;
    }
    return table;
}

RunOutcome evaluate_run(const Scenario& scenario, int n_rand,
                        std::uint64_t rand_seed) {
    RunOutcome out;
    const SdpProblem problem = assemble(scenario);
    const SdrOutcome sdr = solve(problem);
    if (sdr.status == SdrStatus::Infeasible || sdr.status == SdrStatus::Unbounded)
        return out;
    if (sdr.status == SdrStatus::MaxIterations &&
        (sdr.kkt.max_primal_residual > 1e-6 || sdr.kkt.duality_gap > 1e-5)) {
        out.solver_trouble = true;
        return out;
    }
    out.sdr_feasible = true;

    std::vector<CMat> X = sdr.primal.X;
    for (const CMat& x : X) out.initial_ranks.push_back(numerical_rank(x));
    bool high = false;
    for (int r : out.initial_ranks) high = high || r > 1;
    if (high) X = rank_reduce(X, problem.rows);
    int max_rank = 0;
    for (const CMat& x : X) {
        out.reduced_ranks.push_back(numerical_rank(x));
        max_rank = std::max(max_rank, out.reduced_ranks.back());
    }

    auto route = [&](int cap, std::uint64_t stream) {
        ApproachResult res;
        if (max_rank <= cap) {
            res.feasible = true;
            res.exact = true;
            res.power = sdr.primal.objective;
            return res;
        }
        Rng rng = Rng(rand_seed).fork(stream);
        const auto cand = randomization_search(X, problem.rows, n_rand, rng, cap);
        if (cand) {
            res.feasible = true;
            res.exact = false;
            res.power = cand->total_power;
        }
        return res;
    };

    out.general = route(8, 0);
    out.rank2 = route(2, 1);
    out.rank1 = route(1, 2);
    return out;
}

namespace {

void write_beampattern_csv(const BeampatternTable& table, const std::string& dir,
                           const std::string& name,
                           std::vector<std::string>& written) {
    std::ofstream out = open_csv(dir, name, written);
    out << "theta_deg";
    for (int m = 0; m < table.per_user.cols(); ++m) out << ",user_" << (m + 1);
    out << ",sum\n";
    for (size_t g = 0; g < table.theta_deg.size(); ++g) {
        out << table.theta_deg[g];
        for (int m = 0; m < table.per_user.cols(); ++m)
            out << "," << table.per_user(g, m);
        out << "," << table.sum[g] << "\n";
    }
}

std::vector<double> default_grid() {
    std::vector<double> grid;
    for (double t = -90.0; t <= 90.0 + 1e-9; t += 0.25) grid.push_back(t);
    return grid;
}

std::vector<std::string> run_single_instance(const ExperimentConfig& cfg,
                                             const Scenario& scenario,
                                             bool cochannel_report,
                                             const std::vector<double>& check_angles,
                                             double cap_or_beta, bool nulling) {
    std::vector<std::string> written;
    PipelineOptions opts;
    opts.n_rand = cfg.n_rand;
    opts.seed = cfg.seed;
    const PipelineOutcome res = solve_downlink(scenario, opts);
    if (res.status != PipelineStatus::Ok)
        throw std::runtime_error("experiment scenario unexpectedly infeasible");

    const fs::path sol_path = fs::path(cfg.out_dir) / "solution.json";
    save_solution(res.solution, sol_path.string());
    written.push_back(sol_path.string());

    {
        std::ofstream out = open_csv(cfg.out_dir, "table1.csv", written);
        out << "user,original_rank,reduced_rank\n";
        for (size_t u = 0; u < res.solution.initial_ranks.size(); ++u)
            out << (u + 1) << "," << res.solution.initial_ranks[u] << ","
                << res.solution.reduced_ranks[u] << "\n";
    }

    write_beampattern_csv(beampattern(res.solution.W, default_grid()), cfg.out_dir,
                          "beampattern.csv", written);

    if (cochannel_report) {
        const BeampatternTable at = beampattern(res.solution.W, check_angles);
        if (!nulling) {
            std::ofstream out = open_csv(cfg.out_dir, "cochannel.csv", written);
            out << "angle_deg,sum_power,cap\n";
            for (size_t g = 0; g < check_angles.size(); ++g)
                out << check_angles[g] << "," << at.sum[g] << "," << cap_or_beta << "\n";
        } else {
            std::ofstream out = open_csv(cfg.out_dir, "interference.csv", written);
            out << "angle_deg,user,received,cap\n";
            const int N = scenario.antennas;
            for (size_t g = 0; g < check_angles.size(); ++g) {
                const CVec h = steering_vector(check_angles[g], N);
                for (size_t m = 0; m < res.solution.W.size(); ++m) {
                    const double received = (res.solution.W[m].adjoint() * h).squaredNorm();
                    const double cap = cap_or_beta * h.squaredNorm() *
                                       (res.solution.W[m] * res.solution.W[m].adjoint())
                                           .trace()
                                           .real();
                    out << check_angles[g] << "," << (m + 1) << "," << received
                        << "," << cap << "\n";
                }
            }
        }
    }
    return written;
}

}  // namespace

std::vector<std::string> run_experiment(const ExperimentConfig& config) {
    if (config.runs < 1) throw std::invalid_argument("experiment: runs must be >= 1");
    fs::create_directories(config.out_dir);
    const int workers = config.workers > 0 ? config.workers : env_workers();

    if (config.id == "example2")
        return run_single_instance(config, example2_scenario(), true,
                                   example2_cochannel_angles(), 0.1, false);
    if (config.id == "example4")
        return run_single_instance(config, example4_scenario(), true,
                                   example1_terminal_angles(), 0.005, true);

    std::vector<std::string> written;
    if (config.id == "example1" || config.id == "example3") {
        const bool ex1 = config.id == "example1";
        const std::vector<double> grid =
            ex1 ? sweep_grid(config, 0.0, 10.0, 1.0) : sweep_grid(config, 0.0, 5.0, 1.0);
        const std::vector<double> user_angles = example1_user_angles();
        const std::vector<double> other_angles =
            ex1 ? example1_terminal_angles() : example2_cochannel_angles();
        const double step = grid.size() > 1 ? grid[1] - grid[0] : 1.0;

        std::vector<SweepPoint> sweep(grid.size());
        for (size_t pi = 0; pi < grid.size(); ++pi) {
            sweep[pi].sinr_db = grid[pi];
            sweep[pi].runs.resize(config.runs);
        }

        Rng master(config.seed);
        for (size_t pi = 0; pi < grid.size(); ++pi) {
            const double s_db = grid[pi];
            parallel_for(config.runs, workers, [&, pi, s_db](int run) {
                Rng rng = master.fork((static_cast<std::uint64_t>(pi) << 24) |
                                      static_cast<std::uint64_t>(run));
                const std::vector<double> ua = perturb_angles(user_angles, rng, kJitterDeg);
                const std::vector<double> oa = perturb_angles(other_angles, rng, kJitterDeg);

                Scenario sc;
                if (ex1) {
                    sc = users_at(ua, 12, s_db);
                    sc.shaping = charging_constraints(oa, db2lin(5.0), sc.antennas,
                                                      sc.num_users());
                } else {
                    sc = users_at(ua, 18, s_db);
                    // targets drawn uniformly inside this sweep bin
                    for (User& u : sc.users) {
                        const double lo = std::max(grid.front(), s_db - 0.5 * step);
                        const double hi = std::min(grid.back(), s_db + 0.5 * step);
                        u.sinr_target = db2lin(rng.uniform(lo, hi));
                    }
                    sc.shaping = sidelobe_constraints(oa, 0.1, 1e-5, sc.antennas,
                                                      sc.num_users());
                }
                sweep[pi].runs[run] = evaluate_run(sc, config.n_rand, rng.integer());
            });
        }
        write_sweep_reports(sweep, static_cast<int>(user_angles.size()),
                            config.out_dir, written);
        return written;
    }

    if (config.id == "custom") {
        if (config.scenario_path.empty())
            throw std::invalid_argument("experiment custom: scenario file required");
        const Scenario base = load_scenario(config.scenario_path);
        if (!config.sweep_given) {
            PipelineOptions opts;
            opts.n_rand = config.n_rand;
            opts.seed = config.seed;
            const PipelineOutcome res = solve_downlink(base, opts);
            if (res.status != PipelineStatus::Ok)
                throw std::runtime_error("custom scenario infeasible");
            const fs::path sol = fs::path(config.out_dir) / "solution.json";
            save_solution(res.solution, sol.string());
            written.push_back(sol.string());
            return written;
        }
        const std::vector<double> grid = sweep_grid(config, 0.0, 10.0, 1.0);
        std::vector<SweepPoint> sweep(grid.size());
        Rng master(config.seed);
        for (size_t pi = 0; pi < grid.size(); ++pi) {
            sweep[pi].sinr_db = grid[pi];
            sweep[pi].runs.resize(1);
            Scenario sc = base;
            for (User& u : sc.users) u.sinr_target = db2lin(grid[pi]);
            sweep[pi].runs[0] =
                evaluate_run(sc, config.n_rand, master.fork(pi).integer());
        }
        write_sweep_reports(sweep, base.num_users(), config.out_dir, written);
        return written;
    }

    throw std::invalid_argument("unknown experiment id: " + config.id);
}

std::string write_plot_script(const std::string& dir) {
    const fs::path path = fs::path(dir) / "plots.gp";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "# gnuplot script; run from this directory: gnuplot plots.gp\n"
        << "set datafile separator ','\n"
        << "set key outside\n"
        << "set grid\n";
    auto have = [&](const char* name) { return fs::exists(fs::path(dir) / name); };
    if (have("power_vs_sinr.csv")) {
        out << "\nset term pngcairo size 900,600\nset output 'power_vs_sinr.png'\n"
            << "set xlabel 'SINR target (dB)'\nset ylabel 'mean power per slot'\n"
            << "plot for [a in \"general rank_two rank_one\"] 'power_vs_sinr.csv' "
               "using 1:(strcol(2) eq a ? $4 : NaN) with linespoints title a\n";
    }
    if (have("feasibility.csv")) {
        out << "\nset term pngcairo size 900,600\nset output 'feasibility.png'\n"
            << "set xlabel 'SINR target (dB)'\nset ylabel 'feasible (%)'\nset yrange [0:105]\n"
            << "plot for [a in \"general rank_two rank_one\"] 'feasibility.csv' "
               "using 1:(strcol(2) eq a ? $3 : NaN) with linespoints title a\n"
            << "set yrange [*:*]\n";
    }
    if (have("beampattern.csv")) {
        out << "\nset term pngcairo size 1200,600\nset output 'beampattern.png'\n"
            << "set xlabel 'angle (deg)'\nset ylabel 'received power (dB)'\n"
            << "plot 'beampattern.csv' using 1:(10*log10($2)) with lines title 'user 1', \\\n"
            << "     '' using 1:(10*log10($3)) with lines title 'user 2', \\\n"
            << "     '' using 1:(10*log10($4)) with lines title 'user 3', \\\n"
            << "     '' using 1:(10*log10(column('sum'))) with lines lw 2 title 'sum'\n";
    }
    if (have("ranks.csv")) {
        out << "\nset term pngcairo size 900,600\nset output 'ranks.png'\n"
            << "set xlabel 'SINR target (dB)'\nset ylabel 'rank share (%)'\n"
            << "plot 'ranks.csv' using 1:4:3 with points pt 7 ps variable title 'rank'\n";
    }
    out.close();
    return path.string();
}

}  // namespace grbf
