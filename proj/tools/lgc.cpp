#include "lgc/acvf.hpp"
#include "lgc/bounds.hpp"
#include "lgc/harness.hpp"
#include "lgc/link.hpp"
#include "lgc/sparse_var.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace lgc;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    return out;
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> read_counts(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::vector<long>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (line.find_first_not_of("0123456789,-+ \t\r") != std::string::npos)
            continue;  // header line
        std::vector<long> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stol(cell));
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("no data rows in " + path);
    Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> x(rows.size(), rows[0].size());
    for (size_t t = 0; t < rows.size(); ++t) {
        if (rows[t].size() != rows[0].size())
            throw std::runtime_error("ragged CSV in " + path);
        for (size_t j = 0; j < rows[t].size(); ++j) x(t, j) = rows[t][j];
    }
    return x;
}

void write_counts(const Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>& x,
                  std::ostream& os) {
    for (long j = 0; j < x.cols(); ++j) os << (j ? "," : "") << "x" << (j + 1);
    os << "\n";
    for (long t = 0; t < x.rows(); ++t) {
        for (long j = 0; j < x.cols(); ++j) os << (j ? "," : "") << x(t, j);
        os << "\n";
    }
}

int cmd_simulate(const std::string& config_path, std::uint64_t seed, long t_len,
                 const std::string& out_path) {
    auto cfg = ExperimentConfig::from_json(read_file(config_path));
    if (seed) cfg.master_seed = seed;
    auto truth = cfg.make_model(std::max(cfg.L, cfg.p));
    if (t_len <= 0) t_len = cfg.n_grid.front() + cfg.L;
    Eigen::MatrixXd z =
        simulate(truth.model, t_len, derive_stream_seed(cfg.master_seed, 1));
    auto x = transform_counts(z, cfg.marginal_specs());
    auto out = open_out(out_path);
    write_counts(x, out);
    return 0;
}

int cmd_estimate(const std::string& config_path, const std::string& in_path,
                 const std::string& out_path) {
    auto cfg = ExperimentConfig::from_json(read_file(config_path));
    auto x = read_counts(in_path);
    std::vector<Family> fams;
    for (const auto& s : cfg.marginal_specs()) fams.push_back(s.family);
    DiagMode dm = cfg.diag_mode == "force_one" ? DiagMode::ForceOne
                                               : DiagMode::EstimateClamped;
    auto est = estimate_latent_acvf(x, cfg.L, fams, dm, cfg.known_counts);
    auto out = open_out(out_path);
    out << "# clamp_hits: " << est.clamp_hits << "\n";
    out << "# theta_hats:";
    for (const auto& s : est.theta_hats) {
        out << " " << family_name(s.family) << "(";
        for (size_t k = 0; k < s.theta.size(); ++k)
            out << (k ? "," : "") << fmt17(s.theta[k]);
        out << ")";
    }
    out << "\n";
    out << "lag,i,j,gamma_z_hat\n";
    for (size_t h = 0; h < est.acvf_hat.lag_blocks.size(); ++h)
        for (int i = 0; i < est.acvf_hat.d; ++i)
            for (int j = 0; j < est.acvf_hat.d; ++j)
                out << h << ',' << i << ',' << j << ','
                    << fmt17(est.acvf_hat.lag_blocks[h](i, j)) << "\n";
    return 0;
}

int cmd_lasso(const std::string& config_path, const std::string& in_path,
              const std::string& out_path) {
    auto cfg = ExperimentConfig::from_json(read_file(config_path));
    auto x = read_counts(in_path);
    std::vector<Family> fams;
    for (const auto& s : cfg.marginal_specs()) fams.push_back(s.family);
    auto prob = build_problem(x, cfg.p, fams, 0.0, cfg.known_counts);
    std::vector<double> lambdas =
        cfg.lambda_grid.empty() ? default_lambda_grid(cfg.p, cfg.d, x.rows() - cfg.p)
                                : cfg.lambda_grid;
    auto out = open_out(out_path);
    out << "lambda,support_size,kkt_residual,iterations,objective\n";
    for (double lam : lambdas) {
        prob.lambda = lam;
        auto sol = lasso_solve(prob);
        long support = 0;
        for (long j = 0; j < sol.beta_hat.size(); ++j)
            support += std::abs(sol.beta_hat(j)) > 1e-8;
        out << fmt17(lam) << ',' << support << ',' << fmt17(sol.kkt_residual) << ','
            << sol.iterations << ',' << fmt17(sol.objective) << "\n";
    }
    return 0;
}

int cmd_link_table(const std::string& config_path, int points,
                   const std::string& out_path) {
    auto cfg = ExperimentConfig::from_json(read_file(config_path));
    auto specs = cfg.marginal_specs();
    if (specs.size() < 2) throw std::runtime_error("link-table needs at least two columns");
    LinkContext ctx(specs[0], specs[1], false);
    auto out = open_out(out_path);
    out << "u,link,link_deriv\n";
    for (int i = 0; i < points; ++i) {
        double u = -0.999 + 1.998 * i / (points - 1);
        out << fmt17(u) << ',' << fmt17(link_eval(ctx, u)) << ','
            << fmt17(link_deriv(ctx, u)) << "\n";
    }
    return 0;
}

int cmd_m3_check(const std::string& config_path, long n_cap) {
    auto cfg = ExperimentConfig::from_json(read_file(config_path));
    std::cout << "column,family,partial_sum,converged,tail_ratio\n";
    int j = 0;
    for (const auto& spec : cfg.marginal_specs()) {
        auto r = m3_series(spec, n_cap);
        std::cout << j++ << ',' << family_name(spec.family) << ','
                  << fmt17(r.partial_sum) << ',' << (r.converged ? 1 : 0) << ','
                  << fmt17(r.tail_ratio) << "\n";
    }
    return 0;
}

int cmd_constants(const std::string& config_path, int s, double c_z, double eps,
                  double delta_tilde, double eps_tilde, const std::string& out_path) {
    auto cfg = ExperimentConfig::from_json(read_file(config_path));
    auto truth = cfg.make_model(std::max(cfg.L, cfg.p));
    auto specs = cfg.marginal_specs();
    auto bc = q_of_gamma(specs, truth.acvf, s, c_z, eps, delta_tilde, eps_tilde);
    long n = cfg.n_grid.front();
    auto vb = var_bound_quantities(truth.model, Eigen::Map<const Eigen::MatrixXd>(
                                       cfg.true_beta(truth).data(), cfg.p * cfg.d, cfg.d),
                                   s, bc.q_const, n);
    auto out = open_out(out_path);
    out << "c_z,eps,delta_tilde,eps_tilde,m_big,mu_big,m1,m2,delta_eps,d_const,"
           "r_const,s_const,t_const,u_const,q_const,gamma_norm_s,gamma_norm_heuristic,"
           "c_of_delta,grid_sup,mu_max,alpha,tau,nu,q_beta0,lambda_threshold\n";
    out << fmt17(bc.c_z) << ',' << fmt17(bc.eps) << ',' << fmt17(bc.delta_tilde) << ','
        << fmt17(bc.eps_tilde) << ',' << fmt17(bc.moments.m_big) << ','
        << fmt17(bc.moments.mu_big) << ',' << fmt17(bc.moments.m1) << ','
        << fmt17(bc.moments.m2) << ',' << fmt17(bc.moments.delta_eps) << ','
        << fmt17(bc.d_const) << ',' << fmt17(bc.r_const) << ',' << fmt17(bc.s_const)
        << ',' << fmt17(bc.t_const) << ',' << fmt17(bc.u_const) << ','
        << fmt17(bc.q_const) << ',' << fmt17(bc.gamma_norm_s) << ','
        << (bc.gamma_norm_heuristic ? 1 : 0) << ',' << fmt17(bc.c_of_delta) << ','
        << (bc.grid_sup ? 1 : 0) << ',' << fmt17(vb.mu_max) << ',' << fmt17(vb.alpha)
        << ',' << fmt17(vb.tau) << ',' << fmt17(vb.nu) << ',' << fmt17(vb.q_beta0)
        << ',' << fmt17(vb.lambda_threshold) << "\n";
    return 0;
}

int cmd_mc_run(const std::string& config_path, std::uint64_t seed, int threads,
               const std::string& out_path) {
    auto cfg = ExperimentConfig::from_json(read_file(config_path));
    if (seed) cfg.master_seed = seed;
    auto result = run_experiment(cfg, threads);
    auto out = open_out(out_path);
    write_csv(result, out);
    if (result.failed_cells)
        std::cerr << result.failed_cells << " cell(s) failed; see error column\n";
    return 0;
}

int cmd_replay(const std::string& config_path, const std::string& cell) {
    auto cfg = ExperimentConfig::from_json(read_file(config_path));
    int n_index = 0, rep = 0;
    if (std::sscanf(cell.c_str(), "%d,%d", &n_index, &rep) != 2)
        throw std::runtime_error("--cell expects 'n_index,replicate'");
    ExperimentResult r;
    r.config = cfg;
    r.rows = run_cell(cfg, n_index, rep);
    write_csv(r, std::cout);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"latent Gaussian count time series toolkit"};
    app.require_subcommand(1);

    std::string config_path, in_path, out_path = "out.csv", cell = "0,0";
    std::uint64_t seed = 0;
    long t_len = 0, n_cap = 500;
    int threads = 1, points = 101, s = 1;
    double c_z = 0.5, eps = 0.0, delta_tilde = 0.01, eps_tilde = 0.01;

    auto add_common = [&](CLI::App* sub, bool needs_config = true) {
        auto* opt = sub->add_option("--config", config_path, "experiment config JSON");
        if (needs_config) opt->required();
        sub->add_option("--seed", seed, "master seed override");
        sub->add_option("--out", out_path, "output path");
    };

    auto* sim = app.add_subcommand("simulate", "simulate a count panel");
    add_common(sim);
    sim->add_option("--T", t_len, "series length (default first n_grid + L)");

    auto* est = app.add_subcommand("estimate", "latent ACVF from counts CSV");
    add_common(est);
    est->add_option("--in", in_path, "counts CSV")->required();

    auto* las = app.add_subcommand("lasso", "penalized VAR fit from counts CSV");
    add_common(las);
    las->add_option("--in", in_path, "counts CSV")->required();

    auto* lt = app.add_subcommand("link-table", "tabulate the pairwise link");
    add_common(lt);
    lt->add_option("--points", points, "grid size");

    auto* m3 = app.add_subcommand("m3-check", "series convergence diagnostics");
    add_common(m3);
    m3->add_option("--n-cap", n_cap, "partial-sum cap");

    auto* con = app.add_subcommand("constants", "theoretical bound constants");
    add_common(con);
    con->add_option("--s", s, "sparsity");
    con->add_option("--c-z", c_z, "latent correlation bound");
    con->add_option("--eps", eps, "parameter box half-width");
    con->add_option("--delta-tilde", delta_tilde, "delta-tilde");
    con->add_option("--eps-tilde", eps_tilde, "eps-tilde");

    auto* mc = app.add_subcommand("mc-run", "Monte Carlo sweep");
    add_common(mc);
    mc->add_option("--threads", threads, "worker threads");

    auto* rp = app.add_subcommand("replay", "re-run one sweep cell");
    add_common(rp);
    rp->add_option("--cell", cell, "n_index,replicate");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(config_path, seed, t_len, out_path);
        if (est->parsed()) return cmd_estimate(config_path, in_path, out_path);
        if (las->parsed()) return cmd_lasso(config_path, in_path, out_path);
        if (lt->parsed()) return cmd_link_table(config_path, points, out_path);
        if (m3->parsed()) return cmd_m3_check(config_path, n_cap);
        if (con->parsed())
            return cmd_constants(config_path, s, c_z, eps, delta_tilde, eps_tilde, out_path);
        if (mc->parsed()) return cmd_mc_run(config_path, seed, threads, out_path);
        if (rp->parsed()) return cmd_replay(config_path, cell);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
