// Command-line driver for the point-cloud DG pipeline.
//
// Subcommands:
//   reconstruct  patch reconstruction + geometric error table (geo_errors.csv)
//   solve        Laplace-Beltrami source problem errors (solution_errors.csv)
//   eigen        Laplace-Beltrami eigenvalue problem errors (eigen_errors.csv)
//   convergence  all three studies in one run
//
// Every run writes run_manifest.json with the fully resolved configuration.
// Exit codes: 0 ok, 2 config/input error, 3 geometry failure, 4 solver failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pcdg/errors.hpp"
#include "pcdg/study.hpp"

namespace {

using nlohmann::json;

struct CliConfig {
    std::string surface = "sphere";
    std::string cloud_file;
    std::string mesh_file;
    std::string config_file;
    std::string out_dir = ".";
    std::string beta = "auto"; // "auto" -> 10(l+1)^2
    std::string m = "auto";    // "auto" -> (k+1)(k+2)
    int k = 2;
    int l = 2;
    int levels = 4;
    int knn = 12;
    int count = -1; // eigenpairs; auto -> per-surface default
    int quad_boost = 0;
    double newton_tol = 1e-14;
    bool literal_edge_jump = false;
    bool emit_dat = false;
};

double parse_auto(const std::string& text, const std::string& flag) {
    if (text == "auto") return -1.0;
    try {
        std::size_t used = 0;
        double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw pcdg::ConfigError(flag + ": expected a number or 'auto', got '" + text + "'");
    }
}

// Pre-scan argv for --config and fold the JSON file into the defaults, so
// that flags given on the command line still override file values.
void apply_config_file(int argc, char** argv, CliConfig& cfg) {
    std::string path;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a.rfind("--config=", 0) == 0) path = a.substr(9);
        else if (a == "--config" && i + 1 < argc) path = argv[i + 1];
    }
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw pcdg::ConfigError("config file not found: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw pcdg::ConfigError("config file " + path + ": " + e.what());
    }
    auto str = [&](const char* key, std::string& dst) {
        if (j.contains(key)) dst = j.at(key).is_string()
                                       ? j.at(key).get<std::string>()
                                       : j.at(key).dump();
    };
    auto num = [&](const char* key, auto& dst) {
        if (j.contains(key)) dst = j.at(key);
    };
    str("surface", cfg.surface);
    str("cloud", cfg.cloud_file);
    str("mesh", cfg.mesh_file);
    str("out", cfg.out_dir);
    str("beta", cfg.beta);
    str("m", cfg.m);
    num("k", cfg.k);
    num("l", cfg.l);
    num("levels", cfg.levels);
    num("knn", cfg.knn);
    num("count", cfg.count);
    num("quad_boost", cfg.quad_boost);
    num("newton_tol", cfg.newton_tol);
    num("literal_edge_jump", cfg.literal_edge_jump);
}

pcdg::StudyConfig resolve(const CliConfig& cli) {
    if (cli.k < 1 || cli.l < 1) throw pcdg::ConfigError("k and l must be >= 1");
    if (cli.levels < 1) throw pcdg::ConfigError("levels must be >= 1");
    if (cli.newton_tol <= 0) throw pcdg::ConfigError("newton-tol must be > 0");
    pcdg::StudyConfig cfg;
    cfg.surface = cli.surface;
    if (!cli.cloud_file.empty() || !cli.mesh_file.empty()) {
        cfg.surface = "custom";
        cfg.cloud_file = cli.cloud_file;
        cfg.mesh_file = cli.mesh_file;
    }
    cfg.k = cli.k;
    cfg.l = cli.l;
    cfg.levels = cli.levels;
    cfg.knn = cli.knn;
    cfg.eigen_count = cli.count;
    cfg.quad_boost = cli.quad_boost;
    cfg.newton_tol = cli.newton_tol;
    cfg.expanded_edge_jump = !cli.literal_edge_jump;
    double beta = parse_auto(cli.beta, "--beta");
    if (beta != -1.0 && beta < 0) throw pcdg::ConfigError("--beta must be >= 0 or 'auto'");
    cfg.beta = beta >= 0 ? beta : pcdg::default_penalty(cli.l);
    double m = parse_auto(cli.m, "--m");
    cfg.m = m >= 0 ? int(m) : (cli.k + 1) * (cli.k + 2);
    return cfg;
}

void write_manifest(const std::string& cmd, const CliConfig& cli,
                    const pcdg::StudyConfig& cfg,
                    const std::vector<std::string>& outputs) {
    json j;
    j["command"] = cmd;
    j["surface"] = cfg.surface;
    j["cloud"] = cfg.cloud_file;
    j["mesh"] = cfg.mesh_file;
    j["k"] = cfg.k;
    j["l"] = cfg.l;
    j["levels"] = cfg.levels;
    j["beta"] = cfg.beta;
    j["knn"] = cfg.knn;
    j["m"] = cfg.m;
    j["newton_tol"] = cfg.newton_tol;
    j["quad_boost"] = cfg.quad_boost;
    j["count"] = cfg.eigen_count;
    j["expanded_edge_jump"] = cfg.expanded_edge_jump;
    j["out"] = cli.out_dir;
    j["outputs"] = outputs;
    std::ofstream out(std::filesystem::path(cli.out_dir) / "run_manifest.json");
    out << j.dump(2) << "\n";
}

void emit_table(const pcdg::ConvergenceTable& table, const CliConfig& cli,
                const std::string& name, std::vector<std::string>& outputs) {
    namespace fs = std::filesystem;
    fs::path csv = fs::path(cli.out_dir) / (name + ".csv");
    table.write_csv(csv.string());
    outputs.push_back(csv.filename().string());
    if (cli.emit_dat) {
        // gnuplot-friendly companion: same rows, whitespace separated.
        fs::path dat = fs::path(cli.out_dir) / (name + ".dat");
        std::ofstream out(dat);
        out << "# level N_v dofs metric error order\n";
        for (const auto& r : table.rows) {
            char line[256];
            std::snprintf(line, sizeof line, "%d %ld %ld %s %.8e %s\n", r.level,
                          r.n_v, r.dofs, r.metric.c_str(), r.error,
                          r.order ? std::to_string(*r.order).c_str() : "nan");
            out << line;
        }
        outputs.push_back(dat.filename().string());
    }
    std::fputs(table.csv().c_str(), stdout);
}

int dispatch(const std::string& cmd, const CliConfig& cli) {
    pcdg::StudyConfig cfg = resolve(cli);
    std::filesystem::create_directories(cli.out_dir);
    std::vector<std::string> outputs;
    if (cmd == "reconstruct" || cmd == "convergence")
        emit_table(pcdg::run_reconstruct(cfg), cli, "geo_errors", outputs);
    if (cmd == "solve" || cmd == "convergence")
        emit_table(pcdg::run_solve(cfg), cli, "solution_errors", outputs);
    if (cmd == "eigen" || cmd == "convergence")
        emit_table(pcdg::run_eigen(cfg).table, cli, "eigen_errors", outputs);
    write_manifest(cmd, cli, cfg, outputs);
    return 0;
}

void add_common_options(CLI::App* sub, CliConfig& cfg) {
    sub->add_option("--surface", cfg.surface,
                    "sphere | torus | plane-test (ignored if --cloud/--mesh given)");
    sub->add_option("--cloud", cfg.cloud_file, "point cloud file (.xyz)");
    sub->add_option("--mesh", cfg.mesh_file, "reference mesh file (.off)");
    sub->add_option("--config", cfg.config_file, "JSON config file; flags override");
    sub->add_option("--k", cfg.k, "geometric (patch) polynomial degree");
    sub->add_option("--l", cfg.l, "finite element polynomial degree");
    sub->add_option("--levels", cfg.levels, "number of refinement levels");
    sub->add_option("--beta", cfg.beta, "penalty parameter, or 'auto' = 10(l+1)^2");
    sub->add_option("--knn", cfg.knn, "neighbors used when projecting new vertices");
    sub->add_option("--m", cfg.m, "fitting point count, or 'auto' = (k+1)(k+2)");
    sub->add_option("--newton-tol", cfg.newton_tol, "closest-point Newton tolerance");
    sub->add_option("--quad-boost", cfg.quad_boost, "extra quadrature order");
    sub->add_option("--count", cfg.count, "number of eigenpairs (eigen runs)");
    sub->add_option("--out", cfg.out_dir, "output directory");
    sub->add_flag("--literal-edge-jump", cfg.literal_edge_jump,
                  "use the literal product-jump consistency term");
    sub->add_flag("--dat", cfg.emit_dat, "also write gnuplot-style .dat tables");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discontinuous Galerkin PDE solver on point-cloud surfaces"};
    app.require_subcommand(1);
    CliConfig cfg;
    try {
        apply_config_file(argc, argv, cfg);
    } catch (const pcdg::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    const char* names[] = {"reconstruct", "solve", "eigen", "convergence"};
    const char* descs[] = {"patch reconstruction and geometric error study",
                           "Laplace-Beltrami source problem study",
                           "Laplace-Beltrami eigenvalue study",
                           "all studies (geometry, source, eigen)"};
    for (int i = 0; i < 4; ++i)
        add_common_options(app.add_subcommand(names[i], descs[i]), cfg);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    try {
        return dispatch(app.get_subcommands().front()->get_name(), cfg);
    } catch (const pcdg::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const pcdg::IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const pcdg::NotPositiveDefinite& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return 4;
    } catch (const pcdg::SolverStagnation& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return 4;
    } catch (const pcdg::MultiplicityMismatch& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return 4;
    } catch (const pcdg::Error& e) {
        std::fprintf(stderr, "geometry error: %s\n", e.what());
        return 3;
    }
}
