#include "bcw/experiment.hpp"
#include "bcw/io.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <fstream>
#include <iostream>

namespace {

bcw::ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw bcw::StageError(bcw::Stage::Config, "cannot open config: " + path);
    nlohmann::json j;
    f >> j;
    return bcw::ExperimentConfig::from_json(j);
}

void apply_overrides(bcw::ExperimentConfig& cfg, int I, double T, double alpha_rel,
                     double beta, const std::string& out, bool paper_scale,
                     const std::string& cache_dir, bool cache_refresh, bool spectrum) {
    if (I > 0) cfg.I = I;
    if (T > 0) cfg.T = T;
    if (alpha_rel > 0) cfg.recon.alpha_rel = alpha_rel;
    if (beta >= 0) cfg.recon.beta = beta;
    if (!out.empty()) cfg.output_dir = out;
    if (paper_scale) cfg.paper_scale = true;
    if (!cache_dir.empty()) cfg.cache_dir = cache_dir;
    if (cache_refresh) cfg.cache_refresh = true;
    if (spectrum) cfg.export_spectrum = true;
}

void print_report(const bcw::RunReport& report) {
    for (const auto& v : report.variants) {
        std::cout << v.label << ": error vs truth " << v.err_truth_pct
                  << "%, vs projection " << v.err_proj_pct << "%";
        for (const auto& w : v.warnings) std::cout << " [" << w << "]";
        std::cout << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    Eigen::setNbThreads(0);  // use all cores for dense products

    CLI::App app{"boundary-control wave speed reconstruction"};
    app.require_subcommand(1);

    std::string config_path, out_path, in_path, cache_dir;
    int I = 0;
    double T = 0, alpha_rel = 0, beta = -1;
    bool paper_scale = false, cache_refresh = false, spectrum = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file");
        cmd->add_option("--out", out_path, "output path or directory");
        cmd->add_option("-I,--grid-i", I, "inversion grid intervals per axis");
        cmd->add_option("-T,--horizon", T, "half time horizon");
        cmd->add_option("--alpha-rel", alpha_rel, "control regularization (relative)");
        cmd->add_option("--beta", beta, "c^-2 system Tikhonov weight");
        cmd->add_option("--cache-dir", cache_dir, "ND cache directory (or $BCW_CACHE_DIR)");
        cmd->add_flag("--refresh-cache", cache_refresh, "force reassembly");
        cmd->add_flag("--paper-scale", paper_scale, "allow paper-scale grids (slow)");
        cmd->add_flag("--spectrum", spectrum, "export the singular values of [K]");
    };

    auto* ndmap = app.add_subcommand("ndmap", "assemble or inspect ND matrices");
    auto* nd_assemble = ndmap->add_subcommand("assemble", "assemble the clean ND matrix");
    add_common(nd_assemble);
    auto* nd_info = ndmap->add_subcommand("info", "print container metadata");
    nd_info->add_option("--in", in_path, "container file")->required();

    auto* recon = app.add_subcommand("recon", "reconstruction runs");
    auto* recon_run = recon->add_subcommand("run", "run a configured reconstruction");
    add_common(recon_run);

    auto* experiment = app.add_subcommand("experiment", "paper experiment presets");
    std::string preset;
    experiment->add_option("preset", preset, "exp1|exp2|exp3|exp4")->required();
    add_common(experiment);

    auto* exp_cmd = app.add_subcommand("export", "export matrices for plotting");
    auto* heat = exp_cmd->add_subcommand("heatmap", "CSV + PGM heatmap of a container");
    heat->add_option("--in", in_path, "container file")->required();
    heat->add_option("--out", out_path, "output base path")->required();
    auto* spec_cmd = exp_cmd->add_subcommand("spectrum", "singular values of a container");
    spec_cmd->add_option("--in", in_path, "container file")->required();
    spec_cmd->add_option("--out", out_path, "output CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (nd_assemble->parsed()) {
            bcw::ExperimentConfig cfg =
                config_path.empty() ? bcw::ExperimentConfig{} : load_config(config_path);
            apply_overrides(cfg, I, T, alpha_rel, beta, out_path, paper_scale, cache_dir,
                            cache_refresh, spectrum);
            bcw::NdMatrix nd = bcw::obtain_nd_map(cfg);
            std::cout << "assembled " << nd.matrix.m.rows() << "x" << nd.matrix.m.cols()
                      << " ND matrix (I=" << nd.grid().I << ", L=" << nd.grid().L
                      << ", fine I=" << nd.I_fine << ")\n";
        } else if (nd_info->parsed()) {
            const bcw::MatrixXd m = bcw::load_matrix(in_path);
            std::cout << "matrix " << m.rows() << "x" << m.cols() << "\n";
            if (auto sidecar = bcw::load_sidecar(in_path))
                std::cout << sidecar->dump(2) << "\n";
        } else if (recon_run->parsed()) {
            bcw::ExperimentConfig cfg =
                config_path.empty() ? bcw::ExperimentConfig{} : load_config(config_path);
            apply_overrides(cfg, I, T, alpha_rel, beta, out_path, paper_scale, cache_dir,
                            cache_refresh, spectrum);
            print_report(bcw::run_experiment(cfg));
        } else if (experiment->parsed()) {
            bcw::ExperimentConfig cfg = config_path.empty() ? bcw::preset_config(preset)
                                                            : load_config(config_path);
            if (config_path.empty() && preset.rfind("exp", 0) == 0)
                cfg.experiment = preset;
            apply_overrides(cfg, I, T, alpha_rel, beta, out_path, paper_scale, cache_dir,
                            cache_refresh, spectrum);
            if (cfg.paper_scale && cfg.I < 40) cfg.I = 50;
            if (cfg.paper_scale)
                std::cerr << "paper-scale run: expect hours of runtime and >25 GB of memory\n";
            print_report(bcw::run_experiment(cfg));
        } else if (heat->parsed()) {
            bcw::export_heatmap(bcw::load_matrix(in_path), out_path);
            std::cout << "wrote " << out_path << ".{csv,pgm,json}\n";
        } else if (spec_cmd->parsed()) {
            const int zeros = bcw::spectrum_report(bcw::load_matrix(in_path), out_path);
            std::cout << "wrote " << out_path << " (" << zeros
                      << " singular values below 1e-10 * sigma_max)\n";
        }
    } catch (const bcw::StageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.stage);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
