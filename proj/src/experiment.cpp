#include "bcw/experiment.hpp"

#include "bcw/expr.hpp"
#include "bcw/io.hpp"

#include <Eigen/SVD>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>

namespace bcw {

namespace fs = std::filesystem;

SpeedPreset SpeedPreset::named(const std::string& name) {
    SpeedPreset p;
    p.name = name;
    if (name == "constant1") {
        p.c_bound = 1.0;
    } else if (name == "sinusoidal") {
        p.c_bound = 1.14;  // 1 + 0.08 + 0.06
    } else if (name == "piecewise") {
        p.c_bound = 1.0;
    } else if (name == "expression") {
        p.c_bound = 0.0;
    } else {
        throw StageError(Stage::Config, "unknown speed preset: " + name);
    }
    return p;
}

SpeedField SpeedPreset::sample(int I) const {
    if (name == "constant1") return SpeedField::constant(I, 1.0);
    if (name == "sinusoidal") {
        const double pi = std::acos(-1.0);
        return SpeedField::from_function(I, [pi](double x, double y) {
            return 1.0 + 0.08 * std::sin(pi * x) + 0.06 * std::cos(pi * y);
        });
    }
    if (name == "piecewise") {
        return SpeedField::from_function(I, [](double x, double y) {
            return (std::abs(x) <= 0.5 && std::abs(y) <= 0.5) ? 1.0 : 0.5;
        });
    }
    if (name == "expression") {
        Expr e = Expr::parse(expression);
        return SpeedField::from_function(I, [&e](double x, double y) { return e.eval(x, y); });
    }
    throw StageError(Stage::Config, "unknown speed preset: " + name);
}

double SpeedPreset::bound_for(int I_fine) const {
    if (c_bound > 0) return c_bound;
    return sample(I_fine).c_max();
}

std::string SpeedPreset::describe() const {
    return name == "expression" ? "expression:" + expression : name;
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json variants_json = nlohmann::json::array();
    for (const auto& v : variants) {
        nlohmann::json m = nlohmann::json::array();
        for (unsigned bit : {SideYMinus, SideXPlus, SideYPlus, SideXMinus})
            if (v.mask.removed_sides & bit) m.push_back(side_name(bit));
        variants_json.push_back(
            {{"label", v.label}, {"noise", v.noise.to_json()}, {"mask", m}});
    }
    nlohmann::json harmonics_json = nlohmann::json::array();
    for (const auto& h : harmonics) {
        if (h.kind == HarmonicFn::Kind::Constant)
            harmonics_json.push_back({{"constant", h.c}});
        else
            harmonics_json.push_back({{"center", {h.a, h.b}}});
    }
    return {
        {"experiment", experiment},
        {"speed",
         {{"preset", speed.name},
          {"expression", speed.expression},
          {"c_max", speed.c_bound}}},
        {"grid", {{"I", I}, {"T", T}, {"fine_factor", fine_factor}}},
        {"variants", variants_json},
        {"recon",
         {{"alpha_rel", recon.alpha_rel},
          {"beta", recon.beta},
          {"cutoff_rel", recon.cutoff_rel},
          {"floor", recon.floor},
          {"corner_normal",
           recon.corner == CornerNormal::UnitDiagonal ? "unit-diagonal" : "side-average"},
          {"c_norm", recon.norm == CSystemNorm::Quadrature ? "quadrature" : "euclidean"}}},
        {"harmonics", harmonics_json},
        {"output_dir", output_dir},
        {"cache", {{"dir", cache_dir}, {"refresh", cache_refresh}}},
        {"paper_scale", paper_scale},
        {"export_spectrum", export_spectrum},
    };
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    try {
        ExperimentConfig c;
        c.experiment = j.value("experiment", c.experiment);
        if (j.contains("speed")) {
            const auto& s = j.at("speed");
            c.speed = SpeedPreset::named(s.value("preset", "constant1"));
            c.speed.expression = s.value("expression", "");
            if (s.contains("c_max") && s.at("c_max").get<double>() > 0)
                c.speed.c_bound = s.at("c_max").get<double>();
        }
        if (j.contains("grid")) {
            const auto& g = j.at("grid");
            c.I = g.value("I", c.I);
            c.T = g.value("T", c.T);
            c.fine_factor = g.value("fine_factor", c.fine_factor);
        }
        if (j.contains("variants")) {
            c.variants.clear();
            for (const auto& vj : j.at("variants")) {
                VariantSpec v;
                v.label = vj.value("label", "variant" + std::to_string(c.variants.size()));
                if (vj.contains("noise")) {
                    const auto& nj = vj.at("noise");
                    const std::string kind = nj.value("kind", "none");
                    if (kind == "gaussian")
                        v.noise = NoiseSpec::gaussian(nj.at("level").get<double>(),
                                                      nj.value("seed", 0ull));
                    else if (kind == "constant")
                        v.noise = NoiseSpec::constant(nj.at("level").get<double>());
                    else if (kind != "none")
                        throw StageError(Stage::Config, "unknown noise kind: " + kind);
                }
                if (vj.contains("mask"))
                    for (const auto& side : vj.at("mask"))
                        v.mask.removed_sides |= side_from_name(side.get<std::string>());
                c.variants.push_back(std::move(v));
            }
        }
        if (j.contains("recon")) {
            const auto& r = j.at("recon");
            c.recon.alpha_rel = r.value("alpha_rel", c.recon.alpha_rel);
            c.recon.beta = r.value("beta", c.recon.beta);
            c.recon.cutoff_rel = r.value("cutoff_rel", c.recon.cutoff_rel);
            c.recon.floor = r.value("floor", c.recon.floor);
            const std::string corner = r.value("corner_normal", "unit-diagonal");
            if (corner == "unit-diagonal") c.recon.corner = CornerNormal::UnitDiagonal;
            else if (corner == "side-average") c.recon.corner = CornerNormal::SideAverage;
            else throw StageError(Stage::Config, "unknown corner_normal: " + corner);
            const std::string norm = r.value("c_norm", "quadrature");
            if (norm == "quadrature") c.recon.norm = CSystemNorm::Quadrature;
            else if (norm == "euclidean") c.recon.norm = CSystemNorm::Euclidean;
            else throw StageError(Stage::Config, "unknown c_norm: " + norm);
        }
        if (j.contains("harmonics")) {
            c.harmonics.clear();
            for (const auto& hj : j.at("harmonics")) {
                if (hj.contains("constant"))
                    c.harmonics.push_back(HarmonicFn::constant(hj.at("constant").get<double>()));
                else
                    c.harmonics.push_back(HarmonicFn::log_center(hj.at("center")[0].get<double>(),
                                                                 hj.at("center")[1].get<double>()));
            }
        }
        c.output_dir = j.value("output_dir", c.output_dir);
        if (j.contains("cache")) {
            c.cache_dir = j.at("cache").value("dir", "");
            c.cache_refresh = j.at("cache").value("refresh", false);
        }
        c.paper_scale = j.value("paper_scale", false);
        c.export_spectrum = j.value("export_spectrum", false);
        return c;
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(Stage::Config, std::string("bad config: ") + e.what());
    }
}

std::string ExperimentConfig::digest() const {
    const std::string s = to_json().dump();
    return hex64(fnv1a64(s.data(), s.size()));
}

ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig c;
    c.experiment = name;
    c.I = 25;
    c.T = 4.0;
    c.output_dir = "out/" + name;
    if (name == "exp1" || name == "exp2") {
        c.speed = SpeedPreset::named(name == "exp1" ? "constant1" : "sinusoidal");
        c.variants = {
            {"noise000", NoiseSpec::none(), {}},
            {"noise005", NoiseSpec::gaussian(0.05, 7), {}},
            {"noise050", NoiseSpec::gaussian(0.50, 7), {}},
        };
    } else if (name == "exp3") {
        c.speed = SpeedPreset::named("constant1");
        VariantSpec m1{"mask1", NoiseSpec::none(), MaskSpec{SideYMinus}};
        VariantSpec m2{"mask2", NoiseSpec::none(), MaskSpec{SideYMinus | SideXPlus}};
        VariantSpec m3{"mask3", NoiseSpec::none(), MaskSpec{SideYMinus | SideXPlus | SideYPlus}};
        c.variants = {m1, m2, m3};
    } else if (name == "exp4") {
        c.speed = SpeedPreset::named("piecewise");
        c.variants = {{"clean", NoiseSpec::none(), {}}};
    } else {
        throw StageError(Stage::Config, "unknown experiment preset: " + name);
    }
    return c;
}

nlohmann::json VariantReport::to_json() const {
    return {{"label", label},
            {"rel_l2_error_vs_truth_pct", err_truth_pct},
            {"rel_l2_error_vs_projection_pct", err_proj_pct},
            {"alpha", alpha},
            {"sigma_max_sq", sigma_max_sq},
            {"max_control_residual", max_control_residual},
            {"warnings", warnings}};
}

nlohmann::json RunReport::metrics_json() const {
    nlohmann::json v = nlohmann::json::array();
    for (const auto& r : variants) v.push_back(r.to_json());
    return {{"config_digest", config_digest}, {"variants", v}};
}

nlohmann::json RunReport::to_json() const {
    nlohmann::json times = nlohmann::json::object();
    for (const auto& [k, s] : stage_seconds) times[k] = s;
    nlohmann::json files = nlohmann::json::array();
    for (const auto& f : manifest)
        files.push_back({{"path", f.path}, {"bytes", f.bytes}, {"checksum", f.checksum}});
    nlohmann::json j = metrics_json();
    j["stage_seconds"] = times;
    j["manifest"] = files;
    return j;
}

namespace {

FileEntry manifest_entry(const std::string& path) {
    FileEntry e;
    e.path = path;
    e.bytes = static_cast<std::uint64_t>(fs::file_size(path));
    e.checksum = hex64(fnv1a64_file(path));
    return e;
}

std::string resolve_cache_dir(const ExperimentConfig& cfg) {
    if (!cfg.cache_dir.empty()) return cfg.cache_dir;
    if (const char* env = std::getenv("BCW_CACHE_DIR"); env && *env) return env;
    return cfg.output_dir + "/cache";
}

struct StageTimer {
    std::vector<std::pair<std::string, double>>& sink;
    std::string name;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    StageTimer(std::vector<std::pair<std::string, double>>& s, std::string n)
        : sink(s), name(std::move(n)) {}
    ~StageTimer() {
        const auto dt = std::chrono::steady_clock::now() - start;
        sink.emplace_back(name, std::chrono::duration<double>(dt).count());
    }
};

}  // namespace

NdMatrix obtain_nd_map(const ExperimentConfig& cfg, std::vector<FileEntry>* manifest) {
    Grid coarse, fine;
    try {
        coarse = build_grid(cfg.I, cfg.T, cfg.speed.bound_for(cfg.fine_factor * cfg.I));
        fine = refine_grid(coarse);
        for (int f = 2; f < cfg.fine_factor; f *= 2) fine = refine_grid(fine);
        if (fine.I != cfg.fine_factor * cfg.I)
            throw std::invalid_argument("fine_factor must be a power of two");
    } catch (const std::exception& e) {
        throw StageError(Stage::Grid, e.what());
    }
    if (cfg.I >= 40 && !cfg.paper_scale)
        throw StageError(Stage::Grid,
                         "I >= 40 is paper scale (hours of runtime); pass paper_scale");

    // Cache key: everything the clean matrix depends on.
    nlohmann::json key{{"I", cfg.I},
                       {"T", cfg.T},
                       {"fine_factor", cfg.fine_factor},
                       {"speed", cfg.speed.describe()},
                       {"c_bound", cfg.speed.bound_for(fine.I)},
                       {"format", 1}};
    const std::string key_str = key.dump();
    const std::string digest = hex64(fnv1a64(key_str.data(), key_str.size()));
    const std::string dir = resolve_cache_dir(cfg);
    const std::string path = dir + "/nd_" + digest + ".bctm";

    if (!cfg.cache_refresh && fs::exists(path)) {
        auto sidecar = load_sidecar(path);
        if (sidecar && sidecar->value("key", "") == key_str) {
            NdMatrix nd;
            nd.matrix = OperatorMatrix(SpaceTag::FullTime, SpaceTag::FullTime, coarse,
                                       load_matrix(path));
            nd.I_fine = fine.I;
            nd.L_fine = fine.L;
            nd.speed_desc = cfg.speed.describe();
            return nd;
        }
    }

    NdMatrix nd;
    try {
        const SpeedField speed_fine = cfg.speed.sample(fine.I);
        nd = assemble_nd_map(speed_fine, fine, coarse, cfg.speed.describe());
    } catch (const std::exception& e) {
        throw StageError(Stage::Assembly, e.what());
    }
    try {
        fs::create_directories(dir);
        nlohmann::json sidecar = nd.meta();
        sidecar["key"] = key_str;
        save_matrix(path, nd.matrix.m, sidecar);
        if (manifest) {
            manifest->push_back(manifest_entry(path));
            manifest->push_back(manifest_entry(path + ".json"));
        }
    } catch (const std::exception& e) {
        throw StageError(Stage::Io, std::string("cache write failed: ") + e.what());
    }
    return nd;
}

std::vector<FileEntry> export_heatmap(const MatrixXd& values, const std::string& base) {
    save_csv(base + ".csv", values);
    const auto [lo, hi] = save_pgm(base + ".pgm", values);
    {
        std::ofstream s(base + ".json", std::ios::trunc);
        s << nlohmann::json{{"min", lo}, {"max", hi}, {"rows", values.rows()},
                            {"cols", values.cols()}}
                 .dump(2)
          << "\n";
    }
    return {manifest_entry(base + ".csv"), manifest_entry(base + ".pgm"),
            manifest_entry(base + ".json")};
}

int spectrum_report(const MatrixXd& m, const std::string& path) {
    Eigen::BDCSVD<MatrixXd> svd(m);
    const VectorXd& sv = svd.singularValues();
    const double cutoff = 1e-10 * (sv.size() ? sv[0] : 0.0);
    int below = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] < cutoff) ++below;
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw StageError(Stage::Io, "cannot open " + path);
    char buf[40];
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", sv[i]);
        f << buf << "\n";
    }
    std::ofstream s(path + ".json", std::ios::trunc);
    s << nlohmann::json{{"count_below_cutoff", below},
                        {"cutoff_rel", 1e-10},
                        {"sigma_max", sv.size() ? sv[0] : 0.0}}
             .dump(2)
      << "\n";
    return below;
}

int spectrum_report(const OperatorMatrix& K, const std::string& path) {
    return spectrum_report(K.m, path);
}

RunReport run_experiment(const ExperimentConfig& cfg) {
    RunReport report;
    report.config_digest = cfg.digest();

    try {
        fs::create_directories(cfg.output_dir);
        std::ofstream c(cfg.output_dir + "/config.json", std::ios::trunc);
        c << cfg.to_json().dump(2) << "\n";
    } catch (const std::exception& e) {
        throw StageError(Stage::Io, e.what());
    }

    NdMatrix clean;
    {
        StageTimer t(report.stage_seconds, "assembly");
        clean = obtain_nd_map(cfg, &report.manifest);
    }
    const Grid& g = clean.grid();

    // References: sampled truth, its projection onto the product span, both
    // also as speed images.
    MatrixXd c_truth, c_proj;
    {
        StageTimer t(report.stage_seconds, "references");
        const SpeedField truth = cfg.speed.sample(g.I);
        c_truth = truth.values();
        const MatrixXd c_inv_sq_truth = truth.values().array().square().inverse().matrix();
        const ProductBasis basis(cfg.harmonics, g);
        const MatrixXd proj = basis.project(c_inv_sq_truth, cfg.recon.cutoff_rel);
        c_proj = recover_speed(proj, cfg.recon.floor).c;
        for (const auto& e : export_heatmap(c_truth, cfg.output_dir + "/c_truth"))
            report.manifest.push_back(e);
        for (const auto& e : export_heatmap(c_proj, cfg.output_dir + "/c_projection"))
            report.manifest.push_back(e);
    }

    for (const auto& variant : cfg.variants) {
        VariantReport vr;
        vr.label = variant.label;
        const std::string vdir = cfg.output_dir + "/" + variant.label;
        try {
            fs::create_directories(vdir);
        } catch (const std::exception& e) {
            throw StageError(Stage::Io, e.what());
        }

        const bool modifies = variant.noise.kind != NoiseSpec::Kind::None ||
                              !variant.mask.empty();
        ReconResult rec;
        {
            const NdMatrix* nd = &clean;
            NdMatrix local;
            if (modifies) {
                StageTimer t(report.stage_seconds, variant.label + "/corruption");
                try {
                    local = clean;
                    apply_noise_inplace(local, variant.noise);
                    apply_mask_inplace(local, variant.mask);
                } catch (const std::exception& e) {
                    throw StageError(Stage::Corruption, e.what());
                }
                nd = &local;
            }
            StageTimer t(report.stage_seconds, variant.label + "/reconstruction");
            try {
                rec = reconstruct(*nd, cfg.harmonics, cfg.recon);
                if (cfg.export_spectrum) {
                    OperatorSet ops(nd->matrix.m, g);
                    spectrum_report(ops.K, vdir + "/K_spectrum.csv");
                    report.manifest.push_back(manifest_entry(vdir + "/K_spectrum.csv"));
                }
            } catch (const std::exception& e) {
                throw StageError(Stage::Reconstruction,
                                 variant.label + ": " + e.what());
            }
        }

        vr.err_truth_pct = rel_l2_error_pct(rec.c_rec, c_truth, g);
        vr.err_proj_pct = rel_l2_error_pct(rec.c_rec, c_proj, g);
        vr.alpha = rec.alpha;
        vr.sigma_max_sq = rec.sigma_max_sq;
        vr.max_control_residual = rec.max_control_residual;
        if (rec.zero_nd) vr.warnings.push_back("zero ND matrix, reconstruction degenerate");
        if (rec.floored) vr.warnings.push_back("positivity floor active in recovered c^-2");

        try {
            StageTimer t(report.stage_seconds, variant.label + "/export");
            for (const auto& e : export_heatmap(rec.c_rec, vdir + "/c_rec"))
                report.manifest.push_back(e);
            for (const auto& e : export_heatmap((rec.c_rec - c_truth).cwiseAbs(),
                                                vdir + "/error_vs_truth"))
                report.manifest.push_back(e);
            for (const auto& e : export_heatmap((rec.c_rec - c_proj).cwiseAbs(),
                                                vdir + "/error_vs_projection"))
                report.manifest.push_back(e);
            save_matrix(vdir + "/c_inv_sq.bctm", rec.c_inv_sq, grid_sidecar(g));
            report.manifest.push_back(manifest_entry(vdir + "/c_inv_sq.bctm"));
        } catch (const StageError&) {
            throw;
        } catch (const std::exception& e) {
            throw StageError(Stage::Io, e.what());
        }
        report.variants.push_back(std::move(vr));
    }

    try {
        std::ofstream m(cfg.output_dir + "/metrics.json", std::ios::trunc);
        m << report.metrics_json().dump(2) << "\n";
        std::ofstream r(cfg.output_dir + "/run_report.json", std::ios::trunc);
        r << report.to_json().dump(2) << "\n";
    } catch (const std::exception& e) {
        throw StageError(Stage::Io, e.what());
    }
    return report;
}

}  // namespace bcw
