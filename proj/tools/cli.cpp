// Copyright 2026 The adlift Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "adlift/baselines.hpp"
#include "adlift/eval.hpp"
#include "adlift/image_io.hpp"
#include "adlift/lpgd.hpp"
#include "adlift/scene_io.hpp"

namespace adlift::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

nlohmann::ordered_json to_json(const RunConfig& c) {
    Json j;
    j["command"] = c.command;
    j["scene"] = c.scene_path;
    j["cams"] = c.cams_path;
    j["out"] = c.out_dir;
    j["n"] = c.n ? Json(*c.n) : Json(nullptr);
    j["seed"] = c.seed;
    j["spread"] = c.spread;
    j["n_cams"] = c.n_cams;
    j["ring_radius"] = c.ring_radius;
    j["ring_height"] = c.ring_height;
    j["image_size"] = c.image_size;
    j["fov_deg"] = c.fov_deg;
    j["surrogate_seed"] = c.surrogate_seed;
    j["objective"] = c.objective;
    j["target_image"] = c.target_image;
    j["target_mask"] = c.target_mask;
    j["box"] = c.box ? Json(*c.box) : Json(nullptr);
    j["lambda_dice"] = c.lambda_dice;
    j["eta"] = c.eta;
    j["alpha"] = c.alpha ? Json(*c.alpha) : Json(nullptr);
    j["beta"] = c.beta;
    j["k_p"] = c.k_p;
    j["k_l"] = c.k_l;
    j["iters"] = c.iters;
    j["lambda_ssim"] = c.lambda_ssim;
    j["schedule"] = c.schedule;
    j["variant"] = c.variant;
    j["kind"] = c.kind;
    j["soft_w"] = c.soft_w;
    j["soft_lr"] = c.soft_lr;
    j["soft_steps"] = c.soft_steps;
    j["soft_checkpoint"] = c.soft_checkpoint;
    j["axis"] = c.axis;
    j["values"] = c.values;
    j["threads"] = c.threads;
    return j;
}

namespace {

using Setter = std::function<void(RunConfig&, const nlohmann::json&)>;

template <class T>
Setter set(T RunConfig::*field) {
    return [field](RunConfig& c, const nlohmann::json& v) { c.*field = v.get<T>(); };
}

template <class T>
Setter set_optional(std::optional<T> RunConfig::*field) {
    return [field](RunConfig& c, const nlohmann::json& v) {
        if (v.is_null()) {
            c.*field = std::nullopt;
        } else {
            c.*field = v.get<T>();
        }
    };
}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> m = {
        {"command", set(&RunConfig::command)},
        {"scene", set(&RunConfig::scene_path)},
        {"cams", set(&RunConfig::cams_path)},
        {"out", set(&RunConfig::out_dir)},
        {"n", set_optional(&RunConfig::n)},
        {"seed", set(&RunConfig::seed)},
        {"spread", set(&RunConfig::spread)},
        {"n_cams", set(&RunConfig::n_cams)},
        {"ring_radius", set(&RunConfig::ring_radius)},
        {"ring_height", set(&RunConfig::ring_height)},
        {"image_size", set(&RunConfig::image_size)},
        {"fov_deg", set(&RunConfig::fov_deg)},
        {"surrogate_seed", set(&RunConfig::surrogate_seed)},
        {"objective", set(&RunConfig::objective)},
        {"target_image", set(&RunConfig::target_image)},
        {"target_mask", set(&RunConfig::target_mask)},
        {"box", set_optional(&RunConfig::box)},
        {"lambda_dice", set(&RunConfig::lambda_dice)},
        {"eta", set(&RunConfig::eta)},
        {"alpha", set_optional(&RunConfig::alpha)},
        {"beta", set(&RunConfig::beta)},
        {"k_p", set(&RunConfig::k_p)},
        {"k_l", set(&RunConfig::k_l)},
        {"iters", set(&RunConfig::iters)},
        {"lambda_ssim", set(&RunConfig::lambda_ssim)},
        {"schedule", set(&RunConfig::schedule)},
        {"variant", set(&RunConfig::variant)},
        {"kind", set(&RunConfig::kind)},
        {"soft_w", set(&RunConfig::soft_w)},
        {"soft_lr", set(&RunConfig::soft_lr)},
        {"soft_steps", set(&RunConfig::soft_steps)},
        {"soft_checkpoint", set(&RunConfig::soft_checkpoint)},
        {"axis", set(&RunConfig::axis)},
        {"values", set(&RunConfig::values)},
        {"threads", set(&RunConfig::threads)},
    };
    return m;
}

} // namespace

void merge_json(RunConfig& cfg, const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
    for (const auto& [key, value] : j.items()) {
        const auto it = setters().find(key);
        if (it == setters().end()) throw std::invalid_argument("config: unknown key '" + key + "'");
        try {
            it->second(cfg, value);
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument("config: bad value for '" + key + "': " + e.what());
        }
    }
}

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Flag values are parsed into their own storage and copied into the config
// only when the flag was given, after the --config file has been merged.
class Bindings {
public:
    template <class T, class Apply>
    CLI::Option* add(CLI::App* app, const std::string& name, const std::string& desc, Apply apply) {
        auto storage = std::make_shared<T>();
        CLI::Option* o = app->add_option(name, *storage, desc);
        entries_.push_back({o, [storage, apply](RunConfig& c) { apply(c, *storage); }});
        return o;
    }

    template <class T>
    CLI::Option* field(CLI::App* app, const std::string& name, T RunConfig::*f, const std::string& desc) {
        return add<T>(app, name, desc, [f](RunConfig& c, const T& v) { c.*f = v; });
    }

    void apply(RunConfig& cfg) const {
        for (const auto& [opt, fn] : entries_) {
            if (opt->count() > 0) fn(cfg);
        }
    }

private:
    std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> entries_;
};

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(item);
    return parts;
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError(what + ": '" + s + "' is not a number");
    }
}

std::array<int, 4> parse_box(const std::string& s) {
    const auto parts = split_commas(s);
    if (parts.size() != 4) throw UsageError("--box expects x,y,w,h");
    std::array<int, 4> b{};
    for (int i = 0; i < 4; ++i) {
        const double v = parse_double(parts[static_cast<std::size_t>(i)], "--box");
        if (v != static_cast<int>(v)) throw UsageError("--box entries must be integers");
        b[static_cast<std::size_t>(i)] = static_cast<int>(v);
    }
    return b;
}

struct App {
    CLI::App app{"Gaussian-splat scene protection with Lifted PGD", "adlift"};
    Bindings bind;
    std::string config_path;
};

void add_common(App& a, CLI::App* sub) {
    sub->add_option("--config", a.config_path, "JSON config file; flags override its values");
    a.bind.field(sub, "--out", &RunConfig::out_dir, "output directory");
    a.bind.field(sub, "--threads", &RunConfig::threads, "render worker threads (0: all cores)");
    a.bind.field(sub, "--seed", &RunConfig::seed, "scene seed (also seeds the random view schedule)");
    a.bind.field(sub, "--surrogate-seed", &RunConfig::surrogate_seed, "surrogate weight seed");
}

void add_io(App& a, CLI::App* sub) {
    a.bind.field(sub, "--scene", &RunConfig::scene_path, "scene file");
    a.bind.field(sub, "--cams", &RunConfig::cams_path, "camera file");
}

void add_objective(App& a, CLI::App* sub) {
    a.bind.field(sub, "--objective", &RunConfig::objective, "vu | vt | st")
        ->check(CLI::IsMember({"vu", "vt", "st"}));
    a.bind.field(sub, "--target-image", &RunConfig::target_image, "LGIM target image (vt)");
    a.bind.field(sub, "--target-mask", &RunConfig::target_mask,
                 "LGIM 1-channel target mask on the latent grid (st; default all zeros)");
    a.bind.add<std::string>(sub, "--box", "mask box x,y,w,h on the latent grid (st)",
                            [](RunConfig& c, const std::string& v) { c.box = parse_box(v); });
    a.bind.field(sub, "--lambda-dice", &RunConfig::lambda_dice, "Dice weight (st)");
}

void add_lpgd(App& a, CLI::App* sub) {
    a.bind.field(sub, "--eta", &RunConfig::eta, "l_inf budget");
    a.bind.add<double>(sub, "--alpha", "truncation step (default eta/4)",
                       [](RunConfig& c, const double& v) { c.alpha = v; });
    a.bind.field(sub, "--beta", &RunConfig::beta, "fitting learning rate");
    a.bind.field(sub, "--kp", &RunConfig::k_p, "truncation steps per iteration");
    a.bind.field(sub, "--kl", &RunConfig::k_l, "fitting steps per iteration");
    a.bind.field(sub, "--iters", &RunConfig::iters, "outer iterations");
    a.bind.field(sub, "--lambda-ssim", &RunConfig::lambda_ssim, "SSIM weight in the fitting loss");
    a.bind.field(sub, "--schedule", &RunConfig::schedule, "round_robin | seeded_random")
        ->check(CLI::IsMember({"round_robin", "seeded_random"}));
}

void add_soft(App& a, CLI::App* sub) {
    a.bind.field(sub, "--soft-w", &RunConfig::soft_w, "soft baseline SSIM weight");
    a.bind.field(sub, "--soft-lr", &RunConfig::soft_lr, "soft baseline learning rate");
    a.bind.field(sub, "--soft-steps", &RunConfig::soft_steps, "soft baseline steps");
    a.bind.field(sub, "--soft-checkpoint", &RunConfig::soft_checkpoint,
                 "soft baseline checkpoint interval");
}

// ---------------------------------------------------------------------------

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
    const auto bytes = read_file_bytes(path);
    return std::string(bytes.begin(), bytes.end());
}

void require_path(const std::string& path, const char* flag) {
    if (path.empty()) throw UsageError(std::string(flag) + " is required");
    if (!fs::exists(path)) throw UsageError(std::string(flag) + ": no such file: " + path);
}

Scene load_scene_checked(const RunConfig& c) {
    require_path(c.scene_path, "--scene");
    LoadedScene ls = load_scene(c.scene_path);
    if (ls.renormalized_quaternions) {
        std::cerr << "warning: " << c.scene_path << ": non-unit quaternions were renormalized\n";
    }
    return std::move(ls.scene);
}

std::vector<Camera> load_cams_checked(const RunConfig& c) {
    require_path(c.cams_path, "--cams");
    auto cams = load_cameras(c.cams_path);
    if (cams.empty()) throw UsageError("--cams: camera list is empty");
    for (const Camera& cam : cams) {
        if (cam.width != cams[0].width || cam.height != cams[0].height) {
            throw UsageError("--cams: all cameras must share one image size");
        }
    }
    return cams;
}

CameraSplit split_checked(const std::vector<Camera>& cams) {
    CameraSplit s = split_holdout(cams);
    if (s.novel.empty()) {
        throw UsageError("need at least 3 cameras: every third one is held out as a novel view");
    }
    return s;
}

AttackObjective make_objective(const RunConfig& c, const Surrogates& models, int w, int h) {
    if (c.objective == "vu") return VuObjective{};
    if (c.objective == "vt") {
        if (c.target_image.empty()) throw UsageError("--objective vt needs --target-image");
        require_path(c.target_image, "--target-image");
        return VtObjective{read_lgim_image(c.target_image)};
    }
    if (c.objective != "st") throw UsageError("unknown objective '" + c.objective + "'");
    const int gh = models.seg.encoder.latent_height(h);
    const int gw = models.seg.encoder.latent_width(w);
    Box box{gw / 4, gh / 4, std::max(1, gw / 2), std::max(1, gh / 2)};
    if (c.box) box = Box{(*c.box)[0], (*c.box)[1], (*c.box)[2], (*c.box)[3]};
    StObjective st = make_st_zero_target(models, w, h, box, c.lambda_dice);
    if (!c.target_mask.empty()) {
        require_path(c.target_mask, "--target-mask");
        const LgimArray m = read_lgim(c.target_mask);
        if (m.channels != 1 || static_cast<int>(m.width) != gw || static_cast<int>(m.height) != gh) {
            throw UsageError("--target-mask must be a 1-channel " + std::to_string(gw) + "x" +
                             std::to_string(gh) + " LGIM");
        }
        for (std::size_t i = 0; i < m.values.size(); ++i) st.target_mask[i] = m.values[i];
    }
    return st;
}

LpgdConfig lpgd_config(const RunConfig& c) {
    LpgdConfig l;
    l.eta = c.eta;
    l.alpha = c.alpha ? *c.alpha : c.eta / 4.0;
    l.beta = c.beta;
    l.k_p = c.k_p;
    l.k_l = c.k_l;
    l.e_total = c.iters;
    l.lambda_ssim = c.lambda_ssim;
    l.seed = c.seed;
    l.schedule = parse_view_schedule(c.schedule);
    l.render.threads = c.threads;
    l.validate();
    return l;
}

SoftConfig soft_config(const RunConfig& c) {
    SoftConfig s;
    s.weight_w = c.soft_w;
    s.lr = c.soft_lr;
    s.steps = c.soft_steps;
    s.checkpoint_every = c.soft_checkpoint;
    s.render.threads = c.threads;
    s.validate();
    return s;
}

fs::path prepare_out(const RunConfig& c) {
    fs::path out(c.out_dir);
    fs::create_directories(out);
    write_text(out / "config.resolved", to_json(c).dump(2) + "\n");
    return out;
}

void write_report(const fs::path& out, EvalReport report, const RunConfig& c) {
    report.config = to_json(c);
    write_text(out / "report.json", serialize_report(report));
    std::printf("train: psnr %.2f dB, ssim %.4f, linf %.4f, adv %.6g\n", report.train.psnr_mean,
                report.train.ssim_mean, report.train.linf_median, report.adv_train);
    std::printf("novel: psnr %.2f dB, ssim %.4f, linf %.4f, adv %.6g\n", report.novel.psnr_mean,
                report.novel.ssim_mean, report.novel.linf_median, report.adv_novel);
    std::printf("gap %.6g\n", report.gap);
}

// ---------------------------------------------------------------------------

void cmd_gen_scene(const RunConfig& c) {
    if (!c.n) throw UsageError("--n is required (or set \"n\" in --config)");
    const Scene scene = make_synthetic_scene(*c.n, c.seed, c.spread);
    const auto cams = make_camera_ring(c.n_cams, c.ring_radius, c.ring_height, c.image_size, c.fov_deg);
    const fs::path out = prepare_out(c);
    save_scene(scene, out / "scene.json");
    save_cameras(cams, out / "cameras.json");
    std::printf("wrote %s and %s\n", (out / "scene.json").c_str(), (out / "cameras.json").c_str());
}

void cmd_protect(const RunConfig& c) {
    if (c.variant != "adlift" && c.variant != "adlift-star") {
        throw UsageError("--variant must be adlift or adlift-star");
    }
    const Scene raw = raw_only(load_scene_checked(c));
    const auto cams = load_cams_checked(c);
    const CameraSplit split = split_checked(cams);
    const Surrogates models = build_surrogates(c.surrogate_seed);
    const AttackObjective obj = make_objective(c, models, cams[0].width, cams[0].height);
    LpgdConfig cfg = lpgd_config(c);
    const fs::path out = prepare_out(c);

    Scene start;
    if (c.variant == "adlift-star") {
        const Fit2dResult warm = fit2d(raw, split.train, obj, models, cfg);
        write_text(out / "fit2d_log.jsonl", serialize_train_log(warm.log));
        start = init_safeguard(raw, warm.scene);
        cfg.init_mode = InitMode::from_fit2d;
    } else {
        start = init_safeguard(raw);
    }
    const ProtectResult res = protect(start, split.train, obj, models, cfg);
    save_scene(res.scene, out / "scene.json");
    write_text(out / "train_log.jsonl", serialize_train_log(res.log));
    write_report(out, evaluate(raw, res.scene, split.train, split.novel, obj, models, cfg.render), c);
}

void cmd_baseline(const RunConfig& c) {
    const Scene raw = raw_only(load_scene_checked(c));
    const auto cams = load_cams_checked(c);
    const CameraSplit split = split_checked(cams);
    const Surrogates models = build_surrogates(c.surrogate_seed);
    const AttackObjective obj = make_objective(c, models, cams[0].width, cams[0].height);
    Scene prot;
    RenderOptions ropts;
    ropts.threads = c.threads;
    fs::path out;
    if (c.kind == "fit2d") {
        const LpgdConfig cfg = lpgd_config(c);
        out = prepare_out(c);
        Fit2dResult res = fit2d(raw, split.train, obj, models, cfg);
        write_text(out / "train_log.jsonl", serialize_train_log(res.log));
        std::string views;
        for (const Fit2dViewLog& v : res.views) {
            Json j;
            j["view"] = v.view;
            j["adv_raw"] = v.adv_raw;
            j["adv_target"] = v.adv_target;
            j["target_linf"] = v.target_linf;
            j["adv_rendered"] = v.adv_rendered;
            j["rendered_linf"] = v.rendered_linf;
            views += j.dump() + "\n";
        }
        write_text(out / "fit2d_views.jsonl", views);
        prot = std::move(res.scene);
    } else if (c.kind == "soft") {
        const SoftConfig cfg = soft_config(c);
        out = prepare_out(c);
        SoftResult res = soft_constraint_protect(init_safeguard(raw), split.train, obj, models, cfg);
        write_text(out / "soft_log.jsonl", serialize_soft_log(res.log));
        prot = std::move(res.scene);
    } else {
        throw UsageError("--kind must be fit2d or soft");
    }
    save_scene(prot, out / "scene.json");
    write_report(out, evaluate(raw, prot, split.train, split.novel, obj, models, ropts), c);
}

void cmd_eval(const RunConfig& c) {
    const Scene scene = load_scene_checked(c);
    const auto cams = load_cams_checked(c);
    const CameraSplit split = split_checked(cams);
    const Surrogates models = build_surrogates(c.surrogate_seed);
    const AttackObjective obj = make_objective(c, models, cams[0].width, cams[0].height);
    RenderOptions ropts;
    ropts.threads = c.threads;
    const fs::path out = prepare_out(c);
    write_report(out, evaluate(scene, scene, split.train, split.novel, obj, models, ropts), c);
}

void cmd_sweep(const RunConfig& c) {
    if (c.values.empty()) throw UsageError("--values is required");
    const Scene scene = load_scene_checked(c);
    const auto cams = load_cams_checked(c);
    split_checked(cams);
    const Surrogates models = build_surrogates(c.surrogate_seed);
    const AttackObjective obj = make_objective(c, models, cams[0].width, cams[0].height);
    SweepAxis axis;
    try {
        axis = parse_sweep_axis(c.axis);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const LpgdConfig cfg = lpgd_config(c);
    const SoftConfig scfg = soft_config(c);
    const fs::path out = prepare_out(c);
    const SweepTable table = sweep(scene, cams, obj, models, axis, c.values, cfg, scfg);
    write_text(out / "sweep.csv", sweep_csv(table));
    write_text(out / "sweep.jsonl", sweep_jsonl(table));
    std::fputs(sweep_csv(table).c_str(), stdout);
}

void cmd_render(const RunConfig& c) {
    const Scene scene = load_scene_checked(c);
    const auto cams = load_cams_checked(c);
    RenderOptions ropts;
    ropts.threads = c.threads;
    const fs::path out = prepare_out(c);
    for (std::size_t i = 0; i < cams.size(); ++i) {
        char stem[32];
        std::snprintf(stem, sizeof stem, "view_%03zu", i);
        const Image img = render(scene, cams[i], ropts);
        write_ppm(out / (std::string(stem) + ".ppm"), img);
        write_lgim(out / (std::string(stem) + ".lgim"), img);
    }
    std::printf("rendered %zu views into %s\n", cams.size(), out.c_str());
}

} // namespace

int run(int argc, const char* const* argv) {
    App a;
    a.app.require_subcommand(1);
    a.app.set_help_all_flag("--help-all", "expand all subcommand help");

    auto* gen = a.app.add_subcommand("gen-scene", "generate a synthetic scene and a camera ring");
    add_common(a, gen);
    a.bind.add<int>(gen, "--n", "number of Gaussians (required)",
                    [](RunConfig& c, const int& v) { c.n = v; });
    a.bind.field(gen, "--spread", &RunConfig::spread, "half-width of the position cube");
    a.bind.field(gen, "--n-cams", &RunConfig::n_cams, "number of ring cameras");
    a.bind.field(gen, "--radius", &RunConfig::ring_radius, "ring radius");
    a.bind.field(gen, "--height", &RunConfig::ring_height, "ring height");
    a.bind.field(gen, "--image-size", &RunConfig::image_size, "square image size in pixels");
    a.bind.field(gen, "--fov", &RunConfig::fov_deg, "field of view in degrees");

    auto* prot = a.app.add_subcommand("protect", "learn safeguard Gaussians with L-PGD");
    add_common(a, prot);
    add_io(a, prot);
    add_objective(a, prot);
    add_lpgd(a, prot);
    a.bind.field(prot, "--variant", &RunConfig::variant, "adlift | adlift-star")
        ->check(CLI::IsMember({"adlift", "adlift-star"}));

    auto* base = a.app.add_subcommand("baseline", "run the Fit2D or soft-constraint baseline");
    add_common(a, base);
    add_io(a, base);
    add_objective(a, base);
    add_lpgd(a, base);
    add_soft(a, base);
    a.bind.field(base, "--kind", &RunConfig::kind, "fit2d | soft")
        ->check(CLI::IsMember({"fit2d", "soft"}));

    auto* ev = a.app.add_subcommand("eval", "evaluate a protected scene against its raw part");
    add_common(a, ev);
    add_io(a, ev);
    add_objective(a, ev);

    auto* sw = a.app.add_subcommand("sweep", "hyperparameter sweep");
    add_common(a, sw);
    add_io(a, sw);
    add_objective(a, sw);
    add_lpgd(a, sw);
    add_soft(a, sw);
    a.bind.field(sw, "--axis", &RunConfig::axis, "eta | alpha | k_p | k_l | soft_w");
    a.bind.add<std::string>(sw, "--values", "comma-separated values", [](RunConfig& c, const std::string& v) {
        c.values.clear();
        for (const auto& p : split_commas(v)) c.values.push_back(parse_double(p, "--values"));
    });

    auto* rend = a.app.add_subcommand("render", "render every camera to PPM and LGIM");
    add_common(a, rend);
    add_io(a, rend);

    try {
        a.app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = a.app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    CLI::App* sub = a.app.get_subcommands().front();
    RunConfig cfg;
    try {
        if (!a.config_path.empty()) {
            require_path(a.config_path, "--config");
            const std::string text = read_text(a.config_path);
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(text);
            } catch (const nlohmann::json::parse_error& e) {
                throw ParseError(a.config_path + ": " + e.what(), e.byte);
            }
            merge_json(cfg, j);
        }
        a.bind.apply(cfg);
        cfg.command = sub->get_name();

        if (sub == gen) cmd_gen_scene(cfg);
        else if (sub == prot) cmd_protect(cfg);
        else if (sub == base) cmd_baseline(cfg);
        else if (sub == ev) cmd_eval(cfg);
        else if (sub == sw) cmd_sweep(cfg);
        else cmd_render(cfg);
        return kExitOk;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << sub->help();
        return kExitUsage;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

} // namespace adlift::cli
