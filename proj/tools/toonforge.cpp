// toonforge command line: generate, render, edit, eval-parser, serve.

#include "toonforge/composer.hpp"
#include "toonforge/modelio.hpp"
#include "toonforge/pipeline.hpp"
#include "toonforge/raster.hpp"
#include "toonforge/service.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>

using namespace toonforge;
namespace fs = std::filesystem;

namespace {

struct DataPaths {
    std::string catalog = (default_data_dir() / "catalog").string();
    std::string lexicon = (default_data_dir() / "lexicon.txt").string();

    void add_to(CLI::App* cmd) {
        cmd->add_option("--catalog", catalog, "catalog directory")->capture_default_str();
        cmd->add_option("--lexicon", lexicon, "lexicon file")->capture_default_str();
    }
    Resources load() const { return load_resources(catalog, lexicon); }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::pair<std::string, std::string> split_assignment(const std::string& s, const char* what) {
    const auto eq = s.rfind('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == s.size())
        throw std::invalid_argument(std::string(what) + " expects KEY=VALUE, got '" + s + "'");
    return {s.substr(0, eq), s.substr(eq + 1)};
}

Rgb color_arg(const std::string& s, const Lexicon& lexicon) {
    if (auto c = parse_hex(s)) return *c;
    if (const ColorTerm* term = lexicon.find_color(s)) return term->rgb;
    throw std::invalid_argument("not a color: '" + s + "' (use #rrggbb or a color name)");
}

HttpServer* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"toonforge: text to rigged 2D cartoon characters"};
    app.require_subcommand(1);

    DataPaths paths;

    // generate
    auto* gen = app.add_subcommand("generate", "parse a description and build a rigged character bundle");
    std::string text;
    std::uint64_t gen_seed = 0;
    std::string out;
    std::string dump_template;
    gen->add_option("text", text, "character description (may be empty)");
    gen->add_option("--seed", gen_seed, "pattern seed")->capture_default_str();
    gen->add_option("--out", out, "bundle directory")->required();
    gen->add_option("--dump-template", dump_template, "also write each template layer's mask and line art here");
    paths.add_to(gen);

    // render
    auto* ren = app.add_subcommand("render", "render animation frames of a bundle");
    std::string model_dir, clip_path, visemes_path, arkit_path;
    double fps = 30.0;
    int size = 0;
    ren->add_option("model", model_dir, "bundle directory")->required();
    auto* clip_opt = ren->add_option("--clip", clip_path, "clip file");
    auto* vis_opt = ren->add_option("--visemes", visemes_path, "viseme timeline (lines 't viseme weight')");
    auto* ark_opt = ren->add_option("--arkit", arkit_path, "ARKit coefficient CSV");
    clip_opt->excludes(vis_opt)->excludes(ark_opt);
    vis_opt->excludes(ark_opt);
    ren->add_option("--fps", fps, "frames per second")->capture_default_str();
    ren->add_option("--out", out, "frame directory")->required();
    ren->add_option("--size", size, "frame width in px (default: canvas width)");

    // edit
    auto* ed = app.add_subcommand("edit", "apply swap / recolor edits to a bundle (swaps, then recolors, then masks)");
    std::vector<std::string> swaps, recolors, mask_recolors;
    ed->add_option("model", model_dir, "bundle directory")->required();
    ed->add_option("--swap", swaps, "SLOT=VARIANT");
    ed->add_option("--recolor", recolors, "SLOT_OR_LAYER=COLOR");
    ed->add_option("--mask-recolor", mask_recolors, "MASK.png=COLOR (canvas-sized mask)");
    ed->add_option("--out", out, "output bundle directory")->required();
    paths.add_to(ed);

    // eval-parser
    auto* ev = app.add_subcommand("eval-parser", "generate a corpus and report parser accuracy");
    std::size_t n = 10000;
    std::string noise = "on";
    std::string corpus_out;
    std::uint64_t ev_seed = 1;
    ev->add_option("--n", n, "corpus size")->capture_default_str();
    ev->add_option("--seed", ev_seed, "corpus seed")->capture_default_str();
    ev->add_option("--noise", noise, "on | off")->check(CLI::IsMember({"on", "off"}))->capture_default_str();
    ev->add_option("--corpus-out", corpus_out, "also write the corpus (text TAB gold)");
    paths.add_to(ev);

    // serve
    auto* srv = app.add_subcommand("serve", "run the HTTP API");
    int port = 8080;
    std::string host = "127.0.0.1";
    std::string store = "toonforge-store";
    srv->add_option("--port", port, "port (0 = ephemeral)")->capture_default_str();
    srv->add_option("--host", host, "bind address")->capture_default_str();
    srv->add_option("--store", store, "store directory (TOONFORGE_STORE overrides)")->capture_default_str();
    paths.add_to(srv);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            const auto t0 = std::chrono::steady_clock::now();
            const Resources res = paths.load();
            const double load = seconds_since(t0);
            Generated g = generate_character(text, gen_seed, res);
            const auto t1 = std::chrono::steady_clock::now();
            try {
                save_model(g.model, out);
            } catch (const std::exception& e) {
                throw StageError("save", e.what());
            }
            g.timings.push_back({"save", seconds_since(t1)});
            if (!dump_template.empty()) {
                const TemplateSheet sheet = compose_template(g.recipe.selection, res.catalog);
                fs::create_directories(dump_template);
                for (const auto& layer : sheet.layers) {
                    write_png(layer.contour_mask, fs::path(dump_template) / (layer.name + "_mask.png"));
                    write_png(layer.line_art, fs::path(dump_template) / (layer.name + "_lines.png"));
                }
            }
            for (const auto& [slot, variant] : g.recipe.selection.variants)
                std::printf("%-12s %s\n", slot.c_str(), variant.c_str());
            for (const auto& [attr, value] : g.recipe.selection.attributes)
                std::printf("%-12s %s\n", attr.c_str(), value.c_str());
            for (const auto& [key, rgb] : g.recipe.colors)
                std::printf("color %-10s %s\n", key.c_str(), to_hex(rgb).c_str());
            std::printf("timing %-9s %.3f s\n", "load", load);
            double total = load;
            for (const auto& t : g.timings) {
                std::printf("timing %-9s %.3f s\n", t.stage.c_str(), t.seconds);
                total += t.seconds;
            }
            std::printf("timing %-9s %.3f s\n", "total", total);
            std::printf("wrote %s (%zu layers)\n", out.c_str(), g.model.layers.size());
        } else if (*ren) {
            const auto t0 = std::chrono::steady_clock::now();
            if (!(fps > 0.0)) throw std::invalid_argument("--fps must be positive");
            const CharacterModel model = load_model(model_dir);
            AnimationClip clip;
            if (!clip_path.empty()) {
                clip = load_clip(clip_path, model.parameters);
            } else if (!visemes_path.empty()) {
                clip = viseme_clip(read_visemes(visemes_path), fps);
            } else if (!arkit_path.empty()) {
                const auto frames = read_arkit_csv(arkit_path);
                clip = coefficients_to_clip(frames);
            } else {
                throw std::invalid_argument("render needs one of --clip, --visemes, --arkit");
            }
            validate_clip(clip, model.parameters);
            const int w = size > 0 ? size : model.canvas_size.width;
            const int h = std::max(1, w * model.canvas_size.height / std::max(1, model.canvas_size.width));
            const std::size_t count = render_clip(model, clip, fps, out, {w, h});
            std::printf("rendered %zu frames (%dx%d) to %s in %.3f s\n", count, w, h, out.c_str(), seconds_since(t0));
        } else if (*ed) {
            const Resources res = paths.load();
            const CharacterModel model = load_model(model_dir);
            std::vector<EditOp> ops;
            for (const auto& s : swaps) {
                auto [slot, variant] = split_assignment(s, "--swap");
                ops.push_back(SwapOp{slot, variant});
            }
            for (const auto& s : recolors) {
                auto [target, color] = split_assignment(s, "--recolor");
                ops.push_back(RecolorOp{target, color_arg(color, res.lexicon)});
            }
            for (const auto& s : mask_recolors) {
                auto [mask, color] = split_assignment(s, "--mask-recolor");
                ops.push_back(MaskRecolorOp{read_png(mask), color_arg(color, res.lexicon)});
            }
            if (ops.empty()) throw std::invalid_argument("edit needs at least one --swap, --recolor or --mask-recolor");
            save_model(apply_edits(model, ops, res), out);
            std::printf("applied %zu edit(s); wrote %s\n", ops.size(), out.c_str());
        } else if (*ev) {
            const Resources res = paths.load();
            const auto t0 = std::chrono::steady_clock::now();
            const auto corpus = generate_corpus(res.catalog, res.lexicon, n, ev_seed, noise == "on" ? Noise::on : Noise::off);
            const double gen_s = seconds_since(t0);
            if (!corpus_out.empty()) {
                std::ofstream f(corpus_out, std::ios::binary);
                f << write_corpus(corpus);
                if (!f) throw std::runtime_error("cannot write " + corpus_out);
            }
            const auto t1 = std::chrono::steady_clock::now();
            const AccuracyReport r = evaluate_parser(corpus, res.lexicon, res.catalog);
            const double eval_s = seconds_since(t1);
            std::printf("pairs        %zu (seed %llu, noise %s)\n", r.n, static_cast<unsigned long long>(ev_seed),
                        noise.c_str());
            for (const auto& [slot, acc] : r.per_slot_accuracy) std::printf("slot  %-12s %.4f\n", slot.c_str(), acc);
            for (const auto& [attr, acc] : r.per_attribute_accuracy)
                std::printf("attr  %-12s %.4f\n", attr.c_str(), acc);
            std::printf("exact_match  %.4f\n", r.exact_match);
            std::printf("time generate %.3f s, evaluate %.3f s\n", gen_s, eval_s);
        } else if (*srv) {
            auto res = std::make_shared<const Resources>(paths.load());
            const fs::path root = store_root(store);
            Api api(res, root);
            HttpServer server(api);
            const int bound = server.bind(host, port);
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::printf("serving http://%s:%d (store %s)\n", host.c_str(), bound, root.string().c_str());
            std::fflush(stdout);
            server.run();
            g_server = nullptr;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
