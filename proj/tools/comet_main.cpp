#include "comet/config.hpp"
#include "comet/error.hpp"
#include "comet/pipeline.hpp"
#include "comet/synth.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

namespace {

struct CommonOpts {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    double threshold = 0.0;
    std::vector<std::string> defines;
};

std::string dstr(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", x);
    return buf;
}

void apply_overrides(comet::config::PipelineConfig& cfg, const CommonOpts& opts,
                     bool seed_set, bool threshold_set) {
    if (seed_set) cfg.seed = opts.seed;
    if (threshold_set) {
        if (!(opts.threshold > 0.5 && opts.threshold <= 1.0))
            throw comet::Error(comet::ErrorKind::ConfigInvalid,
                               "threshold must lie in (0.5, 1.0]");
        cfg.threshold = opts.threshold;
    }
    if (!opts.out.empty()) cfg.out_dir = opts.out;
    for (const std::string& kv : opts.defines) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw comet::Error(comet::ErrorKind::ConfigInvalid,
                               "--define expects key=value, got '" + kv + "'");
        comet::config::apply_key(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
}

void write_synth_config(const comet::synth::SynthConfig& cfg, const std::string& dir) {
    const auto at = [&dir](const char* name) {
        return (std::filesystem::path(dir) / name).string();
    };
    std::ofstream out(std::filesystem::path(dir) / "config.toml", std::ios::binary);
    if (!out)
        throw comet::Error(comet::ErrorKind::IoError, "cannot write " + at("config.toml"));
    out << "# generated by `comet synth`; run `comet pipeline --config " << at("config.toml")
        << "`\n"
        << "posts = \"" << at("posts.jsonl") << "\"\n"
        << "posts_format = \"jsonl\"\n"
        << "lexicon = \"" << at("lexicon.json") << "\"\n"
        << "# annotations = \"" << at("annotations.jsonl")
        << "\"  # optional: bypasses the heuristic extractor\n"
        << "allowlist = \"" << at("allowlist.csv") << "\"\n"
        << "sets_geojson = \"" << at("sets.geojson") << "\"\n"
        << "beats_geojson = \"" << at("beats.geojson") << "\"\n"
        << "arrests = \"" << at("arrests.csv") << "\"\n"
        << "mortality = \"" << at("mortality.csv") << "\"\n"
        << "ground_truth = \"" << at("ground_truth.json") << "\"\n"
        << "out_dir = \"" << (std::filesystem::path(dir) / "out").string() << "\"\n"
        << "threshold = " << dstr(cfg.resolution_threshold) << "\n"
        << "seed = " << cfg.seed << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"comet: co-mention network and mortality analysis toolkit"};
    app.require_subcommand(1);

    const std::vector<std::pair<std::string, std::string>> stages = {
        {"ingest", "load the post corpus and write corpus statistics"},
        {"extract", "emit the (post, alias, tags) mention stream"},
        {"affiliate", "resolve gang-set affiliations and build the roster"},
        {"graph", "build and export the weighted co-mention network"},
        {"communities", "Louvain communities, composition, permutation baseline"},
        {"geo", "centroid distances, co-mention matrix, beat validation, choropleth"},
        {"mortality", "join crowd-sourced mortality records onto the roster"},
        {"features", "per-person network features, raw and standardized"},
        {"model", "the full multilevel mortality model battery"},
        {"ergm", "ERGM of tie formation (MPLE + MCMC-MLE)"},
        {"recovery", "score pipeline output against synthetic ground truth"},
        {"pipeline", "run every stage in order"},
    };

    for (const auto& [name, desc] : stages) {
        CLI::App* sub = app.add_subcommand(name, desc);
        auto opts = std::make_shared<CommonOpts>();
        sub->add_option("--config", opts->config, "flat key=value config file")
            ->required();
        sub->add_option("--out", opts->out, "override the output directory");
        CLI::Option* seed_opt = sub->add_option("--seed", opts->seed, "override the run seed");
        CLI::Option* thr_opt =
            sub->add_option("--threshold", opts->threshold, "override the consensus threshold");
        sub->add_option("-D,--define", opts->defines,
                        "override any config key (key=value, repeatable)");
        const std::string stage = name;
        sub->callback([stage, opts, seed_opt, thr_opt] {
            comet::pipeline::Context ctx;
            ctx.cfg = comet::config::load_config(opts->config);
            apply_overrides(ctx.cfg, *opts, seed_opt->count() > 0, thr_opt->count() > 0);
            comet::pipeline::run_stage(ctx, stage);
            std::cout << "ok: " << stage << " -> " << ctx.cfg.out_dir << "\n";
        });
    }

    {
        CLI::App* sub =
            app.add_subcommand("synth", "generate a synthetic corpus with planted ground truth");
        auto cfg = std::make_shared<comet::synth::SynthConfig>();
        auto dir = std::make_shared<std::string>();
        sub->add_option("--out", *dir, "fixture directory")->required();
        sub->add_option("--seed", cfg->seed, "generator seed");
        sub->add_option("--sets", cfg->n_sets, "number of gang sets");
        sub->add_option("--nations", cfg->n_nations, "number of nations");
        sub->add_option("--persons-per-set", cfg->persons_per_set, "individuals per set");
        sub->add_option("--posts-per-person", cfg->tagged_posts_per_person,
                        "tagged posts per individual");
        sub->add_option("--tag-noise", cfg->tag_noise_rate, "wrong-set tag probability (rho)");
        sub->add_option("--threshold", cfg->resolution_threshold,
                        "consensus threshold the fixture must remain identifiable under");
        sub->add_option("--p-in", cfg->p_in, "within-set co-mention Poisson mean");
        sub->add_option("--p-between", cfg->p_between_base, "cross-set base rate before decay");
        sub->add_option("--lambda-m", cfg->lambda_m, "distance-decay length in meters");
        sub->add_option("--anchor-rate", cfg->anchor_rate, "stage-1 mortality rate");
        sub->add_option("--wave-base-rate", cfg->wave_base_rate, "stage-2 baseline rate");
        sub->add_option("--beta-star", cfg->beta_star, "planted anchor-share coefficient");
        sub->callback([cfg, dir] {
            comet::synth::validate_config(*cfg);
            comet::synth::generate(*cfg, *dir);
            write_synth_config(*cfg, *dir);
            std::cout << "ok: synth -> " << *dir << " (config: "
                      << (std::filesystem::path(*dir) / "config.toml").string() << ")\n";
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const comet::Error& e) {
        nlohmann::ordered_json j;
        j["error"]["kind"] = std::string(comet::to_string(e.kind()));
        j["error"]["message"] = e.what();
        std::cerr << j.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        nlohmann::ordered_json j;
        j["error"]["kind"] = "Unhandled";
        j["error"]["message"] = e.what();
        std::cerr << j.dump() << "\n";
        return 1;
    }
    return 0;
}
