#include "comet/pipeline.hpp"

#include "comet/csv.hpp"
#include "comet/ergm.hpp"
#include "comet/error.hpp"
#include "comet/glmm.hpp"
#include "comet/logistic.hpp"
#include "comet/rng.hpp"
#include "comet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace comet::pipeline {

namespace {

// Fixed substream indices; every randomized stage derives its seed from
// (cfg.seed, index) so stages never share a stream.
constexpr std::uint64_t kLouvainStream = 1;
constexpr std::uint64_t kPermutationStream = 2;
constexpr std::uint64_t kBootstrapStream = 3;
constexpr std::uint64_t kErgmStream = 4;

std::string dstr(double x, const char* fmt = "%.10g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, x);
    return buf;
}

std::string hex64(std::uint64_t x) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

// two-sided normal p-value for a Wald z statistic
double normal_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

fs::path out_path(const Context& ctx, const std::string& name) {
    return fs::path(ctx.cfg.out_dir) / name;
}

void prepare_out_dir(const Context& ctx) { fs::create_directories(ctx.cfg.out_dir); }

void write_text(const fs::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    out << body;
}

void write_json(const fs::path& path, const ordered_json& doc) {
    write_text(path, doc.dump(2) + "\n");
}

spatial::CrsKind crs_kind(const config::PipelineConfig& cfg) {
    return cfg.crs == "projected_meters" ? spatial::CrsKind::projected_meters
                                         : spatial::CrsKind::geographic_degrees;
}

void write_manifest(const Context& ctx, const std::string& stage,
                    const std::vector<std::string>& artifacts) {
    const auto& c = ctx.cfg;
    ordered_json m;
    m["stage"] = stage;
    m["seed"] = c.seed;

    ordered_json params;
    params["posts_format"] = c.posts_format;
    params["threshold"] = c.threshold;
    params["min_mentions"] = c.min_mentions;
    params["min_affiliates"] = c.min_affiliates;
    params["louvain_resolution"] = c.louvain_resolution;
    params["permutation_iterations"] = c.permutation_iterations;
    params["bootstrap_b"] = c.bootstrap_b;
    params["crs"] = c.crs;
    params["ergm_decay"] = c.ergm_decay;
    params["ergm_burn_in"] = c.ergm_burn_in;
    params["ergm_samples"] = c.ergm_samples;
    params["ergm_thin"] = c.ergm_thin;
    params["ergm_rounds"] = c.ergm_rounds;
    params["sensitivity_thresholds"] = c.sensitivity_thresholds;
    m["parameters"] = params;

    // digests of every configured input; enough to reproduce the stage exactly
    ordered_json inputs;
    const std::vector<std::pair<std::string, const std::string*>> named = {
        {"posts", &c.posts},
        {"lexicon", &c.lexicon},
        {"annotations", &c.annotations},
        {"allowlist", &c.allowlist},
        {"sets_geojson", &c.sets_geojson},
        {"beats_geojson", &c.beats_geojson},
        {"arrests", &c.arrests},
        {"mortality", &c.mortality},
        {"ground_truth", &c.ground_truth},
    };
    for (const auto& [key, path] : named) {
        if (path->empty() || !fs::exists(*path)) continue;
        ordered_json entry;
        entry["path"] = *path;
        entry["fnv1a64"] = hex64(fnv1a64_file(*path));
        inputs[key] = entry;
    }
    m["inputs"] = inputs;

    ordered_json arts;
    for (const std::string& name : artifacts) {
        const fs::path p = out_path(ctx, name);
        ordered_json entry;
        entry["bytes"] = static_cast<std::uint64_t>(fs::file_size(p));
        entry["fnv1a64"] = hex64(fnv1a64_file(p.string()));
        arts[name] = entry;
    }
    m["artifacts"] = arts;

    write_json(out_path(ctx, "manifest_" + stage + ".json"), m);
}

ordered_json error_json(const Error& e) {
    ordered_json j;
    j["error"]["kind"] = std::string(to_string(e.kind()));
    j["error"]["message"] = e.what();
    return j;
}

// ---- model battery ---------------------------------------------------------

// In-sample rows in graph-node order; the raw matrix carries the extended
// covariate set, specifications pick a prefix of its columns.
struct ModelRows {
    Eigen::VectorXd y;
    std::vector<std::vector<double>> raw;
    std::vector<std::string> set_labels;
    std::vector<std::string> nation_labels;
    std::vector<std::string> aliases;
    std::size_t deceased = 0;
};

ModelRows model_rows(const std::vector<features::PersonFeatures>& feats) {
    ModelRows d;
    std::vector<double> ys;
    for (const auto& f : feats) {
        if (!f.in_sample) continue;
        std::vector<double> row;
        row.reserve(features::kExtendedCovariates.size());
        for (const auto& c : features::kExtendedCovariates)
            row.push_back(features::feature_value(f, c));
        d.raw.push_back(std::move(row));
        ys.push_back(f.deceased ? 1.0 : 0.0);
        if (f.deceased) ++d.deceased;
        d.set_labels.push_back(f.set_id);
        d.nation_labels.push_back(f.nation_id);
        d.aliases.push_back(f.alias_key);
    }
    d.y = Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
    return d;
}

// intercept + the first k z-scored covariates
Eigen::MatrixXd design(const features::StandardizeResult& sc, std::size_t k) {
    const Eigen::Index n = static_cast<Eigen::Index>(sc.z.size());
    Eigen::MatrixXd X(n, static_cast<Eigen::Index>(k) + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        for (std::size_t j = 0; j < k; ++j)
            X(i, static_cast<Eigen::Index>(j) + 1) = sc.z[static_cast<std::size_t>(i)][j];
    }
    return X;
}

std::vector<std::string> beta_names(std::size_t k) {
    std::vector<std::string> names = {"(intercept)"};
    for (std::size_t j = 0; j < k; ++j) names.push_back(features::kExtendedCovariates[j]);
    return names;
}

glmm::GlmmFit fit_spec(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                       std::vector<std::string> names,
                       const std::vector<std::pair<std::string, const std::vector<std::string>*>>&
                           factors) {
    glmm::GlmmSpec spec;
    spec.y = y;
    spec.X = X;
    spec.beta_names = std::move(names);
    for (const auto& [name, labels] : factors)
        spec.factors.push_back(glmm::make_factor(name, *labels));
    return glmm::fit_glmm(spec);
}

ordered_json glmm_json(const glmm::GlmmFit& fit) {
    ordered_json j;
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    j["log_likelihood"] = fit.log_likelihood;
    j["aic"] = fit.aic;
    j["composite_r2"] = fit.composite_r2;
    ordered_json coefs = ordered_json::array();
    for (Eigen::Index i = 0; i < fit.beta.size(); ++i) {
        const double se = fit.se[i];
        const double z = se > 0.0 ? fit.beta[i] / se : 0.0;
        ordered_json c;
        c["name"] = fit.beta_names[static_cast<std::size_t>(i)];
        c["estimate"] = fit.beta[i];
        c["se"] = se;
        c["odds_ratio"] = fit.odds_ratios[static_cast<std::size_t>(i)];
        c["z"] = z;
        c["p"] = normal_p(z);
        coefs.push_back(c);
    }
    j["coefficients"] = coefs;
    ordered_json vc = ordered_json::array();
    for (std::size_t f = 0; f < fit.sigma2.size(); ++f) {
        ordered_json v;
        v["factor"] = fit.factor_names[f];
        v["sigma2"] = fit.sigma2[f];
        vc.push_back(v);
    }
    j["variance_components"] = vc;
    const std::vector<double> pct = glmm::variance_decomposition(fit.sigma2);
    ordered_json dec;
    dec["individual"] = pct[0];
    for (std::size_t f = 0; f < fit.sigma2.size(); ++f) dec[fit.factor_names[f]] = pct[f + 1];
    j["variance_decomposition"] = dec;
    j["warnings"] = fit.warnings;
    return j;
}

ordered_json bootstrap_json(const logistic::BootstrapFit& fit, std::size_t k) {
    const std::vector<std::string> names = beta_names(k);
    ordered_json j;
    j["converged"] = fit.point.converged;
    j["iterations"] = fit.point.iterations;
    j["log_likelihood"] = fit.point.log_likelihood;
    j["aic"] = fit.point.aic;
    j["mcfadden_r2"] = fit.point.mcfadden_r2;
    j["n_resamples"] = fit.n_resamples;
    j["redraws"] = fit.redraws;
    ordered_json coefs = ordered_json::array();
    for (Eigen::Index i = 0; i < fit.point.beta.size(); ++i) {
        ordered_json c;
        c["name"] = names[static_cast<std::size_t>(i)];
        c["estimate"] = fit.point.beta[i];
        c["se"] = fit.point.se[i];
        c["boot_se"] = fit.boot_se[i];
        c["odds_ratio"] = std::exp(fit.point.beta[i]);
        const double se = fit.boot_se[i];
        const double z = se > 0.0 ? fit.point.beta[i] / se : 0.0;
        c["z"] = z;
        c["p"] = normal_p(z);
        coefs.push_back(c);
    }
    j["coefficients"] = coefs;
    return j;
}

// Full re-run of the analytic chain at one consensus threshold; used by the
// threshold-sensitivity specification.
struct Chain {
    affiliation::Roster roster;
    graph::ComentionGraph net;
    mortality::JoinResult join;
    std::vector<features::PersonFeatures> feats;
    std::size_t resolved = 0;
};

Chain chain_at_threshold(Context& ctx, double threshold) {
    Chain ch;
    const auto assignments =
        affiliation::resolve_all(ctx.profiles, threshold, ctx.cfg.min_mentions);
    for (const auto& a : assignments)
        if (a.status == affiliation::AffiliationStatus::Resolved) ++ch.resolved;
    ch.roster = affiliation::filter_sets(assignments, ctx.allowlist, ctx.cfg.min_affiliates);
    ch.net = graph::build_graph(ctx.posts, ch.roster, ctx.lex);
    ch.join = mortality::join_mortality(ch.roster, ctx.mortality_records);
    std::map<std::string, bool> dead = ch.join.deceased;
    for (const auto& key : ch.join.dropped) dead[key] = false; // dropped: alive for neighbors
    ch.feats = features::compute_features(ch.net, dead, ch.join.dropped);
    return ch;
}

std::string or_cell(double beta, double se) {
    return dstr(std::exp(beta), "%.3f") + " (" + dstr(se, "%.3f") + ")";
}

std::string md_row(const std::vector<std::string>& cells) {
    std::string row = "|";
    for (const auto& c : cells) row += " " + c + " |";
    return row + "\n";
}

} // namespace

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
    std::uint64_t h = 14695981039346656037ULL;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
    }
    return h;
}

const std::vector<std::string>& stage_names() {
    static const std::vector<std::string> names = {
        "ingest", "extract",  "affiliate", "graph", "communities", "geo",
        "mortality", "features", "model",   "ergm",  "recovery",    "pipeline"};
    return names;
}

// ---- lazy computation ------------------------------------------------------

void ensure_posts(Context& ctx) {
    if (ctx.have_posts) return;
    config::validate_paths(ctx.cfg, {"posts"});
    ctx.posts = ingest::load_posts(ctx.cfg.posts, ingest::format_from_name(ctx.cfg.posts_format),
                                   ctx.corpus_stats);
    ctx.have_posts = true;
}

void ensure_lexicon(Context& ctx) {
    if (ctx.have_lexicon) return;
    config::validate_paths(ctx.cfg, {"lexicon"});
    ctx.lex = lexicon::load_lexicon(ctx.cfg.lexicon);
    lexicon::validate(ctx.lex);
    if (!ctx.cfg.annotations.empty()) ctx.annotations = mention::load_annotations(ctx.cfg.annotations);
    ctx.have_lexicon = true;
}

void ensure_mentions(Context& ctx) {
    if (ctx.have_mentions) return;
    ensure_posts(ctx);
    ensure_lexicon(ctx);
    const mention::AnnotationMap* ann = ctx.cfg.annotations.empty() ? nullptr : &ctx.annotations;
    ctx.mentions = mention::emit_mentions(ctx.posts, ctx.lex, ann);
    ctx.have_mentions = true;
}

void ensure_profiles(Context& ctx) {
    if (ctx.have_profiles) return;
    ensure_mentions(ctx);
    ctx.profiles = affiliation::build_profiles(ctx.mentions, ctx.lex);
    ctx.have_profiles = true;
}

void ensure_assignments(Context& ctx) {
    if (ctx.have_assignments) return;
    ensure_profiles(ctx);
    ctx.assignments = affiliation::resolve_all(ctx.profiles, ctx.cfg.threshold, ctx.cfg.min_mentions);
    ctx.have_assignments = true;
}

void ensure_roster(Context& ctx) {
    if (ctx.have_roster) return;
    ensure_assignments(ctx);
    config::validate_paths(ctx.cfg, {"allowlist"});
    ctx.allowlist = affiliation::load_allowlist(ctx.cfg.allowlist);
    ctx.roster = affiliation::filter_sets(ctx.assignments, ctx.allowlist, ctx.cfg.min_affiliates);
    ctx.have_roster = true;
}

void ensure_graph(Context& ctx) {
    if (ctx.have_graph) return;
    ensure_roster(ctx);
    ctx.net = graph::build_graph(ctx.posts, ctx.roster, ctx.lex);
    ctx.have_graph = true;
}

void ensure_partition(Context& ctx) {
    if (ctx.have_partition) return;
    ensure_graph(ctx);
    ctx.partition = community::louvain(ctx.net, ctx.cfg.louvain_resolution,
                                       substream_seed(ctx.cfg.seed, kLouvainStream));
    ctx.have_partition = true;
}

void ensure_layers(Context& ctx) {
    if (ctx.have_layers) return;
    config::validate_paths(ctx.cfg, {"sets_geojson", "beats_geojson"});
    ctx.set_layer = geo::load_feature_collection(ctx.cfg.sets_geojson, "set_id");
    ctx.beat_layer = geo::load_feature_collection(ctx.cfg.beats_geojson, "beat_id");
    ctx.have_layers = true;
}

void ensure_geo(Context& ctx) {
    if (ctx.have_geo) return;
    ensure_graph(ctx);
    ensure_layers(ctx);
    std::vector<std::string> set_ids;
    for (const auto& s : ctx.roster.sets) set_ids.push_back(s.set_id);
    ctx.distance = spatial::distance_matrix(ctx.set_layer, crs_kind(ctx.cfg), set_ids);
    ctx.comention = spatial::set_comention_matrix(ctx.net, ctx.roster);
    ctx.geo_corr = spatial::upper_triangle_correlation(ctx.distance, ctx.comention);
    ctx.have_geo = true;
}

void ensure_join(Context& ctx) {
    if (ctx.have_join) return;
    ensure_graph(ctx);
    config::validate_paths(ctx.cfg, {"mortality"});
    ctx.mortality_records = mortality::load_mortality(ctx.cfg.mortality);
    ctx.join = mortality::join_mortality(ctx.roster, ctx.mortality_records);
    for (std::size_t i = 0; i < ctx.net.node_count(); ++i) {
        auto& node = ctx.net.node(static_cast<int>(i));
        auto it = ctx.join.deceased.find(node.alias_key);
        if (it != ctx.join.deceased.end()) node.deceased = it->second;
    }
    ctx.have_join = true;
}

void ensure_features(Context& ctx) {
    if (ctx.have_features) return;
    ensure_join(ctx);
    std::map<std::string, bool> dead = ctx.join.deceased;
    for (const auto& key : ctx.join.dropped) dead[key] = false;
    ctx.feats = features::compute_features(ctx.net, dead, ctx.join.dropped);

    std::vector<std::vector<double>> in_sample_rows, all_rows;
    for (const auto& f : ctx.feats) {
        std::vector<double> row;
        row.reserve(features::kExtendedCovariates.size());
        for (const auto& c : features::kExtendedCovariates)
            row.push_back(features::feature_value(f, c));
        all_rows.push_back(row);
        if (f.in_sample) in_sample_rows.push_back(std::move(row));
    }
    ctx.scaling = features::standardize(in_sample_rows, features::kExtendedCovariates);
    ctx.csv_scaling = ctx.scaling;
    ctx.csv_scaling.z = features::apply_scaling(all_rows, ctx.scaling);
    ctx.have_features = true;
}

// ---- stages ----------------------------------------------------------------

void run_ingest(Context& ctx) {
    ensure_posts(ctx);
    prepare_out_dir(ctx);
    const auto& s = ctx.corpus_stats;
    ordered_json j;
    j["source"] = ctx.cfg.posts;
    j["format"] = ctx.cfg.posts_format;
    j["total_posts"] = s.total_posts;
    j["tagged_posts"] = s.tagged_posts;
    j["dropped_empty_titles"] = s.dropped_empty_titles;
    if (s.total_posts > 0) {
        j["date_range"] = {s.min_created_at, s.max_created_at};
    } else {
        j["date_range"] = nullptr;
    }
    write_json(out_path(ctx, "corpus_stats.json"), j);
    write_manifest(ctx, "ingest", {"corpus_stats.json"});
}

void run_extract(Context& ctx) {
    ensure_mentions(ctx);
    prepare_out_dir(ctx);
    std::ofstream out(out_path(ctx, "mentions.jsonl"), std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write mentions.jsonl");
    for (const auto& ev : ctx.mentions) {
        ordered_json j;
        j["post_id"] = ev.post_id;
        j["alias_key"] = ev.alias_key;
        j["surface_form"] = ev.surface_form;
        j["tags"] = ev.tags;
        out << j.dump() << "\n";
    }
    out.close();
    write_manifest(ctx, "extract", {"mentions.jsonl"});
}

void run_affiliate(Context& ctx) {
    ensure_roster(ctx);
    prepare_out_dir(ctx);

    {
        std::ofstream out(out_path(ctx, "assignments.csv"), std::ios::binary);
        if (!out) throw Error(ErrorKind::IoError, "cannot write assignments.csv");
        csv::write_row(out, {"alias_key", "set_id", "nation_id", "confidence", "status",
                             "mention_count"});
        for (const auto& a : ctx.assignments) {
            std::string nation;
            if (!a.set_id.empty()) {
                auto it = ctx.allowlist.find(a.set_id);
                if (it != ctx.allowlist.end()) nation = it->second;
            }
            csv::write_row(out, {a.alias_key, a.set_id, nation, dstr(a.confidence),
                                 affiliation::to_string(a.status), std::to_string(a.mention_count)});
        }
    }
    {
        std::ofstream out(out_path(ctx, "roster.csv"), std::ios::binary);
        if (!out) throw Error(ErrorKind::IoError, "cannot write roster.csv");
        csv::write_row(out, {"alias_key", "set_id", "nation_id", "confidence", "mention_count"});
        for (const auto& m : ctx.roster.members)
            csv::write_row(out, {m.alias_key, m.set_id, m.nation_id, dstr(m.confidence),
                                 std::to_string(m.mention_count)});
    }
    {
        std::ofstream out(out_path(ctx, "sets.csv"), std::ios::binary);
        if (!out) throw Error(ErrorKind::IoError, "cannot write sets.csv");
        csv::write_row(out, {"set_id", "nation_id", "affiliate_count", "verified"});
        for (const auto& s : ctx.roster.sets)
            csv::write_row(out, {s.set_id, s.nation_id, std::to_string(s.affiliate_count),
                                 s.verified ? "1" : "0"});
    }

    std::size_t resolved = 0, unresolved = 0, too_few = 0;
    for (const auto& a : ctx.assignments) {
        switch (a.status) {
        case affiliation::AffiliationStatus::Resolved: ++resolved; break;
        case affiliation::AffiliationStatus::Unresolved: ++unresolved; break;
        case affiliation::AffiliationStatus::TooFewMentions: ++too_few; break;
        }
    }
    ordered_json j;
    j["threshold"] = ctx.cfg.threshold;
    j["min_mentions"] = ctx.cfg.min_mentions;
    j["min_affiliates"] = ctx.cfg.min_affiliates;
    j["profiles"] = ctx.profiles.size();
    j["resolved"] = resolved;
    j["unresolved"] = unresolved;
    j["too_few_mentions"] = too_few;
    j["roster_members"] = ctx.roster.members.size();
    j["sets"] = ctx.roster.sets.size();
    j["dropped_small_sets"] = ctx.roster.dropped_small_sets;
    j["dropped_unverified_sets"] = ctx.roster.dropped_unverified_sets;
    j["dropped_individuals"] = ctx.roster.dropped_individuals;
    write_json(out_path(ctx, "affiliate_summary.json"), j);

    write_manifest(ctx, "affiliate",
                   {"assignments.csv", "roster.csv", "sets.csv", "affiliate_summary.json"});
}

void run_graph(Context& ctx) {
    ensure_graph(ctx);
    prepare_out_dir(ctx);
    graph::export_edge_csv(ctx.net, out_path(ctx, "edges.csv").string(),
                           out_path(ctx, "nodes.csv").string());
    graph::export_graphml(ctx.net, out_path(ctx, "graph.graphml").string());

    const graph::GraphStats s = graph::graph_stats(ctx.net);
    ordered_json j;
    j["node_count"] = s.node_count;
    j["edge_count"] = s.edge_count;
    j["median_degree"] = s.median_degree;
    j["mean_edge_weight"] = s.mean_edge_weight;
    ordered_json dist;
    for (const auto& [deg, count] : s.degree_distribution) dist[std::to_string(deg)] = count;
    j["degree_distribution"] = dist;
    write_json(out_path(ctx, "graph_stats.json"), j);

    write_manifest(ctx, "graph", {"edges.csv", "nodes.csv", "graph.graphml", "graph_stats.json"});
}

void run_communities(Context& ctx) {
    ensure_partition(ctx);
    prepare_out_dir(ctx);

    {
        std::ofstream out(out_path(ctx, "communities.csv"), std::ios::binary);
        if (!out) throw Error(ErrorKind::IoError, "cannot write communities.csv");
        csv::write_row(out, {"alias_key", "community_id"});
        for (std::size_t i = 0; i < ctx.net.node_count(); ++i)
            csv::write_row(out, {ctx.net.node(static_cast<int>(i)).alias_key,
                                 std::to_string(ctx.partition.assignment[i])});
    }

    const community::CompositionTable comp = community::composition(ctx.partition, ctx.net);
    if (!ctx.have_baseline) {
        ctx.baseline = community::permutation_baseline(ctx.partition, ctx.net,
                                                       ctx.cfg.permutation_iterations,
                                                       substream_seed(ctx.cfg.seed, kPermutationStream));
        ctx.have_baseline = true;
    }
    {
        std::ofstream out(out_path(ctx, "composition.csv"), std::ios::binary);
        if (!out) throw Error(ErrorKind::IoError, "cannot write composition.csv");
        csv::write_row(out, {"set_id", "community_id", "proportion", "baseline_proportion"});
        for (std::size_t r = 0; r < comp.set_ids.size(); ++r)
            for (int c = 0; c < comp.community_count; ++c)
                csv::write_row(out, {comp.set_ids[r], std::to_string(c),
                                     dstr(comp.proportions[r][static_cast<std::size_t>(c)]),
                                     dstr(ctx.baseline.mean.proportions[r][static_cast<std::size_t>(c)])});
    }

    // NMI between the detected communities and the affiliation partition
    std::map<std::string, int> set_code;
    for (const auto& s : ctx.roster.sets) set_code.emplace(s.set_id, static_cast<int>(set_code.size()));
    std::vector<int> set_partition(ctx.net.node_count());
    for (std::size_t i = 0; i < ctx.net.node_count(); ++i)
        set_partition[i] = set_code.at(ctx.net.node(static_cast<int>(i)).set_id);
    const double nmi =
        community::normalized_mutual_information(ctx.partition.assignment, set_partition);

    std::map<int, std::size_t> sizes;
    for (int c : ctx.partition.assignment) ++sizes[c];

    ordered_json j;
    j["community_count"] = ctx.partition.community_count;
    j["modularity_q"] = ctx.partition.modularity_q;
    j["resolution"] = ctx.partition.resolution;
    j["louvain_seed"] = ctx.partition.seed;
    j["nmi_vs_sets"] = nmi;
    ordered_json sz;
    for (const auto& [c, n] : sizes) sz[std::to_string(c)] = n;
    j["community_sizes"] = sz;
    ordered_json perm;
    perm["iterations"] = ctx.baseline.iterations;
    perm["max_abs_deviation"] = ctx.baseline.max_abs_deviation;
    j["permutation_baseline"] = perm;
    write_json(out_path(ctx, "communities_summary.json"), j);

    write_manifest(ctx, "communities",
                   {"communities.csv", "composition.csv", "communities_summary.json"});
}

void run_geo(Context& ctx) {
    ensure_geo(ctx);
    ensure_partition(ctx);
    config::validate_paths(ctx.cfg, {"arrests"});
    prepare_out_dir(ctx);

    auto write_matrix = [&](const spatial::SetMatrix& m, const std::string& name) {
        std::ofstream out(out_path(ctx, name), std::ios::binary);
        if (!out) throw Error(ErrorKind::IoError, "cannot write " + name);
        std::vector<std::string> header = {"set_id"};
        header.insert(header.end(), m.set_ids.begin(), m.set_ids.end());
        csv::write_row(out, header);
        for (std::size_t r = 0; r < m.set_ids.size(); ++r) {
            std::vector<std::string> row = {m.set_ids[r]};
            for (double v : m.values[r]) row.push_back(dstr(v));
            csv::write_row(out, row);
        }
    };
    write_matrix(ctx.distance, "distance_matrix.csv");
    write_matrix(ctx.comention, "comention_matrix.csv");

    {
        ordered_json j;
        j["r"] = ctx.geo_corr->r;
        j["t"] = ctx.geo_corr->t;
        j["p_value"] = ctx.geo_corr->p_value;
        j["n_pairs"] = ctx.geo_corr->n;
        j["crs"] = ctx.cfg.crs;
        write_json(out_path(ctx, "geo_correlation.json"), j);
    }

    const auto arrests = spatial::load_arrests(ctx.cfg.arrests);
    const auto validation = spatial::beat_validation(ctx.set_layer, ctx.beat_layer, arrests);
    {
        std::ofstream out(out_path(ctx, "validation.csv"), std::ios::binary);
        if (!out) throw Error(ErrorKind::IoError, "cannot write validation.csv");
        csv::write_row(out, {"set_id", "modal_beats", "modal_count", "ambiguous", "intersects",
                             "total_arrests"});
        for (const auto& row : validation) {
            std::string beats;
            for (std::size_t i = 0; i < row.modal_beats.size(); ++i) {
                if (i) beats += ";";
                beats += row.modal_beats[i];
            }
            csv::write_row(out, {row.set_id, beats, std::to_string(row.modal_count),
                                 row.ambiguous ? "1" : "0", row.intersects ? "1" : "0",
                                 std::to_string(row.total_arrests)});
        }
    }

    // choropleth: set polygons with community composition merged in
    const community::CompositionTable comp = community::composition(ctx.partition, ctx.net);
    std::map<std::string, std::size_t> set_sizes;
    for (const auto& m : ctx.roster.members) ++set_sizes[m.set_id];
    std::map<std::string, nlohmann::json> extra;
    for (std::size_t r = 0; r < comp.set_ids.size(); ++r) {
        nlohmann::json props;
        props["affiliates"] = set_sizes[comp.set_ids[r]];
        int dominant = 0;
        double best = -1.0;
        for (int c = 0; c < comp.community_count; ++c) {
            const double p = comp.proportions[r][static_cast<std::size_t>(c)];
            props["community_" + std::to_string(c)] = p;
            if (p > best) {
                best = p;
                dominant = c;
            }
        }
        props["dominant_community"] = dominant;
        extra[comp.set_ids[r]] = props;
    }
    geo::save_feature_collection(out_path(ctx, "choropleth.geojson").string(), ctx.set_layer,
                                 extra);

    write_manifest(ctx, "geo",
                   {"distance_matrix.csv", "comention_matrix.csv", "geo_correlation.json",
                    "validation.csv", "choropleth.geojson"});
}

void run_mortality(Context& ctx) {
    ensure_join(ctx);
    prepare_out_dir(ctx);
    mortality::write_audit_jsonl(ctx.join, out_path(ctx, "audit.jsonl").string());

    std::map<std::string, std::size_t> outcomes;
    for (const auto& e : ctx.join.audit) ++outcomes[mortality::to_string(e.outcome)];
    ordered_json j;
    j["roster_members"] = ctx.roster.members.size();
    j["sample_size"] = ctx.join.sample_size;
    j["deceased"] = ctx.join.deceased_count;
    j["dropped"] = ctx.join.dropped.size();
    ordered_json oc;
    for (const auto& [name, count] : outcomes) oc[name] = count;
    j["outcomes"] = oc;
    write_json(out_path(ctx, "mortality_summary.json"), j);

    write_manifest(ctx, "mortality", {"audit.jsonl", "mortality_summary.json"});
}

void run_features(Context& ctx) {
    ensure_features(ctx);
    prepare_out_dir(ctx);
    features::write_features_csv(ctx.feats, ctx.csv_scaling,
                                 out_path(ctx, "features.csv").string(),
                                 out_path(ctx, "features_scaling.json").string());
    write_manifest(ctx, "features", {"features.csv", "features_scaling.json"});
}

void run_model(Context& ctx) {
    ensure_features(ctx);
    ensure_partition(ctx);
    prepare_out_dir(ctx);

    const ModelRows d = model_rows(ctx.feats);
    const std::size_t k_main = features::kMainCovariates.size();
    const std::size_t k_ext = features::kExtendedCovariates.size();

    std::vector<std::string> community_labels;
    community_labels.reserve(d.aliases.size());
    for (const auto& alias : d.aliases) {
        const int idx = ctx.net.node_index(alias);
        community_labels.push_back("c" + std::to_string(ctx.partition.assignment[static_cast<std::size_t>(idx)]));
    }

    const Eigen::MatrixXd X_empty = design(ctx.scaling, 0);
    const Eigen::MatrixXd X_main = design(ctx.scaling, k_main);
    const Eigen::MatrixXd X_ext = design(ctx.scaling, k_ext);

    ordered_json sample;
    sample["rows"] = d.raw.size();
    sample["deceased"] = d.deceased;
    sample["dropped"] = ctx.join.dropped.size();
    sample["sets"] = ctx.roster.sets.size();
    {
        std::set<std::string> nations;
        for (const auto& s : ctx.roster.sets) nations.insert(s.nation_id);
        sample["nations"] = nations.size();
    }
    sample["communities"] = ctx.partition.community_count;

    ordered_json specs;
    std::optional<glmm::GlmmFit> fit_empty, fit_main, fit_four, fit_within;
    std::optional<logistic::BootstrapFit> fit_boot;

    const std::vector<std::pair<std::string, const std::vector<std::string>*>> two_level = {
        {"set", &d.set_labels}, {"nation", &d.nation_labels}};
    const std::vector<std::pair<std::string, const std::vector<std::string>*>> three_level = {
        {"set", &d.set_labels}, {"nation", &d.nation_labels}, {"community", &community_labels}};

    try {
        fit_empty = fit_spec(d.y, X_empty, beta_names(0), two_level);
        specs["empty"] = glmm_json(*fit_empty);
    } catch (const Error& e) {
        specs["empty"] = error_json(e);
    }
    try {
        fit_main = fit_spec(d.y, X_main, beta_names(k_main), two_level);
        specs["main"] = glmm_json(*fit_main);
    } catch (const Error& e) {
        specs["main"] = error_json(e);
    }
    try {
        fit_four = fit_spec(d.y, X_main, beta_names(k_main), three_level);
        specs["four_level"] = glmm_json(*fit_four);
    } catch (const Error& e) {
        specs["four_level"] = error_json(e);
    }
    try {
        fit_within = fit_spec(d.y, X_ext, beta_names(k_ext), two_level);
        specs["within_centrality"] = glmm_json(*fit_within);
    } catch (const Error& e) {
        specs["within_centrality"] = error_json(e);
    }
    try {
        fit_boot = logistic::fit_logistic_bootstrap(d.y, X_main, ctx.cfg.bootstrap_b,
                                                    substream_seed(ctx.cfg.seed, kBootstrapStream));
        specs["single_level_bootstrap"] = bootstrap_json(*fit_boot, k_main);
    } catch (const Error& e) {
        specs["single_level_bootstrap"] = error_json(e);
    }

    // whole-chain rerun at each sensitivity threshold, main specification
    ordered_json sensitivity = ordered_json::array();
    for (double t : ctx.cfg.sensitivity_thresholds) {
        ordered_json entry;
        entry["threshold"] = t;
        try {
            Chain ch = chain_at_threshold(ctx, t);
            const ModelRows sd = model_rows(ch.feats);
            std::vector<std::vector<double>> rows;
            for (const auto& r : sd.raw) rows.push_back(r);
            const features::StandardizeResult sc =
                features::standardize(rows, features::kExtendedCovariates);
            const Eigen::MatrixXd X = design(sc, k_main);
            entry["resolved"] = ch.resolved;
            entry["roster_members"] = ch.roster.members.size();
            entry["sets"] = ch.roster.sets.size();
            entry["rows"] = sd.raw.size();
            entry["deceased"] = sd.deceased;
            entry["dropped"] = ch.join.dropped.size();
            const std::vector<std::pair<std::string, const std::vector<std::string>*>> fac = {
                {"set", &sd.set_labels}, {"nation", &sd.nation_labels}};
            entry["fit"] = glmm_json(fit_spec(sd.y, X, beta_names(k_main), fac));
        } catch (const Error& e) {
            entry.update(error_json(e));
        }
        sensitivity.push_back(entry);
    }
    specs["threshold_sensitivity"] = sensitivity;

    ordered_json scaling;
    scaling["columns"] = ctx.scaling.columns;
    scaling["means"] = ctx.scaling.means;
    scaling["sds"] = ctx.scaling.sds;

    // one report per specification plus the combined report
    std::vector<std::string> artifacts;
    for (const auto& name : {"empty", "main", "four_level", "within_centrality",
                             "single_level_bootstrap", "threshold_sensitivity"}) {
        ordered_json j;
        j["specification"] = name;
        j["sample"] = sample;
        j["report"] = specs[name];
        const std::string file = std::string("model_") + name + ".json";
        write_json(out_path(ctx, file), j);
        artifacts.push_back(file);
    }

    ordered_json combined;
    combined["sample"] = sample;
    combined["scaling"] = scaling;
    combined["specifications"] = specs;
    write_json(out_path(ctx, "model_report.json"), combined);
    artifacts.push_back("model_report.json");

    // markdown mirror of the two headline tables
    std::string md = "# Mortality model battery\n\n";
    md += "Sample: " + std::to_string(d.raw.size()) + " individuals (" +
          std::to_string(d.deceased) + " deceased, " + std::to_string(ctx.join.dropped.size()) +
          " dropped by the mortality join), " + std::to_string(ctx.roster.sets.size()) +
          " sets, " + sample["nations"].dump() + " nations, " +
          std::to_string(ctx.partition.community_count) + " communities.\n\n";

    md += "## Table 1. Variance decomposition (empty model)\n\n";
    if (fit_empty) {
        const std::vector<double> pct = glmm::variance_decomposition(fit_empty->sigma2);
        md += md_row({"Level", "Variance", "% of latent variance"});
        md += md_row({"---", "---", "---"});
        md += md_row({"Individual", dstr(glmm::kLogisticLatentVariance, "%.3f"),
                      dstr(pct[0], "%.2f")});
        for (std::size_t f = 0; f < fit_empty->sigma2.size(); ++f)
            md += md_row({fit_empty->factor_names[f], dstr(fit_empty->sigma2[f], "%.4f"),
                          dstr(pct[f + 1], "%.2f")});
        md += "\n";
    } else {
        md += "(empty model did not fit)\n\n";
    }

    md += "## Table 2. Mortality models, odds ratios (SE of log-odds)\n\n";
    md += md_row({"Covariate", "Main", "Four-level", "Within-centrality",
                  "Single-level (bootstrap SE)"});
    md += md_row({"---", "---", "---", "---", "---"});
    auto cell_for = [&](const std::optional<glmm::GlmmFit>& fit, std::size_t col) -> std::string {
        if (!fit || col >= static_cast<std::size_t>(fit->beta.size())) return "—";
        return or_cell(fit->beta[static_cast<Eigen::Index>(col)],
                       fit->se[static_cast<Eigen::Index>(col)]);
    };
    for (std::size_t j = 0; j <= k_ext; ++j) {
        const std::string name = j == 0 ? "(intercept)" : features::kExtendedCovariates[j - 1];
        std::string boot_cell = "—";
        if (j <= k_main && fit_boot)
            boot_cell = or_cell(fit_boot->point.beta[static_cast<Eigen::Index>(j)],
                                fit_boot->boot_se[static_cast<Eigen::Index>(j)]);
        md += md_row({name, j <= k_main ? cell_for(fit_main, j) : "—",
                      j <= k_main ? cell_for(fit_four, j) : "—", cell_for(fit_within, j),
                      boot_cell});
    }
    auto sigma_cell = [&](const std::optional<glmm::GlmmFit>& fit,
                          const std::string& factor) -> std::string {
        if (!fit) return "—";
        for (std::size_t f = 0; f < fit->factor_names.size(); ++f)
            if (fit->factor_names[f] == factor) return dstr(fit->sigma2[f], "%.4f");
        return "—";
    };
    for (const std::string factor : {"set", "nation", "community"})
        md += md_row({"sigma^2 " + factor, sigma_cell(fit_main, factor),
                      sigma_cell(fit_four, factor), sigma_cell(fit_within, factor), "—"});
    auto stat_row = [&](const std::string& label, auto get_glmm,
                        const std::string& boot_value) {
        md += md_row({label, fit_main ? get_glmm(*fit_main) : "—",
                      fit_four ? get_glmm(*fit_four) : "—",
                      fit_within ? get_glmm(*fit_within) : "—", boot_value});
    };
    stat_row("AIC", [&](const glmm::GlmmFit& f) { return dstr(f.aic, "%.2f"); },
             fit_boot ? dstr(fit_boot->point.aic, "%.2f") : "—");
    stat_row("Composite R^2", [&](const glmm::GlmmFit& f) { return dstr(f.composite_r2, "%.4f"); },
             fit_boot ? dstr(fit_boot->point.mcfadden_r2, "%.4f") + " (McFadden)" : "—");
    md += md_row({"N", std::to_string(d.raw.size()), std::to_string(d.raw.size()),
                  std::to_string(d.raw.size()), std::to_string(d.raw.size())});
    md += "\n";

    md += "## Threshold sensitivity (main specification)\n\n";
    md += md_row({"Threshold", "N", "Deceased", "Sets", "Converged"});
    md += md_row({"---", "---", "---", "---", "---"});
    for (const auto& entry : sensitivity) {
        if (entry.contains("error")) {
            md += md_row({dstr(entry["threshold"].get<double>(), "%.2f"), "—", "—", "—",
                          std::string(entry["error"]["kind"])});
            continue;
        }
        md += md_row({dstr(entry["threshold"].get<double>(), "%.2f"),
                      std::to_string(entry["rows"].get<std::size_t>()),
                      std::to_string(entry["deceased"].get<std::size_t>()),
                      std::to_string(entry["sets"].get<std::size_t>()),
                      entry["fit"]["converged"].get<bool>() ? "yes" : "no"});
    }
    write_text(out_path(ctx, "model_report.md"), md);
    artifacts.push_back("model_report.md");

    write_manifest(ctx, "model", artifacts);
}

void run_ergm(Context& ctx) {
    ensure_features(ctx);
    prepare_out_dir(ctx);

    const ergm::BinaryGraph bg = ergm::binarize(ctx.net);
    ergm::ErgmModel model;
    {
        ergm::Term edges;
        edges.kind = ergm::TermKind::Edges;
        model.terms.push_back(edges);
        ergm::Term gw;
        gw.kind = ergm::TermKind::GwDegree;
        gw.decay = ctx.cfg.ergm_decay;
        model.terms.push_back(gw);
        ergm::Term cov;
        cov.kind = ergm::TermKind::NodeCov;
        cov.attribute = "deceased";
        cov.values.resize(ctx.net.node_count(), 0.0);
        for (std::size_t i = 0; i < ctx.net.node_count(); ++i) {
            const auto& node = ctx.net.node(static_cast<int>(i));
            auto it = ctx.join.deceased.find(node.alias_key);
            if (it != ctx.join.deceased.end() && it->second) cov.values[i] = 1.0;
        }
        model.terms.push_back(cov);
    }
    ergm::validate_model(model, bg.n());

    auto fit_json = [&](const ergm::ErgmFit& fit) {
        ordered_json j;
        j["method"] = fit.method;
        j["converged"] = fit.converged;
        ordered_json terms = ordered_json::array();
        for (std::size_t i = 0; i < fit.term_labels.size(); ++i) {
            const double se = fit.se[static_cast<Eigen::Index>(i)];
            const double est = fit.theta[static_cast<Eigen::Index>(i)];
            const double z = se > 0.0 ? est / se : 0.0;
            ordered_json t;
            t["term"] = fit.term_labels[i];
            t["estimate"] = est;
            t["se"] = se;
            t["z"] = z;
            t["p"] = normal_p(z);
            terms.push_back(t);
        }
        j["terms"] = terms;
        j["pseudo_log_likelihood"] = fit.pseudo_log_likelihood;
        j["aic"] = fit.aic;
        if (fit.method == "mcmc_mle") {
            ordered_json diag;
            diag["acceptance_rate"] = fit.diagnostics.acceptance_rate;
            diag["effective_sample_size"] = fit.diagnostics.effective_sample_size;
            diag["n_samples"] = fit.diagnostics.n_samples;
            j["diagnostics"] = diag;
        }
        return j;
    };

    ordered_json report;
    report["n_nodes"] = bg.n();
    report["n_edges"] = bg.edge_count();
    report["density"] = bg.density();
    {
        ordered_json labels = ordered_json::array();
        for (const auto& t : model.terms) labels.push_back(t.label());
        report["terms"] = labels;
        const Eigen::VectorXd obs = ergm::statistics(bg, model);
        std::vector<double> v(obs.data(), obs.data() + obs.size());
        report["observed_statistics"] = v;
    }
    report["decay"] = ctx.cfg.ergm_decay;

    const ergm::ErgmFit mple = ergm::fit_mple(bg, model);
    report["mple"] = fit_json(mple);

    const ergm::ErgmFit* final_fit = &mple;
    std::optional<ergm::ErgmFit> mcmc;
    ergm::McmcMleOptions opts;
    opts.max_rounds = ctx.cfg.ergm_rounds;
    opts.sim.burn_in = ctx.cfg.ergm_burn_in;
    opts.sim.n_samples = ctx.cfg.ergm_samples;
    opts.sim.thin = ctx.cfg.ergm_thin;
    try {
        mcmc = ergm::fit_mcmc_mle(bg, model, substream_seed(ctx.cfg.seed, kErgmStream), opts);
        report["mcmc_mle"] = fit_json(*mcmc);
        final_fit = &*mcmc;
    } catch (const Error& e) {
        report["mcmc_mle"] = error_json(e);
    }

    // headline: does mortality predict tie formation? (reported, not asserted)
    for (std::size_t i = 0; i < final_fit->term_labels.size(); ++i) {
        if (final_fit->term_labels[i] != "nodecov.deceased") continue;
        const double est = final_fit->theta[static_cast<Eigen::Index>(i)];
        const double se = final_fit->se[static_cast<Eigen::Index>(i)];
        const double z = se > 0.0 ? est / se : 0.0;
        ordered_json t;
        t["method"] = final_fit->method;
        t["estimate"] = est;
        t["se"] = se;
        t["z"] = z;
        t["p"] = normal_p(z);
        report["mortality_term"] = t;
    }

    write_json(out_path(ctx, "ergm_report.json"), report);
    write_manifest(ctx, "ergm", {"ergm_report.json"});
}

void run_recovery(Context& ctx) {
    if (ctx.cfg.ground_truth.empty())
        throw Error(ErrorKind::ConfigInvalid, "recovery requires the ground_truth config key");
    config::validate_paths(ctx.cfg, {"ground_truth"});
    ensure_partition(ctx);
    if (!ctx.cfg.sets_geojson.empty() && !ctx.cfg.beats_geojson.empty()) ensure_geo(ctx);
    prepare_out_dir(ctx);

    const synth::GroundTruth truth = synth::load_ground_truth(ctx.cfg.ground_truth);
    std::vector<int> community_of_member;
    community_of_member.reserve(ctx.roster.members.size());
    for (const auto& m : ctx.roster.members) {
        const int idx = ctx.net.node_index(m.alias_key);
        community_of_member.push_back(idx >= 0 ? ctx.partition.assignment[static_cast<std::size_t>(idx)]
                                               : -1);
    }
    const stats::PearsonResult* geo_ptr = ctx.have_geo ? &*ctx.geo_corr : nullptr;
    const synth::RecoveryReport report =
        synth::score_recovery(truth, ctx.roster, community_of_member, geo_ptr);
    synth::save_recovery_report(report, out_path(ctx, "recovery_report.json").string());
    write_manifest(ctx, "recovery", {"recovery_report.json"});
}

void run_stage(Context& ctx, const std::string& name) {
    if (name == "ingest") return run_ingest(ctx);
    if (name == "extract") return run_extract(ctx);
    if (name == "affiliate") return run_affiliate(ctx);
    if (name == "graph") return run_graph(ctx);
    if (name == "communities") return run_communities(ctx);
    if (name == "geo") return run_geo(ctx);
    if (name == "mortality") return run_mortality(ctx);
    if (name == "features") return run_features(ctx);
    if (name == "model") return run_model(ctx);
    if (name == "ergm") return run_ergm(ctx);
    if (name == "recovery") return run_recovery(ctx);
    if (name == "pipeline") return run_all(ctx);
    throw Error(ErrorKind::ConfigInvalid, "unknown stage '" + name + "'");
}

void run_all(Context& ctx) {
    run_ingest(ctx);
    run_extract(ctx);
    run_affiliate(ctx);
    run_graph(ctx);
    run_communities(ctx);
    const bool have_geo_inputs = !ctx.cfg.sets_geojson.empty() &&
                                 !ctx.cfg.beats_geojson.empty() && !ctx.cfg.arrests.empty();
    if (have_geo_inputs) run_geo(ctx);
    run_mortality(ctx);
    run_features(ctx);
    run_model(ctx);
    run_ergm(ctx);
    if (!ctx.cfg.ground_truth.empty()) run_recovery(ctx);
}

} // namespace comet::pipeline
