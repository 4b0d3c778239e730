#include "comet/synth.hpp"

#include "comet/csv.hpp"
#include "comet/error.hpp"
#include "comet/geojson.hpp"
#include "comet/logistic.hpp"
#include "comet/community.hpp"
#include "comet/rng.hpp"
#include "comet/spatial.hpp"
#include "comet/text.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

namespace comet::synth {

namespace {

const char* kFirstWords[10] = {"Lil", "Big", "Young", "Baby", "King",
                               "Duke", "Mad", "Slim", "Fat", "Tall"};
const char* kSecondWords[10] = {"Rob", "Tone", "Smoke", "Blue", "Red",
                                "Ace", "Trey", "Nine", "Zo", "Rico"};

std::string two_digits(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%02d", i);
    return buf;
}

struct Person {
    int id = 0;
    int set_index = 0;
    std::string alias_key;
    std::string surface_space, surface_hyphen, surface_concat;

    const std::string& surface(int variant) const {
        switch (variant) {
            case 0: return surface_space;
            case 1: return surface_hyphen;
            default: return surface_concat;
        }
    }
};

} // namespace

void validate_config(const SynthConfig& cfg) {
    if (cfg.n_sets < 2 || cfg.n_nations < 1 || cfg.n_nations > cfg.n_sets) {
        throw Error(ErrorKind::ConfigInvalid, "synth: need n_sets >= 2 and 1 <= n_nations <= n_sets");
    }
    if (cfg.persons_per_set < 1 || cfg.tagged_posts_per_person < 1) {
        throw Error(ErrorKind::ConfigInvalid, "synth: persons and posts per person must be positive");
    }
    if (!(cfg.tag_noise_rate >= 0.0 && cfg.tag_noise_rate < 1.0)) {
        throw Error(ErrorKind::ConfigInvalid, "synth: tag_noise_rate must lie in [0, 1)");
    }
    if (cfg.tag_noise_rate >= 1.0 - cfg.resolution_threshold + 0.5) {
        // rho < 1 - threshold keeps the planted set identifiable in expectation;
        // the +0.5 slack covers the (0.5, 1] threshold domain.
        throw Error(ErrorKind::ConfigInvalid,
                    "synth: tag_noise_rate too high for the resolution threshold");
    }
    if (cfg.p_in <= 0.0 || cfg.p_between_base < 0.0 || cfg.lambda_m <= 0.0) {
        throw Error(ErrorKind::ConfigInvalid, "synth: co-mention rates must be positive");
    }
    if (cfg.anchor_rate <= 0.0 || cfg.anchor_rate >= 1.0 ||
        cfg.wave_base_rate <= 0.0 || cfg.wave_base_rate >= 1.0) {
        throw Error(ErrorKind::ConfigInvalid, "synth: mortality rates must lie in (0, 1)");
    }
    if (cfg.block_deg <= 0.0) {
        throw Error(ErrorKind::ConfigInvalid, "synth: block pitch must be positive");
    }
}

GroundTruth generate(const SynthConfig& cfg, const std::string& out_dir) {
    validate_config(cfg);
    std::filesystem::create_directories(out_dir);
    const auto path = [&](const char* name) {
        return (std::filesystem::path(out_dir) / name).string();
    };

    GroundTruth truth;
    truth.config = cfg;
    truth.beta_star = cfg.beta_star;
    truth.alpha = std::log(cfg.wave_base_rate / (1.0 - cfg.wave_base_rate));

    // --- sets, nations, grid geometry ---------------------------------
    const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(cfg.n_sets))));
    std::vector<std::string> set_ids(cfg.n_sets);
    std::vector<geometry::Point> set_centroids(cfg.n_sets);
    for (int s = 0; s < cfg.n_sets; ++s) {
        set_ids[s] = "set" + two_digits(s);
        const int nation = s * cfg.n_nations / cfg.n_sets;
        truth.nation_of_set[set_ids[s]] = "nation" + std::to_string(nation);
        const double gx = static_cast<double>(s % side);
        const double gy = static_cast<double>(s / side);
        set_centroids[s] = {cfg.grid_origin_lon + (gx + 0.5) * cfg.block_deg,
                            cfg.grid_origin_lat + (gy + 0.5) * cfg.block_deg};
    }

    // Meters between set centroids (equirectangular about the grid's mean
    // latitude, matching the geo stage).
    double mean_lat = 0.0;
    for (const auto& p : set_centroids) mean_lat += p.y;
    mean_lat /= static_cast<double>(cfg.n_sets);
    auto dist_m = [&](int a, int b) {
        return spatial::point_distance_m(set_centroids[a], set_centroids[b],
                                         spatial::CrsKind::geographic_degrees, mean_lat);
    };

    // --- persons --------------------------------------------------------
    const int n_persons = cfg.n_sets * cfg.persons_per_set;
    std::vector<Person> persons(static_cast<std::size_t>(n_persons));
    for (int i = 0; i < n_persons; ++i) {
        Person& p = persons[static_cast<std::size_t>(i)];
        p.id = i;
        p.set_index = i / cfg.persons_per_set;
        const std::string first = kFirstWords[i % 10];
        const std::string second = kSecondWords[(i / 10) % 10];
        const std::string digits = two_digits(i);
        p.surface_space = first + " " + second + digits;
        p.surface_hyphen = first + "-" + second + digits;
        p.surface_concat = first + second + digits;
        p.alias_key = text::canonical_key(p.surface_concat);
        truth.affiliation[p.alias_key] = set_ids[p.set_index];
        truth.surface_forms[p.alias_key] = {p.surface_space, p.surface_hyphen, p.surface_concat};
    }

    Rng rng(cfg.seed);

    // --- posts ------------------------------------------------------------
    struct Post {
        std::string title;
        std::vector<std::pair<std::size_t, std::size_t>> spans; // alias byte spans
    };
    std::vector<Post> posts;

    const char* tagged_templates_prefix[5] = {"peep ", "new flick from ", "word is ",
                                              "late night ", "block update "};
    const char* tagged_templates_suffix[5] = {" reppin hard ", " on live ", " out here ",
                                              " going crazy ", " in Chiraq traffic "};
    auto tag_surface = [&](int set_index, int variant) -> std::string {
        const std::string digits = two_digits(set_index);
        switch (variant) {
            case 0: return "Set" + digits;
            case 1: return "SET " + digits;
            default: return "S" + digits; // resolved via tag_alias_map
        }
    };

    // Tagged posts, person order; each carries exactly one alias + one tag.
    for (const Person& p : persons) {
        for (int t = 0; t < cfg.tagged_posts_per_person; ++t) {
            const int variant = static_cast<int>(rng.uniform_int(3));
            int tag_set = p.set_index;
            if (rng.uniform() < cfg.tag_noise_rate) {
                int other = static_cast<int>(rng.uniform_int(
                    static_cast<std::uint64_t>(cfg.n_sets - 1)));
                if (other >= p.set_index) ++other;
                tag_set = other;
            }
            const int tag_variant = static_cast<int>(rng.uniform_int(3));
            const int tpl = static_cast<int>(rng.uniform_int(5));
            const bool decoy = rng.uniform() < 0.10;

            Post post;
            post.title = tagged_templates_prefix[tpl];
            const std::size_t start = post.title.size();
            post.title += p.surface(variant);
            post.spans.emplace_back(start, post.title.size());
            post.title += tagged_templates_suffix[tpl];
            post.title += "[" + tag_surface(tag_set, tag_variant) + "]";
            if (decoy) post.title += " [video]";
            posts.push_back(std::move(post));
        }
    }

    // Co-mention posts, pair order (i < j).
    const char* pair_templates[4] = {"spotted %A% with %B% on the low",
                                     "peep %A% and %B% posted up",
                                     "new clip %A% x %B% dropping",
                                     "last night %A% linked with %B% downtown"};
    for (int i = 0; i < n_persons; ++i) {
        for (int j = i + 1; j < n_persons; ++j) {
            const Person& a = persons[static_cast<std::size_t>(i)];
            const Person& b = persons[static_cast<std::size_t>(j)];
            double rate;
            if (a.set_index == b.set_index) {
                rate = cfg.p_in;
            } else {
                rate = cfg.p_between_base *
                       std::exp(-dist_m(a.set_index, b.set_index) / cfg.lambda_m);
            }
            const std::uint64_t count = rng.poisson(rate);
            if (count == 0) continue;
            auto key = std::make_pair(a.alias_key, b.alias_key);
            if (key.first > key.second) std::swap(key.first, key.second);
            truth.edges[key] += static_cast<std::int64_t>(count);
            for (std::uint64_t c = 0; c < count; ++c) {
                const int va = static_cast<int>(rng.uniform_int(3));
                const int vb = static_cast<int>(rng.uniform_int(3));
                const std::string tpl = pair_templates[rng.uniform_int(4)];
                Post post;
                const std::size_t ia = tpl.find("%A%");
                const std::size_t ib = tpl.find("%B%");
                post.title = tpl.substr(0, ia);
                std::size_t start = post.title.size();
                post.title += a.surface(va);
                post.spans.emplace_back(start, post.title.size());
                post.title += tpl.substr(ia + 3, ib - (ia + 3));
                start = post.title.size();
                post.title += b.surface(vb);
                post.spans.emplace_back(start, post.title.size());
                post.title += tpl.substr(ib + 3);
                posts.push_back(std::move(post));
            }
        }
    }

    // --- mortality: anchors, then the planted wave -----------------------
    std::vector<bool> anchor(static_cast<std::size_t>(n_persons), false);
    for (int i = 0; i < n_persons; ++i) {
        anchor[static_cast<std::size_t>(i)] = rng.bernoulli(cfg.anchor_rate);
    }

    // True adjacency for the anchor-share covariate.
    std::map<std::string, int> person_index;
    for (const Person& p : persons) person_index[p.alias_key] = p.id;
    std::vector<std::vector<int>> nbrs(static_cast<std::size_t>(n_persons));
    for (const auto& [pair, w] : truth.edges) {
        (void)w;
        const int u = person_index.at(pair.first);
        const int v = person_index.at(pair.second);
        nbrs[static_cast<std::size_t>(u)].push_back(v);
        nbrs[static_cast<std::size_t>(v)].push_back(u);
    }

    std::vector<double> share(static_cast<std::size_t>(n_persons), 0.0);
    for (int i = 0; i < n_persons; ++i) {
        const auto& ns = nbrs[static_cast<std::size_t>(i)];
        if (ns.empty()) continue;
        int dead = 0;
        for (int v : ns) {
            if (anchor[static_cast<std::size_t>(v)]) ++dead;
        }
        share[static_cast<std::size_t>(i)] =
            static_cast<double>(dead) / static_cast<double>(ns.size());
    }
    for (const Person& p : persons) {
        truth.anchor_share[p.alias_key] = share[static_cast<std::size_t>(p.id)];
    }

    // z-score the share over the non-anchor population.
    std::vector<double> non_anchor_share;
    for (int i = 0; i < n_persons; ++i) {
        if (!anchor[static_cast<std::size_t>(i)]) {
            non_anchor_share.push_back(share[static_cast<std::size_t>(i)]);
        }
    }
    const double share_mean = stats::mean(non_anchor_share);
    const double share_sd = stats::population_sd(non_anchor_share);

    for (int i = 0; i < n_persons; ++i) {
        const Person& p = persons[static_cast<std::size_t>(i)];
        if (anchor[static_cast<std::size_t>(i)]) {
            truth.anchors.insert(p.alias_key);
            truth.deceased.insert(p.alias_key);
            continue;
        }
        const double z = share_sd > 0.0
                             ? (share[static_cast<std::size_t>(i)] - share_mean) / share_sd
                             : 0.0;
        const double prob = logistic::sigmoid(truth.alpha + cfg.beta_star * z);
        if (rng.bernoulli(prob)) truth.deceased.insert(p.alias_key);
    }

    // --- write posts.jsonl + annotations.jsonl ----------------------------
    {
        std::ofstream pf(path("posts.jsonl"));
        std::ofstream af(path("annotations.jsonl"));
        if (!pf || !af) throw Error(ErrorKind::IoError, "cannot write posts under " + out_dir);
        for (std::size_t i = 0; i < posts.size(); ++i) {
            char idbuf[24];
            std::snprintf(idbuf, sizeof(idbuf), "p%06zu", i);
            nlohmann::ordered_json pj;
            pj["post_id"] = idbuf;
            pj["created_at"] = 1600000000 + static_cast<std::int64_t>(i) * 60;
            pj["title"] = posts[i].title;
            pf << pj.dump() << "\n";

            nlohmann::ordered_json aj;
            aj["post_id"] = idbuf;
            aj["spans"] = nlohmann::ordered_json::array();
            for (const auto& [s, e] : posts[i].spans) {
                aj["spans"].push_back({{"start", s}, {"end", e}});
            }
            af << aj.dump() << "\n";
        }
    }

    // --- lexicon -----------------------------------------------------------
    {
        lexicon::LexiconConfig lex;
        lex.exclude_list.insert("chiraq");
        lex.tag_exclude_list.insert("video");
        for (int s = 0; s < cfg.n_sets; ++s) {
            lex.tag_alias_map["s" + two_digits(s)] = set_ids[static_cast<std::size_t>(s)];
        }
        for (const char* w : {"the", "and", "a", "an", "in", "on", "with", "at",
                              "of", "for", "to", "from", "is", "up", "out"}) {
            lex.stopwords.insert(w);
        }
        lexicon::save_lexicon(lex, path("lexicon.json"));
    }

    // --- geojson layers ------------------------------------------------------
    {
        geo::FeatureCollection sets_fc;
        for (int s = 0; s < cfg.n_sets; ++s) {
            const double gx = static_cast<double>(s % side);
            const double gy = static_cast<double>(s / side);
            const double x0 = cfg.grid_origin_lon + (gx + 0.1) * cfg.block_deg;
            const double y0 = cfg.grid_origin_lat + (gy + 0.1) * cfg.block_deg;
            const double w = 0.8 * cfg.block_deg;
            geo::Feature f;
            f.id = set_ids[static_cast<std::size_t>(s)];
            f.properties["set_id"] = f.id;
            f.properties["nation_id"] = truth.nation_of_set[f.id];
            f.shape.polygons.push_back(
                {{{{x0, y0}, {x0 + w, y0}, {x0 + w, y0 + w}, {x0, y0 + w}}}});
            sets_fc.features.push_back(std::move(f));
        }
        geo::save_feature_collection(path("sets.geojson"), sets_fc);

        geo::FeatureCollection beats_fc;
        const int bside = (side + 1) / 2;
        for (int by = 0; by < bside; ++by) {
            for (int bx = 0; bx < bside; ++bx) {
                const double x0 = cfg.grid_origin_lon + 2.0 * bx * cfg.block_deg;
                const double y0 = cfg.grid_origin_lat + 2.0 * by * cfg.block_deg;
                const double w = 2.0 * cfg.block_deg;
                geo::Feature f;
                f.id = "beat" + two_digits(by * bside + bx);
                f.properties["beat_id"] = f.id;
                f.shape.polygons.push_back(
                    {{{{x0, y0}, {x0 + w, y0}, {x0 + w, y0 + w}, {x0, y0 + w}}}});
                beats_fc.features.push_back(std::move(f));
            }
        }
        geo::save_feature_collection(path("beats.geojson"), beats_fc);
    }

    // --- arrests ----------------------------------------------------------
    {
        std::ofstream out(path("arrests.csv"));
        if (!out) throw Error(ErrorKind::IoError, "cannot write arrests.csv");
        csv::write_row(out, {"person_id", "set_id", "beat_id"});
        const int bside = (side + 1) / 2;
        const int n_beats = bside * bside;
        for (int s = 0; s < cfg.n_sets; ++s) {
            const int gx = s % side;
            const int gy = s / side;
            const int modal = (gy / 2) * bside + (gx / 2);
            int arrest_no = 0;
            for (int k = 0; k < 6; ++k) {
                out << "arr_" << set_ids[static_cast<std::size_t>(s)] << "_" << arrest_no++ << ","
                    << set_ids[static_cast<std::size_t>(s)] << ",beat" << two_digits(modal) << "\n";
            }
            if (n_beats > 1) {
                for (int k = 0; k < 2; ++k) {
                    int other = static_cast<int>(rng.uniform_int(
                        static_cast<std::uint64_t>(n_beats - 1)));
                    if (other >= modal) ++other;
                    out << "arr_" << set_ids[static_cast<std::size_t>(s)] << "_" << arrest_no++
                        << "," << set_ids[static_cast<std::size_t>(s)] << ",beat"
                        << two_digits(other) << "\n";
                }
            }
        }
    }

    // --- mortality table ----------------------------------------------------
    {
        std::ofstream out(path("mortality.csv"));
        if (!out) throw Error(ErrorKind::IoError, "cannot write mortality.csv");
        csv::write_row(out, {"alias", "set_id", "government_name", "source_url"});
        for (const Person& p : persons) {
            if (truth.deceased.find(p.alias_key) == truth.deceased.end()) continue;
            csv::write_row(out, {p.surface_space, set_ids[static_cast<std::size_t>(p.set_index)],
                                 "gov" + two_digits(p.id),
                                 "https://example.test/obit/" + std::to_string(p.id)});
        }
    }

    // --- allowlist ------------------------------------------------------------
    {
        std::ofstream out(path("allowlist.csv"));
        if (!out) throw Error(ErrorKind::IoError, "cannot write allowlist.csv");
        csv::write_row(out, {"set_id", "nation_id"});
        for (int s = 0; s < cfg.n_sets; ++s) {
            csv::write_row(out, {set_ids[static_cast<std::size_t>(s)],
                                 truth.nation_of_set[set_ids[static_cast<std::size_t>(s)]]});
        }
    }

    save_ground_truth(truth, path("ground_truth.json"));
    return truth;
}

void save_ground_truth(const GroundTruth& truth, const std::string& path) {
    nlohmann::ordered_json j;
    j["beta_star"] = truth.beta_star;
    j["alpha"] = truth.alpha;
    nlohmann::ordered_json aff;
    for (const auto& [alias, set] : truth.affiliation) aff[alias] = set;
    j["affiliation"] = aff;
    nlohmann::ordered_json sf;
    for (const auto& [alias, forms] : truth.surface_forms) sf[alias] = forms;
    j["surface_forms"] = sf;
    nlohmann::ordered_json nations;
    for (const auto& [set, nation] : truth.nation_of_set) nations[set] = nation;
    j["nation_of_set"] = nations;
    nlohmann::ordered_json edges = nlohmann::ordered_json::array();
    for (const auto& [pair, w] : truth.edges) {
        edges.push_back({pair.first, pair.second, w});
    }
    j["edges"] = edges;
    j["anchors"] = truth.anchors;
    j["deceased"] = truth.deceased;
    nlohmann::ordered_json shares;
    for (const auto& [alias, x] : truth.anchor_share) shares[alias] = x;
    j["anchor_share"] = shares;
    nlohmann::ordered_json cfg;
    cfg["n_sets"] = truth.config.n_sets;
    cfg["n_nations"] = truth.config.n_nations;
    cfg["persons_per_set"] = truth.config.persons_per_set;
    cfg["tagged_posts_per_person"] = truth.config.tagged_posts_per_person;
    cfg["tag_noise_rate"] = truth.config.tag_noise_rate;
    cfg["p_in"] = truth.config.p_in;
    cfg["p_between_base"] = truth.config.p_between_base;
    cfg["lambda_m"] = truth.config.lambda_m;
    cfg["anchor_rate"] = truth.config.anchor_rate;
    cfg["wave_base_rate"] = truth.config.wave_base_rate;
    cfg["beta_star"] = truth.config.beta_star;
    cfg["seed"] = truth.config.seed;
    j["config"] = cfg;

    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
    out << j.dump(2) << "\n";
}

GroundTruth load_ground_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::MalformedRecord, path + ": " + e.what());
    }
    GroundTruth truth;
    truth.beta_star = j.at("beta_star").get<double>();
    truth.alpha = j.at("alpha").get<double>();
    for (const auto& [k, v] : j.at("affiliation").items()) {
        truth.affiliation[k] = v.get<std::string>();
    }
    if (j.contains("surface_forms")) {
        for (const auto& [k, v] : j["surface_forms"].items()) {
            truth.surface_forms[k] = v.get<std::vector<std::string>>();
        }
    }
    for (const auto& [k, v] : j.at("nation_of_set").items()) {
        truth.nation_of_set[k] = v.get<std::string>();
    }
    for (const auto& e : j.at("edges")) {
        truth.edges[{e[0].get<std::string>(), e[1].get<std::string>()}] = e[2].get<std::int64_t>();
    }
    for (const auto& a : j.at("anchors")) truth.anchors.insert(a.get<std::string>());
    for (const auto& a : j.at("deceased")) truth.deceased.insert(a.get<std::string>());
    for (const auto& [k, v] : j.at("anchor_share").items()) {
        truth.anchor_share[k] = v.get<double>();
    }
    if (j.contains("config")) {
        const auto& c = j["config"];
        truth.config.n_sets = c.value("n_sets", truth.config.n_sets);
        truth.config.n_nations = c.value("n_nations", truth.config.n_nations);
        truth.config.persons_per_set = c.value("persons_per_set", truth.config.persons_per_set);
        truth.config.tagged_posts_per_person =
            c.value("tagged_posts_per_person", truth.config.tagged_posts_per_person);
        truth.config.tag_noise_rate = c.value("tag_noise_rate", truth.config.tag_noise_rate);
        truth.config.seed = c.value("seed", truth.config.seed);
    }
    return truth;
}

RecoveryReport score_recovery(const GroundTruth& truth, const affiliation::Roster& roster,
                              const std::vector<int>& community_of_member,
                              const stats::PearsonResult* geo_corr) {
    RecoveryReport rep;
    rep.persons = truth.affiliation.size();
    rep.beta_star = truth.beta_star;

    // Affiliation precision/recall against the planted truth.
    for (const auto& member : roster.members) {
        auto it = truth.affiliation.find(member.alias_key);
        if (it == truth.affiliation.end()) continue;
        ++rep.resolved;
        if (it->second == member.set_id) ++rep.correct;
    }
    if (rep.resolved > 0) {
        rep.affiliation_precision =
            static_cast<double>(rep.correct) / static_cast<double>(rep.resolved);
    }
    if (rep.persons > 0) {
        rep.affiliation_recall =
            static_cast<double>(rep.correct) / static_cast<double>(rep.persons);
    }

    // NMI of detected communities vs planted set blocks, over roster members.
    if (community_of_member.size() == roster.members.size() && !roster.members.empty()) {
        std::map<std::string, int> set_code;
        std::vector<int> planted;
        std::vector<int> detected;
        for (std::size_t i = 0; i < roster.members.size(); ++i) {
            auto it = truth.affiliation.find(roster.members[i].alias_key);
            if (it == truth.affiliation.end()) continue;
            auto [code_it, inserted] = set_code.emplace(it->second,
                                                        static_cast<int>(set_code.size()));
            (void)inserted;
            planted.push_back(code_it->second);
            detected.push_back(community_of_member[i]);
        }
        if (!planted.empty()) {
            rep.community_nmi = community::normalized_mutual_information(planted, detected);
        }
    }

    // Coefficient recovery: the wave outcome against the z-scored anchor
    // share over the non-anchor population (the planted generating model).
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& [alias, set] : truth.affiliation) {
        (void)set;
        if (truth.anchors.count(alias)) continue;
        xs.push_back(truth.anchor_share.at(alias));
        ys.push_back(truth.deceased.count(alias) ? 1.0 : 0.0);
    }
    const double mx = stats::mean(xs);
    const double sx = stats::population_sd(xs);
    if (sx > 0.0 && xs.size() >= 10) {
        Eigen::MatrixXd X(static_cast<Eigen::Index>(xs.size()), 2);
        Eigen::VectorXd y(static_cast<Eigen::Index>(xs.size()));
        for (std::size_t i = 0; i < xs.size(); ++i) {
            X(static_cast<Eigen::Index>(i), 0) = 1.0;
            X(static_cast<Eigen::Index>(i), 1) = (xs[i] - mx) / sx;
            y[static_cast<Eigen::Index>(i)] = ys[i];
        }
        try {
            const logistic::LogisticFit fit = logistic::fit_logistic(y, X);
            rep.beta_hat = fit.beta[1];
            rep.beta_se = fit.se[1];
            rep.beta_ci_covers = std::abs(rep.beta_hat - truth.beta_star) <= 1.96 * rep.beta_se;
        } catch (const Error&) {
            // Degenerate draw (e.g. all-alive wave); leave the defaults.
        }
    }

    if (geo_corr) {
        rep.have_geo = true;
        rep.distance_comention_r = geo_corr->r;
        rep.distance_comention_p = geo_corr->p_value;
        rep.negative_correlation = geo_corr->r < 0.0;
    }
    return rep;
}

void save_recovery_report(const RecoveryReport& report, const std::string& path) {
    nlohmann::ordered_json j;
    j["persons"] = report.persons;
    j["resolved"] = report.resolved;
    j["correct"] = report.correct;
    j["affiliation_precision"] = report.affiliation_precision;
    j["affiliation_recall"] = report.affiliation_recall;
    j["community_nmi"] = report.community_nmi;
    j["beta_hat"] = report.beta_hat;
    j["beta_se"] = report.beta_se;
    j["beta_star"] = report.beta_star;
    j["beta_ci_covers"] = report.beta_ci_covers;
    if (report.have_geo) {
        j["distance_comention_r"] = report.distance_comention_r;
        j["distance_comention_p"] = report.distance_comention_p;
        j["negative_correlation"] = report.negative_correlation;
    }
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
    out << j.dump(2) << "\n";
}

} // namespace comet::synth
