// polemb: retweet-graph political leaning pipeline.
//
// Subcommands cover each stage (synth, ingest, embed, reduce, eval, plot,
// stats) plus an end-to-end driver (pipeline). Settings resolve in three
// layers: command-line flag > config file key > built-in default. Every
// artifact-producing run writes a manifest with input/output digests.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>

#include "polemb/common.hpp"
#include "polemb/config.hpp"
#include "polemb/embedding.hpp"
#include "polemb/eval.hpp"
#include "polemb/forceatlas2.hpp"
#include "polemb/graph.hpp"
#include "polemb/labels.hpp"
#include "polemb/manifest.hpp"
#include "polemb/metrics.hpp"
#include "polemb/model_io.hpp"
#include "polemb/pca.hpp"
#include "polemb/relational.hpp"
#include "polemb/skipgram.hpp"
#include "polemb/svg.hpp"
#include "polemb/synth.hpp"
#include "polemb/tsne.hpp"
#include "polemb/walks.hpp"

namespace fs = std::filesystem;
using namespace polemb;

namespace {

void warnln(const std::string& msg) { std::cerr << "warning: " << msg << "\n"; }
void noteln(const std::string& msg) { std::cerr << msg << "\n"; }

int env_threads() {
    const char* v = std::getenv("POLEMB_THREADS");
    if (!v || !*v) return 1;
    std::uint64_t n;
    if (!parse_u64(std::string_view(v), n) || n < 1) {
        warnln("ignoring POLEMB_THREADS='" + std::string(v) + "' (want a positive integer)");
        return 1;
    }
    return static_cast<int>(std::min<std::uint64_t>(n, 256));
}

struct GlobalOpts {
    std::uint64_t seed = 42;
    int threads = 1;
    bool deterministic = false;
    std::string config_path;
    Config cfg;  // empty when no --config
    std::vector<std::string> argv;
};

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        if (eol > pos) out.push_back(text.substr(pos, eol - pos));
        pos = eol + 1;
    }
    return out;
}

RunManifest new_manifest(const GlobalOpts& g, const std::string& command) {
    RunManifest m;
    m.command = command;
    m.args = g.argv;
    m.seed = g.seed;
    m.deterministic = g.deterministic;
    m.threads = g.threads;
    if (!g.config_path.empty()) m.config = split_lines(g.cfg.snapshot());
    return m;
}

// Flag > config > default. The bound CLI variable already holds the default
// when the flag was not given, so the config lookup falls back to it.
struct Resolver {
    const CLI::App* sub = nullptr;  // null when driven purely by config
    const Config* cfg = nullptr;
    std::string section;

    bool from_flag(const char* flag) const { return sub && flag && sub->count(flag) > 0; }
    std::string key(const char* name) const { return section + "." + name; }

    long long geti(const char* flag, long long v, const char* name) const {
        if (from_flag(flag)) return v;
        return cfg ? cfg->get_int(key(name), v) : v;
    }
    std::uint64_t getu(const char* flag, std::uint64_t v, const char* name) const {
        if (from_flag(flag)) return v;
        return cfg ? cfg->get_uint(key(name), v) : v;
    }
    double getd(const char* flag, double v, const char* name) const {
        if (from_flag(flag)) return v;
        return cfg ? cfg->get_double(key(name), v) : v;
    }
    bool getb(const char* flag, bool v, const char* name) const {
        if (from_flag(flag)) return v;
        return cfg ? cfg->get_bool(key(name), v) : v;
    }
    std::string gets(const char* flag, std::string v, const char* name) const {
        if (from_flag(flag)) return v;
        return cfg ? cfg->get_string(key(name), v) : v;
    }
    bool has(const char* name) const { return cfg && cfg->has(key(name)); }
};

std::string pick_region(const LabelSet& labels, const std::string& requested) {
    const auto& regions = labels.regions();
    if (regions.empty()) throw DataError("label set has no regions");
    if (requested.empty()) {
        if (regions.size() == 1) return regions.front();
        std::string all;
        for (const auto& r : regions) all += (all.empty() ? "" : ", ") + r;
        throw ConfigError("label set covers several regions (" + all + "); pass --region");
    }
    for (const auto& r : regions)
        if (r == requested) return r;
    std::string all;
    for (const auto& r : regions) all += (all.empty() ? "" : ", ") + r;
    throw DataError("unknown region '" + requested + "'; label set has: " + all);
}

std::string export_region_labels(const LabelSet& ls, const std::string& region) {
    std::string out;
    const auto& parties = ls.parties(region);
    for (UserId u : ls.users_in(region)) {
        const auto lab = *ls.label(u);
        out += std::to_string(u);
        out += '\t';
        out += region;
        out += '\t';
        out += parties[lab.party].name;
        out += '\t';
        out += tier_name(lab.tier);
        out += '\n';
    }
    return out;
}

std::string export_region_catalog(const LabelSet& ls, const std::string& region) {
    std::string out;
    for (const auto& p : ls.parties(region)) {
        out += region;
        out += '\t';
        out += p.name;
        out += '\t';
        out += p.color;
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------- synth ----

SynthConfig synth_from_config(const Config& cfg, std::uint64_t seed, const std::string& preset_flag) {
    std::string preset = preset_flag.empty() ? cfg.get_string("synth.preset", "") : preset_flag;
    auto region_secs = cfg.sections_with_prefix("synth.region.");
    if (!preset.empty()) {
        if (preset != "uk-like")
            throw ConfigError("unknown synth preset '" + preset + "'; available: uk-like");
        if (!region_secs.empty())
            throw ConfigError("config mixes synth.preset with explicit synth.region sections");
        return uk_like_preset(seed);
    }
    if (region_secs.empty()) return uk_like_preset(seed);

    SynthConfig sc;
    sc.seed = seed;
    const std::string prefix = "synth.region.";
    for (const auto& sec : region_secs) {
        RegionSpec r;
        r.name = sec.substr(prefix.size());
        r.parties = static_cast<int>(cfg.get_int(sec + ".parties", r.parties));
        r.members.per_party = static_cast<int>(cfg.get_int(sec + ".members", r.members.per_party));
        r.members.mu = cfg.get_double(sec + ".mu_member", r.members.mu);
        r.supporters.per_party =
            static_cast<int>(cfg.get_int(sec + ".supporters", r.supporters.per_party));
        r.supporters.mu = cfg.get_double(sec + ".mu_supporter", r.supporters.mu);
        r.sympathizers.per_party =
            static_cast<int>(cfg.get_int(sec + ".sympathizers", r.sympathizers.per_party));
        r.sympathizers.mu = cfg.get_double(sec + ".mu_sympathizer", r.sympathizers.mu);
        r.interacting = static_cast<int>(cfg.get_int(sec + ".interacting", r.interacting));
        r.interacting_mu = cfg.get_double(sec + ".mu_interacting", r.interacting_mu);
        r.mean_retweets = cfg.get_double(sec + ".retweets_per_user", r.mean_retweets);
        r.activity_sigma = cfg.get_double(sec + ".activity_sigma", r.activity_sigma);
        r.hub_bias = cfg.get_double(sec + ".hub_bias", r.hub_bias);
        sc.regions.push_back(std::move(r));
    }
    return sc;
}

struct RegionFiles {
    std::string name;
    std::string edges, labels, catalog;  // paths
    std::size_t users = 0, edges_n = 0;
    std::uint64_t retweets = 0;
};

// One subdirectory per region: edges.tsv (canonical aggregated form),
// labels.tsv, catalog.tsv.
std::vector<RegionFiles> write_synth_outputs(const SynthResult& data, const std::string& out_dir,
                                             RunManifest& man) {
    std::vector<RegionFiles> out;
    for (const auto& region : data.regions) {
        fs::path dir = fs::path(out_dir) / region.name;
        fs::create_directories(dir);
        auto graph = InteractionGraph::from_edges(region.edges);
        RegionFiles rf;
        rf.name = region.name;
        rf.edges = (dir / "edges.tsv").string();
        rf.labels = (dir / "labels.tsv").string();
        rf.catalog = (dir / "catalog.tsv").string();
        rf.users = graph.node_count();
        rf.edges_n = graph.edge_count();
        rf.retweets = graph.total_retweets();
        export_edges_file(graph, rf.edges);
        write_file(rf.labels, export_region_labels(data.labels, region.name));
        write_file(rf.catalog, export_region_catalog(data.labels, region.name));
        man.add_output(rf.edges);
        man.add_output(rf.labels);
        man.add_output(rf.catalog);
        out.push_back(std::move(rf));
    }
    return out;
}

void run_synth(const GlobalOpts& g, const std::string& preset, const std::string& out_dir) {
    StageTimer t;
    SynthConfig sc = synth_from_config(g.cfg, g.seed, preset);
    SynthResult data = generate_synthetic(sc);
    const double gen_ms = t.elapsed_ms();

    fs::create_directories(out_dir);
    RunManifest man = new_manifest(g, "synth");
    if (!g.config_path.empty()) man.add_input(g.config_path);
    t.reset();
    auto regions = write_synth_outputs(data, out_dir, man);
    man.add_timing("generate", gen_ms);
    man.add_timing("write", t.elapsed_ms());
    nlohmann::ordered_json regs = nlohmann::ordered_json::array();
    for (const auto& r : regions) {
        nlohmann::ordered_json jr;
        jr["name"] = r.name;
        jr["users"] = r.users;
        jr["edges"] = r.edges_n;
        jr["retweets"] = r.retweets;
        regs.push_back(std::move(jr));
    }
    man.extra["regions"] = std::move(regs);
    man.write((fs::path(out_dir) / "manifest.json").string());

    for (const auto& r : regions)
        std::cout << r.name << '\t' << r.users << '\t' << r.edges_n << '\t' << r.retweets << "\n";
}

// --------------------------------------------------------------- ingest ----

void run_ingest(const GlobalOpts& g, const std::string& edges_path, const std::string& labels_path,
                const std::string& catalog_path, const std::string& out_dir) {
    StageTimer t;
    auto graph = ingest_edges(edges_path);
    fs::create_directories(out_dir);
    RunManifest man = new_manifest(g, "ingest");
    man.add_input(edges_path);

    const std::string edges_out = (fs::path(out_dir) / "edges.tsv").string();
    const std::string users_out = (fs::path(out_dir) / "users.tsv").string();
    export_edges_file(graph, edges_out);
    write_user_map(graph, users_out);
    man.add_output(edges_out);
    man.add_output(users_out);

    if (!labels_path.empty()) {
        auto labels = ingest_labels(labels_path, catalog_path);
        man.add_input(labels_path);
        if (!catalog_path.empty()) man.add_input(catalog_path);
        std::size_t absent = 0;
        for (const auto& region : labels.regions())
            for (UserId u : labels.users_in(region))
                if (!graph.index_of(u)) ++absent;
        if (absent > 0)
            warnln(std::to_string(absent) + " labeled users do not appear in the edge list");
        const std::string labels_out = (fs::path(out_dir) / "labels.tsv").string();
        const std::string catalog_out = (fs::path(out_dir) / "catalog.tsv").string();
        write_file(labels_out, export_labels(labels));
        write_file(catalog_out, export_catalog(labels));
        man.add_output(labels_out);
        man.add_output(catalog_out);
        man.extra["labeled_users"] = labels.size();
        man.extra["labeled_users_missing_from_graph"] = absent;
    }
    if (graph.self_loop_count() > 0)
        noteln("note: " + std::to_string(graph.self_loop_count()) + " self-retweet edges kept");

    man.extra["users"] = graph.node_count();
    man.extra["edges"] = graph.edge_count();
    man.extra["retweets"] = graph.total_retweets();
    man.add_timing("ingest", t.elapsed_ms());
    man.write((fs::path(out_dir) / "manifest.json").string());
    std::cout << graph.node_count() << '\t' << graph.edge_count() << '\t'
              << graph.total_retweets() << "\n";
}

// ---------------------------------------------------------------- embed ----

struct EmbedSettings {
    std::string method = "re";
    int dim = 20;
    int negatives = 5;
    int epochs = -1;  // method default: 5 for re, 1 for walk methods
    double lr = 0.025;
    double min_lr = 1e-4;
    double ns_power = 0.75;
    int walks = 10;
    int walk_length = 80;
    int window = 10;
    double p = 1.0;
    double q = 0.5;  // node2vec default; deepwalk pins p = q = 1
    bool share_tables = false, concat = false, dedup = false;
    int fa2_iterations = 1000;
    double fa2_scaling = 2.0, fa2_gravity = 1.0, fa2_theta = 1.2;
    bool fa2_linlog = false, fa2_strong_gravity = false;
    std::optional<bool> fa2_barnes_hut;
    std::uint64_t seed = 42;
    int threads = 1;
};

EmbeddingMatrix compute_embedding(const InteractionGraph& g, const EmbedSettings& s) {
    if (g.node_count() == 0) throw DataError("graph is empty; nothing to embed");
    if (s.method == "re") {
        RelationalConfig rc;
        rc.dim = s.dim;
        rc.negatives = s.negatives;
        rc.epochs = s.epochs < 0 ? 5 : s.epochs;
        rc.lr = s.lr;
        rc.min_lr = s.min_lr;
        rc.share_tables = s.share_tables;
        rc.concat = s.concat;
        rc.dedup = s.dedup;
        rc.seed = s.seed;
        auto model = train_relational(g, rc);
        EmbeddingMatrix m(s.concat ? 2 * s.dim : s.dim, "re", s.seed);
        m.reserve(g.node_count());
        for (NodeIndex i = 0; i < g.node_count(); ++i) {
            auto v = s.concat ? relational_user_vector_concat(model, i)
                              : relational_user_vector(model, g, i);
            m.add_row(g.user_at(i), v);
        }
        m.set_extra("epochs", std::to_string(rc.epochs));
        m.set_extra("negatives", std::to_string(rc.negatives));
        if (rc.share_tables) m.set_extra("tables", "shared");
        if (rc.concat) m.set_extra("tables", "concat");
        return m;
    }
    if (s.method == "deepwalk" || s.method == "node2vec") {
        WalkConfig wc;
        wc.walks_per_node = s.walks;
        wc.walk_length = s.walk_length;
        wc.window = s.window;
        wc.p = s.method == "deepwalk" ? 1.0 : s.p;
        wc.q = s.method == "deepwalk" ? 1.0 : s.q;
        wc.seed = s.seed;
        wc.threads = s.threads;
        auto corpus = generate_walks(g, wc);
        SkipgramConfig sc;
        sc.dim = s.dim;
        sc.window = s.window;
        sc.negatives = s.negatives;
        sc.epochs = s.epochs < 0 ? 1 : s.epochs;
        sc.lr = s.lr;
        sc.min_lr = s.min_lr;
        sc.seed = s.seed;
        sc.threads = s.threads;
        auto model = train_skipgram(corpus, g.node_count(), sc);
        // p = q = 1 is exactly the unbiased walk, whatever the flag said.
        const char* tag = (wc.p == 1.0 && wc.q == 1.0) ? "deepwalk" : "node2vec";
        EmbeddingMatrix m(s.dim, tag, s.seed);
        m.reserve(g.node_count());
        for (NodeIndex i = 0; i < g.node_count(); ++i) m.add_row(g.user_at(i), model.in_row(i));
        m.set_extra("walks", std::to_string(wc.walks_per_node));
        m.set_extra("walk_length", std::to_string(wc.walk_length));
        m.set_extra("window", std::to_string(wc.window));
        m.set_extra("p", format_double(wc.p));
        m.set_extra("q", format_double(wc.q));
        m.set_extra("negatives", std::to_string(sc.negatives));
        m.set_extra("epochs", std::to_string(sc.epochs));
        return m;
    }
    if (s.method == "fa2") {
        Fa2Config fc;
        fc.iterations = s.fa2_iterations;
        fc.scaling = s.fa2_scaling;
        fc.gravity = s.fa2_gravity;
        fc.theta = s.fa2_theta;
        fc.linlog = s.fa2_linlog;
        fc.strong_gravity = s.fa2_strong_gravity;
        fc.barnes_hut = s.fa2_barnes_hut;
        fc.seed = s.seed;
        fc.threads = s.threads;
        std::vector<std::string> warns;
        auto m = fa2_layout(g, fc, nullptr, &warns);
        for (const auto& w : warns) warnln(w);
        m.set_extra("iterations", std::to_string(fc.iterations));
        return m;
    }
    throw ConfigError("unknown method '" + s.method +
                      "'; valid methods: re, deepwalk, node2vec, fa2");
}

EmbedSettings embed_settings_from(const Resolver& r, const EmbedSettings& cli) {
    EmbedSettings s = cli;
    s.method = r.gets("--method", cli.method, "method");
    s.dim = static_cast<int>(r.geti("--dim", cli.dim, "dim"));
    s.negatives = static_cast<int>(r.geti("--negatives", cli.negatives, "negatives"));
    s.epochs = static_cast<int>(r.geti("--epochs", cli.epochs, "epochs"));
    s.lr = r.getd("--lr", cli.lr, "lr");
    s.min_lr = r.getd("--min-lr", cli.min_lr, "min_lr");
    s.walks = static_cast<int>(r.geti("--walks", cli.walks, "walks"));
    s.walk_length = static_cast<int>(r.geti("--walk-length", cli.walk_length, "walk_length"));
    s.window = static_cast<int>(r.geti("--window", cli.window, "window"));
    s.p = r.getd("--p", cli.p, "p");
    s.q = r.getd("--q", cli.q, "q");
    s.share_tables = r.getb("--share-tables", cli.share_tables, "share_tables");
    s.concat = r.getb("--concat", cli.concat, "concat");
    s.dedup = r.getb("--dedup", cli.dedup, "dedup");
    s.fa2_iterations = static_cast<int>(r.geti("--iterations", cli.fa2_iterations, "iterations"));
    s.fa2_scaling = r.getd("--scaling", cli.fa2_scaling, "scaling");
    s.fa2_gravity = r.getd("--gravity", cli.fa2_gravity, "gravity");
    s.fa2_theta = r.getd("--theta", cli.fa2_theta, "theta");
    s.fa2_linlog = r.getb("--linlog", cli.fa2_linlog, "linlog");
    s.fa2_strong_gravity = r.getb("--strong-gravity", cli.fa2_strong_gravity, "strong_gravity");
    if (r.from_flag("--barnes-hut")) {
        s.fa2_barnes_hut = cli.fa2_barnes_hut;
    } else if (r.has("barnes_hut")) {
        s.fa2_barnes_hut = r.getb(nullptr, false, "barnes_hut");
    }
    return s;
}

nlohmann::ordered_json embed_settings_json(const EmbedSettings& s) {
    nlohmann::ordered_json j;
    j["method"] = s.method;
    j["dim"] = s.dim;
    if (s.method == "fa2") {
        j["iterations"] = s.fa2_iterations;
        j["scaling"] = s.fa2_scaling;
        j["gravity"] = s.fa2_gravity;
        j["theta"] = s.fa2_theta;
        j["linlog"] = s.fa2_linlog;
        j["strong_gravity"] = s.fa2_strong_gravity;
        if (s.fa2_barnes_hut) j["barnes_hut"] = *s.fa2_barnes_hut;
    } else {
        j["negatives"] = s.negatives;
        j["epochs"] = s.epochs < 0 ? (s.method == "re" ? 5 : 1) : s.epochs;
        j["lr"] = s.lr;
        if (s.method != "re") {
            j["walks"] = s.walks;
            j["walk_length"] = s.walk_length;
            j["window"] = s.window;
            j["p"] = s.method == "deepwalk" ? 1.0 : s.p;
            j["q"] = s.method == "deepwalk" ? 1.0 : s.q;
        } else {
            j["share_tables"] = s.share_tables;
            j["concat"] = s.concat;
            j["dedup"] = s.dedup;
        }
    }
    return j;
}

void run_embed(const GlobalOpts& g, const EmbedSettings& s, const std::string& edges_path,
               const std::string& out_path) {
    StageTimer t;
    auto graph = ingest_edges(edges_path);
    const double ingest_ms = t.elapsed_ms();
    t.reset();
    auto emb = compute_embedding(graph, s);
    const double train_ms = t.elapsed_ms();

    if (auto parent = fs::path(out_path).parent_path(); !parent.empty())
        fs::create_directories(parent);
    save_embedding(emb, out_path);

    RunManifest man = new_manifest(g, "embed");
    if (!g.config_path.empty()) man.add_input(g.config_path);
    man.add_input(edges_path);
    man.add_output(out_path);
    man.add_timing("ingest", ingest_ms);
    man.add_timing("train", train_ms);
    man.extra["settings"] = embed_settings_json(s);
    man.extra["users"] = graph.node_count();
    man.write(out_path + ".manifest.json");
    noteln("embed: method=" + emb.method() + " users=" + std::to_string(emb.size()) +
           " dim=" + std::to_string(emb.dim()) + " (" + std::to_string(static_cast<long long>(train_ms)) + " ms)");
}

// --------------------------------------------------------------- reduce ----

struct ReduceSettings {
    std::string method = "tsne";
    int dim = 2;
    double perplexity = 30.0;
    int iterations = 1000;
    double learning_rate = 200.0;
    std::uint64_t seed = 42;
};

ReduceSettings reduce_settings_from(const Resolver& r, const ReduceSettings& cli) {
    ReduceSettings s = cli;
    s.method = r.gets("--method", cli.method, "method");
    s.dim = static_cast<int>(r.geti("--dim", cli.dim, "dim"));
    s.perplexity = r.getd("--perplexity", cli.perplexity, "perplexity");
    s.iterations = static_cast<int>(r.geti("--iterations", cli.iterations, "iterations"));
    s.learning_rate = r.getd("--learning-rate", cli.learning_rate, "learning_rate");
    return s;
}

EmbeddingMatrix compute_reduction(const EmbeddingMatrix& src, const ReduceSettings& s) {
    if (src.size() == 0) throw DataError("embedding is empty; nothing to reduce");
    const std::size_t n = src.size();
    const std::size_t d = static_cast<std::size_t>(src.dim());
    std::vector<double> out_rows;
    std::string tag;
    if (s.method == "pca") {
        auto model = pca_fit(src.data(), n, d, static_cast<std::size_t>(s.dim));
        for (const auto& w : model.warnings) warnln(w);
        out_rows = pca_transform(model, src.data(), n);
        tag = "pca";
    } else if (s.method == "tsne") {
        TsneConfig tc;
        tc.out_dim = static_cast<std::size_t>(s.dim);
        tc.perplexity = s.perplexity;
        tc.iterations = s.iterations;
        tc.learning_rate = s.learning_rate;
        tc.seed = s.seed;
        auto res = tsne(src.data(), n, d, tc);
        for (const auto& w : res.warnings) warnln(w);
        out_rows = std::move(res.y);
        tag = "tsne";
    } else {
        throw ConfigError("unknown reduction '" + s.method + "'; valid methods: pca, tsne");
    }
    EmbeddingMatrix out(s.dim, tag, s.seed);
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        out.add_row(src.ids()[i], {out_rows.data() + i * static_cast<std::size_t>(s.dim),
                                   static_cast<std::size_t>(s.dim)});
    return out;
}

void run_reduce(const GlobalOpts& g, const ReduceSettings& s, const std::string& in_path,
                const std::string& labels_path, const std::string& catalog_path,
                const std::string& region_flag, const std::string& tier_flag,
                const std::string& out_path) {
    StageTimer t;
    auto src = load_embedding(in_path);
    const std::string parent_digest = to_hex16(fnv1a64_file(in_path));

    std::optional<LabelSet> labels;
    if (!labels_path.empty()) {
        labels = ingest_labels(labels_path, catalog_path);
        const std::string region = pick_region(*labels, region_flag);
        std::optional<Tier> tier;
        if (!tier_flag.empty() && tier_flag != "all") {
            tier = parse_tier(tier_flag);
            if (!tier)
                throw ConfigError("unknown tier '" + tier_flag +
                                  "'; valid: member, supporter, sympathizer, all");
        }
        auto keep = labels->users_in(region, tier);
        if (keep.empty()) throw DataError("no labeled users to keep in region " + region);
        std::vector<UserId> missing;
        src = subset_embedding(src, keep, &missing);
        if (!missing.empty())
            warnln(std::to_string(missing.size()) + " labeled users lack embedding vectors");
        if (src.size() == 0) throw DataError("selected users have no embedding vectors");
    } else if (!region_flag.empty() || !tier_flag.empty()) {
        throw ConfigError("--region/--tier filtering requires --labels");
    }

    const double load_ms = t.elapsed_ms();
    t.reset();
    auto out = compute_reduction(src, s);
    out.set_extra("parent", parent_digest);
    out.set_extra("parent_method", src.method());
    const double reduce_ms = t.elapsed_ms();

    if (auto parent = fs::path(out_path).parent_path(); !parent.empty())
        fs::create_directories(parent);
    save_embedding(out, out_path);

    RunManifest man = new_manifest(g, "reduce");
    if (!g.config_path.empty()) man.add_input(g.config_path);
    man.add_input(in_path);
    if (!labels_path.empty()) man.add_input(labels_path);
    if (!catalog_path.empty()) man.add_input(catalog_path);
    man.add_output(out_path);
    man.add_timing("load", load_ms);
    man.add_timing("reduce", reduce_ms);
    nlohmann::ordered_json js;
    js["method"] = s.method;
    js["dim"] = s.dim;
    if (s.method == "tsne") {
        js["perplexity"] = s.perplexity;
        js["iterations"] = s.iterations;
        js["learning_rate"] = s.learning_rate;
    }
    js["rows"] = out.size();
    man.extra["settings"] = std::move(js);
    man.write(out_path + ".manifest.json");
    noteln("reduce: method=" + s.method + " rows=" + std::to_string(out.size()) + " (" +
           std::to_string(static_cast<long long>(reduce_ms)) + " ms)");
}

// ----------------------------------------------------------------- eval ----

struct Scenario {
    enum Kind { Loo, Kshot, CrossTier } kind = Loo;
    int k = 0;
    Tier tier = Tier::Supporter;
    std::string text;
};

Scenario parse_scenario(const std::string& s) {
    Scenario sc;
    sc.text = s;
    if (s == "loo") {
        sc.kind = Scenario::Loo;
        return sc;
    }
    if (s.rfind("kshot:", 0) == 0) {
        std::int64_t k;
        if (!parse_i64(s.substr(6), k) || k < 1)
            throw ConfigError("bad scenario '" + s + "'; kshot wants a positive k, e.g. kshot:3");
        sc.kind = Scenario::Kshot;
        sc.k = static_cast<int>(k);
        return sc;
    }
    if (s.rfind("tier:", 0) == 0) {
        auto t = parse_tier(s.substr(5));
        if (!t || *t == Tier::Member)
            throw ConfigError("bad scenario '" + s + "'; tier tests supporter or sympathizer");
        sc.kind = Scenario::CrossTier;
        sc.tier = *t;
        return sc;
    }
    throw ConfigError("unknown scenario '" + s +
                      "'; valid: loo, kshot:<k>, tier:supporter, tier:sympathizer");
}

struct EvalSettings {
    std::string scenario = "loo";
    std::string classifier = "logreg";
    int reps = 20;
    double l2 = 1.0;
    int max_iter = 200;
    double var_smoothing = 1e-9;
    double svm_c = 1.0;
    int svm_epochs = 50;
    int trees = 100;
    int max_depth = -1;
    int mtry = 0;
    std::string compare_path;
    int resamples = 10000;
    std::uint64_t seed = 42;
};

EvalSettings eval_settings_from(const Resolver& r, const EvalSettings& cli) {
    EvalSettings s = cli;
    s.scenario = r.gets("--scenario", cli.scenario, "scenario");
    s.classifier = r.gets("--classifier", cli.classifier, "classifier");
    s.reps = static_cast<int>(r.geti("--reps", cli.reps, "reps"));
    s.l2 = r.getd("--l2", cli.l2, "l2");
    s.max_iter = static_cast<int>(r.geti("--max-iter", cli.max_iter, "max_iter"));
    s.var_smoothing = r.getd("--var-smoothing", cli.var_smoothing, "var_smoothing");
    s.svm_c = r.getd("--svm-c", cli.svm_c, "svm_c");
    s.svm_epochs = static_cast<int>(r.geti("--svm-epochs", cli.svm_epochs, "svm_epochs"));
    s.trees = static_cast<int>(r.geti("--trees", cli.trees, "trees"));
    s.max_depth = static_cast<int>(r.geti("--max-depth", cli.max_depth, "max_depth"));
    s.mtry = static_cast<int>(r.geti("--mtry", cli.mtry, "mtry"));
    s.resamples = static_cast<int>(r.geti("--resamples", cli.resamples, "resamples"));
    return s;
}

ClassifierParams classifier_params(const EvalSettings& s) {
    ClassifierParams p;
    p.kind = s.classifier;
    p.logreg.l2 = s.l2;
    p.logreg.max_iter = s.max_iter;
    p.gnb.var_smoothing = s.var_smoothing;
    p.svm.c = s.svm_c;
    p.svm.epochs = s.svm_epochs;
    p.rf.trees = s.trees;
    p.rf.max_depth = s.max_depth;
    p.rf.mtry = s.mtry;
    p.seed = s.seed;
    return p;
}

// Text and JSON report assembled together so they cannot drift apart.
struct Report {
    std::vector<std::pair<std::string, std::string>> lines;
    nlohmann::ordered_json j;

    void put(const std::string& k, const std::string& v) {
        lines.emplace_back(k, v);
        j[k] = v;
    }
    void put_num(const std::string& k, double v) {
        lines.emplace_back(k, format_double(v));
        j[k] = v;
    }
    void put_int(const std::string& k, long long v) {
        lines.emplace_back(k, std::to_string(v));
        j[k] = v;
    }
    std::string text() const {
        std::string out;
        for (const auto& [k, v] : lines) {
            out += k;
            out += " = ";
            out += v;
            out += '\n';
        }
        return out;
    }
};

void report_confusion(Report& rep, const Confusion& cm, const std::vector<std::string>& names) {
    auto f1 = per_class_f1(cm);
    for (int c = 0; c < cm.num_classes(); ++c)
        rep.put_num("f1." + names[static_cast<std::size_t>(c)], f1[static_cast<std::size_t>(c)]);
    nlohmann::ordered_json jc;
    jc["classes"] = names;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (int i = 0; i < cm.num_classes(); ++i) {
        std::string line;
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (int k = 0; k < cm.num_classes(); ++k) {
            if (k) line += ' ';
            line += std::to_string(cm.count(i, k));
            row.push_back(cm.count(i, k));
        }
        rep.lines.emplace_back("confusion." + names[static_cast<std::size_t>(i)], line);
        rows.push_back(std::move(row));
    }
    jc["rows"] = std::move(rows);
    rep.j["confusion"] = std::move(jc);
}

// A features-free dataset for the majority classifier: one zero column.
Dataset label_only_dataset(const LabelSet& labels, const std::string& region,
                           std::optional<Tier> tier, std::vector<UserId>* users_out) {
    Dataset ds;
    for (const auto& p : labels.parties(region)) ds.class_names.push_back(p.name);
    ds.num_classes = static_cast<int>(ds.class_names.size());
    const double zero = 0.0;
    for (UserId u : labels.users_in(region, tier)) {
        ds.add({&zero, 1}, static_cast<int>(labels.label(u)->party));
        if (users_out) users_out->push_back(u);
    }
    if (ds.n == 0) throw DataError("no labeled users in region " + region);
    return ds;
}

struct PredRows {
    std::vector<UserId> user;
    std::vector<std::string> gold, pred;
};

PredRows load_predictions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open predictions file: " + path);
    PredRows out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        auto cols = split_ws(sv);
        if (cols.size() != 3)
            throw DataError(path + ":" + std::to_string(lineno) +
                            ": expected 3 columns (user gold pred)");
        UserId id;
        if (!parse_u64(cols[0], id))
            throw DataError(path + ":" + std::to_string(lineno) + ": malformed user id");
        out.user.push_back(id);
        out.gold.emplace_back(cols[1]);
        out.pred.emplace_back(cols[2]);
    }
    return out;
}

struct EvalOutcome {
    double macro_f1 = 0.0;
    double accuracy = 0.0;
};

EvalOutcome run_eval_stage(const EmbeddingMatrix* emb, const LabelSet& labels,
                           const std::string& region, const EvalSettings& es,
                           const std::string& out_dir, RunManifest& man) {
    const Scenario sc = parse_scenario(es.scenario);
    ClassifierParams params = classifier_params(es);
    const bool majority = params.kind == "majority";
    if (!emb && !majority)
        throw ConfigError("classifier '" + params.kind + "' needs --embedding (only majority runs without features)");

    std::vector<UserId> member_users, missing;
    Dataset members = emb ? make_dataset(*emb, labels, region, Tier::Member, &member_users, &missing)
                          : label_only_dataset(labels, region, Tier::Member, &member_users);
    if (!missing.empty())
        warnln(std::to_string(missing.size()) +
               " member users lack embedding vectors and were excluded");

    Report rep;
    rep.put("command", "eval");
    rep.put("scenario", sc.text);
    rep.put("region", region);
    rep.put("classifier", params.kind);
    if (emb) {
        rep.put("embedding_method", emb->method());
        rep.put_int("embedding_dim", emb->dim());
    }
    rep.put_int("train_users", static_cast<long long>(members.n));
    rep.put_int("excluded_missing", static_cast<long long>(missing.size()));
    if (!missing.empty()) rep.j["missing_users"] = missing;

    const auto& names = members.class_names;
    fs::create_directories(out_dir);
    const std::string report_txt = (fs::path(out_dir) / "report.txt").string();
    const std::string report_json = (fs::path(out_dir) / "report.json").string();
    const std::string confusion_path = (fs::path(out_dir) / "confusion.svg").string();
    const std::string pred_path = (fs::path(out_dir) / "predictions.tsv").string();

    EvalOutcome outcome;
    std::vector<UserId> pred_users;  // aligned with predictions when written
    std::vector<int> gold_idx, pred_idx;
    const Confusion* cm = nullptr;
    Confusion cm_storage{1};

    StageTimer t;
    if (sc.kind == Scenario::Loo) {
        auto counts = labels.class_counts(region, Tier::Member);
        for (std::size_t c = 0; c < counts.size(); ++c)
            if (counts[c] == 1)
                noteln("note: class " + names[c] + " has a single member; its fold trains without that class");
        auto res = run_loo(members, params);
        outcome = {res.macro_f1, res.confusion.accuracy()};
        cm_storage = res.confusion;
        cm = &cm_storage;
        pred_users = member_users;
        gold_idx = members.y;
        pred_idx = res.predictions;
    } else if (sc.kind == Scenario::Kshot) {
        auto res = run_kshot(members, params, sc.k, es.reps, es.seed);
        outcome = {res.mean_macro_f1, res.mean_accuracy};
        rep.put_int("k", sc.k);
        rep.put_int("reps", res.reps);
        rep.put_num("macro_f1_sd", res.sd_macro_f1);
        rep.put_num("accuracy_sd", res.sd_accuracy);
        rep.j["rep_macro_f1"] = res.rep_macro_f1;
        rep.j["rep_accuracy"] = res.rep_accuracy;
        cm_storage = res.pooled;
        cm = &cm_storage;
    } else {
        auto tier_users_all = labels.users_in(region, sc.tier);
        if (tier_users_all.empty())
            throw DataError("region " + region + " has no " + tier_name(sc.tier) + " users");
        std::vector<UserId> test_users, test_missing;
        Dataset test = emb ? make_dataset(*emb, labels, region, sc.tier, &test_users, &test_missing)
                           : label_only_dataset(labels, region, sc.tier, &test_users);
        if (!test_missing.empty())
            warnln(std::to_string(test_missing.size()) + " " + tier_name(sc.tier) +
                   " users lack embedding vectors and were excluded");
        auto res = run_crosstier(members, test, params);
        outcome = {res.macro_f1, res.accuracy};
        rep.put("test_tier", tier_name(sc.tier));
        rep.put_int("test_users", static_cast<long long>(test.n));
        cm_storage = res.confusion;
        cm = &cm_storage;
        pred_users = test_users;
        gold_idx = test.y;
        pred_idx = res.predictions;
    }
    const double eval_ms = t.elapsed_ms();

    rep.put_num("macro_f1", outcome.macro_f1);
    rep.put_num("accuracy", outcome.accuracy);
    report_confusion(rep, *cm, names);

    // Paired bootstrap against another run's per-user predictions.
    if (!es.compare_path.empty()) {
        if (pred_idx.empty())
            throw ConfigError("--compare needs per-user predictions; use scenario loo or tier:*");
        auto other = load_predictions(es.compare_path);
        std::unordered_map<UserId, std::size_t> where;
        for (std::size_t i = 0; i < other.user.size(); ++i) where[other.user[i]] = i;
        std::unordered_map<std::string, int> class_of;
        for (std::size_t c = 0; c < names.size(); ++c) class_of[names[c]] = static_cast<int>(c);
        std::vector<int> truth, pa, pb;
        std::size_t skipped = 0;
        for (std::size_t i = 0; i < pred_users.size(); ++i) {
            auto it = where.find(pred_users[i]);
            if (it == where.end()) {
                ++skipped;
                continue;
            }
            const std::size_t o = it->second;
            if (other.gold[o] != names[static_cast<std::size_t>(gold_idx[i])])
                throw DataError("gold label mismatch for user " + std::to_string(pred_users[i]) +
                                " between runs");
            auto pc = class_of.find(other.pred[o]);
            if (pc == class_of.end())
                throw DataError("prediction '" + other.pred[o] + "' in " + es.compare_path +
                                " is not a known party in region " + region);
            truth.push_back(gold_idx[i]);
            pa.push_back(pred_idx[i]);
            pb.push_back(pc->second);
        }
        if (truth.empty()) throw DataError("no overlapping users with " + es.compare_path);
        auto bs = paired_bootstrap(truth, pa, pb, members.num_classes, "macro_f1", es.resamples,
                                   es.seed);
        rep.put("compare_file", es.compare_path);
        rep.put_int("compare_n", static_cast<long long>(truth.size()));
        rep.put_int("compare_skipped", static_cast<long long>(skipped));
        rep.put_num("compare_macro_f1_ours", bs.stat_a);
        rep.put_num("compare_macro_f1_other", bs.stat_b);
        rep.put_num("bootstrap_delta", bs.delta);
        rep.put_num("bootstrap_p", bs.p_value);
        rep.put_int("bootstrap_resamples", bs.resamples);
    }

    write_file(report_txt, rep.text());
    write_file(report_json, rep.j.dump(2) + "\n");
    write_file(confusion_path,
               confusion_svg(*cm, names, region + " " + sc.text + " " + params.kind));
    man.add_output(report_txt);
    man.add_output(report_json);
    man.add_output(confusion_path);
    if (!pred_idx.empty()) {
        std::string out;
        for (std::size_t i = 0; i < pred_users.size(); ++i) {
            out += std::to_string(pred_users[i]);
            out += '\t';
            out += names[static_cast<std::size_t>(gold_idx[i])];
            out += '\t';
            out += names[static_cast<std::size_t>(pred_idx[i])];
            out += '\n';
        }
        write_file(pred_path, out);
        man.add_output(pred_path);
    }
    man.add_timing("eval", eval_ms);
    std::cout << region << '\t' << sc.text << '\t' << params.kind << "\tmacro_f1\t"
              << format_double(outcome.macro_f1) << "\n";
    return outcome;
}

void run_eval(const GlobalOpts& g, const EvalSettings& es, const std::string& embedding_path,
              const std::string& labels_path, const std::string& catalog_path,
              const std::string& region_flag, const std::string& out_dir) {
    auto labels = ingest_labels(labels_path, catalog_path);
    const std::string region = pick_region(labels, region_flag);
    std::optional<EmbeddingMatrix> emb;
    if (!embedding_path.empty()) emb = load_embedding(embedding_path);

    RunManifest man = new_manifest(g, "eval");
    if (!g.config_path.empty()) man.add_input(g.config_path);
    if (!embedding_path.empty()) man.add_input(embedding_path);
    man.add_input(labels_path);
    if (!catalog_path.empty()) man.add_input(catalog_path);
    if (!es.compare_path.empty()) man.add_input(es.compare_path);

    run_eval_stage(emb ? &*emb : nullptr, labels, region, es, out_dir, man);
    nlohmann::ordered_json js;
    js["scenario"] = es.scenario;
    js["classifier"] = es.classifier;
    js["region"] = region;
    man.extra["settings"] = std::move(js);
    man.write((fs::path(out_dir) / "manifest.json").string());
}

// ----------------------------------------------------------------- plot ----

double run_plot_stage(const EmbeddingMatrix& emb, const LabelSet& labels,
                      const std::string& region, std::optional<Tier> tier,
                      const std::string& title, const std::string& out_path, RunManifest& man) {
    if (emb.dim() != 2)
        throw ConfigError("plot needs a 2-D embedding, got dim=" + std::to_string(emb.dim()) +
                          "; run the reduce subcommand first");
    const auto& parties = labels.parties(region);
    std::vector<std::string> names, colors;
    for (const auto& p : parties) {
        names.push_back(p.name);
        colors.push_back(p.color);
    }
    std::vector<ScatterPoint> points;
    std::vector<double> coords;
    std::vector<int> point_class;
    std::size_t missing = 0;
    for (UserId u : labels.users_in(region, tier)) {
        auto row = emb.find(u);
        if (!row) {
            ++missing;
            continue;
        }
        auto v = emb.row(*row);
        points.push_back({v[0], v[1], static_cast<int>(labels.label(u)->party)});
        coords.push_back(v[0]);
        coords.push_back(v[1]);
        point_class.push_back(static_cast<int>(labels.label(u)->party));
    }
    if (missing > 0)
        warnln(std::to_string(missing) + " labeled users lack embedding vectors and were skipped");
    if (points.empty()) throw DataError("no labeled users with embedding vectors to plot");

    if (auto parent = fs::path(out_path).parent_path(); !parent.empty())
        fs::create_directories(parent);
    write_file(out_path, scatter_svg(points, names, colors, title));
    man.add_output(out_path);

    // Cluster quality of the plotted coordinates; meaningful with >= 2
    // populated classes.
    int populated = 0;
    std::vector<std::size_t> per_class(names.size(), 0);
    for (int c : point_class) ++per_class[static_cast<std::size_t>(c)];
    for (auto n : per_class) populated += n > 0 ? 1 : 0;
    double sil = 0.0;
    if (populated >= 2 && points.size() >= 3) {
        sil = silhouette_score(coords, points.size(), 2, point_class,
                               static_cast<int>(names.size()));
        std::cout << "silhouette\t" << format_double(sil) << "\n";
    }
    return sil;
}

void run_plot(const GlobalOpts& g, const std::string& embedding_path,
              const std::string& labels_path, const std::string& catalog_path,
              const std::string& region_flag, const std::string& tier_flag,
              const std::string& title_flag, const std::string& out_path) {
    auto emb = load_embedding(embedding_path);
    auto labels = ingest_labels(labels_path, catalog_path);
    const std::string region = pick_region(labels, region_flag);
    std::optional<Tier> tier;
    if (!tier_flag.empty() && tier_flag != "all") {
        tier = parse_tier(tier_flag);
        if (!tier)
            throw ConfigError("unknown tier '" + tier_flag +
                              "'; valid: member, supporter, sympathizer, all");
    }
    std::string title = title_flag;
    if (title.empty()) {
        title = region;
        if (tier) title += std::string(" ") + tier_name(*tier) + "s";
        title += " (" + emb.method() + ")";
    }

    RunManifest man = new_manifest(g, "plot");
    man.add_input(embedding_path);
    man.add_input(labels_path);
    if (!catalog_path.empty()) man.add_input(catalog_path);
    StageTimer t;
    run_plot_stage(emb, labels, region, tier, title, out_path, man);
    man.add_timing("plot", t.elapsed_ms());
    man.write(out_path + ".manifest.json");
}

// ---------------------------------------------------------------- stats ----

void run_stats(const GlobalOpts& g, const std::string& edges_path, const std::string& manifest_path) {
    StageTimer t;
    auto graph = ingest_edges(edges_path);
    std::cout << graph.node_count() << '\t' << graph.edge_count() << '\t'
              << graph.total_retweets() << "\n";
    if (!manifest_path.empty()) {
        RunManifest man = new_manifest(g, "stats");
        man.add_input(edges_path);
        man.extra["users"] = graph.node_count();
        man.extra["edges"] = graph.edge_count();
        man.extra["retweets"] = graph.total_retweets();
        man.add_timing("stats", t.elapsed_ms());
        man.write(manifest_path);
    }
}

// ------------------------------------------------------------- pipeline ----

void run_pipeline(const GlobalOpts& g, const std::string& out_dir) {
    if (g.config_path.empty()) throw ConfigError("pipeline requires --config");
    const Config& cfg = g.cfg;
    fs::create_directories(out_dir);
    RunManifest man = new_manifest(g, "pipeline");
    man.add_input(g.config_path);
    StageTimer total;

    StageTimer t;
    SynthConfig sc = synth_from_config(cfg, g.seed, "");
    SynthResult data = generate_synthetic(sc);
    auto region_files = write_synth_outputs(data, (fs::path(out_dir) / "synth").string(), man);
    man.add_timing("synth", t.elapsed_ms());
    for (const auto& r : region_files)
        std::cout << r.name << '\t' << r.users << '\t' << r.edges_n << '\t' << r.retweets << "\n";

    const std::string only = cfg.get_string("pipeline.region", "");
    bool matched = false;

    Resolver rr{nullptr, &cfg, ""};
    EmbedSettings edefaults;
    edefaults.seed = g.seed;
    edefaults.threads = g.threads;
    Resolver re{nullptr, &cfg, "embed"};
    EmbedSettings es = embed_settings_from(re, edefaults);

    ReduceSettings rdefaults;
    rdefaults.seed = g.seed;
    Resolver rd{nullptr, &cfg, "reduce"};
    ReduceSettings rs = reduce_settings_from(rd, rdefaults);
    const std::string reduce_method = cfg.get_string("reduce.method", "tsne");
    const std::string reduce_tier = cfg.get_string("reduce.tier", "member");

    EvalSettings evdefaults;
    evdefaults.seed = g.seed;
    Resolver rv{nullptr, &cfg, "eval"};
    EvalSettings ev = eval_settings_from(rv, evdefaults);
    const std::string eval_input = cfg.get_string("eval.input", "embedding");
    if (eval_input != "embedding" && eval_input != "reduced")
        throw ConfigError("eval.input must be 'embedding' or 'reduced'");

    const std::string plot_tier = cfg.get_string("plot.tier", reduce_tier);

    for (const auto& region : data.regions) {
        if (!only.empty() && region.name != only) continue;
        matched = true;
        fs::path rdir = fs::path(out_dir) / region.name;
        fs::create_directories(rdir);
        auto graph = InteractionGraph::from_edges(region.edges);

        t.reset();
        auto emb = compute_embedding(graph, es);
        const std::string emb_path = (rdir / "embedding.tsv").string();
        save_embedding(emb, emb_path);
        man.add_output(emb_path);
        man.add_timing("embed." + region.name, t.elapsed_ms());
        noteln("pipeline: " + region.name + " embed done (" + emb.method() + ")");

        std::optional<EmbeddingMatrix> reduced;
        std::string red_path;
        if (reduce_method != "none") {
            t.reset();
            std::optional<Tier> tier;
            if (reduce_tier != "all") {
                auto tt = parse_tier(reduce_tier);
                if (!tt)
                    throw ConfigError("reduce.tier must be member, supporter, sympathizer or all");
                tier = tt;
            }
            auto keep = data.labels.users_in(region.name, tier);
            std::vector<UserId> miss;
            auto src = subset_embedding(emb, keep, &miss);
            if (src.size() == 0)
                throw DataError("no labeled users to reduce in region " + region.name);
            auto red = compute_reduction(src, rs);
            red.set_extra("parent", to_hex16(fnv1a64_file(emb_path)));
            red.set_extra("parent_method", emb.method());
            red_path = (rdir / "reduced.tsv").string();
            save_embedding(red, red_path);
            man.add_output(red_path);
            man.add_timing("reduce." + region.name, t.elapsed_ms());
            reduced = std::move(red);
            noteln("pipeline: " + region.name + " reduce done");
        }

        const EmbeddingMatrix* eval_emb = &emb;
        if (eval_input == "reduced") {
            if (!reduced) throw ConfigError("eval.input = reduced but reduce.method = none");
            eval_emb = &*reduced;
        }
        t.reset();
        run_eval_stage(eval_emb, data.labels, region.name, ev, (rdir / "eval").string(), man);
        man.add_timing("eval." + region.name, t.elapsed_ms());

        const EmbeddingMatrix* plot_src =
            reduced ? &*reduced : (emb.dim() == 2 ? &emb : nullptr);
        if (plot_src) {
            std::optional<Tier> ptier;
            if (plot_tier != "all") {
                auto tt = parse_tier(plot_tier);
                if (!tt) throw ConfigError("plot.tier must be member, supporter, sympathizer or all");
                ptier = tt;
            }
            t.reset();
            std::string title = region.name;
            if (ptier) title += std::string(" ") + tier_name(*ptier) + "s";
            title += " (" + plot_src->method() + ")";
            run_plot_stage(*plot_src, data.labels, region.name, ptier, title,
                           (rdir / "plot.svg").string(), man);
            man.add_timing("plot." + region.name, t.elapsed_ms());
        } else {
            warnln("skipping plot for region " + region.name + ": no 2-D embedding available");
        }
    }
    if (!only.empty() && !matched)
        throw ConfigError("pipeline.region = " + only + " matches no configured region");

    man.add_timing("total", total.elapsed_ms());
    man.extra["embed"] = embed_settings_json(es);
    man.write((fs::path(out_dir) / "manifest.json").string());
    (void)rr;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"retweet-graph political leaning pipeline"};
    app.fallthrough(true);
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    GlobalOpts g;
    g.threads = env_threads();
    for (int i = 0; i < argc; ++i) g.argv.emplace_back(argv[i]);

    app.add_option("--seed", g.seed, "global random seed")->capture_default_str();
    app.add_option("--threads", g.threads, "worker thread cap")->capture_default_str();
    app.add_flag("--deterministic", g.deterministic,
                 "force single-worker numeric paths for byte-stable outputs");
    app.add_option("--config", g.config_path, "config file (flag > config > default)");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic tiered retweet graph");
    std::string synth_preset, synth_out;
    synth->add_option("--preset", synth_preset, "named config preset (uk-like)");
    synth->add_option("--out", synth_out, "output directory")->required();

    // ingest
    auto* ingest = app.add_subcommand("ingest", "validate and canonicalize edge/label files");
    std::string in_edges, in_labels, in_catalog, in_out;
    ingest->add_option("--edges", in_edges, "edge list file")->required();
    ingest->add_option("--labels", in_labels, "label file (user region party tier)");
    ingest->add_option("--catalog", in_catalog, "party catalog file (region party color)");
    ingest->add_option("--out", in_out, "output directory")->required();

    // embed
    auto* embed = app.add_subcommand("embed", "train user representations from an edge list");
    EmbedSettings ecli;
    std::string em_edges, em_out;
    embed->add_option("--edges", em_edges, "edge list file")->required();
    embed->add_option("--out", em_out, "output embedding file")->required();
    embed->add_option("--method", ecli.method, "re | deepwalk | node2vec | fa2")
        ->capture_default_str();
    embed->add_option("--dim", ecli.dim, "embedding width")->capture_default_str();
    embed->add_option("--negatives", ecli.negatives, "negative samples per pair")
        ->capture_default_str();
    embed->add_option("--epochs", ecli.epochs, "training epochs (-1: method default)");
    embed->add_option("--lr", ecli.lr, "initial learning rate")->capture_default_str();
    embed->add_option("--min-lr", ecli.min_lr, "learning rate floor")->capture_default_str();
    embed->add_option("--walks", ecli.walks, "walks per node")->capture_default_str();
    embed->add_option("--walk-length", ecli.walk_length, "steps per walk")->capture_default_str();
    embed->add_option("--window", ecli.window, "skip-gram context window")->capture_default_str();
    embed->add_option("--p", ecli.p, "node2vec return parameter")->capture_default_str();
    embed->add_option("--q", ecli.q, "node2vec in-out parameter")->capture_default_str();
    embed->add_flag("--share-tables", ecli.share_tables, "re: one table for both roles");
    embed->add_flag("--concat", ecli.concat, "re: emit [source; target] vectors");
    embed->add_flag("--dedup", ecli.dedup, "re: collapse repeated pairs");
    embed->add_option("--iterations", ecli.fa2_iterations, "fa2: layout iterations")
        ->capture_default_str();
    embed->add_option("--scaling", ecli.fa2_scaling, "fa2: repulsion constant")
        ->capture_default_str();
    embed->add_option("--gravity", ecli.fa2_gravity, "fa2: gravity strength")
        ->capture_default_str();
    embed->add_option("--theta", ecli.fa2_theta, "fa2: Barnes-Hut accuracy")
        ->capture_default_str();
    embed->add_flag("--linlog", ecli.fa2_linlog, "fa2: logarithmic attraction");
    embed->add_flag("--strong-gravity", ecli.fa2_strong_gravity, "fa2: distance-proportional gravity");
    bool em_bh = false;
    embed->add_flag("--barnes-hut,!--no-barnes-hut", em_bh,
                    "fa2: force Barnes-Hut repulsion on/off (default: auto by size)");

    // reduce
    auto* reduce = app.add_subcommand("reduce", "project an embedding to low dimension");
    ReduceSettings rcli;
    std::string rd_in, rd_out, rd_labels, rd_catalog, rd_region, rd_tier;
    reduce->add_option("--in", rd_in, "input embedding file")->required();
    reduce->add_option("--out", rd_out, "output embedding file")->required();
    reduce->add_option("--method", rcli.method, "pca | tsne")->capture_default_str();
    reduce->add_option("--dim", rcli.dim, "output width")->capture_default_str();
    reduce->add_option("--perplexity", rcli.perplexity, "tsne: target perplexity")
        ->capture_default_str();
    reduce->add_option("--iterations", rcli.iterations, "tsne: gradient steps")
        ->capture_default_str();
    reduce->add_option("--learning-rate", rcli.learning_rate, "tsne: learning rate")
        ->capture_default_str();
    reduce->add_option("--labels", rd_labels, "label file; keep only labeled users");
    reduce->add_option("--catalog", rd_catalog, "party catalog file");
    reduce->add_option("--region", rd_region, "restrict to one region's users");
    reduce->add_option("--tier", rd_tier, "restrict to one tier (member/supporter/sympathizer/all)");

    // eval
    auto* eval = app.add_subcommand("eval", "score a classifier under an evaluation scenario");
    EvalSettings vcli;
    std::string ev_embedding, ev_labels, ev_catalog, ev_region, ev_out;
    eval->add_option("--embedding", ev_embedding, "embedding file (optional for majority)");
    eval->add_option("--labels", ev_labels, "label file")->required();
    eval->add_option("--catalog", ev_catalog, "party catalog file");
    eval->add_option("--region", ev_region, "region to evaluate");
    eval->add_option("--out", ev_out, "output directory")->required();
    eval->add_option("--scenario", vcli.scenario, "loo | kshot:<k> | tier:supporter | tier:sympathizer")
        ->capture_default_str();
    eval->add_option("--classifier", vcli.classifier, std::string("one of: ") + kClassifierKinds)
        ->capture_default_str();
    eval->add_option("--reps", vcli.reps, "kshot repetitions")->capture_default_str();
    eval->add_option("--l2", vcli.l2, "logreg: ridge strength")->capture_default_str();
    eval->add_option("--max-iter", vcli.max_iter, "logreg: iteration cap")->capture_default_str();
    eval->add_option("--var-smoothing", vcli.var_smoothing, "gnb: variance floor fraction")
        ->capture_default_str();
    eval->add_option("--svm-c", vcli.svm_c, "svm-linear: soft margin C")->capture_default_str();
    eval->add_option("--svm-epochs", vcli.svm_epochs, "svm-linear: epochs")->capture_default_str();
    eval->add_option("--trees", vcli.trees, "rf: tree count")->capture_default_str();
    eval->add_option("--max-depth", vcli.max_depth, "rf: depth cap (-1: none)")
        ->capture_default_str();
    eval->add_option("--mtry", vcli.mtry, "rf: features per split (0: sqrt)")
        ->capture_default_str();
    eval->add_option("--compare", vcli.compare_path,
                     "another run's predictions.tsv; adds a paired bootstrap");
    eval->add_option("--resamples", vcli.resamples, "bootstrap resamples")->capture_default_str();

    // plot
    auto* plot = app.add_subcommand("plot", "render a 2-D embedding as an SVG scatter");
    std::string pl_embedding, pl_labels, pl_catalog, pl_region, pl_tier, pl_title, pl_out;
    plot->add_option("--embedding", pl_embedding, "2-D embedding file")->required();
    plot->add_option("--labels", pl_labels, "label file")->required();
    plot->add_option("--catalog", pl_catalog, "party catalog file");
    plot->add_option("--region", pl_region, "region to plot");
    plot->add_option("--tier", pl_tier, "tier filter (member/supporter/sympathizer/all)");
    plot->add_option("--title", pl_title, "plot title");
    plot->add_option("--out", pl_out, "output SVG file")->required();

    // pipeline
    auto* pipeline = app.add_subcommand("pipeline", "synth, embed, reduce, eval and plot from one config");
    std::string pp_out;
    pipeline->add_option("--out", pp_out, "output directory")->required();

    // stats
    auto* stats = app.add_subcommand("stats", "print user/edge/retweet counts for an edge list");
    std::string st_edges, st_manifest;
    stats->add_option("edges", st_edges, "edge list file")->required();
    stats->add_option("--manifest", st_manifest, "also write a manifest here");

    try {
        app.parse(argc, argv);

        if (g.deterministic) g.threads = 1;
        if (g.threads < 1) throw ConfigError("--threads must be >= 1");
        if (!g.config_path.empty()) g.cfg = Config::load(g.config_path);
        if (app.count("--seed") == 0 && g.cfg.has("seed")) g.seed = g.cfg.get_uint("seed", g.seed);

        if (*synth) {
            run_synth(g, synth_preset, synth_out);
        } else if (*ingest) {
            run_ingest(g, in_edges, in_labels, in_catalog, in_out);
        } else if (*embed) {
            Resolver r{embed, g.config_path.empty() ? nullptr : &g.cfg, "embed"};
            EmbedSettings s = embed_settings_from(r, ecli);
            if (embed->count("--barnes-hut")) s.fa2_barnes_hut = em_bh;
            s.seed = g.seed;
            s.threads = g.threads;
            if (s.method == "deepwalk" && (embed->count("--p") || embed->count("--q")))
                throw ConfigError("deepwalk has no p/q; use --method node2vec");
            if (s.method == "fa2" && embed->count("--dim") && s.dim != 2)
                warnln("fa2 layouts are always 2-D; --dim ignored");
            run_embed(g, s, em_edges, em_out);
        } else if (*reduce) {
            Resolver r{reduce, g.config_path.empty() ? nullptr : &g.cfg, "reduce"};
            ReduceSettings s = reduce_settings_from(r, rcli);
            s.seed = g.seed;
            run_reduce(g, s, rd_in, rd_labels, rd_catalog, rd_region, rd_tier, rd_out);
        } else if (*eval) {
            Resolver r{eval, g.config_path.empty() ? nullptr : &g.cfg, "eval"};
            EvalSettings s = eval_settings_from(r, vcli);
            s.compare_path = vcli.compare_path;
            s.seed = g.seed;
            run_eval(g, s, ev_embedding, ev_labels, ev_catalog, ev_region, ev_out);
        } else if (*plot) {
            run_plot(g, pl_embedding, pl_labels, pl_catalog, pl_region, pl_tier, pl_title, pl_out);
        } else if (*pipeline) {
            run_pipeline(g, pp_out);
        } else if (*stats) {
            run_stats(g, st_edges, st_manifest);
        }
        return 0;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
