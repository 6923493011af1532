#include "hatescope/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "hatescope/corpus.hpp"
#include "hatescope/lexical.hpp"
#include "hatescope/util.hpp"

namespace hatescope {

namespace {

const std::vector<std::string>& filler_words() {
    static const std::vector<std::string> words = {
        "the",     "a",        "today",   "morning", "coffee",  "street",  "game",    "team",     "music",
        "weekend", "weather",  "rain",    "sun",     "park",    "dog",     "cat",     "friend",   "family",
        "dinner",  "lunch",    "school",  "class",   "movie",   "show",    "phone",   "car",      "bus",
        "train",   "traffic",  "city",    "downtown", "store",  "market",  "pizza",   "tacos",    "beach",
        "river",   "bridge",   "road",    "night",   "party",   "song",    "album",   "concert",  "ticket",
        "season",  "playoffs", "score",   "win",     "lost",    "great",   "good",    "bad",      "crazy",
        "really",  "so",       "very",    "just",    "still",   "never",   "always",  "maybe",    "finally",
        "going",   "went",     "watching", "reading", "eating", "walking", "driving", "working",  "waiting",
        "to",      "at",       "in",      "on",      "for",     "with",    "and",     "but",      "or",
        "new",     "old",      "big",     "little",  "long",    "short",   "happy",   "tired",    "late",
        "early",   "home",     "office",  "gym",     "library", "church",  "airport", "hotel",    "restaurant",
        "birthday", "holiday", "summer",  "winter",  "spring",  "fall",    "photo",   "video",    "news",
        "story",   "book",     "paper",   "project", "meeting", "call",    "email",   "sale",     "price"};
    return words;
}

const std::vector<std::string>& third_person() {
    static const std::vector<std::string> p = {"they", "them", "their", "he", "she", "his", "her"};
    return p;
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
    return v[rng.below(v.size())];
}

std::string insert_at_random(Rng& rng, const std::string& base, const std::string& phrase) {
    std::vector<std::string> words = split(base, ' ');
    const std::size_t pos = rng.below(words.size() + 1);
    words.insert(words.begin() + static_cast<std::ptrdiff_t>(pos), phrase);
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) out.push_back(' ');
        out += words[i];
    }
    return out;
}

std::string pad_id(const std::string& prefix, std::size_t i, int width = 5) {
    std::string n = std::to_string(i);
    if (static_cast<int>(n.size()) < width) n.insert(0, static_cast<std::size_t>(width) - n.size(), '0');
    return prefix + n;
}

double normal(Rng& rng) {
    const double u1 = 1.0 - rng.uniform();
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Marsaglia-Tsang, shape >= 1 boosted for shape < 1.
double gamma_draw(Rng& rng, double shape, double scale) {
    if (shape < 1) return gamma_draw(rng, shape + 1, scale) * std::pow(rng.uniform() + 1e-300, 1.0 / shape);
    const double d = shape - 1.0 / 3.0, c = 1.0 / std::sqrt(9 * d);
    while (true) {
        double x = normal(rng), v = 1 + c * x;
        if (v <= 0) continue;
        v = v * v * v;
        const double u = rng.uniform();
        if (u < 1 - 0.0331 * x * x * x * x) return d * v * scale;
        if (std::log(u + 1e-300) < 0.5 * x * x + d * (1 - v + std::log(v))) return d * v * scale;
    }
}

long long poisson_draw(Rng& rng, double mu) {
    if (mu > 60) return std::max(0LL, std::llround(mu + std::sqrt(mu) * normal(rng)));
    const double limit = std::exp(-mu);
    long long k = 0;
    double p = rng.uniform();
    while (p > limit) {
        p *= rng.uniform();
        ++k;
    }
    return k;
}

}  // namespace

const std::vector<std::string>& planted_phrases() {
    static const std::vector<std::string> p = {"vorlak", "grelt vasha", "most zorvik person", "drubnik", "quennish",
                                               "farsok trash"};
    return p;
}

std::string filler_text(Rng& rng, int words) {
    std::string out;
    for (int i = 0; i < words; ++i) {
        if (i) out.push_back(' ');
        out += pick(rng, filler_words());
    }
    return out;
}

std::vector<LabeledExample> planted_corpus(const PlantedCorpusOptions& o) {
    Rng rng(o.seed);
    const auto positives = static_cast<std::size_t>(std::llround(double(o.records) * o.positive_rate));
    std::vector<int> labels(o.records, 0);
    std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(positives), 1);
    rng.shuffle(labels);
    std::vector<LabeledExample> out;
    out.reserve(o.records);
    for (std::size_t i = 0; i < o.records; ++i) {
        LabeledExample e;
        e.id = pad_id(o.id_prefix, i);
        e.label = labels[i];
        std::string text = filler_text(rng, 5 + static_cast<int>(rng.below(10)));
        if (e.label) text = insert_at_random(rng, text, pick(rng, planted_phrases()));
        e.text = text;
        out.push_back(std::move(e));
    }
    return out;
}

BoundaryNoiseFixture boundary_noise_fixture(std::uint64_t seed) {
    Rng rng(seed);
    BoundaryNoiseFixture fx;
    const std::string cue = "brantle";
    std::size_t next_id = 0;
    // kind: 0 negative, 1 positive, 2 cue (truly negative)
    auto make = [&](int kind) {
        std::string text = filler_text(rng, 6 + static_cast<int>(rng.below(8)));
        if (kind == 1) text = insert_at_random(rng, text, pick(rng, planted_phrases()));
        if (kind == 2) text = insert_at_random(rng, text, cue);
        return std::pair{pad_id("b", next_id++, 6), text};
    };
    auto kinds = [&](std::size_t neg, std::size_t pos, std::size_t band) {
        std::vector<int> k;
        k.insert(k.end(), neg, 0);
        k.insert(k.end(), pos, 1);
        k.insert(k.end(), band, 2);
        rng.shuffle(k);
        return k;
    };
    std::size_t band_seen = 0;
    for (int k : kinds(1200, 180, 150)) {
        auto [id, text] = make(k);
        int label = k == 1;
        if (k == 2) label = (band_seen++ % 3) != 0;  // two thirds mislabeled positive
        fx.initial.push_back({id, text, label, 1.0, Provenance::seed, 0});
    }
    for (int k : kinds(1500, 200, 300)) {
        auto [id, text] = make(k);
        fx.pool.push_back({id, text});
        fx.answers[id] = k == 1;
    }
    for (int k : kinds(800, 120, 120)) {
        auto [id, text] = make(k);
        fx.test.push_back({id, text, k == 1, 1.0, Provenance::seed, 0});
    }
    return fx;
}

std::string core_categories_text() {
    return "# category:term,term,...\n"
           "positive_emotion:happy,love,great,joy,glad,wonderful,excited,proud,smile,hope\n"
           "negative_emotion:hate,angry,awful,terrible,upset,disgusting,worst,annoyed,bitter,resent\n"
           "disappointment:disappointed,letdown,let down,failed,regret,unfortunately,shame,pity,sigh,fail\n"
           "sadness:sad,cry,crying,tears,lonely,grief,sorrow,miserable,heartbroken,depressed\n"
           "aggression:attack,fight,threat,yell,shout,hostile,rage,insult,kick,punch\n"
           "violence:kill,shoot,gun,stab,blood,violence,murder,weapon,beat,hurt\n"
           "work:work,job,office,boss,meeting,project,career,coworker,shift,working\n"
           "money:money,cash,price,pay,rent,dollars,bank,sale,cost,wage\n"
           "night:night,tonight,midnight,late,dark,party,club,bar,sleep,dream\n";
}

std::string standin_lexicon_csv() {
    return "phrase,sightings,nationality_ethnicity,english,excluded\n"
           "vorlak,48,true,true,false\n"
           "grelt vasha,31,true,true,false\n"
           "most zorvik person,17,true,true,false\n"
           "drubnik,26,true,true,false\n"
           "quennish,12,true,true,false\n"
           "farsok trash,22,true,true,false\n"
           "plimsy,10,true,true,false\n"
           "hostrel,40,false,true,false\n"
           "vendrasch,19,true,false,false\n"
           "oreo,55,true,true,true\n"
           "pancake,37,true,true,true\n";
}

namespace {

struct CityPlan {
    CityRecord city;
    double disc_rate;
    double targeted_share;
    int records;
    std::vector<std::string> places;
};

std::string state_code(int i) {
    static const char* states[] = {"AZ", "CA", "TX", "NY", "FL", "IL", "PA", "OH", "GA", "NC",
                                   "MI", "NJ", "VA", "WA", "MA", "IN", "TN", "MO", "MD", "WI"};
    return states[i % 20];
}

}  // namespace

std::filesystem::path generate_fixture(const std::filesystem::path& dir, const FixtureOptions& o) {
    Rng rng(o.seed);
    namespace fs = std::filesystem;
    fs::create_directories(dir / "bots");

    // Cities. Hate-crime counts follow an overdispersed count model of the targeted share
    // and two census covariates.
    std::vector<CityPlan> plans;
    for (int i = 0; i < o.cities; ++i) {
        CityPlan p;
        const std::string st = state_code(i);
        const std::string name = "Town " + std::to_string(i + 1);
        p.city.city_key = "town-" + std::to_string(i + 1) + "-" + ascii_lower(st);
        p.city.aliases = {name + ", " + st};
        if (i % 17 == 3) p.city.aliases.push_back("Old " + name + ", " + st);
        auto& c = p.city.census;
        c.pct_white = rng.uniform(35, 85);
        c.pct_black = rng.uniform(2, std::min(40.0, 95 - c.pct_white));
        c.pct_asian = rng.uniform(1, 12);
        c.pct_hispanic_latino = rng.uniform(3, 45);
        c.pct_foreign_born = rng.uniform(3, 35);
        c.pct_female = rng.uniform(48, 53);
        c.pct_age_18_64 = rng.uniform(58, 70);
        c.population_density = std::exp(rng.uniform(std::log(800.0), std::log(20000.0)));
        c.median_income = rng.uniform(32000, 95000);
        p.city.lat = rng.uniform(26, 48);
        p.city.lon = rng.uniform(-122, -71);
        p.disc_rate = rng.uniform(0.05, 0.25);
        p.targeted_share = rng.uniform(0.3, 0.95);
        p.records = o.min_records + static_cast<int>(rng.below(static_cast<std::uint64_t>(o.max_records - o.min_records + 1)));
        const double log_mu = 1.6 + 2.2 * p.targeted_share + 0.025 * (c.pct_black - 15) + 0.000012 * (c.median_income - 60000);
        const double theta = 4.0;
        p.city.hate_crime_count = poisson_draw(rng, gamma_draw(rng, theta, std::exp(log_mu) / theta));
        p.places = p.city.aliases;
        plans.push_back(std::move(p));
    }

    {
        std::string csv = "city_key,aliases,hate_crimes,pct_white,pct_black,pct_asian,pct_hispanic_latino,"
                          "pct_foreign_born,pct_female,pct_age_18_64,population_density,median_income,lat,lon\n";
        for (const auto& p : plans) {
            const auto& c = p.city.census;
            std::string aliases;
            for (std::size_t a = 0; a < p.city.aliases.size(); ++a) aliases += (a ? "|" : "") + p.city.aliases[a];
            auto f2 = [](double v) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.2f", v);
                return std::string(buf);
            };
            csv += csv_row({p.city.city_key, aliases, std::to_string(p.city.hate_crime_count), f2(c.pct_white),
                            f2(c.pct_black), f2(c.pct_asian), f2(c.pct_hispanic_latino), f2(c.pct_foreign_born),
                            f2(c.pct_female), f2(c.pct_age_18_64), f2(c.population_density), f2(c.median_income),
                            f2(*p.city.lat), f2(*p.city.lon)});
        }
        write_file(dir / "cities.csv", csv);
    }

    // Corpus.
    const std::int64_t t0 = *parse_rfc3339("2011-01-01T00:00:00Z");
    const std::int64_t t1 = *parse_rfc3339("2016-12-31T23:59:59Z");
    const std::vector<std::string> self_heads = {"my neighbor called me a", "my boss called me a",
                                                 "i got called a", "someone yelled at me and my son calling us"};
    const std::vector<std::string> targeted_heads = {"they are all", "go back home you", "those people are",
                                                     "he is such a", "she is a typical"};
    const std::vector<std::string> hostile_terms = {"hate", "angry", "attack", "disgusting", "worst",
                                                    "fight", "threat", "kill", "sad", "disappointed"};
    const std::vector<std::string> everyday_terms = {"hate", "sad", "angry", "love", "cry", "money",
                                                     "pay", "tonight", "fight", "disappointed"};
    const std::vector<std::string> heavy_users = {"u-heavy-1", "u-heavy-2", "u-heavy-3"};
    std::vector<std::string> all_users;
    std::string corpus;
    std::size_t rec_id = 0;
    auto emit = [&](const std::string& id, const std::string& text, std::int64_t ts, const std::string& place,
                    const std::string& user) {
        nlohmann::ordered_json j;
        j["id"] = id;
        j["text"] = text;
        j["created_at"] = format_rfc3339(ts);
        if (rec_id % 5 == 0) j["place"] = {{"full_name", place}};
        else j["place"] = place;
        j["user_id"] = user;
        corpus += j.dump();
        corpus.push_back('\n');
    };
    for (std::size_t ci = 0; ci < plans.size(); ++ci) {
        const auto& p = plans[ci];
        const int users = std::max(4, p.records / 6);
        for (int r = 0; r < p.records; ++r) {
            const std::string id = "t" + std::to_string(100000 + rec_id);
            const std::int64_t ts = t0 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(t1 - t0)));
            // Skewed user activity within the city.
            const double u = rng.uniform();
            std::string user = "u-" + std::to_string(ci + 1) + "-" + std::to_string(static_cast<int>(users * u * u * u));
            std::string text;
            if (rng.uniform() < p.disc_rate) {
                const std::string& term = pick(rng, planted_phrases());
                if (rng.uniform() < p.targeted_share) {
                    text = pick(rng, targeted_heads) + " " + term + " " + filler_text(rng, 3 + int(rng.below(6)));
                } else {
                    text = pick(rng, self_heads) + " " + term + " " + filler_text(rng, 3 + int(rng.below(6)));
                }
                if (rng.uniform() < 0.5) text = insert_at_random(rng, text, pick(rng, hostile_terms));
                if (rng.uniform() < 0.08) user = pick(rng, heavy_users);
            } else {
                text = filler_text(rng, 6 + int(rng.below(10)));
                if (rng.uniform() < 0.4) text = insert_at_random(rng, text, pick(rng, third_person()));
                if (rng.uniform() < 0.3) text = insert_at_random(rng, text, "i");
                if (rng.uniform() < 0.15) text = insert_at_random(rng, text, pick(rng, everyday_terms));
            }
            all_users.push_back(user);
            emit(id, text, ts, pick(rng, p.places), user);
            ++rec_id;
        }
    }
    // Heavy users also post repeatedly in one city so the >21 volume bucket is populated.
    for (std::size_t h = 0; h < heavy_users.size(); ++h) {
        const auto& p = plans[h * 7];
        for (int r = 0; r < 24; ++r) {
            const std::string id = "t" + std::to_string(100000 + rec_id);
            const std::int64_t ts = t0 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(t1 - t0)));
            const std::string text =
                pick(rng, targeted_heads) + " " + pick(rng, planted_phrases()) + " " + filler_text(rng, 4);
            emit(id, text, ts, p.places.front(), heavy_users[h]);
            ++rec_id;
        }
    }
    // Stragglers: unmatched places, out-of-window timestamps, malformed lines, duplicate ids.
    for (int r = 0; r < 20; ++r) {
        emit("t" + std::to_string(100000 + rec_id), filler_text(rng, 8), t0 + 86400 * r, "Nowhere " + std::to_string(r) + ", ZZ",
             "u-x-" + std::to_string(r));
        ++rec_id;
    }
    for (int r = 0; r < 15; ++r) {
        emit("t" + std::to_string(100000 + rec_id), filler_text(rng, 8), t0 - 86400 * (r + 1), plans[r].places.front(),
             "u-x-" + std::to_string(r));
        ++rec_id;
    }
    corpus += "{\"id\": \"broken\", \"text\": \n";
    corpus += "not json at all\n";
    corpus += "{\"id\": \"t-missing-time\", \"text\": \"hello\", \"place\": \"Town 1, AZ\", \"user_id\": \"u\"}\n";
    emit("t100000", "duplicate id line", t0 + 1000, plans[0].places.front(), "u-dup");
    write_file(dir / "corpus.ndjson", corpus);

    write_file(dir / "lexicon.csv", standin_lexicon_csv());
    write_file(dir / "categories.txt", core_categories_text());

    // Bot lists: two sources with overlap plus ids that never post.
    {
        std::vector<std::string> users = all_users;
        std::sort(users.begin(), users.end());
        users.erase(std::unique(users.begin(), users.end()), users.end());
        std::string a = "# bot list A\n", b = "# bot list B\n";
        for (std::size_t i = 0; i < users.size(); ++i) {
            const double u = rng.uniform();
            if (u < 0.05) a += users[i] + "\n";
            else if (u < 0.09) b += users[i] + "\n";
            else if (u < 0.10) {
                a += users[i] + "\n";
                b += users[i] + "\n";
            }
        }
        for (int i = 0; i < 25; ++i) b += "ghost-" + std::to_string(i) + "\n";
        write_file(dir / "bots" / "list_a.txt", a);
        write_file(dir / "bots" / "list_b.txt", b);
        write_file(dir / "bots" / "manifest.csv",
                   "source,path,period_note\nlist-a,list_a.txt,collected over the study window\n"
                   "list-b,list_b.txt,collected after the study window\n");
    }

    // Training set and annotation material.
    {
        PlantedCorpusOptions po;
        po.records = o.training;
        po.seed = o.seed + 1;
        po.id_prefix = "tr";
        auto train = planted_corpus(po);
        // Head phrases seen in the corpus appear on both sides of the training set.
        Rng side(o.seed + 2);
        for (auto& e : train) {
            if (side.uniform() < 0.3) {
                const std::string& head = side.uniform() < 0.5 ? pick(side, self_heads) : pick(side, targeted_heads);
                e.text = head + " " + e.text;
            }
        }
        write_file(dir / "train.csv", serialize_labeled_examples(train));

        PlantedCorpusOptions pp;
        pp.records = 2000;
        pp.seed = o.seed + 3;
        pp.id_prefix = "pool";
        const auto pool = planted_corpus(pp);
        std::string pool_csv = "id,text\n", answers = "id,text,label\n", tasks = "id,text\n";
        for (std::size_t i = 0; i < pool.size(); ++i) {
            pool_csv += csv_row({pool[i].id, pool[i].text});
            answers += csv_row({pool[i].id, pool[i].text, std::to_string(pool[i].label)});
            if (i < 200) tasks += csv_row({pool[i].id, pool[i].text});
        }
        write_file(dir / "pool.csv", pool_csv);
        write_file(dir / "answers.csv", answers);
        write_file(dir / "tasks.csv", tasks);

        std::string tests = "id,text,gold\n";
        for (int i = 0; i < 20; ++i) {
            const bool pos = i % 2 == 0;
            std::string text = filler_text(rng, 8);
            if (pos) text = insert_at_random(rng, text, pick(rng, planted_phrases()));
            tests += csv_row({pad_id("gold", static_cast<std::size_t>(i), 3), text, pos ? "discrimination" : "no_discrimination"});
        }
        write_file(dir / "test_tasks.csv", tests);
    }

    nlohmann::ordered_json cfg;
    cfg["seed"] = o.seed;
    cfg["paths"] = {{"corpus", "corpus.ndjson"},     {"registry", "cities.csv"},      {"lexicon", "lexicon.csv"},
                    {"categories", "categories.txt"}, {"bot_manifest", "bots/manifest.csv"}, {"training", "train.csv"}};
    cfg["window"] = {{"start", "2011-01-01T00:00:00Z"}, {"end", "2016-12-31T23:59:59Z"}};
    cfg["lexicon"] = {{"min_sightings", 10}, {"require_discrimination", true}};
    cfg["classifier"] = {{"orders", {1, 2, 3}}, {"buckets", o.buckets}, {"dim", 10}, {"epochs", 5},
                         {"learning_rate", 0.5}, {"k", 10}};
    cfg["categories"] = core_category_preset();
    cfg["regression"] = {{"social_covariate", "proportion"}, {"exclude", nlohmann::ordered_json::array()}};
    cfg["features"] = {{"k", 20}};
    const fs::path config_path = dir / "config.json";
    write_file(config_path, cfg.dump(2) + "\n");
    return config_path;
}

}  // namespace hatescope
