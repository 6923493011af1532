#include <doctest.h>

#include <cstdlib>
#include <sys/wait.h>

#include "checks.hpp"
#include "hatescope/fixture.hpp"
#include "hatescope/pipeline.hpp"

using namespace hatescope;
namespace fs = std::filesystem;

namespace {

FixtureOptions small_fixture() {
    FixtureOptions o;
    o.cities = 30;
    o.min_records = 40;
    o.max_records = 80;
    o.training = 800;
    o.buckets = 1u << 14;
    return o;
}

int cli(const std::string& args) {
    const std::string cmd = std::string(HATESCOPE_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) s.replace(pos, from.size(), to);
    return s;
}

}  // namespace

TEST_SUITE("pipeline") {
    TEST_CASE("full run, resume and artifact headers") {
        auto dir = checks::temp_dir("pipeline");
        auto config = generate_fixture(dir / "fx", small_fixture());
        auto cfg = load_pipeline_config(config);
        const fs::path out = dir / "out";
        auto r = run_pipeline(cfg, out, std::nullopt, Exec::serial);
        INFO(r.message);
        REQUIRE(r.exit_code == 0);
        CHECK(r.ran == pipeline_stages());
        for (const char* name : {"ingested.ndjson", "classified.ndjson", "aggregates.csv", "stepwise_trace.csv",
                                 "features_top.csv", "lexical_group_ratio.csv", "bot_summary.csv"})
            CHECK(read_file(out / name).rfind(artifact_header(cfg.hash), 0) == 0);
        CHECK(read_file(out / "map.geojson").find("hatescope 0.1.0 config=" + cfg.hash) != std::string::npos);

        const auto before = checks::tree_digest(out);
        const auto classified = read_file(out / "classified.ndjson");
        fs::remove(out / "aggregates.csv");
        fs::remove(out / "map.geojson");
        write_file(out / "ingested.ndjson", "not json\n");
        auto resumed = run_pipeline(cfg, out, std::string("classify"), Exec::parallel);
        REQUIRE(resumed.exit_code == 0);
        CHECK(resumed.ran.front() == "delineate");
        CHECK(resumed.ran.size() == pipeline_stages().size() - 4);
        CHECK(read_file(out / "classified.ndjson") == classified);
        CHECK(fs::exists(out / "aggregates.csv"));
        CHECK(fs::exists(out / "map.geojson"));
        auto again = run_pipeline(cfg, dir / "out2", std::nullopt, Exec::parallel);
        REQUIRE(again.exit_code == 0);
        CHECK(checks::tree_digest(dir / "out2") == before);

        auto bad_resume = run_pipeline(cfg, out, std::string("nope"));
        CHECK(bad_resume.exit_code == 2);
    }

    TEST_CASE("config overrides") {
        auto dir = checks::temp_dir("pipeline_cfg");
        auto config = generate_fixture(dir, small_fixture());
        auto base = load_pipeline_config(config);
        auto over = load_pipeline_config(config, {"seed=7", "classifier.k=5", "regression.exclude=[\"c000\"]"});
        CHECK(over.seed == 7);
        CHECK(over.k == 5);
        CHECK(over.exclude_cities == std::vector<std::string>{"c000"});
        CHECK(over.hash != base.hash);
        CHECK(load_pipeline_config(config).hash == base.hash);
        CHECK_THROWS_AS(load_pipeline_config(config, {"seed"}), ConfigError);
        CHECK_THROWS_AS(load_pipeline_config(config, {"regression.social_covariate=odds"}), ConfigError);
        CHECK_THROWS_AS(load_pipeline_config(dir / "missing.json"), ConfigError);
    }

    TEST_CASE("CLI exit codes") {
        auto dir = checks::temp_dir("pipeline_cli");
        auto config = generate_fixture(dir / "fx", small_fixture());
        const std::string out = (dir / "out").string();
        const std::string c = " -c " + config.string() + " -o " + out;
        write_file(dir / "broken.json", "{ not json");
        CHECK(cli("run-all -c " + (dir / "broken.json").string() + " -o " + out) == 2);
        CHECK(cli("run-all" + c + " --set window.start=yesterday") == 2);
        REQUIRE(cli("run-all" + c) == 0);

        const fs::path records = dir / "out" / "records.ndjson";
        const auto good = read_file(records);
        write_file(records, good + "{\"truncated\n");
        CHECK(cli("aggregate" + c) == 3);
        auto first_city = good.find("\"city_key\":\"");
        REQUIRE(first_city != std::string::npos);
        const auto start = first_city + 12;
        const auto key = good.substr(start, good.find('"', start) - start);
        write_file(records, replace_all(good, "\"city_key\":\"" + key + "\"", "\"city_key\":\"atlantis\""));
        CHECK(cli("aggregate" + c) == 4);
        write_file(records, good);
        CHECK(cli("aggregate" + c) == 0);
        CHECK(cli("run-all" + c + " --resume-after unknown") == 2);
    }
}
