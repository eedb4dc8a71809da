#include <catch2/catch_amalgamated.hpp>

#include <brw/config.hpp>
#include <brw/report.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace brw;

TEST_CASE("csv escaping") {
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("") == "");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_escape("line\nbreak") == "\"line\nbreak\"");
    CHECK(csv_escape("cr\rhere") == "\"cr\rhere\"");
}

TEST_CASE("shortest round-trip double formatting") {
    for (double v : {0.1, 1.0 / 3.0, 1e-12, 6.62607015e-34, 0.0, -2.5, 1e300,
                     0.062220687715822974}) {
        const std::string s = fmt_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
    CHECK(fmt_double(0.5) == "0.5");
    CHECK(fmt_double(1.0) == "1");
}

TEST_CASE("csv writer") {
    std::ostringstream os;
    CsvWriter csv(os, {"x", "y", "note"});
    csv.row({"1", "2", "ok"});
    csv.row({"3", "4", "a,b"});
    CHECK(os.str() == "x,y,note\n1,2,ok\n3,4,\"a,b\"\n");
    CHECK_THROWS_AS(csv.row({"too", "few"}), std::logic_error);
    CHECK_THROWS_AS(CsvWriter(os, {}), std::logic_error);
}

TEST_CASE("json documents serialize with sorted keys") {
    Json doc{{"zeta", 1}, {"alpha", 2}, {"mid", Json{{"b", 1}, {"a", 2}}}};
    CHECK(doc.dump() == R"({"alpha":2,"mid":{"a":2,"b":1},"zeta":1})");
}

TEST_CASE("file helpers") {
    const std::string dir = std::filesystem::temp_directory_path() / "brw_report_test";
    std::filesystem::remove_all(dir);
    ensure_dir(dir + "/nested");
    CHECK(std::filesystem::is_directory(dir + "/nested"));
    write_json_file(dir + "/doc.json", Json{{"k", 0.5}});
    std::ifstream in(dir + "/doc.json");
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == "{\n  \"k\": 0.5\n}\n");
    CHECK_THROWS_AS(open_output(dir + "/missing_dir/doc.json"), IoError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("config parsing") {
    const auto cfg = Config::parse_string("# comment\n"
                                          "kernel = lazy   # trailing comment\n"
                                          "\n"
                                          "n=4\n"
                                          "eps = 1e-9\n"
                                          "flag = true\n",
                                          "test.cfg");
    CHECK(cfg.get_string("kernel") == "lazy");
    CHECK(cfg.get_int("n") == 4);
    CHECK(cfg.get_uint("n") == 4);
    CHECK(cfg.get_double("eps") == 1e-9);
    CHECK(cfg.get_bool("flag"));
    CHECK(cfg.has("kernel"));
    CHECK_FALSE(cfg.has("law"));
    SECTION("defaults fill only missing keys") {
        CHECK(cfg.get_int("n", 9) == 4);
        CHECK(cfg.get_int("m", 9) == 9);
        CHECK(cfg.get_string("law", "0.5,0,0.5") == "0.5,0,0.5");
    }
    SECTION("items are sorted for deterministic echo") {
        const auto& items = cfg.items();
        CHECK(items.begin()->first == "eps");
        CHECK(items.rbegin()->first == "n");
    }
}

TEST_CASE("config rejects malformed input") {
    CHECK_THROWS_MATCHES(Config::parse_string("a = 1\na = 2\n", "dup.cfg"), ConfigError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("dup.cfg:2: duplicate key 'a'")));
    CHECK_THROWS_MATCHES(
        Config::parse_string("just words\n", "bad.cfg"), ConfigError,
        Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("bad.cfg:1")));
    CHECK_THROWS_AS(Config::parse_string("= 3\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse_file("/nonexistent/path.cfg"), ConfigError);

    const auto cfg = Config::parse_string("n = x\nd = twelve\nb = maybe\n");
    CHECK_THROWS_AS(cfg.get_int("n"), ConfigError);
    CHECK_THROWS_AS(cfg.get_double("d"), ConfigError);
    CHECK_THROWS_AS(cfg.get_bool("b"), ConfigError);
    CHECK_THROWS_AS(cfg.get_string("missing"), ConfigError);
    CHECK_THROWS_AS(cfg.require_known({"n", "d"}), ConfigError);
    CHECK_NOTHROW(cfg.require_known({"n", "d", "b"}));
}

TEST_CASE("config site lists") {
    const auto cfg = Config::parse_string("probes = (0,0);(1,-2)\n"
                                          "pairs = (1,0)->(1,1);(0,1)->(2,1)\n"
                                          "bad = (1;2)\n");
    const auto sites = cfg.get_sites("probes");
    REQUIRE(sites.size() == 2);
    CHECK(sites[0] == Site2{0, 0});
    CHECK(sites[1] == Site2{1, -2});
    const auto pairs = cfg.get_site_pairs("pairs");
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0].first == Site2{1, 0});
    CHECK(pairs[0].second == Site2{1, 1});
    CHECK(pairs[1].first == Site2{0, 1});
    CHECK(pairs[1].second == Site2{2, 1});
    CHECK_THROWS_AS(cfg.get_sites("bad"), ConfigError);
    CHECK_THROWS_AS(cfg.get_site_pairs("probes"), ConfigError);
}

TEST_CASE("config overlay") {
    auto cfg = Config::parse_string("n = 3\nseed = 1\n");
    cfg.set("seed", "42"); // command-line flags override file values
    cfg.set("extra", "x");
    CHECK(cfg.get_int("n") == 3);
    CHECK(cfg.get_uint("seed") == 42);
    CHECK(cfg.get_string("extra") == "x");
}
