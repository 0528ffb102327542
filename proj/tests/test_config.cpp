#include "catch_amalgamated.hpp"

#include "tsslab/config.hpp"
#include "tsslab/errors.hpp"
#include "tsslab/export.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace tsslab;

TEST_CASE("built-in preset holds the appendix parameters", "[config]")
{
    const SystemParams p = load_preset("paper-appendix");
    CHECK(p == SystemParams{});
    CHECK(p.Xs == 4.071);
    CHECK(p.kipll == 1400.0);
    CHECK_THROWS_AS(load_preset("no-such-preset"), ConfigError);
}

TEST_CASE("written configs parse back to the same run", "[config]")
{
    RunConfig c;
    c.scenario = reference_case(2, SystemParams{});
    c.scenario.params.Kramp = 2.9;
    c.scenario.horizon = 12.5;
    c.methods = parse_methods({"eac"});
    c.sweep = {{"i_rd2", {0.3, 0.35}}, {"t_c", {0.7}}};
    const std::string text = write_config(c);
    CHECK(parse_config(text) == c);

    RunConfig perm;
    perm.scenario.t_c = kPermanentFault;
    perm.scenario.i_rq2.reset();
    CHECK(parse_config(write_config(perm)) == perm);
    CHECK(write_config(perm).find("t_c = permanent") != std::string::npos);
}

TEST_CASE("sections and dotted keys are equivalent", "[config]")
{
    const RunConfig a = parse_config("pll.kp = 42\nscenario.Ug2 = 0.3\n");
    const RunConfig b = parse_config("[pll]\nkp = 42  # comment\n\n[scenario]\nUg2 = 0.3\n");
    CHECK(a == b);
    CHECK(a.scenario.params.kppll == 42.0);
    CHECK(a.scenario.Ug2 == 0.3);
}

TEST_CASE("JSON input is accepted", "[config]")
{
    const RunConfig j = parse_config(R"({"pll": {"kp": 42}, "scenario": {"Ug2": 0.3, "t_c": "permanent"},
                                         "run": {"methods": ["eac", "boa"]}})");
    CHECK(j.scenario.params.kppll == 42.0);
    CHECK(j.scenario.permanent());
    CHECK(j.methods == parse_methods({"eac", "boa"}));
}

TEST_CASE("malformed configs are config errors", "[config]")
{
    CHECK_THROWS_AS(parse_config("pll.kp 60\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("pll.kq = 60\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("pll.kp = sixty\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("pll.kp = 60\npll.kp = 61\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[pll\nkp = 60\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("{\"pll\": {\"kp\": }"), ConfigError);
    CHECK_THROWS_AS(parse_config("sweep.Xg = 0.5\n"), ConfigError);
}

TEST_CASE("preset resolution order", "[config]")
{
    // Preset keys apply before parameter keys regardless of position.
    const auto dir = std::filesystem::temp_directory_path() / "tsslab_presets_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir / "weak.conf");
        os << "[grid]\nXg = 0.7\n";
    }
    ::setenv("TSSLAB_PRESET_DIR", dir.c_str(), 1);
    const RunConfig c = parse_config("pll.kp = 50\npreset = weak\n");
    CHECK(c.preset == "weak");
    CHECK(c.scenario.params.Xg == 0.7);
    CHECK(c.scenario.params.kppll == 50.0);

    const RunConfig o = parse_config("preset = weak\n", "<t>", "paper-appendix");
    CHECK(o.scenario.params.Xg == 0.5);
    ::unsetenv("TSSLAB_PRESET_DIR");
    std::filesystem::remove_all(dir);
}

TEST_CASE("config hash", "[config]")
{
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
    CHECK(fnv1a_hex("abc") != fnv1a_hex("abd"));
}
