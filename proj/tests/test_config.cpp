#include "doctest.h"

#include <filesystem>
#include <string>

#include "mqcavity/config.hpp"
#include "mqcavity/io.hpp"

using namespace mqc;

namespace {

std::string errorOf(const std::string& text)
{
    try {
        parseConfig(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

bool contains(const std::string& s, const std::string& part)
{
    return s.find(part) != std::string::npos;
}

} // namespace

TEST_CASE("minimal config gets every default")
{
    RunConfig c = parseConfig(R"({"experiment": "spectrum", "system": {"n_cavities": 3, "g_f": 0.135, "nu_f": 5.0}})");
    CHECK(c.experiment == "spectrum");
    CHECK(c.system.n_cavities == 3);
    CHECK(c.system.fock_levels == 2);
    CHECK(c.system.g_q1f == 0.0135);
    CHECK(c.system.kappa == 0.001);
    CHECK(c.system.gamma == 0.005);
    CHECK(c.solver.max_step == 0.5);
    CHECK(c.solver.sample_dt == 0.2);
    CHECK(c.output == "./");
    CHECK_FALSE(c.losses);
    CHECK(c.threads == 1);
    CHECK_FALSE(c.g_f_sweep.has_value());
}

TEST_CASE("validation and strict schema errors")
{
    CHECK(contains(errorOf(R"({"experiment": "spectrum", "system": {"g_f": -0.1}})"), "g_f must be > 0"));
    std::string e = errorOf(R"({"experiment": "spectrum", "system": {"fock_level": 3}})");
    CHECK(contains(e, "unknown field"));
    CHECK(contains(e, "fock_level"));
    CHECK(contains(errorOf(R"({"experiment": "spectrum", "sytem": {}})"), "sytem"));
    CHECK(contains(errorOf(R"({"experiment": "iswap", "options": {"t_ofset1": 5}})"), "t_ofset1"));
    CHECK(contains(errorOf(R"({"experiment": "spectrum", "system": {"n_cavities": "three"}})"), "n_cavities"));
    CHECK(contains(errorOf(R"({"experiment": "warp"})"), "warp"));
    CHECK(contains(errorOf(R"({"system": {}})"), "experiment"));
    CHECK(contains(errorOf(R"({"experiment": "spectrum",)"), "config parse error"));
    CHECK_FALSE(errorOf(R"({"experiment": "spectrum", "losses": 1})").empty());
}

TEST_CASE("sweeps")
{
    RunConfig c = parseConfig(R"({"experiment": "stark",
        "sweep": [{"parameter": "nu_q2", "min": 4.5, "max": 5.0, "npoints": 6},
                  {"parameter": "tau", "min": 0, "max": 100, "npoints": 200}]})");
    CHECK(c.stark.nu_q2 == SweepSpec{"nu_q2", 4.5, 5.0, 6, "linear"});
    CHECK(c.stark.ramsey.tau.npoints == 200);

    CHECK(contains(errorOf(R"({"experiment": "iswap", "sweep": {"parameter": "tau", "min": 0, "max": 1, "npoints": 2}})"),
                   "tau"));
    CHECK_FALSE(errorOf(R"({"experiment": "ramsey", "sweep": [{"parameter": "tau", "min": 0, "max": 1, "npoints": 2},
                                                               {"parameter": "tau", "min": 0, "max": 2, "npoints": 2}]})")
                    .empty());
    CHECK_FALSE(errorOf(R"({"experiment": "ramsey", "sweep": {"min": 0, "max": 1, "npoints": 2}})").empty());
    CHECK_FALSE(errorOf(R"({"experiment": "ramsey", "sweep": {"parameter": "tau", "min": 1, "max": 0, "npoints": 2}})")
                    .empty());
}

TEST_CASE("experiment options")
{
    RunConfig c = parseConfig(R"({"experiment": "iswap", "losses": true,
        "options": {"timing": "eigenmode", "basis": "full", "t_offset2": 80}})");
    CHECK(c.iswap.timing == ISwapTiming::Eigenmode);
    CHECK(c.iswap.basis == Basis::Full);
    CHECK(c.iswap.t_offset2 == 80.0);
    CHECK(c.iswap.with_losses);
    CHECK(contains(errorOf(R"({"experiment": "iswap", "options": {"timing": "soon"}})"), "options.timing"));

    RunConfig r = parseConfig(R"({"experiment": "ramp-sweep", "system": {"g_f": 0.07}, "options": {"cavities": [1, 6]}})");
    CHECK(r.ramp.cavities == std::vector<int>{1, 6});
    CHECK(r.ramp.nu_top.value() == doctest::Approx(5.0 + 2 * 0.07 + 0.1));

    RunConfig k = parseConfig(R"({"experiment": "contour"})");
    CHECK(k.ramp.cavities == std::vector<int>{1, 6});

    RunConfig s = parseConfig(R"({"experiment": "stark", "threads": 2})");
    CHECK(s.stark.ramsey.t_hold.has_value());
    CHECK(s.stark.ramsey.threads == 2);
}

TEST_CASE("pulses are only accepted for evolve")
{
    const char* seg = R"("pulses": {"q1": [{"t_start": 5, "ramp_up": 2, "hold": 10, "target": 5.0}]})";
    RunConfig c = parseConfig(std::string(R"({"experiment": "evolve", "options": {"t_end": 40}, )") + seg + "}");
    REQUIRE(c.evolve.schedule.q1.segments.size() == 1);
    CHECK(c.evolve.schedule.q1.segments[0].ramp_down == 2.0);
    CHECK(c.evolve.schedule.q1.base == c.system.nu_q1_idle);
    CHECK(c.evolve.solver.t1 == 40.0);
    CHECK(contains(errorOf(std::string(R"({"experiment": "iswap", )") + seg + "}"), "pulses"));
    CHECK_FALSE(errorOf(R"({"experiment": "evolve", "pulses": {"q1": [{"t_start": 5, "hold": 10, "target": -1}]}})")
                    .empty());
}

TEST_CASE("resolved configs survive a round trip")
{
    namespace fs = std::filesystem;
    int seen = 0;
    for (const auto& entry : fs::directory_iterator(MQCAVITY_CONFIG_DIR)) {
        if (entry.path().extension() != ".json") continue;
        ++seen;
        CAPTURE(entry.path().string());
        RunConfig a = loadConfig(entry.path().string());
        const std::string text = configToJson(a);
        RunConfig b = parseConfig(text);
        CHECK(configToJson(b) == text);
        CHECK(b.experiment == a.experiment);
        CHECK(b.system == a.system);
        CHECK(b.solver == a.solver);
        CHECK(b.output == a.output);
    }
    CHECK(seen == static_cast<int>(kExperimentTags.size()));
    CHECK_THROWS_AS(loadConfig("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("CSV rendering")
{
    CHECK(formatValue(0.1) == "0.1");
    CHECK(formatValue(-0.0) == "0");
    CHECK(formatValue(1.0 / 3.0) == "0.333333333333");
    CHECK(formatValue(4.809081207) == "4.809081207");
    CHECK(formatValue(1e-20) == "1e-20");

    Table t{"evolve", {"t_ns", "n_q1", "n_q2", "trace"}, {}};
    CHECK(tableToCsv(t) == "t_ns,n_q1,n_q2,trace\n");
    t.addRow({0.0, 1.0, 0.0, 1.0});
    CHECK(tableToCsv(t) == "t_ns,n_q1,n_q2,trace\n0,1,0,1\n");
    t.rows.push_back({1.0});
    CHECK_THROWS(tableToCsv(t));
    CHECK_THROWS_AS(writeCsv(Table{"x", {"a"}, {}}, "/nonexistent-dir/x.csv", "{}"), IoError);
}
