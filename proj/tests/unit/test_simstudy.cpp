#include "doctest.h"

#include "tailrisk/csv_io.hpp"
#include "tailrisk/errors.hpp"
#include "tailrisk/simstudy.hpp"

#include <cmath>
#include <sstream>

using namespace tailrisk;

namespace {
StudyConfig tiny(GammaSpec scenario = GammaSpec::Constant) {
    StudyConfig c = study_preset("desk");
    c.n_obs = 290;
    c.window = 250;
    c.n_reps = 3;
    c.bootstrap_B = 200;
    c.models = {ModelId::Oracle, ModelId::nGARCH, ModelId::LLQAR};
    c.scenario = scenario;
    c.seed = 11;
    return c;
}

std::string dump(const StudyReport& r) {
    std::ostringstream o;
    write_rejections_csv(o, r);
    write_rmse_csv(o, r);
    write_regions_csv(o, r);
    write_diagnostics_csv(o, r);
    write_study_totals_csv(o, r);
    return o.str();
}
}  // namespace

TEST_SUITE("simstudy") {

TEST_CASE("gamma profiles") {
    CHECK(gamma_profile(GammaSpec::Constant, 5).values == std::vector<double>(5, 1.0));
    const auto step = gamma_profile(GammaSpec::Step, 1000).values;
    CHECK(step[399] == 1.0);
    CHECK(step[400] == 1.5);
    CHECK(step[500] == 1.5);
    CHECK(step[700] == 0.75);
    CHECK(step[900] == 0.75);
    const auto smooth = gamma_profile(GammaSpec::Smooth, 1000).values;
    CHECK(smooth[0] == doctest::Approx(1.0));
    CHECK(smooth[125] == doctest::Approx(1.5));
    for (auto spec : {GammaSpec::Step, GammaSpec::Smooth}) {
        const auto v = gamma_profile(spec, 1000).values;
        double m = 0.0;
        for (double g : v) {
            CHECK(g > 0.0);
            m += g / 1000.0;
        }
        CHECK(m >= 0.8);
        CHECK(m <= 1.2);
    }
    CHECK(parse_gamma_spec(to_string(GammaSpec::Smooth)) == GammaSpec::Smooth);
}

TEST_CASE("presets and JSON config") {
    CHECK(study_preset("desk").n_reps == 20);
    CHECK(study_preset("full").n_reps == 100);
    CHECK_THROWS_AS(study_preset("huge"), ConfigError);

    const auto c = study_config_from_json(R"({"preset":"desk","n_obs":600,"llqar":{"es_sublevels":10}})",
                                          {{"scenario", "Step"}, {"egarch.nu", "5"}, {"models", "[\"LLQAR\"]"}});
    CHECK(c.n_reps == 20);
    CHECK(c.n_obs == 600);
    CHECK(c.llqar.es_sublevels == 10);
    CHECK(c.scenario == GammaSpec::Step);
    CHECK(c.egarch.nu == 5.0);
    CHECK(c.models == std::vector<ModelId>{ModelId::LLQAR});

    const auto back = study_config_from_json(study_config_to_json(c));
    CHECK(study_config_to_json(back) == study_config_to_json(c));

    CHECK_THROWS_AS(study_config_from_json(R"({"n_obz":600})"), ConfigError);
    CHECK_THROWS_AS(study_config_from_json(R"({"window":1200})"), ConfigError);
    CHECK_THROWS_AS(study_config_from_json("{", {}), ConfigError);
}

TEST_CASE("oracle-only study has zero error") {
    StudyConfig c = tiny();
    c.n_reps = 1;
    c.models = {ModelId::Oracle};
    const auto r = run_mc_study(c);
    REQUIRE(r.reps.size() == 2);
    for (const auto& rep : r.reps) {
        CHECK(rep.completed);
        CHECK(*rep.backtest.rmse_var == 0.0);
        CHECK(*rep.backtest.rmse_es == 0.0);
    }
}

TEST_CASE("small study invariants and thread independence") {
    StudyConfig c = tiny(GammaSpec::Step);
    c.threads = 1;
    const auto a = run_mc_study(c);
    c.threads = 3;
    const auto b = run_mc_study(c);
    CHECK(dump(a) == dump(b));
    CHECK(a.es_below_var == 0);
    CHECK(a.var_monotonicity_violations == 0);
    for (const auto& row : a.rejections) {
        CHECK(row.uc_pct >= 0.0);
        CHECK(row.uc_pct <= 100.0);
        CHECK(row.completed <= c.n_reps);
    }
    for (const auto& rep : a.reps) {
        if (rep.model == ModelId::Oracle) CHECK(*rep.backtest.rmse_var == 0.0);
        else if (rep.completed) CHECK(*rep.backtest.rmse_var > 0.0);
    }
    const std::vector<ModelId> ms{ModelId::nGARCH, ModelId::LLQAR};
    const auto ranks = mean_rmse_ranks(a, ms, 0.05);
    CHECK(ranks.at(ModelId::nGARCH) + ranks.at(ModelId::LLQAR) == doctest::Approx(3.0));
}

}
