#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "bungee/analysis.hpp"

using namespace bungee;

TEST(Halton, RadicalInverse) {
    EXPECT_EQ(halton(1, 2), 0.5);
    EXPECT_EQ(halton(2, 2), 0.25);
    EXPECT_EQ(halton(3, 2), 0.75);
    EXPECT_NEAR(halton(1, 3), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(halton(5, 3), 7.0 / 9.0, 1e-15);
}

TEST(Region, SamplesStayInside) {
    const Region band = Region::strip_band(200.0, 1e4);
    for (int i = 0; i < 11; ++i) {
        for (int j = 0; j < 11; ++j) {
            const Point p = band.sample(i, j, 11, 11);
            EXPECT_GE(p.y, 200.0);
            EXPECT_LE(p.y, 1e4);
            EXPECT_LE(std::fabs(p.x), 1.0 / p.y);
        }
    }
    const Region box = Region::rectangle(-3.0, 3.0, -3.0, 0.0);
    const Point c = box.sample(0, 0, 4, 4);
    EXPECT_GE(c.x, -3.0);
    EXPECT_LE(c.y, 0.0);
}

TEST(Distortion, GIsNearlyConformal) {
    const GlobalMap g(GlobalMapConfig::make(MapKind::g));
    const auto rep = distortion_sweep(g, Region::rectangle(-3.0, 3.0, -3.0, 0.0), 100, 100);
    EXPECT_EQ(rep.samples, 10000u);
    EXPECT_EQ(rep.nonfinite, 0u);
    EXPECT_LT(rep.sup_K, 2.0);
    EXPECT_TRUE(rep.det_positive);
    // cross-check at a finer grid
    const auto fine = distortion_sweep(g, Region::rectangle(-3.0, 3.0, -3.0, 0.0), 400, 400);
    EXPECT_LT(fine.sup_K, 2.0);
    EXPECT_NEAR(fine.sup_K, rep.sup_K, 0.1);
}

TEST(Distortion, PsiHighInTheStripIsBounded) {
    const GlobalMap psi(GlobalMapConfig::make(MapKind::psi));
    const auto rep = distortion_sweep(psi, Region::strip_band(200.0, 1e4), 101, 101, 1e-6);
    EXPECT_LE(rep.sup_K, 3.0);
    EXPECT_GT(rep.sup_K, 2.4);  // the shear limit is ((1 + sqrt 5)/2)^2
    EXPECT_TRUE(rep.det_positive);
    EXPECT_LE(rep.min_K, rep.median_K);
    EXPECT_LE(rep.median_K, rep.q99_K);
    EXPECT_LE(rep.q99_K, rep.sup_K);
}

TEST(Distortion, IdentityIsExactlyOne) {
    const GlobalMap id(GlobalMapConfig::make(MapKind::identity));
    const auto rep = distortion_sweep(id, Region::rectangle(-5.0, 5.0, -5.0, 5.0), 30, 30);
    EXPECT_EQ(rep.sup_K, 1.0);
    const GlobalMap f(GlobalMapConfig::make(MapKind::f));
    EXPECT_EQ(distortion_sweep(f, Region::rectangle(2.0, 4.0, 2.0, 4.0), 20, 20).sup_K, 1.0);
}

TEST(Distortion, LargeDeltaBlowsUp) {
    const GlobalMap g(GlobalMapConfig::make(MapKind::g, StripParams{}, PerturbParams(0.5)));
    const auto rep = distortion_sweep(g, Region::rectangle(-3.0, 3.0, -3.0, 0.0), 100, 100);
    EXPECT_FALSE(rep.sup_K < 2.0 && rep.det_positive);
}

TEST(EscapeLaw, OneStepHitsTheUpperEndpoint) {
    const StripParams sp;
    const Point z = psi_apply({0.0, 101.0}, sp);
    EXPECT_NEAR(z.y * z.y - 101.0 * 101.0 - 2.0, 1.0 / (101.0 * 101.0), 1e-8);
    EXPECT_LT(escape_law_check({101.0}, 1).max_relative_violation, 1e-12);
}

TEST(EscapeLaw, LongRunsStayInsideTheBounds) {
    const auto a = escape_law_check({101.0}, 1'000'000);
    EXPECT_LT(a.max_relative_violation, 1e-6);
    EXPECT_GE(a.final_heights[0], 1417.81);
    EXPECT_LE(a.final_heights[0], 1417.86);
    const auto b = escape_law_check({1000.0}, 100'000);
    EXPECT_LT(b.max_relative_violation, 1e-8);
    EXPECT_THROW(escape_law_check({101.0}, 0), std::invalid_argument);
}

TEST(Conjugacy, DefectIsTiny) {
    const GlobalMap f(GlobalMapConfig::make(MapKind::f));
    EXPECT_LT(conjugacy_defect(f, 12, 10'000), 1e-8);
}

TEST(Evidence, DefaultBundleIsComplete) {
    const auto b = evidence_bundle(GlobalMapConfig::make(MapKind::h), ClassifierConfig{});
    EXPECT_EQ(b.bounded.label, OrbitLabel::bounded);
    EXPECT_EQ(b.bungee.label, OrbitLabel::bungee);
    EXPECT_EQ(b.escaping.label, OrbitLabel::escaping);
    EXPECT_EQ(b.pair_bounded.label, OrbitLabel::bounded);
    EXPECT_EQ(b.pair_bungee.label, OrbitLabel::bungee);
    EXPECT_LT(b.pair_separation, 1e-3);
    EXPECT_GT(b.bounded.z.y, 0.0);
    EXPECT_GT(b.bungee.z.y, 0.0);
    EXPECT_LT(b.escaping.z.y, 0.0);
    EXPECT_TRUE(b.complete());
}

TEST(Evidence, StarvedBudgetLeavesBundleIncomplete) {
    ClassifierConfig cc;
    cc.max_steps = 1000;
    EvidenceOptions opt;
    opt.pair_max_steps = 1000;
    const auto b = evidence_bundle(GlobalMapConfig::make(MapKind::h), cc, opt);
    EXPECT_EQ(b.bungee.label, OrbitLabel::bounded);
    EXPECT_FALSE(b.complete());
}

TEST(Report, DefaultRunPassesAndIsDeterministic) {
    VerifyOptions opt;
    std::ostringstream a, b;
    const auto r1 = run_verification(opt);
    r1.write(a);
    run_verification(opt).write(b);
    EXPECT_TRUE(r1.all_pass()) << a.str();
    EXPECT_EQ(a.str(), b.str());
    EXPECT_NE(a.str().find("[disjointness]"), std::string::npos);
    EXPECT_NE(a.str().find("RESULT PASS"), std::string::npos);
    for (const auto& s : r1.sections)
        if (s.name == "disjointness") EXPECT_EQ(s.lines.size(), 20u);
}
