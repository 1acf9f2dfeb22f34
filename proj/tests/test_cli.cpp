#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "bungee/raster.hpp"

using namespace bungee;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int status = -1;
    std::string out;
};

CliResult run(const std::string& args) {
    const std::string cmd = std::string(BUNGEE_LAB_EXE) + " " + args + " 2>/dev/null";
    CliResult r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int st = pclose(p);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::size_t count_lines(const std::string& s, const std::string& prefix) {
    std::istringstream is(s);
    std::size_t n = 0;
    for (std::string line; std::getline(is, line);)
        if (line.rfind(prefix, 0) == 0) ++n;
    return n;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "bungee_lab_tests";
    fs::create_directories(dir);
    return dir / name;
}

RasterJob first_strip_job(int w, int h) {
    RasterJob job;
    job.view = {-0.05, 0.05, 100.0, 106.0};
    job.width = w;
    job.height = h;
    job.classifier.max_steps = 50'000;
    job.classifier.high_threshold = 104.0;
    job.classifier.low_threshold = 101.5;
    return job;
}

}  // namespace

TEST(Raster, PpmHeaderAndPalette) {
    Raster r{2, 1, {OrbitLabel::escaping, OrbitLabel::bungee}};
    const std::string bytes = r.ppm();
    EXPECT_EQ(bytes, std::string("P6\n2 1\n255\n\xff\xff\xff\xff\x00\x00", 17));
    EXPECT_EQ(palette(OrbitLabel::bounded), (Rgb{0, 0, 0}));
    EXPECT_EQ(palette(OrbitLabel::undecided), (Rgb{128, 128, 128}));
}

TEST(Raster, PixelCentresRunTopDown) {
    RasterJob job;
    job.view = {0.0, 4.0, 0.0, 2.0};
    job.width = 4;
    job.height = 2;
    EXPECT_EQ(job.pixel_center(0, 0), (Point{0.5, 1.5}));
    EXPECT_EQ(job.pixel_center(3, 1), (Point{3.5, 0.5}));
}

TEST(Raster, RejectsBadJobs) {
    RasterJob job;
    job.view = {1.0, 0.0, 0.0, 1.0};
    EXPECT_THROW(job.validate(), std::invalid_argument);
    job.view = {0.0, 1.0, 0.0, 1.0};
    job.width = 0;
    EXPECT_THROW(job.validate(), std::invalid_argument);
    job.width = 20000;
    job.height = 20000;
    EXPECT_THROW(job.validate(), std::invalid_argument);
}

TEST(Raster, SingleEscapingPixel) {
    RasterJob job;
    job.view = {0.79, 0.81, -3.01, -2.99};
    job.width = job.height = 1;
    const Raster r = render_raster(job, GlobalMap(GlobalMapConfig::make(MapKind::h)));
    EXPECT_EQ(r.labels.front(), OrbitLabel::escaping);
}

TEST(Raster, IdentityRegionIsUniformlyBounded) {
    RasterJob job;
    job.view = {2.0, 4.0, 2.0, 4.0};
    job.width = job.height = 16;
    const Raster r = render_raster(job, GlobalMap(GlobalMapConfig::make(MapKind::f)));
    EXPECT_EQ(r.count(OrbitLabel::bounded), 256u);
}

TEST(Raster, SmallFirstStripRasterIsStable) {
    const GlobalMap f(GlobalMapConfig::make(MapKind::f));
    const Raster a = render_raster(first_strip_job(60, 60), f);
    const Raster b = render_raster(first_strip_job(60, 60), f);
    EXPECT_EQ(a.ppm(), b.ppm());
    EXPECT_GT(a.count(OrbitLabel::bungee), 0u);
    EXPECT_GT(a.count(OrbitLabel::bounded), 0u);
    EXPECT_EQ(fnv1a64(a.ppm()), 0xd56861fc05d96403ull);
}

TEST(Raster, WorkerCountDoesNotChangeTheImage) {
    const GlobalMap f(GlobalMapConfig::make(MapKind::f));
    const RasterJob job = first_strip_job(24, 24);
    const std::string one = render_raster(job, f, 1).ppm();
    EXPECT_EQ(render_raster(job, f, 4).ppm(), one);
    EXPECT_EQ(render_raster(job, f, 7).ppm(), one);
}

TEST(Parallel, VisitsEveryIndexOnce) {
    std::vector<int> hits(1001, 0);
    parallel_for(hits.size(), [&](std::size_t i) { ++hits[i]; }, 5);
    EXPECT_EQ(std::count(hits.begin(), hits.end(), 1), 1001);
}

TEST(Fnv, KnownVectors) {
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
}

TEST(Cli, OrbitLabels) {
    CliResult a = run("orbit --map f --point 5,5 --out ''");
    EXPECT_EQ(a.status, 0);
    EXPECT_EQ(a.out.rfind("BOUNDED\n", 0), 0u) << a.out;
    CliResult b = run("--max-steps 50000000 orbit --map f --point 0,101.5 --out ''");
    EXPECT_EQ(b.status, 0);
    EXPECT_EQ(b.out.rfind("BUNGEE\n", 0), 0u) << b.out;
    CliResult c = run("orbit --map h --point 0.8,-3 --out ''");
    EXPECT_EQ(c.out.rfind("ESCAPING\n", 0), 0u) << c.out;
}

TEST(Cli, OrbitWritesExport) {
    const fs::path out = scratch("orbit.csv");
    CliResult r = run("--max-steps 10 orbit --map psi --point 0,101 --out " + out.string());
    ASSERT_EQ(r.status, 0);
    const std::string csv = slurp(out);
    EXPECT_EQ(csv.rfind("step,x,y,modulus\n0,0,101,101\n", 0), 0u) << csv;
    EXPECT_EQ(count_lines(csv, ""), 12u);
}

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run("orbit --map f --point 1").status, 2);
    EXPECT_EQ(run("orbit --map nope --point 1,1 --out ''").status, 2);
    EXPECT_EQ(run("orbit").status, 2);
    EXPECT_EQ(run("--low 300 orbit --point 1,1 --out ''").status, 2);
    EXPECT_EQ(run("--y0 50 geometry").status, 2);
    EXPECT_EQ(run("").status, 2);
    EXPECT_EQ(run("frobnicate").status, 2);
    EXPECT_EQ(run("--help").status, 0);
}

TEST(Cli, PsiOrbitOutsideTheStripIsAUsageError) {
    EXPECT_EQ(run("orbit --map psi --point 0,50 --out ''").status, 2);
}

TEST(Cli, GeometryDump) {
    CliResult two = run("geometry --n-max 2");
    EXPECT_EQ(two.status, 0);
    EXPECT_EQ(count_lines(two.out, "segment "), 8u);
    CliResult one = run("geometry --n-max 1");
    EXPECT_EQ(one.out.rfind("segment n=1 kind=S1 y_lo=101 y_hi=103 ", 0), 0u) << one.out;
    CliResult none = run("geometry --n-max 0");
    EXPECT_EQ(none.status, 0);
    EXPECT_TRUE(none.out.empty());
    EXPECT_EQ(run("geometry --n-max 99").status, 2);
}

TEST(Cli, VerifyPassesByDefault) {
    CliResult r = run("verify --n-max 20");
    EXPECT_EQ(r.status, 0) << r.out;
    EXPECT_EQ(count_lines(r.out, "PASS n="), 20u);
    EXPECT_NE(r.out.find("RESULT PASS"), std::string::npos);
}

TEST(Cli, VerifyFailsForLargePerturbation) {
    CliResult r = run("--delta 0.5 verify");
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.out.find("RESULT FAIL"), std::string::npos);
}

TEST(Cli, RasterSinglePixel) {
    const fs::path out = scratch("pixel.ppm");
    CliResult r = run("raster --map h --viewport 0.79,0.81,-3.01,-2.99 --width 1 --height 1 --out " + out.string());
    ASSERT_EQ(r.status, 0) << r.out;
    EXPECT_EQ(slurp(out), std::string("P6\n1 1\n255\n\xff\xff\xff", 14));
    EXPECT_EQ(run("raster --viewport 1,0,0,1 --out " + out.string()).status, 2);
    EXPECT_EQ(run("raster --map f --viewport 2,4,2,4 --width 2 --height 2 --out /nonexistent/dir/x.ppm").status, 1);
}

TEST(Cli, ConfigFileWithFlagOverride) {
    const fs::path cfg = scratch("lab.ini");
    std::ofstream(cfg) << "# classifier budget\ny0 = 150\nmax-steps = 1000\nhigh = 250\n";
    CliResult r = run("--config " + cfg.string() + " --y0 120 --print-config orbit --point 1,1");
    EXPECT_EQ(r.status, 0);
    EXPECT_NE(r.out.find("y0=120"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("max-steps=1000"), std::string::npos);
    EXPECT_NE(r.out.find("high=250"), std::string::npos);
    EXPECT_EQ(r.out.find("print-config"), std::string::npos);
}
