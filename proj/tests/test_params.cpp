#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "kyle/errors.hpp"
#include "kyle/params.hpp"

namespace kyle {
namespace {

ModelParams make(double sigma, double T, double sxi, double sb, double eps, double gamma) {
    ModelParams p;
    p.sigma = sigma;
    p.horizon = T;
    p.sigma_xi = sxi;
    p.sigma_beta = sb;
    p.eps = eps;
    p.gamma = gamma;
    return p;
}

std::string failing_field(const ModelParams& p) {
    try {
        validate(p);
    } catch (const DomainError& e) {
        return e.field();
    }
    return "";
}

TEST(Params, EpsZeroCollapsesSigmaE) {
    const auto vp = validate(make(1, 1, 1, 0, 0, 0));
    EXPECT_DOUBLE_EQ(vp.sigma_e, 1.0);
    EXPECT_DOUBLE_EQ(vp.eg, 0.0);
}

TEST(Params, SigmaEUnitCase) {
    const auto vp = validate(make(1, 1, 1, 1, 1, 1));
    EXPECT_NEAR(vp.sigma_e, std::sqrt(3.0), 1e-15);
}

TEST(Params, StructVectors) {
    const auto vp = validate(ModelParams{});
    // eps*gamma = 0.1, sigma^2 T + sigma_beta^2 = 1.25
    EXPECT_DOUBLE_EQ(vp.eg, 0.1);
    EXPECT_DOUBLE_EQ(vp.var_z_t, 1.25);
    EXPECT_NEAR(vp.vec.u.x, 0.125, 1e-16);
    EXPECT_DOUBLE_EQ(vp.vec.u.y, 1.0);
    EXPECT_DOUBLE_EQ(vp.vec.w.x, 0.1);
    EXPECT_DOUBLE_EQ(vp.vec.w.y, 1.0);
    EXPECT_DOUBLE_EQ(vp.vec.v.x, 1.0);
    EXPECT_DOUBLE_EQ(vp.vec.v.y, -0.1);
    // w'u = sigma_e^2
    EXPECT_NEAR(dot(vp.vec.w, vp.vec.u), vp.sigma_e * vp.sigma_e, 1e-15);
    EXPECT_NEAR(dot(vp.vec.v, vp.vec.w), 0.0, 1e-16);
}

TEST(Params, RejectsOutOfRangeNamingField) {
    EXPECT_EQ(failing_field(make(0, 1, 1, 0, 0, 0)), "sigma");
    EXPECT_EQ(failing_field(make(1, 0, 1, 0, 0, 0)), "horizon");
    EXPECT_EQ(failing_field(make(1, 1, 0, 0, 0, 0)), "sigma_xi");
    EXPECT_EQ(failing_field(make(1, 1, 1, -1, 0, 0)), "sigma_beta");
    EXPECT_EQ(failing_field(make(1, 1, 1, 0, -0.1, 0)), "eps");
    EXPECT_EQ(failing_field(make(1, 1, 1, 0, 0, -1)), "gamma");
    EXPECT_EQ(failing_field(make(NAN, 1, 1, 0, 0, 0)), "sigma");
    EXPECT_EQ(failing_field(make(1, 1, 1, 0, 0, INFINITY)), "gamma");
}

TEST(Params, RunConfigBounds) {
    RunConfig rc;
    EXPECT_NO_THROW(validate(rc));
    rc.n_paths = 0;
    EXPECT_THROW(validate(rc), DomainError);
    rc = {};
    rc.n_steps = 0;
    EXPECT_THROW(validate(rc), DomainError);
    rc = {};
    rc.t_stop_fraction = 1.5;
    EXPECT_THROW(validate(rc), DomainError);
    rc = {};
    rc.grid_refinement = -1;
    EXPECT_THROW(validate(rc), DomainError);
}

TEST(Params, ConfigParsing) {
    std::istringstream in(
        "# reference set, shifted\n"
        "sigma = 2\n"
        "gamma=0.25   # inline comment\n"
        "\n"
        "m_xi = 1.5\n"
        "n_paths = 1234\n"
        "seed = 7\n"
        "grid_refinement = 3\n");
    ModelParams p;
    RunConfig rc;
    load_config(in, p, rc);
    EXPECT_DOUBLE_EQ(p.sigma, 2.0);
    EXPECT_DOUBLE_EQ(p.gamma, 0.25);
    EXPECT_DOUBLE_EQ(p.m_xi, 1.5);
    EXPECT_DOUBLE_EQ(p.eps, 0.2);
    EXPECT_EQ(rc.n_paths, 1234u);
    EXPECT_EQ(rc.seed, 7u);
    EXPECT_EQ(rc.grid_refinement, 3);
}

TEST(Params, ConfigUnknownKeyNamesKey) {
    std::istringstream in("sigma = 1\nlambda = 3\n");
    ModelParams p;
    RunConfig rc;
    try {
        load_config(in, p, rc);
        FAIL() << "expected DomainError";
    } catch (const DomainError& e) {
        EXPECT_EQ(e.field(), "lambda");
    }
}

TEST(Params, ConfigBadValue) {
    ModelParams p;
    RunConfig rc;
    EXPECT_THROW(apply_setting("sigma", "abc", p, rc), DomainError);
    EXPECT_THROW(apply_setting("sigma", "1.0x", p, rc), DomainError);
    EXPECT_THROW(apply_setting("n_paths", "-3", p, rc), DomainError);
}

TEST(Params, MissingConfigFile) {
    ModelParams p;
    RunConfig rc;
    EXPECT_THROW(load_config_file("/nonexistent/kyle.cfg", p, rc), DomainError);
}

}  // namespace
}  // namespace kyle
