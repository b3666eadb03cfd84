#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "psdstein/pmf.hpp"
#include "psdstein/psd.hpp"

using namespace psdstein;
using Catch::Approx;

TEST_CASE("compensated sum recovers small addends") {
    CompensatedSum<double> s;
    s += 1.0;
    for (int i = 0; i < 1000; ++i) s += 1e-16;
    s += -1.0;
    CHECK(s.value() == Approx(1e-13).epsilon(1e-6));
}

TEST_CASE("compensated sum keeps infinities") {
    CompensatedSum<double> s;
    s += 1.0;
    s += INFINITY;
    s += 2.0;
    CHECK(std::isinf(s.value()));
}

TEST_CASE("D statistic of simple laws") {
    CHECK(d_statistic(point_mass(0)) == 2.0);
    PMFTable u = make_pmf(std::vector<double>(10, 0.1));
    CHECK(d_statistic(u) == Approx(0.2).margin(1e-15));
}

TEST_CASE("D statistic of Poisson(2) equals direct summation") {
    const auto t = pmf_panjer(poisson(2.0), 40);
    double direct = 0.0;
    for (std::size_t k = 0; k <= 41; ++k) {
        const double pk = k <= 40 ? t.masses[k] : 0.0;
        const double pkm = k >= 1 ? t.masses[k - 1] : 0.0;
        direct += std::abs(pk - pkm);
    }
    CHECK(d_statistic(t) == Approx(direct).margin(1e-14));
}

TEST_CASE("D statistic is twice the TV distance to the unit shift") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> w(1 + rng() % 12);
        double z = 0.0;
        for (auto& x : w) z += x = u(rng);
        for (auto& x : w) x /= z;
        const auto p = make_pmf(w);
        CHECK(d_statistic(p) == Approx(2.0 * exact_tv(p, shifted(p)).value).margin(1e-14));
        CHECK(d_statistic_weights(w) == Approx(d_statistic(p)).margin(1e-14));
    }
}

TEST_CASE("exact TV basics") {
    const auto p = pmf_panjer(poisson(1.5), 30);
    const auto tv = exact_tv(p, p);
    CHECK(tv.value == 0.0);
    CHECK(tv.lower == 0.0);
    CHECK(tv.upper == Approx(p.tail_mass_bound).margin(1e-300));
    CHECK(exact_tv(point_mass(0), point_mass(1)).value == 1.0);
}

TEST_CASE("make_pmf trims zeros") {
    const auto t = make_pmf({0.0, 0.0, 0.5, 0.5, 0.0});
    CHECK(t.support_min == 2);
    CHECK(t.size() == 2);
    CHECK(t.top() == 3);
    CHECK(t.at(1) == 0.0);
    CHECK(t.at(3) == 0.5);
    CHECK(t.mean() == Approx(2.5));
    CHECK(t.variance() == Approx(0.25));
    CHECK(t.is_valid());
}
